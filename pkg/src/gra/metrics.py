import numpy as np
from scipy.stats import rankdata

from .exceptions import EvaluationError


def auc(scores, labels):
    """Rank-based (Mann-Whitney) ROC AUC; tied scores share their average rank.

    Equals the probability that a random positive outscores a random negative,
    with ties counting one half.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise EvaluationError("scores and labels differ in length")
    if not np.all(np.isfinite(scores)):
        raise EvaluationError("scores must be finite")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int((labels == 0).sum())
    if n_pos + n_neg != labels.size:
        raise EvaluationError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("AUC needs both positive and negative examples")
    ranks = rankdata(scores, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
