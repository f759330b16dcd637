import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_auc
from gra.exceptions import EvaluationError
from gra.metrics import auc


def test_perfect():
    assert auc([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0


def test_tie():
    assert auc([0.5, 0.5], [1, 0]) == 0.5


def test_brute_force_random(rng):
    s = rng.uniform(size=50)
    y = rng.integers(0, 2, size=50)
    assert auc(s, y) == brute_auc(s, y)


def test_single_class():
    with pytest.raises(EvaluationError):
        auc([0.1, 0.2], [1, 1])


def test_bad_labels():
    with pytest.raises(EvaluationError):
        auc([0.1, 0.2], [1, 2])
    with pytest.raises(EvaluationError):
        auc([0.1], [1, 0])


labelled = st.integers(2, 60).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 6).map(lambda v: v / 6.0), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n)))


@settings(max_examples=200, deadline=None)
@given(labelled)
def test_matches_pair_counting(data):
    scores, labels = data
    if len(set(labels)) < 2:
        return
    assert auc(scores, labels) == brute_auc(scores, labels)


@settings(max_examples=100, deadline=None)
@given(labelled)
def test_monotone_invariance_and_inversion(data):
    scores, labels = data
    if len(set(labels)) < 2:
        return
    s = np.asarray(scores)
    base = auc(s, labels)
    assert auc(np.exp(s), labels) == base
    assert auc(3.0 * s + 2.0, labels) == base
    assert auc(1.0 - s, labels) == pytest.approx(1.0 - base, abs=1e-12)
    assert auc(np.asarray(labels, float), labels) == 1.0
