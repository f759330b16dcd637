"""End-to-end experiment: load, split, train encoder, attack, score, report."""

import contextlib
import dataclasses
import json
import logging
import statistics
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .attack import AttackConfig, GraphReconstructionAttack, score_pairs
from .datasets import resolve_dataset
from .encoders import MODELS, EncoderConfig, TrainConfig, train_encoder
from .encoders.snn import Q_NORMS, SNN_MODES
from .exceptions import ConfigError, DataError, GRAError
from .graph import build_partial_adjacency, sample_known_non_edges, split_edges

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_SEEDS = (0, 1, 2, 3, 4)


@dataclass(frozen=True)
class RunConfig:
    """Every knob of one pipeline run, as a flat key-value record."""

    dataset: str = "cora"
    encoder: str = "gcn"
    snn_mode: str = "edge-lifted-d1"
    q_norm: str = "abs"
    known_fraction: float = 0.8
    seed: int = 0
    hidden_dim: int = 0
    heads: int = 8
    activation: str = "relu"
    output_layer: str = "post-activation"
    epochs: int = 200
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    optimizer: str = "adam"
    attack_epochs: int = 300
    attack_learning_rate: float = 0.01
    loss_mask: str = "full-matrix"
    decoder_dim: int = 16
    train_per_class: int = 20
    val_size: int = 500
    data_dir: str = ""

    def __post_init__(self):
        if self.encoder not in MODELS:
            raise ConfigError(f"encoder must be one of {MODELS}, got {self.encoder!r}")
        if self.snn_mode not in SNN_MODES:
            raise ConfigError(f"snn_mode must be one of {SNN_MODES}, got {self.snn_mode!r}")
        if self.q_norm not in Q_NORMS:
            raise ConfigError(f"q_norm must be one of {Q_NORMS}, got {self.q_norm!r}")
        if not 0.0 < self.known_fraction <= 1.0:
            raise ConfigError(f"known_fraction must lie in (0, 1], got {self.known_fraction}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.hidden_dim < 0:
            raise ConfigError("hidden_dim must be >= 0 (0 picks the model default)")

    @classmethod
    def from_mapping(cls, values, notice_defaults=False):
        """Build from string or typed values; keys may use ``-`` or ``_``."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for raw_key, raw in values.items():
            key = raw_key.strip().replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {raw_key!r}")
            kwargs[key] = _coerce(key, known[key].type, raw)
        if notice_defaults:
            for name in known:
                if name not in kwargs:
                    log.info("config: %s defaulted to %r", name, known[name].default)
        return cls(**kwargs)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    def encoder_label(self):
        return f"snn[{self.snn_mode}]" if self.encoder == "snn" else self.encoder


def _coerce(key, kind, raw):
    if not isinstance(raw, str):
        return raw
    try:
        if kind in ("int", int):
            return int(raw, 0)
        if kind in ("float", float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {raw!r}") from None
    return raw


def parse_config_file(path):
    """Read ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep or not key.strip():
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


@dataclass(frozen=True)
class EvalReport:
    dataset: str
    encoder: str
    snn_mode: str
    known_fraction: float
    seed: int
    auc: float
    pair_count: int
    train_accuracy: float
    val_accuracy: float
    encoder_loss: float
    decoder_loss: float
    config: dict
    wall_times: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def to_dict(self, include_timings=False):
        out = dataclasses.asdict(self)
        if not include_timings:
            out.pop("wall_times")
        return out


@contextlib.contextmanager
def _stage(name, timings):
    start = time.perf_counter()
    try:
        yield
    except GRAError as exc:
        exc.stage = name
        exc.args = (f"[{name}] {exc}",)
        raise
    finally:
        timings[name] = time.perf_counter() - start


def run_pipeline(config, bundle=None):
    """Run one attack end to end and return its :class:`EvalReport`."""
    timings = {}
    with _stage("load", timings):
        if bundle is None:
            bundle = resolve_dataset(config.dataset, root=config.data_dir or None,
                                     seed=config.seed, train_per_class=config.train_per_class,
                                     val_size=config.val_size)
    with _stage("split", timings):
        split = split_edges(bundle.graph, config.known_fraction, config.seed)
        a_star = build_partial_adjacency(bundle.graph, split)
        known_non_edges = None
        if config.loss_mask == "known-pairs":
            known_non_edges = sample_known_non_edges(bundle.graph, split,
                                                     split.known.shape[0], config.seed)
    with _stage("encoder", timings):
        enc_cfg = EncoderConfig(config.encoder, config.hidden_dim or None, config.heads,
                                config.snn_mode, config.q_norm, config.activation,
                                config.output_layer)
        train_cfg = TrainConfig(config.epochs, config.learning_rate, config.weight_decay,
                                config.seed, config.optimizer)
        _, reps, encoder = train_encoder(bundle, enc_cfg, train_cfg)
        pred = encoder.predict(bundle.features, graph=bundle.graph)
        train_acc = _accuracy(pred, bundle.labels, bundle.train_mask)
        val_acc = _accuracy(pred, bundle.labels, bundle.val_mask)
    with _stage("attack", timings):
        attack = GraphReconstructionAttack.from_config(AttackConfig(
            config.attack_epochs, config.attack_learning_rate, config.loss_mask,
            config.decoder_dim, config.seed))
        attack.fit(reps, a_star, known_non_edges)
    with _stage("evaluate", timings):
        scores = score_pairs(attack, split)
        value = scores.auc()
    log.info("%s/%s seed=%d: AUC %.4f", bundle.name, config.encoder_label(), config.seed, value)
    return EvalReport(
        dataset=config.dataset, encoder=config.encoder,
        snn_mode=config.snn_mode if config.encoder == "snn" else "",
        known_fraction=config.known_fraction, seed=config.seed, auc=value,
        pair_count=int(scores.labels.size), train_accuracy=train_acc, val_accuracy=val_acc,
        encoder_loss=encoder.loss_curve_[-1], decoder_loss=attack.loss_curve_[-1],
        config=config.to_dict(), wall_times=timings)


def _accuracy(pred, labels, mask):
    if not np.any(mask):
        return 0.0
    return float(np.mean(pred[mask] == labels[mask]))


def _canonical(value):
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.6g}")
    return value


def canonical_json(obj):
    """Sorted keys, floats rounded to 6 significant digits, trailing newline."""
    return json.dumps(_canonical(obj), sort_keys=True, indent=2) + "\n"


def emit_report(report, path, include_timings=False):
    data = report.to_dict(include_timings) if hasattr(report, "to_dict") else report
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(data))
    except OSError as exc:
        raise DataError(f"cannot write report to {path}: {exc.strerror}") from exc


@dataclass(frozen=True)
class ComparisonTable:
    rows: list
    verdicts: list
    reports: dict

    def to_dict(self):
        return {"rows": self.rows, "verdicts": self.verdicts, "format_version": FORMAT_VERSION,
                "reports": {k: [r.to_dict() for r in v] for k, v in self.reports.items()}}


def verdict(a, b):
    if a > b:
        return ">"
    if a < b:
        return "<"
    return "tie"


def compare_encoders(configs, seeds=DEFAULT_SEEDS, runner=run_pipeline):
    """One row per config with its median AUC over ``seeds``, plus pairwise verdicts."""
    configs = list(configs)
    if len(configs) < 2:
        raise ConfigError("comparison needs at least two configurations")
    datasets = {c.dataset for c in configs}
    if len(datasets) != 1:
        raise ConfigError(f"configurations use different datasets: {sorted(datasets)}")
    if not seeds:
        raise ConfigError("comparison needs at least one seed")
    rows, reports, labels = [], {}, []
    for cfg in configs:
        label = cfg.encoder_label()
        if label in labels:
            label = f"{label}#{sum(lbl.split('#')[0] == label for lbl in labels) + 1}"
        labels.append(label)
        runs = [runner(cfg.replace(seed=s)) for s in seeds]
        reports[label] = runs
        aucs = [r.auc for r in runs]
        rows.append({"encoder": label, "median_auc": statistics.median(aucs), "aucs": aucs,
                     "seeds": list(seeds)})
    verdicts = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            a, b = rows[i], rows[j]
            verdicts.append({"left": a["encoder"], "right": b["encoder"],
                             "verdict": verdict(a["median_auc"], b["median_auc"]),
                             "delta": a["median_auc"] - b["median_auc"]})
    return ComparisonTable(rows, verdicts, reports)
