"""Loaders for edge lists, Cora/Citeseer raw files, and synthetic graphs.

Node ids are strings mapped to contiguous indices in lexicographic order of
the id strings; class names map to indices the same way.
"""

import logging
import os
import re
from pathlib import Path

import numpy as np

from . import _random
from .exceptions import ConfigError, ConsistencyError, DataError, ParseError
from .graph import DatasetBundle, Graph, erdos_renyi, planted_partition, stratified_masks

log = logging.getLogger(__name__)

DATA_DIR_ENV = "GRA_DATA_DIR"


def _read_lines(path):
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if line and not line.startswith("#"):
                    yield lineno, line
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _read_edge_file(path):
    pairs = []
    for lineno, line in _read_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two node ids, got {len(parts)} fields", path, lineno)
        pairs.append((parts[0], parts[1]))
    return pairs


def _read_feature_file(path):
    rows = {}
    width = None
    for lineno, line in _read_lines(path):
        node, sep, rest = line.partition("\t")
        if not sep:
            raise ParseError("expected '<id><TAB><comma-separated floats>'", path, lineno)
        try:
            values = [float(v) for v in rest.split(",")]
        except ValueError as exc:
            raise ParseError(f"bad feature value ({exc})", path, lineno) from None
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"expected {width} features, got {len(values)}", path, lineno)
        if node in rows:
            raise ParseError(f"duplicate feature row for node {node!r}", path, lineno)
        rows[node] = values
    return rows, width or 0


def _read_label_file(path):
    labels = {}
    for lineno, line in _read_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected '<id> <label>'", path, lineno)
        labels[parts[0]] = parts[1]
    return labels


def _finish(name, ids, pairs, features, label_names, seed, train_per_class, val_size):
    index = {node: i for i, node in enumerate(ids)}
    edges = np.array([(index[u], index[v]) for u, v in pairs], dtype=np.int64).reshape(-1, 2)
    graph = Graph.from_edges(len(ids), edges)
    classes = tuple(sorted(set(label_names)))
    class_index = {c: i for i, c in enumerate(classes)}
    labels = np.array([class_index[c] for c in label_names], dtype=np.int64)
    train, val = stratified_masks(labels, train_per_class, val_size, seed)
    if graph.self_loops_dropped:
        log.warning("%s: dropped %d self-loop(s)", name, graph.self_loops_dropped)
    log.info("%s: %d nodes, %d edges, %d classes", name, graph.n_nodes, graph.n_edges,
             len(classes))
    return DatasetBundle(graph, features, labels, train, val, name=name,
                         node_ids=tuple(ids), class_names=classes)


def load_edge_list(path, feature_path=None, label_path=None, *, seed=0,
                   train_per_class=20, val_size=500):
    """Load a whitespace-separated edge list plus optional features and labels.

    Without a feature file every node gets a one-hot identity feature; without
    a label file every node is in class ``"0"``.
    """
    pairs = _read_edge_file(path)
    ids = {u for pair in pairs for u in pair}
    feature_rows, width = ({}, 0)
    if feature_path is not None:
        feature_rows, width = _read_feature_file(feature_path)
        ids.update(feature_rows)
    label_map = _read_label_file(label_path) if label_path is not None else None
    ids = sorted(ids)
    if feature_path is not None:
        missing = [node for node in ids if node not in feature_rows]
        if missing:
            raise ConsistencyError(
                f"{len(feature_rows)} feature rows for {len(ids)} nodes; "
                f"no features for node {missing[0]!r}")
        features = np.array([feature_rows[node] for node in ids], dtype=np.float64)
        features = features.reshape(len(ids), width)
    else:
        features = np.eye(len(ids))
    if label_map is not None:
        missing = [node for node in ids if node not in label_map]
        if missing:
            raise ConsistencyError(f"no label for node {missing[0]!r}")
        label_names = [label_map[node] for node in ids]
    else:
        label_names = ["0"] * len(ids)
    return _finish(Path(path).stem, ids, pairs, features, label_names, seed,
                   train_per_class, val_size)


def load_cora_format(content_path, cites_path, *, unknown="skip", seed=0,
                     train_per_class=20, val_size=500):
    """Load the published ``.content`` / ``.cites`` pair (Cora, Citeseer).

    ``unknown`` controls citations that mention ids absent from the content
    file: ``"skip"`` drops them with a logged count, ``"error"`` raises.
    """
    if unknown not in ("skip", "error"):
        raise ConfigError(f"unknown must be 'skip' or 'error', got {unknown!r}")
    rows = {}
    width = None
    for lineno, line in _read_lines(content_path):
        parts = line.split()
        if len(parts) < 2:
            raise ParseError("expected '<id> <features...> <label>'", content_path, lineno)
        try:
            values = [float(v) for v in parts[1:-1]]
        except ValueError as exc:
            raise ParseError(f"bad feature value ({exc})", content_path, lineno) from None
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"expected {width} features, got {len(values)}",
                             content_path, lineno)
        if parts[0] in rows:
            raise ParseError(f"duplicate node id {parts[0]!r}", content_path, lineno)
        rows[parts[0]] = (values, parts[-1])

    pairs = []
    skipped = 0
    for lineno, line in _read_lines(cites_path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two node ids, got {len(parts)} fields",
                             cites_path, lineno)
        if parts[0] not in rows or parts[1] not in rows:
            if unknown == "error":
                bad = parts[0] if parts[0] not in rows else parts[1]
                raise ConsistencyError(f"{cites_path}:{lineno}: unknown node id {bad!r}")
            skipped += 1
            continue
        pairs.append((parts[0], parts[1]))
    if skipped:
        log.warning("%s: skipped %d citation(s) with unknown node ids", cites_path, skipped)

    ids = sorted(rows)
    features = np.array([rows[node][0] for node in ids], dtype=np.float64)
    features = features.reshape(len(ids), width or 0)
    label_names = [rows[node][1] for node in ids]
    return _finish(Path(content_path).stem, ids, pairs, features, label_names, seed,
                   train_per_class, val_size)


def _synthetic_features(labels, n_classes, seed, block=50, p_topic=0.1, p_noise=0.01):
    rng = _random.stream(seed, "features")
    n = labels.size
    x = (rng.random((n, block * n_classes)) < p_noise).astype(np.float64)
    topic = rng.random((n, block)) < p_topic
    for c in range(n_classes):
        rows = labels == c
        x[rows, c * block:(c + 1) * block] = np.maximum(
            x[rows, c * block:(c + 1) * block], topic[rows])
    return x


def _parse_numbers(text, spec, count):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"malformed dataset spec {spec!r}") from None
    if len(values) != count:
        raise ConfigError(f"dataset spec {spec!r} needs {count} comma-separated numbers")
    return values


def data_dir(override=None):
    if override is not None:
        return Path(override)
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def _find_raw(root, name):
    for base in (root / name, root):
        content, cites = base / f"{name}.content", base / f"{name}.cites"
        if content.is_file() and cites.is_file():
            return content, cites
    raise DataError(
        f"{name} raw files not found; expected {name}.content and {name}.cites under "
        f"{root / name} or {root} (set {DATA_DIR_ENV})")


def resolve_dataset(spec, *, root=None, seed=0, train_per_class=20, val_size=500):
    """Turn a dataset spec into a bundle.

    Accepted forms: ``cora``, ``citeseer`` (raw files under the data dir),
    ``er:n,p`` (identity features, two random classes),
    ``sbm:n,k,p_in,p_out`` (planted partition with class-correlated binary
    features), a directory holding ``*.content``/``*.cites``, or an edge-list file.
    """
    kw = dict(seed=seed, train_per_class=train_per_class, val_size=val_size)
    name = spec.strip()
    lowered = name.lower()
    if lowered in ("cora", "citeseer"):
        content, cites = _find_raw(data_dir(root), lowered)
        return load_cora_format(content, cites, **kw)
    if lowered.startswith("er:"):
        n, p = _parse_numbers(name[3:], name, 2)
        g = erdos_renyi(int(n), p, seed)
        labels = _random.stream(seed, "labels").integers(0, 2, size=g.n_nodes)
        train, val = stratified_masks(labels, train_per_class, val_size, seed)
        return DatasetBundle(g, np.eye(g.n_nodes), labels, train, val, name=name)
    if lowered.startswith("sbm:"):
        n, k, p_in, p_out = _parse_numbers(name[4:], name, 4)
        g, labels = planted_partition(int(n), int(k), p_in, p_out, seed)
        x = _synthetic_features(labels, int(k), seed)
        train, val = stratified_masks(labels, train_per_class, val_size, seed)
        return DatasetBundle(g, x, labels, train, val, name=name)
    path = Path(name)
    if path.is_dir():
        contents = sorted(path.glob("*.content"))
        if len(contents) != 1:
            raise DataError(f"{path}: expected exactly one *.content file")
        cites = contents[0].with_suffix(".cites")
        if not cites.is_file():
            raise DataError(f"{path}: missing {cites.name}")
        return load_cora_format(contents[0], cites, **kw)
    if path.is_file():
        return load_edge_list(path, **kw)
    if re.fullmatch(r"[a-z_]+", lowered):
        raise DataError(f"unknown dataset {spec!r}")
    raise DataError(f"dataset path {spec!r} does not exist")
