import logging

import numpy as np
import pytest

from gra.datasets import load_cora_format, load_edge_list, resolve_dataset
from gra.exceptions import ConfigError, ConsistencyError, DataError, ParseError


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestEdgeList:
    def test_coalescing_and_self_loops(self, tmp_path, caplog):
        p = write(tmp_path / "g.txt", "a b\nb a\na a\n")
        with caplog.at_level(logging.WARNING):
            b = load_edge_list(p)
        assert b.graph.n_nodes == 2 and b.graph.n_edges == 1
        assert b.graph.self_loops_dropped == 1
        assert "self-loop" in caplog.text

    def test_isolated_nodes_from_features(self, tmp_path):
        e = write(tmp_path / "e.txt", "# nothing\n")
        f = write(tmp_path / "f.txt", "x\t1,2\ny\t3,4\nz\t5,6\n")
        b = load_edge_list(e, f)
        assert b.graph.n_nodes == 3 and b.graph.n_edges == 0
        assert b.features.shape == (3, 2)

    def test_lexicographic_ids(self, tmp_path):
        e = write(tmp_path / "e.txt", "n10\tn2\nn2 n1\n")
        b = load_edge_list(e)
        assert b.node_ids == ("n1", "n10", "n2")
        assert b.graph.edges.tolist() == [[0, 2], [1, 2]]

    def test_parse_error_line_number(self, tmp_path):
        p = write(tmp_path / "g.txt", "a b\n# ok\na b c\n")
        with pytest.raises(ParseError) as info:
            load_edge_list(p)
        assert info.value.line == 3 and ":3" in str(info.value)

    def test_missing_feature_row(self, tmp_path):
        e = write(tmp_path / "e.txt", "a b\nb c\n")
        f = write(tmp_path / "f.txt", "a\t1\nb\t2\n")
        with pytest.raises(ConsistencyError):
            load_edge_list(e, f)

    def test_labels(self, tmp_path):
        e = write(tmp_path / "e.txt", "a b\n")
        lab = write(tmp_path / "l.txt", "a red\nb blue\n")
        b = load_edge_list(e, label_path=lab)
        assert b.class_names == ("blue", "red") and b.labels.tolist() == [1, 0]

    def test_load_twice_identical(self, tmp_path):
        e = write(tmp_path / "e.txt", "a b\nc d\nb c\n")
        f = write(tmp_path / "f.txt", "a\t1,0\nb\t0,1\nc\t1,1\nd\t0,0\n")
        x, y = load_edge_list(e, f), load_edge_list(e, f)
        assert x.features.tobytes() == y.features.tobytes()
        assert x.graph.edges.tobytes() == y.graph.edges.tobytes()
        assert x.train_mask.tobytes() == y.train_mask.tobytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_edge_list(tmp_path / "nope.txt")


class TestCoraFormat:
    def test_toy(self, tmp_path):
        c = write(tmp_path / "toy.content", "p1 1 0 0 A\np2 0 1 0 B\np3 0 0 1 A\n")
        s = write(tmp_path / "toy.cites", "p2 p1\n")
        b = load_cora_format(c, s)
        assert (b.graph.n_nodes, b.graph.n_edges, b.n_classes) == (3, 1, 2)
        assert b.labels.tolist() == [0, 1, 0]
        assert np.array_equal(b.features, np.eye(3))

    def test_empty_cites(self, tmp_path):
        c = write(tmp_path / "toy.content", "p1 1 A\np2 0 B\n")
        s = write(tmp_path / "toy.cites", "")
        assert load_cora_format(c, s).graph.n_edges == 0

    def test_unknown_ids(self, tmp_path, caplog):
        c = write(tmp_path / "toy.content", "p1 1 A\np2 0 B\n")
        s = write(tmp_path / "toy.cites", "p1 p2\np1 ghost\n")
        with caplog.at_level(logging.WARNING):
            assert load_cora_format(c, s).graph.n_edges == 1
        assert "skipped 1" in caplog.text
        with pytest.raises(ConsistencyError):
            load_cora_format(c, s, unknown="error")
        with pytest.raises(ConfigError):
            load_cora_format(c, s, unknown="maybe")

    def test_ragged_content(self, tmp_path):
        c = write(tmp_path / "toy.content", "p1 1 0 A\np2 0 B\n")
        s = write(tmp_path / "toy.cites", "")
        with pytest.raises(ParseError):
            load_cora_format(c, s)


class TestResolve:
    def test_er(self):
        b = resolve_dataset("er:30,0.2", seed=1, train_per_class=3, val_size=5)
        assert b.graph.n_nodes == 30 and b.features.shape == (30, 30)

    def test_sbm(self):
        b = resolve_dataset("sbm:60,3,0.3,0.02", seed=0, train_per_class=5, val_size=10)
        assert b.n_classes == 3 and b.train_mask.sum() == 15

    def test_directory(self, tmp_path):
        write(tmp_path / "toy.content", "p1 1 A\np2 0 B\n")
        write(tmp_path / "toy.cites", "p1 p2\n")
        assert resolve_dataset(str(tmp_path)).graph.n_edges == 1

    def test_named_dataset_from_env(self, tmp_path, monkeypatch):
        (tmp_path / "cora").mkdir()
        write(tmp_path / "cora" / "cora.content", "1 1 A\n2 0 B\n")
        write(tmp_path / "cora" / "cora.cites", "1 2\n")
        monkeypatch.setenv("GRA_DATA_DIR", str(tmp_path))
        assert resolve_dataset("cora").graph.n_nodes == 2

    def test_missing_named_dataset(self, tmp_path):
        with pytest.raises(DataError, match="GRA_DATA_DIR"):
            resolve_dataset("citeseer", root=tmp_path)

    def test_bad_spec(self):
        with pytest.raises(ConfigError):
            resolve_dataset("er:10")
        with pytest.raises(DataError):
            resolve_dataset("/no/such/file.txt")


def _raw_counts(content, cites):
    # plain-text count, independent of the loader
    ids, classes = set(), set()
    with open(content) as fh:
        for line in fh:
            parts = line.split()
            if parts:
                ids.add(parts[0])
                classes.add(parts[-1])
    edges = set()
    with open(cites) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) == 2 and parts[0] in ids and parts[1] in ids and parts[0] != parts[1]:
                edges.add(frozenset(parts))
    return len(ids), len(edges), len(classes)


@pytest.mark.parametrize("name", ["cora", "citeseer"])
def test_raw_dataset_counts_match_independent_parse(name):
    from gra.datasets import _find_raw, data_dir
    try:
        content, cites = _find_raw(data_dir(), name)
    except DataError:
        pytest.skip(f"{name} raw files not under $GRA_DATA_DIR")
    bundle = resolve_dataset(name)
    n, m, k = _raw_counts(content, cites)
    assert (bundle.graph.n_nodes, bundle.graph.edges.shape[0], bundle.n_classes) == (n, m, k)
