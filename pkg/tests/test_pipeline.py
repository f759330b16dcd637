import json

import pytest

from gra.exceptions import ConfigError, DataError, EvaluationError
from gra.pipeline import (ComparisonTable, EvalReport, RunConfig, canonical_json,
                          compare_encoders, emit_report, parse_config_file, run_pipeline, verdict)

FAST = dict(dataset="sbm:80,3,0.2,0.02", epochs=20, attack_epochs=20, train_per_class=5,
            val_size=20)


@pytest.fixture(scope="module")
def report():
    return run_pipeline(RunConfig(**FAST))


class TestRunConfig:
    def test_from_mapping_coerces(self, caplog):
        cfg = RunConfig.from_mapping({"seed": "7", "known-fraction": "0.5", "encoder": "gat"})
        assert (cfg.seed, cfg.known_fraction, cfg.encoder) == (7, 0.5, "gat")

    def test_logs_defaults(self, caplog):
        import logging
        with caplog.at_level(logging.INFO, logger="gra.pipeline"):
            RunConfig.from_mapping({}, notice_defaults=True)
        assert "attack_epochs defaulted" in caplog.text

    @pytest.mark.parametrize("values", [{"bogus": 1}, {"seed": "x"}, {"encoder": "mlp"},
                                        {"known_fraction": 0}, {"seed": -1},
                                        {"snn_mode": "d2"}])
    def test_rejects(self, values):
        with pytest.raises(ConfigError):
            RunConfig.from_mapping(values)

    def test_config_file(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# comment\nencoder = snn  # inline\nseed=3\n\n", encoding="utf-8")
        assert parse_config_file(p) == {"encoder": "snn", "seed": "3"}
        p.write_text("oops\n", encoding="utf-8")
        with pytest.raises(ConfigError, match=":1"):
            parse_config_file(p)
        with pytest.raises(ConfigError):
            parse_config_file(tmp_path / "missing.cfg")


class TestRun:
    def test_report_fields(self, report):
        d = report.to_dict()
        assert 0.0 <= d["auc"] <= 1.0 and d["pair_count"] > 0
        assert d["config"]["dataset"] == FAST["dataset"] and d["format_version"] == 1
        assert "wall_times" not in d
        assert set(report.to_dict(include_timings=True)["wall_times"]) == {
            "load", "split", "encoder", "attack", "evaluate"}

    @pytest.mark.parametrize("encoder,mode", [("gat", "edge-lifted-d1"), ("snn", "node-d0"),
                                              ("snn", "edge-lifted-d1")])
    def test_encoders(self, encoder, mode):
        r = run_pipeline(RunConfig(encoder=encoder, snn_mode=mode, **FAST))
        assert r.encoder == encoder and 0.0 <= r.auc <= 1.0
        assert r.snn_mode == (mode if encoder == "snn" else "")

    def test_known_pairs_mode(self):
        r = run_pipeline(RunConfig(loss_mask="known-pairs", **FAST))
        assert 0.0 <= r.auc <= 1.0

    def test_reports_byte_identical(self, tmp_path, report):
        emit_report(report, tmp_path / "a.json")
        emit_report(run_pipeline(RunConfig(**FAST)), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_full_disclosure_is_evaluation_error(self):
        with pytest.raises(EvaluationError, match=r"\[evaluate\]"):
            run_pipeline(RunConfig(known_fraction=1.0, **FAST))

    def test_stage_tag_on_load(self):
        with pytest.raises(DataError, match=r"\[load\]"):
            run_pipeline(RunConfig(dataset="/no/such/graph.txt"))


class TestReport:
    def test_canonical_json(self):
        text = canonical_json({"b": 1.23456789, "a": [0.1 + 0.2], "c": True})
        assert text == '{\n  "a": [\n    0.3\n  ],\n  "b": 1.23457,\n  "c": true\n}\n'

    def test_json_round_trip(self, tmp_path, report):
        emit_report(report, tmp_path / "r.json")
        back = json.loads((tmp_path / "r.json").read_text())
        for key in ("auc", "train_accuracy", "encoder_loss", "decoder_loss"):
            assert back[key] == float(f"{getattr(report, key):.6g}")
        assert canonical_json(back) == (tmp_path / "r.json").read_text()

    def test_missing_directory(self, tmp_path, report):
        with pytest.raises(DataError, match="nope"):
            emit_report(report, tmp_path / "nope" / "r.json")


class TestCompare:
    def _fake(self, aucs):
        def runner(cfg):
            return EvalReport(cfg.dataset, cfg.encoder, cfg.snn_mode, cfg.known_fraction,
                              cfg.seed, aucs[cfg.encoder][cfg.seed], 10, 1.0, 1.0, 0.1, 0.2,
                              cfg.to_dict())
        return runner

    def test_self_comparison_ties(self):
        cfg = RunConfig(**FAST)
        table = compare_encoders([cfg, cfg], seeds=(0, 1), runner=self._fake(
            {"gcn": {0: 0.7, 1: 0.8}}))
        assert table.rows[0]["median_auc"] == table.rows[1]["median_auc"]
        assert table.verdicts[0]["verdict"] == "tie"
        assert table.rows[1]["encoder"] == "gcn#2"

    def test_three_encoders(self):
        base = RunConfig(**FAST)
        aucs = {"gcn": {0: 0.8, 1: 0.9, 2: 0.7}, "gat": {0: 0.95, 1: 0.6, 2: 0.9},
                "snn": {0: 0.9, 1: 0.9, 2: 0.9}}
        table = compare_encoders([base.replace(encoder=e) for e in ("gcn", "gat", "snn")],
                                 seeds=(0, 1, 2), runner=self._fake(aucs))
        assert isinstance(table, ComparisonTable)
        assert len(table.rows) == 3 and len(table.verdicts) == 3
        medians = {r["encoder"]: r["median_auc"] for r in table.rows}
        assert medians == {"gcn": 0.8, "gat": 0.9, "snn[edge-lifted-d1]": 0.9}
        for v in table.verdicts:
            assert v["verdict"] == verdict(medians[v["left"]], medians[v["right"]])
            recomputed = sorted(r.auc for r in table.reports[v["left"]])[1]
            assert recomputed == medians[v["left"]]
        json.loads(canonical_json(table.to_dict()))

    def test_real_runs_small(self):
        base = RunConfig(**FAST)
        table = compare_encoders([base, base.replace(encoder="snn", snn_mode="node-d0")],
                                 seeds=(0, 1))
        assert [r["encoder"] for r in table.rows] == ["gcn", "snn[node-d0]"]

    def test_errors(self):
        base = RunConfig(**FAST)
        with pytest.raises(ConfigError):
            compare_encoders([base])
        with pytest.raises(ConfigError):
            compare_encoders([base, base.replace(dataset="er:10,0.5")])
        with pytest.raises(ConfigError):
            compare_encoders([base, base], seeds=())


def test_verdict():
    assert (verdict(1, 0), verdict(0, 1), verdict(0.5, 0.5)) == (">", "<", "tie")
