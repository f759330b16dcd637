"""Command-line entry point ``gra``.

Exit codes: 0 success, 2 config error, 3 data error, 4 training error,
5 evaluation error.
"""

import argparse
import logging
import sys

from . import io
from .attack import AttackConfig, GraphReconstructionAttack, score_pairs
from .datasets import DATA_DIR_ENV, resolve_dataset
from .encoders import EncoderConfig, TrainConfig, train_encoder
from .exceptions import ConfigError, DataError, GRAError
from .graph import build_partial_adjacency, sample_known_non_edges, split_edges
from .pipeline import (DEFAULT_SEEDS, RunConfig, canonical_json, compare_encoders,
                       emit_report, parse_config_file, run_pipeline)
from .simplicial import clique_complex

DEFAULTS = RunConfig()


def _add_run_options(p, encoder=True):
    p.add_argument("--dataset", help=f"cora | citeseer | er:n,p | sbm:n,k,p_in,p_out | path "
                   f"(default: {DEFAULTS.dataset}; raw files are looked up under "
                   f"${DATA_DIR_ENV}, default ./data)")
    if encoder:
        p.add_argument("--encoder", choices=["gcn", "gat", "snn"],
                       help=f"representation model (default: {DEFAULTS.encoder})")
        p.add_argument("--snn-mode", choices=["edge-lifted-d1", "node-d0"],
                       help=f"simplicial convolution variant (default: {DEFAULTS.snn_mode})")
    p.add_argument("--known-fraction", type=float,
                   help=f"share of edges disclosed to the attacker "
                        f"(default: {DEFAULTS.known_fraction})")
    p.add_argument("--seed", type=int, help=f"master seed, unsigned 64-bit (default: {DEFAULTS.seed})")
    p.add_argument("--config", help="file of 'key = value' lines; flags override it")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key, e.g. --set attack_epochs=100. Keys and "
                        "defaults: " + ", ".join(f"{k}={v!r}" for k, v in
                                                 DEFAULTS.to_dict().items()))


def _run_config(args):
    values = parse_config_file(args.config) if getattr(args, "config", None) else {}
    for item in getattr(args, "set", []):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        values[key.strip()] = value.strip()
    for key in ("dataset", "encoder", "snn_mode", "known_fraction", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    return RunConfig.from_mapping(values, notice_defaults=True)


def _load(cfg):
    return resolve_dataset(cfg.dataset, root=cfg.data_dir or None, seed=cfg.seed,
                           train_per_class=cfg.train_per_class, val_size=cfg.val_size)


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from exc


def cmd_pipeline(args):
    cfg = _run_config(args)
    report = run_pipeline(cfg)
    for stage, seconds in report.wall_times.items():
        logging.getLogger("gra.timing").info("%s: %.3fs", stage, seconds)
    if args.out:
        emit_report(report, args.out, include_timings=args.timings)
    else:
        sys.stdout.write(canonical_json(report.to_dict(args.timings)))
    return 0


def cmd_complex_stats(args):
    cfg = _run_config(args)
    bundle = _load(cfg)
    stats = clique_complex(bundle.graph, max_dim=args.max_dim).stats()
    _write_text(args.out, canonical_json(stats))
    return 0


def cmd_train(args):
    cfg = _run_config(args)
    bundle = _load(cfg)
    enc_cfg = EncoderConfig(cfg.encoder, cfg.hidden_dim or None, cfg.heads, cfg.snn_mode,
                            cfg.q_norm, cfg.activation, cfg.output_layer)
    train_cfg = TrainConfig(cfg.epochs, cfg.learning_rate, cfg.weight_decay, cfg.seed,
                            cfg.optimizer)
    params, reps, _ = train_encoder(bundle, enc_cfg, train_cfg)
    io.save_representations(args.out, reps)
    if args.csv:
        io.export_csv(args.csv, reps.matrix)
    if args.params_out:
        io.save_matrices(args.params_out, params)
    return 0


def cmd_attack(args):
    cfg = _run_config(args)
    bundle = _load(cfg)
    h = io.load_representations(args.representations)
    split = split_edges(bundle.graph, cfg.known_fraction, cfg.seed)
    a_star = build_partial_adjacency(bundle.graph, split)
    known = None
    if cfg.loss_mask == "known-pairs":
        known = sample_known_non_edges(bundle.graph, split, split.known.shape[0], cfg.seed)
    attack = GraphReconstructionAttack.from_config(AttackConfig(
        cfg.attack_epochs, cfg.attack_learning_rate, cfg.loss_mask, cfg.decoder_dim, cfg.seed))
    attack.fit(h, a_star, known)
    scores = score_pairs(attack, split)
    if args.scores_out:
        scores.to_csv(args.scores_out)
    result = {"auc": scores.auc(), "pair_count": int(scores.labels.size),
              "dataset": cfg.dataset, "seed": cfg.seed, "known_fraction": cfg.known_fraction}
    _write_text(args.out, canonical_json(result))
    return 0


def cmd_compare(args):
    base = _run_config(args)
    encoders = [e.strip() for e in args.encoders.split(",") if e.strip()]
    seeds = tuple(int(s) for s in args.seeds.split(",")) if args.seeds else DEFAULT_SEEDS
    configs = []
    for name in encoders:
        enc, _, mode = name.partition(":")
        configs.append(base.replace(encoder=enc, snn_mode=mode or base.snn_mode))
    table = compare_encoders(configs, seeds)
    _write_text(args.out, canonical_json(table.to_dict()))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gra", description="Graph reconstruction attacks on GCN, GAT and simplicial "
                                "network representations.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="diagnostics on stderr (-v info, -vv debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="load, split, train, attack and report AUC")
    _add_run_options(p)
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--timings", action="store_true",
                   help="include per-stage wall times in the report (breaks byte-identity)")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("complex-stats", help="clique complex sizes |K0|, |K1|, |K2| as JSON")
    _add_run_options(p, encoder=False)
    p.add_argument("--max-dim", type=int, default=2, choices=[0, 1, 2],
                   help="highest simplex dimension (default: 2)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_complex_stats)

    p = sub.add_parser("train", help="train an encoder and save its representations")
    _add_run_options(p)
    p.add_argument("--out", required=True, help="representation container path")
    p.add_argument("--csv", help="also export representations as CSV")
    p.add_argument("--params-out", help="save trained weights to this container")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attack", help="attack saved representations")
    _add_run_options(p, encoder=False)
    p.add_argument("--representations", required=True, help="container written by 'gra train'")
    p.add_argument("--scores-out", help="write pair scores as CSV u,v,score,label")
    p.add_argument("--out", help="result JSON path (default: stdout)")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("compare", help="median AUC per encoder over several seeds")
    _add_run_options(p, encoder=False)
    p.add_argument("--encoders", default="gcn,gat,snn",
                   help="comma list; 'snn:node-d0' selects a mode (default: gcn,gat,snn)")
    p.add_argument("--seeds", default=",".join(map(str, DEFAULT_SEEDS)),
                   help="comma list of seeds (default: 0,1,2,3,4)")
    p.add_argument("--out", help="table JSON path (default: stdout)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else (
        logging.INFO if args.verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.func(args)
    except GRAError as exc:
        print(f"gra: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
