"""Command-line entry point: ``seqfusion generate | run | report``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

from .cv import CVConfig
from .data import load_dataset, write_dataset
from .exceptions import GateExhausted, SeqFusionError
from .experiment import load_report, parse_variants, run_experiment, write_report
from .fusion import FusionConfig
from .gbt import GBTConfig
from .synth import SignalProfile, generate


def _json_arg(text):
    """Accept a JSON literal or a path to a JSON file."""
    path = Path(text)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from None
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("expected a JSON object")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqfusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic two-modality cohort CSV")
    g.add_argument("--n", type=int)
    g.add_argument("--positive-fraction", type=float)
    g.add_argument("--profile", type=_json_arg, default={},
                   help="JSON object (or file) with SignalProfile fields")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run the gated cross-validation experiment")
    r.add_argument("--config", type=_json_arg, default={},
                   help="JSON run config (or file); flags override it")
    r.add_argument("--data")
    r.add_argument("--repeats", type=int)
    r.add_argument("--p-threshold", type=float)
    r.add_argument("--max-attempts", type=int)
    r.add_argument("--variants")
    r.add_argument("--seed", type=int)
    r.add_argument("--jobs", type=int, default=1, help="worker threads for repeats")
    r.add_argument("--out-dir")

    p = sub.add_parser("report", help="print a saved experiment report")
    p.add_argument("--report", required=True)
    p.add_argument("--format", choices=("table", "csv", "overlap"), default="table")
    return parser


def cmd_generate(args, parser) -> int:
    fields = dict(args.profile)
    for key, value in (("n", args.n), ("positive_fraction", args.positive_fraction),
                       ("seed", args.seed)):
        if value is not None:
            fields[key] = value
    try:
        profile = SignalProfile(**fields)
    except (TypeError, SeqFusionError) as exc:
        parser.error(f"invalid profile: {exc}")
    try:
        write_dataset(generate(profile), args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    return 0


def resolve_run_config(args, parser) -> dict:
    cfg = dict(args.config)
    for key, value in (("data", args.data), ("seed", args.seed), ("out_dir", args.out_dir),
                       ("variants", args.variants)):
        if value is not None:
            cfg[key] = value
    cv = dict(cfg.get("cv", {}))
    if args.repeats is not None:
        cv["n_repeats"] = args.repeats
    if args.p_threshold is not None:
        cv["p_threshold"] = args.p_threshold
    if args.max_attempts is not None:
        cv["max_attempts_per_repeat"] = args.max_attempts
    cfg["cv"] = cv
    for key in ("data", "out_dir"):
        if key not in cfg:
            parser.error(f"--{key.replace('_', '-')} is required (flag or config)")
    cfg.setdefault("variants", "A,B,C,D")
    try:
        cfg["variants"] = [v.value for v in parse_variants(cfg["variants"])]
    except ValueError as exc:
        parser.error(f"unknown variant: {exc}")
    return cfg


def _build_configs(cfg):
    seed = int(cfg.get("seed", 0))
    gbt_cfg = GBTConfig(**{**cfg.get("gbt", {}), "seed": seed})
    fusion_fields = dict(cfg.get("fusion", {}))
    fusion_fields.pop("gbt", None)
    fusion = replace(FusionConfig.from_dict(fusion_fields), gbt=gbt_cfg)
    cv = CVConfig(**{**cfg["cv"], "seed": seed})
    return cv, fusion


def cmd_run(args, parser) -> int:
    cfg = resolve_run_config(args, parser)
    try:
        cv, fusion = _build_configs(cfg)
    except (TypeError, SeqFusionError, ValueError) as exc:
        parser.error(f"invalid configuration: {exc}")
    data_path = Path(cfg["data"])
    try:
        dataset = load_dataset(data_path)
        digest = hashlib.sha256(data_path.read_bytes()).hexdigest()
        report = run_experiment(
            dataset, cv, fusion, cfg["variants"], n_jobs=args.jobs,
            extra_config={"seed": int(cfg.get("seed", 0)),
                          "data": {"file": data_path.name, "sha256": digest}})
        write_report(report, cfg["out_dir"])
    except GateExhausted as exc:
        print(f"error: GateExhausted: {exc}", file=sys.stderr)
        return 1
    except (SeqFusionError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(report.table())
    return 0


def cmd_report(args) -> int:
    try:
        report = load_report(args.report)
    except json.JSONDecodeError as exc:
        print(f"error: {args.report}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {args.report}: {exc}", file=sys.stderr)
        return 1
    if args.format == "table":
        print(report.table())
    elif args.format == "csv":
        sys.stdout.write(report.summary_csv())
    else:
        print(report.overlap_table())
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate":
        return cmd_generate(args, parser)
    if args.command == "run":
        return cmd_run(args, parser)
    return cmd_report(args)


if __name__ == "__main__":
    sys.exit(main())
