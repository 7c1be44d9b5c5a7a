"""Command-line interface: radius | solve | eval | reproduce-portfolio.

Exit codes: 0 success, 1 configuration error, 2 infeasible/unbounded,
3 numerical failure. Set MMDDRCCP_LOG=debug|info|warning for verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .conic import SolveStatus
from .config import ConfigError, load_config
from .constraints import UnsupportedModelError
from .experiments import (
    RESULTS_HEADER,
    SUMMARY_HEADER,
    SUMMARY_SCHEMA,
    compute_radius,
    reproduce_portfolio,
    run_eval,
    run_solve,
    write_results_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


def _setup_logging():
    level = os.environ.get("MMDDRCCP_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmddrccp",
        description="Distributionally robust chance-constrained programs over MMD ambiguity sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("radius", "construct the ambiguity radius from data"),
        ("solve", "build and solve the configured reformulation"),
        ("eval", "evaluate a solution record out of sample"),
        ("reproduce-portfolio", "run the multi-seed portfolio grid"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="path to the YAML run configuration")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--seed-override", type=int, default=None, help="override the data seed")
        p.add_argument("--jobs", type=int, default=1, help="worker threads for grid runs")
        if name == "eval":
            p.add_argument("--record", required=True, help="path to a solution JSON record")
    return parser


def _status_exit(status: str) -> int:
    if status == SolveStatus.OPTIMAL.value:
        return EXIT_OK
    if status in (SolveStatus.INFEASIBLE.value, SolveStatus.UNBOUNDED.value):
        return EXIT_INFEASIBLE
    return EXIT_NUMERICAL


def cmd_radius(args) -> int:
    cfg = load_config(args.config)
    _, report = compute_radius(cfg, seed_override=args.seed_override)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "radius.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    _, record = run_solve(cfg, seed_override=args.seed_override)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "solution.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    print(json.dumps({k: record[k] for k in ("status", "objective", "x", "path")}, sort_keys=True))
    return _status_exit(record["status"])


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    record_path = Path(args.record)
    if not record_path.exists():
        print(f"error: solution record not found: {record_path}", file=sys.stderr)
        return EXIT_CONFIG
    record = json.loads(record_path.read_text(encoding="utf-8"))
    row = run_eval(cfg, record, seed_override=args.seed_override)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "eval.csv"
    new_file = not out_path.exists()
    with out_path.open("a", encoding="utf-8", newline="") as fh:
        if new_file:
            fh.write("# mmddrccp-results v1\n")
            fh.write(",".join(RESULTS_HEADER) + "\n")
        fh.write(",".join(_csv_cell(row.get(col, "")) for col in RESULTS_HEADER) + "\n")
    print(json.dumps(row, sort_keys=True))
    return EXIT_OK


def _csv_cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_reproduce_portfolio(args) -> int:
    cfg = load_config(args.config)
    rows, summary = reproduce_portfolio(cfg, jobs=max(1, args.jobs))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_results_csv(out_dir / "results.csv", rows)
    write_results_csv(out_dir / "summary.csv", summary, header=SUMMARY_HEADER, schema=SUMMARY_SCHEMA)
    for entry in summary:
        print(
            f"N={entry['N_train']:<5d} {entry['method']:<9s} "
            f"n_opt={entry['n_optimal']:<3d} "
            f"obj={_num(entry['objective_mean'])}+/-{_num(entry['objective_std'])} "
            f"cvar_out={_num(entry['cvar_out_mean'])}+/-{_num(entry['cvar_out_std'])}"
        )
    return EXIT_OK


def _num(v) -> str:
    return "nan" if v is None else f"{v:.4f}"


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "radius": cmd_radius,
        "solve": cmd_solve,
        "eval": cmd_eval,
        "reproduce-portfolio": cmd_reproduce_portfolio,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, UnsupportedModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
