#!/usr/bin/env python3
"""
smoothlab command line.

  corpus list                       catalog of test functions
  run CONFIG [--seed --resolution --out --refine]
  report ROWS --format csv|plotdata|parquet|png [--out PATH]

Exit codes: 0 ok, 2 config or IO error, 3 when a row carries a failing flag.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from collections import Counter
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .config import load_config
from .corpus import describe
from .errors import ConfigError
from .experiments import EquivalenceRow, band_summary, refinement_check, run_experiment, slope_summary
from .report import FORMATS, read_rows, report_emit
from .workdir import default_workdir_root, new_run_id, output_paths, run_paths

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FLAGGED = 3

_SUFFIX = {"csv": ".sorted.csv", "plotdata": ".plotdata.txt", "parquet": ".parquet", "png": ".png"}


def _group_key(group) -> str:
    return "/".join(group)


def cmd_corpus_list(args: argparse.Namespace) -> int:
    for name, d, description in describe():
        print(f"{name}\td={d}\t{description}")
    return EXIT_OK


def _flag_counts(rows: Sequence[EquivalenceRow]) -> Dict[str, int]:
    counts = Counter("error" if r.flag.startswith("error:") else (r.flag or "ok") for r in rows)
    return dict(sorted(counts.items()))


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config).with_overrides(seed=args.seed, N=args.resolution, out=args.out)
    rid = args.run_id or new_run_id()
    if cfg.out:
        paths = output_paths(Path(cfg.out), rid)
    else:
        workdir_root = Path(args.workdir).expanduser() if args.workdir else default_workdir_root()
        paths = run_paths(cfg.kind, run_id=rid, workdir_root=workdir_root)

    started = time.time()
    rows = run_experiment(cfg)
    if not rows:
        raise ConfigError(f"{cfg.kind} produced no rows; check the grid and params")
    report_emit(rows, paths.rows_csv, "csv")
    report_emit(rows, paths.plotdata, "plotdata")

    meta: Dict[str, Any] = {
        "version": __version__,
        "run_id": rid,
        "config": cfg.as_dict(),
        "rows": len(rows),
        "flags": _flag_counts(rows),
        "bands": {
            _group_key(k): {"low": b.low, "high": b.high, "count": b.count, "excluded": b.excluded}
            for k, b in band_summary(rows).items()
        },
        "slopes": {_group_key(k): {"lhs": lhs, "rhs": rhs} for k, (lhs, rhs) in slope_summary(rows).items()},
    }
    if args.refine:
        fine = run_experiment(cfg.with_overrides(N=2 * cfg.N))
        checks = refinement_check(rows, fine)
        for c in checks:
            log.info("refinement %s: change %.2f%% (%s)", _group_key(c.group), 100.0 * c.change, "stable" if c.stable else "unstable")
        meta["refinement"] = {
            "N": [cfg.N, 2 * cfg.N],
            "groups": {_group_key(c.group): {"change": c.change, "stable": c.stable} for c in checks},
        }
    meta["elapsed_s"] = round(time.time() - started, 3)
    paths.meta_json.write_text(json.dumps(meta, ensure_ascii=False, indent=2, allow_nan=True), encoding="utf-8")

    failing = sum(r.failing for r in rows)
    print(
        json.dumps(
            {"rows_csv": str(paths.rows_csv), "plotdata": str(paths.plotdata), "rows": len(rows), "failing": failing},
            ensure_ascii=False,
            indent=2,
        )
    )
    if failing:
        log.warning("%d of %d rows carry a failing flag", failing, len(rows))
        return EXIT_FLAGGED
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    src = Path(args.rows)
    rows = read_rows(src)
    out = Path(args.out) if args.out else src.with_name(src.stem + _SUFFIX[args.format])
    report_emit(rows, out, args.format)
    print(str(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smoothlab", description="Numerical laboratory for moduli of smoothness and approximation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", default=None, help="Logging level (default: $SMOOTHLAB_LOG_LEVEL or WARNING)")
    sub = p.add_subparsers(dest="cmd", required=True)

    p_corpus = sub.add_parser("corpus", help="Corpus of test functions")
    csub = p_corpus.add_subparsers(dest="corpus_cmd", required=True)
    p_list = csub.add_parser("list", help="List corpus functions")
    p_list.set_defaults(func=cmd_corpus_list)

    p_run = sub.add_parser("run", help="Run one experiment config")
    p_run.add_argument("config", help="Config path (.json/.yaml) or id under spec/experiments/")
    p_run.add_argument("--seed", type=int, default=None, help="Override config seed")
    p_run.add_argument("--resolution", type=int, default=None, help="Override grid resolution N")
    p_run.add_argument("--out", default=None, help="Output directory (default: workdir run dir)")
    p_run.add_argument("--workdir", default=None, help="Override SMOOTHLAB_WORKDIR")
    p_run.add_argument("--run-id", default=None, help="Run id (default: timestamp)")
    p_run.add_argument("--refine", action="store_true", help="Repeat at 2N and record ratio-band changes")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("report", help="Re-emit a rows CSV")
    p_rep.add_argument("rows", help="rows.csv from a previous run")
    p_rep.add_argument("--format", choices=FORMATS, default="csv")
    p_rep.add_argument("--out", default=None, help="Output path (default: next to ROWS)")
    p_rep.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    os.environ.setdefault("PYTHONUTF8", "1")
    args = build_parser().parse_args(argv)
    level = (args.log_level or os.environ.get("SMOOTHLAB_LOG_LEVEL") or "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as e:
        print(f"smoothlab: error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
