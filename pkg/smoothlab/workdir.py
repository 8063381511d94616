#!/usr/bin/env python3
"""
smoothlab workdir utilities.

Goal: keep experiment outputs out of the code repository by default.

Default:
  SMOOTHLAB_WORKDIR = ~/SmoothLab_Workspaces
  project_root = SMOOTHLAB_WORKDIR/smoothlab

Override:
  - env: SMOOTHLAB_WORKDIR
  - CLI flags: --workdir / --run-id / --out
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Optional


PROJECT_SLUG = "smoothlab"


def default_workdir_root() -> Path:
    return Path(os.environ.get("SMOOTHLAB_WORKDIR", str(Path.home() / "SmoothLab_Workspaces"))).expanduser()


def project_workdir_root(workdir_root: Optional[Path] = None) -> Path:
    root = (workdir_root or default_workdir_root()).expanduser().resolve()
    return root / PROJECT_SLUG


def new_run_id(now: Optional[datetime] = None) -> str:
    dt = now or datetime.now()
    return dt.strftime("%Y%m%d-%H%M%S")


def experiment_root(kind: str, *, workdir_root: Optional[Path] = None) -> Path:
    return project_workdir_root(workdir_root) / kind


@dataclass(frozen=True)
class RunPaths:
    run_id: str
    run_dir: Path
    rows_csv: Path
    plotdata: Path
    meta_json: Path


def output_paths(out_dir: Path, run_id: str) -> RunPaths:
    base = Path(out_dir).expanduser()
    return RunPaths(
        run_id=run_id,
        run_dir=base,
        rows_csv=base / "rows.csv",
        plotdata=base / "plotdata.txt",
        meta_json=base / "run_meta.json",
    )


def run_paths(kind: str, *, run_id: Optional[str] = None, workdir_root: Optional[Path] = None) -> RunPaths:
    rid = run_id or new_run_id()
    return output_paths(experiment_root(kind, workdir_root=workdir_root) / "runs" / rid, rid)
