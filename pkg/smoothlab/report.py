"""
Row emission: CSV, log-log plot data, parquet and a static figure.

Output order is the row sort key (experiment, function, p, param), so equal
row sets give byte-identical files.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .experiments import EquivalenceRow

log = logging.getLogger(__name__)

COLUMNS = ["experiment", "function", "p", "param", "lhs", "rhs", "ratio", "flag"]
FORMATS = ("csv", "plotdata", "parquet", "png")
_FLOATS = ("param", "lhs", "rhs", "ratio")


def _require_pandas():
    try:
        import pandas as pd
    except ImportError:
        raise SystemExit("pandas not installed. Install with: pip install -r requirements-analysis.txt")
    return pd


def rows_frame(rows: Sequence[EquivalenceRow]):
    pd = _require_pandas()
    ordered = sorted(rows, key=EquivalenceRow.sort_key)
    return pd.DataFrame([r.as_dict() for r in ordered], columns=COLUMNS)


def write_csv(rows: Sequence[EquivalenceRow], path: Path) -> None:
    df = rows_frame(rows)
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        df.to_csv(f, index=False, float_format="%.17g", na_rep="nan", lineterminator="\n")


def read_rows(path: Path) -> List[EquivalenceRow]:
    pd = _require_pandas()
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    rows = []
    for rec in df[COLUMNS].to_dict("records"):
        for key in _FLOATS:
            rec[key] = float(rec[key])
        rows.append(EquivalenceRow(**rec))
    return rows


def _series(rows: Sequence[EquivalenceRow]) -> Dict[Tuple[str, str, str], List[EquivalenceRow]]:
    groups: Dict[Tuple[str, str, str], List[EquivalenceRow]] = {}
    for row in sorted(rows, key=EquivalenceRow.sort_key):
        groups.setdefault((row.experiment, row.function, row.p), []).append(row)
    return groups


def _positive(x: float) -> bool:
    return math.isfinite(x) and x > 0


def write_plotdata(rows: Sequence[EquivalenceRow], path: Path) -> None:
    """Two-column log10(param) log10(value) blocks, one per side and group."""
    lines: List[str] = []
    for (experiment, function, p), group in _series(rows).items():
        for side in ("lhs", "rhs"):
            lines.append(f"# {experiment} {function} p={p} {side}")
            for row in group:
                v = getattr(row, side)
                if _positive(row.param) and _positive(v):
                    lines.append(f"{math.log10(row.param):.12g} {math.log10(v):.12g}")
            lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def write_parquet(rows: Sequence[EquivalenceRow], path: Path) -> None:
    try:
        rows_frame(rows).to_parquet(path, index=False)
    except ImportError:
        raise SystemExit("pandas/pyarrow not installed. Install with: pip install pandas pyarrow")


def write_png(rows: Sequence[EquivalenceRow], path: Path) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise SystemExit("matplotlib not installed. Install with: pip install -r requirements-analysis.txt")

    fig, ax = plt.subplots(figsize=(10, 6))
    for (experiment, function, p), group in _series(rows).items():
        pts = [(r.param, r.lhs, r.rhs) for r in group if _positive(r.param) and _positive(r.lhs) and _positive(r.rhs)]
        if not pts:
            continue
        xs = [x for x, _, _ in pts]
        line = ax.loglog(xs, [y for _, y, _ in pts], marker="o", label=f"{experiment} {function} p={p}")[0]
        ax.loglog(xs, [y for _, _, y in pts], linestyle="--", color=line.get_color())
    ax.set_xlabel("n")
    ax.set_ylabel("lhs (solid) / rhs (dashed)")
    ax.legend(fontsize="x-small")
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)


def report_emit(rows: Sequence[EquivalenceRow], path: Path, fmt: str = "csv") -> Path:
    if not rows:
        raise ValueError("no rows to report")
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format: {fmt!r} (expected one of {', '.join(FORMATS)})")
    out = Path(path).expanduser()
    out.parent.mkdir(parents=True, exist_ok=True)
    writer = {"csv": write_csv, "plotdata": write_plotdata, "parquet": write_parquet, "png": write_png}[fmt]
    writer(rows, out)
    log.info("wrote %d rows as %s to %s", len(rows), fmt, out)
    return out
