#!/usr/bin/env python3
"""
Launcher for the smoothlab CLI from a source checkout.

Usage:
  python tools/smoothlab.py corpus list
  python tools/smoothlab.py run spec/experiments/equiv_2_3.json --out out/
"""

from __future__ import annotations

import sys
from pathlib import Path


def find_smoothlab_root(start: Path) -> Path:
    cur = start.resolve()
    for parent in [cur, *cur.parents]:
        if (parent / "smoothlab" / "__init__.py").exists():
            return parent
    raise SystemExit("Cannot locate smoothlab root (missing smoothlab/__init__.py)")


def main() -> int:
    root = find_smoothlab_root(Path(__file__).parent)
    sys.path.insert(0, str(root))
    from smoothlab.cli import main as cli_main  # type: ignore

    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
