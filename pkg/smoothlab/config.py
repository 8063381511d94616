#!/usr/bin/env python3
"""
Experiment configs (JSON or YAML), validated into a frozen ExperimentConfig.

Callers may pass either:
- an explicit filesystem path, or
- an experiment id, resolved to spec/experiments/<id>.json (or .yaml)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from . import corpus
from .errors import ConfigError
from .spectral import LebesgueExponent, check_resolution

KINDS = (
    "equiv_2_2",
    "equiv_2_3",
    "equiv_2_4",
    "equiv_2_5",
    "equiv_2_7",
    "equiv_3_4",
    "equiv_3_5",
    "equiv_3_6",
    "equiv_3_8",
    "equiv_3_9",
    "kfunc_lemma",
    "banach_suite",
    "wiener_scan",
)

# corpus dimensions each kind accepts; None = any
KIND_DIMS: Dict[str, Optional[Tuple[int, ...]]] = {
    "equiv_2_2": (1,),
    "equiv_2_3": (1,),
    "equiv_2_4": (1,),
    "equiv_2_5": (1,),
    "equiv_2_7": (1,),
    "equiv_3_6": (2,),
    "banach_suite": (1,),
}

DEFAULT_GRID = (8, 16, 32, 64, 128, 256)
KIND_GRIDS = {"equiv_2_7": (4, 8, 16, 32, 64), "banach_suite": (4, 8, 16, 32)}

_KEYS = {"kind", "corpus", "N", "p", "grid", "out", "seed", "params", "d"}


def default_resolution(d: int) -> int:
    return 1024 if d == 1 else 256


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    corpus: Tuple[str, ...]
    N: int
    p: Tuple[str, ...] = ("2",)
    grid: Tuple[int, ...] = DEFAULT_GRID
    out: Optional[str] = None
    seed: int = 0
    params: Mapping[str, Any] = field(default_factory=dict)
    d: int = 1

    def with_overrides(self, *, seed: Optional[int] = None, N: Optional[int] = None, out: Optional[str] = None) -> "ExperimentConfig":
        changes: Dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = int(seed)
        if N is not None:
            try:
                check_resolution(int(N), self.d)
            except ValueError as e:
                raise ConfigError(str(e)) from e
            changes["N"] = int(N)
        if out is not None:
            changes["out"] = str(out)
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "corpus": list(self.corpus),
            "N": self.N,
            "p": list(self.p),
            "grid": list(self.grid),
            "out": self.out,
            "seed": self.seed,
            "params": dict(self.params),
            "d": self.d,
        }


def _as_tuple(raw: Any, key: str) -> Tuple[Any, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(raw)
    if isinstance(raw, (str, int, float)):
        return (raw,)
    raise ConfigError(f"{key} must be a list, got {type(raw).__name__}")


def parse_config(doc: Mapping[str, Any]) -> ExperimentConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be a mapping")
    unknown = sorted(set(doc) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")

    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind: {kind!r} (expected one of {', '.join(KINDS)})")

    names = tuple(str(n) for n in _as_tuple(doc.get("corpus", ()), "corpus"))
    if not names and kind != "wiener_scan":
        raise ConfigError(f"{kind} needs a nonempty corpus")
    dims = set()
    for name in names:
        try:
            dims.add(corpus.dimension_of(name))
        except ValueError as e:
            raise ConfigError(str(e)) from e
    # "constant" adapts to the others
    fixed = {corpus.dimension_of(n) for n in names if corpus.parse_name(n)[0] != "constant"}
    if len(fixed) > 1:
        raise ConfigError(f"corpus mixes dimensions {sorted(fixed)}")
    d = int(doc.get("d", next(iter(fixed), 1)))
    if fixed and d not in fixed:
        raise ConfigError(f"d={d} does not match the corpus dimension {sorted(fixed)}")
    allowed = KIND_DIMS.get(kind)
    if allowed is not None and d not in allowed:
        raise ConfigError(f"{kind} is defined for d in {list(allowed)}, got d={d}")

    N = doc.get("N", default_resolution(d))
    if isinstance(N, bool) or not isinstance(N, int):
        raise ConfigError(f"N must be an integer, got {N!r}")
    try:
        check_resolution(N, d)
    except ValueError as e:
        raise ConfigError(str(e)) from e

    p_list = _as_tuple(doc.get("p", ("2",)), "p")
    if not p_list:
        raise ConfigError("p list must be nonempty")
    try:
        ps = tuple(str(LebesgueExponent.parse(p)) for p in p_list)
    except ValueError as e:
        raise ConfigError(f"bad exponent in p: {e}") from e

    grid = _as_tuple(doc.get("grid", KIND_GRIDS.get(kind, DEFAULT_GRID)), "grid")
    if not grid:
        raise ConfigError("grid must be nonempty")
    if any(isinstance(n, bool) or not isinstance(n, (int, float)) or not float(n).is_integer() or n < 1 for n in grid):
        raise ConfigError(f"grid entries must be positive integers n (eps = 1/n), got {list(grid)}")

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")

    params = doc.get("params", {}) or {}
    if not isinstance(params, Mapping):
        raise ConfigError("params must be a mapping")
    for key, value in params.items():
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"params.{key} must be finite")

    out = doc.get("out")
    return ExperimentConfig(
        kind=kind,
        corpus=names,
        N=N,
        p=ps,
        grid=tuple(sorted({int(n) for n in grid})),
        out=None if out is None else str(out),
        seed=seed,
        params=dict(params),
        d=d,
    )


def repo_root() -> Path:
    cur = Path(__file__).resolve()
    for parent in [cur, *cur.parents]:
        if (parent / "spec" / "schemas" / "experiment.schema.json").exists():
            return parent
    raise RuntimeError("Cannot locate repo root (missing spec/schemas/experiment.schema.json)")


def resolve_config(config: str) -> Path:
    p = Path(config).expanduser()
    if p.is_file():
        return p.resolve()
    if not p.suffix and not p.is_absolute():
        for ext in (".json", ".yaml", ".yml"):
            cand = repo_root() / "spec" / "experiments" / f"{config}{ext}"
            if cand.is_file():
                return cand
    raise ConfigError(f"config not found: {config}")


def load_config(config: str) -> ExperimentConfig:
    path = resolve_config(config)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    if path.suffix in (".yaml", ".yml"):
        import yaml

        try:
            doc = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from e
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}") from e
    return parse_config(doc)
