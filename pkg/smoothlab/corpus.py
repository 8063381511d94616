"""
Test functions with known smoothness, built from explicit coefficient formulas.

Names may carry parameters: "weierstrass(0.5)", "random_trig(16,3)",
"tensor_2d(0.5,1.5)".
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .spectral import GridFunction, Spectrum, check_resolution, synthesize

log = logging.getLogger(__name__)

_NAME = re.compile(r"^\s*([a-z_0-9]+?)\s*(?:\((.*)\))?\s*$")

Builder = Callable[..., np.ndarray]


def _dyadic_weights(gamma: float, N: int) -> Dict[int, float]:
    out: Dict[int, float] = {}
    j = 0
    while 2**j < N // 2:
        out[2**j] = 2.0 ** (-j * gamma)
        j += 1
    return out


def _weierstrass_line(k: np.ndarray, gamma: float, N: int) -> np.ndarray:
    w = _dyadic_weights(gamma, N)
    ak = np.abs(k)
    out = np.zeros(k.shape)
    for freq, amp in w.items():
        out = np.where(ak == freq, 0.5 * amp, out)
    return out


def _abs_sin(K: np.ndarray, N: int) -> np.ndarray:
    k = K[..., 0]
    m = np.abs(k) // 2
    even = k % 2 == 0
    val = np.where(m == 0, 2.0 / math.pi, -(2.0 / math.pi) / (4.0 * m * m - 1.0))
    return np.where(even, val, 0.0)


def _weierstrass(K: np.ndarray, N: int, gamma: float = 0.5) -> np.ndarray:
    return _weierstrass_line(K[..., 0], gamma, N)


def _sawtooth(K: np.ndarray, N: int) -> np.ndarray:
    k = K[..., 0].astype(float)
    out = np.zeros(k.shape, dtype=complex)
    nz = k != 0
    out[nz] = -0.5j / k[nz]
    return out


def _gaussian_smooth(K: np.ndarray, N: int, sigma: float = 0.5) -> np.ndarray:
    k = K[..., 0].astype(float)
    return np.exp(-0.5 * sigma * sigma * k * k)


def _random_trig(K: np.ndarray, N: int, degree: float = 8, seed: float = 0) -> np.ndarray:
    deg = int(degree)
    if not 0 <= deg <= N // 2 - 1:
        raise ValueError(f"random_trig degree must be in 0..{N // 2 - 1}, got {deg}")
    rng = np.random.default_rng(int(seed))
    re_, im_ = rng.standard_normal((2, deg + 1))
    c = (re_ + 1j * im_) / (1.0 + np.arange(deg + 1))
    c[0] = c[0].real
    k = K[..., 0]
    ak = np.clip(np.abs(k), 0, deg)
    vals = np.where(k >= 0, c[ak], np.conj(c[ak]))
    return np.where(np.abs(k) <= deg, vals, 0.0)


def _radial_2d(K: np.ndarray, N: int, gamma: float = 1.0) -> np.ndarray:
    k2 = np.sum(K * K, axis=-1).astype(float)
    return (1.0 + k2) ** (-(gamma + 2.0) / 2.0)


def _tensor_2d(K: np.ndarray, N: int, g1: float = 0.5, g2: float = 1.5) -> np.ndarray:
    return _weierstrass_line(K[..., 0], g1, N) * _weierstrass_line(K[..., 1], g2, N)


def _constant(K: np.ndarray, N: int) -> np.ndarray:
    return np.where(np.all(K == 0, axis=-1), 1.0, 0.0)


def _harmonic(K: np.ndarray, N: int, k: float = 1) -> np.ndarray:
    if abs(int(k)) >= N // 2:
        raise ValueError(f"harmonic index must satisfy |k| < N/2, got {k}")
    return np.where(K[..., 0] == int(k), 1.0, 0.0)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    d: int
    builder: Builder
    description: str
    defaults: Tuple[float, ...] = ()
    # Hoelder-type exponent gamma with omega_r(f; h) ~ h^gamma for gamma < r
    smoothness: Optional[Callable[..., float]] = None


CATALOG: Dict[str, CorpusEntry] = {
    e.name: e
    for e in (
        CorpusEntry("abs_sin", 1, _abs_sin, "|sin x|", (), lambda: 1.0),
        CorpusEntry("weierstrass", 1, _weierstrass, "sum 2^(-j gamma) cos(2^j x), 2^j < N/2", (0.5,), lambda g: g),
        CorpusEntry("sawtooth", 1, _sawtooth, "sum_k sin(kx)/k, a jump at 0", (), lambda: 0.0),
        CorpusEntry("gaussian_smooth", 1, _gaussian_smooth, "coefficients exp(-sigma^2 k^2 / 2)", (0.5,)),
        CorpusEntry("random_trig", 1, _random_trig, "random real trigonometric polynomial (degree, seed)", (8, 0)),
        CorpusEntry("radial_2d", 2, _radial_2d, "coefficients (1+|k|^2)^(-(gamma+2)/2)", (1.0,), lambda g: g),
        CorpusEntry("tensor_2d", 2, _tensor_2d, "product of two lacunary series (gamma1, gamma2)", (0.5, 1.5), min),
        CorpusEntry("constant", 1, _constant, "f = 1"),
        CorpusEntry("harmonic", 1, _harmonic, "e^{ikx}", (1,)),
    )
}


ALIASES = {"const": "constant"}


def parse_name(name: str) -> Tuple[str, Tuple[float, ...]]:
    m = _NAME.match(name)
    base = ALIASES.get(m.group(1), m.group(1)) if m else ""
    if base not in CATALOG:
        raise ValueError(f"Unknown corpus function: {name!r}")
    raw = m.group(2)
    args: List[float] = []
    if raw:
        try:
            args = [float(a) for a in raw.split(",") if a.strip()]
        except ValueError as e:
            raise ValueError(f"bad parameters in {name!r}: {e}") from e
    entry = CATALOG[base]
    if len(args) > len(entry.defaults):
        raise ValueError(f"{base} takes at most {len(entry.defaults)} parameters, got {len(args)}")
    return base, tuple(args) + entry.defaults[len(args) :]


def dimension_of(name: str) -> int:
    return CATALOG[parse_name(name)[0]].d


def smoothness_of(name: str) -> Optional[float]:
    base, args = parse_name(name)
    fn = CATALOG[base].smoothness
    return None if fn is None else float(fn(*args))


def corpus_spectrum(name: str, N: int, *, seed: Optional[int] = None, d: Optional[int] = None) -> Spectrum:
    base, args = parse_name(name)
    entry = CATALOG[base]
    dim = entry.d if d is None or base != "constant" else d
    check_resolution(N, dim)
    if base == "random_trig" and seed is not None and "," not in name:
        args = (args[0], float(seed))
    S = Spectrum.from_coefficients(N, dim, lambda K: entry.builder(K, N, *args))
    # surrogates stay strictly inside |k_j| < N/2; the Nyquist line has no phase to shift
    return S.scaled(np.all(S.wavenumbers() != -(N // 2), axis=-1))


def corpus_generate(name: str, N: int, *, seed: Optional[int] = None, d: Optional[int] = None) -> GridFunction:
    """Band-limited surrogate of a named corpus function on the N-grid."""
    f = synthesize(corpus_spectrum(name, N, seed=seed, d=d))
    log.debug("corpus %s at N=%d", name, N)
    return f


def describe() -> List[Tuple[str, int, str]]:
    return [(e.name, e.d, e.description) for e in CATALOG.values()]
