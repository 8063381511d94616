#!/usr/bin/env python3
"""
Band-limited surrogates of periodic functions on the torus T^d.

A function is held in two views:
- GridFunction: samples on x_j = 2*pi*j/N - pi, j in {0..N-1}^d
- Spectrum: coefficients f_k = (2*pi)^-d * int f(x) exp(-i(k,x)) dx

Coefficients are stored in FFT order. The Nyquist entry of an axis holds
f_{N/2} + f_{-N/2}; every symbol acts on it as the mean of its values at +N/2
and -N/2, which keeps real inputs real.

Norms use the normalized Haar measure dx/(2*pi)^d, so ||1||_p = 1.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import fft as sfft

from .errors import DescriptorError

log = logging.getLogger(__name__)

MAX_DIM = 3
MIN_RESOLUTION = 8

LatticeFn = Callable[[np.ndarray], np.ndarray]


def check_resolution(N: int, d: int) -> None:
    if not 1 <= int(d) <= MAX_DIM:
        raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {d}")
    if N < MIN_RESOLUTION or N & (N - 1):
        raise ValueError(f"resolution must be a power of two >= {MIN_RESOLUTION}, got {N}")


def grid_points(N: int, d: int = 1) -> np.ndarray:
    """Grid coordinates, shape (N,)*d + (d,)."""
    axis = 2.0 * np.pi * np.arange(N) / N - np.pi
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack(mesh, axis=-1)


def wavenumbers(N: int, d: int = 1) -> np.ndarray:
    """Integer wave vectors in FFT order, shape (N,)*d + (d,); Nyquist is -N/2."""
    axis = np.fft.fftfreq(N, d=1.0 / N).round().astype(np.int64)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack(mesh, axis=-1)


def _nyquist_variants(K: np.ndarray, N: int):
    half = N // 2
    nyq = K == -half
    d = K.shape[-1]
    for mask in itertools.product((False, True), repeat=d):
        Km = K.copy()
        for axis, flip in enumerate(mask):
            if flip:
                Km[..., axis][nyq[..., axis]] = half
        yield Km


def lattice_values(fn: LatticeFn, N: int, d: int, *, even: bool = False) -> np.ndarray:
    """Evaluate a symbol on the stored lattice, averaging the Nyquist halves.

    `fn` receives integer wave vectors of shape (..., d). Pass even=True when
    fn(k) == fn(-k) to skip the averaging.
    """
    K = wavenumbers(N, d)
    if even:
        return np.asarray(fn(K), dtype=complex)
    total = np.zeros(K.shape[:-1], dtype=complex)
    for Km in _nyquist_variants(K, N):
        total += fn(Km)
    return total / 2**d


def _grid_phase(N: int, d: int) -> np.ndarray:
    # (-1)^(k_1+...+k_d) accounts for the grid starting at -pi
    K = wavenumbers(N, d)
    return np.where(K.sum(axis=-1) % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a periodic function on the uniform grid of T^d."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=complex)
        if arr.ndim == 0:
            raise ValueError("samples must have at least one axis")
        N = arr.shape[0]
        if any(n != N for n in arr.shape):
            raise ValueError(f"samples must be a cube, got shape {arr.shape}")
        check_resolution(N, arr.ndim)
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def d(self) -> int:
        return self.samples.ndim

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @classmethod
    def from_callable(cls, fn: Callable[..., np.ndarray], N: int, d: int = 1) -> "GridFunction":
        """Sample fn(x_1, ..., x_d) on the grid."""
        check_resolution(N, d)
        coords = np.moveaxis(grid_points(N, d), -1, 0)
        values = np.broadcast_to(np.asarray(fn(*coords), dtype=complex), (N,) * d)
        return cls(values)

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.samples.imag), initial=0.0) <= tol * (1.0 + np.max(np.abs(self.samples))))

    def _same_grid(self, other: "GridFunction") -> None:
        if other.samples.shape != self.samples.shape:
            raise ValueError(f"grid mismatch: {self.samples.shape} vs {other.samples.shape}")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._same_grid(other)
        return GridFunction(self.samples + other.samples)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._same_grid(other)
        return GridFunction(self.samples - other.samples)

    def __mul__(self, c: complex) -> "GridFunction":
        return GridFunction(self.samples * complex(c))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(-self.samples)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients of a band-limited surrogate, FFT order."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coefficients, dtype=complex)
        N = arr.shape[0] if arr.ndim else 0
        if arr.ndim == 0 or any(n != N for n in arr.shape):
            raise ValueError(f"coefficients must be a cube, got shape {arr.shape}")
        check_resolution(N, arr.ndim)
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    @property
    def d(self) -> int:
        return self.coefficients.ndim

    @property
    def N(self) -> int:
        return self.coefficients.shape[0]

    @classmethod
    def zeros(cls, N: int, d: int = 1) -> "Spectrum":
        check_resolution(N, d)
        return cls(np.zeros((N,) * d, dtype=complex))

    @classmethod
    def from_coefficients(cls, N: int, d: int, fn: LatticeFn) -> "Spectrum":
        """Build from a coefficient formula over |k_j| <= N/2, folding Nyquist halves."""
        check_resolution(N, d)
        K = wavenumbers(N, d)
        total = np.zeros(K.shape[:-1], dtype=complex)
        for Km in _nyquist_variants(K, N):
            total += np.asarray(fn(Km), dtype=complex)
        repeats = 2.0 ** (d - (K == -(N // 2)).sum(axis=-1))
        return cls(total / repeats)

    def wavenumbers(self) -> np.ndarray:
        return wavenumbers(self.N, self.d)

    def lookup(self, K: np.ndarray) -> np.ndarray:
        """Coefficients at integer wave vectors K (..., d); zero outside the cube."""
        K = np.asarray(K, dtype=np.int64)
        half = self.N // 2
        inside = np.all(np.abs(K) <= half, axis=-1)
        idx = tuple(np.mod(K[..., j], self.N) for j in range(self.d))
        values = self.coefficients[idx] / 2.0 ** (np.abs(K) == half).sum(axis=-1)
        return np.where(inside, values, 0.0)

    def coefficient(self, k: Union[int, Sequence[int]]) -> complex:
        kk = np.atleast_1d(np.asarray(k, dtype=np.int64))
        if kk.shape != (self.d,):
            raise ValueError(f"index must have {self.d} components, got {k!r}")
        return complex(self.lookup(kk))

    def energy(self) -> float:
        """Sum of |f_k|^2, equal to ||f||_2^2 on the grid."""
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        flipped = self.lookup(-self.wavenumbers())
        scale = 1.0 + float(np.max(np.abs(self.coefficients)))
        return bool(np.max(np.abs(flipped - np.conj(self.lookup(self.wavenumbers())))) <= tol * scale)

    def scaled(self, values: np.ndarray) -> "Spectrum":
        return Spectrum(self.coefficients * values)


@dataclass(frozen=True)
class LebesgueExponent:
    """Exponent p in [1, inf]; math.inf stands for the sup norm."""

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if math.isnan(v) or v < 1.0:
            raise ValueError(f"p must be >= 1, got {self.value!r}")
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, raw: Union["LebesgueExponent", float, int, str]) -> "LebesgueExponent":
        if isinstance(raw, LebesgueExponent):
            return raw
        if isinstance(raw, str):
            text = raw.strip().lower()
            if text in ("inf", "infinity", "∞"):
                return cls(math.inf)
            return cls(float(text))
        return cls(float(raw))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def __str__(self) -> str:
        return "inf" if self.is_infinite else f"{self.value:g}"


INF = LebesgueExponent(math.inf)

ExponentLike = Union[LebesgueExponent, float, int, str]


def analyze(f: GridFunction) -> Spectrum:
    N, d = f.N, f.d
    coeffs = sfft.fftn(f.samples) / float(N) ** d
    return Spectrum(coeffs * _grid_phase(N, d))


def synthesize(S: Spectrum) -> GridFunction:
    N, d = S.N, S.d
    return GridFunction(sfft.ifftn(S.coefficients * _grid_phase(N, d)) * float(N) ** d)


def apply_symbol(S: Spectrum, fn: LatticeFn, *, even: bool = False) -> Spectrum:
    return S.scaled(lattice_values(fn, S.N, S.d, even=even))


def refine(f: GridFunction, factor: int) -> GridFunction:
    """Same surrogate sampled on a grid `factor` times finer."""
    if factor == 1:
        return f
    if factor < 1 or factor & (factor - 1):
        raise ValueError(f"oversampling factor must be a power of two, got {factor}")
    S = analyze(f)
    return synthesize(Spectrum.from_coefficients(f.N * factor, f.d, S.lookup))


def lp_norm(f: GridFunction, p: ExponentLike, *, oversample: int = 1) -> float:
    """(int |f|^p dnu)^(1/p) by grid average; p = inf is the grid max."""
    exp = LebesgueExponent.parse(p)
    mod = np.abs(refine(f, oversample).samples)
    if exp.is_infinite:
        return float(mod.max())
    if exp.value == 2.0:
        return float(np.sqrt(np.mean(mod * mod)))
    return float(np.mean(mod**exp.value) ** (1.0 / exp.value))


def translate(f: GridFunction, t: Union[float, Sequence[float]]) -> GridFunction:
    """Surrogate of x -> f(x + t); t need not be a grid multiple.

    Exact for content with |k_j| < N/2. Nyquist content moves as its real
    cosine part only, so shifts do not compose there.
    """
    shift = np.atleast_1d(np.asarray(t, dtype=float))
    if shift.shape != (f.d,):
        raise ValueError(f"shift must have {f.d} components, got {t!r}")
    if not np.any(shift):
        return f
    return synthesize(apply_symbol(analyze(f), lambda K: np.exp(1j * (K @ shift))))


def apply_multiplier(S: Spectrum, phi: Callable[[np.ndarray], np.ndarray], eps: float) -> Spectrum:
    """Coefficient-wise product phi(eps*k) * f_k."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")

    def values(K: np.ndarray) -> np.ndarray:
        return np.asarray(phi(eps * K), dtype=complex)

    try:
        return apply_symbol(S, values)
    except DescriptorError:
        raise
    except (KeyError, TypeError, ValueError, ArithmeticError) as e:
        raise DescriptorError(f"cannot evaluate multiplier {phi!r}: {e}") from e


def conjugate_antiderivative(f: GridFunction) -> GridFunction:
    """Conjugate of the mean-free antiderivative (d=1), symbol -1/|k|."""
    if f.d != 1:
        raise ValueError("conjugate_antiderivative is defined for d=1")

    def symbol(K: np.ndarray) -> np.ndarray:
        k = np.abs(K[..., 0]).astype(float)
        out = np.zeros_like(k)
        np.divide(-1.0, k, out=out, where=k > 0)
        return out

    return synthesize(apply_symbol(analyze(f), symbol, even=True))
