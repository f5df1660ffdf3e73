"""Rotation-basis Fourier representation of closed loops in R^{2n}.

A loop u : S^1 -> R^{2n} is stored through its coefficients in the
rotation basis R_k(t) = cos(2*pi*k*t) I + sin(2*pi*k*t) J, i.e.

    u(t) = sum_k R_k(t) x_k,      x_k in R^{2n},  |k| <= order,

where J is the block-diagonal symplectic matrix (J^2 = -I).  Pairing each
symplectic coordinate pair into w_i = q_i + i p_i turns R_k(t) into the
scalar phase e^{-2*pi*i*k*t}, so synthesis and analysis on uniform grids
reduce to ordinary FFTs.  That identification is what every transform in
this module relies on, and the test suite checks it against a raw
per-pair FFT.

Loops are immutable values; all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "FourierLoop",
    "SplitLoop",
    "zero_loop",
    "constant_loop",
    "basis_loop",
    "standard_j",
    "pad",
    "band_part",
    "evaluate",
    "grid_values",
    "grid_times",
    "analyze",
    "inner",
    "norm",
    "split",
    "recombine",
    "l2_adjoint",
    "differentiate",
    "indefinite_gradient",
]


@dataclass(frozen=True)
class FourierLoop:
    """Loop in R^{2n} given by rotation-basis coefficients up to ``order``.

    ``coeffs`` has shape (2*order + 1, 2*half_dim); row k + order holds the
    mode-k coefficient x_k.  Modes beyond ``order`` are implicitly zero.
    """

    half_dim: int
    order: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.half_dim < 1:
            raise ValueError("half_dim must be a positive integer")
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (2 * self.order + 1, 2 * self.half_dim):
            raise ValueError(
                f"coefficient array has shape {c.shape}, expected "
                f"{(2 * self.order + 1, 2 * self.half_dim)}"
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return 2 * self.half_dim

    def coeff(self, k: int) -> np.ndarray:
        """Coefficient x_k (zeros when |k| > order)."""
        if abs(k) > self.order:
            return np.zeros(self.dim)
        return self.coeffs[k + self.order]

    @property
    def constant_part(self) -> np.ndarray:
        return self.coeff(0)

    def __add__(self, other):
        return _combine(self, other, 1.0)

    def __sub__(self, other):
        return _combine(self, other, -1.0)

    def __mul__(self, scalar):
        return FourierLoop(self.half_dim, self.order, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


@dataclass(frozen=True)
class SplitLoop:
    """Mode-sign decomposition of a loop: negative / constant / positive."""

    minus: FourierLoop
    zero: np.ndarray
    plus: FourierLoop


def _combine(a: FourierLoop, b: FourierLoop, sign: float) -> FourierLoop:
    if a.half_dim != b.half_dim:
        raise ValueError("loops live in different phase spaces")
    order = max(a.order, b.order)
    c = np.zeros((2 * order + 1, a.dim))
    c[order - a.order : order + a.order + 1] = a.coeffs
    c[order - b.order : order + b.order + 1] += sign * b.coeffs
    return FourierLoop(a.half_dim, order, c)


def zero_loop(half_dim: int, order: int = 0) -> FourierLoop:
    return FourierLoop(half_dim, order, np.zeros((2 * order + 1, 2 * half_dim)))


def constant_loop(value, order: int = 0) -> FourierLoop:
    """Loop that sits at ``value`` for all t."""
    v = np.asarray(value, dtype=float)
    if v.ndim != 1 or v.size % 2:
        raise ValueError("constant value must be a vector in R^{2n}")
    c = np.zeros((2 * order + 1, v.size))
    c[order] = v
    return FourierLoop(v.size // 2, order, c)


def basis_loop(half_dim: int, k: int, direction) -> FourierLoop:
    """Single-mode loop t -> R_k(t) e, the circle traced by ``direction``."""
    e = np.asarray(direction, dtype=float)
    if e.shape != (2 * half_dim,):
        raise ValueError("direction must be a vector in R^{2n}")
    order = max(abs(k), 0)
    c = np.zeros((2 * order + 1, 2 * half_dim))
    c[k + order] = e
    return FourierLoop(half_dim, order, c)


def standard_j(half_dim: int) -> np.ndarray:
    """Block-diagonal symplectic matrix with n copies of [[0, 1], [-1, 0]]."""
    j = np.zeros((2 * half_dim, 2 * half_dim))
    for i in range(half_dim):
        j[2 * i, 2 * i + 1] = 1.0
        j[2 * i + 1, 2 * i] = -1.0
    return j


def apply_j(vectors: np.ndarray) -> np.ndarray:
    """J v for an array of phase-space vectors, shape (..., 2n)."""
    out = np.empty_like(vectors)
    out[..., 0::2] = vectors[..., 1::2]
    out[..., 1::2] = -vectors[..., 0::2]
    return out


def pad(loop: FourierLoop, order: int) -> FourierLoop:
    """Same loop re-indexed up to a (not smaller) order."""
    if order < loop.order:
        raise ValueError("cannot pad to a smaller order")
    if order == loop.order:
        return loop
    c = np.zeros((2 * order + 1, loop.dim))
    c[order - loop.order : order + loop.order + 1] = loop.coeffs
    return FourierLoop(loop.half_dim, order, c)


def band_part(loop: FourierLoop, min_abs: int, max_abs: int) -> FourierLoop:
    """Keep only modes with min_abs <= |k| <= max_abs (others zeroed)."""
    order = min(loop.order, max_abs)
    c = np.zeros((2 * order + 1, loop.dim))
    ks = np.arange(-order, order + 1)
    keep = (np.abs(ks) >= min_abs) & (np.abs(ks) <= max_abs)
    c[keep] = loop.coeffs[ks[keep] + loop.order]
    return FourierLoop(loop.half_dim, order, c)


def _to_complex(coeffs: np.ndarray) -> np.ndarray:
    """(2N+1, 2n) real rows -> (2N+1, n) complex rows w = q + i p."""
    return coeffs[:, 0::2] + 1j * coeffs[:, 1::2]


def _from_complex(w: np.ndarray) -> np.ndarray:
    out = np.empty((w.shape[0], 2 * w.shape[1]))
    out[:, 0::2] = w.real
    out[:, 1::2] = w.imag
    return out


def evaluate(loop: FourierLoop, t) -> np.ndarray:
    """Evaluate the loop at time(s) t (1-periodic, t reduced mod 1).

    Returns shape (2n,) for scalar t, (len(t), 2n) for an array.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    ks = np.arange(-loop.order, loop.order + 1)
    # rotation by e^{2 pi k t J} is multiplication by e^{-2 pi i k t} per pair
    phases = np.exp(-2j * np.pi * np.outer(t_arr, ks))  # (T, 2N+1)
    w = _to_complex(loop.coeffs)  # (2N+1, n)
    vals = _from_complex(phases @ w)
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return vals[0]
    return vals


def grid_times(m: int) -> np.ndarray:
    return np.arange(m) / m


def grid_values(loop: FourierLoop, m: int) -> np.ndarray:
    """Loop values on the uniform grid t = 0, 1/m, ..., (m-1)/m via inverse FFT.

    Requires m >= 2*order + 2 so no modes alias onto each other.
    """
    if m < 2 * loop.order + 2:
        raise ValueError(
            f"grid of {m} points aliases a loop of order {loop.order}; "
            f"need at least {2 * loop.order + 2}"
        )
    w = _to_complex(loop.coeffs)
    spectrum = np.zeros((m, loop.half_dim), dtype=complex)
    ks = np.arange(-loop.order, loop.order + 1)
    spectrum[(-ks) % m] = m * w
    return _from_complex(np.fft.ifft(spectrum, axis=0))


def analyze(samples: np.ndarray, order: int) -> FourierLoop:
    """Rotation-basis coefficients up to ``order`` from uniform-grid samples.

    ``samples`` holds u(m/M) for m = 0..M-1, shape (M, 2n).  Exact for
    loops band-limited to ``order``; M must leave an anti-aliasing margin.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] % 2:
        raise ValueError("samples must have shape (M, 2n)")
    m = samples.shape[0]
    if m < 2 * order + 2:
        raise ValueError(
            f"{m} samples alias at order {order}: modes k and k-{m} are "
            f"indistinguishable; provide at least {2 * order + 2} samples"
        )
    spectrum = np.fft.fft(samples[:, 0::2] + 1j * samples[:, 1::2], axis=0)
    ks = np.arange(-order, order + 1)
    w = spectrum[(-ks) % m] / m
    return FourierLoop(samples.shape[1] // 2, order, _from_complex(w))


@lru_cache(maxsize=256)
def _weights(order: int, s: float) -> np.ndarray:
    """H^s weight per mode row: 1 at k = 0, (2 pi |k|)^{2s} otherwise."""
    ks = np.abs(np.arange(-order, order + 1)).astype(float)
    w = np.ones(2 * order + 1)
    nz = ks > 0
    w[nz] = (2.0 * np.pi * ks[nz]) ** (2.0 * s)
    w.flags.writeable = False
    return w


def inner(x: FourierLoop, y: FourierLoop, s: float = 0.5) -> float:
    """H^s inner product; s = 1/2 is the loop-space default, s = 0 is L^2."""
    if x.half_dim != y.half_dim:
        raise ValueError("loops live in different phase spaces")
    order = max(x.order, y.order)
    xp, yp = pad(x, order), pad(y, order)
    w = _weights(order, s)
    return float(np.sum(w[:, None] * xp.coeffs * yp.coeffs))


def norm(x: FourierLoop, s: float = 0.5) -> float:
    return float(np.sqrt(max(inner(x, x, s), 0.0)))


def split(x: FourierLoop) -> SplitLoop:
    """Orthogonal decomposition by mode sign (negative / constant / positive)."""
    return SplitLoop(
        minus=_sign_part(x, -1),
        zero=x.constant_part.copy(),
        plus=_sign_part(x, +1),
    )


def _sign_part(x: FourierLoop, sign: int) -> FourierLoop:
    ks = np.arange(-x.order, x.order + 1)
    c = np.where((np.sign(ks) == sign)[:, None], x.coeffs, 0.0)
    return FourierLoop(x.half_dim, x.order, c)


def recombine(parts: SplitLoop) -> FourierLoop:
    return parts.minus + constant_loop(parts.zero) + parts.plus


def l2_adjoint(w: FourierLoop) -> FourierLoop:
    """Adjoint of the embedding into L^2, mapping L^2 data into the loop space.

    Defined by <x, w>_{L^2} = <x, l2_adjoint(w)>_{1/2}; in coefficients the
    constant mode passes through and mode k is scaled by 1/(2 pi |k|).
    """
    ks = np.abs(np.arange(-w.order, w.order + 1)).astype(float)
    scale = np.ones(2 * w.order + 1)
    nz = ks > 0
    scale[nz] = 1.0 / (2.0 * np.pi * ks[nz])
    return FourierLoop(w.half_dim, w.order, scale[:, None] * w.coeffs)


def differentiate(loop: FourierLoop) -> FourierLoop:
    """Exact time derivative: mode k maps to 2 pi k J x_k."""
    ks = np.arange(-loop.order, loop.order + 1).astype(float)
    c = 2.0 * np.pi * ks[:, None] * apply_j(loop.coeffs)
    return FourierLoop(loop.half_dim, loop.order, c)


def indefinite_gradient(x: FourierLoop) -> FourierLoop:
    """x^+ - x^-: gradient of the indefinite quadratic form on the loop space."""
    signs = np.sign(np.arange(-x.order, x.order + 1)).astype(float)
    return FourierLoop(x.half_dim, x.order, signs[:, None] * x.coeffs)
