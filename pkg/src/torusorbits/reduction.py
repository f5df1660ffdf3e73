"""Saddle-point reduction of the action to a finite-dimensional mode block.

The loop space splits into the inner block Z (modes |k| <= inner_order) and
a numerical complement (modes inner_order < |k| <= outer_order).  For each
inner loop z the complement part of the critical-point equation is solved
by a contracting fixed-point iteration, yielding the fiber map phi(z); the
reduced function g(z) = action(z + phi(z)) and its gradient then live on Z
alone.  Every solve records its observed contraction ratio, which must stay
under the a-priori bound lip/(2 pi (inner_order + 1)) plus slack.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .action import oversampled_grid, quadratic_action
from .hamiltonians import ContractionFailure, HamiltonianSystem
from .loops import (
    FourierLoop,
    analyze,
    band_part,
    grid_times,
    grid_values,
    indefinite_gradient,
    l2_adjoint,
    norm,
    pad,
)

__all__ = [
    "ReductionContext",
    "ReducedPoint",
    "ContractionLog",
    "choose_inner_order",
    "build_context",
    "solve_fiber",
    "reduced",
    "trapping_radius",
    "pack",
    "unpack",
    "coordinate_weights",
    "reduced_gradient_vector",
    "fd_reduced_hessian",
]


class ContractionLog:
    """Thread-safe running maximum of observed contraction ratios."""

    def __init__(self):
        self._lock = threading.Lock()
        self.q_max = 0.0
        self.solves = 0

    def update(self, q: float):
        with self._lock:
            self.q_max = max(self.q_max, q)
            self.solves += 1


@dataclass(frozen=True)
class ReductionContext:
    """Truncation orders, tolerances, and bookkeeping for one reduction.

    Treat as immutable; only the contraction log accumulates state.
    """

    inner_order: int
    outer_order: int
    fiber_tol: float = 1e-12
    max_iter: int = 500
    trap_radius: float = np.inf
    q_bound: float = 1.0
    log: ContractionLog = field(default_factory=ContractionLog)

    @property
    def quadrature_grid(self) -> int:
        return oversampled_grid(self.outer_order)


@dataclass(frozen=True)
class ReducedPoint:
    """Inner loop, its solved fiber, and the reduced value/gradient there."""

    z: FourierLoop
    fiber: FourierLoop
    g_value: float
    grad_g: FourierLoop
    fiber_residual: float

    @property
    def full(self) -> FourierLoop:
        return self.z + self.fiber


def choose_inner_order(system: HamiltonianSystem) -> int:
    """Smallest cutoff making the fiber iteration a 1/2-contraction.

    Returns the least n0 >= 1 with lip / (2 pi (n0 + 1)) <= 1/2.
    """
    lip = system.grad_lipschitz
    if not np.isfinite(lip):
        raise ValueError("gradient Lipschitz bound must be finite to choose a cutoff")
    return max(1, int(np.ceil(lip / np.pi)) - 1)


def build_context(system: HamiltonianSystem, inner_order: int | None = None,
                  outer_factor: int = 4, min_outer: int = 16,
                  fiber_tol: float = 1e-12, max_iter: int = 500) -> ReductionContext:
    """Assemble a reduction context with certified defaults.

    The complement is truncated at outer_order = max(outer_factor * n0,
    min_outer); spectral decay of smooth Hamiltonians makes the truncation
    error checkable by doubling the outer order.
    """
    n0 = choose_inner_order(system) if inner_order is None else int(inner_order)
    if n0 < 1:
        raise ValueError("inner_order must be >= 1")
    outer = max(outer_factor * n0, min_outer)
    if outer <= n0:
        raise ValueError("outer order must exceed the inner order")
    q_bound = system.grad_lipschitz / (2.0 * np.pi * (n0 + 1)) + 0.1
    k = 2.0 * system.grad_bound + 1.0 if np.isfinite(system.grad_bound) else np.inf
    return ReductionContext(
        inner_order=n0,
        outer_order=outer,
        fiber_tol=fiber_tol,
        max_iter=max_iter,
        trap_radius=k,
        q_bound=q_bound,
    )


@lru_cache(maxsize=64)
def _fiber_scale(inner_order: int, outer_order: int) -> np.ndarray:
    ks = np.arange(-outer_order, outer_order + 1)
    scale = np.zeros(2 * outer_order + 1)
    band = np.abs(ks) > inner_order
    scale[band] = np.sign(ks[band]) / (2.0 * np.pi * np.abs(ks[band]))
    scale.flags.writeable = False
    return scale


def _fiber_update(ctx: ReductionContext, full: FourierLoop,
                  system: HamiltonianSystem) -> FourierLoop:
    """One application of the fiber fixed-point map.

    The complement part of the critical equation inverts mode-by-mode:
    y_k = sign(k) w_k / (2 pi |k|) with w the Fourier data of
    grad H(t, x(t)) along the current full loop.
    """
    m = ctx.quadrature_grid
    ts = grid_times(m)
    gh = system.gradient(ts, grid_values(full, m))
    w = analyze(gh, ctx.outer_order)
    scale = _fiber_scale(ctx.inner_order, ctx.outer_order)
    return FourierLoop(full.half_dim, ctx.outer_order, scale[:, None] * w.coeffs)


def solve_fiber(ctx: ReductionContext, z: FourierLoop, system: HamiltonianSystem,
                initial: FourierLoop | None = None) -> tuple[FourierLoop, float]:
    """Solve the complement equation for the fiber above z by fixed point.

    Args:
        ctx: reduction context.
        z: inner loop (modes beyond inner_order must vanish).
        system: Hamiltonian system.
        initial: optional warm start for the fiber.

    Returns:
        (fiber, residual) with the complement-equation residual in the
        loop-space norm at most ctx.fiber_tol.

    Raises:
        ContractionFailure: observed ratio >= 1 or the a-priori bound is
            violated (increase the inner order), or the iteration cap hit.
    """
    if norm(band_part(z, ctx.inner_order + 1, max(z.order, ctx.inner_order + 1)), 0.5) > 0:
        raise ValueError("inner loop carries modes beyond the inner order")
    z_pad = pad(z, ctx.outer_order)
    y = initial if initial is not None else None
    full = z_pad if y is None else z_pad + y
    prev_delta = None
    worst_q = 0.0
    for _ in range(ctx.max_iter):
        y_new = _fiber_update(ctx, full, system)
        delta = norm(y_new - y, 0.5) if y is not None else norm(y_new, 0.5)
        if prev_delta is not None and prev_delta > 10.0 * ctx.fiber_tol:
            ratio = delta / prev_delta
            worst_q = max(worst_q, ratio)
            if ratio >= 1.0:
                raise ContractionFailure(
                    f"fiber iteration expanded (ratio {ratio:.3f}); "
                    f"increase the inner order above {ctx.inner_order}"
                )
        y = y_new
        full = z_pad + y
        if delta <= ctx.fiber_tol:
            if worst_q > ctx.q_bound:
                raise ContractionFailure(
                    f"observed contraction {worst_q:.4f} exceeds the certified "
                    f"bound {ctx.q_bound:.4f}"
                )
            ctx.log.update(worst_q)
            return y, delta
        prev_delta = delta
    raise ContractionFailure(
        f"fiber iteration did not reach {ctx.fiber_tol} in {ctx.max_iter} steps"
    )


def reduced(ctx: ReductionContext, z: FourierLoop, system: HamiltonianSystem,
            initial: FourierLoop | None = None) -> ReducedPoint:
    """Reduced value and gradient at z: g(z) = action(z + fiber(z))."""
    fiber, residual = solve_fiber(ctx, z, system, initial=initial)
    full = pad(z, ctx.outer_order) + fiber
    # one grid pass serves both the quadrature and the gradient re-expansion
    m = ctx.quadrature_grid
    ts = grid_times(m)
    vals = grid_values(full, m)
    b = float(np.mean(system.value(ts, vals)))
    w = analyze(system.gradient(ts, vals), ctx.outer_order)
    grad_full = indefinite_gradient(full) - l2_adjoint(w)
    return ReducedPoint(
        z=z,
        fiber=fiber,
        g_value=quadratic_action(full) - b,
        grad_g=band_part(grad_full, 0, ctx.inner_order),
        fiber_residual=residual,
    )


def trapping_radius(ctx: ReductionContext, system: HamiltonianSystem) -> float:
    """Certified radius K beyond which the reduced flow has no bounded orbits.

    K = 2 sup|grad H| + 1: outside the disk of radius K the expanding and
    contracting mode norms change monotonically under the reduced flow, so
    every bounded orbit (hence every critical point) satisfies |xi| <= K.
    """
    if not np.isfinite(system.grad_bound):
        raise ValueError("trapping radius needs a finite gradient bound")
    k = 2.0 * system.grad_bound + 1.0
    if not np.isclose(k, ctx.trap_radius):
        raise ValueError("context was built for a different system bound")
    return k


# ---------------------------------------------------------------------------
# coordinates on the inner block (shared by the search and index modules)


def coordinate_weights(half_dim: int, inner_order: int) -> np.ndarray:
    """Loop-space metric weight per packed coordinate (1 at k=0, 2 pi |k| else)."""
    ks = np.abs(np.arange(-inner_order, inner_order + 1)).astype(float)
    w = np.where(ks > 0, 2.0 * np.pi * ks, 1.0)
    return np.repeat(w, 2 * half_dim)


def pack(z: FourierLoop, inner_order: int) -> np.ndarray:
    """Flatten the inner-block coefficients into a real vector."""
    return pad(band_part(z, 0, inner_order), inner_order).coeffs.ravel().copy()


def unpack(vec: np.ndarray, half_dim: int, inner_order: int) -> FourierLoop:
    c = np.asarray(vec, dtype=float).reshape(2 * inner_order + 1, 2 * half_dim)
    return FourierLoop(half_dim, inner_order, c)


def reduced_gradient_vector(ctx: ReductionContext, vec: np.ndarray,
                            system: HamiltonianSystem,
                            initial: FourierLoop | None = None):
    """Metric-weighted gradient of g in packed coordinates.

    Returns (gradient vector, ReducedPoint).  The weighting makes the
    finite-difference Jacobian of this vector a symmetric matrix whose
    eigenvalue signs give the Morse data of g.
    """
    z = unpack(vec, system.half_dim, ctx.inner_order)
    point = reduced(ctx, z, system, initial=initial)
    w = coordinate_weights(system.half_dim, ctx.inner_order)
    return w * pack(point.grad_g, ctx.inner_order), point


def fd_reduced_hessian(ctx: ReductionContext, vec: np.ndarray,
                       system: HamiltonianSystem, step: float = 1e-5,
                       initial: FourierLoop | None = None) -> np.ndarray:
    """Symmetrized central-difference Hessian of g in packed coordinates."""
    dim = vec.size
    hess = np.empty((dim, dim))
    warm = initial
    for j in range(dim):
        h = step * (1.0 + abs(vec[j]))
        e = np.zeros(dim)
        e[j] = h
        gp, pp = reduced_gradient_vector(ctx, vec + e, system, initial=warm)
        gm, _ = reduced_gradient_vector(ctx, vec - e, system, initial=pp.fiber)
        warm = pp.fiber
        hess[:, j] = (gp - gm) / (2.0 * h)
    return 0.5 * (hess + hess.T)
