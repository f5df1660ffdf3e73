"""Index grading of critical points of the reduced action.

The reduced function is a saddle in the mode directions: each nonzero mode
pair contributes equally many ascent and descent directions, so the raw
count of ascent directions (positive Hessian eigenvalues) grows with the
truncation while the EXCESS over the expanding-block dimension does not.
Subtracting that dimension and the half-dimension n yields an integer
grading of each orbit that is independent of the truncation orders and, for
autonomous C^2-small Morse systems, equals the spatial Morse index minus n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import HamiltonianSystem
from .loops import FourierLoop, norm
from .reduction import (
    ReductionContext,
    fd_reduced_hessian,
    pack,
    reduced,
)

__all__ = [
    "DegenerateCriticalPoint",
    "IndexRecord",
    "positive_mode_dim",
    "index_from_eigenvalues",
    "reduced_hessian_eigenvalues",
    "morse_index",
    "index_record",
    "ConsistencyRow",
    "ConsistencyTable",
    "spatial_morse_index",
    "autonomous_consistency",
]

DEGENERACY_TOL = 1e-7


class DegenerateCriticalPoint(RuntimeError):
    """A Hessian eigenvalue sits inside the degeneracy window."""

    def __init__(self, eigenvalue: float):
        super().__init__(
            f"critical point is degenerate: Hessian eigenvalue {eigenvalue:.3e} "
            f"within {DEGENERACY_TOL:.0e} of zero"
        )
        self.eigenvalue = eigenvalue


@dataclass(frozen=True)
class IndexRecord:
    """Morse data of one critical point of the reduced function.

    ``morse_index`` counts ascent directions (positive Hessian eigenvalues),
    the grading used by the trapping-region flow; ``positive_dim`` is the
    dimension of the expanding mode block 2n * inner_order.
    """

    morse_index: int
    positive_dim: int
    half_dim: int

    def __post_init__(self):
        hi = self.positive_dim + 2 * self.half_dim + self.positive_dim
        if not 0 <= self.morse_index <= hi:
            raise ValueError("morse index outside the reduced block dimension")

    @property
    def cz(self) -> int:
        """Integer grading of the orbit: morse_index - positive_dim - n."""
        return self.morse_index - self.positive_dim - self.half_dim


def positive_mode_dim(half_dim: int, inner_order: int) -> int:
    return 2 * half_dim * inner_order


def index_from_eigenvalues(eigs: np.ndarray, tol: float = DEGENERACY_TOL) -> int:
    """Ascent-direction count with a degeneracy gate.

    Raises :class:`DegenerateCriticalPoint` when any |eigenvalue| <= tol.
    """
    eigs = np.asarray(eigs, dtype=float)
    small = np.abs(eigs) <= tol
    if np.any(small):
        raise DegenerateCriticalPoint(float(eigs[small][0]))
    return int(np.sum(eigs > 0.0))


def reduced_hessian_eigenvalues(ctx: ReductionContext, z: FourierLoop,
                                system: HamiltonianSystem,
                                initial: FourierLoop | None = None) -> np.ndarray:
    hess = fd_reduced_hessian(ctx, pack(z, ctx.inner_order), system, initial=initial)
    return np.linalg.eigvalsh(hess)


def morse_index(ctx: ReductionContext, z: FourierLoop, system: HamiltonianSystem,
                check_critical: bool = True) -> int:
    """Ascent-direction count of the reduced function at a critical point."""
    if check_critical:
        point = reduced(ctx, z, system)
        gnorm = norm(point.grad_g, 0.5)
        if gnorm > 1e-9:
            raise ValueError(f"point is not critical (reduced gradient norm {gnorm:.2e})")
    return index_from_eigenvalues(reduced_hessian_eigenvalues(ctx, z, system))


def index_record(ctx: ReductionContext, z: FourierLoop,
                 system: HamiltonianSystem, **kw) -> IndexRecord:
    return IndexRecord(
        morse_index=morse_index(ctx, z, system, **kw),
        positive_dim=positive_mode_dim(system.half_dim, ctx.inner_order),
        half_dim=system.half_dim,
    )


# ---------------------------------------------------------------------------
# autonomous-limit consistency


@dataclass(frozen=True)
class ConsistencyRow:
    torus_rep: tuple
    cz: int
    spatial_index: int

    @property
    def agree(self) -> bool:
        return self.cz == self.spatial_index - len(self.torus_rep) // 2


@dataclass(frozen=True)
class ConsistencyTable:
    rows: tuple

    @property
    def n_agree(self) -> int:
        return sum(r.agree for r in self.rows)

    @property
    def all_agree(self) -> bool:
        return all(r.agree for r in self.rows)

    def __str__(self):
        lines = ["torus_rep  cz  spatial-n  agree"]
        n = len(self.rows[0].torus_rep) // 2 if self.rows else 0
        for r in self.rows:
            rep = ",".join(f"{c:.4f}" for c in r.torus_rep)
            lines.append(f"({rep})  {r.cz:+d}  {r.spatial_index - n:+d}  {r.agree}")
        lines.append(f"{self.n_agree}/{len(self.rows)} agree")
        return "\n".join(lines)


def spatial_morse_index(system: HamiltonianSystem, point,
                        tol: float = DEGENERACY_TOL) -> int:
    """Descent count of the spatial Hamiltonian at a (spatial) critical point."""
    if system.hessian is None:
        raise ValueError("system carries no Hessian")
    eigs = np.linalg.eigvalsh(system.hessian(0.0, np.asarray(point, dtype=float)))
    if np.any(np.abs(eigs) <= tol):
        raise DegenerateCriticalPoint(float(eigs[np.abs(eigs) <= tol][0]))
    return int(np.sum(eigs < 0.0))


def autonomous_consistency(system: HamiltonianSystem, oscillations) -> ConsistencyTable:
    """Compare each orbit's grading against (spatial Morse index - n).

    Only meaningful for time-independent systems, where the orbits are the
    spatial critical points; disagreements are tabulated, never raised.
    """
    if system.time_dependent:
        raise ValueError("consistency table applies to autonomous systems only")
    rows = []
    for osc in oscillations:
        rows.append(
            ConsistencyRow(
                torus_rep=tuple(float(c) for c in osc.torus_rep),
                cz=osc.cz_index,
                spatial_index=spatial_morse_index(system, osc.torus_rep),
            )
        )
    return ConsistencyTable(rows=tuple(rows))
