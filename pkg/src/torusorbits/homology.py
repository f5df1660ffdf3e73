"""Morse complex of a smooth function on the 2-torus over GF(2).

Generators are the critical points graded by descent count; the boundary
operator counts heteroclinic gradient flowlines mod 2, found by shooting
along the one-dimensional unstable/stable directions of each saddle.  The
boundary squares to zero and the resulting Betti numbers are (1, 2, 1) for
any function whose flow is Morse-Smale, which is exactly what the checks
here certify.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .hamiltonians import HamiltonianSystem

__all__ = [
    "NotMorseError",
    "FlowlineError",
    "Generator",
    "FlowlineSample",
    "MorseComplex",
    "morse_critical_points",
    "count_flowlines",
    "betti_from_boundaries",
    "betti_numbers",
    "build_morse_complex",
    "invariance_check",
    "gf2_rank",
]


class NotMorseError(RuntimeError):
    """A critical point has a (near-)zero Hessian eigenvalue."""


class FlowlineError(RuntimeError):
    """A shot failed to land cleanly: not Morse-Smale or inconclusive."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class Generator:
    position: np.ndarray  # point in [0,1)^2
    index: int            # descent count: 0 minimum, 1 saddle, 2 maximum


@dataclass(frozen=True)
class FlowlineSample:
    saddle_id: int
    branch: str
    times: np.ndarray
    points: np.ndarray  # (len(times), 2)


@dataclass(frozen=True)
class MorseComplex:
    generators: tuple
    boundary_one: np.ndarray  # GF(2), minima x saddles
    boundary_two: np.ndarray  # GF(2), saddles x maxima
    betti: tuple
    flowlines: tuple

    def counts(self):
        c = [0, 0, 0]
        for g in self.generators:
            c[g.index] += 1
        return tuple(c)


def _check_surface(h: HamiltonianSystem):
    if h.half_dim != 1:
        raise ValueError("Morse homology here is for functions on the 2-torus")
    if h.time_dependent:
        raise ValueError("surface function must not depend on time")
    if h.hessian is None:
        raise ValueError("surface function needs a Hessian")


def _torus_dist(a, b) -> float:
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b) + 0.5, 1.0) - 0.5)
    return float(np.max(d))


def morse_critical_points(h: HamiltonianSystem, start_grid: int = 64,
                          newton_tol: float = 1e-12,
                          degeneracy_tol: float = 1e-7) -> tuple:
    """All critical points of h on the torus, graded by descent count.

    Newton runs in lockstep from a start_grid x start_grid lattice of
    starts; converged points are deduplicated mod 1.  Any Hessian
    eigenvalue within degeneracy_tol of zero raises :class:`NotMorseError`.
    """
    _check_surface(h)
    axis = np.arange(start_grid) / start_grid
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xs.ravel(), ys.ravel()], axis=-1) + 0.5 / start_grid
    alive = np.ones(pts.shape[0], dtype=bool)
    for _ in range(60):
        g = h.gradient(0.0, pts)
        done = np.linalg.norm(g, axis=1) <= newton_tol
        if np.all(done | ~alive):
            break
        hes = h.hessian(0.0, pts)
        det = hes[:, 0, 0] * hes[:, 1, 1] - hes[:, 0, 1] * hes[:, 1, 0]
        ok = alive & ~done & (np.abs(det) > 1e-14)
        alive &= done | ok
        inv = np.zeros_like(hes)
        inv[ok, 0, 0] = hes[ok, 1, 1]
        inv[ok, 1, 1] = hes[ok, 0, 0]
        inv[ok, 0, 1] = -hes[ok, 0, 1]
        inv[ok, 1, 0] = -hes[ok, 1, 0]
        step = np.einsum("nij,nj->ni", inv[ok], -g[ok]) / det[ok, None]
        big = np.linalg.norm(step, axis=1) > 0.5  # clamp runaway steps
        step[big] *= 0.5 / np.linalg.norm(step[big], axis=1)[:, None]
        pts[ok] += step

    g = h.gradient(0.0, pts)
    converged = pts[np.linalg.norm(g, axis=1) <= 10 * newton_tol]
    # coarse grouping first: a Morse function has few critical points, a
    # near-continuum of converged starts means the function is degenerate
    reps = {}
    for p in np.mod(converged, 1.0):
        key = tuple(np.round(p, 6) % 1.0)
        if key not in reps:
            reps[key] = p
        if len(reps) > 1024:
            raise NotMorseError("critical set looks like a continuum: not Morse")
    found = []
    for p in reps.values():
        if not any(_torus_dist(p, q) <= 1e-6 for q in found):
            found.append(p)
    found.sort(key=lambda p: (round(p[0], 8), round(p[1], 8)))

    generators = []
    for p in found:
        eigs = np.linalg.eigvalsh(h.hessian(0.0, p))
        if np.any(np.abs(eigs) <= degeneracy_tol):
            raise NotMorseError(
                f"critical point ({p[0]:.6f}, {p[1]:.6f}) has Hessian eigenvalue "
                f"{eigs[np.argmin(np.abs(eigs))]:.3e}: not Morse"
            )
        generators.append(Generator(position=p, index=int(np.sum(eigs < 0))))
    if not generators:
        raise NotMorseError("no nondegenerate critical points found")
    return tuple(generators)


def _shoot(h: HamiltonianSystem, start, targets, sign: float,
           landing_tol: float, time_cap: float, rtol: float, atol: float):
    """Integrate sign * (-grad h) until entering a target ball.

    Returns (target index, trajectory).  Raises FlowlineError when the cap
    is exceeded, integration fails, or the landing cannot be confirmed by
    ten further contracting steps.
    """

    def rhs(t, x):
        return -sign * h.gradient(0.0, x)

    events = []
    for tgt in targets:
        def ev(t, x, c=tgt.position):
            return _torus_dist(x, c) - landing_tol
        ev.terminal = True
        ev.direction = -1
        events.append(ev)

    sol = solve_ivp(rhs, (0.0, time_cap), np.asarray(start, dtype=float),
                    method="RK45", rtol=rtol, atol=atol, events=events,
                    dense_output=False)
    if not sol.success:
        raise FlowlineError(f"flow integration failed: {sol.message}",
                            trajectory=(sol.t, sol.y.T))
    hit = [i for i, te in enumerate(sol.t_events) if len(te)]
    if not hit:
        raise FlowlineError(
            f"shot exceeded the time cap {time_cap:.3g} without landing",
            trajectory=(sol.t, sol.y.T))
    landed = hit[0]
    end = sol.y[:, -1]

    # basin confirmation: ten short steps must keep shrinking the distance
    target = targets[landed].position
    lam = float(np.max(np.abs(np.linalg.eigvalsh(h.hessian(0.0, target)))))
    tau = 0.2 / lam
    x = end.copy()
    d_prev = _torus_dist(x, target)
    for _ in range(10):
        x = x + tau * rhs(0.0, x)
        d_new = _torus_dist(x, target)
        if d_new >= d_prev:
            raise FlowlineError(
                "landing unconfirmed: distance stopped decreasing near "
                f"({target[0]:.4f}, {target[1]:.4f})",
                trajectory=(sol.t, sol.y.T))
        d_prev = d_new
    return landed, (sol.t, sol.y.T)


def count_flowlines(h: HamiltonianSystem, generators, offset: float = 1e-4,
                    landing_tol: float = 1e-6, rtol: float = 1e-8,
                    atol: float = 1e-10):
    """Boundary matrices by parity of saddle flowlines.

    For each saddle two forward shots leave along the unstable direction
    under the descending flow and must land on minima; two backward shots
    leave along the stable direction under the ascending flow and must land
    on maxima.  A shot reaching a same-index point is not Morse-Smale and
    raises :class:`FlowlineError` with the offending trajectory.
    """
    _check_surface(h)
    gens = list(generators)
    minima = [g for g in gens if g.index == 0]
    saddles = [g for g in gens if g.index == 1]
    maxima = [g for g in gens if g.index == 2]
    min_pos = {id(g): i for i, g in enumerate(minima)}
    sad_pos = {id(g): i for i, g in enumerate(saddles)}
    max_pos = {id(g): i for i, g in enumerate(maxima)}

    lam_min = min(
        float(np.min(np.abs(np.linalg.eigvalsh(h.hessian(0.0, g.position)))))
        for g in gens
    )
    time_cap = 1e6 / lam_min

    boundary_one = np.zeros((len(minima), len(saddles)), dtype=np.uint8)
    boundary_two = np.zeros((len(saddles), len(maxima)), dtype=np.uint8)
    flowlines = []

    for s_i, s in enumerate(saddles):
        eigval, eigvec = np.linalg.eigh(h.hessian(0.0, s.position))
        v_unstable = eigvec[:, 0]  # negative eigenvalue: descent leaves here
        v_stable = eigvec[:, 1]
        down_targets = minima + [g for g in saddles if g is not s]
        up_targets = maxima + [g for g in saddles if g is not s]
        for sign_branch, vec, targets, ascending in (
            ("+", v_unstable, down_targets, False),
            ("-", -v_unstable, down_targets, False),
            ("s+", v_stable, up_targets, True),
            ("s-", -v_stable, up_targets, True),
        ):
            start = s.position + offset * vec
            landed, traj = _shoot(h, start, targets, sign=-1.0 if ascending else 1.0,
                                  landing_tol=landing_tol, time_cap=time_cap,
                                  rtol=rtol, atol=atol)
            target = targets[landed]
            if target.index == 1:
                raise FlowlineError(
                    "shot from saddle "
                    f"({s.position[0]:.4f}, {s.position[1]:.4f}) landed on "
                    "another saddle: not Morse-Smale / inconclusive",
                    trajectory=traj)
            if ascending:
                boundary_two[s_i, max_pos[id(target)]] ^= 1
                branch = "stable" + sign_branch[-1]
            else:
                boundary_one[min_pos[id(target)], s_i] ^= 1
                branch = "unstable" + sign_branch
            ts, ys = traj
            stride = max(1, len(ts) // 200)
            flowlines.append(FlowlineSample(
                saddle_id=s_i, branch=branch,
                times=ts[::stride].copy(), points=np.mod(ys[::stride], 1.0)))
    return boundary_one, boundary_two, tuple(flowlines)


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2) by XOR Gaussian elimination."""
    m = (np.asarray(matrix, dtype=np.uint8) % 2).copy()
    rows, cols = m.shape
    rank = 0
    for col in range(cols):
        pivot = None
        for row in range(rank, rows):
            if m[row, col]:
                pivot = row
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for row in range(rows):
            if row != rank and m[row, col]:
                m[row] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def betti_from_boundaries(counts, boundary_one: np.ndarray,
                          boundary_two: np.ndarray) -> tuple:
    """GF(2) Betti numbers of a three-term complex; aborts unless the
    boundary squares to zero."""
    if boundary_one.size and boundary_two.size:
        if np.any((boundary_one.astype(int) @ boundary_two.astype(int)) % 2):
            raise ValueError("boundary does not square to zero over GF(2)")
    r1 = gf2_rank(boundary_one) if boundary_one.size else 0
    r2 = gf2_rank(boundary_two) if boundary_two.size else 0
    c0, c1, c2 = counts
    return (c0 - r1, c1 - r1 - r2, c2 - r2)


def betti_numbers(complex_: MorseComplex) -> tuple:
    return betti_from_boundaries(complex_.counts(), complex_.boundary_one,
                                 complex_.boundary_two)


def build_morse_complex(h: HamiltonianSystem, start_grid: int = 64,
                        offset: float = 1e-4, landing_tol: float = 1e-6,
                        rtol: float = 1e-8, atol: float = 1e-10) -> MorseComplex:
    """Full pipeline: critical points, flowline parities, Betti numbers."""
    generators = morse_critical_points(h, start_grid=start_grid)
    b1, b2, flowlines = count_flowlines(h, generators, offset=offset,
                                        landing_tol=landing_tol, rtol=rtol, atol=atol)
    counts = [0, 0, 0]
    for g in generators:
        counts[g.index] += 1
    betti = betti_from_boundaries(tuple(counts), b1, b2)
    return MorseComplex(generators=generators, boundary_one=b1,
                        boundary_two=b2, betti=betti, flowlines=flowlines)


def invariance_check(h1: HamiltonianSystem, h2: HamiltonianSystem,
                     **kwargs) -> bool:
    """Betti numbers agree across two Morse-Smale functions on the torus."""
    c1 = build_morse_complex(h1, **kwargs)
    c2 = build_morse_complex(h2, **kwargs)
    return c1.betti == c2.betti
