"""End-to-end property suite behind the ``selftest`` CLI command.

Each check exercises one load-bearing identity of the pipeline with fresh
deterministic data and reports a single pass/fail line.  The adjoint check
accepts an injectable faulty operator so the suite can demonstrate that it
actually catches wrong scalings.
"""

from __future__ import annotations

import numpy as np

from .action import quadratic_action
from .counting import IntPolynomial, target_polynomial, verify_morse_inequalities
from .estimators import MorseHomology, OrbitFinder
from .hamiltonians import builtin, cosine_generating_function, generating_map
from .homology import invariance_check
from .indices import autonomous_consistency, positive_mode_dim
from .loops import (
    FourierLoop,
    analyze,
    basis_loop,
    grid_values,
    inner,
    l2_adjoint,
    pad,
)
from .reduction import build_context, reduced, solve_fiber

__all__ = ["run_selftest", "FAULTS"]


def _random_loop(rng, half_dim, order, scale=0.5):
    coeffs = scale * rng.standard_normal((2 * order + 1, 2 * half_dim))
    return FourierLoop(half_dim, order, coeffs)


def _check_adjoint(adjoint_op):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        x = _random_loop(rng, 2, 5)
        w = _random_loop(rng, 2, 5)
        lhs = inner(x, w, 0.0)
        rhs = inner(x, adjoint_op(w), 0.5)
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-10, f"max adjoint-identity defect {worst:.2e}"


def _check_round_trip():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        loop = _random_loop(rng, 2, 3)
        again = analyze(grid_values(loop, 16), 3)
        worst = max(worst, float(np.max(np.abs(again.coeffs - loop.coeffs))))
    return worst <= 1e-12, f"max round-trip defect {worst:.2e}"


def _check_action_anchor():
    e = np.array([1.0, 0.0])
    worst = 0.0
    for k in range(-3, 4):
        val = quadratic_action(basis_loop(1, k, e))
        worst = max(worst, abs(val - np.pi * k))
    return worst <= 1e-12, f"max |action(u_k) - pi k| = {worst:.2e}"


def _check_reduction():
    rng = np.random.default_rng(3)
    details = []
    ok = True
    for system in (builtin("pulsed_morse", 1, 0.01), builtin("product_morse", 2, 0.01)):
        ctx = build_context(system)
        z = _random_loop(rng, system.half_dim, ctx.inner_order, scale=0.1)
        fiber, residual = solve_fiber(ctx, z, system)
        point = reduced(ctx, z, system)
        ctx2 = build_context(system, inner_order=ctx.inner_order,
                             min_outer=2 * ctx.outer_order)
        point2 = reduced(ctx2, z, system)
        dg = abs(point.g_value - point2.g_value)
        dphi = float(np.max(np.abs(
            pad(point.fiber, ctx2.outer_order).coeffs - point2.fiber.coeffs)))
        good = (residual <= ctx.fiber_tol and ctx.log.q_max <= ctx.q_bound
                and dg <= 1e-10 and dphi <= 1e-10)
        ok = ok and good
        details.append(
            f"{system.label}: residual {residual:.1e}, q {ctx.log.q_max:.3f} "
            f"(bound {ctx.q_bound:.3f}), dN: |dg| {dg:.1e}, |dphi| {dphi:.1e}"
        )
    return ok, "; ".join(details)


def _index_runs():
    runs = []
    for name in ("product_morse", "product_morse_perturbed"):
        finder = OrbitFinder(starts=200, seed=0).fit(builtin(name, 1, 0.01))
        runs.append((name, finder))
    return runs


def _check_index_relation(runs):
    ok = True
    details = []
    for name, finder in runs:
        table = autonomous_consistency(finder.system_, finder.oscillations_)
        ok = ok and table.all_agree
        details.append(f"{name}: {table.n_agree}/{len(table.rows)} agree")
    return ok, "; ".join(details)


def _check_morse_inequalities(runs):
    ok = True
    details = []
    for name, finder in runs:
        n_plus = positive_mode_dim(1, finder.context_.inner_order)
        target = target_polynomial(1, n_plus)
        result = verify_morse_inequalities(
            [o.morse_index for o in finder.oscillations_], target)
        expected = (IntPolynomial(()) if name == "product_morse"
                    else IntPolynomial((3, 3)).shifted(n_plus))
        good = result.passed and result.surplus == expected
        euler = result.difference(-1) == 0
        ok = ok and good and euler
        details.append(f"{name}: surplus {result.surplus}, euler-zero {euler}")
    return ok, "; ".join(details)


def _check_floer_boundary():
    perfect = builtin("product_morse", 1, 1.0)
    perturbed = builtin("product_morse_perturbed", 1, 1.0)
    mh1 = MorseHomology().fit(perfect)
    mh2 = MorseHomology().fit(perturbed)
    square = np.any((mh2.boundary_one_.astype(int) @ mh2.boundary_two_.astype(int)) % 2)
    same = invariance_check(perfect, perturbed)
    ok = (mh1.betti_ == (1, 2, 1) and mh2.betti_ == (1, 2, 1)
          and not square and same)
    return ok, (f"betti {mh1.betti_} / {mh2.betti_}, boundary^2 = 0: {not square}, "
                f"invariance {same}")


def _check_generating_map():
    gen = cosine_generating_function(0.01)
    phi = generating_map(gen)
    worst_fix = 0.0
    for p in [(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5)]:
        x, y = phi(*p)
        worst_fix = max(worst_fix, np.hypot(x - p[0], y - p[1]))
    rng = np.random.default_rng(5)
    h = 1e-5
    worst_det = 0.0
    for _ in range(50):
        x0, y0 = rng.uniform(0, 1, 2)
        dxx = (np.array(phi(x0 + h, y0)) - np.array(phi(x0 - h, y0))) / (2 * h)
        dyy = (np.array(phi(x0, y0 + h)) - np.array(phi(x0, y0 - h))) / (2 * h)
        det = dxx[0] * dyy[1] - dxx[1] * dyy[0]
        worst_det = max(worst_det, abs(det - 1.0))
    ok = worst_fix <= 1e-10 and worst_det <= 1e-8
    return ok, f"fixed-point defect {worst_fix:.1e}, |det-1| {worst_det:.1e}"


def _faulty_adjoint(w):
    # wrong scaling on every mode: the adjoint identity must flag this
    return FourierLoop(w.half_dim, w.order, 1.5 * l2_adjoint(w).coeffs)


FAULTS = {"adjoint-scale": _faulty_adjoint}


def run_selftest(inject_fault: str | None = None, stream=None) -> bool:
    """Run the property suite, print one line per check, return overall pass."""
    import sys

    out = stream or sys.stdout
    adjoint_op = FAULTS[inject_fault] if inject_fault else l2_adjoint

    results = []
    results.append(("adjoint-identity", *_check_adjoint(adjoint_op)))
    results.append(("fourier-round-trip", *_check_round_trip()))
    results.append(("action-anchor", *_check_action_anchor()))
    results.append(("reduction-certificates", *_check_reduction()))
    runs = _index_runs()
    results.append(("index-relation", *_check_index_relation(runs)))
    results.append(("morse-inequalities", *_check_morse_inequalities(runs)))
    results.append(("floer-boundary", *_check_floer_boundary()))
    results.append(("generating-map", *_check_generating_map()))

    width = max(len(name) for name, _, _ in results)
    all_ok = True
    for name, ok, detail in results:
        all_ok = all_ok and ok
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}", file=out)
    print(f"{'overall':<{width}}  {'PASS' if all_ok else 'FAIL'}", file=out)
    return all_ok
