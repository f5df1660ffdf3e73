import numpy as np
import pytest
from scipy.linalg import expm

from torusorbits.hamiltonians import builtin
from torusorbits.loops import constant_loop, norm, split, standard_j
from torusorbits.reduction import build_context, pack
from torusorbits.search import (
    _newton_start,
    monodromy,
    multistart_newton,
    verify_fixed_point,
)
from torusorbits import OrbitFinder


def circle_dist(a, b):
    return np.max(np.abs(np.mod(np.asarray(a) - np.asarray(b) + 0.5, 1.0) - 0.5))


def test_product_morse_t2_finds_all_four(pm_t2):
    report = pm_t2.finder.report_
    assert report.count == 4
    assert report.all_nondegenerate
    expected = [(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5)]
    reps = [o.torus_rep for o in report.oscillations]
    for target in expected:
        assert min(circle_dist(r, target) for r in reps) <= 1e-6
    assert report.bounds_met == {"cup_length": True, "betti_sum": True}


def test_product_morse_t2_certificates(pm_t2):
    h = pm_t2.finder.system_
    for o in pm_t2.finder.oscillations_:
        assert o.grad_norm <= 1e-10
        assert o.ode_residual <= 1e-6 * (1 + h.grad_bound)
        assert o.fixed_point_gap <= 1e-6
        assert o.symplectic_defect <= 1e-6
        assert o.nondegenerate == (o.det_gap > 1e-8)


def test_product_morse_t2_monodromy_block_oracle(pm_t2):
    # constant orbits: the linearized flow is exp(J Hess) blockwise
    h = pm_t2.finder.system_
    j = standard_j(1)
    for o in pm_t2.finder.oscillations_:
        hess = h.hessian(0.0, o.torus_rep)
        assert np.allclose(o.monodromy, expm(j @ hess), atol=1e-8)
        # 2x2 oracle: det(Psi - I) = 2(1 - cos w) or 2(1 - cosh w)
        prod = hess[0, 0] * hess[1, 1]
        w = np.sqrt(abs(prod))
        expected = 2 * (1 - np.cos(w)) if prod > 0 else abs(2 * (1 - np.cosh(w)))
        assert o.det_gap == pytest.approx(expected, rel=1e-6)


def test_product_morse_t4_finds_sixteen(pm_t4):
    report = pm_t4.finder.report_
    assert report.count == 16
    assert report.all_nondegenerate
    for a in (0.0, 0.5):
        for b in (0.0, 0.5):
            for c in (0.0, 0.5):
                for d in (0.0, 0.5):
                    assert min(circle_dist(o.torus_rep, (a, b, c, d))
                               for o in report.oscillations) <= 1e-6
    assert report.bounds_met == {"cup_length": True, "betti_sum": True}


def test_rotating_coupling_bound(rotating_t2):
    report = rotating_t2.finder.report_
    assert report.count >= 4
    assert report.all_nondegenerate
    for o in report.oscillations:
        assert o.fixed_point_gap <= 1e-6


def test_search_determinism():
    h = builtin("product_morse", 1, 0.01)
    ctx1 = build_context(h)
    ctx2 = build_context(h)
    r1 = multistart_newton(ctx1, h, starts=60, seed=3)
    r2 = multistart_newton(ctx2, h, starts=60, seed=3)
    assert r1.count == r2.count
    for a, b in zip(r1.oscillations, r2.oscillations):
        assert np.array_equal(a.torus_rep, b.torus_rep)
        assert a.action == b.action
        assert a.morse_index == b.morse_index


def test_lattice_equivariance_of_starts():
    h = builtin("product_morse", 1, 0.01)
    ctx = build_context(h)
    z0 = constant_loop([0.1, 0.35], order=ctx.inner_order)
    vec = pack(z0, ctx.inner_order)
    shifted = pack(z0 + constant_loop([2.0, -1.0]), ctx.inner_order)
    a = _newton_start(ctx, h, vec, 1e-10)
    b = _newton_start(ctx, h, shifted, 1e-10)
    assert a is not None and b is not None
    rep_a = np.mod(a.reshape(3, 2)[ctx.inner_order], 1.0)
    rep_b = np.mod(b.reshape(3, 2)[ctx.inner_order], 1.0)
    assert circle_dist(rep_a, rep_b) <= 1e-6


def test_monodromy_zero_system_is_identity():
    h = builtin("zero", 1)
    psi = monodromy(constant_loop([0.2, 0.8], order=1), h)
    assert np.allclose(psi, np.eye(2), atol=1e-10)


def test_monodromy_linear_system_matches_exponential():
    rng = np.random.default_rng(0)
    for n in (1, 2):
        s = rng.standard_normal((2 * n, 2 * n))
        s = 0.3 * (s + s.T)
        h = builtin("linear_quadratic", matrix=s)
        psi = monodromy(constant_loop(np.zeros(2 * n), order=1), h)
        assert np.allclose(psi, expm(standard_j(n) @ s), atol=1e-8)


def test_verify_fixed_point_certificates():
    h = builtin("product_morse", 1, 0.01)
    crit = constant_loop([0.5, 0.5], order=1)
    assert verify_fixed_point(crit, h) <= 1e-10
    off = constant_loop([0.25, 0.25], order=1)
    assert verify_fixed_point(off, h) > 1e-3


def test_zero_hamiltonian_flags_degenerate_family():
    finder = OrbitFinder(starts=40, seed=1).fit(builtin("zero", 1))
    report = finder.report_
    assert report.degenerate_family
    assert report.n_degenerate_points > 0
    assert report.count == 0
    assert report.bounds_met["cup_length"] is True
    assert report.bounds_met["betti_sum"] is None
    assert finder.verdict_.all_pass


def test_doubling_starts_keeps_the_count(pm_t2):
    # empirical completeness: more starts discover nothing new
    h = pm_t2.finder.system_
    ctx = build_context(h)
    r = multistart_newton(ctx, h, starts=400, seed=0)
    assert r.count == pm_t2.finder.report_.count


def test_oscillation_loops_are_inside_trap(pm_t4):
    ctx = pm_t4.finder.context_
    for o in pm_t4.finder.oscillations_:
        parts = split(o.loop)
        assert max(norm(parts.plus, 0.5), norm(parts.minus, 0.5)) <= ctx.trap_radius
