import numpy as np
import pytest

from torusorbits.loops import (
    FourierLoop,
    analyze,
    apply_j,
    band_part,
    basis_loop,
    constant_loop,
    evaluate,
    grid_times,
    grid_values,
    inner,
    l2_adjoint,
    norm,
    pad,
    recombine,
    split,
    standard_j,
    zero_loop,
)


def random_loop(rng, half_dim, order, scale=1.0):
    return FourierLoop(half_dim, order, scale * rng.standard_normal((2 * order + 1, 2 * half_dim)))


def test_constant_loop_evaluates_constant():
    v = np.array([0.3, -1.2, 4.0, 0.0])
    loop = constant_loop(v)
    for t in (0.0, 0.25, 0.9):
        assert np.allclose(evaluate(loop, t), v)


def test_basis_loop_matches_closed_form():
    # single-mode loop is cos(2 pi k t) e + sin(2 pi k t) J e
    rng = np.random.default_rng(0)
    for k in (-3, -1, 1, 2):
        e = rng.standard_normal(4)
        u = basis_loop(2, k, e)
        ts = rng.uniform(0, 1, 7)
        expected = (np.cos(2 * np.pi * k * ts)[:, None] * e
                    + np.sin(2 * np.pi * k * ts)[:, None] * apply_j(e))
        assert np.allclose(evaluate(u, ts), expected, atol=1e-14)


def test_evaluate_is_periodic():
    rng = np.random.default_rng(1)
    loop = random_loop(rng, 2, 5)
    gap = np.linalg.norm(evaluate(loop, 0.0) - evaluate(loop, 1.0))
    assert gap <= 1e-12 * (1.0 + np.linalg.norm(loop.coeffs))


def test_analyze_constant_samples():
    v = np.array([1.0, 2.0])
    samples = np.tile(v, (12, 1))
    loop = analyze(samples, 3)
    assert np.allclose(loop.coeff(0), v)
    for k in (-3, -2, -1, 1, 2, 3):
        assert np.allclose(loop.coeff(k), 0.0, atol=1e-15)


def test_analyze_recovers_single_mode():
    e = np.array([0.3, -0.7])
    k, order = 2, 3
    u = basis_loop(1, k, e)
    m = 4 * (order + 1)
    samples = evaluate(u, grid_times(m))
    loop = analyze(samples, order)
    assert np.allclose(loop.coeff(k), e, atol=1e-13)
    assert np.linalg.norm(loop.coeffs) == pytest.approx(np.linalg.norm(e), abs=1e-12)


def test_analyze_linearity_two_modes():
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.2, 0.5])
    u = basis_loop(1, 1, e1) + basis_loop(1, -2, e2)
    samples = evaluate(u, grid_times(16))
    loop = analyze(samples, 3)
    assert np.allclose(loop.coeff(1), e1, atol=1e-12)
    assert np.allclose(loop.coeff(-2), e2, atol=1e-12)
    assert np.allclose(loop.coeff(3), 0.0, atol=1e-12)


def test_round_trip_band_limited():
    rng = np.random.default_rng(2)
    for _ in range(10):
        loop = random_loop(rng, 2, 3)
        back = analyze(grid_values(loop, 16), 3)
        assert np.allclose(back.coeffs, loop.coeffs, atol=1e-12)


def test_analyze_rejects_aliasing_grid():
    samples = np.zeros((7, 2))
    with pytest.raises(ValueError, match="alias"):
        analyze(samples, 3)


def test_analyze_matches_per_pair_fft():
    # pairing (q, p) -> q + i p turns the rotation basis into plain phases
    rng = np.random.default_rng(3)
    loop = random_loop(rng, 2, 4)
    m = 32
    samples = grid_values(loop, m)
    w = np.fft.fft(samples[:, 0::2] + 1j * samples[:, 1::2], axis=0) / m
    for k in range(-4, 5):
        row = w[(-k) % m]
        expect = np.empty(4)
        expect[0::2] = row.real
        expect[1::2] = row.imag
        assert np.allclose(loop.coeff(k), expect, atol=1e-12)


def test_inner_single_mode_weight():
    e = np.array([1.0, 0.0])
    for k in (1, 2, 5):
        u = basis_loop(1, k, e)
        assert inner(u, u, 0.5) == pytest.approx(2 * np.pi * k, abs=1e-12)
        assert inner(u, u, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_inner_mode_orthogonality():
    rng = np.random.default_rng(4)
    for s in (0.0, 0.5, 1.0):
        for j, k in ((1, 2), (-1, 1), (-3, 2)):
            uj = basis_loop(2, j, rng.standard_normal(4))
            uk = basis_loop(2, k, rng.standard_normal(4))
            assert inner(uj, uk, s) == pytest.approx(0.0, abs=1e-14)


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        inner(zero_loop(1, 2), zero_loop(2, 2))


def test_parseval_against_quadrature():
    rng = np.random.default_rng(5)
    loop = random_loop(rng, 2, 4)
    m = 64
    quad = float(np.mean(np.sum(grid_values(loop, m) ** 2, axis=1)))
    assert inner(loop, loop, 0.0) == pytest.approx(quad, abs=1e-10)
    assert inner(loop, loop, 0.0) == pytest.approx(float(np.sum(loop.coeffs ** 2)), abs=1e-12)


def test_split_recombines_exactly():
    rng = np.random.default_rng(6)
    loop = random_loop(rng, 1, 4)
    parts = split(loop)
    assert np.array_equal(recombine(parts).coeffs, loop.coeffs)
    # idempotent: splitting a pure part changes nothing
    again = split(parts.plus)
    assert np.array_equal(again.plus.coeffs, parts.plus.coeffs)
    assert np.allclose(again.zero, 0.0)


def test_split_parts_orthogonal():
    rng = np.random.default_rng(7)
    loop = random_loop(rng, 2, 5)
    parts = split(loop)
    zero = constant_loop(parts.zero)
    for s in (0.0, 0.5):
        assert inner(parts.minus, parts.plus, s) == pytest.approx(0.0, abs=1e-14)
        assert inner(parts.minus, zero, s) == pytest.approx(0.0, abs=1e-14)
        assert inner(parts.plus, zero, s) == pytest.approx(0.0, abs=1e-14)


def test_split_carries_exact_modes():
    c = np.zeros((7, 2))
    c[-2 + 3] = [1.0, 0.0]
    c[3] = [0.0, 2.0]
    c[3 + 3] = [3.0, 0.0]
    loop = FourierLoop(1, 3, c)
    parts = split(loop)
    assert np.allclose(parts.minus.coeff(-2), [1.0, 0.0])
    assert np.allclose(parts.zero, [0.0, 2.0])
    assert np.allclose(parts.plus.coeff(3), [3.0, 0.0])
    assert norm(parts.minus, 0.0) == pytest.approx(1.0)
    assert norm(parts.plus, 0.0) == pytest.approx(3.0)


def test_l2_adjoint_constant_passthrough():
    v = np.array([2.0, -1.0])
    w = constant_loop(v, order=2)
    assert np.allclose(l2_adjoint(w).coeff(0), v)


def test_l2_adjoint_single_mode_scaling():
    e = np.array([1.0, 0.0])
    out = l2_adjoint(basis_loop(1, 1, e))
    assert np.allclose(out.coeff(1), e / (2 * np.pi), atol=1e-15)


def test_l2_adjoint_defining_identity():
    rng = np.random.default_rng(8)
    for _ in range(100):
        x = random_loop(rng, 2, 5)
        w = random_loop(rng, 2, 5)
        assert abs(inner(x, w, 0.0) - inner(x, l2_adjoint(w), 0.5)) <= 1e-10


def test_l2_adjoint_high_mode_contraction():
    rng = np.random.default_rng(9)
    n0 = 2
    for _ in range(20):
        w = random_loop(rng, 1, 8)
        high = band_part(l2_adjoint(w), n0 + 1, 8)
        assert inner(high, high, 0.5) <= inner(w, w, 0.0) / (2 * np.pi * (n0 + 1)) + 1e-14


def test_standard_j_squares_to_minus_identity():
    for n in (1, 2, 3):
        j = standard_j(n)
        assert np.array_equal(j @ j, -np.eye(2 * n))


def test_pad_preserves_loop():
    rng = np.random.default_rng(10)
    loop = random_loop(rng, 1, 2)
    padded = pad(loop, 6)
    ts = rng.uniform(0, 1, 5)
    assert np.allclose(evaluate(padded, ts), evaluate(loop, ts), atol=1e-14)
    with pytest.raises(ValueError):
        pad(loop, 1)


def test_loop_immutability():
    loop = zero_loop(1, 1)
    with pytest.raises(ValueError):
        loop.coeffs[0, 0] = 1.0
