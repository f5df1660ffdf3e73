import numpy as np
import pytest

from torusorbits.hamiltonians import (
    BUILTIN_NAMES,
    ContractionFailure,
    GeneratingFunction,
    builtin,
    certify,
    cosine_generating_function,
    from_trig_polynomial,
    generating_map,
)

TWO_PI = 2 * np.pi


def brute_circle_roots(fn, n_scan=20000, tol=1e-13):
    """Roots of a 1-periodic scalar function by sign scanning + bisection."""
    xs = np.arange(n_scan + 1) / n_scan
    vals = fn(xs)
    roots = []
    for i in range(n_scan):
        a, b = xs[i], xs[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0:
            for _ in range(80):
                mid = 0.5 * (a + b)
                fm = fn(np.array([mid]))[0]
                if fa * fm <= 0:
                    b = mid
                else:
                    a, fa = mid, fm
                if b - a < tol:
                    break
            roots.append(0.5 * (a + b))
    return sorted(r % 1.0 for r in roots)


def test_builtin_names_and_errors():
    with pytest.raises(ValueError, match="unknown builtin"):
        builtin("nope")
    with pytest.raises(ValueError, match="positive"):
        builtin("product_morse", 1, epsilon=-0.1)
    with pytest.raises(ValueError, match="two angles"):
        builtin("rotating_coupling", half_dim=2)
    with pytest.raises(ValueError, match="matrix"):
        builtin("linear_quadratic")
    assert set(BUILTIN_NAMES) == {
        "zero", "product_morse", "product_morse_perturbed", "pulsed_morse",
        "rotating_coupling", "linear_quadratic"}


def test_zero_system_gradient_vanishes():
    h = builtin("zero", 2)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 2, (10, 4))
    assert np.all(h.value(0.3, pts) == 0.0)
    assert np.all(h.gradient(0.3, pts) == 0.0)
    assert h.grad_bound == 0.0 and h.grad_lipschitz == 0.0


def test_product_morse_critical_points_enumerated():
    # critical points of cos t1 + cos t2 by direct enumeration: sin vanishes
    eps = 0.01
    h = builtin("product_morse", 1, eps)
    roots = brute_circle_roots(lambda x: -eps * TWO_PI * np.sin(TWO_PI * x))
    assert np.allclose(roots, [0.0, 0.5], atol=1e-9)
    for a in roots:
        for b in roots:
            assert np.linalg.norm(h.gradient(0.0, np.array([a, b]))) <= 1e-12


def test_perturbed_factor_has_four_circle_roots():
    eps = 0.01
    h = builtin("product_morse_perturbed", 1, eps)

    def dfactor(x):
        return h.gradient(0.0, np.stack([x, np.zeros_like(x)], axis=-1))[..., 0]

    roots = brute_circle_roots(dfactor)
    assert len(roots) == 4
    # the interior pair sits where the second harmonic balances the first
    interior = np.arccos(-5.0 / 6.0) / TWO_PI
    assert np.allclose(roots, [0.0, interior, 0.5, 1.0 - interior], atol=1e-8)
    # sixteen product points on the torus
    count = 0
    for a in roots:
        for b in roots:
            g = h.gradient(0.0, np.array([a, b]))
            assert np.linalg.norm(g) <= 1e-7
            count += 1
    assert count == 16


def test_pulsed_morse_keeps_constant_solutions():
    h = builtin("pulsed_morse", 1, 0.01)
    assert h.time_dependent
    for t in np.linspace(0, 1, 9):
        for p in ((0.0, 0.0), (0.5, 0.0), (0.5, 0.5)):
            assert np.linalg.norm(h.gradient(t, np.array(p))) <= 1e-12


@pytest.mark.parametrize("name,eps", [
    ("product_morse", 0.01),
    ("product_morse_perturbed", 0.01),
    ("pulsed_morse", 0.01),
    ("rotating_coupling", 0.01),
])
def test_certification_of_builtins(name, eps):
    rep = certify(builtin(name, 1, eps))
    assert rep.time_periodicity_error <= 1e-12
    assert rep.torus_periodicity_error <= 1e-12
    assert rep.gradient_fd_error <= 1e-6
    assert rep.hessian_fd_error <= 1e-6
    assert rep.grad_bound_certified
    assert rep.lipschitz_certified
    assert rep.consistent


def test_certification_t4_dense_grid(pm_t4):
    rep = certify(pm_t4.finder.system_)
    assert rep.consistent


def test_linear_quadratic_closed_form():
    s = np.array([[0.3, 0.1], [0.1, -0.2]])
    h = builtin("linear_quadratic", matrix=s)
    x = np.array([0.5, -1.0])
    assert h.value(0.0, x) == pytest.approx(0.5 * x @ s @ x)
    assert np.allclose(h.gradient(0.0, x), s @ x)
    assert np.allclose(h.hessian(0.0, x), s)
    assert not h.torus_periodic
    assert not np.isfinite(h.grad_bound)


def test_trig_polynomial_reproduces_product_morse():
    eps = 0.01
    terms = [
        {"time_cos": 0, "time_sin": 0, "space_modes": (1, 0), "amplitude": eps},
        {"time_cos": 0, "time_sin": 0, "space_modes": (0, 1), "amplitude": eps},
    ]
    t_sys = from_trig_polynomial(terms, 1)
    b_sys = builtin("product_morse", 1, eps)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-1, 2, (64, 2))
    ts = rng.uniform(0, 1, 64)
    assert np.max(np.abs(t_sys.value(ts, pts) - b_sys.value(ts, pts))) <= 1e-14
    assert np.max(np.abs(t_sys.gradient(ts, pts) - b_sys.gradient(ts, pts))) <= 1e-13
    assert np.max(np.abs(t_sys.hessian(ts, pts) - b_sys.hessian(ts, pts))) <= 1e-12


def test_trig_polynomial_constant_term():
    h = from_trig_polynomial(
        [{"time_cos": 0, "time_sin": 0, "space_modes": (0, 0), "amplitude": 2.5}], 1)
    rng = np.random.default_rng(2)
    pts = rng.uniform(0, 1, (5, 2))
    assert np.all(h.value(0.1, pts) == 2.5)
    assert np.all(h.gradient(0.1, pts) == 0.0)


def test_trig_polynomial_bound_report():
    eps = 0.01
    terms = [
        {"time_cos": 0, "time_sin": 0, "space_modes": (1, 0), "amplitude": eps},
        {"time_cos": 0, "time_sin": 0, "space_modes": (0, 1), "amplitude": eps},
    ]
    h = from_trig_polynomial(terms, 1)
    assert h.grad_bound <= 2 * TWO_PI * eps
    assert certify(h).grad_bound_certified


def test_trig_polynomial_time_modes_reproduce_rotating():
    eps = 0.01
    terms = [
        {"time_cos": 1, "time_sin": 0, "space_modes": (1, 0), "amplitude": eps},
        {"time_cos": 0, "time_sin": 1, "space_modes": (0, 1), "amplitude": eps},
    ]
    t_sys = from_trig_polynomial(terms, 1)
    b_sys = builtin("rotating_coupling", 1, eps)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 1, (32, 2))
    ts = rng.uniform(0, 1, 32)
    assert np.max(np.abs(t_sys.value(ts, pts) - b_sys.value(ts, pts))) <= 1e-15
    assert np.max(np.abs(t_sys.gradient(ts, pts) - b_sys.gradient(ts, pts))) <= 1e-14


def test_trig_polynomial_rejects_bad_input():
    with pytest.raises(ValueError, match="empty"):
        from_trig_polynomial([], 1)
    with pytest.raises(ValueError, match="one mode per coordinate"):
        from_trig_polynomial(
            [{"time_cos": 0, "time_sin": 0, "space_modes": (1,), "amplitude": 1.0}], 1)


# ---------------------------------------------------------------------------
# generating-function map


def test_generating_map_identity_for_zero():
    phi = generating_map(cosine_generating_function(0.0))
    for p in ((0.3, 0.7), (0.0, 0.0)):
        assert phi(*p) == p


def test_generating_map_fixes_critical_points():
    phi = generating_map(cosine_generating_function(0.01))
    for p in ((0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5)):
        x, y = phi(*p)
        assert np.hypot(x - p[0], y - p[1]) <= 1e-10
    # a non-critical point must move
    x, y = phi(0.25, 0.25)
    assert np.hypot(x - 0.25, y - 0.25) > 1e-4


def test_generating_map_preserves_area():
    phi = generating_map(cosine_generating_function(0.01))
    rng = np.random.default_rng(4)
    h = 1e-5
    for _ in range(100):
        x0, y0 = rng.uniform(0, 1, 2)
        dx = (np.array(phi(x0 + h, y0)) - np.array(phi(x0 - h, y0))) / (2 * h)
        dy = (np.array(phi(x0, y0 + h)) - np.array(phi(x0, y0 - h))) / (2 * h)
        det = dx[0] * dy[1] - dx[1] * dy[0]
        assert det == pytest.approx(1.0, abs=1e-8)


def test_generating_map_contraction_failure():
    # a coupled phase makes the implicit momentum solve expand
    scale = 0.3

    def value(x, y):
        return scale * np.cos(TWO_PI * (x + y))

    def grad(x, y):
        d = -scale * TWO_PI * np.sin(TWO_PI * (x + y))
        return d, d

    phi = generating_map(GeneratingFunction(value=value, grad=grad, scale=scale))
    with pytest.raises(ContractionFailure):
        phi(0.3, 0.21)
