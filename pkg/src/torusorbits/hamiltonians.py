"""Hamiltonian systems: the built-in test corpus, trigonometric-polynomial
user input, bound certification, and the generating-function demo map.

Every system exposes vectorized callables: ``value(t, x)``, ``gradient(t, x)``
and optionally ``hessian(t, x)`` accept a scalar t with x of shape (2n,) or an
array t of shape (M,) with x of shape (M, 2n), and return scalars/(M,),
vectors/(M, 2n), matrices/(M, 2n, 2n) accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "HamiltonianSystem",
    "TrigTerm",
    "GeneratingFunction",
    "ContractionFailure",
    "builtin",
    "BUILTIN_NAMES",
    "from_trig_polynomial",
    "certify",
    "CertificationReport",
    "generating_map",
    "cosine_generating_function",
]

TWO_PI = 2.0 * np.pi


class ContractionFailure(RuntimeError):
    """A fixed-point iteration stopped contracting (observed ratio >= 1)."""


@dataclass(frozen=True)
class HamiltonianSystem:
    """Time-periodic Hamiltonian on R^{2n} (period 1 in t).

    ``grad_bound`` dominates sup |grad H| in the Euclidean norm;
    ``grad_lipschitz`` dominates the max-row-sum norm of the Hessian (hence
    the Euclidean Lipschitz constant of the gradient).  Both are analytic
    termwise bounds for the built-ins and are re-checked, not assumed, by
    :func:`certify`.
    """

    half_dim: int
    value: Callable
    gradient: Callable
    hessian: Optional[Callable] = None
    torus_periodic: bool = True
    time_dependent: bool = False
    grad_bound: float = np.inf
    grad_lipschitz: float = np.inf
    label: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 2 * self.half_dim


BUILTIN_NAMES = (
    "zero",
    "product_morse",
    "product_morse_perturbed",
    "pulsed_morse",
    "rotating_coupling",
    "linear_quadratic",
)


def _as_points(x):
    x = np.asarray(x, dtype=float)
    return x, x.ndim == 1


def builtin(name: str, half_dim: int = 1, epsilon: float = 0.01, matrix=None) -> HamiltonianSystem:
    """Construct one of the named test systems.

    Args:
        name: one of ``BUILTIN_NAMES``.
        half_dim: n, so the phase space is R^{2n} (torus T^{2n} for the
            periodic family).
        epsilon: amplitude of the periodic families (must be > 0).
        matrix: constant symmetric matrix for ``linear_quadratic``.
    """
    if name not in BUILTIN_NAMES:
        raise ValueError(f"unknown builtin {name!r}; choose from {BUILTIN_NAMES}")
    if half_dim < 1:
        raise ValueError("half_dim must be >= 1")
    if name == "zero":
        return _zero(half_dim)
    if name == "linear_quadratic":
        if matrix is None:
            raise ValueError("linear_quadratic needs the symmetric matrix")
        return _linear_quadratic(np.asarray(matrix, dtype=float))
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if name == "product_morse":
        return _product_morse(half_dim, epsilon)
    if name == "product_morse_perturbed":
        return _product_morse_perturbed(half_dim, epsilon)
    if name == "pulsed_morse":
        return _pulsed_morse(half_dim, epsilon)
    if name == "rotating_coupling":
        if half_dim != 1:
            raise ValueError(
                "rotating_coupling couples exactly two angles; for half_dim > 1 "
                "the remaining angles would carry degenerate critical continua"
            )
        return _rotating_coupling(epsilon)
    raise AssertionError("unreachable")


def _zero(n):
    dim = 2 * n

    def value(t, x):
        x, single = _as_points(x)
        return 0.0 if single else np.zeros(x.shape[0])

    def gradient(t, x):
        x, _ = _as_points(x)
        return np.zeros_like(x)

    def hessian(t, x):
        x, single = _as_points(x)
        if single:
            return np.zeros((dim, dim))
        return np.zeros((x.shape[0], dim, dim))

    return HamiltonianSystem(
        half_dim=n, value=value, gradient=gradient, hessian=hessian,
        torus_periodic=True, time_dependent=False,
        grad_bound=0.0, grad_lipschitz=0.0, label="zero",
    )


def _diag_hessian(diag_fn, dim):
    """Wrap a per-coordinate second-derivative array into full matrices."""

    def hessian(t, x):
        x, single = _as_points(x)
        d = diag_fn(t, x)
        if single:
            return np.diag(d)
        out = np.zeros((x.shape[0], dim, dim))
        idx = np.arange(dim)
        out[:, idx, idx] = d
        return out

    return hessian


def _product_morse(n, eps):
    dim = 2 * n

    def value(t, x):
        x, _ = _as_points(x)
        return eps * np.cos(TWO_PI * x).sum(axis=-1)

    def gradient(t, x):
        x, _ = _as_points(x)
        return -eps * TWO_PI * np.sin(TWO_PI * x)

    hessian = _diag_hessian(
        lambda t, x: -eps * TWO_PI ** 2 * np.cos(TWO_PI * np.asarray(x, dtype=float)), dim
    )
    return HamiltonianSystem(
        half_dim=n, value=value, gradient=gradient, hessian=hessian,
        torus_periodic=True, time_dependent=False,
        grad_bound=eps * TWO_PI * np.sqrt(dim),
        grad_lipschitz=eps * TWO_PI ** 2,
        label="product_morse", params={"epsilon": eps},
    )


def _perturbed_factor(theta):
    """cos plus a second harmonic: four circle critical points, still Morse."""
    return np.cos(TWO_PI * theta) + 0.3 * np.cos(2 * TWO_PI * theta)


def _perturbed_factor_d1(theta):
    return -TWO_PI * np.sin(TWO_PI * theta) - 0.6 * TWO_PI * np.sin(2 * TWO_PI * theta)


def _perturbed_factor_d2(theta):
    return -(TWO_PI ** 2) * np.cos(TWO_PI * theta) - 1.2 * TWO_PI ** 2 * np.cos(2 * TWO_PI * theta)


def _product_morse_perturbed(n, eps):
    # second harmonic only on the first two angles; plain cosine elsewhere
    dim = 2 * n

    def per_coord(fn_pert, fn_plain, x):
        out = np.empty_like(x)
        out[..., :2] = fn_pert(x[..., :2])
        if dim > 2:
            out[..., 2:] = fn_plain(x[..., 2:])
        return out

    def value(t, x):
        x, _ = _as_points(x)
        parts = per_coord(_perturbed_factor, lambda a: np.cos(TWO_PI * a), x)
        return eps * parts.sum(axis=-1)

    def gradient(t, x):
        x, _ = _as_points(x)
        return eps * per_coord(_perturbed_factor_d1, lambda a: -TWO_PI * np.sin(TWO_PI * a), x)

    hessian = _diag_hessian(
        lambda t, x: eps * per_coord(
            _perturbed_factor_d2,
            lambda a: -(TWO_PI ** 2) * np.cos(TWO_PI * a),
            np.asarray(x, dtype=float),
        ),
        dim,
    )
    return HamiltonianSystem(
        half_dim=n, value=value, gradient=gradient, hessian=hessian,
        torus_periodic=True, time_dependent=False,
        grad_bound=eps * 1.6 * TWO_PI * np.sqrt(dim),
        grad_lipschitz=eps * 2.2 * TWO_PI ** 2,
        label="product_morse_perturbed", params={"epsilon": eps},
    )


def _pulsed_morse(n, eps):
    dim = 2 * n

    def pulse(t):
        return 1.0 + 0.5 * np.sin(TWO_PI * np.asarray(t, dtype=float))

    def value(t, x):
        x, _ = _as_points(x)
        return pulse(t) * eps * np.cos(TWO_PI * x).sum(axis=-1)

    def gradient(t, x):
        x, _ = _as_points(x)
        p = np.asarray(pulse(t))
        return -eps * TWO_PI * p[..., None] * np.sin(TWO_PI * x)

    def diag(t, x):
        p = np.asarray(pulse(t))
        return -eps * TWO_PI ** 2 * p[..., None] * np.cos(TWO_PI * np.asarray(x, dtype=float))

    return HamiltonianSystem(
        half_dim=n, value=value, gradient=gradient, hessian=_diag_hessian(diag, dim),
        torus_periodic=True, time_dependent=True,
        grad_bound=1.5 * eps * TWO_PI * np.sqrt(dim),
        grad_lipschitz=1.5 * eps * TWO_PI ** 2,
        label="pulsed_morse", params={"epsilon": eps},
    )


def _rotating_coupling(eps):
    def value(t, x):
        x, _ = _as_points(x)
        t = np.asarray(t, dtype=float)
        return eps * (
            np.cos(TWO_PI * x[..., 0]) * np.cos(TWO_PI * t)
            + np.cos(TWO_PI * x[..., 1]) * np.sin(TWO_PI * t)
        )

    def gradient(t, x):
        x, _ = _as_points(x)
        t = np.asarray(t, dtype=float)
        g = np.zeros_like(x)
        g[..., 0] = -eps * TWO_PI * np.sin(TWO_PI * x[..., 0]) * np.cos(TWO_PI * t)
        g[..., 1] = -eps * TWO_PI * np.sin(TWO_PI * x[..., 1]) * np.sin(TWO_PI * t)
        return g

    def diag(t, x):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        d = np.zeros_like(x)
        d[..., 0] = -eps * TWO_PI ** 2 * np.cos(TWO_PI * x[..., 0]) * np.cos(TWO_PI * t)
        d[..., 1] = -eps * TWO_PI ** 2 * np.cos(TWO_PI * x[..., 1]) * np.sin(TWO_PI * t)
        return d

    return HamiltonianSystem(
        half_dim=1, value=value, gradient=gradient, hessian=_diag_hessian(diag, 2),
        torus_periodic=True, time_dependent=True,
        grad_bound=eps * TWO_PI,
        grad_lipschitz=eps * TWO_PI ** 2,
        label="rotating_coupling", params={"epsilon": eps},
    )


def _linear_quadratic(s_matrix):
    s = 0.5 * (s_matrix + s_matrix.T)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
        raise ValueError("matrix must be square of even size 2n")
    dim = s.shape[0]

    def value(t, x):
        x, _ = _as_points(x)
        return 0.5 * np.einsum("...i,ij,...j->...", x, s, x)

    def gradient(t, x):
        x, _ = _as_points(x)
        return x @ s

    def hessian(t, x):
        x, single = _as_points(x)
        if single:
            return s.copy()
        return np.broadcast_to(s, (x.shape[0], dim, dim)).copy()

    return HamiltonianSystem(
        half_dim=dim // 2, value=value, gradient=gradient, hessian=hessian,
        torus_periodic=False, time_dependent=False,
        grad_bound=np.inf,
        grad_lipschitz=float(np.max(np.sum(np.abs(s), axis=1))),
        label="linear_quadratic", params={"matrix": s.tolist()},
    )


# ---------------------------------------------------------------------------
# trigonometric-polynomial systems


@dataclass(frozen=True)
class TrigTerm:
    """One separable term: amplitude * tau(t) * prod_i sigma_i(theta_i).

    The time factor tau is cos(2 pi time_cos t) when time_sin == 0,
    sin(2 pi time_sin t) when time_cos == 0, and the product of the two
    otherwise (time_cos = time_sin = 0 gives a time-independent term).
    space_modes holds one integer per coordinate: m > 0 means
    cos(2 pi m theta), m < 0 means sin(2 pi |m| theta), 0 means no factor.
    """

    time_cos: int
    time_sin: int
    space_modes: tuple
    amplitude: float


def _time_factor(term: TrigTerm, t):
    t = np.asarray(t, dtype=float)
    if term.time_sin == 0:
        return np.cos(TWO_PI * term.time_cos * t)
    if term.time_cos == 0:
        return np.sin(TWO_PI * term.time_sin * t)
    return np.cos(TWO_PI * term.time_cos * t) * np.sin(TWO_PI * term.time_sin * t)


def _space_factors(term: TrigTerm, x):
    """sigma, sigma', sigma'' per coordinate, each shape (..., 2n)."""
    x = np.asarray(x, dtype=float)
    s = np.ones_like(x)
    d1 = np.zeros_like(x)
    d2 = np.zeros_like(x)
    for i, m in enumerate(term.space_modes):
        if m == 0:
            continue
        w = TWO_PI * abs(m)
        a = w * x[..., i]
        if m > 0:
            s[..., i] = np.cos(a)
            d1[..., i] = -w * np.sin(a)
            d2[..., i] = -w * w * np.cos(a)
        else:
            s[..., i] = np.sin(a)
            d1[..., i] = w * np.cos(a)
            d2[..., i] = -w * w * np.sin(a)
    return s, d1, d2


def from_trig_polynomial(terms: Sequence, half_dim: int) -> HamiltonianSystem:
    """System assembled from separable trigonometric terms.

    ``terms`` is a sequence of :class:`TrigTerm` or mappings with keys
    time_cos, time_sin, space_modes, amplitude.  Value, gradient and Hessian
    are assembled analytically; the reported bounds are termwise sums of
    amplitudes times mode frequencies.
    """
    dim = 2 * half_dim
    parsed = []
    for rec in terms:
        if not isinstance(rec, TrigTerm):
            rec = TrigTerm(
                time_cos=int(rec["time_cos"]),
                time_sin=int(rec["time_sin"]),
                space_modes=tuple(int(m) for m in rec["space_modes"]),
                amplitude=float(rec["amplitude"]),
            )
        if len(rec.space_modes) != dim:
            raise ValueError(
                f"space_modes must list one mode per coordinate ({dim}), "
                f"got {len(rec.space_modes)}"
            )
        parsed.append(rec)
    if not parsed:
        raise ValueError("empty trigonometric-polynomial specification")

    def value(t, x):
        x, single = _as_points(x)
        total = 0.0 if single else np.zeros(x.shape[0])
        for term in parsed:
            s, _, _ = _space_factors(term, x)
            total = total + term.amplitude * _time_factor(term, t) * s.prod(axis=-1)
        return total

    def gradient(t, x):
        x, _ = _as_points(x)
        g = np.zeros_like(x)
        for term in parsed:
            s, d1, _ = _space_factors(term, x)
            tau = term.amplitude * _time_factor(term, t)
            for j in range(dim):
                others = np.prod(np.delete(s, j, axis=-1), axis=-1)
                g[..., j] += tau * d1[..., j] * others
        return g

    def hessian(t, x):
        x, single = _as_points(x)
        shape = (dim, dim) if single else (x.shape[0], dim, dim)
        h = np.zeros(shape)
        for term in parsed:
            s, d1, d2 = _space_factors(term, x)
            tau = term.amplitude * _time_factor(term, t)
            for j in range(dim):
                others_j = np.prod(np.delete(s, j, axis=-1), axis=-1)
                h[..., j, j] += tau * d2[..., j] * others_j
                for k in range(j + 1, dim):
                    rest = np.prod(np.delete(s, (j, k), axis=-1), axis=-1)
                    cross = tau * d1[..., j] * d1[..., k] * rest
                    h[..., j, k] += cross
                    h[..., k, j] += cross
        return h

    # termwise bounds: |dH/dtheta_j| <= sum |amp| f_j and |H_jk| <= sum |amp| f_j f_k
    # with f = 2 pi |mode|; the row sum of the latter dominates the Hessian norm
    per_coord = np.zeros(dim)
    row_bound = np.zeros(dim)
    for term in parsed:
        freqs = TWO_PI * np.abs(np.asarray(term.space_modes, dtype=float))
        per_coord += abs(term.amplitude) * freqs
        row_bound += abs(term.amplitude) * freqs * np.sum(freqs)
    time_dependent = any(t.time_cos != 0 or t.time_sin != 0 for t in parsed)

    return HamiltonianSystem(
        half_dim=half_dim, value=value, gradient=gradient, hessian=hessian,
        torus_periodic=True, time_dependent=time_dependent,
        grad_bound=float(np.sqrt(np.sum(per_coord ** 2))),
        grad_lipschitz=float(np.max(row_bound)) if dim else 0.0,
        label="trig_polynomial",
        params={"n_terms": len(parsed)},
    )


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class CertificationReport:
    time_periodicity_error: float
    torus_periodicity_error: float
    gradient_fd_error: float
    hessian_fd_error: Optional[float]
    observed_grad_sup: float
    observed_hessian_sup: Optional[float]
    grad_bound_certified: Optional[bool]
    lipschitz_certified: Optional[bool]

    @property
    def consistent(self) -> bool:
        checks = [
            self.time_periodicity_error <= 1e-12,
            self.gradient_fd_error <= 1e-6,
            self.grad_bound_certified in (True, None),
            self.lipschitz_certified in (True, None),
        ]
        if self.torus_periodicity_error is not None:
            checks.append(self.torus_periodicity_error <= 1e-12)
        if self.hessian_fd_error is not None:
            checks.append(self.hessian_fd_error <= 1e-6)
        return all(checks)


def certify(system: HamiltonianSystem, grid_per_axis: Optional[int] = None,
            fd_samples: int = 64, seed: int = 0, chunk: int = 1 << 16) -> CertificationReport:
    """Sample-based certificate for the declared invariants and bounds.

    Periodicity is checked on sample grids, the gradient/Hessian against
    central finite differences at random points, and the declared bounds
    against the sup over a dense torus grid (streamed in chunks so T^4
    stays within memory).
    """
    rng = np.random.default_rng(seed)
    dim = system.dim
    if grid_per_axis is None:
        grid_per_axis = max(4, int(round(64 ** (min(dim, 4) / dim))))

    pts = rng.uniform(-0.5, 1.5, size=(fd_samples, dim))
    ts = rng.uniform(0.0, 1.0, size=fd_samples)

    # time periodicity H(t+1, x) = H(t, x)
    tp = float(np.max(np.abs(system.value(ts + 1.0, pts) - system.value(ts, pts))))

    # torus periodicity over a few lattice vectors
    torus_err = None
    if system.torus_periodic:
        torus_err = 0.0
        for _ in range(4):
            j = rng.integers(-2, 3, size=dim).astype(float)
            torus_err = max(
                torus_err,
                float(np.max(np.abs(system.value(ts, pts + j) - system.value(ts, pts)))),
            )

    # gradient vs central differences, relative to the local scale
    h = 1e-5
    fd_grad = np.zeros_like(pts)
    for j in range(dim):
        step = np.zeros(dim)
        step[j] = h
        fd_grad[:, j] = (system.value(ts, pts + step) - system.value(ts, pts - step)) / (2 * h)
    g = system.gradient(ts, pts)
    scale = 1.0 + np.abs(g)
    grad_err = float(np.max(np.abs(fd_grad - g) / scale))

    hess_err = None
    if system.hessian is not None:
        fd_rows = np.zeros((fd_samples, dim, dim))
        for j in range(dim):
            step = np.zeros(dim)
            step[j] = h
            fd_rows[:, :, j] = (
                system.gradient(ts, pts + step) - system.gradient(ts, pts - step)
            ) / (2 * h)
        hh = system.hessian(ts, pts)
        hess_err = float(np.max(np.abs(fd_rows - hh) / (1.0 + np.abs(hh))))

    # dense sup over the torus (or a reference box for non-periodic systems)
    axes = [np.arange(grid_per_axis) / grid_per_axis for _ in range(dim)]
    if not system.torus_periodic:
        axes = [a * 2.0 - 1.0 for a in axes]
    t_slices = np.array([0.0, 0.17, 0.5, 0.83]) if system.time_dependent else np.array([0.0])
    grad_sup = 0.0
    hess_sup = 0.0 if system.hessian is not None else None
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=-1)
    for start in range(0, flat.shape[0], chunk):
        block = flat[start : start + chunk]
        for t0 in t_slices:
            gv = system.gradient(np.full(block.shape[0], t0), block)
            grad_sup = max(grad_sup, float(np.max(np.linalg.norm(gv, axis=-1))))
            if hess_sup is not None:
                hv = system.hessian(np.full(block.shape[0], t0), block)
                hess_sup = max(hess_sup, float(np.max(np.sum(np.abs(hv), axis=-1))))

    finite_gb = np.isfinite(system.grad_bound)
    finite_gl = np.isfinite(system.grad_lipschitz)
    return CertificationReport(
        time_periodicity_error=tp,
        torus_periodicity_error=torus_err,
        gradient_fd_error=grad_err,
        hessian_fd_error=hess_err,
        observed_grad_sup=grad_sup,
        observed_hessian_sup=hess_sup,
        grad_bound_certified=(grad_sup <= system.grad_bound * (1 + 1e-12)) if finite_gb else None,
        lipschitz_certified=(
            hess_sup is not None and hess_sup <= system.grad_lipschitz * (1 + 1e-12)
        )
        if finite_gl
        else None,
    )


# ---------------------------------------------------------------------------
# generating-function demonstration map


@dataclass(frozen=True)
class GeneratingFunction:
    """Scalar function on T^2 with gradient, representing a C^1-small
    symplectic twist map in mixed coordinates (x, Y)."""

    value: Callable
    grad: Callable  # (x, Y) -> (dG/dx, dG/dY)
    scale: float


def cosine_generating_function(eps: float) -> GeneratingFunction:
    """G(x, Y) = eps (cos 2 pi x + cos 2 pi Y): four critical points on T^2."""

    def value(x, y):
        return eps * (np.cos(TWO_PI * x) + np.cos(TWO_PI * y))

    def grad(x, y):
        return (-eps * TWO_PI * np.sin(TWO_PI * x), -eps * TWO_PI * np.sin(TWO_PI * y))

    return GeneratingFunction(value=value, grad=grad, scale=eps)


def generating_map(g: GeneratingFunction, tol: float = 1e-12, max_iter: int = 200,
                   damping: float = 1.0):
    """Area-preserving map on T^2 defined implicitly by ``g``.

    For input (x, y) the new momentum Y solves y = Y + dG/dx(x, Y) by damped
    fixed-point iteration; then X = x + dG/dY(x, Y).  Fixed points of the map
    coincide with critical points of g.  Raises :class:`ContractionFailure`
    when the iteration stops contracting (scale too large) instead of
    falling back silently.
    """

    def phi(x, y):
        x = float(x)
        y = float(y)
        capital_y = y
        prev_step = None
        for _ in range(max_iter):
            gx, _ = g.grad(x, capital_y)
            target = y - gx
            step = target - capital_y
            if prev_step is not None and abs(prev_step) > 0:
                if abs(step) >= abs(prev_step):
                    raise ContractionFailure(
                        "implicit momentum equation is not a contraction "
                        f"(ratio {abs(step) / abs(prev_step):.3f}); reduce the scale"
                    )
            capital_y = capital_y + damping * step
            if abs(step) <= tol:
                break
            prev_step = step
        else:
            raise ContractionFailure("implicit momentum solve did not converge")
        _, gy = g.grad(x, capital_y)
        return x + gy, capital_y

    return phi
