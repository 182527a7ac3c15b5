"""The interval quotient of the circle map and its transfer operator.

Projecting the circle onto I = [-1, 1] through p(x) = z0 exp(i pi (x + 1)),
where z0 is the circle fixed point, turns tau into a real two-branch
expanding interval map T with T(-1) = -1.  The interval transfer operator

    (L_I f)(x) = Phi_1'(x) f(Phi_1(x)) + Phi_2'(x) f(Phi_2(x))

acquires, on top of the circle eigenvalues, the extra family
T'(-1)^(-n); for non-real lam its spectrum contains non-real eigenvalues
of arbitrarily small modulus even though both branch fixed points have
real multipliers.

Branches are computed by pulling the circle preimages back through p,
classifying the two quadratic roots by their winding angle from z0 (the
first covering arc belongs to branch 1, so Phi_1(-1) = -1).  The closed
form available for real lam serves as an independent cross-check only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maps import BlaschkeParam, fixed_point, tau_deriv, tau_eval, transfer_apply
from .spectral import SpectrumPrediction, _sort_key

TWO_PI = 2.0 * np.pi

_DOMAIN_EPS = 1e-12


@dataclass(frozen=True)
class IntervalMapContext:
    """Projection data tying the interval map to its circle parent.

    p(x) = exp(i pi (x - x0) + i arg z0) maps [x0, x1) once around the
    circle with p(x0) = z0.  ``branch_point`` is the common value
    Phi_2(x0) = Phi_1(x1); ``psi_c`` its winding angle times pi.
    ``deriv_fixed`` is T'(x0) = T'(x1) and ``deriv_branch_point`` T' at the
    branch point, both real and > 1.
    """

    param: BlaschkeParam
    x0: float
    x1: float
    z0: complex
    phase_offset: float
    psi_c: float
    branch_point: float
    deriv_fixed: float
    deriv_branch_point: float


def _circle_t_deriv(param: BlaschkeParam, z) -> np.ndarray:
    """T' transported to the circle: Re(z tau'(z) / tau(z)), real on |z| = 1."""
    zz = np.asarray(z, dtype=complex)
    return np.real(zz * tau_deriv(param, zz) / tau_eval(param, zz))


def make_context(param: BlaschkeParam, x0: float = -1.0, x1: float = 1.0) -> IntervalMapContext:
    if (x0, x1) != (-1.0, 1.0):
        raise ValueError("only the interval [-1, 1] is supported")
    z0 = fixed_point(param)
    psi_c = float(np.mod(-np.angle(z0), TWO_PI))
    if psi_c == 0.0:
        psi_c = TWO_PI
    lam = param.lam
    deriv_fixed = float(np.real((lam + np.conj(lam) - 2.0) / (lam * np.conj(lam) - 1.0)))
    deriv_branch_point = float(_circle_t_deriv(param, 1.0 + 0j))
    return IntervalMapContext(
        param=param,
        x0=x0,
        x1=x1,
        z0=z0,
        phase_offset=float(np.angle(z0)),
        psi_c=psi_c,
        branch_point=x0 + psi_c / np.pi,
        deriv_fixed=deriv_fixed,
        deriv_branch_point=deriv_branch_point,
    )


def projection(context: IntervalMapContext, x):
    """p(x) = z0 exp(i pi (x - x0)); two-to-one onto the circle over [x0, x1]."""
    xx = np.asarray(x, dtype=float)
    out = context.z0 * np.exp(1j * np.pi * (xx - context.x0))
    return complex(out) if out.ndim == 0 else out


def projection_deriv(context: IntervalMapContext, x):
    xx = np.asarray(x, dtype=float)
    out = 1j * np.pi * projection(context, xx)
    return complex(out) if np.ndim(out) == 0 else out


def _check_domain(context: IntervalMapContext, xx: np.ndarray) -> None:
    if np.any(xx < context.x0 - _DOMAIN_EPS) or np.any(xx > context.x1 + _DOMAIN_EPS):
        raise ValueError(f"point outside [{context.x0}, {context.x1}]")


def T_eval(context: IntervalMapContext, x):
    """Interval map value; T(x0) = x0 and, by convention, T(x1) = x1."""
    xx = np.asarray(x, dtype=float)
    _check_domain(context, xx)
    w = projection(context, xx)
    theta = np.mod(np.angle(tau_eval(context.param, w) / context.z0), TWO_PI)
    out = np.where(xx >= context.x1, context.x1, context.x0 + theta / np.pi)
    return float(out) if out.ndim == 0 else out


def T_deriv(context: IntervalMapContext, x):
    """T'(x), real and > 1 everywhere on the interval."""
    xx = np.asarray(x, dtype=float)
    _check_domain(context, xx)
    out = _circle_t_deriv(context.param, projection(context, xx))
    return float(out) if out.ndim == 0 else out


def T_deriv_at_fixed_point(context: IntervalMapContext) -> float:
    """T'(x0) = 2 (|lam| cos(arg lam) - 1) / (|lam|^2 - 1), real and > 1."""
    return context.deriv_fixed


def _branch_data(context: IntervalMapContext, x):
    """Values and derivatives of both branches at the given points.

    Returns (phi1, dphi1, phi2, dphi2) as float arrays.  Interior points
    classify the two quadratic roots by winding angle; the endpoints are
    imposed exactly from the matching conditions Phi_1(x0) = x0,
    Phi_2(x1) = x1, Phi_2(x0) = Phi_1(x1) = branch_point.
    """
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    _check_domain(context, xx)
    param = context.param
    z0, psi_c = context.z0, context.psi_c

    w = projection(context, xx)
    from .maps import _preimages

    ra, rb = _preimages(param.lam, w)
    psi_a = np.mod(np.angle(ra / z0), TWO_PI)
    psi_b = np.mod(np.angle(rb / z0), TWO_PI)
    a_first = psi_a < psi_c
    b_first = psi_b < psi_c
    # Exactly one root per covering arc; on a rounding tie order by angle.
    tie = a_first == b_first
    take_a = np.where(tie, psi_a <= psi_b, a_first)

    z1 = np.where(take_a, ra, rb)
    z2 = np.where(take_a, rb, ra)
    psi1 = np.where(take_a, psi_a, psi_b)
    psi2 = np.where(take_a, psi_b, psi_a)

    phi1 = context.x0 + psi1 / np.pi
    phi2 = context.x0 + psi2 / np.pi
    dphi1 = 1.0 / _circle_t_deriv(param, z1)
    dphi2 = 1.0 / _circle_t_deriv(param, z2)

    at_x0 = np.abs(xx - context.x0) < 1e-14
    at_x1 = np.abs(xx - context.x1) < 1e-14
    c = context.branch_point
    phi1 = np.where(at_x0, context.x0, np.where(at_x1, c, phi1))
    phi2 = np.where(at_x0, c, np.where(at_x1, context.x1, phi2))
    dphi1 = np.where(at_x0, 1.0 / context.deriv_fixed,
                     np.where(at_x1, 1.0 / context.deriv_branch_point, dphi1))
    dphi2 = np.where(at_x0, 1.0 / context.deriv_branch_point,
                     np.where(at_x1, 1.0 / context.deriv_fixed, dphi2))
    return phi1, dphi1, phi2, dphi2


def interval_branch(context: IntervalMapContext, k: int, x: float):
    """Value and derivative of branch k in {1, 2} at x."""
    if k not in (1, 2):
        raise ValueError("branch label must be 1 or 2")
    phi1, dphi1, phi2, dphi2 = _branch_data(context, np.array([float(x)]))
    if k == 1:
        return float(phi1[0]), float(dphi1[0])
    return float(phi2[0]), float(dphi2[0])


def branch_closed_form(lam: float, x):
    """First branch for real lam: x/2 - arccos(lam cos(pi x / 2)) / pi.

    Cross-check only; the pullback construction is the primary path.
    """
    if abs(lam) >= 1 or isinstance(lam, complex):
        raise ValueError("closed form requires real lam in (-1, 1)")
    xx = np.asarray(x, dtype=float)
    out = xx / 2.0 - np.arccos(lam * np.cos(np.pi * xx / 2.0)) / np.pi
    return float(out) if out.ndim == 0 else out


def transfer_interval_apply(context: IntervalMapContext, f, x):
    """(L_I f)(x) by the branch sum.  f maps real arrays to real or complex."""
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    phi1, dphi1, phi2, dphi2 = _branch_data(context, xx)
    out = dphi1 * f(phi1) + dphi2 * f(phi2)
    return out[0] if np.ndim(x) == 0 else out


def chebyshev_lobatto(m: int) -> np.ndarray:
    """m Chebyshev-Lobatto points on [-1, 1], ascending, endpoints included."""
    if m < 2:
        raise ValueError("need at least two nodes")
    return -np.cos(np.pi * np.arange(m) / (m - 1))


def _barycentric_weights(m: int) -> np.ndarray:
    w = (-1.0) ** np.arange(m)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _cardinal_matrix(nodes: np.ndarray, y: np.ndarray) -> np.ndarray:
    """C[q, i] = value of the i-th nodal cardinal polynomial at y[q]."""
    w = _barycentric_weights(nodes.size)
    diff = y[:, None] - nodes[None, :]
    exact_rows, exact_cols = np.nonzero(diff == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = w[None, :] / diff
        C = K / np.sum(K, axis=1)[:, None]
    C[exact_rows, :] = 0.0
    C[exact_rows, exact_cols] = 1.0
    return C


def _two_sided_refine(A: np.ndarray, mu: complex, sweeps: int = 2) -> complex:
    """Sharpen one eigenvalue estimate by two-sided inverse iteration.

    The deep eigenvalues of the (non-normal) collocation matrix carry
    condition numbers up to ~1e10, so a dense QR eigensolver returns them
    with errors near kappa * eps.  Inverse iteration on A and A* followed
    by the two-sided Rayleigh quotient recovers the eigenvalues of the
    stored matrix to near machine precision (the quotient error is
    quadratic in the two residuals).  The shift is re-centered once.
    """
    n = A.shape[0]
    eye = np.eye(n)
    x = np.ones(n, dtype=complex)
    y = np.ones(n, dtype=complex)
    x[1::2] = -1.0
    for _ in range(sweeps):
        # Tiny relative off-shift keeps the solves nonsingular at an exact
        # eigenvalue of the stored matrix.
        shifted = A - (mu * (1.0 + 1e-12) + 1e-300) * eye
        try:
            for _ in range(2):
                x = np.linalg.solve(shifted, x)
                x /= np.linalg.norm(x)
                y = np.linalg.solve(shifted.conj().T, y)
                y /= np.linalg.norm(y)
        except np.linalg.LinAlgError:
            return complex(mu)
        denom = y.conj() @ x
        if abs(denom) < 1e-200:
            return complex(mu)
        mu = complex((y.conj() @ (A @ x)) / denom)
    return mu


@dataclass(frozen=True, eq=False)
class IntervalDiscretization:
    """Collocation matrix of L_I on Chebyshev-Lobatto nodes.

    ``matrix`` is real for every lam (the interval map and its branches are
    real even when lam is not); applying it to node samples of a polynomial
    of degree < M reproduces node samples of L_I applied to it.
    """

    m: int
    nodes: np.ndarray
    matrix: np.ndarray
    context: IntervalMapContext

    def eigenvalues(self, refine_top: int = 0) -> np.ndarray:
        """Eigenvalue multiset; optionally refine the top-k by modulus.

        Refinement runs two-sided inverse iteration per eigenvalue, which
        removes the dense solver's backward-error amplification on the
        ill-conditioned deep spectrum.
        """
        values = np.linalg.eigvals(self.matrix)
        if refine_top > 0:
            A = self.matrix.astype(complex)
            order = np.argsort(-np.abs(values))
            for i in order[: min(refine_top, values.size)]:
                values[i] = _two_sided_refine(A, complex(values[i]))
        return values


def collocation_matrix(context: IntervalMapContext, M: int) -> IntervalDiscretization:
    """Assemble the M x M collocation matrix A[j, i] = sum_k Phi_k'(x_j) l_i(Phi_k(x_j))."""
    if M < 8:
        raise ValueError("need at least 8 collocation nodes")
    nodes = chebyshev_lobatto(M)
    phi1, dphi1, phi2, dphi2 = _branch_data(context, nodes)
    A = dphi1[:, None] * _cardinal_matrix(nodes, phi1) + dphi2[:, None] * _cardinal_matrix(nodes, phi2)
    A.setflags(write=False)
    return IntervalDiscretization(m=M, nodes=nodes, matrix=A, context=context)


def interval_spectrum_predicted(context: IntervalMapContext, n_max: int) -> SpectrumPrediction:
    """Exact interval spectrum truncation: circle part plus T'(x0)^(-n).

    For real lam the circle powers keep their doubled multiplicity; the
    fixed-point family enters with multiplicity one.  Coinciding values from
    the two families are listed separately (multiplicities add).
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    lam = context.param.lam
    entries = [(1.0 + 0j, 1)]
    if lam != 0:
        if context.param.is_real:
            entries += [(lam ** n, 2) for n in range(1, n_max + 1)]
        else:
            for n in range(1, n_max + 1):
                entries += [(lam ** n, 1), (np.conj(lam) ** n, 1)]
    rho = 1.0 / context.deriv_fixed
    entries += [(complex(rho ** n), 1) for n in range(1, n_max + 1)]
    entries.sort(key=lambda e: _sort_key(e[0]))
    return SpectrumPrediction(entries=tuple(entries), param=context.param, depth=n_max)


@dataclass(frozen=True)
class DualFunctional:
    """Endpoint-difference functional f -> f^(n)(x1) - f^(n)(x0)."""

    order: int

    def ell(self, poly_coeffs, x0: float = -1.0, x1: float = 1.0) -> float:
        p = np.polynomial.Polynomial(np.asarray(poly_coeffs, dtype=float))
        d = p.deriv(self.order) if self.order else p
        return float(d(x1) - d(x0))


# 5-point, order-4 one-sided first-derivative stencil.
_FD_COEFFS = np.array([-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25])
_FD_STEP = 5e-4


def _one_sided_deriv(g, x: float, h: float, direction: int) -> float:
    pts = x + direction * h * np.arange(5)
    vals = np.asarray(g(pts), dtype=float)
    return float(direction * (_FD_COEFFS @ vals) / h)


@dataclass(frozen=True)
class DualCheckReport:
    """Residual of one endpoint-functional eigenvalue identity."""

    order: int
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    passed: bool


def dual_functional_check(context: IntervalMapContext, poly_coeffs, order: int) -> DualCheckReport:
    """Check that the endpoint functionals are left eigenvectors of L_I.

    Order 0:  l0(L_I f) = Phi_1'(x0) l0(f).
    Order 1:  l1(L_I f) = Phi_1'(x0)^2 l1(f), valid on the subspace
    l0(f) = 0 (the lower-order coupling term drops out there); the left side
    uses one-sided order-4 finite differences at the endpoints.
    """
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are implemented")
    coeffs = np.asarray(poly_coeffs, dtype=float)
    if coeffs.size > 13:
        raise ValueError("polynomial degree is limited to 12")
    p = np.polynomial.Polynomial(coeffs)
    rho = 1.0 / context.deriv_fixed

    def g(x):
        return np.real(transfer_interval_apply(context, p, x))

    if order == 0:
        ell0 = DualFunctional(0)
        lhs = float(g(np.array([context.x1]))[0] - g(np.array([context.x0]))[0])
        rhs = rho * ell0.ell(coeffs, context.x0, context.x1)
        tol = 1e-9
    else:
        ell0 = DualFunctional(0).ell(coeffs, context.x0, context.x1)
        if abs(ell0) > 1e-12:
            raise ValueError("order-1 identity requires l0(f) = 0")
        ell1 = DualFunctional(1)
        lhs = _one_sided_deriv(g, context.x1, _FD_STEP, -1) - _one_sided_deriv(
            g, context.x0, _FD_STEP, +1
        )
        rhs = (rho ** 2) * ell1.ell(coeffs, context.x0, context.x1)
        tol = 1e-8
    residual = abs(lhs - rhs)
    return DualCheckReport(
        order=order,
        lhs=float(lhs),
        rhs=float(rhs),
        residual=float(residual),
        tolerance=tol,
        passed=residual < tol,
    )


def branch_matching_residuals(context: IntervalMapContext) -> dict:
    """Residuals of the two-branch matching conditions at the endpoints.

    Orders 0 and 1 use exact branch values and derivatives; order 2 compares
    one-sided finite differences of the branch derivatives (order-4 stencil
    at steps 1e-3 and 5e-4, Richardson-combined).
    """
    x0, x1 = context.x0, context.x1
    v10, d10 = interval_branch(context, 1, x0)
    v11, d11 = interval_branch(context, 1, x1)
    v20, d20 = interval_branch(context, 2, x0)
    v21, d21 = interval_branch(context, 2, x1)
    order0 = max(abs(v10 - x0), abs(v21 - x1), abs(v20 - v11))
    order1 = max(abs(d10 - d21), abs(d20 - d11))

    def dphi(k):
        return lambda x: np.array(
            [interval_branch(context, k, float(t))[1] for t in np.atleast_1d(x)]
        )

    def second_deriv(k, x, direction):
        coarse = _one_sided_deriv(dphi(k), x, 1e-3, direction)
        fine = _one_sided_deriv(dphi(k), x, 5e-4, direction)
        return (16.0 * fine - coarse) / 15.0

    dd10 = second_deriv(1, x0, +1)
    dd21 = second_deriv(2, x1, -1)
    dd20 = second_deriv(2, x0, +1)
    dd11 = second_deriv(1, x1, -1)
    order2 = max(abs(dd10 - dd21), abs(dd20 - dd11))
    return {"order0": float(order0), "order1": float(order1), "order2": float(order2)}


def intertwine_check(context: IntervalMapContext, f_coeffs, grid_size: int = 128) -> float:
    """Residual of L_I (Q_p f) = Q_p (L_T f) on an interval grid.

    Q_p transports circle functions to the interval through
    (Q_p f)(x) = p'(x) f(p(x)); the left side uses the interval branch sum,
    the right side the circle branch sum, so the two inverse-branch code
    paths check each other.
    """
    from .fourier import laurent_polynomial

    f = laurent_polynomial(f_coeffs)
    grid = np.linspace(context.x0, context.x1, grid_size)

    def qpf(x):
        return projection_deriv(context, x) * f(projection(context, x))

    lhs = transfer_interval_apply(context, qpf, grid)
    rhs = projection_deriv(context, grid) * transfer_apply(
        context.param, f, projection(context, grid)
    )
    return float(np.max(np.abs(lhs - rhs)))
