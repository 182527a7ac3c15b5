"""Verification of the constructive origin of the map family (real lam).

The family was designed so that, on [-1, 1] with the uniform invariant
density, the interval transfer operator has eigenvalue lam with
eigenfunction cos(pi x).  That forces the branch identities

    Phi_1(x) + Phi_2(x) = x,
    lam sin(pi x) = sin(pi Phi_1(x)) + sin(pi Phi_2(x)),

with the closed-form branch Phi(x) = x/2 - arccos(lam cos(pi x / 2)) / pi
and its inverse given by the explicit lift F.  Each check evaluates the
differentiated, constant-free form of an identity on a grid and reports
the maximum residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interval import _branch_data, branch_closed_form, make_context
from .maps import BlaschkeParam, lift_F


@dataclass(frozen=True)
class FunctionalEquationReport:
    equation: str
    grid: np.ndarray
    max_residual: float
    tolerance: float
    passed: bool


def chebyshev_grid(size: int) -> np.ndarray:
    """size Chebyshev-distributed points on [-1, 1], endpoints included."""
    if size < 2:
        raise ValueError("grid needs at least two points")
    return -np.cos(np.pi * np.arange(size) / (size - 1))


def _real_param(lam: float) -> BlaschkeParam:
    lam = float(lam)
    if not -1.0 < lam < 1.0:
        raise ValueError("lam must be real with |lam| < 1")
    return BlaschkeParam(lam)


def _report(equation, grid, residual, tol) -> FunctionalEquationReport:
    return FunctionalEquationReport(
        equation=equation,
        grid=grid,
        max_residual=float(residual),
        tolerance=tol,
        passed=bool(residual < tol),
    )


def verify_sum_identity(lam: float, grid_size: int = 257) -> FunctionalEquationReport:
    """Phi_1 + Phi_2 = x on the grid."""
    ctx = make_context(_real_param(lam))
    x = chebyshev_grid(grid_size)
    phi1, _, phi2, _ = _branch_data(ctx, x)
    return _report("branch_sum", x, np.max(np.abs(phi1 + phi2 - x)), 1e-11)


def verify_sine_identity(lam: float, grid_size: int = 257) -> FunctionalEquationReport:
    """lam sin(pi x) = sin(pi Phi_1) + sin(pi Phi_2) on the grid."""
    ctx = make_context(_real_param(lam))
    x = chebyshev_grid(grid_size)
    phi1, _, phi2, _ = _branch_data(ctx, x)
    res = np.abs(lam * np.sin(np.pi * x) - np.sin(np.pi * phi1) - np.sin(np.pi * phi2))
    return _report("branch_sine", x, np.max(res), 1e-10)


def verify_lift_inverse(lam: float, grid_size: int = 257) -> FunctionalEquationReport:
    """F(Phi(x)) = x for the closed-form branch and the explicit lift.

    Also requires Phi to be increasing along the grid (sampled differences).
    """
    param = _real_param(lam)
    x = chebyshev_grid(grid_size)
    phi = branch_closed_form(float(lam), x)
    residual = float(np.max(np.abs(lift_F(param, phi) - x)))
    if np.any(np.diff(phi) <= 0.0):
        residual = max(residual, 1.0)  # monotonicity failure dominates
    return _report("lift_inverse", x, residual, 1e-10)


def verify_designed_eigenfunction(lam: float, grid_size: int = 257) -> FunctionalEquationReport:
    """Phi_1' cos(pi Phi_1) + Phi_2' cos(pi Phi_2) = lam cos(pi x).

    This is the eigenvalue equation L_I u = lam u for the designed
    eigenfunction u(x) = cos(pi x), in differentiated (constant-free) form.
    """
    ctx = make_context(_real_param(lam))
    x = chebyshev_grid(grid_size)
    phi1, dphi1, phi2, dphi2 = _branch_data(ctx, x)
    res = np.abs(
        dphi1 * np.cos(np.pi * phi1)
        + dphi2 * np.cos(np.pi * phi2)
        - lam * np.cos(np.pi * x)
    )
    return _report("designed_eigenfunction", x, np.max(res), 1e-9)


def run_all(lam: float, grid_size: int = 257) -> list:
    """All four verifications for one real parameter."""
    return [
        verify_sum_identity(lam, grid_size),
        verify_sine_identity(lam, grid_size),
        verify_lift_inverse(lam, grid_size),
        verify_designed_eigenfunction(lam, grid_size),
    ]
