"""Degree-2 Blaschke-type circle maps and their inverse-branch machinery.

The map family is

    tau(z) = z (lam - z) / (1 - conj(lam) z),        |lam| < 1.

Every member preserves the unit circle, is uniformly expanding on it, and
covers the circle exactly twice.  This module provides evaluation, the
analytic derivative, the two inverse branches with a deterministic
labelling, the circle fixed point, a monotone real lift, and a
numerically certified forward-invariant annulus around the circle.

All operations are pure functions of immutable inputs and are safe to
call concurrently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AnnulusSearchError,
    DegenerateBranchError,
    OrientationError,
    PoleProximityError,
)

TWO_PI = 2.0 * math.pi

# Below this the denominator 1 - conj(lam) z is dominated by rounding; fail
# fast instead of returning garbage.
POLE_TOL = 1e-14

# Safety margin applied to the sampled annulus certificates so that a finer
# sampling cannot flip an accepted inequality.
_CERT_MARGIN = 1e-6


@dataclass(frozen=True)
class BlaschkeParam:
    """Map parameter lam with |lam| < 1, plus its cached polar decomposition.

    Construction rejects |lam| >= 1.  ``modulus`` and ``phase`` are always
    consistent with ``lam`` (they are derived in the constructor).
    """

    lam: complex
    modulus: float = field(init=False)
    phase: float = field(init=False)

    def __post_init__(self) -> None:
        lam = complex(self.lam)
        mod = abs(lam)
        if not mod < 1.0:
            raise ValueError(f"|lambda| must be < 1, got |{lam}| = {mod}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "modulus", mod)
        object.__setattr__(self, "phase", cmath.phase(lam))

    @classmethod
    def from_polar(cls, modulus: float, phase: float) -> "BlaschkeParam":
        return cls(modulus * cmath.exp(1j * phase))

    @property
    def is_real(self) -> bool:
        return self.lam.imag == 0.0


@dataclass(frozen=True)
class AnnulusBounds:
    """Radii r < 1 < R of a certified forward-invariant annulus.

    The certificates are sup_{|z|=r} |tau(z)| < r and inf_{|z|=R} |tau(z)| > R,
    established by dense equispaced sampling with a safety margin.
    """

    r: float
    R: float


@dataclass(frozen=True)
class BranchPair:
    """The two tau-preimages of a point, in the deterministic branch order.

    ``z1`` is the first-branch preimage: its winding angle measured from the
    fixed point z0 lies in the first covering arc [0, psi_c), where psi_c is
    the angle of the co-preimage of z0.  ``z2`` is the other root.  The two
    roots multiply to the queried point (Vieta).
    """

    z1: complex
    z2: complex


def _pole_check(lam: complex, z) -> np.ndarray:
    denom = 1.0 - np.conjugate(lam) * np.asarray(z, dtype=complex)
    if np.any(np.abs(denom) <= POLE_TOL):
        raise PoleProximityError(
            "evaluation point within pole tolerance of 1/conj(lambda)"
        )
    return denom


def tau_eval(param: BlaschkeParam, z):
    """Evaluate tau(z) = z (lam - z) / (1 - conj(lam) z).

    Accepts a complex scalar or ndarray.  Points with |1 - conj(lam) z|
    below the pole tolerance raise :class:`PoleProximityError`.
    """
    lam = param.lam
    zz = np.asarray(z, dtype=complex)
    denom = _pole_check(lam, zz)
    out = zz * (lam - zz) / denom
    return complex(out) if out.ndim == 0 else out


def tau_deriv(param: BlaschkeParam, z):
    """Analytic derivative of tau.

    The numerator of tau'(z) collapses to conj(lam) z^2 - 2 z + lam.
    """
    lam = param.lam
    zz = np.asarray(z, dtype=complex)
    denom = _pole_check(lam, zz)
    out = (np.conjugate(lam) * zz * zz - 2.0 * zz + lam) / (denom * denom)
    return complex(out) if out.ndim == 0 else out


def fixed_point(param: BlaschkeParam) -> complex:
    """The unique circle fixed point z0 = (lam - 1) / (1 - conj(lam))."""
    lam = param.lam
    return (lam - 1.0) / (1.0 - lam.conjugate())


def _preimages(lam: complex, w):
    """Both roots of z^2 - (lam + conj(lam) w) z + w = 0, vectorized, unordered.

    Uses the numerically stable large-root/small-root split.  Degenerate
    (coincident) roots are returned as-is; callers that care must check.
    """
    ww = np.asarray(w, dtype=complex)
    s = lam + np.conjugate(lam) * ww
    sq = np.sqrt(s * s - 4.0 * ww)
    # Align the square root with s so |s + sq| is maximal.
    sq = np.where(np.real(np.conjugate(s) * sq) < 0.0, -sq, sq)
    big = 0.5 * (s + sq)
    safe = np.where(big == 0.0, 1.0, big)
    small = np.where(big == 0.0, 0.0, ww / safe)
    return big, small


def co_preimage_angle(param: BlaschkeParam) -> float:
    """Angle (from z0, in [0, 2 pi)) of the second preimage of z0.

    The preimages of z0 are z0 itself and the point 1, so this is the
    winding angle of 1 relative to z0.  It separates the two covering arcs.
    """
    z0 = fixed_point(param)
    psi = (-cmath.phase(z0)) % TWO_PI
    return psi if psi > 0.0 else TWO_PI


def inverse_branches(param: BlaschkeParam, w: complex) -> BranchPair:
    """Both tau-preimages of ``w``, deterministically ordered.

    The first branch is the root whose angle from the fixed point z0 lies in
    the first covering arc [0, psi_c); at w = z0 it returns z0 itself.
    Raises :class:`DegenerateBranchError` when the two roots coincide to
    within 1e-12 (signals w outside the valid domain).
    """
    a, b = _preimages(param.lam, complex(w))
    a, b = complex(a), complex(b)
    if abs(a - b) < 1e-12:
        raise DegenerateBranchError(f"coincident preimages at w = {w}")
    z0 = fixed_point(param)
    psi_c = co_preimage_angle(param)
    psi_a = np.mod(np.angle(a / z0), TWO_PI)
    psi_b = np.mod(np.angle(b / z0), TWO_PI)
    in_first_a, in_first_b = psi_a < psi_c, psi_b < psi_c
    if in_first_a == in_first_b:
        # Rounding pathology at an arc boundary: fall back to angle order.
        first_is_a = psi_a <= psi_b
    else:
        first_is_a = in_first_a
    return BranchPair(a, b) if first_is_a else BranchPair(b, a)


def transfer_apply(param: BlaschkeParam, f, w):
    """Pointwise transfer operator: sum of f(z_k)/tau'(z_k) over preimages z_k of w.

    ``f`` must accept complex ndarrays.  Branch order does not matter here.
    """
    ww = np.asarray(w, dtype=complex)
    z1, z2 = _preimages(param.lam, ww)
    out = f(z1) / tau_deriv(param, z1) + f(z2) / tau_deriv(param, z2)
    return complex(out) if np.ndim(out) == 0 else out


def expansivity_margin(param: BlaschkeParam, n_samples: int = 4096) -> float:
    """Minimum of |tau'| over ``n_samples`` equispaced circle points.

    Strictly greater than 1 for every |lam| < 1.
    """
    if n_samples < 256:
        raise ValueError("n_samples must be at least 256")
    z = np.exp(1j * TWO_PI * np.arange(n_samples) / n_samples)
    return float(np.min(np.abs(tau_deriv(param, z))))


def _radial_log_derivative(param: BlaschkeParam, n_samples: int) -> np.ndarray:
    """Samples of Re(z tau'(z)/tau(z)) on the unit circle.

    On the circle this quantity is real and equals the local expansion
    factor; its sign distinguishes the orientation-preserving case (all
    positive) from the orientation-reversing one (all negative).
    """
    z = np.exp(1j * TWO_PI * (np.arange(n_samples) + 0.5) / n_samples)
    return np.real(z * tau_deriv(param, z) / tau_eval(param, z))


def _require_orientation_preserving(samples: np.ndarray) -> None:
    if np.max(samples) < 0.0:
        raise OrientationError(
            "orientation-reversing circle map detected; only the "
            "orientation-preserving case is supported"
        )
    if np.min(samples) <= 0.0:
        raise OrientationError(
            "z tau'(z)/tau(z) changes sign on the circle; map is not an "
            "expanding covering"
        )


def _circle_abs_extrema(param: BlaschkeParam, radius: float, n_samples: int):
    z = radius * np.exp(1j * TWO_PI * np.arange(n_samples) / n_samples)
    a = np.abs(tau_eval(param, z))
    return float(np.max(a)), float(np.min(a))


def find_annulus(param: BlaschkeParam, n_samples: int = 4096) -> AnnulusBounds:
    """Search for radii r < 1 < R with tau mapping both boundary circles off the closed annulus.

    Certificates: sampled sup_{|z|=r}|tau| < r - margin and sampled
    inf_{|z|=R}|tau| > R + margin, checked at ``n_samples`` and at the
    doubled sampling.  Candidates additionally keep the zero of tau at lam
    strictly inside the inner disk (r > |lam|) and the pole strictly outside
    the outer circle (R < 1/|lam|), so that both tau and 1/tau are analytic
    on the closed annulus.

    The grid walks from the widest candidate (0.50, 1.50) inward in steps of
    0.01; the first certified pair wins, so the result is the widest
    certifiable annulus on the grid.  Raises :class:`AnnulusSearchError`
    when no candidate certifies (|lam| too close to 1 for this grid).
    """
    _require_orientation_preserving(_radial_log_derivative(param, n_samples))
    mod = param.modulus
    for k in range(50):
        r = round(0.50 + 0.01 * k, 2)
        R = round(1.50 - 0.01 * k, 2)
        if r <= mod:
            continue
        if mod > 0.0 and R >= 1.0 / mod:
            continue
        ok = True
        for m in (n_samples, 2 * n_samples):
            sup_inner, _ = _circle_abs_extrema(param, r, m)
            _, inf_outer = _circle_abs_extrema(param, R, m)
            if not (sup_inner < r - _CERT_MARGIN and inf_outer > R + _CERT_MARGIN):
                ok = False
                break
        if ok:
            return AnnulusBounds(r=r, R=R)
    raise AnnulusSearchError(
        f"no certified annulus on the search grid for |lambda| = {mod:.4f}"
    )


def lift_F(param: BlaschkeParam, x):
    """Monotone real lift F with exp(i pi F(x)) = tau(exp(i pi x)).

    F(x) = 2x + 1 + (2/pi) arctan(m sin(pi x - a) / (1 - m cos(pi x - a)))
    with m = |lam| and a = arg(lam); satisfies F(x + 2) = F(x) + 4.
    """
    xx = np.asarray(x, dtype=float)
    y = np.pi * xx - param.phase
    m = param.modulus
    out = 2.0 * xx + 1.0 + (2.0 / np.pi) * np.arctan(
        m * np.sin(y) / (1.0 - m * np.cos(y))
    )
    return float(out) if out.ndim == 0 else out
