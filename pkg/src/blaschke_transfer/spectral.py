"""Spectra of assembled transfer matrices versus the known exact spectrum.

For this map family the spectrum is known in closed form: 1, the powers
lam^n, and the powers conj(lam)^n, accumulating at 0.  The window matrix is
block triangular, so its eigenvalues can be read off the diagonal; a dense
eigensolver provides an independent cross-check, and eigenvectors come from
per-block back-substitution.

Coefficient convention: a coefficient vector v over the window labels
-N..N represents the function u(z) = sum_n v[n] z^(n-1).  Label 0 is the
invariant density 1/z (the density of normalized arclength with respect to
the complex line element), label 1 the constant function, label -1 the
function z^(-2), and so on.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEigenvalueError,
    EigensolverError,
    NoSuchEigenvalueError,
    StructureViolationError,
)
from .fourier import TransferMatrix, validate_structure
from .maps import BlaschkeParam, transfer_apply


def _sort_key(z: complex):
    return (-abs(z), np.angle(z))


def greedy_pair(targets, candidates):
    """Pair each target (in decreasing modulus, phase ascending) with the
    nearest unused candidate.  Returns (pairs, leftover_candidate_indices);
    pairs are (target_index, candidate_index, distance) triples."""
    order = sorted(range(len(targets)), key=lambda i: _sort_key(targets[i]))
    free = list(range(len(candidates)))
    pairs = []
    for i in order:
        if not free:
            break
        dists = [abs(targets[i] - candidates[j]) for j in free]
        k = int(np.argmin(dists))
        pairs.append((i, free.pop(k), float(dists[k])))
    return pairs, free


@dataclass(frozen=True)
class SpectrumPrediction:
    """Exact eigenvalues with algebraic multiplicities, truncated at depth.

    entries holds (eigenvalue, multiplicity) pairs sorted by decreasing
    modulus (phase ascending on ties).  For real lam != 0 each power lam^n,
    n >= 1, carries multiplicity two; for non-real lam the powers of lam and
    conj(lam) each carry multiplicity one; the leading eigenvalue 1 always
    has multiplicity one.  The spectrum additionally accumulates at zero,
    recorded by ``includes_zero``.
    """

    entries: tuple
    param: BlaschkeParam
    depth: int
    includes_zero: bool = True

    def expanded(self) -> list:
        """Eigenvalues repeated by multiplicity, modulus-descending."""
        out = []
        for value, mult in self.entries:
            out.extend([value] * mult)
        return sorted(out, key=_sort_key)


def predicted_spectrum(param: BlaschkeParam, n_max: int) -> SpectrumPrediction:
    """Truncation of the exact circle spectrum to powers <= n_max."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    lam = param.lam
    entries = [(1.0 + 0j, 1)]
    if lam != 0:
        if param.is_real:
            entries += [(lam ** n, 2) for n in range(1, n_max + 1)]
        else:
            for n in range(1, n_max + 1):
                entries += [(lam ** n, 1), (lam.conjugate() ** n, 1)]
    entries.sort(key=lambda e: _sort_key(e[0]))
    return SpectrumPrediction(entries=tuple(entries), param=param, depth=n_max)


@dataclass(frozen=True)
class SpectrumReport:
    """Computed eigenvalues paired against a prediction.

    ``pairing`` maps computed indices to indices into
    ``predicted.expanded()``.  Computed values of modulus below ``tol``
    that were not claimed by any prediction belong to the essential-zero
    cluster and are recorded in ``zero_cluster`` rather than counted as
    unmatched.
    """

    computed: tuple
    predicted: SpectrumPrediction
    pairing: tuple
    max_pair_error: float
    unmatched_computed: tuple
    unmatched_predicted: tuple
    zero_cluster: tuple
    tol: float

    @property
    def passed(self) -> bool:
        expanded = self.predicted.expanded()
        missing = [i for i in self.unmatched_predicted if abs(expanded[i]) >= self.tol]
        return self.max_pair_error < self.tol and not missing


def match_spectra(computed, prediction: SpectrumPrediction, tol: float) -> SpectrumReport:
    """Greedy pairing of computed eigenvalues against the prediction.

    Predictions are walked in decreasing modulus (phase ascending); each
    takes the nearest unused computed value.  Leftover computed values below
    modulus ``tol`` are matched to the spectral point 0.
    """
    computed = [complex(c) for c in computed]
    expanded = prediction.expanded()
    pairs, free = greedy_pair(expanded, computed)
    pairing = tuple((cand, tgt) for tgt, cand, _ in pairs)
    max_err = max((d for _, _, d in pairs), default=0.0)
    matched_targets = {tgt for tgt, _, _ in pairs}
    unmatched_predicted = tuple(
        i for i in range(len(expanded)) if i not in matched_targets
    )
    zero_cluster = tuple(j for j in free if abs(computed[j]) < tol)
    unmatched_computed = tuple(j for j in free if abs(computed[j]) >= tol)
    return SpectrumReport(
        computed=tuple(computed),
        predicted=prediction,
        pairing=pairing,
        max_pair_error=float(max_err),
        unmatched_computed=unmatched_computed,
        unmatched_predicted=unmatched_predicted,
        zero_cluster=zero_cluster,
        tol=tol,
    )


def eigenvalues_triangular(matrix: TransferMatrix) -> list:
    """Eigenvalues read off the diagonal of the block-triangular matrix.

    Valid once the structural identities hold at 1e-10; repetition encodes
    algebraic multiplicity.
    """
    report = validate_structure(matrix, 1e-10)
    if not report.passed:
        raise StructureViolationError(
            f"matrix violates the triangular structure: {report.violations}"
        )
    return [complex(v) for v in matrix.diagonal()]


def eigenvalues_dense(matrix: TransferMatrix, tol: float = 1e-8) -> list:
    """Full eigenvalue multiset from a dense backward-stable eigensolver.

    Independent cross-check of the diagonal read-off: when the structure
    validates, the multiset distance to the triangular eigenvalues must not
    exceed ``tol`` under greedy pairing.
    """
    if matrix.size > 129:
        raise ValueError("dense eigensolver is limited to 2N+1 <= 129")
    try:
        values = np.linalg.eigvals(np.asarray(matrix.entries))
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"dense eigensolver failed to converge: {exc}") from exc
    values = [complex(v) for v in values]
    if validate_structure(matrix, 1e-10).passed:
        pairs, _ = greedy_pair(matrix.diagonal(), values)
        dist = max((d for _, _, d in pairs), default=0.0)
        if dist > tol:
            raise EigensolverError(
                f"dense eigenvalues deviate from the triangular read-off by {dist:.3e}"
            )
    return values


@dataclass(frozen=True)
class EigenFunction:
    """Eigenvector as window coefficients, with its branch-sum residual.

    The function is u(z) = sum_n coeffs[n] z^(n-1) over labels -N..N; the
    residual is the sup over 256 circle points of |(L u)(z) - mu u(z)| with
    (L u) evaluated by the inverse-branch sum.
    """

    coeffs: np.ndarray
    eigenvalue: complex
    residual: float
    anchor: int


def _coeff_function(coeffs: np.ndarray, N: int):
    powers = np.arange(-N, N + 1) - 1

    def u(z):
        zz = np.asarray(z, dtype=complex)
        return (zz[..., None] ** powers) @ coeffs

    return u


def _branch_sum_residual(param, coeffs, N, eigenvalue, n_points=256) -> float:
    u = _coeff_function(coeffs, N)
    z = np.exp(2j * np.pi * np.arange(n_points) / n_points)
    lhs = transfer_apply(param, u, z)
    return float(np.max(np.abs(lhs - eigenvalue * u(z))))


def eigenfunction(matrix: TransferMatrix, eigenvalue: complex, copy: int = 0) -> EigenFunction:
    """Unit eigenvector for ``eigenvalue`` by per-block back-substitution.

    ``eigenvalue`` must lie within 1e-8 of a diagonal entry.  For real lam
    the powers lam^n appear at the two diagonal positions -n and n;
    ``copy`` selects among the matching anchors, ordered by |position| with
    the negative-label block first.
    """
    N = matrix.order
    diag = matrix.diagonal()
    if not validate_structure(matrix, 1e-10).passed:
        raise StructureViolationError("matrix violates the triangular structure")
    anchors = [
        p for p in sorted(range(-N, N + 1), key=lambda p: (abs(p), p > 0))
        if abs(diag[p + N] - eigenvalue) <= 1e-8
    ]
    if not anchors:
        raise NoSuchEigenvalueError(
            f"{eigenvalue} is not within 1e-8 of any matrix eigenvalue"
        )
    if not 0 <= copy < len(anchors):
        raise NoSuchEigenvalueError(
            f"eigenvalue {eigenvalue} has {len(anchors)} anchor(s); copy={copy}"
        )
    anchor = anchors[copy]
    mu = complex(diag[anchor + N])
    v = np.zeros(2 * N + 1, dtype=complex)
    v[anchor + N] = 1.0
    # Each triangular block couples a label only to labels farther from the
    # center, so back-substitution walks from the anchor toward +-1.
    sgn = 1 if anchor > 0 else -1
    for m in range(abs(anchor) - 1, 0, -1):
        row = sgn * m
        acc = 0.0 + 0j
        for k in range(m + 1, abs(anchor) + 1):
            acc += matrix.entry(row, sgn * k) * v[sgn * k + N]
        denom = mu - diag[row + N]
        if abs(denom) < 1e-13 * max(1.0, abs(mu)):
            raise DegenerateEigenvalueError(
                f"eigenvalue {mu} is numerically defective at label {row}"
            )
        v[row + N] = acc / denom
    v /= np.linalg.norm(v)
    residual = _branch_sum_residual(matrix.param, v, N, mu)
    return EigenFunction(coeffs=v, eigenvalue=mu, residual=residual, anchor=anchor)


@dataclass(frozen=True)
class ConvergenceRow:
    """One window size of a convergence study."""

    order: int
    eigenvalues: tuple
    max_diff_from_prev: float | None
    runtime_s: float
    within_tol: bool


def convergence_study(
    param: BlaschkeParam, N_list, tol: float, method: str = "quadrature"
) -> list:
    """Eigenvalues across increasing windows plus consecutive differences.

    Differences compare the top 2*min(N_list)+1 eigenvalues by modulus; for
    this exactly-triangular family they vanish identically, so any drift is
    a quadrature regression signal.  Rows record runtimes.
    """
    from .fourier import assemble

    ns = list(N_list)
    if not ns:
        raise ValueError("N_list must be nonempty")
    if ns != sorted(ns):
        raise ValueError("N_list must be increasing")
    keep = 2 * ns[0] + 1
    rows = []
    prev_top = None
    for N in ns:
        t0 = time.perf_counter()
        matrix = assemble(param, N, method=method)
        values = eigenvalues_triangular(matrix)
        elapsed = time.perf_counter() - t0
        top = sorted(values, key=_sort_key)[:keep]
        diff = None
        if prev_top is not None:
            pairs, _ = greedy_pair(prev_top, top)
            diff = max((d for _, _, d in pairs), default=0.0)
        rows.append(
            ConvergenceRow(
                order=N,
                eigenvalues=tuple(values),
                max_diff_from_prev=diff,
                runtime_s=elapsed,
                within_tol=diff is None or diff <= tol,
            )
        )
        prev_top = top
    return rows
