"""Transfer-operator spectra of expanding Blaschke-type circle maps.

The map family tau(z) = z (lam - z) / (1 - conj(lam) z), |lam| < 1, has a
transfer operator on holomorphic functions whose spectrum is known exactly:
the nonnegative powers of lam and conj(lam), accumulating at zero.  This
package assembles the operator's Fourier window matrices, computes and
cross-checks their spectra, builds the induced interval maps with their
Chebyshev collocation discretization, and verifies the functional
identities that the construction rests on.
"""

from .errors import (
    AnnulusSearchError,
    BlaschkeTransferError,
    DegenerateBranchError,
    DegenerateEigenvalueError,
    EigensolverError,
    NoSuchEigenvalueError,
    OrientationError,
    PoleProximityError,
    QuadratureConvergenceError,
    StructureViolationError,
)
from .fourier import (
    MAX_INDEX,
    QuadratureSpec,
    StructureReport,
    TransferMatrix,
    assemble,
    duality_check,
    entry_closed_form,
    entry_quadrature,
    laurent_polynomial,
    row_fft,
    validate_structure,
)
from .interval import (
    DualCheckReport,
    DualFunctional,
    IntervalDiscretization,
    IntervalMapContext,
    T_deriv,
    T_deriv_at_fixed_point,
    T_eval,
    branch_closed_form,
    branch_matching_residuals,
    chebyshev_lobatto,
    collocation_matrix,
    dual_functional_check,
    intertwine_check,
    interval_branch,
    interval_spectrum_predicted,
    make_context,
    projection,
    transfer_interval_apply,
)
from .inverse_problem import (
    FunctionalEquationReport,
    chebyshev_grid,
    verify_designed_eigenfunction,
    verify_lift_inverse,
    verify_sine_identity,
    verify_sum_identity,
)
from .maps import (
    AnnulusBounds,
    BlaschkeParam,
    BranchPair,
    expansivity_margin,
    find_annulus,
    fixed_point,
    inverse_branches,
    lift_F,
    tau_deriv,
    tau_eval,
    transfer_apply,
)
from .spectral import (
    ConvergenceRow,
    EigenFunction,
    SpectrumPrediction,
    SpectrumReport,
    convergence_study,
    eigenfunction,
    eigenvalues_dense,
    eigenvalues_triangular,
    match_spectra,
    predicted_spectrum,
)

__version__ = "0.1.0"
