"""Exception types shared across the package."""


class BlaschkeTransferError(Exception):
    """Base class for all package-specific errors."""


class PoleProximityError(BlaschkeTransferError, ValueError):
    """Evaluation point too close to the pole of the map."""


class DegenerateBranchError(BlaschkeTransferError, ValueError):
    """The two inverse-branch roots coincide; the point is outside the valid domain."""


class OrientationError(BlaschkeTransferError, RuntimeError):
    """The map is not in the orientation-preserving case handled by this package."""


class AnnulusSearchError(BlaschkeTransferError, RuntimeError):
    """No certified invariant annulus was found on the search grid."""


class QuadratureConvergenceError(BlaschkeTransferError, RuntimeError):
    """Adaptive circle quadrature hit its point budget before converging."""


class StructureViolationError(BlaschkeTransferError, RuntimeError):
    """An assembled matrix violates the required structural identities."""


class NoSuchEigenvalueError(BlaschkeTransferError, ValueError):
    """Requested eigenvalue is not (close to) an eigenvalue of the matrix."""


class DegenerateEigenvalueError(BlaschkeTransferError, RuntimeError):
    """Eigenvector extraction hit a numerically defective eigenvalue."""


class EigensolverError(BlaschkeTransferError, RuntimeError):
    """Dense eigensolver failed or disagreed with the structural read-off."""
