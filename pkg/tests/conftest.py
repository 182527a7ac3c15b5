import numpy as np
import pytest

from blaschke_transfer import BlaschkeParam
from blaschke_transfer.spectral import greedy_pair

# Canonical parameter grid: two real values and two non-real ones
# (0.7 e^{-2.0137 i} = -0.3 - i sqrt(0.4) up to rounding of the phase).
LAMBDA_GRID = (
    0.4 + 0j,
    -0.7 + 0j,
    0.3 + 0.4j,
    0.7 * np.exp(-2.0137j),
)

MAYER_LAMBDA = 0.1 + 1j * np.sqrt(0.15)


def pairing_error(targets, candidates):
    """Greedy multiset pairing distance (modulus-descending target order)."""
    pairs, _ = greedy_pair(list(targets), list(candidates))
    return max((d for _, _, d in pairs), default=0.0)


@pytest.fixture(params=LAMBDA_GRID, ids=lambda z: f"lam={z:.3g}")
def grid_param(request):
    return BlaschkeParam(request.param)
