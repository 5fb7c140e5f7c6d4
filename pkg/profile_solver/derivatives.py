import logging

import numpy as np

from common.fd_weights import derivative
from profile_solver.profile import Profile

logger = logging.getLogger(__name__)

ORIGIN_FIT_NODES = 5


def origin_slope(r: np.ndarray, u: np.ndarray) -> float:
    """ Slope a of the least-squares fit u ~ a r + b r^3 on nodes 1..5. """
    window = slice(1, ORIGIN_FIT_NODES + 1)
    design = np.column_stack((r[window], r[window] ** 3))
    coefficients, *_ = np.linalg.lstsq(design, u[window], rcond=None)
    return float(coefficients[0])


def differentiate(profile: Profile) -> Profile:
    """ Fourth-order nodal derivatives of u and v (one-sided near both ends).
    At the origin v'(0) = 0, and u'(0) follows u ~ a r^|k|: zero for |k| >= 2, the fitted slope a for |k| = 1.
    """
    r = profile.r
    du = derivative(r, np.asarray(profile.u))
    dv = derivative(r, np.asarray(profile.v))
    du[0] = origin_slope(r, profile.u) if abs(profile.params.k) == 1 else 0.0
    dv[0] = 0.0
    return profile.with_derivatives(du, dv)
