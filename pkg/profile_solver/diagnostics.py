import logging
from typing import Dict

import numpy as np

from common.fd_weights import derivative
from profile_solver.profile import Profile

logger = logging.getLogger(__name__)


def third_derivative_residual(profile: Profile, inner: float = 1.0, outer_fraction: float = 0.9) -> Dict[str, float]:
    """ Max-norm residual of the differentiated Euler-Lagrange system on inner <= r <= outer_fraction r_max.
    u''' + u''/r - (1 + k^2) u'/r^2 + 2 k^2 u/r^3 = u'(-t + 2v + 6v^2 + 6u^2) + 2 u v'(1 + 6v)
    v''' + v''/r - v'/r^2 = v'(-t - 2v + 18v^2 + 2u^2) + (2 u u'/3)(1 + 6v)
    """
    profile.require_derivatives()
    r, u, v = profile.r, np.asarray(profile.u), np.asarray(profile.v)
    du, dv = np.asarray(profile.du), np.asarray(profile.dv)
    d2u, d2v = derivative(r, du), derivative(r, dv)
    d3u, d3v = derivative(r, d2u), derivative(r, d2v)
    t, k2 = profile.params.t, profile.params.k ** 2
    mask = (r >= inner) & (r <= outer_fraction * profile.mesh.r_max)
    r, u, v, du, dv = r[mask], u[mask], v[mask], du[mask], dv[mask]
    d2u, d2v, d3u, d3v = d2u[mask], d2v[mask], d3u[mask], d3v[mask]
    u_line = d3u + d2u / r - (1 + k2) * du / r ** 2 + 2 * k2 * u / r ** 3 \
        - du * (-t + 2 * v + 6 * v ** 2 + 6 * u ** 2) - 2 * u * dv * (1 + 6 * v)
    v_line = d3v + d2v / r - dv / r ** 2 \
        - dv * (-t - 2 * v + 18 * v ** 2 + 2 * u ** 2) - 2.0 * u * du / 3.0 * (1 + 6 * v)
    result = {'u': float(np.max(np.abs(u_line))), 'v': float(np.max(np.abs(v_line)))}
    logger.debug(f'Third-derivative residuals: {result}')
    return result
