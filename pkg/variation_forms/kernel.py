import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from profile_solver.profile import Profile
from qtensor.core import SQRT3
from variation_forms.fields import ModeCoefficients, log_taper, smooth_taper

logger = logging.getLogger(__name__)

KERNEL_NAMES = ('V0', 'V1', 'V2', 'V3', 'V4')
# Non-decaying modes, cut off in ln r
LOG_TAPERED = ('V0', 'V3', 'V4')
LOG_TAPER_INNER = 1.0


@dataclass(frozen=True)
class KernelVectors:
    raw: Dict[str, ModeCoefficients]
    tapered: Dict[str, ModeCoefficients]
    taper_radius: float


def u_over_r(profile: Profile) -> np.ndarray:
    """ u/r with its limit u'(0) at the origin. """
    r, u = profile.r, np.asarray(profile.u)
    values = np.empty_like(r)
    values[1:] = u[1:] / r[1:]
    values[0] = profile.du[0]
    return values


def kernel_taper(profile: Profile, name: str, radius: float) -> np.ndarray:
    if name in LOG_TAPERED:
        return log_taper(profile.r, LOG_TAPER_INNER, radius)
    return smooth_taper(profile.r, radius)


def _raw_vectors(profile: Profile) -> Dict[str, ModeCoefficients]:
    k, size = profile.params.k, len(profile.r)
    u, v = np.asarray(profile.u), np.asarray(profile.v)
    du, dv = np.asarray(profile.du), np.asarray(profile.dv)
    zeros = np.zeros(size)
    radial = np.vstack((SQRT3 * dv, du, zeros))
    winding = k * u_over_r(profile)
    return {
        'V0': ModeCoefficients(k, size, a_cos={0: np.vstack((zeros, zeros, u))}),
        'V1': ModeCoefficients(k, size, a_cos={1: radial}, a_sin={1: np.vstack((zeros, zeros, -winding))}),
        'V2': ModeCoefficients(k, size, a_cos={1: np.vstack((zeros, zeros, winding))}, a_sin={1: radial}),
        'V3': ModeCoefficients(k, size, b={k: u.astype(complex), 0: (-3.0 * v).astype(complex)}),
        'V4': ModeCoefficients(k, size, b={k: -1j * u, 0: -3j * v}),
    }


def kernel_vectors(profile: Profile, taper_radius: Optional[float] = None) -> KernelVectors:
    """ The five symmetry zero modes in mode coordinates, raw and cut off at `taper_radius`.
    V0 rotates the director about the z-axis, V1 and V2 translate the defect, V3 and V4 tilt it out of the plane.
    Args:
        profile: solved profile with derivatives.
        taper_radius: cutoff radius, defaults to r_max.
    Returns:
        KernelVectors keyed V0..V4.
    Raises:
        PreconditionError: if the profile has no derivatives.
    """
    profile.require_derivatives()
    radius = float(taper_radius or profile.mesh.r_max)
    raw = _raw_vectors(profile)
    tapered = {name: vector.scaled(kernel_taper(profile, name, radius)) for name, vector in raw.items()}
    logger.debug(f'Kernel vectors built with taper radius {radius}')
    return KernelVectors(raw=raw, tapered=tapered, taper_radius=radius)
