import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.integrate import trapezoid

from common.lab_exceptions import DiagnosticError
from profile_solver.profile import Profile
from qtensor.core import far_field_density, radial_bulk_density

logger = logging.getLogger(__name__)

SHIFTED_DENSITY_TOLERANCE = 1e-10
FIT_NODES = 10
MIN_FIT_NODES = 4
TAIL_FRACTION = 0.9


@dataclass(frozen=True, slots=True)
class EnergyReport:
    truncated_energy: float
    shifted_energy: float
    core_energy: float
    breakdown: Dict[str, float]
    min_shifted_density: float


@dataclass(frozen=True, slots=True)
class AsymptoticFit:
    origin_exponent: float
    origin_coeff: float
    tail_defects: Tuple[float, float]


def _angular_density_times_r(profile: Profile) -> np.ndarray:
    r, u, k = profile.r, np.asarray(profile.u), profile.params.k
    values = np.zeros_like(r)
    values[1:] = k * k * u[1:] ** 2 / r[1:]
    return values


def reduced_energy(profile: Profile) -> EnergyReport:
    """ Reduced radial energy over [0, r_max] by the composite trapezoid rule with weight r.
    The shifted energy subtracts the far-field bulk value from the density; the core energy further removes the
    logarithmic angular divergence k^2 (s/2)^2 ln r_max.
    Raises:
        PreconditionError: if the profile has no derivatives.
    """
    profile.require_derivatives()
    r, u, v = profile.r, np.asarray(profile.u), np.asarray(profile.v)
    t, k, s = profile.params.t, profile.params.k, profile.s_plus
    density = radial_bulk_density(u, v, t)
    shifted_density = density - far_field_density(t)
    breakdown = {
        'radial_gradient': float(trapezoid((profile.du ** 2 + 3.0 * profile.dv ** 2) * r, r)),
        'angular': float(trapezoid(_angular_density_times_r(profile), r)),
        'bulk': float(trapezoid(density * r, r)),
        'bulk_shifted': float(trapezoid(shifted_density * r, r)),
    }
    truncated = breakdown['radial_gradient'] + breakdown['angular'] + breakdown['bulk']
    shifted = breakdown['radial_gradient'] + breakdown['angular'] + breakdown['bulk_shifted']
    core = shifted - k * k * (0.5 * s) ** 2 * math.log(profile.mesh.r_max)
    min_shifted = float(np.min(shifted_density))
    if min_shifted < -SHIFTED_DENSITY_TOLERANCE:
        logger.warning(f'Shifted bulk density reaches {min_shifted:.3e} < 0; the far-field value is not the minimum '
                       f'along this profile.')
    return EnergyReport(truncated_energy=truncated, shifted_energy=shifted, core_energy=core, breakdown=breakdown,
                        min_shifted_density=min_shifted)


def asymptotic_fit(profile: Profile) -> AsymptoticFit:
    """ Power law of u at the origin and far-field defects at 0.9 r_max.
    Returns:
        AsymptoticFit with the slope and prefactor of the log-log fit of u on nodes 1..10, and the defects
        (s/2 - u, -s/6 - v) interpolated at 0.9 r_max.
    Raises:
        DiagnosticError: if fewer than 4 fit nodes carry u > 0.
    """
    r, u, v = profile.r, np.asarray(profile.u), np.asarray(profile.v)
    window = slice(1, FIT_NODES + 1)
    r_fit, u_fit = r[window], u[window]
    positive = u_fit > 0
    if np.count_nonzero(positive) < MIN_FIT_NODES:
        raise DiagnosticError(f'Only {np.count_nonzero(positive)} nodes with u > 0 in the origin fit window.')
    slope, intercept = np.polyfit(np.log(r_fit[positive]), np.log(u_fit[positive]), 1)
    s = profile.s_plus
    radius = TAIL_FRACTION * profile.mesh.r_max
    tail = (float(0.5 * s - np.interp(radius, r, u)), float(-s / 6.0 - np.interp(radius, r, v)))
    return AsymptoticFit(origin_exponent=float(slope), origin_coeff=float(math.exp(intercept)), tail_defects=tail)
