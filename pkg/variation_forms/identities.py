"""Integral identities, the reduced form J and the sum-of-squares forms on radial test functions.

Every identity has the shape  lhs = integral of (q'^2 + c q^2) r dr  with q = g eta, rewritten as a reduced
integrand through integration by parts and the profile equations. Both sides use the composite trapezoid rule with
weight r and second-order central derivatives, so their mismatch is an O(h^2) discretisation error.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from common.lab_exceptions import PreconditionError
from profile_solver.profile import Profile
from qtensor.core import SQRT3
from variation_forms.fields import FormValue, TestFunction, smooth_step, smooth_taper
from variation_forms.potentials import potentials
from variation_forms.quadrature import TRAPEZOID_RULE, integrate_r, radial_derivative

logger = logging.getLogger(__name__)

IDENTITIES = ('A', 'B', 'C', 'D', 'E')
ORIGIN_SENSITIVE = ('D', 'E')
ORIGIN_GUARD_NODES = 2
PLATEAU_INNER_RADIUS = 1.0


@dataclass(frozen=True, slots=True)
class SosComparison:
    direct: FormValue
    sos: FormValue
    summand_minima: Dict[str, float]


def _inverse_power(r: np.ndarray, power: int) -> np.ndarray:
    """ r^-power with the origin node set to zero. """
    values = np.zeros_like(r)
    values[1:] = r[1:] ** (-power)
    return values


def _check_grid(profile: Profile, *functions: TestFunction) -> None:
    for function in functions:
        if len(function.values) != len(profile.r):
            raise PreconditionError(f"Test function has {len(function.values)} samples, "
                                    f"the profile grid has {len(profile.r)} nodes.")


def _form_value(profile: Profile, integrand: np.ndarray) -> FormValue:
    return FormValue(integrate_r(profile.r, integrand), TRAPEZOID_RULE, profile.geometry.h_max)


def _multiplier_and_potential(profile: Profile, which: str) -> Tuple[np.ndarray, np.ndarray]:
    r, u, v = profile.r, np.asarray(profile.u), np.asarray(profile.v)
    k = profile.params.k
    pot = potentials(profile)
    winding = k * k * _inverse_power(r, 2)
    if which == 'A':
        return v, pot.b
    if which == 'B':
        return u, pot.w2 + winding
    if which == 'C':
        return np.asarray(profile.dv), pot.w0
    if which == 'D':
        return np.asarray(profile.du), pot.w1 + winding
    return u * _inverse_power(r, 1), pot.w2 + winding


def _reduced_integrand(profile: Profile, which: str, eta: np.ndarray, deta: np.ndarray) -> np.ndarray:
    r, u, v = profile.r, np.asarray(profile.u), np.asarray(profile.v)
    du, dv, k = np.asarray(profile.du), np.asarray(profile.dv), profile.params.k
    inv_r2 = _inverse_power(r, 2)
    if which == 'A':
        return (v * deta) ** 2 - v * u * u * eta * eta / 3.0
    if which == 'B':
        return (u * deta) ** 2
    if which == 'C':
        return ((dv * deta) ** 2 - (dv * eta) ** 2 * inv_r2
                - 2.0 / 3.0 * u * du * dv * (1.0 + 6.0 * v) * eta * eta)
    if which == 'D':
        return ((du * deta) ** 2 - (du * eta) ** 2 * inv_r2
                + 2.0 * k * k * u * du * eta * eta * _inverse_power(r, 3)
                - 2.0 * u * du * dv * (1.0 + 6.0 * v) * eta * eta)
    return (u * deta) ** 2 * inv_r2 + eta * eta * (2.0 * r * u * du - u * u) * _inverse_power(r, 4)


def identity_pair(profile: Profile, which: str, eta: TestFunction) -> Tuple[FormValue, FormValue]:
    """ Defining and reduced integral of one of the identities A..E for the test function eta.
    Args:
        profile: solved profile with derivatives.
        which: identity name, one of A, B, C, D, E.
        eta: compactly supported test function on the profile grid.
    Returns:
        (lhs, rhs) form values; they agree up to the quadrature error.
    Raises:
        PreconditionError: if the identity is unknown, the grids differ or the profile has no derivatives.
    """
    if which not in IDENTITIES:
        raise PreconditionError(f"Unknown identity {which}, expected one of {IDENTITIES}.")
    profile.require_derivatives()
    _check_grid(profile, eta)
    if which in ORIGIN_SENSITIVE and np.any(eta.values) and eta.support[0] <= ORIGIN_GUARD_NODES:
        logger.warning(f'Identity {which} weights the integrand by negative powers of r; support starting at node '
                       f'{eta.support[0]} loses precision near r = 0')
    r = profile.r
    multiplier, potential = _multiplier_and_potential(profile, which)
    q = multiplier * eta.values
    dq = radial_derivative(r, q)
    deta = radial_derivative(r, eta.values)
    lhs = _form_value(profile, dq * dq + potential * q * q)
    rhs = _form_value(profile, _reduced_integrand(profile, which, eta.values, deta))
    return lhs, rhs


def reduced_second_variation_J(profile: Profile, eta: TestFunction, xi: TestFunction) -> FormValue:
    """ J(eta, xi): the n = 0 form of the (w0, w1) pair, eta in the w0 slot and xi in the w1 slot. """
    _check_grid(profile, eta, xi)
    r, k = profile.r, profile.params.k
    pot = potentials(profile)
    eta_values, xi_values = eta.values, xi.values
    deta, dxi = radial_derivative(r, eta_values), radial_derivative(r, xi_values)
    integrand = (deta * deta + dxi * dxi + pot.w0 * eta_values ** 2
                 + (pot.w1 + k * k * _inverse_power(r, 2)) * xi_values ** 2
                 + 2.0 * pot.cross * eta_values * xi_values)
    return _form_value(profile, integrand)


def plateau(r: np.ndarray, radius: float, inner: float = PLATEAU_INNER_RADIUS) -> np.ndarray:
    """ Smooth cutoff: 0 below inner/2, 1 on [inner, radius/2], 0 beyond radius. """
    return (1.0 - smooth_step((r - 0.5 * inner) / (0.5 * inner))) * smooth_taper(r, radius)


def translation_plateau(profile: Profile, radii: Sequence[float]) -> Dict[float, float]:
    """ J(v' chi_R, u' chi_R) for the plateau cutoffs chi_R of the given radii.
    The values are non-negative and converge as R grows.
    Raises:
        PreconditionError: if a radius exceeds r_max or the profile has no derivatives.
    """
    profile.require_derivatives()
    values = {}
    for radius in radii:
        if not 2.0 * PLATEAU_INNER_RADIUS < radius <= profile.mesh.r_max:
            raise PreconditionError(f"Plateau radius {radius} must lie in ({2.0 * PLATEAU_INNER_RADIUS}, "
                                    f"{profile.mesh.r_max}].")
        chi = plateau(profile.r, radius)
        eta = TestFunction.from_values(profile.dv * chi)
        xi = TestFunction.from_values(profile.du * chi)
        values[float(radius)] = reduced_second_variation_J(profile, eta, xi).value
        logger.debug(f'Translation plateau at R={radius}: {values[float(radius)]:.6e}')
    return values


def _sos_b(profile: Profile, zeta: np.ndarray, eta: np.ndarray) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    r, u, v, k = profile.r, np.asarray(profile.u), np.asarray(profile.v), profile.params.k
    pot = potentials(profile)
    q0, q1 = v * zeta, u * eta
    dq0, dq1 = radial_derivative(r, q0), radial_derivative(r, q1)
    direct = (dq0 * dq0 + dq1 * dq1 + k * k * q1 * q1 * _inverse_power(r, 2)
              + pot.b * (q0 * q0 + q1 * q1) - 2.0 * u * q0 * q1)
    summands = {
        'u_deta': (u * radial_derivative(r, eta)) ** 2,
        'v_dzeta': (v * radial_derivative(r, zeta)) ** 2,
        'potential': -v * u * u * (3.0 * eta + zeta) ** 2 / 3.0,
    }
    return direct, summands


def _sos_a1(profile: Profile, xi: np.ndarray, eta: np.ndarray, zeta: np.ndarray
            ) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    r, u, v = profile.r, np.asarray(profile.u), np.asarray(profile.v)
    du, dv, k = np.asarray(profile.du), np.asarray(profile.dv), abs(profile.params.k)
    pot = potentials(profile)
    inv_r, inv_r2 = _inverse_power(r, 1), _inverse_power(r, 2)
    alpha = (dv * xi, du * eta, u * zeta * inv_r)
    gradient = sum(radial_derivative(r, a) ** 2 for a in alpha)
    direct = (gradient
              + (alpha[0] ** 2 + (1 + k * k) * (alpha[1] ** 2 + alpha[2] ** 2)) * inv_r2
              - 4.0 * k * alpha[1] * alpha[2] * inv_r2
              + pot.w0 * alpha[0] ** 2 + pot.w1 * alpha[1] ** 2 + pot.w2 * alpha[2] ** 2
              + 2.0 * pot.cross * alpha[0] * alpha[1])
    summands = {
        'dv_dxi': (dv * radial_derivative(r, xi)) ** 2,
        'du_deta': (du * radial_derivative(r, eta)) ** 2,
        'u_dzeta_over_r': (u * radial_derivative(r, zeta) * inv_r) ** 2,
        'winding': 2.0 * u * du * _inverse_power(r, 3) * (k * eta - zeta) ** 2,
        'coupling': -2.0 * u * du * dv * (1.0 + 6.0 * v) * (eta - xi / SQRT3) ** 2,
    }
    return direct, summands


def sos_forms(profile: Profile, variant: str, *fields: TestFunction) -> SosComparison:
    """ Direct quadratic form and its sum-of-squares rewriting, in multiplication form.
    Args:
        variant: 'B' with fields (zeta, eta), mapped to q0 = v zeta, q1 = u eta;
            'A1' with fields (xi, eta, zeta), mapped to alpha0 = v' xi, alpha1 = u' eta, alpha2 = u zeta / r.
    Returns:
        SosComparison with both values and the nodal minimum of each sum-of-squares summand.
    Raises:
        PreconditionError: on an unknown variant, a wrong number of fields or mismatched grids.
    """
    expected = {'B': 2, 'A1': 3}
    if variant not in expected:
        raise PreconditionError(f"Unknown sum-of-squares variant {variant}, expected one of {list(expected)}.")
    if len(fields) != expected[variant]:
        raise PreconditionError(f"Variant {variant} takes {expected[variant]} fields, got {len(fields)}.")
    profile.require_derivatives()
    _check_grid(profile, *fields)
    values = [field.values for field in fields]
    direct, summands = _sos_b(profile, *values) if variant == 'B' else _sos_a1(profile, *values)
    return SosComparison(direct=_form_value(profile, direct),
                         sos=_form_value(profile, sum(summands.values())),
                         summand_minima={name: float(np.min(values)) for name, values in summands.items()})
