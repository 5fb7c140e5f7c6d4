"""Block forms of the second variation and their weighted sum.

Angular normalisation lives in spectral.blocks.ANGULAR_WEIGHTS: integrating cos^2 n phi gives 2 pi for n = 0 and pi
for n >= 1, and |z|^2 = |sum z_m exp(i m phi)|^2 integrates to 2 pi sum |z_m|^2.
"""
import logging

import numpy as np

from common.lab_exceptions import PreconditionError
from profile_solver.profile import Profile
from spectral.blocks import BlockSpec, block_coefficients
from variation_forms.fields import FormValue, ModeCoefficients
from variation_forms.quadrature import BLOCK_RULE, block_quadratic

logger = logging.getLogger(__name__)


def _check_coefficients(profile: Profile, coeffs: ModeCoefficients) -> None:
    if coeffs.size != len(profile.r):
        raise PreconditionError(f"Coefficients live on {coeffs.size} nodes, the profile grid has {len(profile.r)}.")
    if coeffs.k != profile.params.k:
        raise PreconditionError(f"Coefficient winding {coeffs.k} does not match profile winding {profile.params.k}.")


def block_form(profile: Profile, spec: BlockSpec, coeffs: ModeCoefficients) -> FormValue:
    """ Radial form of one block without its angular weight.
    A non-self B pair evaluates the real and the imaginary sub-block and sums them.
    Raises:
        PreconditionError: if the coefficients and the profile live on different grids or windings.
    """
    _check_coefficients(profile, coeffs)
    geometry = profile.geometry
    coefficients = block_coefficients(profile, spec)
    value = sum(block_quadratic(geometry, coefficients.centrifugal, coefficients.potential, fields)
                for fields in coeffs.block_fields(spec))
    return FormValue(float(value), BLOCK_RULE, geometry.h_max)


def evaluate_I_blocks(profile: Profile, coeffs: ModeCoefficients) -> FormValue:
    """ Second variation as the angular-weighted sum of its populated blocks. """
    _check_coefficients(profile, coeffs)
    total = 0.0
    for spec in coeffs.populated_blocks():
        contribution = spec.angular_weight * block_form(profile, spec, coeffs).value
        logger.debug(f'Block {spec.label} contributes {contribution:.6e}')
        total += contribution
    return FormValue(total, BLOCK_RULE, profile.geometry.h_max)


def mode_norm2(profile: Profile, coeffs: ModeCoefficients) -> float:
    """ Squared L2 norm of the perturbation over the disc, with control-volume weights. """
    _check_coefficients(profile, coeffs)
    weights = profile.geometry.weights
    total = 0.0
    for spec in coeffs.populated_blocks():
        squares = sum(np.sum(fields * fields, axis=1) for fields in coeffs.block_fields(spec))
        total += spec.angular_weight * float(np.sum(weights * squares))
    return total
