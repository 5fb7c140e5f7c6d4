"""Tensor fields on a polar grid: synthesis from mode coefficients, the direct second variation and the linearised
Euler-Lagrange operator.

The angular direction uses N_phi equispaced nodes, the exact trapezoid rule and spectral derivatives; the radial
direction uses the same rule as the block forms, so the direct value reproduces the block sum up to rounding.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.fft import irfft, rfft

from common.lab_exceptions import NumericError, PreconditionError
from profile_solver.discretization import apply_stencil, radial_stencil
from profile_solver.profile import Profile
from qtensor.core import F2, f1_matrix, frame_matrices
from variation_forms.fields import FormValue, ModeCoefficients
from variation_forms.quadrature import BLOCK_RULE, centrifugal_weights, gradient_weights

logger = logging.getLogger(__name__)

GRADIENT_AGREEMENT = 1e-9
SPECTRUM_FLOOR = 1e-12
RESIDUAL_INNER_RADIUS = 1.0


@dataclass(frozen=True)
class PolarField:
    """ Frame coordinates w0..w4 of a perturbation, shape (5, N+1, N_phi), at angles 2 pi j / N_phi. """
    k: int
    r: np.ndarray
    phi: np.ndarray
    coords: np.ndarray
    top_index: int

    @property
    def n_phi(self) -> int:
        return len(self.phi)

    def tensors(self) -> np.ndarray:
        """ Cartesian tensors, shape (N+1, N_phi, 3, 3). """
        return np.einsum('crp,pcab->rpab', self.coords, frame_matrices(self.k, self.phi))


@dataclass(frozen=True, slots=True)
class LinearizedResidual:
    values: np.ndarray
    max_norm: float
    window: Tuple[int, int]


def required_angular_nodes(top_index: int, k: int) -> int:
    return max(8 * top_index, 2 * (2 * top_index + 3 * abs(k)) + 2)


def angular_grid(n_phi: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n_phi) / n_phi


def angular_derivative(values: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
    """ Spectral phi-derivative along `axis`; the Nyquist mode is dropped. """
    n = values.shape[axis]
    spectrum = rfft(values, axis=axis)
    shape = [1] * values.ndim
    shape[axis] = -1
    multiplier = (1j * np.arange(spectrum.shape[axis])) ** order
    if n % 2 == 0:
        multiplier[-1] = 0.0
    return irfft(spectrum * multiplier.reshape(shape), n=n, axis=axis)


def spectral_top_index(coords: np.ndarray) -> int:
    """ Highest angular index carrying non-negligible energy along the last axis. """
    amplitudes = np.max(np.abs(rfft(coords, axis=-1)), axis=tuple(range(coords.ndim - 1)))
    significant = np.flatnonzero(amplitudes > SPECTRUM_FLOOR * max(float(np.max(amplitudes)), 1e-300))
    return int(significant[-1]) if len(significant) else 0


def synthesize_field(profile: Profile, coeffs: ModeCoefficients, n_phi: int) -> PolarField:
    """ Evaluate w_i = sum mu cos n phi + nu sin n phi and w3 + i w4 = sum z_m exp(i m phi) on the polar grid.
    Raises:
        PreconditionError: if N_phi cannot resolve the populated modes.
    """
    top = coeffs.top_index()
    needed = required_angular_nodes(top, coeffs.k)
    if n_phi < needed:
        raise PreconditionError(f"N_phi={n_phi} cannot resolve angular index {top} at k={coeffs.k}; "
                                f"need at least {needed}.")
    phi = angular_grid(n_phi)
    coords = np.zeros((5, coeffs.size, n_phi))
    for n, values in coeffs.a_cos.items():
        coords[:3] += values[:, :, None] * np.cos(n * phi)
    for n, values in coeffs.a_sin.items():
        coords[:3] += values[:, :, None] * np.sin(n * phi)
    z = np.zeros((coeffs.size, n_phi), dtype=complex)
    for m, values in coeffs.b.items():
        z += values[:, None] * np.exp(1j * m * phi)
    coords[3], coords[4] = z.real, z.imag
    return PolarField(k=coeffs.k, r=profile.r, phi=phi, coords=coords, top_index=top)


def _order_parameter(profile: Profile, phi: np.ndarray) -> np.ndarray:
    u, v = np.asarray(profile.u), np.asarray(profile.v)
    return (u[:, None, None, None] * f1_matrix(profile.params.k, phi)[None]
            + v[:, None, None, None] * F2)


def _check_field(profile: Profile, field: PolarField) -> None:
    if field.k != profile.params.k or field.coords.shape[1] != len(profile.r):
        raise PreconditionError(f"Field with k={field.k} on {field.coords.shape[1]} nodes does not match the "
                                f"profile (k={profile.params.k}, {len(profile.r)} nodes).")
    top = max(field.top_index, spectral_top_index(field.coords))
    needed = required_angular_nodes(top, field.k)
    if field.n_phi < needed:
        raise PreconditionError(f"N_phi={field.n_phi} cannot resolve angular index {top}; need at least {needed}.")


def _agree(name: str, entrywise: float, coordinate: float) -> None:
    scale = max(abs(entrywise), abs(coordinate))
    if abs(entrywise - coordinate) > GRADIENT_AGREEMENT * scale:
        raise NumericError(f"{name} gradient mismatch: entrywise {entrywise:.17g}, coordinate {coordinate:.17g}.")


def potential_density(q: np.ndarray, tensors: np.ndarray, t: float) -> np.ndarray:
    """ -t|V|^2 - 2 tr(Q V^2) + |Q|^2 |V|^2 + 2 (tr Q V)^2 at every grid point. """
    norm_v = np.einsum('...ab,...ab->...', tensors, tensors)
    norm_q = np.einsum('...ab,...ab->...', q, q)
    q_v_v = np.einsum('...ab,...bc,...ca->...', q, tensors, tensors)
    q_v = np.einsum('...ab,...ba->...', q, tensors)
    return -t * norm_v - 2.0 * q_v_v + norm_q * norm_v + 2.0 * q_v * q_v


def evaluate_I_direct(profile: Profile, field: PolarField) -> FormValue:
    """ Second variation of the full tensor field by tensor-product quadrature.
    The gradient is computed from Cartesian entries and from frame coordinates; both must agree.
    Args:
        profile: solved profile.
        field: perturbation on the polar grid of the profile.
    Returns:
        FormValue with the block radial rule.
    Raises:
        PreconditionError: if the grids differ or N_phi is too small for the field content.
        NumericError: if the two gradient evaluations disagree.
    """
    _check_field(profile, field)
    geometry = profile.geometry
    k, t = field.k, profile.params.t
    tensors = field.tensors()
    w = field.coords

    radial_entry = np.sum(np.diff(tensors, axis=0) ** 2, axis=(2, 3))
    radial_coord = np.sum(np.diff(w, axis=1) ** 2, axis=0)
    angular_entry = np.sum(angular_derivative(tensors, axis=1) ** 2, axis=(2, 3))
    dw = angular_derivative(w, axis=2)
    angular_coord = (dw[0] ** 2 + (k * w[2] - dw[1]) ** 2 + (k * w[1] + dw[2]) ** 2
                     + dw[3] ** 2 + dw[4] ** 2)

    step = 2.0 * math.pi / field.n_phi
    radial_weights, angular_weights = gradient_weights(geometry), centrifugal_weights(geometry)
    radial = step * np.sum(radial_weights[:, None] * radial_entry)
    angular = step * np.sum(angular_weights[:, None] * angular_entry)
    _agree('radial', radial, step * np.sum(radial_weights[:, None] * radial_coord))
    _agree('angular', angular, step * np.sum(angular_weights[:, None] * angular_coord))

    density = potential_density(_order_parameter(profile, field.phi), tensors, t)
    bulk = step * np.sum(geometry.weights[:, None] * density)
    logger.debug(f'Direct form: radial {radial:.6e}, angular {angular:.6e}, bulk {bulk:.6e}')
    return FormValue(float(radial + angular + bulk), BLOCK_RULE, geometry.h_max)


def linearized_residual(profile: Profile, field: PolarField, outer_radius: Optional[float] = None
                        ) -> LinearizedResidual:
    """ Linearised Euler-Lagrange operator
        L V = Delta V + t V + (Q V + V Q - (2/3) tr(Q V) I) - |Q|^2 V - 2 Q tr(Q V)
    with the solver's radial stencil and spectral angular derivatives. The max-norm is taken over interior nodes with
    r in [1, outer_radius/2]; outer_radius defaults to r_max.
    """
    _check_field(profile, field)
    r, t = profile.r, profile.params.t
    outer = 0.5 * float(outer_radius or profile.mesh.r_max)
    tensors = field.tensors()
    q = _order_parameter(profile, field.phi)

    values = np.zeros_like(tensors)
    inner = slice(1, len(r) - 1)
    angular = angular_derivative(tensors, axis=1, order=2)
    values[inner] = (apply_stencil(radial_stencil(profile.geometry), tensors)
                     + angular[inner] / (r[inner, None, None, None] ** 2))
    q_v = np.einsum('...ab,...ba->...', q, tensors)[..., None, None]
    norm_q = np.einsum('...ab,...ab->...', q, q)[..., None, None]
    values[inner] += (t * tensors + q @ tensors + tensors @ q - 2.0 / 3.0 * q_v * np.eye(3)
                      - norm_q * tensors - 2.0 * q * q_v)[inner]

    nodes = np.flatnonzero((r >= RESIDUAL_INNER_RADIUS) & (r <= outer))
    nodes = nodes[(nodes > 0) & (nodes < len(r) - 1)]
    if not len(nodes):
        raise PreconditionError(f"No interior nodes in the residual window [{RESIDUAL_INNER_RADIUS}, {outer}].")
    norms = np.sqrt(np.einsum('rpab,rpab->rp', values[nodes], values[nodes]))
    return LinearizedResidual(values=values, max_norm=float(np.max(norms)),
                              window=(int(nodes[0]), int(nodes[-1])))
