"""Tensor algebra of the Landau-de Gennes order parameter.

Q-tensors are symmetric traceless 3x3 matrices. The radial ansatz writes them as u(r)F1(k phi) + v(r)F2, and
perturbations are expanded in the phi-dependent orthonormal frame E0..E4.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from common.lab_exceptions import ConstraintError, DomainError

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)
F2 = np.diag([-1.0, -1.0, 2.0])
TRACE_TOLERANCE = 1e-14
TIE_TOLERANCE = 1e-10


def _check_winding(k) -> int:
    if isinstance(k, bool) or int(k) != k:
        raise DomainError(f"Winding k must be an integer, got {k}.")
    if k == 0:
        raise DomainError("Winding k must be non-zero.")
    return int(k)


def _check_finite(*values: float) -> None:
    if not all(np.all(np.isfinite(value)) for value in values):
        raise DomainError(f"Non-finite input: {values}.")


@dataclass(frozen=True, slots=True)
class SymTraceless3:
    """ Symmetric traceless 3x3 matrix; constraints are checked at construction. """
    entries: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.entries, dtype=float)
        if matrix.shape != (3, 3):
            raise ConstraintError(f"Expected a 3x3 matrix, got shape {matrix.shape}.")
        if not np.all(np.isfinite(matrix)):
            raise ConstraintError("Tensor entries must be finite.")
        if not np.array_equal(matrix, matrix.T):
            raise ConstraintError("Tensor is not symmetric.")
        scale = np.max(np.abs(matrix))
        if abs(np.trace(matrix)) > TRACE_TOLERANCE * scale:
            raise ConstraintError(f"Tensor trace {np.trace(matrix)} exceeds tolerance for scale {scale}.")
        matrix.flags.writeable = False
        object.__setattr__(self, 'entries', matrix)

    def entry(self, i: int, j: int) -> float:
        return float(self.entries[i, j])

    @property
    def norm2(self) -> float:
        return float(np.sum(self.entries * self.entries))


@dataclass(frozen=True, slots=True)
class BulkParams:
    """ Reduced temperature t and winding k of the rescaled model. """
    t: float
    k: int

    def __post_init__(self):
        if not math.isfinite(self.t) or self.t <= 0:
            raise DomainError(f"Reduced temperature must be positive and finite, got t={self.t}.")
        object.__setattr__(self, 'k', _check_winding(self.k))

    @property
    def s_plus(self) -> float:
        return s_plus(self.t)


@dataclass(frozen=True, slots=True)
class Frame:
    k: int
    phi: float
    matrices: Tuple[SymTraceless3, SymTraceless3, SymTraceless3, SymTraceless3, SymTraceless3]

    def stacked(self) -> np.ndarray:
        return np.stack([matrix.entries for matrix in self.matrices])


@dataclass(frozen=True, slots=True)
class QTensorCoords:
    """ Coordinates (w0..w4) of a tensor in the frame at (k, phi). """
    w: Tuple[float, float, float, float, float]
    k: int
    phi: float

    def as_array(self) -> np.ndarray:
        return np.array(self.w)


@dataclass(frozen=True, slots=True)
class TraceForms:
    tr_qv: float
    tr_f1v2: float
    tr_f2v2: float
    norm2: float


class DirectorState(Enum):
    ISOTROPIC = 'isotropic'
    UNIAXIAL = 'uniaxial'
    BIAXIAL = 'biaxial'


@dataclass(frozen=True, slots=True)
class DirectorDecomposition:
    """ Q = s(n n - I/3) + b(m m - I/3). """
    s: float
    b: float
    n: np.ndarray
    m: np.ndarray
    state: DirectorState


def s_plus(t: float) -> float:
    """ Scalar order parameter of the uniaxial bulk minimiser.
    Args:
        t: reduced temperature, positive.
    Returns:
        (1 + sqrt(1 + 24 t)) / 4
    Raises:
        DomainError: if t is not positive and finite.
    """
    if not math.isfinite(t) or t <= 0:
        raise DomainError(f"s_plus needs a positive finite t, got {t}.")
    return (1.0 + math.sqrt(1.0 + 24.0 * t)) / 4.0


def f1_matrix(k: int, phi) -> np.ndarray:
    """ F1(k phi) = 2 n n - I_2, vectorised over phi (shape (..., 3, 3)). """
    angle = k * np.asarray(phi, dtype=float)
    cos, sin = np.cos(angle), np.sin(angle)
    matrix = np.zeros(angle.shape + (3, 3))
    matrix[..., 0, 0] = cos
    matrix[..., 0, 1] = sin
    matrix[..., 1, 0] = sin
    matrix[..., 1, 1] = -cos
    return matrix


def frame_matrices(k: int, phi) -> np.ndarray:
    """ The orthonormal frame E0..E4 as an array of shape (..., 5, 3, 3). """
    k = _check_winding(k)
    angle = k * np.asarray(phi, dtype=float)
    cos, sin = np.cos(angle), np.sin(angle)
    basis = np.zeros(angle.shape + (5, 3, 3))
    basis[..., 0, :, :] = F2 / SQRT6
    basis[..., 1, :, :] = f1_matrix(k, phi) / SQRT2
    basis[..., 2, 0, 0] = -sin / SQRT2
    basis[..., 2, 0, 1] = cos / SQRT2
    basis[..., 2, 1, 0] = cos / SQRT2
    basis[..., 2, 1, 1] = sin / SQRT2
    basis[..., 3, 0, 2] = basis[..., 3, 2, 0] = 1.0 / SQRT2
    basis[..., 4, 1, 2] = basis[..., 4, 2, 1] = 1.0 / SQRT2
    return basis


def frame(k: int, phi: float) -> Frame:
    """ Orthonormal basis of symmetric traceless tensors attached to the angle phi.
    Args:
        k: non-zero winding integer.
        phi: polar angle in radians.
    Returns:
        Frame with E0 = F2/sqrt(6), E1 = F1/sqrt(2) and tr(Ei Ej) = delta_ij.
    Raises:
        DomainError: if k is zero or not an integer.
    """
    _check_finite(phi)
    basis = frame_matrices(k, phi)
    return Frame(k=int(k), phi=float(phi), matrices=tuple(SymTraceless3(matrix) for matrix in basis))


def q_of_profile(u: float, v: float, k: int, phi: float) -> SymTraceless3:
    """ Q = u F1(k phi) + v F2. """
    _check_finite(u, v, phi)
    k = _check_winding(k)
    return SymTraceless3(u * f1_matrix(k, phi) + v * F2)


def coords_of(tensor: SymTraceless3, k: int, phi: float) -> QTensorCoords:
    """ Coordinates w_i = tr(V E_i) of V in the frame at (k, phi). """
    if not isinstance(tensor, SymTraceless3):
        tensor = SymTraceless3(tensor)
    basis = frame_matrices(k, phi)
    w = np.einsum('iab,ab->i', basis, tensor.entries)
    return QTensorCoords(w=tuple(float(x) for x in w), k=int(k), phi=float(phi))


def tensor_of(coords: QTensorCoords) -> SymTraceless3:
    """ Inverse of coords_of: V = sum_i w_i E_i. """
    basis = frame_matrices(coords.k, coords.phi)
    matrix = np.einsum('i,iab->ab', coords.as_array(), basis)
    # Exact symmetry: both triangles come from the same sums
    matrix = np.triu(matrix) + np.triu(matrix, 1).T
    trace = np.trace(matrix)
    matrix[2, 2] -= trace
    return SymTraceless3(matrix)


def trace_forms(u: float, v: float, w, k: int, phi: float) -> TraceForms:
    """ Closed forms of tr(QV), tr(F1 V^2), tr(F2 V^2) and |V|^2 in frame coordinates.
    Args:
        u, v: profile values defining Q = u F1 + v F2.
        w: the five frame coordinates of V.
        k: winding.
        phi: polar angle.
    Returns:
        TraceForms with the four quantities.
    """
    w0, w1, w2, w3, w4 = (float(x) for x in w)
    angle = k * phi
    tr_f1v2 = 0.5 * math.cos(angle) * (w3 * w3 - w4 * w4) - 2.0 / SQRT3 * w0 * w1 + math.sin(angle) * w3 * w4
    tr_f2v2 = w0 * w0 - w1 * w1 - w2 * w2 + 0.5 * w3 * w3 + 0.5 * w4 * w4
    tr_qv = SQRT2 * u * w1 + SQRT6 * v * w0
    norm2 = w0 * w0 + w1 * w1 + w2 * w2 + w3 * w3 + w4 * w4
    return TraceForms(tr_qv=tr_qv, tr_f1v2=tr_f1v2, tr_f2v2=tr_f2v2, norm2=norm2)


def trace_forms_oracle(u: float, v: float, w, k: int, phi: float) -> TraceForms:
    """ Same quantities as trace_forms, by explicit 3x3 matrix products. """
    basis = frame_matrices(k, phi)
    tensor = np.einsum('i,iab->ab', np.asarray(w, dtype=float), basis)
    q = u * f1_matrix(k, phi) + v * F2
    square = tensor @ tensor
    return TraceForms(
        tr_qv=float(np.trace(q @ tensor)),
        tr_f1v2=float(np.trace(f1_matrix(k, phi) @ square)),
        tr_f2v2=float(np.trace(F2 @ square)),
        norm2=float(np.trace(square)),
    )


def eigen_params(tensor: SymTraceless3) -> DirectorDecomposition:
    """ Decompose Q into s(n n - I/3) + b(m m - I/3).
    Eigenvalues are sorted as l1 >= l2 >= l3; then s = l1 - l3, b = l2 - l3, n = e1, m = e2.
    If two eigenvalues coincide within tolerance the tensor is reported uniaxial with b = 0 and n along the distinct
    eigenvector.
    """
    if not isinstance(tensor, SymTraceless3):
        tensor = SymTraceless3(tensor)
    values, vectors = np.linalg.eigh(tensor.entries)
    values, vectors = values[::-1], vectors[:, ::-1]
    tolerance = TIE_TOLERANCE * max(1.0, float(np.max(np.abs(tensor.entries))))
    top_tie = values[0] - values[1] <= tolerance
    bottom_tie = values[1] - values[2] <= tolerance
    if top_tie and bottom_tie:
        return DirectorDecomposition(0.0, 0.0, vectors[:, 0], vectors[:, 1], DirectorState.ISOTROPIC)
    if top_tie:
        return DirectorDecomposition(
            float(values[2] - values[0]), 0.0, vectors[:, 2], vectors[:, 0], DirectorState.UNIAXIAL)
    if bottom_tie:
        return DirectorDecomposition(
            float(values[0] - values[2]), 0.0, vectors[:, 0], vectors[:, 1], DirectorState.UNIAXIAL)
    return DirectorDecomposition(
        float(values[0] - values[2]), float(values[1] - values[2]), vectors[:, 0], vectors[:, 1],
        DirectorState.BIAXIAL)


def reconstruct(decomposition: DirectorDecomposition) -> np.ndarray:
    identity = np.eye(3) / 3.0
    n, m = decomposition.n, decomposition.m
    return decomposition.s * (np.outer(n, n) - identity) + decomposition.b * (np.outer(m, m) - identity)


def bulk_density(tensor, t: float) -> float:
    """ Rescaled bulk energy density -t/2 tr Q^2 - 1/3 tr Q^3 + 1/4 (tr Q^2)^2. """
    matrix = tensor.entries if isinstance(tensor, SymTraceless3) else np.asarray(tensor, dtype=float)
    square = matrix @ matrix
    norm2 = np.trace(square)
    return float(-0.5 * t * norm2 - np.trace(square @ matrix) / 3.0 + 0.25 * norm2 * norm2)


def radial_bulk_density(u, v, t: float):
    """ Bulk density on the ansatz plane, W(u, v); vectorised. """
    squares = u * u + 3.0 * v * v
    return -t * squares - 2.0 * v ** 3 + 2.0 * v * u * u + squares * squares


def far_field_density(t: float) -> float:
    s = s_plus(t)
    return -t * s * s / 3.0 - 2.0 * s ** 3 / 27.0 + s ** 4 / 9.0
