import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import splu

from common.lab_exceptions import FactorizationError, PreconditionError
from spectral.pencil import Pencil

logger = logging.getLogger(__name__)

DENSE_LIMIT = 600
MAX_COUNT = 10
EXTRA_VECTORS = 4
INITIAL_SHIFT = -1e-3
SHIFT_GROWTH = 4.0
MAX_SHIFT_MOVES = 40
MAX_RETRIES = 5
MAX_ITERATIONS = 500
PIVOT_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class EigenPairs:
    """ Smallest eigenpairs of a pencil; vectors are M-orthonormal columns and residuals are
    ||A x - lambda M x|| in the M^-1 norm. """
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    method: str

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0


def _residuals(pencil: Pencil, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    defect = pencil.stiffness @ vectors - (pencil.mass[:, None] * vectors) * values[None, :]
    return np.sqrt(np.sum(defect * defect / pencil.mass[:, None], axis=0))


def _perturbed(shift: float, attempt: int) -> float:
    return shift * (1.0 + 1e-8 * attempt) + np.copysign(1e-12 * attempt, shift or 1.0)


def _factorize(pencil: Pencil, shift: float):
    """ Sparse LU of A - shift M, retrying with perturbed shifts when the factor is singular. """
    for attempt in range(MAX_RETRIES + 1):
        trial = _perturbed(shift, attempt) if attempt else shift
        try:
            return splu((pencil.stiffness - trial * pencil.mass_matrix()).tocsc()), trial
        except RuntimeError as error:
            logger.warning(f'Singular factorization of {pencil.label} at shift {trial:.3e} ({error}), retrying')
    raise FactorizationError(f"A - sigma M of {pencil.label} stays singular near sigma={shift:.3e} "
                             f"after {MAX_RETRIES} perturbations.")


def _dense_smallest(pencil: Pencil, count: int) -> EigenPairs:
    stiffness, mass = pencil.dense()
    values, vectors = linalg.eigh(stiffness, mass, subset_by_index=[0, count - 1])
    return EigenPairs(values=values, vectors=vectors, residuals=_residuals(pencil, values, vectors), method='dense')


def _lower_shift(pencil: Pencil) -> float:
    shift = INITIAL_SHIFT
    for _ in range(MAX_SHIFT_MOVES):
        if inertia_below(pencil, shift) == 0:
            return shift
        shift *= SHIFT_GROWTH
    raise FactorizationError(f"No shift below the spectrum of {pencil.label} down to {shift:.3e}.")


def _subspace_iteration(pencil: Pencil, count: int, tol: float, seed: int) -> EigenPairs:
    size = min(count + EXTRA_VECTORS, pencil.dimension)
    lu, shift = _factorize(pencil, _lower_shift(pencil))
    root_mass = np.sqrt(pencil.mass)
    block = np.random.default_rng(seed).standard_normal((pencil.dimension, size))
    values = np.zeros(size)
    residuals = np.full(count, np.inf)
    for iteration in range(1, MAX_ITERATIONS + 1):
        block = lu.solve(pencil.mass[:, None] * block)
        orthonormal, _ = np.linalg.qr(root_mass[:, None] * block)
        block = orthonormal / root_mass[:, None]
        projected = block.T @ (pencil.stiffness @ block)
        values, rotation = linalg.eigh(0.5 * (projected + projected.T))
        block = block @ rotation
        residuals = _residuals(pencil, values[:count], block[:, :count])
        if np.all(residuals <= tol):
            logger.debug(f'{pencil.label}: subspace iteration converged in {iteration} steps at shift {shift:.3e}')
            break
    else:
        logger.warning(f'{pencil.label}: subspace iteration stopped after {MAX_ITERATIONS} steps with residual '
                       f'{float(np.max(residuals)):.3e}')
    return EigenPairs(values=values[:count], vectors=block[:, :count], residuals=residuals, method='shift-invert')


def eig_smallest(pencil: Pencil, count: int = 4, tol: float = 1e-8, seed: int = 0) -> EigenPairs:
    """ The `count` algebraically smallest eigenpairs of A x = lambda M x.
    Args:
        pencil: assembled pencil.
        count: number of eigenpairs, at most 10.
        tol: residual bound in the M^-1 norm for M-normalised vectors.
        seed: seed of the random start block.
    Returns:
        EigenPairs in nondecreasing order.
    Raises:
        PreconditionError: if count is out of range.
        FactorizationError: if the shifted operator stays singular.
    """
    if not 1 <= count <= min(MAX_COUNT, pencil.dimension):
        raise PreconditionError(f"count must lie in [1, {min(MAX_COUNT, pencil.dimension)}], got {count}.")
    if pencil.dimension <= DENSE_LIMIT:
        return _dense_smallest(pencil, count)
    return _subspace_iteration(pencil, count, tol, seed)


def _negative_count(pencil: Pencil, shift: float) -> int:
    """ Sylvester inertia through the block LDL^T recursion S_i = D_i - O_{i-1}^T S_{i-1}^-1 O_{i-1}. """
    negatives = 0
    previous = None
    for i, (block, mass) in enumerate(zip(pencil.diagonal_blocks, pencil.mass_blocks())):
        schur = block - shift * np.diag(mass)
        if previous is not None and previous.shape[0]:
            coupling = pencil.coupling_blocks[i - 1]
            schur = schur - coupling.T @ linalg.solve(previous, coupling, assume_a='sym')
        if schur.shape[0]:
            pivots = linalg.eigvalsh(schur)
            scale = max(float(np.max(np.abs(block))), 1.0)
            if np.min(np.abs(pivots)) <= PIVOT_TOLERANCE * scale:
                raise ZeroDivisionError(f"near-zero pivot at node {i}")
            negatives += int(np.sum(pivots < 0))
        previous = schur
    return negatives


def inertia_below(pencil: Pencil, shift: float) -> int:
    """ Number of eigenvalues of the pencil below `shift`.
    A shift that hits a near-zero pivot is perturbed and reported.
    Raises:
        FactorizationError: if the pivots stay singular after repeated perturbation.
    """
    for attempt in range(MAX_RETRIES + 1):
        trial = _perturbed(shift, attempt) if attempt else shift
        try:
            return _negative_count(pencil, trial)
        except ZeroDivisionError as error:
            logger.warning(f'Inertia of {pencil.label} at shift {trial:.3e}: {error}, perturbing the shift')
    raise FactorizationError(f"Inertia of {pencil.label} near shift {shift:.3e} stays singular.")
