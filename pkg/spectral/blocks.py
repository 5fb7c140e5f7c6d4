"""Fourier blocks of the second variation.

Every block is a radial form  sum_f |f'|^2 + f^T C f / r^2 + f^T P(r) f  with weight r dr, where C is a constant
centrifugal matrix and P the nodal potential matrix. The whole second variation is the sum of the blocks times their
angular weights (2 pi for n = 0 and for B pairs, pi for n >= 1) and multiplicities.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from common.lab_exceptions import PreconditionError
from profile_solver.profile import Profile
from variation_forms.potentials import potentials

logger = logging.getLogger(__name__)


class Sector(Enum):
    A0_01 = 'A0_01'
    A0_2 = 'A0_2'
    A_N = 'A_n'
    B_PAIR = 'B_m'


FIELD_COUNTS = {Sector.A0_01: 2, Sector.A0_2: 1, Sector.A_N: 6, Sector.B_PAIR: 2}
ORIGIN_NULL_TOLERANCE = 1e-12
ANGULAR_WEIGHTS = {Sector.A0_01: 2 * math.pi, Sector.A0_2: 2 * math.pi, Sector.A_N: math.pi,
                   Sector.B_PAIR: 2 * math.pi}


@dataclass(frozen=True, slots=True)
class BlockSpec:
    """ One Fourier block.
    A_n carries (mu0, mu1, mu2, nu0, nu1, nu2) of angular index n >= 1. B_m carries the pair of z = w3 + i w4
    modes (sigma m, k - sigma m), sigma = sign k, 2m >= |k|; a non-self pair is stored as its real sub-block
    (Re z_a, Re z_b), a self pair (m = k/2) as (Re z, Im z).
    """
    sector: Sector
    k: int
    index: int = 0

    def __post_init__(self):
        if isinstance(self.sector, str):
            object.__setattr__(self, 'sector', Sector(self.sector))
        if self.k == 0:
            raise PreconditionError("Blocks need a non-zero winding.")
        if self.sector in (Sector.A0_01, Sector.A0_2) and self.index != 0:
            raise PreconditionError(f"{self.sector.value} has no angular index, got {self.index}.")
        if self.sector is Sector.A_N and self.index < 1:
            raise PreconditionError(f"A_n needs n >= 1, got {self.index}.")
        if self.sector is Sector.B_PAIR and (self.index < 1 or 2 * self.index < abs(self.k)):
            raise PreconditionError(f"B_m needs m >= 1 and 2m >= |k|, got m={self.index}, k={self.k}.")

    @classmethod
    def from_label(cls, label: str, k: int) -> 'BlockSpec':
        if label in ('A0_01', 'A0_2'):
            return cls(Sector(label), k)
        prefix, _, index = label.partition('_')
        if prefix == 'A' and index.isdigit():
            return cls(Sector.A_N, k, int(index))
        if prefix == 'B' and index.isdigit():
            return cls(Sector.B_PAIR, k, int(index))
        raise PreconditionError(f"Unknown block label {label}.")

    @property
    def label(self) -> str:
        if self.sector in (Sector.A0_01, Sector.A0_2):
            return self.sector.value
        return f"{'A' if self.sector is Sector.A_N else 'B'}_{self.index}"

    @property
    def field_count(self) -> int:
        return FIELD_COUNTS[self.sector]

    @property
    def angular_weight(self) -> float:
        return ANGULAR_WEIGHTS[self.sector]

    @property
    def pair_indices(self) -> Tuple[int, int]:
        sigma = 1 if self.k > 0 else -1
        return sigma * self.index, self.k - sigma * self.index

    @property
    def is_self_pair(self) -> bool:
        return self.sector is Sector.B_PAIR and self.pair_indices[0] == self.pair_indices[1]

    @property
    def multiplicity(self) -> int:
        return 2 if self.sector is Sector.B_PAIR and not self.is_self_pair else 1


@dataclass(frozen=True, slots=True)
class BlockCoefficients:
    centrifugal: np.ndarray
    potential: np.ndarray
    origin_basis: np.ndarray

    @property
    def field_count(self) -> int:
        return self.centrifugal.shape[0]


def sweep_blocks(k: int, n_max: int, m_max: int) -> List[BlockSpec]:
    """ A0_01, A0_2, A_1..A_{n_max} and B_m for m <= m_max, in report order. """
    first_pair = max(1, (abs(k) + 1) // 2)
    return ([BlockSpec(Sector.A0_01, k), BlockSpec(Sector.A0_2, k)]
            + [BlockSpec(Sector.A_N, k, n) for n in range(1, n_max + 1)]
            + [BlockSpec(Sector.B_PAIR, k, m) for m in range(first_pair, m_max + 1)])


def block_coefficients(profile: Profile, spec: BlockSpec) -> BlockCoefficients:
    """ Centrifugal matrix, nodal potential matrices and origin boundary policy of a block.
    At r = 0 the field vector is confined to the null space of the centrifugal matrix (zero effective angular
    index); every other direction is pinned.
    """
    if spec.k != profile.params.k:
        raise PreconditionError(f"Block winding {spec.k} does not match profile winding {profile.params.k}.")
    k = spec.k
    pot = potentials(profile)
    size = len(profile.r)
    count = spec.field_count
    centrifugal = np.zeros((count, count))
    potential = np.zeros((size, count, count))

    if spec.sector is Sector.A0_01:
        centrifugal[1, 1] = k * k
        potential[:, 0, 0], potential[:, 1, 1] = pot.w0, pot.w1
        potential[:, 0, 1] = potential[:, 1, 0] = pot.cross
    elif spec.sector is Sector.A0_2:
        centrifugal[0, 0] = k * k
        potential[:, 0, 0] = pot.w2
    elif spec.sector is Sector.A_N:
        n = spec.index
        centrifugal[:, :] = np.diag([n * n, n * n + k * k, n * n + k * k] * 2)
        centrifugal[1, 5] = centrifugal[5, 1] = 2 * k * n
        centrifugal[2, 4] = centrifugal[4, 2] = -2 * k * n
        for offset in (0, 3):
            potential[:, offset, offset] = pot.w0
            potential[:, offset + 1, offset + 1] = pot.w1
            potential[:, offset + 2, offset + 2] = pot.w2
            potential[:, offset, offset + 1] = potential[:, offset + 1, offset] = pot.cross
    else:
        a, b = spec.pair_indices
        centrifugal[0, 0], centrifugal[1, 1] = a * a, b * b
        u = np.asarray(profile.u)
        if spec.is_self_pair:
            potential[:, 0, 0] = pot.b - u
            potential[:, 1, 1] = pot.b + u
        else:
            potential[:, 0, 0] = potential[:, 1, 1] = pot.b
            potential[:, 0, 1] = potential[:, 1, 0] = -u
    return BlockCoefficients(centrifugal=centrifugal, potential=potential, origin_basis=origin_basis(centrifugal))


def origin_basis(centrifugal: np.ndarray) -> np.ndarray:
    """ Orthonormal basis (columns) of the null space of the centrifugal matrix. """
    values, vectors = np.linalg.eigh(centrifugal)
    basis = vectors[:, np.abs(values) <= ORIGIN_NULL_TOLERANCE * max(1.0, float(np.max(np.abs(values))))]
    # Largest entry of each column positive
    for column in range(basis.shape[1]):
        pivot = int(np.argmax(np.abs(basis[:, column])))
        if basis[pivot, column] < 0:
            basis[:, column] = -basis[:, column]
    return basis
