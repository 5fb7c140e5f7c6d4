"""Discrete pencils (A, M) of the block forms.

Degrees of freedom are node-major. Node 0 carries the coordinates of the field vector in the origin basis of the
block, nodes 1..N-1 carry all fields, node N is pinned to zero. With f the nodal fields,
    x^T A x = block_quadratic(f)   and   x^T M x = sum_i w_i |f_i|^2
exactly, so the pencil is the block form restricted to the discrete space.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from common.lab_exceptions import NumericError, PreconditionError
from profile_solver.mesh import MeshGeometry
from profile_solver.profile import Profile
from spectral.blocks import BlockCoefficients, BlockSpec, block_coefficients
from variation_forms.quadrature import centrifugal_weights, gradient_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Pencil:
    """ Block-tridiagonal symmetric A and diagonal positive M.
    diagonal_blocks[i] is the node-i block of A, coupling_blocks[i] the block between node i and node i+1,
    mass holds the diagonal of M.
    """
    field_count: int
    origin_basis: np.ndarray
    diagonal_blocks: Tuple[np.ndarray, ...]
    coupling_blocks: Tuple[np.ndarray, ...]
    mass: np.ndarray
    spec: Optional[BlockSpec] = None
    stiffness: sparse.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'stiffness', self._assemble())

    @property
    def dimension(self) -> int:
        return len(self.mass)

    @property
    def label(self) -> str:
        return self.spec.label if self.spec else 'custom'

    @property
    def node_sizes(self) -> Tuple[int, ...]:
        return tuple(block.shape[0] for block in self.diagonal_blocks)

    def node_offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.node_sizes)))

    def mass_matrix(self) -> sparse.dia_matrix:
        return sparse.diags(self.mass)

    def mass_blocks(self) -> Tuple[np.ndarray, ...]:
        offsets = self.node_offsets()
        return tuple(self.mass[offsets[i]:offsets[i + 1]] for i in range(len(self.diagonal_blocks)))

    def _assemble(self) -> sparse.csr_matrix:
        offsets = self.node_offsets()
        rows, cols, values = [], [], []
        for i, block in enumerate(self.diagonal_blocks):
            local_rows, local_cols = np.nonzero(block)
            rows.append(offsets[i] + local_rows)
            cols.append(offsets[i] + local_cols)
            values.append(block[local_rows, local_cols])
        for i, block in enumerate(self.coupling_blocks):
            local_rows, local_cols = np.nonzero(block)
            entries = block[local_rows, local_cols]
            rows.extend((offsets[i] + local_rows, offsets[i + 1] + local_cols))
            cols.extend((offsets[i + 1] + local_cols, offsets[i] + local_rows))
            values.extend((entries, entries))
        size = self.dimension
        return sparse.coo_matrix((np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(size, size)).tocsr()

    def embed(self, fields: np.ndarray) -> np.ndarray:
        """ DOF vector of nodal fields (N+1, F); node 0 is projected on the origin basis, node N is dropped. """
        fields = np.asarray(fields, dtype=float)
        if fields.shape != (len(self.diagonal_blocks) + 1, self.field_count):
            raise PreconditionError(f"Fields of shape {fields.shape} do not fit a pencil with "
                                    f"{len(self.diagonal_blocks) + 1} nodes and {self.field_count} fields.")
        return np.concatenate((self.origin_basis.T @ fields[0], fields[1:-1].ravel()))

    def extract(self, vector: np.ndarray) -> np.ndarray:
        """ Nodal fields (N+1, F) of a DOF vector, zero at node N. """
        origin = self.origin_basis.shape[1]
        fields = np.zeros((len(self.diagonal_blocks) + 1, self.field_count))
        fields[0] = self.origin_basis @ vector[:origin]
        fields[1:-1] = np.reshape(vector[origin:], (-1, self.field_count))
        return fields

    def dense(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.stiffness.toarray(), np.diag(self.mass)


def assemble_pencil(geometry: MeshGeometry, coefficients: BlockCoefficients, spec: Optional[BlockSpec] = None
                    ) -> Pencil:
    """ Pencil of the radial form sum |f'|^2 + f^T C f / r^2 + f^T P f with the block quadrature.
    Raises:
        NumericError: if a coefficient is not finite.
    """
    if not (np.all(np.isfinite(coefficients.potential)) and np.all(np.isfinite(coefficients.centrifugal))):
        raise NumericError("Block coefficients must be finite.")
    count = coefficients.field_count
    basis = coefficients.origin_basis
    grad, cent, weights = gradient_weights(geometry), centrifugal_weights(geometry), geometry.weights
    identity = np.eye(count)
    nodes = len(geometry.r) - 1

    origin_block = basis.T @ (grad[0] * identity + weights[0] * coefficients.potential[0]) @ basis
    diagonal = [origin_block]
    for i in range(1, nodes):
        diagonal.append((grad[i - 1] + grad[i]) * identity + cent[i] * coefficients.centrifugal
                        + weights[i] * coefficients.potential[i])
    coupling = [-grad[0] * basis.T] + [-grad[i] * identity for i in range(1, nodes - 1)]
    mass = np.concatenate((np.full(basis.shape[1], weights[0]), np.repeat(weights[1:nodes], count)))
    return Pencil(field_count=count, origin_basis=basis, diagonal_blocks=tuple(diagonal),
                  coupling_blocks=tuple(coupling), mass=mass, spec=spec)


def assemble_block(profile: Profile, spec: BlockSpec) -> Pencil:
    """ Pencil of one Fourier block of the second variation along the profile. """
    pencil = assemble_pencil(profile.geometry, block_coefficients(profile, spec), spec)
    logger.debug(f'Assembled {spec.label}: dimension {pencil.dimension}, nnz {pencil.stiffness.nnz}')
    return pencil


def mass_only(pencil: Pencil) -> Pencil:
    """ Pencil with A = M. """
    return Pencil(field_count=pencil.field_count, origin_basis=pencil.origin_basis,
                  diagonal_blocks=tuple(np.diag(block) for block in pencil.mass_blocks()),
                  coupling_blocks=tuple(np.zeros_like(block) for block in pencil.coupling_blocks),
                  mass=pencil.mass, spec=pencil.spec)
