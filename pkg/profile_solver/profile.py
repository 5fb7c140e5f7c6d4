import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from common.lab_exceptions import NumericError, PreconditionError
from profile_solver.discretization import residual
from profile_solver.mesh import MeshGeometry, MeshSpec, build_mesh, mesh_geometry
from qtensor.core import BulkParams

logger = logging.getLogger(__name__)


def _frozen(values) -> Optional[np.ndarray]:
    if values is None:
        return None
    array = np.array(values, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, slots=True)
class SolverInfo:
    iterations: int = 0
    continuation_steps: int = 0
    converged: bool = True
    tolerance: float = 0.0
    stopped_at_t: Optional[float] = None


@dataclass(frozen=True, slots=True)
class Profile:
    """ Radial solution (u, v) on a truncated grid, with optional nodal derivatives.
    All arrays are read-only; derivative-bearing copies are made with `with_derivatives`.
    """
    params: BulkParams
    mesh: MeshSpec
    r: np.ndarray
    u: np.ndarray
    v: np.ndarray
    residual_norm: float
    du: Optional[np.ndarray] = None
    dv: Optional[np.ndarray] = None
    solver: SolverInfo = field(default_factory=SolverInfo)
    h1_satisfied: bool = True

    @classmethod
    def from_arrays(cls, params: BulkParams, mesh: MeshSpec, u, v, du=None, dv=None,
                    solver: SolverInfo = None) -> 'Profile':
        """ Wrap nodal values on the grid of `mesh`, recording the discrete residual of the pair.
        Raises:
            PreconditionError: if the array lengths do not match the grid.
            NumericError: if any value is not finite.
        """
        r = build_mesh(mesh)
        u, v = _frozen(u), _frozen(v)
        for name, values in (('u', u), ('v', v), ('du', du), ('dv', dv)):
            if values is not None and len(values) != len(r):
                raise PreconditionError(f"Array {name} has {len(values)} entries, the grid has {len(r)} nodes.")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise NumericError("Profile values must be finite.")
        norm = float(np.max(np.abs(residual(u, v, params.t, params.k, params.s_plus, mesh_geometry(r)))))
        return cls(params=params, mesh=mesh, r=r, u=u, v=v, residual_norm=norm, du=_frozen(du), dv=_frozen(dv),
                   solver=solver or SolverInfo())

    @property
    def s_plus(self) -> float:
        return self.params.s_plus

    @property
    def geometry(self) -> MeshGeometry:
        return mesh_geometry(self.r)

    @property
    def has_derivatives(self) -> bool:
        return self.du is not None and self.dv is not None

    def require_derivatives(self) -> None:
        if not self.has_derivatives:
            raise PreconditionError("Profile has no derivatives; run differentiate first.")

    def with_derivatives(self, du, dv) -> 'Profile':
        return replace(self, du=_frozen(du), dv=_frozen(dv))

    def interior(self) -> slice:
        return slice(1, len(self.r) - 1)
