import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from common.lab_exceptions import DomainError

logger = logging.getLogger(__name__)

MIN_NODES = 64
MAX_RATIO = 1.1


class Grading(Enum):
    UNIFORM = 'uniform'
    GEOMETRIC = 'geometric'


@dataclass(frozen=True, slots=True)
class MeshSpec:
    """ Truncated radial domain [0, r_max] split into `nodes` intervals. """
    r_max: float = 40.0
    nodes: int = 4096
    grading: Grading = Grading.UNIFORM
    ratio: float = 1.001

    def __post_init__(self):
        if isinstance(self.grading, str):
            try:
                object.__setattr__(self, 'grading', Grading(self.grading))
            except ValueError:
                raise DomainError(f"Unknown grading {self.grading}, expected one of {[g.value for g in Grading]}.")
        if not np.isfinite(self.r_max) or self.r_max <= 0:
            raise DomainError(f"r_max must be positive, got {self.r_max}.")
        if int(self.nodes) != self.nodes or self.nodes < MIN_NODES:
            raise DomainError(f"nodes must be an integer >= {MIN_NODES}, got {self.nodes}.")
        if self.grading is Grading.GEOMETRIC and not 1.0 < self.ratio <= MAX_RATIO:
            raise DomainError(f"Geometric ratio must lie in (1, {MAX_RATIO}], got {self.ratio}.")

    def doubled(self) -> 'MeshSpec':
        """ Same spacing on twice the radius. """
        return MeshSpec(2.0 * self.r_max, 2 * self.nodes, self.grading, self.ratio)

    def refined(self, factor: int = 2) -> 'MeshSpec':
        return MeshSpec(self.r_max, self.nodes * factor, self.grading, self.ratio ** (1.0 / factor))


@dataclass(frozen=True, slots=True)
class MeshGeometry:
    """ Spacings h_i, midpoints r_{i+1/2} and control-volume weights w_i of a radial grid.
    sum_i w_i f_i^2 approximates the integral of f^2 r dr.
    """
    r: np.ndarray
    h: np.ndarray
    r_half: np.ndarray
    weights: np.ndarray

    @property
    def h_min(self) -> float:
        return float(np.min(self.h))

    @property
    def h_max(self) -> float:
        return float(np.max(self.h))


def build_mesh(mesh: MeshSpec) -> np.ndarray:
    """ Node positions 0 = r_0 < r_1 < ... < r_N = r_max.
    Raises:
        DomainError: if the geometric grading collapses the first interval below 1e-8 r_max.
    """
    n = mesh.nodes
    if mesh.grading is Grading.UNIFORM:
        r = mesh.r_max * np.arange(n + 1) / n
    else:
        powers = mesh.ratio ** np.arange(n + 1)
        r = mesh.r_max * (powers - 1.0) / (powers[-1] - 1.0)
        if r[1] < 1e-8 * mesh.r_max:
            raise DomainError(f"Geometric ratio {mesh.ratio} with {n} intervals makes h_min={r[1]:.3e} too small.")
    r[0] = 0.0
    r[-1] = mesh.r_max
    r.flags.writeable = False
    return r


def mesh_geometry(r: np.ndarray) -> MeshGeometry:
    h = np.diff(r)
    r_half = 0.5 * (r[:-1] + r[1:])
    squares = np.concatenate(([0.0], r_half ** 2, [r[-1] ** 2]))
    weights = 0.5 * np.diff(squares)
    for array in (h, r_half, weights):
        array.flags.writeable = False
    return MeshGeometry(r=r, h=h, r_half=r_half, weights=weights)
