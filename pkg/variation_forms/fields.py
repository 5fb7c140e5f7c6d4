import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import j0, jn_zeros

from common.lab_exceptions import NumericError, PreconditionError
from profile_solver.profile import Profile
from spectral.blocks import BlockSpec, Sector, sweep_blocks

logger = logging.getLogger(__name__)

J0_FIRST_ZERO = float(jn_zeros(0, 1)[0])


@dataclass(frozen=True, slots=True)
class FormValue:
    value: float
    quadrature: str
    grid_spacing: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise NumericError(f"Form value {self.value} is not finite.")


@dataclass(frozen=True, slots=True)
class TestFunction:
    """ Radial scalar on the profile grid, zero at r = 0 and at r_max and outside nodes support[0]..support[1]. """
    __test__ = False

    values: np.ndarray
    support: Tuple[int, int]

    @classmethod
    def from_values(cls, values) -> 'TestFunction':
        values = np.array(values, dtype=float)
        if values[0] != 0.0 or values[-1] != 0.0:
            raise PreconditionError("Test functions must vanish at r = 0 and at r_max.")
        nonzero = np.flatnonzero(values)
        support = (int(nonzero[0]), int(nonzero[-1])) if len(nonzero) else (0, 0)
        values.flags.writeable = False
        return cls(values=values, support=support)

    @classmethod
    def zeros(cls, size: int) -> 'TestFunction':
        return cls.from_values(np.zeros(size))

    def scaled(self, factor) -> np.ndarray:
        return self.values * factor


@dataclass(frozen=True)
class ModeCoefficients:
    """ Fourier coefficients of a perturbation.
    a_cos[n] holds (mu_n^(0), mu_n^(1), mu_n^(2)) and a_sin[n] holds (nu_n^(0), nu_n^(1), nu_n^(2)), each of shape
    (3, N+1), so that w_i = sum_n mu_n^(i) cos n phi + nu_n^(i) sin n phi for i = 0, 1, 2.
    b[m] is the complex radial coefficient z_m of z = w3 + i w4 = sum_m z_m exp(i m phi).
    """
    k: int
    size: int
    a_cos: Dict[int, np.ndarray] = field(default_factory=dict)
    a_sin: Dict[int, np.ndarray] = field(default_factory=dict)
    b: Dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for n, values in list(self.a_cos.items()) + list(self.a_sin.items()):
            if n < 0 or np.shape(values) != (3, self.size):
                raise PreconditionError(f"A coefficients of mode {n} have shape {np.shape(values)}, "
                                        f"expected (3, {self.size}).")
        if 0 in self.a_sin:
            raise PreconditionError("There is no sine coefficient for n = 0.")
        for m, values in self.b.items():
            if np.shape(values) != (self.size,):
                raise PreconditionError(f"B coefficient z_{m} has shape {np.shape(values)}, expected ({self.size},).")

    @classmethod
    def zeros(cls, k: int, size: int) -> 'ModeCoefficients':
        return cls(k=k, size=size)

    def top_index(self) -> int:
        """ Largest angular index present in any coordinate. """
        indices = list(self.a_cos) + list(self.a_sin) + [abs(m) for m in self.b]
        return max(indices, default=0)

    def b_block_index(self, m: int) -> int:
        sigma = 1 if self.k > 0 else -1
        return max(sigma * m, sigma * (self.k - m))

    def populated_blocks(self) -> List[BlockSpec]:
        blocks = []
        if 0 in self.a_cos:
            if np.any(self.a_cos[0][:2]):
                blocks.append(BlockSpec(Sector.A0_01, self.k))
            if np.any(self.a_cos[0][2]):
                blocks.append(BlockSpec(Sector.A0_2, self.k))
        for n in sorted((set(self.a_cos) | set(self.a_sin)) - {0}):
            blocks.append(BlockSpec(Sector.A_N, self.k, n))
        for index in sorted({self.b_block_index(m) for m in self.b}):
            blocks.append(BlockSpec(Sector.B_PAIR, self.k, index))
        return blocks

    def _a_pair(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        zeros = np.zeros((3, self.size))
        return self.a_cos.get(n, zeros), self.a_sin.get(n, zeros)

    def block_fields(self, spec: BlockSpec) -> List[np.ndarray]:
        """ Real field arrays of shape (N+1, F) of one block; a non-self B pair gives its real part and its
        imaginary part with the second field negated, both read with the real sub-block coefficients. """
        if spec.k != self.k:
            raise PreconditionError(f"Block winding {spec.k} does not match coefficient winding {self.k}.")
        if spec.sector is Sector.A0_01:
            return [self._a_pair(0)[0][:2].T.copy()]
        if spec.sector is Sector.A0_2:
            return [self._a_pair(0)[0][2:].T.copy()]
        if spec.sector is Sector.A_N:
            cos, sin = self._a_pair(spec.index)
            return [np.vstack((cos, sin)).T.copy()]
        first, second = spec.pair_indices
        zeros = np.zeros(self.size, dtype=complex)
        z_first, z_second = self.b.get(first, zeros), self.b.get(second, zeros)
        if spec.is_self_pair:
            return [np.column_stack((z_first.real, z_first.imag))]
        return [np.column_stack((z_first.real, z_second.real)), np.column_stack((z_first.imag, -z_second.imag))]

    def with_block(self, spec: BlockSpec, fields: np.ndarray, imaginary: Optional[np.ndarray] = None
                   ) -> 'ModeCoefficients':
        """ Copy with one block's fields replaced; inverse of block_fields. """
        a_cos, a_sin, b = dict(self.a_cos), dict(self.a_sin), dict(self.b)
        fields = np.asarray(fields, dtype=float)
        if spec.sector in (Sector.A0_01, Sector.A0_2):
            current = a_cos.get(0, np.zeros((3, self.size))).copy()
            rows = slice(0, 2) if spec.sector is Sector.A0_01 else slice(2, 3)
            current[rows] = fields.T
            a_cos[0] = current
        elif spec.sector is Sector.A_N:
            a_cos[spec.index], a_sin[spec.index] = fields[:, :3].T.copy(), fields[:, 3:].T.copy()
        elif spec.is_self_pair:
            b[spec.pair_indices[0]] = fields[:, 0] + 1j * fields[:, 1]
        else:
            imaginary = np.zeros_like(fields) if imaginary is None else np.asarray(imaginary, dtype=float)
            first, second = spec.pair_indices
            b[first] = fields[:, 0] + 1j * imaginary[:, 0]
            b[second] = fields[:, 1] - 1j * imaginary[:, 1]
        return replace(self, a_cos=a_cos, a_sin=a_sin, b=b)

    def scaled(self, taper: np.ndarray) -> 'ModeCoefficients':
        """ Every coefficient multiplied by the radial function `taper`. """
        return replace(self,
                       a_cos={n: values * taper for n, values in self.a_cos.items()},
                       a_sin={n: values * taper for n, values in self.a_sin.items()},
                       b={m: values * taper for m, values in self.b.items()})


def smooth_step(x: np.ndarray) -> np.ndarray:
    """ C-infinity step: 1 for x <= 0, 0 for x >= 1. """
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def bump(y):
        return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)

    rising, falling = bump(1.0 - x), bump(x)
    return rising / (rising + falling)


def gaussian_bump(r: np.ndarray, center: float, width: float, lo: float, hi: float) -> TestFunction:
    """ exp(-((r - center)/width)^2) times the smooth window exp(1 - 1/(1 - x^2)) that vanishes outside [lo, hi]. """
    x = (2.0 * r - lo - hi) / (hi - lo)
    inside = np.abs(x) < 1.0
    window = np.zeros_like(r)
    window[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return TestFunction.from_values(np.exp(-((r - center) / width) ** 2) * window)


def smooth_taper(r: np.ndarray, radius: float) -> np.ndarray:
    """ 1 on [0, radius/2], smooth decay to 0 at radius. """
    return smooth_step((r - 0.5 * radius) / (0.5 * radius))


def log_taper(r: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """ 1 below inner, 0 above outer, smooth in ln r between; its Dirichlet energy decays like 1/ln(outer/inner). """
    safe = np.where(r > 0, r, inner)
    return smooth_step(np.log(safe / inner) / math.log(outer / inner))


def bessel_taper(r: np.ndarray, r_max: float) -> np.ndarray:
    """ Massless index-0 radial profile J0(j01 r / r_max): 1 at the origin, 0 at r_max. """
    return j0(J0_FIRST_ZERO * r / r_max)


def random_mode_coefficients(profile: Profile, n_max: int, m_max: int, rng: np.random.Generator,
                             density: float = 0.5) -> ModeCoefficients:
    """ Sparse random coefficients built from Gaussian bumps supported in [0.05, 0.75] r_max.
    At least one block is always populated.
    """
    r = profile.r
    r_max = profile.mesh.r_max
    lo, hi = 0.05 * r_max, 0.75 * r_max

    def bump() -> np.ndarray:
        center = rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))
        width = rng.uniform(0.03, 0.1) * r_max
        return rng.normal() * gaussian_bump(r, center, width, lo, hi).values

    k = profile.params.k
    coefficients = ModeCoefficients.zeros(k, len(r))
    blocks = sweep_blocks(k, n_max, m_max)
    chosen = [spec for spec in blocks if rng.uniform() < density] or [blocks[int(rng.integers(len(blocks)))]]
    for spec in chosen:
        fields = np.column_stack([bump() for _ in range(spec.field_count)])
        imaginary = None
        if spec.sector is Sector.B_PAIR and not spec.is_self_pair:
            imaginary = np.column_stack([bump() for _ in range(spec.field_count)])
        coefficients = coefficients.with_block(spec, fields, imaginary)
    logger.debug(f'Random coefficients populate {[spec.label for spec in chosen]}')
    return coefficients
