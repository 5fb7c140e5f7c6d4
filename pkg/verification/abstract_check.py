import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from common.lab_exceptions import ConfigError, PreconditionError
from profile_solver.derivatives import differentiate
from profile_solver.mesh import MeshSpec
from profile_solver.profile import Profile
from profile_solver.solver import solve_profile

logger = logging.getLogger(__name__)

MIN_RUNG_NODES = 256
LADDER_DIVISORS = (4, 2, 1)


@dataclass(frozen=True, slots=True)
class VerifyTolerances:
    min_order: float = 1.9
    max_rel_err: float = 1e-3
    exact_floor: float = 1e-11
    oracle_abs: float = 1e-8
    oracle_h2_factor: float = 10.0
    oracle_sets: int = 20
    oracle_n_max: int = 4
    oracle_m_max: int = 4
    n_phi: int = 64
    summand_floor: float = -1e-10
    nonnegativity_floor: float = -1e-8
    nonnegativity_sets: int = 100
    assembly_rel: float = 1e-12
    residual_floor_factor: float = 10.0

    @classmethod
    def from_config(cls, config: Dict[str, float]) -> 'VerifyTolerances':
        """ Tolerances with overrides from a config dictionary.
        Raises:
            ConfigError: on unknown keys.
        """
        known = {entry.name for entry in fields(cls)}
        unknown = set(config) - known
        if unknown:
            raise ConfigError(f"Unknown verification settings {sorted(unknown)}.\nCurrently available: {sorted(known)}")
        return replace(cls(), **config)


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    order_estimate: Optional[float]
    passed: bool


@dataclass(frozen=True)
class ProfileLadder:
    """ Profiles of one parameter set on nodes/4, nodes/2 and nodes intervals, coarsest first.
    The finest rung is the profile the ladder was built from.
    """
    rungs: Tuple[Profile, ...]

    @classmethod
    def build(cls, profile: Profile, solve: Callable[[Profile, MeshSpec], Profile] = None) -> 'ProfileLadder':
        solve = solve or (lambda base, mesh: differentiate(solve_profile(base.params, mesh)))
        finest = profile if profile.has_derivatives else differentiate(profile)
        mesh = profile.mesh
        rungs = []
        for divisor in LADDER_DIVISORS[:-1]:
            nodes = mesh.nodes // divisor
            if nodes >= MIN_RUNG_NODES and nodes not in (rung.mesh.nodes for rung in rungs):
                rungs.append(solve(profile, MeshSpec(mesh.r_max, nodes, mesh.grading,
                                                     mesh.ratio ** divisor)))
        rungs.append(finest)
        logger.info(f'Refinement ladder on {[rung.mesh.nodes for rung in rungs]} intervals')
        return cls(rungs=tuple(rungs))

    @property
    def finest(self) -> Profile:
        return self.rungs[-1]

    @property
    def spacings(self) -> List[float]:
        return [rung.geometry.h_max for rung in self.rungs]


def refinement_order(errors: Sequence[float], spacings: Sequence[float]) -> Optional[float]:
    """ Observed order from the last two rungs, None when fewer than two rungs or an error vanishes. """
    if len(errors) < 2 or errors[-1] <= 0.0 or errors[-2] <= 0.0:
        return None
    return math.log(errors[-2] / errors[-1]) / math.log(spacings[-2] / spacings[-1])


def comparison(name: str, lhs: float, rhs: float, passed: bool, order: Optional[float] = None) -> CheckResult:
    abs_err = abs(lhs - rhs)
    scale = abs(lhs) + abs(rhs)
    rel_err = abs_err / scale if scale > 0 else 0.0
    return CheckResult(name=name, lhs=float(lhs), rhs=float(rhs), abs_err=float(abs_err), rel_err=float(rel_err),
                       order_estimate=order, passed=bool(passed))


class AbstractCheck(ABC):

    conf_name = ''
    __implementations: Dict[str, type['AbstractCheck']] = {}

    @classmethod
    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if 'conf_name' in cls.__dict__:
            AbstractCheck.__implementations[cls.conf_name] = cls

    @classmethod
    def get_implementation(cls, config_str: str) -> type['AbstractCheck']:
        """ Get a registered check by its config string. """
        if config_str not in cls.__implementations:
            raise ValueError(f"No implementation registered for {config_str}.\nCurrently available: {list(cls.__implementations.keys())}")
        return cls.__implementations[config_str]

    @classmethod
    def available(cls) -> List[str]:
        return list(cls.__implementations.keys())

    def __init__(self, tolerances: VerifyTolerances = None, seed: int = 0):
        self.tolerances = tolerances or VerifyTolerances()
        self.seed = seed

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def refined(self, errors: Sequence[float], ladder: ProfileLadder, scale: float) -> Tuple[Optional[float], bool]:
        """ Order estimate and whether the errors shrink at the required order or already sit at roundoff. """
        order = refinement_order(errors, ladder.spacings)
        exact = errors[-1] <= self.tolerances.exact_floor * max(scale, 1.0)
        return order, exact or (order is not None and order >= self.tolerances.min_order)

    @abstractmethod
    def run(self, ladder: ProfileLadder) -> CheckResult:
        """ Run the check on a refinement ladder.
        Args:
            ladder: profiles of one parameter set, coarsest first.
        Returns:
            CheckResult; lhs and rhs are the compared quantities on the finest rung.
        Raises:
            PreconditionError: if the ladder cannot support the check.
        """
        ... # pragma: no cover


def run_checks(names: Sequence[str], ladder: ProfileLadder, tolerances: VerifyTolerances = None,
               seed: int = 0) -> List[CheckResult]:
    """ Run the named checks in order.
    Raises:
        PreconditionError: if the check list is empty.
        ValueError: if a name is not registered.
    """
    if not names:
        raise PreconditionError("No verification checks requested.")
    checks = [AbstractCheck.get_implementation(name)(tolerances, seed) for name in names]
    results = []
    for check in checks:
        result = check.run(ladder)
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, f'Check {result.name}: abs_err={result.abs_err:.3e}, rel_err={result.rel_err:.3e}, '
                          f'order={result.order_estimate}, passed={result.passed}')
        results.append(result)
    return results
