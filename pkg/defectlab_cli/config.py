import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from common.lab_exceptions import ConfigError
from profile_solver.mesh import Grading
from verification import DEFAULT_CHECKS

logger = logging.getLogger(__name__)

COMMANDS = ('solve', 'stability', 'verify', 'properties', 'energy', 'plotdata')
PROFILE_COMMANDS = ('stability', 'verify', 'properties', 'energy', 'plotdata')
DIRECTORY_COMMANDS = ('stability', 'plotdata')


@dataclass(frozen=True, slots=True)
class RunConfig:
    """ Parameters of one command; defaults are layered below DEFECTLAB_DEFAULTS and the command-line flags. """
    command: str = 'solve'
    t: Optional[float] = None
    k: Optional[int] = None
    r_max: float = 40.0
    nodes: int = 4096
    grading: str = 'uniform'
    ratio: float = 1.001
    out: Optional[str] = None
    profile: Optional[str] = None
    n_max: int = 8
    m_max: int = 8
    eigs: int = 4
    shift: float = -1e-6
    tol: float = 1e-8
    checks: Tuple[str, ...] = DEFAULT_CHECKS
    seed: int = 0
    n_phi: int = 64
    kernel_doubling: bool = False
    spectra: Optional[str] = None

    @classmethod
    def from_sources(cls, defaults: Mapping[str, Any], flags: Mapping[str, Any]) -> 'RunConfig':
        """ Built-in defaults, overridden by `defaults`, overridden by flags that were given (not None).
        Raises:
            ConfigError: on unknown keys or invalid values.
        """
        known = {entry.name for entry in fields(cls)}
        for source in (defaults, flags):
            unknown = set(source) - known
            if unknown:
                raise ConfigError(f"Unknown configuration keys {sorted(unknown)}.\nCurrently available: {sorted(known)}")
        merged: Dict[str, Any] = dict(defaults)
        merged.update({key: value for key, value in flags.items() if value is not None})
        if isinstance(merged.get('checks'), str):
            merged['checks'] = tuple(name.strip() for name in merged['checks'].split(',') if name.strip())
        elif 'checks' in merged:
            merged['checks'] = tuple(merged['checks'])
        config = replace(cls(), **merged)
        config.validate()
        return config

    def validate(self) -> None:
        """ Raises:
            ConfigError: if a value is out of range or a required input is missing.
        """
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command {self.command}, expected one of {list(COMMANDS)}.")
        if self.command == 'solve':
            if self.t is None or self.k is None:
                raise ConfigError("solve needs --t and --k.")
            if self.t <= 0:
                raise ConfigError(f"--t must be positive, got {self.t}.")
            if self.k == 0:
                raise ConfigError("--k must be a non-zero integer.")
            if not self.out:
                raise ConfigError("solve needs --out.")
        if self.command in PROFILE_COMMANDS:
            if not self.profile:
                raise ConfigError(f"{self.command} needs --profile.")
            if not os.path.isfile(self.profile):
                raise ConfigError(f"Profile document {self.profile} does not exist.")
        if self.command in DIRECTORY_COMMANDS and not self.out:
            raise ConfigError(f"{self.command} needs --out as an output directory.")
        if self.command == 'verify' and not self.checks:
            raise ConfigError("The check list is empty.")
        if self.spectra and not os.path.isfile(self.spectra):
            raise ConfigError(f"Spectra file {self.spectra} does not exist.")
        if self.grading not in [grading.value for grading in Grading]:
            raise ConfigError(f"Unknown grading {self.grading}.")
        if self.r_max <= 0 or self.nodes < 1:
            raise ConfigError(f"Invalid mesh r_max={self.r_max}, nodes={self.nodes}.")
        if self.shift >= 0:
            raise ConfigError(f"--shift must be negative, got {self.shift}.")
        if self.n_max < 4 or self.m_max < 4:
            raise ConfigError(f"--nmax and --mmax must be at least 4, got {self.n_max}, {self.m_max}.")
        if not 1 <= self.eigs <= 10:
            raise ConfigError(f"--eigs must lie in [1, 10], got {self.eigs}.")
        if self.n_phi < 8:
            raise ConfigError(f"--nphi must be at least 8, got {self.n_phi}.")
        logger.debug(f'Validated {self}')
