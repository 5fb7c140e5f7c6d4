import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from common.lab_exceptions import PreconditionError
from profile_solver.derivatives import differentiate
from profile_solver.energy import AsymptoticFit, EnergyReport, asymptotic_fit, reduced_energy
from profile_solver.mesh import MeshSpec
from profile_solver.profile import Profile
from profile_solver.solver import SolverOptions, solve_profile
from property_checker.checker import MonotonicityFlags, PropertyReport, check_properties, strict_monotonicity
from qtensor.core import BulkParams
from spectral.sweep import (
    KernelMatch, SpectralReport, Verdict, kernel_match, stability_sweep, stability_verdict, truncation_decay,
)
from verification import DEFAULT_CHECKS
from verification.abstract_check import CheckResult, ProfileLadder, VerifyTolerances, run_checks

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StabilityOutcome:
    report: SpectralReport
    verdict: Verdict
    kernel: KernelMatch
    decay: Optional[Dict[str, List[float]]] = None


class DefectLab:
    """ Runs the lab pipelines on shared settings.
    Args:
        threads: parallel blocks in the stability sweep.
        tolerances: verification tolerances.
        solver_options: Newton and continuation settings.
    """

    def __init__(self, threads: int = 1, tolerances: VerifyTolerances = None, solver_options: SolverOptions = None):
        self.threads = max(1, threads)
        self.tolerances = tolerances or VerifyTolerances()
        self.solver_options = solver_options or SolverOptions()

    def solve(self, params: BulkParams, mesh: MeshSpec) -> Profile:
        """ Solves the radial profile and attaches its derivatives.
        Raises:
            SolverError: if Newton and continuation both fail.
        """
        return differentiate(solve_profile(params, mesh, self.solver_options))

    def properties(self, profile: Profile) -> Tuple[PropertyReport, MonotonicityFlags]:
        return check_properties(profile), strict_monotonicity(profile)

    def energy(self, profile: Profile) -> Tuple[EnergyReport, AsymptoticFit]:
        """ Truncated, shifted and core energies with the origin and far-field fit.
        Raises:
            DiagnosticError: if the origin fit window has too few positive nodes.
        """
        return reduced_energy(profile), asymptotic_fit(profile)

    def stability(self, profile: Profile, n_max: int = 8, m_max: int = 8, shift: float = -1e-6, count: int = 4,
                  tol: float = 1e-8, seed: int = 0, kernel_doubling: bool = False) -> StabilityOutcome:
        """ Block sweep, verdict and kernel census of a profile.
        Args:
            profile: solved profile with derivatives.
            n_max: largest A-sector index.
            m_max: largest B pair index.
            shift: relative shift; inertia is certified below shift * s+^2.
            count: eigenpairs per block.
            tol: residual contract.
            seed: eigensolver start-block seed.
            kernel_doubling: also re-solve on [0, 2 r_max] with the same spacing and record the decay of the
                near-zero eigenvalues.
        Returns:
            StabilityOutcome.
        Raises:
            PreconditionError: if the shift is not negative or a truncation is below 4.
            FactorizationError: if a shifted pencil stays singular.
        """
        if shift >= 0:
            raise PreconditionError(f"The relative shift must be negative, got {shift}.")
        report = stability_sweep(profile, n_max, m_max, -shift, count, tol, seed, self.threads)
        verdict = stability_verdict(report)
        kernel = kernel_match(profile, report)
        logger.info(f'Verdict {verdict.value} for t={profile.params.t}, k={profile.params.k}; '
                    f'{kernel.total_near_zero} near-zero modes')
        decay = None
        if kernel_doubling:
            wide = self.solve(profile.params, profile.mesh.doubled())
            doubled = stability_sweep(wide, n_max, m_max, -shift, count, tol, seed, self.threads)
            decay = truncation_decay(report, doubled)
            logger.info(f'Near-zero decay under r_max doubling: {decay}')
        return StabilityOutcome(report=report, verdict=verdict, kernel=kernel, decay=decay)

    def verify(self, profile: Profile, checks: Sequence[str] = DEFAULT_CHECKS, seed: int = 0) -> List[CheckResult]:
        """ Runs the named checks on the refinement ladder ending at `profile`.
        Raises:
            PreconditionError: if the check list is empty.
            ValueError: if a check name is not registered.
        """
        if not checks:
            raise PreconditionError("No verification checks requested.")
        ladder = ProfileLadder.build(profile, lambda base, mesh: self.solve(base.params, mesh))
        return run_checks(checks, ladder, self.tolerances, seed)
