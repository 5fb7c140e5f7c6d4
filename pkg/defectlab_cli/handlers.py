import logging
import os
import shutil
from dataclasses import asdict, replace

import numpy as np

from app_service.defect_lab import DefectLab, StabilityOutcome
from common.lab_exceptions import SolverError
from defectlab_cli.config import RunConfig
from defectlab_cli.documents import (
    SPECTRA_COLUMNS, dumps_canonical, load_document, profile_document, profile_from_document, property_document,
    write_csv, write_json,
)
from profile_solver.derivatives import differentiate
from profile_solver.mesh import MeshSpec
from profile_solver.profile import Profile, SolverInfo
from property_checker.checker import check_properties, margin_profiles
from qtensor.core import BulkParams

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_CONTRACT = 3
EXIT_IO = 4


def _emit(config: RunConfig, document) -> None:
    if config.out:
        write_json(config.out, document)
    else:
        print(dumps_canonical(document), end='')


def _load_profile(config: RunConfig) -> Profile:
    profile = profile_from_document(load_document(config.profile))
    return profile if profile.has_derivatives else differentiate(profile)


def solve_command(config: RunConfig, lab: DefectLab) -> int:
    """ Solves the profile and writes its document. A failed solve writes the last iterate marked unconverged,
    with the temperature it stopped at and no property report. """
    params = BulkParams(config.t, config.k)
    mesh = MeshSpec(config.r_max, config.nodes, config.grading, config.ratio)
    try:
        profile = lab.solve(params, mesh)
    except SolverError as e:
        logger.error(f'Solver failed: {e}')
        if e.last_iterate is None:
            return EXIT_SOLVER
        x = np.asarray(e.last_iterate)
        info = SolverInfo(converged=False, tolerance=lab.solver_options.tol_factor * params.s_plus,
                          stopped_at_t=e.t)
        iterate = differentiate(Profile.from_arrays(params, mesh, x[0::2], x[1::2], solver=info))
        write_json(config.out, profile_document(iterate))
        logger.warning(f'Unconverged iterate (stopped at t={e.t}) written to {config.out}')
        return EXIT_SOLVER
    write_json(config.out, profile_document(profile, check_properties(profile)))
    logger.info(f'Profile document written to {config.out}')
    return EXIT_OK


def _spectra_rows(outcome: StabilityOutcome):
    for entry in outcome.report.blocks:
        for rank, (value, residual) in enumerate(zip(entry.eigenvalues, entry.residuals)):
            yield (entry.label, entry.spec.sector.value, entry.spec.index, rank, float(value), float(residual),
                   entry.inertia)


def stability_summary(outcome: StabilityOutcome) -> dict:
    report, kernel = outcome.report, outcome.kernel
    return {
        'params': {'t': report.t, 'k': report.k, 'r_max': report.r_max, 'nodes': report.nodes},
        'n_max': report.n_max,
        'm_max': report.m_max,
        'shift': report.shift,
        'tol': report.tol,
        'verdict': outcome.verdict.value,
        'residuals_within_tolerance': report.residuals_within_tolerance,
        'monotone_in_n': report.monotone_in_n,
        'monotone_in_m': report.monotone_in_m,
        'blocks': {entry.label: {'lambda_min': entry.lambda_min, 'inertia_below_shift': entry.inertia,
                                 'max_residual': float(np.max(entry.residuals)), 'method': entry.method,
                                 'multiplicity': entry.spec.multiplicity}
                   for entry in report.blocks},
        'kernel': {'near_zero_threshold': report.near_zero_threshold,
                   'similarities': kernel.similarities,
                   'near_zero_eigenvalues': kernel.near_zero_eigenvalues,
                   'total_near_zero': kernel.total_near_zero,
                   'expected_counts': kernel.expected_counts,
                   'dimension_matches': kernel.dimension_matches,
                   'placement_matches': kernel.placement_matches},
        'truncation_decay': outcome.decay,
    }


def stability_command(config: RunConfig, lab: DefectLab) -> int:
    profile = _load_profile(config)
    outcome = lab.stability(profile, config.n_max, config.m_max, config.shift, config.eigs, config.tol,
                            config.seed, config.kernel_doubling)
    os.makedirs(config.out, exist_ok=True)
    rows = write_csv(os.path.join(config.out, 'spectra.csv'), SPECTRA_COLUMNS, _spectra_rows(outcome))
    write_json(os.path.join(config.out, 'stability.json'), stability_summary(outcome))
    logger.info(f'{rows} spectra rows and the summary written to {config.out}')
    if not outcome.report.residuals_within_tolerance:
        logger.error('At least one block misses its eigen-residual contract.')
        return EXIT_CONTRACT
    if abs(outcome.report.k) == 1 and not outcome.kernel.contract_holds:
        logger.error(f'Near-zero census {outcome.kernel.near_zero_counts} differs from the unit-winding kernel '
                     f'{outcome.kernel.expected_counts}.')
        return EXIT_CONTRACT
    return EXIT_OK


def verify_command(config: RunConfig, lab: DefectLab) -> int:
    profile = _load_profile(config)
    lab.tolerances = replace(lab.tolerances, n_phi=config.n_phi)
    results = lab.verify(profile, config.checks, config.seed)
    passed = all(result.passed for result in results)
    _emit(config, {
        'params': {'t': profile.params.t, 'k': profile.params.k, 'r_max': profile.mesh.r_max,
                   'nodes': profile.mesh.nodes},
        'passed': passed,
        'checks': [{**asdict(result), 'pass': result.passed} for result in results],
    })
    if not passed:
        logger.error(f'Failed checks: {[result.name for result in results if not result.passed]}')
        return EXIT_CONTRACT
    return EXIT_OK


def properties_command(config: RunConfig, lab: DefectLab) -> int:
    report, flags = lab.properties(_load_profile(config))
    _emit(config, {'property_report': property_document(report), 'monotonicity': asdict(flags)})
    return EXIT_OK


def energy_command(config: RunConfig, lab: DefectLab) -> int:
    energy, fit = lab.energy(_load_profile(config))
    _emit(config, {'energy': asdict(energy), 'asymptotics': asdict(fit)})
    return EXIT_OK


def plotdata_command(config: RunConfig, lab: DefectLab) -> int:
    """ profile.csv and margins.csv for plotting, plus a copy of an existing spectra table. """
    profile = _load_profile(config)
    os.makedirs(config.out, exist_ok=True)
    columns = [profile.r, profile.u, profile.v, profile.du, profile.dv]
    write_csv(os.path.join(config.out, 'profile.csv'), ('r', 'u', 'v', 'du', 'dv'),
              zip(*[[float(x) for x in column] for column in columns]))
    margins = margin_profiles(profile)
    write_csv(os.path.join(config.out, 'margins.csv'), list(margins),
              zip(*[[float(x) for x in column] for column in margins.values()]))
    target = os.path.join(config.out, 'spectra.csv')
    if config.spectra and not (os.path.exists(target) and os.path.samefile(config.spectra, target)):
        shutil.copyfile(config.spectra, target)
    logger.info(f'Plot data written to {config.out}')
    return EXIT_OK
