"""Damped Newton solver for the radial defect profile, with continuation in t."""
import logging
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import solve_banded

from common.lab_exceptions import NumericError, SolverError
from profile_solver.discretization import BANDS, banded_jacobian, residual
from profile_solver.mesh import MeshGeometry, MeshSpec, build_mesh, mesh_geometry
from profile_solver.profile import Profile, SolverInfo
from qtensor.core import BulkParams, s_plus

logger = logging.getLogger(__name__)

ANCHOR_T = 1.0 / 3.0


@dataclass(frozen=True, slots=True)
class SolverOptions:
    tol_factor: float = 1e-10
    max_iterations: int = 50
    max_halvings: int = 30
    continuation_steps: int = 8
    use_continuation: bool = True


def initial_guess(params: BulkParams, mesh: MeshSpec) -> Profile:
    """ Smooth guess u = (s/2)(r / sqrt(r^2 + 2))^|k|, v = -(s/6) r^2 / (r^2 + 2) with the boundary values clamped. """
    r = build_mesh(mesh)
    s = params.s_plus
    u = 0.5 * s * (r / np.sqrt(r * r + 2.0)) ** abs(params.k)
    v = -s / 6.0 * r * r / (r * r + 2.0)
    u[0], v[0] = 0.0, 0.0
    u[-1], v[-1] = 0.5 * s, -s / 6.0
    return Profile.from_arrays(params, mesh, u, v, solver=SolverInfo(converged=False))


def ode_residual(profile: Profile) -> np.ndarray:
    """ Per-node 2-vector residuals of the discrete system at the profile's state.
    Raises:
        NumericError: if the state is not finite.
    """
    if not (np.all(np.isfinite(profile.u)) and np.all(np.isfinite(profile.v))):
        raise NumericError("Cannot evaluate the residual of a non-finite state.")
    params = profile.params
    return residual(profile.u, profile.v, params.t, params.k, params.s_plus, profile.geometry)


def roundoff_floor(geometry: MeshGeometry, state: np.ndarray) -> float:
    """ Level below which the residual of the 1/h^2-scaled rows is dominated by rounding. """
    return 4.0 * np.finfo(float).eps * 4.0 / geometry.h_min ** 2 * max(1.0, float(np.max(np.abs(state))))


def _interleave(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    x = np.empty(2 * len(u))
    x[0::2], x[1::2] = u, v
    return x


def _residual_vector(x: np.ndarray, params: BulkParams, geometry: MeshGeometry) -> np.ndarray:
    return residual(x[0::2], x[1::2], params.t, params.k, params.s_plus, geometry).ravel()


def _newton_step(x: np.ndarray, params: BulkParams, geometry: MeshGeometry, max_halvings: int
                 ) -> Tuple[np.ndarray, float, bool]:
    """ One damped Newton step. Returns the new iterate, its residual max-norm, and whether it decreased. """
    current = _residual_vector(x, params, geometry)
    norm = float(np.max(np.abs(current)))
    ab = banded_jacobian(x[0::2], x[1::2], params.t, params.k, geometry)
    delta = solve_banded(BANDS, ab, -current)
    if not np.all(np.isfinite(delta)):
        raise NumericError("Newton update is not finite.")
    damping = 1.0
    for halving in range(max_halvings + 1):
        trial = x + damping * delta
        trial_norm = float(np.max(np.abs(_residual_vector(trial, params, geometry))))
        if np.isfinite(trial_norm) and trial_norm < norm:
            logger.debug(f'Newton step accepted with damping {damping:.3e}, residual {norm:.3e} -> {trial_norm:.3e}')
            return trial, trial_norm, True
        damping *= 0.5
    return x, norm, False


def damped_newton_step(profile: Profile, options: SolverOptions = SolverOptions()) -> Profile:
    """ Apply one damped Newton step to a profile (the input is returned unchanged if no damping decreases the
    residual). """
    geometry = profile.geometry
    x, _, _ = _newton_step(_interleave(profile.u, profile.v), profile.params, geometry, options.max_halvings)
    return Profile.from_arrays(profile.params, profile.mesh, x[0::2], x[1::2],
                               solver=replace(profile.solver, iterations=profile.solver.iterations + 1))


def _newton(params: BulkParams, geometry: MeshGeometry, x: np.ndarray, options: SolverOptions
            ) -> Tuple[np.ndarray, int, float]:
    """ Iterate damped Newton steps to convergence.
    Returns:
        (iterate, iterations, tolerance actually met).
    Raises:
        SolverError: after max_iterations, or when the residual stagnates above the roundoff floor.
    """
    target = options.tol_factor * params.s_plus
    norm = float(np.max(np.abs(_residual_vector(x, params, geometry))))
    for iteration in range(1, options.max_iterations + 1):
        if norm <= target:
            return x, iteration - 1, target
        x, norm, decreased = _newton_step(x, params, geometry, options.max_halvings)
        logger.debug(f'Newton iteration {iteration}: residual {norm:.3e} (t={params.t}, k={params.k})')
        if norm <= target:
            return x, iteration, target
        if not decreased:
            floor = roundoff_floor(geometry, x)
            if norm <= floor:
                logger.info(f'Residual {norm:.3e} stagnates below the roundoff floor {floor:.3e}; accepting.')
                return x, iteration, floor
            raise SolverError(f'Newton stalled at residual {norm:.3e} for t={params.t}, k={params.k}.', norm, x,
                              params.t)
    raise SolverError(f'Newton did not converge in {options.max_iterations} iterations for t={params.t}, '
                      f'k={params.k}; residual {norm:.3e}.', norm, x, params.t)


def _continuation(params: BulkParams, mesh: MeshSpec, geometry: MeshGeometry, options: SolverOptions
                  ) -> Tuple[np.ndarray, int, float, int]:
    """ Solve at t = 1/3, where v = -1/6 is exact for the v-equation, and march to the target t. """
    anchor = BulkParams(ANCHOR_T, params.k)
    guess = initial_guess(anchor, mesh)
    v = np.full(len(guess.r), -1.0 / 6.0)
    x, iterations, tolerance = _newton(anchor, geometry, _interleave(guess.u, v), options)
    steps = max(1, options.continuation_steps)
    previous_t = ANCHOR_T
    for step in range(1, steps + 1):
        t = ANCHOR_T + (params.t - ANCHOR_T) * step / steps
        x = x * (s_plus(t) / s_plus(previous_t))
        x, step_iterations, tolerance = _newton(BulkParams(t, params.k), geometry, x, options)
        iterations += step_iterations
        logger.debug(f'Continuation step {step}/{steps}: t={t:.6g} converged in {step_iterations} iterations')
        previous_t = t
    return x, iterations, tolerance, steps


def solve_profile(params: BulkParams, mesh: MeshSpec = MeshSpec(), options: Optional[SolverOptions] = None
                  ) -> Profile:
    """ Solve the discrete boundary-value problem for (u, v).
    Args:
        params: reduced temperature and winding.
        mesh: truncated radial grid.
        options: Newton and continuation settings.
    Returns:
        Converged Profile without derivatives. A violated sign condition u > 0, v < 0, u + 3v < 0 is logged and
        flagged on the profile, not raised.
    Raises:
        SolverError: if neither the direct Newton run nor the continuation path converges.
    """
    options = options or SolverOptions()
    geometry = mesh_geometry(build_mesh(mesh))
    guess = initial_guess(params, mesh)
    continuation_steps = 0
    try:
        x, iterations, tolerance = _newton(params, geometry, _interleave(guess.u, guess.v), options)
    except (SolverError, NumericError) as e:
        if not options.use_continuation or abs(params.t - ANCHOR_T) == 0.0:
            raise
        logger.warning(f'Direct Newton run failed ({e}); continuing from t=1/3.')
        x, iterations, tolerance, continuation_steps = _continuation(params, mesh, geometry, options)

    u, v = x[0::2].copy(), x[1::2].copy()
    u[0] = 0.0
    u[-1], v[-1] = 0.5 * params.s_plus, -params.s_plus / 6.0
    info = SolverInfo(iterations=iterations, continuation_steps=continuation_steps, converged=True,
                      tolerance=tolerance)
    profile = Profile.from_arrays(params, mesh, u, v, solver=info)
    interior = profile.interior()
    h1 = bool(np.all(u[interior] > 0) and np.all(v[interior] < 0) and np.all(u[interior] + 3 * v[interior] < 0))
    if not h1:
        logger.warning(f'Converged profile for t={params.t}, k={params.k} violates u>0, v<0, u+3v<0; '
                       f'the solver may have found another critical point.')
    logger.info(f'Solved profile t={params.t}, k={params.k}, r_max={mesh.r_max}, N={mesh.nodes}: '
                f'{iterations} iterations, residual {profile.residual_norm:.3e}')
    return replace(profile, h1_satisfied=h1)
