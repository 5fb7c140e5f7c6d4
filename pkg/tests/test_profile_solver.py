import numpy as np
import pytest

from common.lab_exceptions import DiagnosticError, DomainError, NumericError, PreconditionError, SolverError
from profile_solver import solver as solver_module
from profile_solver.derivatives import differentiate
from profile_solver.diagnostics import third_derivative_residual
from profile_solver.energy import asymptotic_fit, reduced_energy
from profile_solver.mesh import Grading, MeshSpec, build_mesh, mesh_geometry
from profile_solver.profile import Profile
from profile_solver.solver import (
    SolverOptions, damped_newton_step, initial_guess, ode_residual, solve_profile,
)
from qtensor.core import BulkParams, s_plus


def _constant_far_field(t: float, k: int, mesh: MeshSpec) -> Profile:
    s = s_plus(t)
    size = mesh.nodes + 1
    return Profile.from_arrays(BulkParams(t, k), mesh, np.full(size, s / 2), np.full(size, -s / 6),
                               du=np.zeros(size), dv=np.zeros(size))


def test_mesh_spec_validation():
    with pytest.raises(DomainError):
        MeshSpec(r_max=40, nodes=32)
    with pytest.raises(DomainError):
        MeshSpec(r_max=-1.0)
    with pytest.raises(DomainError):
        MeshSpec(grading='geometric', ratio=1.2)
    with pytest.raises(DomainError):
        MeshSpec(grading='spiral')
    assert MeshSpec(grading='geometric').grading is Grading.GEOMETRIC


@pytest.mark.parametrize('mesh', [MeshSpec(40, 256), MeshSpec(40, 256, 'geometric', 1.01)])
def test_mesh_geometry(mesh):
    r = build_mesh(mesh)
    assert r[0] == 0.0 and r[-1] == mesh.r_max
    assert np.all(np.diff(r) > 0)
    geometry = mesh_geometry(r)
    assert np.sum(geometry.weights) == pytest.approx(mesh.r_max ** 2 / 2, rel=1e-13)
    assert np.all(geometry.weights > 0)


def test_geometric_grading_refuses_collapsed_first_interval():
    with pytest.raises(DomainError):
        build_mesh(MeshSpec(40, 4096, 'geometric', 1.01))


def test_initial_guess_boundary_values():
    params = BulkParams(1.0 / 3.0, 1)
    guess = initial_guess(params, MeshSpec(40, 1024))
    assert guess.u[0] == 0.0 and guess.v[0] == 0.0
    assert guess.u[-1] == 0.5 and guess.v[-1] == pytest.approx(-1 / 6, abs=1e-15)
    assert np.isfinite(guess.residual_norm)


def test_first_damped_step_decreases_residual():
    guess = initial_guess(BulkParams(0.5, 1), MeshSpec(40, 1024))
    stepped = damped_newton_step(guess)
    assert stepped.residual_norm < guess.residual_norm
    assert stepped.solver.iterations == 1


def test_far_field_state_is_exact_for_v_line():
    profile = _constant_far_field(0.5, 1, MeshSpec(40, 1024))
    res = ode_residual(profile)
    far = (profile.r >= 10) & (profile.r < profile.mesh.r_max)
    assert np.max(np.abs(res[far, 1])) <= 1e-12


def test_zero_state_has_zero_interior_residual():
    mesh = MeshSpec(40, 256)
    profile = Profile.from_arrays(BulkParams(0.5, 1), mesh, np.zeros(257), np.zeros(257))
    res = ode_residual(profile)
    np.testing.assert_array_equal(res[1:-1], 0.0)
    assert res[0, 0] == 0.0 and res[0, 1] == 0.0


def test_non_finite_state_is_rejected():
    values = np.zeros(257)
    values[5] = np.nan
    with pytest.raises(NumericError):
        Profile.from_arrays(BulkParams(0.5, 1), MeshSpec(40, 256), values, np.zeros(257))
    with pytest.raises(PreconditionError):
        Profile.from_arrays(BulkParams(0.5, 1), MeshSpec(40, 256), np.zeros(10), np.zeros(10))


def test_anchor_temperature_gives_constant_v(solved):
    profile = solved(1.0 / 3.0, 1, 40.0, 4096)
    assert profile.s_plus == 1.0
    assert np.max(np.abs(profile.v + 1.0 / 6.0)) <= 1e-6
    assert profile.residual_norm <= max(1e-10, profile.solver.tolerance)


def test_boundary_rows_are_enforced(profile_k1):
    s = profile_k1.s_plus
    assert profile_k1.u[0] == 0.0
    assert abs(profile_k1.u[-1] - s / 2) <= 1e-12
    assert abs(profile_k1.v[-1] + s / 6) <= 1e-12
    assert profile_k1.residual_norm <= max(1e-10 * s, profile_k1.solver.tolerance)


def test_v_sits_above_far_field_below_anchor(solved):
    profile = solved(0.1, 1)
    interior = profile.interior()
    assert np.min(profile.v[interior] + profile.s_plus / 6) > 0


def test_v_sits_below_far_field_above_anchor(solved):
    profile = solved(1.0, 1)
    interior = profile.interior()
    assert np.max(profile.v[interior] + profile.s_plus / 6) < 0


@pytest.mark.parametrize('t', [0.05, 0.1, 1.0 / 3.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize('k', [1, -1])
def test_sign_conditions_hold(solved, t, k):
    profile = solved(t, k)
    interior = profile.interior()
    u, v, s = profile.u[interior], profile.v[interior], profile.s_plus
    assert profile.h1_satisfied
    assert np.all(u > 0) and np.all(v < 0) and np.all(u + 3 * v < 0)
    assert np.all(u * u + 3 * v * v < s * s / 3)


def test_winding_sign_symmetry(solved):
    plus, minus = solved(0.5, 1), solved(0.5, -1)
    np.testing.assert_allclose(plus.u, minus.u, atol=1e-10)
    np.testing.assert_allclose(plus.v, minus.v, atol=1e-10)


@pytest.mark.slow
def test_second_order_convergence(solved):
    coarse, middle, fine = (solved(0.5, 1, 40.0, n) for n in (2048, 4096, 8192))
    first = np.max(np.abs(coarse.u - middle.u[::2]))
    second = np.max(np.abs(middle.u - fine.u[::2]))
    assert 3.5 <= first / second <= 4.5


def test_solver_error_carries_last_iterate():
    options = SolverOptions(max_iterations=1, use_continuation=False)
    with pytest.raises(SolverError) as error:
        solve_profile(BulkParams(0.5, 1), MeshSpec(40, 512), options)
    assert error.value.residual_norm > 0
    assert len(error.value.last_iterate) == 2 * 513
    assert error.value.t == 0.5


def test_continuation_recovers_from_failed_direct_run(monkeypatch, solved):
    original = solver_module._newton
    calls = []

    def failing_first(params, geometry, x, options):
        calls.append(params.t)
        if len(calls) == 1:
            raise SolverError('forced', 1.0, x)
        return original(params, geometry, x, options)

    monkeypatch.setattr(solver_module, '_newton', failing_first)
    profile = solve_profile(BulkParams(0.5, 1), MeshSpec(40, 1024))
    assert profile.solver.continuation_steps == 8
    assert calls[1] == pytest.approx(1.0 / 3.0)
    np.testing.assert_allclose(profile.u, solved(0.5, 1).u, atol=1e-6)
    np.testing.assert_allclose(profile.v, solved(0.5, 1).v, atol=1e-6)


def test_differentiate_is_exact_for_quadratics():
    mesh = MeshSpec(10, 256)
    r = build_mesh(mesh)
    profile = differentiate(Profile.from_arrays(BulkParams(0.5, 2), mesh, r ** 2, r ** 2))
    assert np.max(np.abs(profile.du - 2 * r)) <= 1e-10
    assert np.max(np.abs(profile.dv - 2 * r)) <= 1e-10


def test_origin_slope_for_unit_winding():
    mesh = MeshSpec(10, 256)
    r = build_mesh(mesh)
    profile = differentiate(Profile.from_arrays(BulkParams(0.5, 1), mesh, 0.7 * r - 0.2 * r ** 3, np.zeros_like(r)))
    assert profile.du[0] == pytest.approx(0.7, abs=1e-10)
    assert profile.dv[0] == 0.0


def test_derivative_signs(profile_k1):
    interior = profile_k1.interior()
    assert np.all(profile_k1.du[interior] > 0)
    assert np.all(profile_k1.dv * (1 + 6 * profile_k1.v) <= 1e-12)


def test_energy_needs_derivatives():
    profile = initial_guess(BulkParams(0.5, 1), MeshSpec(40, 256))
    with pytest.raises(PreconditionError):
        reduced_energy(profile)


def test_far_field_state_energy():
    report = reduced_energy(_constant_far_field(0.5, 1, MeshSpec(40, 1024)))
    assert abs(report.breakdown['bulk_shifted']) <= 1e-10
    assert abs(report.min_shifted_density) <= 1e-12
    assert report.breakdown['radial_gradient'] == 0.0
    assert report.breakdown['angular'] > 0


def test_shifted_density_is_non_negative(profile_k1):
    assert reduced_energy(profile_k1).min_shifted_density >= -1e-10


def test_core_energy_is_stable_under_doubling(solved):
    near = reduced_energy(solved(0.5, 1, 40.0, 1024)).core_energy
    far = reduced_energy(solved(0.5, 1, 80.0, 2048)).core_energy
    assert abs(near - far) <= 0.01 * max(1.0, abs(near))


def test_solution_lowers_energy_from_guess(profile_k1):
    guess = differentiate(initial_guess(profile_k1.params, profile_k1.mesh))
    assert reduced_energy(profile_k1).shifted_energy < reduced_energy(guess).shifted_energy


@pytest.mark.parametrize('k, low, high', [(1, 0.98, 1.02), (2, 1.96, 2.04)])
def test_origin_exponent(solved, k, low, high):
    fit = asymptotic_fit(solved(0.5, k, 40.0, 4096))
    assert low <= fit.origin_exponent <= high
    assert fit.origin_coeff > 0


def test_tail_defects_shrink_with_domain(solved):
    near = asymptotic_fit(solved(0.5, 1, 40.0, 1024)).tail_defects
    far = asymptotic_fit(solved(0.5, 1, 80.0, 2048)).tail_defects
    assert abs(far[0]) < abs(near[0])
    assert abs(far[1]) < abs(near[1])


def test_asymptotic_fit_needs_positive_core():
    mesh = MeshSpec(40, 256)
    profile = Profile.from_arrays(BulkParams(0.5, 1), mesh, np.zeros(257), np.zeros(257))
    with pytest.raises(DiagnosticError):
        asymptotic_fit(profile)


def test_third_derivative_residual_shrinks(solved):
    coarse = third_derivative_residual(solved(0.5, 1, 20.0, 512))
    fine = third_derivative_residual(solved(0.5, 1, 20.0, 2048))
    assert fine['u'] < coarse['u']
    assert fine['v'] < coarse['v']
