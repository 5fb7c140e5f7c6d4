import numpy as np
import pytest

from common.lab_exceptions import PreconditionError
from spectral.blocks import BlockSpec, Sector, sweep_blocks
from variation_forms.fields import (
    ModeCoefficients, TestFunction, bessel_taper, gaussian_bump, log_taper, random_mode_coefficients, smooth_taper,
)
from variation_forms.forms import block_form, evaluate_I_blocks, mode_norm2
from variation_forms.identities import (
    IDENTITIES, identity_pair, plateau, reduced_second_variation_J, sos_forms, translation_plateau,
)
from variation_forms.kernel import KERNEL_NAMES, kernel_vectors, u_over_r
from variation_forms.polar import evaluate_I_direct, required_angular_nodes, synthesize_field


def _bumps(profile):
    r = profile.r
    return [gaussian_bump(r, 8.0, 2.5, 2.0, 30.0), gaussian_bump(r, 14.0, 3.0, 2.0, 30.0),
            gaussian_bump(r, 22.0, 4.0, 2.0, 30.0)]


def _relative(lhs, rhs):
    return abs(lhs.value - rhs.value) / (abs(lhs.value) + abs(rhs.value))


def test_test_function_must_vanish_at_both_ends():
    with pytest.raises(PreconditionError):
        TestFunction.from_values([1.0, 1.0, 0.0])
    with pytest.raises(PreconditionError):
        TestFunction.from_values([0.0, 1.0, 1.0])
    function = TestFunction.from_values([0.0, 0.0, 2.0, 1.0, 0.0])
    assert function.support == (2, 3)


def test_gaussian_bump_is_compactly_supported():
    r = np.linspace(0, 40, 401)
    bump = gaussian_bump(r, 10.0, 2.0, 5.0, 15.0)
    assert np.all(bump.values[r <= 5.0] == 0.0)
    assert np.all(bump.values[r >= 15.0] == 0.0)
    assert bump.values[100] == pytest.approx(1.0)


def test_tapers():
    r = np.linspace(0, 40, 801)
    smooth = smooth_taper(r, 40.0)
    assert np.all(smooth[r <= 20.0] == 1.0)
    assert smooth[-1] == 0.0
    assert np.all(np.diff(smooth) <= 0)
    logarithmic = log_taper(r, 1.0, 40.0)
    assert np.all(logarithmic[r <= 1.0] == 1.0) and logarithmic[-1] == 0.0
    bessel = bessel_taper(r, 40.0)
    assert bessel[0] == pytest.approx(1.0)
    assert bessel[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(bessel[:-1] > 0)


@pytest.mark.parametrize('which', IDENTITIES)
def test_identities_agree(profile_k1, which):
    for eta in _bumps(profile_k1):
        lhs, rhs = identity_pair(profile_k1, which, eta)
        assert _relative(lhs, rhs) < 1e-2


@pytest.mark.parametrize('which', ['B', 'D'])
def test_identity_mismatch_shrinks_under_refinement(solved, which):
    errors = []
    for nodes in (512, 1024):
        profile = solved(0.5, 1, 20.0, nodes)
        eta = gaussian_bump(profile.r, 8.0, 2.0, 2.0, 15.0)
        lhs, rhs = identity_pair(profile, which, eta)
        errors.append(abs(lhs.value - rhs.value))
    assert errors[1] < errors[0] / 2.5


def test_identities_hold_for_higher_winding(profile_k2):
    for which in ('D', 'E'):
        lhs, rhs = identity_pair(profile_k2, which, _bumps(profile_k2)[1])
        assert _relative(lhs, rhs) < 1e-2


def test_unknown_identity(profile_k1):
    with pytest.raises(PreconditionError):
        identity_pair(profile_k1, 'F', _bumps(profile_k1)[0])


def test_identity_rejects_foreign_grid(profile_k1):
    with pytest.raises(PreconditionError):
        identity_pair(profile_k1, 'A', TestFunction.zeros(11))


@pytest.mark.parametrize('variant, count', [('B', 2), ('A1', 3)])
def test_sum_of_squares_forms(profile_k1, variant, count):
    comparison = sos_forms(profile_k1, variant, *_bumps(profile_k1)[:count])
    assert _relative(comparison.direct, comparison.sos) < 1e-2
    s = profile_k1.s_plus
    assert min(comparison.summand_minima.values()) >= -1e-10 * s * s
    assert comparison.sos.value >= 0


def test_sum_of_squares_field_count(profile_k1):
    with pytest.raises(PreconditionError):
        sos_forms(profile_k1, 'B', *_bumps(profile_k1))
    with pytest.raises(PreconditionError):
        sos_forms(profile_k1, 'C', *_bumps(profile_k1))


def test_reduced_form_is_positive_on_bumps(profile_k1):
    eta, xi, _ = _bumps(profile_k1)
    assert reduced_second_variation_J(profile_k1, eta, xi).value > 0


def test_plateau_shape():
    r = np.linspace(0, 40, 801)
    values = plateau(r, 40.0)
    assert np.all(values[r <= 0.5] == 0.0)
    assert np.all(values[(r >= 1.0) & (r <= 20.0)] == 1.0)
    assert values[-1] == 0.0


def test_translation_plateau(profile_k1):
    values = translation_plateau(profile_k1, [10.0, 20.0, 40.0])
    assert list(values) == [10.0, 20.0, 40.0]
    assert min(values.values()) >= -1e-8
    with pytest.raises(PreconditionError):
        translation_plateau(profile_k1, [80.0])


def test_block_fields_round_trip(profile_k2):
    size = len(profile_k2.r)
    rng = np.random.default_rng(3)
    coefficients = ModeCoefficients.zeros(2, size)
    for spec in sweep_blocks(2, 2, 3):
        coefficients = coefficients.with_block(spec, rng.normal(size=(size, spec.field_count)),
                                               rng.normal(size=(size, spec.field_count)))
    for spec in sweep_blocks(2, 2, 3):
        fields = coefficients.block_fields(spec)
        rebuilt = ModeCoefficients.zeros(2, size).with_block(spec, fields[0], fields[1] if len(fields) > 1 else None)
        for original, copy in zip(fields, rebuilt.block_fields(spec)):
            np.testing.assert_allclose(copy, original)
    assert BlockSpec(Sector.B_PAIR, 2, 1).is_self_pair
    assert len(coefficients.block_fields(BlockSpec(Sector.B_PAIR, 2, 1))) == 1
    assert len(coefficients.block_fields(BlockSpec(Sector.B_PAIR, 2, 2))) == 2


def test_mode_coefficients_validation():
    with pytest.raises(PreconditionError):
        ModeCoefficients(1, 10, a_cos={1: np.zeros((3, 9))})
    with pytest.raises(PreconditionError):
        ModeCoefficients(1, 10, a_sin={0: np.zeros((3, 10))})
    with pytest.raises(PreconditionError):
        ModeCoefficients(1, 10, b={1: np.zeros(3, dtype=complex)})


def test_forms_reject_mismatched_coefficients(profile_k1):
    with pytest.raises(PreconditionError):
        evaluate_I_blocks(profile_k1, ModeCoefficients.zeros(2, len(profile_k1.r)))
    with pytest.raises(PreconditionError):
        mode_norm2(profile_k1, ModeCoefficients.zeros(1, 10))


@pytest.mark.parametrize('seed', range(3))
def test_blocks_match_direct_quadrature(profile_k1, seed):
    coefficients = random_mode_coefficients(profile_k1, 4, 4, np.random.default_rng(seed))
    n_phi = max(64, required_angular_nodes(coefficients.top_index(), coefficients.k))
    blocks = evaluate_I_blocks(profile_k1, coefficients).value
    direct = evaluate_I_direct(profile_k1, synthesize_field(profile_k1, coefficients, n_phi)).value
    h = profile_k1.geometry.h_max
    assert abs(blocks - direct) <= max(1e-8, 10 * h * h * mode_norm2(profile_k1, coefficients))


def test_blocks_match_direct_quadrature_higher_winding(profile_k2):
    coefficients = random_mode_coefficients(profile_k2, 4, 4, np.random.default_rng(11), density=1.0)
    n_phi = max(64, required_angular_nodes(coefficients.top_index(), 2))
    blocks = evaluate_I_blocks(profile_k2, coefficients).value
    direct = evaluate_I_direct(profile_k2, synthesize_field(profile_k2, coefficients, n_phi)).value
    h = profile_k2.geometry.h_max
    assert abs(blocks - direct) <= max(1e-8, 10 * h * h * mode_norm2(profile_k2, coefficients))


def test_direct_quadrature_needs_angular_resolution(profile_k1):
    coefficients = random_mode_coefficients(profile_k1, 4, 4, np.random.default_rng(0))
    with pytest.raises(PreconditionError):
        synthesize_field(profile_k1, coefficients, 4)


def test_second_variation_nonnegative_for_unit_winding(profile_k1):
    rng = np.random.default_rng(5)
    for _ in range(10):
        coefficients = random_mode_coefficients(profile_k1, 4, 4, rng)
        assert evaluate_I_blocks(profile_k1, coefficients).value >= -1e-8 * mode_norm2(profile_k1, coefficients)


def test_block_form_single_block(profile_k1):
    size = len(profile_k1.r)
    bump = _bumps(profile_k1)[0].values
    spec = BlockSpec(Sector.A0_2, 1)
    coefficients = ModeCoefficients.zeros(1, size).with_block(spec, bump[:, None])
    value = block_form(profile_k1, spec, coefficients).value
    assert evaluate_I_blocks(profile_k1, coefficients).value == pytest.approx(2 * np.pi * value)
    assert mode_norm2(profile_k1, coefficients) > 0


def test_u_over_r_origin_limit(profile_k1):
    values = u_over_r(profile_k1)
    assert values[0] == profile_k1.du[0]
    assert values[1] == pytest.approx(profile_k1.u[1] / profile_k1.r[1])


def test_kernel_vectors_populate_their_blocks(profile_k1):
    vectors = kernel_vectors(profile_k1)
    assert set(vectors.raw) == set(KERNEL_NAMES)
    assert [spec.label for spec in vectors.raw['V0'].populated_blocks()] == ['A0_2']
    assert [spec.label for spec in vectors.raw['V1'].populated_blocks()] == ['A_1']
    assert [spec.label for spec in vectors.raw['V3'].populated_blocks()] == ['B_1']
    assert vectors.taper_radius == profile_k1.mesh.r_max


@pytest.mark.parametrize('name', KERNEL_NAMES)
def test_cut_off_kernel_energy_decreases_with_radius(profile_k1, name):
    narrow = kernel_vectors(profile_k1, 10.0).tapered[name]
    wide = kernel_vectors(profile_k1, 40.0).tapered[name]
    assert abs(evaluate_I_blocks(profile_k1, wide).value) < abs(evaluate_I_blocks(profile_k1, narrow).value)
