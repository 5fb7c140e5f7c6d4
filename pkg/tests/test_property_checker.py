import numpy as np
import pytest

from common.lab_exceptions import PreconditionError
from profile_solver.mesh import MeshSpec
from profile_solver.profile import Profile
from property_checker.checker import (
    MarginStatus, Regime, check_properties, margin_profiles, regime_of, strict_monotonicity,
)
from qtensor.core import BulkParams


def _synthetic(u, v, du, dv, t=0.5, k=1) -> Profile:
    return Profile.from_arrays(BulkParams(t, k), MeshSpec(40, 256), u, v, du=du, dv=dv)


def test_regime_classification():
    assert regime_of(1.0 / 3.0) is Regime.ANCHOR
    assert regime_of(0.1) is Regime.BELOW
    assert regime_of(1.0) is Regime.ABOVE


def test_missing_derivatives_is_a_precondition_error():
    profile = Profile.from_arrays(BulkParams(0.5, 1), MeshSpec(40, 256), np.zeros(257), np.zeros(257))
    with pytest.raises(PreconditionError):
        check_properties(profile)


def test_isotropic_profile_sits_on_the_boundary():
    zeros = np.zeros(257)
    report = check_properties(_synthetic(zeros, zeros, zeros, zeros))
    for name in ('H1_u_positive', 'H1_v_negative', 'H1_u_plus_3v_negative'):
        entry = report[name]
        assert not entry.satisfied
        assert entry.margin == 0.0
        assert entry.status is MarginStatus.BOUNDARY
    assert not report.all_satisfied


def test_anchor_profile_satisfies_h4(solved):
    report = check_properties(solved(1.0 / 3.0, 1))
    assert report.regime is Regime.ANCHOR
    entry = report['H4_v_anchored']
    assert entry.satisfied and entry.margin >= 0


def test_p_is_non_negative(profile_k1):
    entry = check_properties(profile_k1)['H5_p']
    assert entry.margin >= -1e-9
    assert entry.satisfied


@pytest.mark.parametrize('t', [0.05, 0.1, 1.0 / 3.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize('k', [1, -1])
def test_converged_profiles_satisfy_all_sign_conditions(solved, t, k):
    profile = solved(t, k)
    report = check_properties(profile)
    s = profile.s_plus
    for name in ('H1_u_positive', 'H1_v_negative', 'H1_u_plus_3v_negative', 'H1_norm_bound'):
        assert report[name].margin > 0
    if report.regime is Regime.BELOW:
        assert report['H2_v_above'].margin > 0
    elif report.regime is Regime.ABOVE:
        assert report['H3_v_below'].margin > 0
    assert report['H5_p'].margin >= -1e-9 * s * s
    assert report['H5_q'].margin >= -1e-9 * s


def test_margins_are_reproducible(profile_k1):
    first, second = check_properties(profile_k1), check_properties(profile_k1)
    assert [m.margin for m in first.margins] == [m.margin for m in second.margins]
    assert [m.location for m in first.margins] == [m.location for m in second.margins]


def test_margin_columns(profile_k1):
    columns = margin_profiles(profile_k1)
    assert list(columns) == ['r', 'u', 'minus_v', 'minus_u_plus_3v', 'norm_gap', 'v_gap', 'p', 'q']
    np.testing.assert_array_equal(columns['p'], profile_k1.u * profile_k1.du)
    np.testing.assert_array_equal(columns['q'], -profile_k1.dv * (1 + 6 * profile_k1.v))


def test_anchor_profile_has_constant_v(solved):
    flags = strict_monotonicity(solved(1.0 / 3.0, 1))
    assert flags.v_direction == 'constant'
    assert flags.u_strictly_increasing


@pytest.mark.parametrize('t', [0.1, 1.0])
def test_v_direction_is_recorded(solved, t):
    flags = strict_monotonicity(solved(t, 1))
    assert flags.u_strictly_increasing
    assert flags.v_strictly_monotone
    assert flags.v_direction == flags.expected_v_direction


def test_non_monotone_input_is_flagged():
    r = np.linspace(0, 40, 257)
    u = np.sin(r)
    profile = _synthetic(u, -0.1 * np.ones(257) + 0.01 * np.cos(r), np.cos(r), -0.01 * np.sin(r))
    flags = strict_monotonicity(profile)
    assert not flags.u_strictly_increasing
    assert flags.v_direction == 'non-monotone'
    assert not flags.v_strictly_monotone
