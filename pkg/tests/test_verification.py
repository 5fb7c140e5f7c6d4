import pytest

from common.lab_exceptions import ConfigError, PreconditionError
from verification import DEFAULT_CHECKS
from verification.abstract_check import (
    AbstractCheck, CheckResult, ProfileLadder, VerifyTolerances, comparison, refinement_order, run_checks,
)
from verification.identity_checks import bump_functions


@pytest.fixture(scope='module')
def ladder(solved):
    def solve(base, mesh):
        return solved(base.params.t, base.params.k, mesh.r_max, mesh.nodes)

    return ProfileLadder.build(solved(0.5, 1, 20.0, 1024), solve)


def test_every_default_check_is_registered():
    assert set(DEFAULT_CHECKS) <= set(AbstractCheck.available())
    with pytest.raises(ValueError, match='Currently available'):
        AbstractCheck.get_implementation('no_such_check')


def test_tolerances_from_config():
    tolerances = VerifyTolerances.from_config({'min_order': 1.5, 'oracle_sets': 3})
    assert tolerances.min_order == 1.5 and tolerances.oracle_sets == 3
    assert tolerances.max_rel_err == VerifyTolerances().max_rel_err
    with pytest.raises(ConfigError):
        VerifyTolerances.from_config({'min_ordr': 1.5})


def test_refinement_order():
    assert refinement_order([4e-4, 1e-4], [0.2, 0.1]) == pytest.approx(2.0)
    assert refinement_order([1e-4], [0.1]) is None
    assert refinement_order([1e-4, 0.0], [0.2, 0.1]) is None


def test_comparison_result():
    result = comparison('x', 1.0, 3.0, True, 2.0)
    assert result == CheckResult('x', 1.0, 3.0, 2.0, 0.5, 2.0, True)
    assert comparison('zero', 0.0, 0.0, True).rel_err == 0.0


def test_ladder_is_coarsest_first(ladder):
    assert [rung.mesh.nodes for rung in ladder.rungs] == [256, 512, 1024]
    assert ladder.spacings == sorted(ladder.spacings, reverse=True)


def test_ladder_skips_rungs_below_minimum(solved):
    ladder = ProfileLadder.build(solved(0.5, 1, 20.0, 512))
    assert [rung.mesh.nodes for rung in ladder.rungs] == [256, 512]


def test_bump_functions_fit_small_domains(ladder):
    bumps = bump_functions(ladder.finest)
    radii = ladder.finest.r
    assert len(bumps) == 3
    for bump in bumps:
        assert radii[bump.support[0]] > 2.0
        assert radii[bump.support[1]] < 15.0


def test_empty_check_list(ladder):
    with pytest.raises(PreconditionError):
        run_checks([], ladder)


@pytest.mark.parametrize('name', DEFAULT_CHECKS)
def test_default_check_passes(ladder, name):
    result, = run_checks([name], ladder)
    assert result.name == name
    assert result.passed, result
