import logging
from dataclasses import replace
from typing import Callable, List, Sequence, Tuple

from profile_solver.profile import Profile
from variation_forms.fields import FormValue, TestFunction, gaussian_bump
from variation_forms.identities import identity_pair, sos_forms
from verification.abstract_check import AbstractCheck, CheckResult, ProfileLadder

logger = logging.getLogger(__name__)

SUPPORT = (2.0, 30.0)
BUMP_SHAPES = ((0.2, 0.07), (0.45, 0.1), (0.7, 0.14))


def bump_functions(profile: Profile) -> List[TestFunction]:
    """ Three Gaussian bumps supported in [2, 30], shrunk to [2, 0.75 r_max] on smaller domains. """
    lo, hi = SUPPORT[0], min(SUPPORT[1], 0.75 * profile.mesh.r_max)
    return [gaussian_bump(profile.r, lo + center * (hi - lo), width * (hi - lo), lo, hi)
            for center, width in BUMP_SHAPES]


def _pairs_result(check: AbstractCheck, name: str, ladder: ProfileLadder,
                  pairs_of: Callable[[Profile], List[Tuple[FormValue, FormValue]]]) -> CheckResult:
    per_rung = [pairs_of(rung) for rung in ladder.rungs]
    errors = [max(abs(lhs.value - rhs.value) for lhs, rhs in pairs) for pairs in per_rung]
    finest = per_rung[-1]
    scale = max(abs(lhs.value) + abs(rhs.value) for lhs, rhs in finest)
    order, refined = check.refined(errors, ladder, scale)
    rel_err = max(abs(lhs.value - rhs.value) / max(abs(lhs.value) + abs(rhs.value), 1e-300) for lhs, rhs in finest)
    return CheckResult(name=name, lhs=sum(lhs.value for lhs, _ in finest), rhs=sum(rhs.value for _, rhs in finest),
                       abs_err=errors[-1], rel_err=rel_err, order_estimate=order,
                       passed=refined and rel_err <= check.tolerances.max_rel_err)


class _IdentityCheck(AbstractCheck):
    which = ''

    def run(self, ladder: ProfileLadder) -> CheckResult:
        def pairs_of(profile: Profile):
            return [identity_pair(profile, self.which, eta) for eta in bump_functions(profile)]

        return _pairs_result(self, self.conf_name, ladder, pairs_of)


class IdentityA(_IdentityCheck):
    conf_name = 'identity_A'
    which = 'A'


class IdentityB(_IdentityCheck):
    conf_name = 'identity_B'
    which = 'B'


class IdentityC(_IdentityCheck):
    conf_name = 'identity_C'
    which = 'C'


class IdentityD(_IdentityCheck):
    conf_name = 'identity_D'
    which = 'D'


class IdentityE(_IdentityCheck):
    conf_name = 'identity_E'
    which = 'E'


class _SumOfSquaresCheck(AbstractCheck):
    variant = ''

    def fields(self, profile: Profile) -> Sequence[TestFunction]:
        bumps = bump_functions(profile)
        return bumps[:2] if self.variant == 'B' else bumps

    def run(self, ladder: ProfileLadder) -> CheckResult:
        minima = []

        def pairs_of(profile: Profile):
            forms = sos_forms(profile, self.variant, *self.fields(profile))
            minima.append(min(forms.summand_minima.values()))
            return [(forms.direct, forms.sos)]

        result = _pairs_result(self, self.conf_name, ladder, pairs_of)
        s = ladder.finest.s_plus
        signs_hold = minima[-1] >= self.tolerances.summand_floor * s * s
        if not signs_hold:
            logger.warning(f'{self.conf_name}: a sum-of-squares summand reaches {minima[-1]:.3e}')
        return replace(result, passed=result.passed and signs_hold)


class SumOfSquaresB(_SumOfSquaresCheck):
    conf_name = 'sos_B'
    variant = 'B'


class SumOfSquaresA1(_SumOfSquaresCheck):
    conf_name = 'sos_A1'
    variant = 'A1'
