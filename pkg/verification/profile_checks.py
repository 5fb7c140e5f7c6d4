import logging

from profile_solver.diagnostics import third_derivative_residual
from variation_forms.identities import translation_plateau
from verification.abstract_check import AbstractCheck, CheckResult, ProfileLadder, comparison

logger = logging.getLogger(__name__)

PLATEAU_FRACTIONS = (0.25, 0.5, 0.75, 1.0)
PLATEAU_SLACK = 1e-8


class ThirdDerivativeCheck(AbstractCheck):
    """ Residual of the differentiated system shrinks from the coarsest to the finest rung. """
    conf_name = 'ode_third_derivative'

    def run(self, ladder: ProfileLadder) -> CheckResult:
        errors = [max(third_derivative_residual(rung).values()) for rung in ladder.rungs]
        order, _ = self.refined(errors, ladder, ladder.finest.s_plus)
        return comparison(self.conf_name, errors[-1], errors[0], len(errors) > 1 and errors[-1] < errors[0], order)


class TranslationPlateauCheck(AbstractCheck):
    """ J(v' chi_R, u' chi_R) is non-negative and settles as the plateau radius R grows. """
    conf_name = 'translation_plateau'

    def run(self, ladder: ProfileLadder) -> CheckResult:
        profile = ladder.finest
        s = profile.s_plus
        radii = [fraction * profile.mesh.r_max for fraction in PLATEAU_FRACTIONS]
        values = list(translation_plateau(profile, radii).values())
        steps = [abs(b - a) for a, b in zip(values, values[1:])]
        nonnegative = min(values) >= -PLATEAU_SLACK * s * s
        settling = all(later <= earlier + PLATEAU_SLACK * s * s for earlier, later in zip(steps, steps[1:]))
        if not settling:
            logger.warning(f'Translation plateau increments do not shrink: {steps}')
        return comparison(self.conf_name, values[-1], values[-2], nonnegative and settling)
