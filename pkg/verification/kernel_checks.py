import logging

from profile_solver.profile import Profile
from variation_forms.fields import smooth_taper
from variation_forms.forms import evaluate_I_blocks
from variation_forms.kernel import KERNEL_NAMES, kernel_vectors
from variation_forms.polar import linearized_residual, synthesize_field
from verification.abstract_check import AbstractCheck, CheckResult, ProfileLadder, comparison

logger = logging.getLogger(__name__)

RESIDUAL_N_PHI = 16
FORM_RADIUS_DIVISOR = 4.0


def kernel_residual(profile: Profile, name: str) -> float:
    """ Max-norm of L applied to a kernel vector cut off smoothly at r_max, over [1, r_max/2]. """
    vector = kernel_vectors(profile).raw[name].scaled(smooth_taper(profile.r, profile.mesh.r_max))
    return linearized_residual(profile, synthesize_field(profile, vector, RESIDUAL_N_PHI)).max_norm


class RotationResidualCheck(AbstractCheck):
    """ L(V0) is the u-equation residual of the profile, so it sits at the solver's residual floor. """
    conf_name = 'linearized_V0'

    def run(self, ladder: ProfileLadder) -> CheckResult:
        profile = ladder.finest
        value = kernel_residual(profile, 'V0')
        floor = self.tolerances.residual_floor_factor * profile.residual_norm + 1e-10 * profile.s_plus
        return comparison(self.conf_name, value, floor, value <= floor)


class TranslationResidualCheck(AbstractCheck):
    """ L(V1) vanishes at second order under refinement. """
    conf_name = 'linearized_V1'

    def run(self, ladder: ProfileLadder) -> CheckResult:
        errors = [kernel_residual(rung, 'V1') for rung in ladder.rungs]
        order, refined = self.refined(errors, ladder, ladder.finest.s_plus)
        return comparison(self.conf_name, errors[-1], 0.0, refined, order)


class KernelFormCheck(AbstractCheck):
    """ I of every cut-off kernel vector decreases when the cutoff radius grows from r_max/4 to r_max. """
    conf_name = 'kernel_forms'

    def run(self, ladder: ProfileLadder) -> CheckResult:
        profile = ladder.finest
        radius = profile.mesh.r_max
        wide = kernel_vectors(profile, radius).tapered
        narrow = kernel_vectors(profile, radius / FORM_RADIUS_DIVISOR).tapered
        passed, total_wide, total_narrow = True, 0.0, 0.0
        for name in KERNEL_NAMES:
            at_wide = abs(evaluate_I_blocks(profile, wide[name]).value)
            at_narrow = abs(evaluate_I_blocks(profile, narrow[name]).value)
            logger.debug(f'{name}: |I| = {at_narrow:.6e} at R/{FORM_RADIUS_DIVISOR:g}, {at_wide:.6e} at R')
            passed = passed and at_wide < at_narrow
            total_wide += at_wide
            total_narrow += at_narrow
        return comparison(self.conf_name, total_wide, total_narrow, passed)
