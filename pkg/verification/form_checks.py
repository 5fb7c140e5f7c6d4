import logging

import numpy as np

from spectral.blocks import block_coefficients, sweep_blocks
from spectral.pencil import assemble_block
from variation_forms.fields import gaussian_bump, random_mode_coefficients
from variation_forms.forms import evaluate_I_blocks, mode_norm2
from variation_forms.polar import evaluate_I_direct, required_angular_nodes, synthesize_field
from variation_forms.quadrature import block_quadratic
from verification.abstract_check import AbstractCheck, CheckResult, ProfileLadder, comparison

logger = logging.getLogger(__name__)


class BlockOracleCheck(AbstractCheck):
    """ Block decomposition against the direct tensor-field quadrature on random sparse coefficients. """
    conf_name = 'block_oracle'

    def run(self, ladder: ProfileLadder) -> CheckResult:
        profile, settings = ladder.finest, self.tolerances
        rng = self.rng()
        h = profile.geometry.h_max
        worst, worst_pair, passed = -1.0, (0.0, 0.0), True
        for _ in range(settings.oracle_sets):
            coeffs = random_mode_coefficients(profile, settings.oracle_n_max, settings.oracle_m_max, rng)
            n_phi = max(settings.n_phi, required_angular_nodes(coeffs.top_index(), coeffs.k))
            blocks = evaluate_I_blocks(profile, coeffs).value
            direct = evaluate_I_direct(profile, synthesize_field(profile, coeffs, n_phi)).value
            bound = max(settings.oracle_abs, settings.oracle_h2_factor * h * h * mode_norm2(profile, coeffs))
            gap = abs(blocks - direct) / bound
            passed = passed and gap <= 1.0
            if gap > worst:
                worst, worst_pair = gap, (blocks, direct)
        return comparison(self.conf_name, *worst_pair, passed)


class AssemblyOracleCheck(AbstractCheck):
    """ x^T A x of every assembled pencil against the block quadrature of the extracted fields. """
    conf_name = 'assembly_oracle'

    def run(self, ladder: ProfileLadder) -> CheckResult:
        profile, settings = ladder.finest, self.tolerances
        rng = self.rng()
        geometry, r_max = profile.geometry, profile.mesh.r_max
        worst, worst_pair, passed = -1.0, (0.0, 0.0), True
        for spec in sweep_blocks(profile.params.k, settings.oracle_n_max, settings.oracle_m_max):
            pencil = assemble_block(profile, spec)
            coefficients = block_coefficients(profile, spec)
            bumps = np.column_stack([rng.normal() * gaussian_bump(profile.r, rng.uniform(0.2, 0.6) * r_max,
                                                                  0.1 * r_max, 0.05 * r_max, 0.8 * r_max).values
                                     for _ in range(spec.field_count)])
            for vector in (pencil.embed(bumps), rng.standard_normal(pencil.dimension)):
                quadratic = float(vector @ (pencil.stiffness @ vector))
                direct = block_quadratic(geometry, coefficients.centrifugal, coefficients.potential,
                                         pencil.extract(vector))
                scale = float(np.abs(vector) @ (abs(pencil.stiffness) @ np.abs(vector)))
                gap = abs(quadratic - direct) / max(settings.assembly_rel * scale, 1e-300)
                passed = passed and gap <= 1.0
                if gap > worst:
                    worst, worst_pair = gap, (quadratic, direct)
        return comparison(self.conf_name, *worst_pair, passed)


class NonnegativityCheck(AbstractCheck):
    """ Second variation of random compactly supported perturbations stays above -floor * ||V||^2. """
    conf_name = 'nonnegativity'

    def run(self, ladder: ProfileLadder) -> CheckResult:
        profile, settings = ladder.finest, self.tolerances
        rng = self.rng()
        lowest = np.inf
        for _ in range(settings.nonnegativity_sets):
            coeffs = random_mode_coefficients(profile, settings.oracle_n_max, settings.oracle_m_max, rng)
            lowest = min(lowest, evaluate_I_blocks(profile, coeffs).value / mode_norm2(profile, coeffs))
        logger.debug(f'Lowest sampled Rayleigh quotient {lowest:.6e}')
        return comparison(self.conf_name, lowest, settings.nonnegativity_floor,
                          lowest >= settings.nonnegativity_floor)
