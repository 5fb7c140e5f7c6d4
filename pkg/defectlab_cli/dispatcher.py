import argparse
from typing import Callable, Dict

from app_service.defect_lab import DefectLab
from defectlab_cli.config import RunConfig
from defectlab_cli.handlers import (
    energy_command, plotdata_command, properties_command, solve_command, stability_command, verify_command,
)
from verification import DEFECTLAB_VERIFY_CONFIG
from verification.abstract_check import VerifyTolerances

Handler = Callable[[RunConfig, DefectLab], int]

HANDLERS: Dict[str, Handler] = {
    'solve': solve_command,
    'stability': stability_command,
    'verify': verify_command,
    'properties': properties_command,
    'energy': energy_command,
    'plotdata': plotdata_command,
}

HELP = {
    'solve': 'solve the radial profile and write its document',
    'stability': 'block eigenvalues, certified inertia and kernel census',
    'verify': 'identity, oracle and kernel checks on a refinement ladder',
    'properties': 'sign and monotonicity conditions of a profile',
    'energy': 'reduced energies and asymptotic fit',
    'plotdata': 'CSV columns for plotting',
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError(message)


def _add_flags(parser: argparse.ArgumentParser) -> None:
    """ Every flag defaults to None so that DEFECTLAB_DEFAULTS and the RunConfig defaults show through. """
    parser.add_argument('--t', type=float)
    parser.add_argument('--k', type=int)
    parser.add_argument('--rmax', dest='r_max', type=float)
    parser.add_argument('--nodes', type=int)
    parser.add_argument('--grading', choices=['uniform', 'geometric'])
    parser.add_argument('--ratio', type=float)
    parser.add_argument('--out')
    parser.add_argument('--profile')
    parser.add_argument('--nmax', dest='n_max', type=int)
    parser.add_argument('--mmax', dest='m_max', type=int)
    parser.add_argument('--eigs', type=int)
    parser.add_argument('--shift', type=float)
    parser.add_argument('--tol', type=float)
    parser.add_argument('--checks')
    parser.add_argument('--seed', type=int)
    parser.add_argument('--nphi', dest='n_phi', type=int)
    parser.add_argument('--kernel-doubling', dest='kernel_doubling', action='store_true', default=None)
    parser.add_argument('--spectra')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='defectlab', description='Radial nematic point-defect laboratory.')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)
    for name in HANDLERS:
        _add_flags(commands.add_parser(name, help=HELP[name]))
    return parser


def get_lab(threads: int) -> DefectLab:
    """ Service instance with the verification tolerances of DEFECTLAB_VERIFY_CONFIG.
    Raises:
        ConfigError: if DEFECTLAB_VERIFY_CONFIG carries unknown keys.
    """
    return DefectLab(threads=threads, tolerances=VerifyTolerances.from_config(DEFECTLAB_VERIFY_CONFIG))
