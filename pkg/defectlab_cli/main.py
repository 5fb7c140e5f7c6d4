import logging
import sys
from typing import Optional, Sequence

from common.lab_exceptions import (
    ConfigError, DiagnosticError, DocumentError, DomainError, FactorizationError, PreconditionError, SolverError,
)
from defectlab_cli import DEFECTLAB_DEFAULTS, DEFECTLAB_LOG_LEVEL, DEFECTLAB_THREADS
from defectlab_cli.config import RunConfig
from defectlab_cli.dispatcher import HANDLERS, UsageError, build_parser, get_lab
from defectlab_cli.handlers import EXIT_CONTRACT, EXIT_IO, EXIT_SOLVER, EXIT_USAGE

logger = logging.getLogger(__name__)


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """ Parse, validate and run one command.
    Returns:
        Exit code: 0 ok, 1 usage, 2 solver failure, 3 contract failure, 4 IO.
    """
    try:
        namespace = build_parser().parse_args(argv)
        config = RunConfig.from_sources(DEFECTLAB_DEFAULTS, vars(namespace))
        lab = get_lab(DEFECTLAB_THREADS)
    except (UsageError, ConfigError, DomainError) as e:
        logger.error(f'Usage error: {e}')
        return EXIT_USAGE

    logger.info(f'Running {config.command}')
    try:
        return HANDLERS[config.command](config, lab)
    except (ConfigError, DomainError, PreconditionError, ValueError) as e:
        if isinstance(e, DocumentError):
            logger.error(f'Bad document: {e}')
            return EXIT_IO
        logger.error(f'Usage error: {e}')
        return EXIT_USAGE
    except SolverError as e:
        logger.error(f'Solver failure: {e}')
        return EXIT_SOLVER
    except (FactorizationError, DiagnosticError) as e:
        logger.error(f'Contract failure: {e}')
        return EXIT_CONTRACT
    except OSError as e:
        logger.error(f'IO failure: {e}')
        return EXIT_IO


def main() -> None:
    logging.basicConfig(
        level=getattr(logging, DEFECTLAB_LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(filename)s:%(lineno)d - %(levelname)s - %(message)s'
    )
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
