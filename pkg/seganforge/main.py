"""Command-line application entry point"""

from seganforge.cli.commands import CommandHandler
from seganforge.cli.parser import create_parser, error_line
from seganforge.config import settings
from seganforge.exceptions import SeganForgeError
from seganforge.utils.logging import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_DOMAIN = 2


def main(argv: list[str] | None = None) -> int:
    """
    Parse the command line, configure logging and run one subcommand.

    Args:
        argv: Arguments without the program name (defaults to ``sys.argv[1:]``)

    Returns:
        int: 0 on success, 2 for configuration/input/domain errors, 1 for unexpected failures
    """
    args = create_parser().parse_args(argv)
    setup_logging("DEBUG" if args.verbose else args.log_level or settings.LOG_LEVEL, settings.LOG_DIR)

    # Validate environment configuration before doing any work
    is_valid, error_msg = settings.validate()
    if not is_valid:
        logger.error(f"Startup failed | validation_error={error_msg}")
        error_line("config_invalid", f"Configuration error: {error_msg}")
        return EXIT_DOMAIN

    try:
        CommandHandler(args).handle()
    except SeganForgeError as exc:
        logger.error(
            f"Command failed | command={args.command} | code={exc.code} | error={exc.message}",
            exc_info=True,
        )
        error_line(exc.code, exc.message)
        return EXIT_DOMAIN
    except ValueError as exc:
        logger.error(f"Command failed | command={args.command} | error={exc}", exc_info=True)
        error_line("invalid_input", str(exc))
        return EXIT_DOMAIN
    except Exception as exc:
        logger.error(
            f"Unexpected error | command={args.command} | error_type={type(exc).__name__} | "
            f"error={exc}",
            exc_info=True,
        )
        error_line("internal_error", f"{type(exc).__name__}: {exc}")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
