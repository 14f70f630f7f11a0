import logging
import sys
from typing import List, Optional

import click

from app.commands import check, solve, transform, verify
from app.commands.common import ExitCode
from app.core.config import settings

logger = logging.getLogger(__name__)

__version__ = "0.1.0"

_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )


class IdlGroup(click.Group):
    """Maps usage errors and unhandled exceptions onto the documented exit codes"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = int(ExitCode.USAGE)
            raise
        except (click.exceptions.Exit, click.ClickException, click.Abort):
            raise
        except Exception:
            logger.exception(
                "unhandled_exception", extra={"command": ctx.invoked_subcommand}
            )
            click.echo("error: internal error, see the log for details", err=True)
            raise click.exceptions.Exit(int(ExitCode.INTERNAL))


@click.group(cls=IdlGroup)
@click.option(
    "--log-level",
    type=click.Choice(_LOG_LEVELS, case_sensitive=False),
    default=settings.LOG_LEVEL,
    show_default=True,
)
@click.version_option(__version__, prog_name=settings.PROJECT_NAME)
def cli(log_level: str):
    """Abductive model generation for ID-logic theories."""
    _configure_logging(log_level)


cli.add_command(solve.solve)
cli.add_command(check.check)
cli.add_command(transform.transform)
cli.add_command(verify.verify)


def _run(command: click.Command, argv: Optional[List[str]], prog_name: str) -> int:
    try:
        result = command.main(args=argv, prog_name=prog_name, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return int(ExitCode.USAGE)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return int(ExitCode.FAILURE)
    except Exception:
        logger.exception("unhandled_exception", extra={"command": prog_name})
        return int(ExitCode.INTERNAL)
    return result if isinstance(result, int) else int(ExitCode.SUCCESS)


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of `idl`; returns the process exit code"""
    return _run(cli, argv, "idl")


def verify_main(argv: Optional[List[str]] = None) -> int:
    """Entry point of `idl-verify THEORY ANSWER`"""
    _configure_logging(settings.LOG_LEVEL)
    return _run(verify.verify, argv, "idl-verify")


def run() -> None:
    sys.exit(main())


def run_verify() -> None:
    sys.exit(verify_main())


if __name__ == "__main__":
    run()
