"""Helpers shared by the subcommands: exit codes, loading and error reporting."""

import enum
import logging
from contextlib import contextmanager
from typing import Optional, Tuple

import click

from app.core.exceptions import (
    DiagnosticError,
    EnumerationBoundError,
    ObDeclarationError,
    UnboundedUniverseError,
)
from app.models.formula import Formula
from app.models.theory import Theory
from app.services.parser_service import ParserService
from app.services.type_service import TypeService

logger = logging.getLogger(__name__)


class ExitCode(enum.IntEnum):
    SUCCESS = 0
    FAILURE = 1
    FLOUNDERING = 2
    BUDGET_EXHAUSTED = 3
    USAGE = 4
    ORACLE_DISAGREEMENT = 5
    INTERNAL = 70


def load_theory(
    path: str, query_text: Optional[str] = None
) -> Tuple[Theory, Optional[Formula]]:
    """Parse and type check a theory file and an optional query"""
    with open(path, encoding="utf-8") as handle:
        theory = ParserService.parse_theory(handle, path=path)
    query = None
    if query_text is not None:
        query = ParserService.parse_query(query_text)
    TypeService.check_and_infer(theory, query)
    for warning in theory.warnings:
        click.echo(str(warning), err=True)
    return theory, query


@contextmanager
def reported_errors():
    """Print pipeline errors as diagnostics and leave with the usage exit code"""
    try:
        yield
    except DiagnosticError as exc:
        for diagnostic in exc.diagnostics:
            click.echo(str(diagnostic), err=True)
        raise click.exceptions.Exit(ExitCode.USAGE)
    except (
        ObDeclarationError, EnumerationBoundError, UnboundedUniverseError, OSError
    ) as exc:
        logger.warning(f"Command rejected: error={exc}")
        click.echo(f"error: {exc}", err=True)
        raise click.exceptions.Exit(ExitCode.USAGE)
