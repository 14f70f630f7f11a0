import logging
from typing import Optional

import click

from app.commands.common import ExitCode, load_theory, reported_errors
from app.core.config import settings
from app.models.formula import Exists, Formula, format_atom, free_vars
from app.models.verification import term_order
from app.services.parser_service import ParserService
from app.services.verifier_service import VerifierService

logger = logging.getLogger(__name__)


@click.command()
@click.argument("theory_path", type=click.Path(dir_okay=False))
@click.argument("answer_path", type=click.Path(dir_okay=False), required=False)
@click.option("--query", "query_text", default=None,
              help="Query the answer must satisfy; free variables read existentially.")
@click.option("--enumerate", "enumerate_", is_flag=True,
              help="Print every abducible set whose model satisfies the theory.")
@click.option("--bound", type=int, default=settings.ENUMERATION_BOUND, show_default=True,
              help="Largest candidate space --enumerate will search.")
@click.pass_context
def verify(ctx: click.Context, theory_path, answer_path, query_text, enumerate_, bound):
    """Check an answer file against a theory, or enumerate all models."""
    if (answer_path is None) == (not enumerate_):
        raise click.UsageError("give either an ANSWER_PATH or --enumerate", ctx=ctx)
    with reported_errors():
        theory, query = load_theory(theory_path, query_text)
        query = _closed(query)
        if enumerate_:
            code = _enumerate(theory, query, bound)
        else:
            with open(answer_path, encoding="utf-8") as handle:
                delta = ParserService.parse_facts(handle, path=answer_path)
            result = VerifierService.check_answer(theory, query, delta)
            if result.passed:
                click.echo("pass")
                code = ExitCode.SUCCESS
            else:
                click.echo(f"fail: {result.counterexample}")
                code = ExitCode.FAILURE
    ctx.exit(int(code))


def _closed(query: Optional[Formula]) -> Optional[Formula]:
    if query is None:
        return None
    variables = sorted(free_vars(query), key=lambda v: v.id)
    return Exists(tuple(variables), query) if variables else query


def _enumerate(theory, query, bound: int) -> ExitCode:
    count = 0
    for model in VerifierService.enumerate_models(theory, query, bound):
        count += 1
        click.echo(f"% model {count}")
        for atom in sorted(model, key=_atom_order):
            click.echo(f"{format_atom(atom)}.")
    click.echo(f"% models={count}")
    return ExitCode.SUCCESS if count else ExitCode.FAILURE


def _atom_order(atom):
    return atom.pred, [term_order(t) for t in atom.args]
