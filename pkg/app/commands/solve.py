import logging
from typing import Optional

import click
from prometheus_client import REGISTRY, write_to_textfile
from pydantic import ValidationError

from app.commands.common import ExitCode, load_theory, reported_errors
from app.core.config import settings
from app.core.exceptions import UnboundedUniverseError
from app.models.derivation import Answer, OutcomeKind
from app.models.formula import Formula, format_atom, format_formula
from app.models.theory import Theory
from app.models.verification import term_order
from app.schemas.answer import AnswerRead, SolveReport
from app.schemas.run_config import OutputFormat, RunConfig
from app.services.constraint_service import ConstraintService
from app.services.derivation_service import DerivationService
from app.services.transform_service import TransformService
from app.services.verifier_service import VerifierService

logger = logging.getLogger(__name__)

_EXIT_CODES = {
    OutcomeKind.FAILURE: ExitCode.FAILURE,
    OutcomeKind.FLOUNDERING: ExitCode.FLOUNDERING,
    OutcomeKind.BUDGET_EXHAUSTED: ExitCode.BUDGET_EXHAUSTED,
}


@click.command()
@click.argument("theory_path", type=click.Path(dir_okay=False))
@click.option("--query", "query_text", default="true", show_default=True,
              help="Query whose free variables are the answer variables.")
@click.option("--max-solutions", type=int, default=settings.MAX_SOLUTIONS,
              show_default=True)
@click.option("--step-budget", type=int, default=settings.STEP_BUDGET, show_default=True)
@click.option("--trace", is_flag=True, help="Print every rule application to stderr.")
@click.option("--dump-transformed", is_flag=True,
              help="Print the completed and denial-normalised theory to stderr.")
@click.option("--reuse/--no-reuse", default=True, show_default=True,
              help="Try unifying new abducible atoms with atoms already in delta.")
@click.option("--label/--no-label", default=True, show_default=True,
              help="Label finite-domain variables before reporting an answer.")
@click.option("--verify", is_flag=True, help="Check every answer with the model checker.")
@click.option("--output", type=click.Choice([f.value for f in OutputFormat]),
              default="text", show_default=True)
@click.option("--metrics-file", type=click.Path(dir_okay=False),
              help="Write Prometheus metrics to this file when done.")
@click.pass_context
def solve(ctx: click.Context, **options):
    """Search for abductive solutions of a theory and query."""
    try:
        config = RunConfig(**options)
    except ValidationError as exc:
        for error in exc.errors():
            click.echo(f"error: {error['msg']}", err=True)
        ctx.exit(int(ExitCode.USAGE))
    with reported_errors():
        code = _solve(config)
    ctx.exit(int(code))


def _solve(config: RunConfig) -> ExitCode:
    theory, query = load_theory(config.theory_path, config.query_text)
    transformed = TransformService.transform(theory)
    if config.dump_transformed:
        click.echo(TransformService.format_transformed(transformed), err=True, nl=False)
    if config.verify and not config.label:
        click.echo("warning: answers with a residual store are not verified", err=True)

    trace = None
    if config.trace:
        def trace(event):
            click.echo(str(event), err=True)

    answers = []
    rejected = 0
    outcome = None
    for outcome in DerivationService.run(
        transformed,
        query,
        max_solutions=config.max_solutions,
        step_budget=config.step_budget,
        reuse=config.reuse,
        label=config.label,
        trace=trace,
    ):
        if outcome.kind is not OutcomeKind.SUCCESS:
            break
        verified = None
        if config.verify:
            verified = _verify(theory, query, outcome.answer, len(answers) + 1)
            rejected += verified is False
        read = _answer_read(outcome.answer, verified)
        answers.append(read)
        if config.output is OutputFormat.TEXT:
            _print_answer(len(answers), read)

    report = SolveReport(answers=answers, outcome=outcome.kind.value, steps=outcome.steps)
    if config.output is OutputFormat.JSON:
        click.echo(report.model_dump_json(indent=2))
    else:
        click.echo(
            f"% outcome={report.outcome} answers={len(answers)} steps={report.steps}"
        )
    if outcome.diagnostic:
        click.echo(f"warning: {outcome.diagnostic}", err=True)
    if config.metrics_file:
        write_to_textfile(config.metrics_file, REGISTRY)

    if rejected:
        logger.error(
            f"Verifier disagreed with solver: path={theory.path}, rejected={rejected}"
        )
        return ExitCode.ORACLE_DISAGREEMENT
    if answers:
        return ExitCode.SUCCESS
    return _EXIT_CODES.get(outcome.kind, ExitCode.FAILURE)


def _verify(theory: Theory, query: Formula, answer: Answer, index: int) -> Optional[bool]:
    if not answer.labeled and ConstraintService.to_literals(answer.store):
        click.echo(
            f"warning: answer {index} has a residual store and is not verified", err=True
        )
        return None
    try:
        result = VerifierService.check_answer(
            theory, query, answer.delta, answer.substitution
        )
    except UnboundedUniverseError as exc:
        click.echo(f"warning: answer {index} not verified: {exc}", err=True)
        return None
    if not result.passed:
        click.echo(f"error: answer {index} rejected: {result.counterexample}", err=True)
    return result.passed


def _answer_read(answer: Answer, verified: Optional[bool]) -> AnswerRead:
    delta = sorted(
        answer.delta, key=lambda a: (a.pred, len(a.args), [term_order(t) for t in a.args])
    )
    return AnswerRead(
        substitution={str(v): str(t) for v, t in answer.substitution},
        delta=[format_atom(a) for a in delta],
        labeled=answer.labeled,
        constraints=[
            format_formula(c) for c in ConstraintService.to_literals(answer.store)
        ],
        verified=verified,
    )


def _print_answer(index: int, answer: AnswerRead) -> None:
    """An answer as a loadable facts file, the rest as comments"""
    click.echo(f"% answer {index}")
    for name, value in answer.substitution.items():
        click.echo(f"% {name} = {value}")
    for constraint in answer.constraints:
        click.echo(f"% constraint {constraint}")
    if answer.verified is not None:
        click.echo(f"% verified {'yes' if answer.verified else 'no'}")
    for atom in answer.delta:
        click.echo(f"{atom}.")
