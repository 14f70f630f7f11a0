import click

from app.commands.common import ExitCode, load_theory, reported_errors
from app.models.theory import SignatureOrigin


@click.command()
@click.argument("theory_path", type=click.Path(dir_okay=False))
@click.option("--query", "query_text", default=None, help="Also type check this query.")
@click.pass_context
def check(ctx: click.Context, theory_path: str, query_text):
    """Parse and type check a theory, printing every predicate signature."""
    with reported_errors():
        theory, _ = load_theory(theory_path, query_text)
    for sort, base in sorted(theory.sort_bases.items()):
        if sort != base:
            click.echo(f"type_instance({sort}, {base}).")
    for key in sorted(theory.signatures):
        signature = theory.signatures[key]
        suffix = ""
        if signature.origin is SignatureOrigin.INFERRED:
            suffix = "  % inferred"
        elif key in theory.abducibles:
            suffix = "  % abducible"
        click.echo(f"{signature}{suffix}")
    click.echo(
        f"% {len(theory.signatures)} predicates, "
        f"{len(theory.definition.rules)} rules, {len(theory.fol_axioms)} axioms"
    )
    ctx.exit(int(ExitCode.SUCCESS))

