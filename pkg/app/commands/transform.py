import click

from app.commands.common import ExitCode, load_theory, reported_errors
from app.services.transform_service import TransformService


@click.command()
@click.argument("theory_path", type=click.Path(dir_okay=False))
@click.pass_context
def transform(ctx: click.Context, theory_path: str):
    """Print the completed definition and the axioms as denials."""
    with reported_errors():
        theory, _ = load_theory(theory_path)
        transformed = TransformService.transform(theory)
    click.echo(TransformService.format_transformed(transformed), nl=False)
    ctx.exit(int(ExitCode.SUCCESS))
