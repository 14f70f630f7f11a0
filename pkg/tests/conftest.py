import pytest
from click.testing import CliRunner

from app.main import cli
from tests.factories import make_theory, read_theory, theory_path

QUEENS_SMALL = """
type_instance(pos, int).
has_position(pos, pos)::pred.
dom(pos)::pred.

dom(X) <- X in 1..3.

abducible(has_position(_, _)).
"""


@pytest.fixture(scope="function")
def runner():
    """A click runner with stderr kept apart from stdout"""
    return CliRunner(mix_stderr=False)


@pytest.fixture(scope="function")
def invoke(runner):
    """Invoke the idl command line with the given arguments"""

    def _invoke(*args):
        return runner.invoke(cli, [str(a) for a in args])

    return _invoke


@pytest.fixture(scope="function")
def queens4_path():
    return theory_path("queens4.idl")


@pytest.fixture(scope="function")
def queens4():
    """The four-queens theory, typed"""
    theory, _ = make_theory(read_theory("queens4.idl"))
    return theory


@pytest.fixture(scope="function")
def small_queens_factory():
    """Build a three-position theory with has_position open, plus extra axioms"""

    def _create(*axioms: str, query=None):
        return make_theory(QUEENS_SMALL + "\n".join(axioms), query)

    return _create
