import pytest

from app.core.exceptions import TypeCheckError
from app.models.term import Const, Int
from app.models.theory import SignatureOrigin
from app.services.parser_service import ParserService
from app.services.type_service import UNBOUNDED, TypeService
from tests.factories import load_theory, make_theory


def test_declared_signatures_are_kept(queens4):
    """Test that declared signatures survive type checking"""
    signature = queens4.signatures[("has_position", 2)]

    assert signature.arg_sorts == ("pos", "pos")
    assert signature.origin == SignatureOrigin.DECLARED


def test_signatures_are_inferred():
    """Test inferring a signature from the arguments a predicate is used with"""
    theory, _ = make_theory(
        "type_instance(slot, int).\nd(slot)::pred.\nd(X) <- X in 0..2.\n"
        "fol forall(X) $ d(X) => busy(X)."
    )

    signature = theory.signatures[("busy", 1)]
    assert signature.arg_sorts == ("slot",)
    assert signature.origin == SignatureOrigin.INFERRED


def test_query_predicates_are_typed():
    """Test that predicates only used in the query get signatures"""
    theory, query = make_theory("p(int)::pred.\nabducible(p(_)).", "p(X), X > 2")

    assert theory.signatures[("p", 1)].arg_sorts == ("int",)
    assert theory.sort_of_var(query.items[0].args[0]) == "int"


def test_sort_clash_is_reported():
    """Test that a symbolic constant in an integer position is an error"""
    theory = ParserService.parse_theory("p(int)::pred.\nabducible(p(_)).\nfol p(a).")

    with pytest.raises(TypeCheckError) as exc:
        TypeService.check_and_infer(theory)

    assert "sort clash" in exc.value.diagnostics[0].message
    assert exc.value.diagnostics[0].line == 3


def test_arity_clash_is_reported():
    """Test that one predicate name used with two arities is an error"""
    theory = ParserService.parse_theory("abducible(p(_)).\nfol p(1).\nfol p(1, 2).")

    with pytest.raises(TypeCheckError) as exc:
        TypeService.check_and_infer(theory)

    assert "arity clash" in exc.value.diagnostics[0].message


def test_cyclic_type_instance_is_reported():
    """Test that a cycle of sort aliases is an error"""
    theory = ParserService.parse_theory("type_instance(a, b).\ntype_instance(b, a).")

    with pytest.raises(TypeCheckError) as exc:
        TypeService.check_and_infer(theory)

    assert "cyclic" in exc.value.diagnostics[0].message


def test_herbrand_universe_of_bounded_int_sort(queens4):
    """Test that a range-defined unary predicate bounds its integer sort"""
    universe = TypeService.herbrand_universe(queens4, "pos")

    assert universe == [Int(1), Int(2), Int(3), Int(4)]


def test_herbrand_universe_of_plain_int_is_unbounded(queens4):
    """Test that the int sort itself has no finite universe"""
    assert TypeService.herbrand_universe(queens4, "int") == UNBOUNDED


def test_herbrand_universe_of_symbolic_sort():
    """Test that a symbolic sort ranges over its constants"""
    theory, _ = load_theory("family.idl")

    assert TypeService.herbrand_universe(theory, "person") == [
        Const("ann"),
        Const("bob"),
        Const("carl"),
        Const("dan"),
        Const("eve"),
    ]
    sexes = TypeService.herbrand_universe(theory, "sex")
    assert sexes == [Const("female"), Const("male")]


def test_domain_extension_follows_facts():
    """Test that a range bounded by a fact-defined predicate is evaluated"""
    theory, _ = load_theory("queens5.idl")

    assert TypeService.domain_extension(theory, ("dom", 1)) == {1, 2, 3, 4, 5}


def test_fact_values():
    """Test reading the rows of a fact-only predicate"""
    theory, _ = load_theory("colouring.idl")

    rows = TypeService.fact_values(theory, ("edge", 2))

    assert (Int(4), Int(1)) in rows
    assert len(rows) == 4
    assert TypeService.fact_values(theory, ("node", 1)) is None
