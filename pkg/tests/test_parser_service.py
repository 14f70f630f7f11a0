import pytest

from app.core.exceptions import ParseError
from app.models.formula import Atom, Compare, Equal, Exists, Forall, Implies, InRange, Not
from app.models.term import Compound, Const, Int, Var
from app.schemas.diagnostic import Severity
from app.services.parser_service import ParserService
from tests.factories import read_theory


def test_parse_queens_theory():
    """Test parsing the four-queens theory"""
    theory = ParserService.parse_theory(read_theory("queens4.idl"), path="queens4.idl")

    assert theory.path == "queens4.idl"
    assert theory.abducibles == {("has_position", 2)}
    assert theory.definition.defined_preds == {("dom", 1), ("dim", 1)}
    assert len(theory.definition.rules) == 2
    assert len(theory.fol_axioms) == 4
    assert [(d.name, d.base) for d in theory.type_decls] == [("pos", "int")]
    assert theory.declared_signatures[("has_position", 2)].arg_sorts == ("pos", "pos")
    assert all(isinstance(a.formula, Forall) for a in theory.fol_axioms)


def test_parse_ob_declaration():
    """Test that an ob declaration names the function and its domain and range"""
    theory = ParserService.parse_theory(read_theory("queens4_ob.idl"))

    assert len(theory.ob_decls) == 1
    decl = theory.ob_decls[0]
    assert (decl.function_pred, decl.domain_spec, decl.range_spec) == (
        "has_position",
        "dom",
        "dom",
    )
    assert decl.line == 12


def test_parse_rule_with_range():
    """Test that `X in L..U` in a rule body becomes a range literal"""
    theory = ParserService.parse_theory("d(X) <- X in 1..N, n(N).\nn(3).")

    rule = theory.definition.rules[0]
    x = rule.head.args[0]
    literal = rule.body.items[0]
    assert isinstance(literal, InRange)
    assert literal.term == x
    assert literal.lo == Int(1)


def test_parse_comparisons():
    """Test that arithmetic comparisons and symbolic (dis)equality are told apart"""
    query = ParserService.parse_query("X + 1 =< Y, Z = a, Z \\= b")

    compare, equal, different = query.items
    assert isinstance(compare, Compare)
    assert compare.op == "<="
    assert isinstance(compare.lhs, Compound) and compare.lhs.functor == "+"
    assert equal == Equal(equal.lhs, Const("a"))
    assert isinstance(different, Not) and isinstance(different.body, Equal)


def test_parse_numeric_disequality_is_a_comparison():
    """Test that `\\=` over arithmetic is a comparison"""
    query = ParserService.parse_query("X + 1 \\= 3")

    assert isinstance(query, Compare)
    assert query.op == "!="


def test_query_free_variables_are_shared():
    """Test that repeated variable names in a query denote one variable"""
    query = ParserService.parse_query("p(X), q(X, Y)")

    first, second = query.items
    assert first.args[0] == second.args[0]
    assert isinstance(second.args[1], Var)


def test_query_anonymous_variables_are_existential():
    """Test that `_` in a query is existentially quantified"""
    query = ParserService.parse_query("p(_)")

    assert isinstance(query, Exists)
    assert isinstance(query.body, Atom)


def test_axiom_free_variables_are_closed_with_warning():
    """Test that free variables of an axiom are universally quantified"""
    source = "p(int)::pred.\nabducible(p(_)).\nfol p(X) => X > 0."
    theory = ParserService.parse_theory(source)

    formula = theory.fol_axioms[0].formula
    assert isinstance(formula, Forall)
    assert isinstance(formula.body, Implies)
    assert any("implicitly universally quantified" in w.message for w in theory.warnings)
    assert all(w.severity == Severity.WARNING for w in theory.warnings)


def test_shadowing_quantifier_warns():
    """Test that rebinding a quantified variable produces a warning"""
    theory = ParserService.parse_theory(
        "abducible(p(_)).\nabducible(q(_)).\nfol forall(X) $ p(X) => (exists(X) $ q(X))."
    )

    assert any("shadows" in w.message for w in theory.warnings)
    assert theory.warnings[0].line == 3


def test_open_predicate_becomes_abducible_with_warning():
    """Test that an undefined, undeclared predicate is treated as abducible"""
    theory = ParserService.parse_theory("fol forall(X) $ q(X) => r(X).\nr(1).")

    assert ("q", 1) in theory.abducibles
    assert any("q/1" in w.message for w in theory.warnings)


def test_abducible_with_rules_is_rejected():
    """Test that declaring a defined predicate abducible is an error"""
    with pytest.raises(ParseError) as exc:
        ParserService.parse_theory("p(1).\nabducible(p(_)).")

    assert exc.value.diagnostics[0].line == 2
    assert "declared abducible but has rules" in exc.value.diagnostics[0].message


def test_syntax_error_reports_location():
    """Test that a syntax error carries its line and what was expected"""
    with pytest.raises(ParseError) as exc:
        ParserService.parse_theory(
            "dim(4).\ndom(X) <- X in 1..4\nfoo(1).", path="bad.idl"
        )

    diagnostic = exc.value.diagnostics[0]
    assert diagnostic.path == "bad.idl"
    assert diagnostic.line == 3
    assert "syntax error" in diagnostic.message
    assert str(diagnostic).startswith("bad.idl:3:")


def test_term_in_formula_position_is_rejected():
    """Test that a bare number cannot stand where a formula is expected"""
    with pytest.raises(ParseError) as exc:
        ParserService.parse_query("p(1), 3")

    assert "expected an atom" in exc.value.diagnostics[0].message


def test_parse_facts():
    """Test reading an answer file of ground facts"""
    facts = ParserService.parse_facts(
        "% answer 1\nhas_position(1, 2).\nhas_position(2, 4).\n"
    )

    assert facts == [
        Atom("has_position", (Int(1), Int(2))),
        Atom("has_position", (Int(2), Int(4))),
    ]


def test_parse_facts_rejects_variables():
    """Test that an answer file may not contain variables or rules"""
    with pytest.raises(ParseError) as exc:
        ParserService.parse_facts("p(X).\nq(1) <- true.")

    assert [d.line for d in exc.value.diagnostics] == [1, 2]
