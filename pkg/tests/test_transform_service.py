import itertools
import random

import pytest

from app.core.exceptions import ObDeclarationError
from app.models.formula import (
    And,
    Atom,
    Denial,
    Equal,
    Exists,
    InRange,
    Not,
    Or,
    free_vars,
)
from app.models.term import Int
from app.models.verification import Truth
from app.services.transform_service import TransformService
from app.services.verifier_service import VerifierService
from tests.factories import load_theory, make_theory

OPEN_PAIR = """
type_instance(n, int).
d(n)::pred.
p(n)::pred.
q(n)::pred.
d(X) <- X in 1..2.
abducible(p(_)).
abducible(q(_)).
"""


def test_complete_fact_definition():
    """Test completing a predicate defined by one fact"""
    theory, _ = load_theory("queens4.idl")

    completion = TransformService.complete(theory.definition)[("dim", 1)]

    (x,) = completion.head_vars
    assert completion.body == Equal(x, Int(4))


def test_complete_lifts_local_variables():
    """Test that body-only variables become existential"""
    theory, _ = load_theory("queens4.idl")

    completion = TransformService.complete(theory.definition)[("dom", 1)]

    assert isinstance(completion.body, Exists)
    assert free_vars(completion.body) == set(completion.head_vars)
    dim_atom, in_range = completion.body.body.items
    assert dim_atom.pred == "dim"
    assert isinstance(in_range, InRange)
    assert in_range.term == completion.head_vars[0]


def test_complete_several_rules_is_a_disjunction():
    """Test that each rule contributes one disjunct"""
    theory, _ = make_theory("p(1).\np(2).")

    completion = TransformService.complete(theory.definition)[("p", 1)]

    (x,) = completion.head_vars
    assert completion.body == Or((Equal(x, Int(1)), Equal(x, Int(2))))


def test_complete_repeated_head_variable():
    """Test that a repeated head variable becomes an equality"""
    theory, _ = make_theory("same(X, X) <- d(X).\nd(1).")

    completion = TransformService.complete(theory.definition)[("same", 2)]

    x0, x1 = completion.head_vars
    assert Equal(x1, x0) in completion.body.items
    assert Atom("d", (x0,)) in completion.body.items


def test_to_denials_of_universal_implication():
    """Test that a universally quantified implication becomes one denial"""
    theory, _ = load_theory("queens4.idl")
    functional = theory.fol_axioms[1].formula

    (denial,) = TransformService.to_denials(functional)

    assert isinstance(denial, Denial)
    assert denial.uvars == frozenset(functional.vars)
    first, second, negated = denial.body
    assert first.pred == second.pred == "has_position"
    assert isinstance(negated, Not) and isinstance(negated.body, Equal)


def test_to_denials_keeps_existential_under_negation():
    """Test that a totality axiom becomes a denial with a negated existential"""
    theory, _ = load_theory("queens4.idl")

    (denial,) = TransformService.to_denials(theory.fol_axioms[0].formula)

    dom_atom, negated = denial.body
    assert dom_atom.pred == "dom"
    assert isinstance(negated, Not)
    assert isinstance(negated.body, Exists)


def test_to_denials_of_existential_is_a_positive_goal():
    """Test that an existential axiom stays a positive goal"""
    theory, _ = make_theory(OPEN_PAIR + "fol exists(X) $ d(X), p(X).")

    (goal,) = TransformService.to_denials(theory.fol_axioms[0].formula)

    assert isinstance(goal, Exists)


def test_to_denials_splits_conjunctions():
    """Test that a conjunction of axioms gives one goal per conjunct"""
    theory, _ = make_theory(OPEN_PAIR + "fol (forall(X) $ not p(X)), (exists(Y) $ q(Y)).")

    goals = TransformService.to_denials(theory.fol_axioms[0].formula)

    assert len(goals) == 2
    assert isinstance(goals[0], Denial)
    assert not isinstance(goals[1], Denial)


def test_to_denials_of_top_level_negation():
    """Test that `not F` becomes the denial of F"""
    theory, _ = make_theory(OPEN_PAIR + "fol not (exists(X) $ p(X), q(X)).")

    (denial,) = TransformService.to_denials(theory.fol_axioms[0].formula)

    assert isinstance(denial, Denial)
    assert len(denial.uvars) == 1
    assert [literal.pred for literal in denial.body] == ["p", "q"]


def test_denials_agree_with_axioms_in_every_model():
    """Test that an axiom and its goals are true in exactly the same models"""
    axioms = [
        "fol forall(X) $ d(X) => (p(X) ; q(X)).",
        "fol exists(X) $ d(X), p(X).",
        "fol forall(X, Y) $ p(X), p(Y) => X = Y.",
        "fol not (exists(X) $ q(X), p(X)).",
        "fol forall(X) $ d(X), q(X) => (exists(Y) $ d(Y), Y > X, p(Y)).",
        "fol forall(X) $ p(X) => not q(X), X > 1.",
    ]
    theory, _ = make_theory(OPEN_PAIR + "\n".join(axioms))
    atoms = [Atom(pred, (Int(v),)) for pred in ("p", "q") for v in (1, 2)]

    for size in range(len(atoms) + 1):
        for delta in itertools.combinations(atoms, size):
            model = VerifierService.wfm(theory, delta)
            for axiom in theory.fol_axioms:
                expected = VerifierService.evaluate(theory, model, axiom.formula)
                goals = TransformService.to_denials(axiom.formula)
                values = [VerifierService.evaluate(theory, model, g) for g in goals]
                holds = all(v == Truth.TRUE for v in values)
                assert holds == (expected == Truth.TRUE), (axiom.line, delta)


COMPARISONS = ["<", "=", "\\="]


def _random_formula(rng, bound, depth, names):
    if depth == 0 or rng.random() < 0.25:
        if len(bound) >= 2 and rng.random() < 0.3:
            left, right = rng.sample(bound, 2)
            return f"{left} {rng.choice(COMPARISONS)} {right}"
        arg = rng.choice(bound + ["1", "2"])
        return f"{rng.choice(['p', 'q'])}({arg})"
    kind = rng.choice(["and", "or", "not", "implies", "forall", "exists"])
    if kind == "not":
        return f"not ({_random_formula(rng, bound, depth - 1, names)})"
    if kind in ("forall", "exists"):
        var = f"V{next(names)}"
        body = _random_formula(rng, bound + [var], depth - 1, names)
        if kind == "forall":
            return f"(forall({var}) $ d({var}) => ({body}))"
        return f"(exists({var}) $ d({var}), ({body}))"
    left = _random_formula(rng, bound, depth - 1, names)
    right = _random_formula(rng, bound, depth - 1, names)
    glue = {"and": ", ", "or": " ; ", "implies": " => "}[kind]
    return f"(({left}){glue}({right}))"


def test_denials_agree_with_random_axioms():
    """Test the goal translation against evaluation on fifty generated axioms"""
    rng = random.Random(20)
    names = itertools.count()
    axioms = [f"fol {_random_formula(rng, [], 4, names)}." for _ in range(50)]
    theory, _ = make_theory(OPEN_PAIR + "\n".join(axioms))
    atoms = [Atom(pred, (Int(v),)) for pred in ("p", "q") for v in (1, 2)]

    for size in range(len(atoms) + 1):
        for delta in itertools.combinations(atoms, size):
            model = VerifierService.wfm(theory, delta)
            for axiom in theory.fol_axioms:
                expected = VerifierService.evaluate(theory, model, axiom.formula)
                goals = TransformService.to_denials(axiom.formula)
                values = [VerifierService.evaluate(theory, model, g) for g in goals]
                holds = all(v == Truth.TRUE for v in values)
                assert holds == (expected == Truth.TRUE), (axiom.line, delta)


def test_expand_ob_gives_three_axioms():
    """Test that an ob declaration expands to totality, functionality and injectivity"""
    theory, _ = load_theory("queens4_ob.idl")

    axioms = TransformService.expand_ob(theory.ob_decls[0], theory)

    assert len(axioms) == 3
    assert all(axiom.line == theory.ob_decls[0].line for axiom in axioms)
    functionality, injectivity = axioms[1].formula, axioms[2].formula
    assert isinstance(functionality.body.rhs, Equal)
    assert isinstance(injectivity.body.lhs, And)


def test_expand_ob_rejects_defined_function():
    """Test that the function of an ob declaration must be abducible"""
    theory, _ = make_theory("d(X) <- X in 1..3.\nf(1, 1).\nob f :: d(_) -> d(_).")

    with pytest.raises(ObDeclarationError) as exc:
        TransformService.expand_ob(theory.ob_decls[0], theory)

    assert "binary abducible" in str(exc.value)


def test_expand_ob_rejects_open_domain():
    """Test that the domain of an ob declaration must be a defined predicate"""
    theory, _ = make_theory(
        "f(int, int)::pred.\nd(int)::pred.\nabducible(f(_, _)).\nabducible(d(_)).\n"
        "ob f :: d(_) -> d(_)."
    )

    with pytest.raises(ObDeclarationError):
        TransformService.expand_ob(theory.ob_decls[0], theory)


def test_transform_queens():
    """Test transforming the four-queens theory"""
    theory, _ = load_theory("queens4_ob.idl")

    transformed = TransformService.transform(theory)

    assert set(transformed.completion) == {("dom", 1), ("dim", 1)}
    assert len(transformed.expanded_axioms) == 3
    assert len(transformed.goals) == 4
    assert all(isinstance(g, Denial) for g in transformed.goals)


def test_format_transformed():
    """Test printing a transformed theory"""
    theory, _ = load_theory("queens4.idl")

    text = TransformService.format_transformed(TransformService.transform(theory))

    assert "% completion of dom/1" in text
    assert text.count("\nfol ") == 4
    assert text.endswith(".\n")
