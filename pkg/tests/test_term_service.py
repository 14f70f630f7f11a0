import random

import pytest

from app.models.formula import TRUE, And, Atom, Denial, Equal, Exists
from app.models.term import Compound, Const, Int, Substitution, Var
from app.services.term_service import TermService


def test_unify_binds_variables_to_terms():
    """Test unifying a compound term with a partially ground one"""
    x, y = Var.named("X"), Var.named("Y")
    theta = TermService.unify(Compound("f", (x, Int(2))), Compound("f", (Const("a"), y)))

    assert theta is not None
    assert theta.apply(x) == Const("a")
    assert theta.apply(y) == Int(2)


def test_unify_fails_on_functor_clash():
    """Test that different functors or constants do not unify"""
    x = Var.named("X")

    assert TermService.unify(Compound("f", (x,)), Compound("g", (x,))) is None
    assert TermService.unify(Const("a"), Const("b")) is None
    assert TermService.unify(Int(1), Int(2)) is None


def test_unify_performs_occurs_check():
    """Test that X does not unify with a term containing X"""
    x = Var.named("X")

    assert TermService.unify(x, Compound("f", (x,))) is None


def test_unify_result_is_idempotent():
    """Test that chained bindings are fully resolved"""
    x, y, z = Var.named("X"), Var.named("Y"), Var.named("Z")
    theta = TermService.unify(
        Compound("p", (x, y)), Compound("p", (y, Compound("f", (z,))))
    )

    assert theta.apply(x) == Compound("f", (z,))
    assert theta.apply(theta.apply(x)) == theta.apply(x)


def test_unify_prefers_binding_listed_variables():
    """Test that a preferred variable is the one bound when two variables meet"""
    x, y = Var.named("X"), Var.named("Y")

    theta = TermService.unify(x, y, prefer=frozenset({y}))

    assert theta.apply(y) == x
    assert y in theta
    assert x not in theta


def test_unify_args_rejects_length_mismatch():
    """Test unifying argument tuples of different lengths"""
    assert TermService.unify_args((Int(1),), (Int(1), Int(2))) is None
    assert TermService.unify_args((), ()) == Substitution()


def test_solved_form_lists_bindings():
    """Test rendering a substitution as equalities"""
    x, y = Var.named("X"), Var.named("Y")
    theta = Substitution({x: Int(1), y: Const("a")})

    assert TermService.solved_form(theta) == And((Equal(x, Int(1)), Equal(y, Const("a"))))
    assert TermService.solved_form(Substitution()) == TRUE


def test_rename_fresh_renames_bound_variables_only():
    """Test that quantified variables get new identities and free ones stay"""
    x, y = Var.named("X"), Var.named("Y")
    formula = Exists((x,), Atom("p", (x, y)))

    renamed = TermService.rename_fresh(formula)

    assert renamed.vars[0] != x
    assert renamed.body == Atom("p", (renamed.vars[0], y))
    assert TermService.alpha_equal(formula, renamed)


def test_rename_fresh_renames_denial_universals():
    """Test renaming the universals of a denial"""
    x = Var.named("X")
    denial = Denial(frozenset({x}), (Atom("p", (x,)),))

    renamed = TermService.rename_fresh(denial)

    assert x not in renamed.uvars
    assert TermService.alpha_equal(denial, renamed)


def test_alpha_equal_distinguishes_free_variables():
    """Test that formulas differing in a free variable are not alpha-equal"""
    x, y = Var.named("X"), Var.named("Y")

    assert not TermService.alpha_equal(Atom("p", (x,)), Atom("p", (y,)))


def _random_term(rng, variables, depth):
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        return rng.choice(variables)
    if roll < 0.5:
        return rng.choice([Const("a"), Const("b"), Int(1)])
    if roll < 0.75:
        return Compound("f", (_random_term(rng, variables, depth - 1),))
    left = _random_term(rng, variables, depth - 1)
    right = _random_term(rng, variables, depth - 1)
    return Compound("g", (left, right))


@pytest.mark.parametrize("seed", range(100))
def test_unifier_equates_both_sides(seed):
    """Test that a unifier makes both terms equal and applying it twice changes nothing"""
    rng = random.Random(seed)
    variables = [Var.named("X"), Var.named("Y"), Var.named("Z")]
    s = _random_term(rng, variables, 3)
    t = _random_term(rng, variables, 3)

    theta = TermService.unify(s, t)

    if theta is None:
        assert s != t
        return
    assert theta.apply(s) == theta.apply(t)
    assert theta.apply(theta.apply(s)) == theta.apply(s)
