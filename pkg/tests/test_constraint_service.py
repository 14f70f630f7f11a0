import itertools
import operator
import random

import pytest

from app.models.formula import COMPARISON_OPS, Compare, InRange
from app.models.store import Domain, Store
from app.models.term import Compound, Int, Substitution, Var, evaluate
from app.services.constraint_service import INFINITE, ConstraintService


def _ranged(*pairs):
    """A store with each variable restricted to its range"""
    store = Store()
    for var, (lo, hi) in pairs:
        store = ConstraintService.add(store, InRange(var, Int(lo), Int(hi)))
    return store


def test_add_range():
    """Test that a range literal sets the domain"""
    x = Var.named("X")

    store = ConstraintService.add(Store(), InRange(x, Int(1), Int(5)))

    assert store.domain(x) == Domain.range(1, 5)


def test_add_comparison_narrows_bounds():
    """Test that a comparison with a constant narrows the domain"""
    x = Var.named("X")
    store = _ranged((x, (1, 5)))

    store = ConstraintService.add(store, Compare(x, ">", Int(3)))

    assert store.domain(x) == Domain.range(4, 5)


def test_add_does_not_change_the_original_store():
    """Test that adding to a store leaves the original untouched"""
    x = Var.named("X")
    store = _ranged((x, (1, 5)))

    ConstraintService.add(store, Compare(x, "=", Int(2)))

    assert store.domain(x) == Domain.range(1, 5)


def test_add_inconsistent_literal():
    """Test that an inconsistent literal yields None"""
    x = Var.named("X")
    store = _ranged((x, (1, 5)))

    assert ConstraintService.add(store, Compare(x, "<", Int(1))) is None


def test_bounds_propagate_between_variables():
    """Test that X < Y propagates to both bounds"""
    x, y = Var.named("X"), Var.named("Y")
    store = _ranged((x, (1, 3)), (y, (1, 3)))

    store = ConstraintService.add(store, Compare(x, "<", y))

    assert store.domain(x) == Domain.range(1, 2)
    assert store.domain(y) == Domain.range(2, 3)


def test_disequality_removes_a_value():
    """Test that X != 3 punches a hole in the domain"""
    x = Var.named("X")
    store = _ranged((x, (1, 5)))

    store = ConstraintService.add(store, Compare(x, "!=", Int(3)))

    assert store.domain(x) == Domain(((1, 2), (4, 5)))
    assert 3 not in store.domain(x)


def test_arithmetic_equation_fixes_variables():
    """Test propagation through a linear equation"""
    x, y = Var.named("X"), Var.named("Y")
    store = _ranged((x, (1, 5)), (y, (1, 5)))

    store = ConstraintService.add(store, Compare(Compound("+", (x, y)), "=", Int(10)))

    assert ConstraintService.fixed_vars(store) == {x: 5, y: 5}


def test_non_linear_literal_is_rejected():
    """Test that a product of two variables is not accepted"""
    x, y = Var.named("X"), Var.named("Y")
    product = Compound("*", (x, y))

    assert ConstraintService.add(Store(), Compare(product, "=", Int(4))) is None


def test_negate_comparison():
    """Test negating a comparison"""
    x, y = Var.named("X"), Var.named("Y")

    assert ConstraintService.negate(Compare(x, "<", y)) == [Compare(x, ">=", y)]


def test_negate_range():
    """Test that a range negates to two alternatives"""
    x = Var.named("X")

    assert ConstraintService.negate(InRange(x, Int(1), Int(8))) == [
        Compare(x, "<", Int(1)),
        Compare(x, ">", Int(8)),
    ]


def test_enumerate_finite_range():
    """Test enumerating the solutions of a range literal"""
    x = Var.named("X")

    solutions = ConstraintService.enumerate(InRange(x, Int(1), Int(3)))

    assert solutions == [{x: 1}, {x: 2}, {x: 3}]


def test_enumerate_unbounded_literal():
    """Test that a half-open literal has infinitely many solutions"""
    x = Var.named("X")

    assert ConstraintService.enumerate(Compare(x, ">", Int(1))) == INFINITE


def test_enumerate_within_context():
    """Test that range literals in the context bound the solutions"""
    x, y = Var.named("X"), Var.named("Y")

    solutions = ConstraintService.enumerate(
        Compare(x, "<", y), [InRange(x, Int(1), Int(3)), InRange(y, Int(1), Int(3))]
    )

    assert sorted((s[x], s[y]) for s in solutions) == [(1, 2), (1, 3), (2, 3)]


def test_enumerate_unsatisfiable_ground_literal():
    """Test that a false ground literal has no solutions"""
    assert ConstraintService.enumerate(Compare(Int(1), ">", Int(2))) == []


def test_label_gives_every_solution():
    """Test labeling a store with a disequality"""
    x, y = Var.named("X"), Var.named("Y")
    store = ConstraintService.add(_ranged((x, (1, 3)), (y, (1, 2))), Compare(x, "!=", y))

    solutions = list(ConstraintService.label(store))

    assert len(solutions) == 4
    assert {x: 1, y: 1} not in solutions
    assert all(s[x] != s[y] for s in solutions)


def test_is_satisfiable_needs_search():
    """Test that three pairwise different values in 1..2 are unsatisfiable"""
    x, y, z = Var.named("X"), Var.named("Y"), Var.named("Z")
    store = _ranged((x, (1, 2)), (y, (1, 2)), (z, (1, 2)))
    for a, b in ((x, y), (y, z), (x, z)):
        store = ConstraintService.add(store, Compare(a, "!=", b))

    assert store is not None
    assert not ConstraintService.is_satisfiable(store)


def test_is_satisfiable_with_unbounded_variable():
    """Test that a store with an unbounded variable is taken as satisfiable"""
    x = Var.named("X")
    store = ConstraintService.add(Store(), Compare(x, ">", Int(1)))

    assert ConstraintService.is_satisfiable(store)


def test_is_satisfiable_checks_finite_part_beside_unbounded_variable():
    """Test that an unbounded variable does not hide an unsatisfiable finite part"""
    x, y, z, w = (Var.named(name) for name in "XYZW")
    store = _ranged((x, (1, 2)), (y, (1, 2)), (z, (1, 2)))
    for a, b in ((x, y), (y, z), (x, z)):
        store = ConstraintService.add(store, Compare(a, "!=", b))
    store = ConstraintService.add(store, Compare(w, ">", Int(1)))

    assert store is not None
    assert not store.domain(w).is_finite()
    assert not ConstraintService.is_satisfiable(store)


def test_substitute_value():
    """Test binding a store variable to an integer"""
    x = Var.named("X")
    store = _ranged((x, (1, 5)))

    assert x not in ConstraintService.substitute(store, Substitution({x: Int(3)}))
    assert ConstraintService.substitute(store, Substitution({x: Int(9)})) is None


def test_substitute_variable_merges_domains():
    """Test that binding one store variable to another intersects their domains"""
    x, y = Var.named("X"), Var.named("Y")
    store = _ranged((x, (1, 5)), (y, (3, 8)))

    result = ConstraintService.substitute(store, Substitution({x: y}))

    assert x not in result
    assert result.domain(y) == Domain.range(3, 5)


def test_to_literals():
    """Test printing a store back as literals"""
    x = Var.named("X")
    store = ConstraintService.add(_ranged((x, (1, 4))), Compare(x, "!=", Int(2)))

    assert ConstraintService.to_literals(store) == [
        InRange(x, Int(1), Int(4)),
        Compare(x, "!=", Int(2)),
    ]


PYTHON_OPS = {
    "<": operator.lt,
    "<=": operator.le,
    "=": operator.eq,
    "!=": operator.ne,
    ">=": operator.ge,
    ">": operator.gt,
}


def _holds(literal, assignment):
    theta = Substitution({v: Int(x) for v, x in assignment.items()})
    lhs, rhs = evaluate(theta.apply(literal.lhs)), evaluate(theta.apply(literal.rhs))
    return PYTHON_OPS[literal.op](lhs, rhs)


def _random_side(rng, variables):
    var = rng.choice(variables)
    roll = rng.random()
    if roll < 0.4:
        return var
    if roll < 0.6:
        return Int(rng.randint(0, 4))
    if roll < 0.8:
        return Compound("+", (var, Int(rng.randint(-2, 2))))
    return Compound("+", (var, rng.choice(variables)))


def _random_literal(rng, variables):
    lhs, rhs = _random_side(rng, variables), _random_side(rng, variables)
    return Compare(lhs, rng.choice(COMPARISON_OPS), rhs)


def _check_random_store(rng, variables):
    literals = [_random_literal(rng, variables) for _ in range(rng.randint(1, 4))]

    store = _ranged(*((v, (0, 3)) for v in variables))
    for literal in literals:
        if store is not None:
            store = ConstraintService.add(store, literal)

    expected = set()
    for values in itertools.product(range(4), repeat=len(variables)):
        assignment = dict(zip(variables, values))
        if all(_holds(literal, assignment) for literal in literals):
            expected.add(values)
    found = set()
    if store is not None:
        for solution in ConstraintService.label(store, variables):
            found.add(tuple(solution[v] for v in variables))
    assert found == expected, literals
    satisfiable = store is not None and ConstraintService.is_satisfiable(store)
    assert satisfiable == bool(expected), literals


@pytest.mark.parametrize("seed", range(10))
def test_store_keeps_exactly_the_brute_force_solutions(seed):
    """Test that propagation and labeling lose no solution and admit no other,
    over a thousand random stores per seed"""
    rng = random.Random(seed)
    variables = [Var.named("X"), Var.named("Y"), Var.named("Z")]
    for _ in range(1000):
        _check_random_store(rng, variables)


@pytest.mark.parametrize("op", COMPARISON_OPS)
def test_negate_is_an_involution(op):
    """Test that negating a comparison twice gives it back"""
    x = Var.named("X")
    literal = Compare(x, op, Int(2))

    (negated,) = ConstraintService.negate(literal)
    (twice,) = ConstraintService.negate(negated)

    assert twice == literal
    for value in range(5):
        assert _holds(literal, {x: value}) != _holds(negated, {x: value})
