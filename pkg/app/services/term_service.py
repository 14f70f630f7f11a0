import logging
from typing import Dict, FrozenSet, List, Optional, Tuple

from app.models.formula import (
    TRUE,
    And,
    Atom,
    Compare,
    Denial,
    Equal,
    Exists,
    Forall,
    Formula,
    Implies,
    InRange,
    Not,
    Or,
    Residual,
    conjoin,
    substitute,
)
from app.models.term import Compound, Substitution, Term, Var, occurs

logger = logging.getLogger(__name__)


class TermService:
    @staticmethod
    def unify(
        s: Term, t: Term, prefer: FrozenSet[Var] = frozenset()
    ) -> Optional[Substitution]:
        """Most general unifier of s and t with occurs check, or None.

        When two variables meet, a variable in `prefer` is the one bound.
        """
        bindings: Dict[Var, Term] = {}

        def walk(term: Term) -> Term:
            while isinstance(term, Var) and term in bindings:
                term = bindings[term]
            return term

        def resolve(term: Term) -> Term:
            term = walk(term)
            if isinstance(term, Compound):
                return Compound(term.functor, tuple(resolve(a) for a in term.args))
            return term

        stack: List[Tuple[Term, Term]] = [(s, t)]
        while stack:
            left, right = stack.pop()
            left, right = walk(left), walk(right)
            if left == right:
                continue
            if isinstance(right, Var) and (
                not isinstance(left, Var) or (right in prefer and left not in prefer)
            ):
                left, right = right, left
            if isinstance(left, Var):
                if occurs(left, resolve(right)):
                    return None
                bindings[left] = right
                continue
            if (
                isinstance(left, Compound)
                and isinstance(right, Compound)
                and left.functor == right.functor
                and len(left.args) == len(right.args)
            ):
                stack.extend(zip(left.args, right.args))
                continue
            return None

        return Substitution({v: resolve(t) for v, t in bindings.items()})

    @staticmethod
    def unify_args(
        left: Tuple[Term, ...],
        right: Tuple[Term, ...],
        prefer: FrozenSet[Var] = frozenset(),
    ) -> Optional[Substitution]:
        if len(left) != len(right):
            return None
        if not left:
            return Substitution()
        return TermService.unify(
            Compound("args", tuple(left)), Compound("args", tuple(right)), prefer
        )

    @staticmethod
    def solved_form(theta: Substitution) -> Formula:
        """Render a substitution as the conjunction of its bindings"""
        bindings = sorted(theta.items(), key=lambda b: b[0].id)
        equalities = [Equal(v, t) for v, t in bindings]
        return conjoin(equalities) if equalities else TRUE

    @staticmethod
    def rename_fresh(f):
        """Give every bound variable of f a fresh identifier; free ones stay"""
        return _rename(f, Substitution())

    @staticmethod
    def rename_vars(f, variables) -> Tuple[object, Substitution]:
        """Rename the given (free) variables of f apart; returns the renaming too"""
        renaming = Substitution({v: Var.fresh(v.name) for v in variables})
        return _rename(f, renaming), renaming

    @staticmethod
    def alpha_equal(f, g) -> bool:
        return _alpha(f, g, {}, {})


def _rename(f, theta: Substitution):
    if isinstance(f, (Exists, Forall)):
        fresh = tuple(Var.fresh(v.name) for v in f.vars)
        inner = _extend(theta, dict(zip(f.vars, fresh)))
        return type(f)(fresh, _rename(f.body, inner))
    if isinstance(f, Denial):
        mapping = {v: Var.fresh(v.name) for v in f.uvars}
        inner = _extend(theta, mapping)
        body = tuple(_rename(i, inner) for i in f.body)
        return Denial(frozenset(mapping.values()), body)
    if isinstance(f, Not):
        return Not(_rename(f.body, theta))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_rename(i, theta) for i in f.items))
    if isinstance(f, Implies):
        return Implies(_rename(f.lhs, theta), _rename(f.rhs, theta))
    return substitute(f, theta)


def _extend(theta: Substitution, mapping: Dict[Var, Term]) -> Substitution:
    merged = dict(theta.items())
    merged.update(mapping)
    return Substitution(merged)


def _alpha_term(a: Term, b: Term, left: Dict[Var, Var], right: Dict[Var, Var]) -> bool:
    if isinstance(a, Var) and isinstance(b, Var):
        if a in left or b in right:
            return left.get(a) == b and right.get(b) == a
        return a == b
    if isinstance(a, Compound) and isinstance(b, Compound):
        return (
            a.functor == b.functor
            and len(a.args) == len(b.args)
            and all(_alpha_term(x, y, left, right) for x, y in zip(a.args, b.args))
        )
    return a == b


def _alpha_terms(xs, ys, left, right) -> bool:
    return len(xs) == len(ys) and all(
        _alpha_term(x, y, left, right) for x, y in zip(xs, ys)
    )


def _bind(xs, ys, left, right):
    left, right = dict(left), dict(right)
    for x, y in zip(xs, ys):
        left[x] = y
        right[y] = x
    return left, right


def _alpha(f, g, left, right) -> bool:
    if type(f) is not type(g):
        return False
    if isinstance(f, Atom):
        return f.pred == g.pred and _alpha_terms(f.args, g.args, left, right)
    if isinstance(f, Equal):
        return _alpha_terms((f.lhs, f.rhs), (g.lhs, g.rhs), left, right)
    if isinstance(f, Compare):
        return f.op == g.op and _alpha_terms((f.lhs, f.rhs), (g.lhs, g.rhs), left, right)
    if isinstance(f, InRange):
        return _alpha_terms((f.term, f.lo, f.hi), (g.term, g.lo, g.hi), left, right)
    if isinstance(f, Residual):
        if len(f.excluded) != len(g.excluded):
            return False
        return _alpha(f.atom, g.atom, left, right) and all(
            _alpha_terms(r, s, left, right) for r, s in zip(f.excluded, g.excluded)
        )
    if isinstance(f, Not):
        return _alpha(f.body, g.body, left, right)
    if isinstance(f, (And, Or)):
        return len(f.items) == len(g.items) and all(
            _alpha(x, y, left, right) for x, y in zip(f.items, g.items)
        )
    if isinstance(f, Implies):
        return _alpha(f.lhs, g.lhs, left, right) and _alpha(f.rhs, g.rhs, left, right)
    if isinstance(f, (Exists, Forall)):
        if len(f.vars) != len(g.vars):
            return False
        inner_left, inner_right = _bind(f.vars, g.vars, left, right)
        return _alpha(f.body, g.body, inner_left, inner_right)
    if isinstance(f, Denial):
        if len(f.uvars) != len(g.uvars) or len(f.body) != len(g.body):
            return False
        # Universals are unordered; match them by first occurrence in the body
        order_f = _occurrence_order(f)
        order_g = _occurrence_order(g)
        if len(order_f) != len(order_g):
            return False
        inner_left, inner_right = _bind(order_f, order_g, left, right)
        return all(_alpha(x, y, inner_left, inner_right) for x, y in zip(f.body, g.body))
    return f == g


def _occurrence_order(d: Denial) -> List[Var]:
    seen: List[Var] = []
    for literal in d.body:
        for v in _vars_in_order(literal):
            if v in d.uvars and v not in seen:
                seen.append(v)
    seen.extend(sorted(d.uvars - set(seen), key=lambda v: v.id))
    return seen


def _vars_in_order(f) -> List[Var]:
    out: List[Var] = []

    def terms(t: Term):
        if isinstance(t, Var):
            out.append(t)
        elif isinstance(t, Compound):
            for a in t.args:
                terms(a)

    def walk(g):
        if isinstance(g, Atom):
            for a in g.args:
                terms(a)
        elif isinstance(g, (Equal, Compare)):
            terms(g.lhs)
            terms(g.rhs)
        elif isinstance(g, InRange):
            for t in (g.term, g.lo, g.hi):
                terms(t)
        elif isinstance(g, Residual):
            walk(g.atom)
            for row in g.excluded:
                for t in row:
                    terms(t)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (And, Or)):
            for i in g.items:
                walk(i)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body)
        elif isinstance(g, Implies):
            walk(g.lhs)
            walk(g.rhs)

    walk(f)
    return out
