import logging
from collections import deque
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from app.core.exceptions import NonLinearConstraintError
from app.models.formula import (
    NEGATED_OP,
    ClpLiteral,
    Compare,
    Formula,
    InRange,
    free_vars,
)
from app.models.store import Domain, LinearConstraint, Store
from app.models.term import Compound, Int, Substitution, Term, Var, is_arithmetic

logger = logging.getLogger(__name__)

INFINITE = "infinite"

Solutions = Union[List[Dict[Var, int]], str]

# Linear expression: (coefficients, constant)
LinExpr = Tuple[Dict[Var, int], int]


def linearize(term: Term) -> LinExpr:
    """Integer-linear normal form of an arithmetic term"""
    if isinstance(term, Int):
        return {}, term.value
    if isinstance(term, Var):
        return {term: 1}, 0
    if is_arithmetic(term):
        (lc, lk), (rc, rk) = (linearize(a) for a in term.args)
        if term.functor == "+":
            return _combine(lc, rc, 1), lk + rk
        if term.functor == "-":
            return _combine(lc, rc, -1), lk - rk
        if lc and rc:
            raise NonLinearConstraintError(f"non-linear product: {term}")
        if not lc:
            return {v: c * lk for v, c in rc.items()}, lk * rk
        return {v: c * rk for v, c in lc.items()}, lk * rk
    raise NonLinearConstraintError(f"not an integer expression: {term}")


def _combine(left: Dict[Var, int], right: Dict[Var, int], sign: int) -> Dict[Var, int]:
    result = dict(left)
    for v, c in right.items():
        result[v] = result.get(v, 0) + sign * c
    return {v: c for v, c in result.items() if c}


def _constraint(coeffs: Dict[Var, int], op: str, constant: int) -> LinearConstraint:
    pairs = ((v, c) for v, c in coeffs.items() if c)
    ordered = tuple(sorted(pairs, key=lambda p: p[0].id))
    return LinearConstraint(ordered, op, constant)


def normalize(literal: ClpLiteral) -> List[LinearConstraint]:
    """Rewrite a comparison or range literal into linear constraints over `op 0`"""
    if isinstance(literal, InRange):
        return normalize(Compare(literal.lo, "<=", literal.term)) + normalize(
            Compare(literal.term, "<=", literal.hi)
        )
    lc, lk = linearize(literal.lhs)
    rc, rk = linearize(literal.rhs)
    coeffs, k = _combine(lc, rc, -1), lk - rk
    op = literal.op
    if op == "<":
        return [_constraint(coeffs, "<=", k + 1)]
    if op == "<=":
        return [_constraint(coeffs, "<=", k)]
    if op == ">":
        return [_constraint({v: -c for v, c in coeffs.items()}, "<=", -k + 1)]
    if op == ">=":
        return [_constraint({v: -c for v, c in coeffs.items()}, "<=", -k)]
    return [_constraint(coeffs, op, k)]


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class _Propagator:
    """Bounds propagation to a fixpoint over one store; mutates it in place"""

    def __init__(self, store: Store):
        self.store = store

    def min_term(self, var: Var, coeff: int) -> Optional[int]:
        domain = self.store.domain(var)
        bound = domain.min if coeff > 0 else domain.max
        return None if bound is None else coeff * bound

    def narrow(self, var: Var, domain: Domain) -> Optional[bool]:
        """Store a narrower domain; None when it empties, True when it changed"""
        if domain.is_empty():
            return None
        old = self.store.domain(var)
        if domain == old:
            return False
        self.store.domains[var] = domain
        return True

    def revise_le(self, c: LinearConstraint) -> Optional[List[Var]]:
        changed: List[Var] = []
        mins = [self.min_term(v, k) for v, k in c.coeffs]
        for i, (var, coeff) in enumerate(c.coeffs):
            others = [m for j, m in enumerate(mins) if j != i]
            if any(m is None for m in others):
                continue
            rhs = -c.constant - sum(others)
            domain = self.store.domain(var)
            if coeff > 0:
                narrowed = domain.intersect_range(None, _floor_div(rhs, coeff))
            else:
                narrowed = domain.intersect_range(_ceil_div(rhs, coeff), None)
            result = self.narrow(var, narrowed)
            if result is None:
                return None
            if result:
                changed.append(var)
                mins[i] = self.min_term(var, coeff)
        if not c.coeffs and c.constant > 0:
            return None
        return changed

    def revise(self, c: LinearConstraint) -> Optional[List[Var]]:
        if c.op == "<=":
            return self.revise_le(c)
        if c.op == "=":
            first = self.revise_le(c)
            if first is None:
                return None
            negated = tuple((v, -k) for v, k in c.coeffs)
            mirrored = LinearConstraint(negated, "<=", -c.constant)
            second = self.revise_le(mirrored)
            if second is None:
                return None
            return first + second
        # !=
        open_vars = [(v, k) for v, k in c.coeffs if not self.store.domain(v).is_fixed()]
        fixed_sum = sum(
            k * self.store.domain(v).min
            for v, k in c.coeffs
            if self.store.domain(v).is_fixed()
        )
        if not open_vars:
            return None if fixed_sum + c.constant == 0 else []
        if len(open_vars) == 1:
            var, coeff = open_vars[0]
            target = -c.constant - fixed_sum
            if target % coeff == 0:
                result = self.narrow(var, self.store.domain(var).remove(target // coeff))
                if result is None:
                    return None
                return [var] if result else []
        return []

    def run(self) -> bool:
        watchers: Dict[Var, List[int]] = {}
        for index, c in enumerate(self.store.constraints):
            for v in c.variables():
                watchers.setdefault(v, []).append(index)
        queue = deque(range(len(self.store.constraints)))
        queued = set(queue)
        while queue:
            index = queue.popleft()
            queued.discard(index)
            changed = self.revise(self.store.constraints[index])
            if changed is None:
                return False
            for var in changed:
                for other in watchers.get(var, ()):
                    if other not in queued:
                        queued.add(other)
                        queue.append(other)
        self.store.constraints = [
            c for c in self.store.constraints if not self.entailed(c)
        ]
        return True

    def entailed(self, c: LinearConstraint) -> bool:
        if not all(self.store.domain(v).is_fixed() for v in c.variables()):
            return False
        value = c.constant + sum(k * self.store.domain(v).min for v, k in c.coeffs)
        if c.op == "<=":
            return value <= 0
        if c.op == "=":
            return value == 0
        return value != 0


class ConstraintService:
    @staticmethod
    def add(store: Store, literal: ClpLiteral) -> Optional[Store]:
        """Assert a literal and propagate; None when the store becomes inconsistent"""
        try:
            constraints = normalize(literal)
        except NonLinearConstraintError as exc:
            logger.debug(f"Constraint rejected: literal={literal}, reason={exc}")
            return None
        return ConstraintService.add_linear(store, constraints)

    @staticmethod
    def add_linear(
        store: Store, constraints: Sequence[LinearConstraint]
    ) -> Optional[Store]:
        result = store.copy()
        for c in constraints:
            for v in c.variables():
                result.domains.setdefault(v, store.domain(v))
            result.constraints.append(c)
        if not _Propagator(result).run():
            return None
        return result

    @staticmethod
    def negate(literal: ClpLiteral) -> List[ClpLiteral]:
        """The complement of a literal as alternatives; a range yields two"""
        if isinstance(literal, InRange):
            return [
                Compare(literal.term, "<", literal.lo),
                Compare(literal.term, ">", literal.hi),
            ]
        return [Compare(literal.lhs, NEGATED_OP[literal.op], literal.rhs)]

    @staticmethod
    def enumerate(literal: ClpLiteral, context: Sequence[ClpLiteral] = ()) -> Solutions:
        """All integer solutions of a literal within range literals on its variables"""
        store = ConstraintService.add(Store(), literal)
        if store is None:
            return []
        variables = sorted(_literal_vars(literal), key=lambda v: v.id)
        for extra in context:
            if not set(_literal_vars(extra)) <= set(variables):
                continue
            store = ConstraintService.add(store, extra)
            if store is None:
                return []
        if any(not store.domain(v).is_finite() for v in variables):
            return INFINITE
        return list(ConstraintService.label(store, variables))

    @staticmethod
    def label(
        store: Store, variables: Optional[Sequence[Var]] = None
    ) -> Iterator[Dict[Var, int]]:
        """Ground assignments of the store, first-fail and ascending values"""
        if variables is None:
            variables = [v for v in store.variables() if store.domain(v).is_finite()]
        yield from _label(store, list(variables))

    @staticmethod
    def is_satisfiable(store: Store) -> bool:
        """Some labeling of the finite variables survives propagation; unbounded
        variables are left to the bounds the propagator keeps"""
        return next(ConstraintService.label(store), None) is not None

    @staticmethod
    def substitute(store: Store, theta: Substitution) -> Optional[Store]:
        """Apply a substitution to the store; None when a binding is inconsistent"""
        touched = [v for v in theta.domain() if v in store]
        if not touched:
            return store
        result = Store({}, [])
        pending: List[LinearConstraint] = []
        for var, domain in store.domains.items():
            if var not in theta:
                result.domains[var] = result.domains.get(var, Domain()).intersect(domain)
                continue
            value = theta.apply(var)
            try:
                coeffs, k = linearize(value)
            except NonLinearConstraintError:
                return None
            if not coeffs:
                if k not in domain:
                    return None
                continue
            if len(coeffs) == 1 and next(iter(coeffs.values())) == 1 and k == 0:
                target = next(iter(coeffs))
                current = result.domains.get(target, store.domain(target))
                merged = current.intersect(domain)
                if merged.is_empty():
                    return None
                result.domains[target] = merged
                continue
            # the expression stays within the old bounds of the variable
            if domain.min is not None:
                negated = {v: -c for v, c in coeffs.items()}
                pending.append(_constraint(negated, "<=", domain.min - k))
            if domain.max is not None:
                pending.append(_constraint(coeffs, "<=", k - domain.max))
        for c in store.constraints:
            coeffs: Dict[Var, int] = {}
            constant = c.constant
            try:
                for var, coeff in c.coeffs:
                    vc, vk = linearize(theta.apply(var))
                    for v, x in vc.items():
                        coeffs[v] = coeffs.get(v, 0) + coeff * x
                    constant += coeff * vk
            except NonLinearConstraintError:
                return None
            pending.append(_constraint(coeffs, c.op, constant))
        return ConstraintService.add_linear(result, pending)

    @staticmethod
    def fixed_vars(store: Store) -> Dict[Var, int]:
        return {v: d.min for v, d in store.domains.items() if d.is_fixed()}

    @staticmethod
    def to_literals(store: Store) -> List[Formula]:
        """The store as constraint literals, for printing a residual store"""
        literals: List[Formula] = []
        for var in store.variables():
            domain = store.domain(var)
            if domain.is_finite() and not domain.is_empty():
                literals.append(InRange(var, Int(domain.min), Int(domain.max)))
                for value in range(domain.min, domain.max + 1):
                    if value not in domain:
                        literals.append(Compare(var, "!=", Int(value)))
            else:
                if domain.min is not None:
                    literals.append(Compare(var, ">=", Int(domain.min)))
                if domain.max is not None:
                    literals.append(Compare(var, "<=", Int(domain.max)))
        for c in store.constraints:
            literal = _as_compare(c)
            if literal not in literals:
                literals.append(literal)
        return literals


def _as_compare(c: LinearConstraint) -> Compare:
    lhs: Optional[Term] = None
    for var, coeff in c.coeffs:
        term: Term = var if coeff == 1 else Compound("*", (Int(coeff), var))
        lhs = term if lhs is None else Compound("+", (lhs, term))
    return Compare(lhs if lhs is not None else Int(0), c.op, Int(-c.constant))


def _literal_vars(literal: ClpLiteral) -> List[Var]:
    return list(free_vars(literal))


def _label(store: Store, variables: List[Var]) -> Iterator[Dict[Var, int]]:
    open_vars = [v for v in variables if not store.domain(v).is_fixed()]
    if not open_vars:
        yield {v: store.domain(v).min for v in variables}
        return
    var = min(open_vars, key=lambda v: (store.domain(v).size(), v.id))
    for value in list(store.domain(var)):
        narrowed = store.copy()
        narrowed.domains[var] = Domain.range(value, value)
        if _Propagator(narrowed).run():
            yield from _label(narrowed, variables)
