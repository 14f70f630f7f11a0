"""First-order terms and substitutions."""

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

ARITHMETIC_FUNCTORS = frozenset({"+", "-", "*"})
_PRECEDENCE = {"+": 1, "-": 1, "*": 2}

_var_ids = itertools.count(1)


@dataclass(frozen=True, slots=True)
class Var:
    """A logic variable; identity is the numeric id, the name is for printing"""

    id: int
    name: str = field(compare=False)

    @classmethod
    def fresh(cls, name: str = "V") -> "Var":
        base = name.split("_")[0] or "V"
        new_id = next(_var_ids)
        return cls(new_id, f"{base}_{new_id}")

    @classmethod
    def named(cls, name: str) -> "Var":
        return cls(next(_var_ids), name)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Int:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("Compound terms need at least one argument")

    def __str__(self) -> str:
        if self.functor in ARITHMETIC_FUNCTORS and len(self.args) == 2:
            left, right = self.args
            outer = _PRECEDENCE[self.functor]
            return (
                f"{_arith_operand(left, outer, False)} {self.functor} "
                f"{_arith_operand(right, outer, True)}"
            )
        return f"{self.functor}({', '.join(str(a) for a in self.args)})"


Term = Union[Var, Int, Const, Compound]


def _arith_operand(term: "Term", outer: int, right: bool) -> str:
    if is_arithmetic(term):
        inner = _PRECEDENCE[term.functor]
        if inner < outer or (right and inner == outer):
            return f"({term})"
    if isinstance(term, Int) and term.value < 0:
        return f"({term})"
    return str(term)


def is_arithmetic(term: Term) -> bool:
    return (
        isinstance(term, Compound)
        and term.functor in ARITHMETIC_FUNCTORS
        and len(term.args) == 2
    )


def term_vars(term: Term) -> Iterator[Var]:
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield t
        elif isinstance(t, Compound):
            stack.extend(t.args)


def is_ground(term: Term) -> bool:
    return next(term_vars(term), None) is None


def occurs(var: Var, term: Term) -> bool:
    return any(v == var for v in term_vars(term))


def evaluate(term: Term) -> Union[int, Term]:
    """Evaluate ground integer arithmetic; other terms are returned unchanged"""
    if isinstance(term, Int):
        return term.value
    if is_arithmetic(term):
        left, right = (evaluate(a) for a in term.args)
        if isinstance(left, int) and isinstance(right, int):
            if term.functor == "+":
                return left + right
            if term.functor == "-":
                return left - right
            return left * right
    return term


class Substitution:
    """An idempotent finite map from variables to terms"""

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Mapping[Var, Term] = None):
        self._bindings: Dict[Var, Term] = dict(bindings or {})

    def __contains__(self, var: Var) -> bool:
        return var in self._bindings

    def __len__(self) -> int:
        return len(self._bindings)

    def __bool__(self) -> bool:
        return bool(self._bindings)

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._bindings == other._bindings

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}->{t}" for v, t in self._bindings.items())
        return f"{{{inner}}}"

    def items(self) -> Iterable[Tuple[Var, Term]]:
        return self._bindings.items()

    def get(self, var: Var, default=None):
        return self._bindings.get(var, default)

    def domain(self) -> frozenset:
        return frozenset(self._bindings)

    def apply(self, term: Term) -> Term:
        if not self._bindings:
            return term
        if isinstance(term, Var):
            return self._bindings.get(term, term)
        if isinstance(term, Compound):
            args = tuple(self.apply(a) for a in term.args)
            if args == term.args:
                return term
            return Compound(term.functor, args)
        return term

    def restrict(self, variables: Iterable[Var]) -> "Substitution":
        keep = set(variables)
        return Substitution({v: t for v, t in self._bindings.items() if v in keep})
