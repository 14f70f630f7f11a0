"""Formulas, denials and their concrete-syntax printer."""

from dataclasses import dataclass
from typing import FrozenSet, Iterator, Set, Tuple, Union

from app.models.term import Substitution, Term, Var, term_vars

COMPARISON_OPS = ("<", "<=", "=", "!=", ">=", ">")

# Concrete spelling of the comparison operators
OP_SYNTAX = {"<": "<", "<=": "=<", "=": "=", "!=": "\\=", ">=": ">=", ">": ">"}

NEGATED_OP = {"<": ">=", "<=": ">", "=": "!=", "!=": "=", ">=": "<", ">": "<="}


@dataclass(frozen=True, slots=True)
class Top:
    pass


@dataclass(frozen=True, slots=True)
class Bottom:
    pass


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: Tuple[Term, ...] = ()

    @property
    def key(self) -> Tuple[str, int]:
        return (self.pred, len(self.args))


@dataclass(frozen=True, slots=True)
class Equal:
    lhs: Term
    rhs: Term


@dataclass(frozen=True, slots=True)
class Compare:
    """Linear integer comparison, one of the finite-domain constraint literals"""

    lhs: Term
    op: str
    rhs: Term


@dataclass(frozen=True, slots=True)
class InRange:
    """`X in L..U`, the domain constraint literal"""

    term: Term
    lo: Term
    hi: Term


@dataclass(frozen=True, slots=True)
class Not:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    items: Tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class Or:
    items: Tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class Exists:
    vars: Tuple[Var, ...]
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Forall:
    vars: Tuple[Var, ...]
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True, slots=True)
class Residual:
    """`a(t) ∧ ¬(t = s1 ∨ … ∨ t = sn)` inside a denial.

    `excluded` lists the argument tuples of the abduced atoms this literal has
    already been resolved against.
    """

    atom: Atom
    excluded: Tuple[Tuple[Term, ...], ...] = ()


ClpLiteral = Union[Compare, InRange]

Formula = Union[
    Top, Bottom, Atom, Equal, Compare, InRange, Not, And, Or, Exists, Forall,
    Implies, Residual,
]


@dataclass(frozen=True, slots=True)
class Denial:
    """∀ uvars ← body[0] ∧ … ∧ body[n-1]; an empty body reads `← true`"""

    uvars: FrozenSet[Var]
    body: Tuple[Formula, ...]


Goal = Union[Formula, Denial]


def conjoin(items) -> Formula:
    items = tuple(items)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(items)


def disjoin(items) -> Formula:
    items = tuple(items)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(items)


def conjuncts(formula: Formula) -> Iterator[Formula]:
    """Flatten nested conjunctions, dropping `true`"""
    if isinstance(formula, And):
        for item in formula.items:
            yield from conjuncts(item)
    elif not isinstance(formula, Top):
        yield formula


def is_clp(formula: Formula) -> bool:
    return isinstance(formula, (Compare, InRange))


def free_vars(formula: Union[Formula, Denial]) -> Set[Var]:
    found: Set[Var] = set()
    _collect_free(formula, frozenset(), found)
    return found


def _collect_free(f, bound: FrozenSet[Var], found: Set[Var]) -> None:
    if isinstance(f, Atom):
        terms = f.args
    elif isinstance(f, (Equal, Compare)):
        terms = (f.lhs, f.rhs)
    elif isinstance(f, InRange):
        terms = (f.term, f.lo, f.hi)
    elif isinstance(f, Residual):
        terms = f.atom.args + tuple(t for row in f.excluded for t in row)
    elif isinstance(f, Not):
        _collect_free(f.body, bound, found)
        return
    elif isinstance(f, (And, Or)):
        for item in f.items:
            _collect_free(item, bound, found)
        return
    elif isinstance(f, (Exists, Forall)):
        _collect_free(f.body, bound | frozenset(f.vars), found)
        return
    elif isinstance(f, Implies):
        _collect_free(f.lhs, bound, found)
        _collect_free(f.rhs, bound, found)
        return
    elif isinstance(f, Denial):
        inner = bound | f.uvars
        for item in f.body:
            _collect_free(item, inner, found)
        return
    else:
        return
    for term in terms:
        for v in term_vars(term):
            if v not in bound:
                found.add(v)


def substitute(f, theta: Substitution):
    """Apply a substitution to a formula or denial.

    Binders are unique per derivation, so a substitution never captures and
    never mentions a bound variable.
    """
    if not theta:
        return f
    ap = theta.apply
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(ap(a) for a in f.args)) if f.args else f
    if isinstance(f, Equal):
        return Equal(ap(f.lhs), ap(f.rhs))
    if isinstance(f, Compare):
        return Compare(ap(f.lhs), f.op, ap(f.rhs))
    if isinstance(f, InRange):
        return InRange(ap(f.term), ap(f.lo), ap(f.hi))
    if isinstance(f, Residual):
        return Residual(
            substitute(f.atom, theta),
            tuple(tuple(ap(t) for t in row) for row in f.excluded),
        )
    if isinstance(f, Not):
        return Not(substitute(f.body, theta))
    if isinstance(f, And):
        return And(tuple(substitute(i, theta) for i in f.items))
    if isinstance(f, Or):
        return Or(tuple(substitute(i, theta) for i in f.items))
    if isinstance(f, Exists):
        return Exists(f.vars, substitute(f.body, theta))
    if isinstance(f, Forall):
        return Forall(f.vars, substitute(f.body, theta))
    if isinstance(f, Implies):
        return Implies(substitute(f.lhs, theta), substitute(f.rhs, theta))
    if isinstance(f, Denial):
        return Denial(f.uvars, tuple(substitute(i, theta) for i in f.body))
    return f


def denial_as_formula(denial: Denial) -> Formula:
    """Read a denial back as the classical formula ¬∃uvars. body"""
    body = conjoin(denial.body)
    if denial.uvars:
        body = Exists(tuple(sorted(denial.uvars, key=lambda v: v.id)), body)
    return Not(body)


# Printer. Precedence levels: 0 implication, 1 disjunction, 2 conjunction, 3 unary.


def format_formula(f, level: int = 0) -> str:
    if isinstance(f, Denial):
        return format_denial(f)
    text, own = _format(f)
    if own < level:
        return f"({text})"
    return text


def _args(args) -> str:
    return ", ".join(str(a) for a in args)


def format_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.pred
    return f"{atom.pred}({_args(atom.args)})"


def _format(f) -> Tuple[str, int]:
    if isinstance(f, Top):
        return "true", 3
    if isinstance(f, Bottom):
        return "false", 3
    if isinstance(f, Atom):
        return format_atom(f), 3
    if isinstance(f, Equal):
        return f"{f.lhs} = {f.rhs}", 3
    if isinstance(f, Compare):
        return f"{f.lhs} {OP_SYNTAX[f.op]} {f.rhs}", 3
    if isinstance(f, InRange):
        return f"{f.term} in {f.lo}..{f.hi}", 3
    if isinstance(f, Residual):
        return _format(_residual_formula(f))
    if isinstance(f, Not):
        return f"not {format_formula(f.body, 3)}", 3
    if isinstance(f, And):
        return ", ".join(format_formula(i, 3) for i in f.items), 2
    if isinstance(f, Or):
        return "; ".join(format_formula(i, 2) for i in f.items), 1
    if isinstance(f, (Exists, Forall)):
        quant = "exists" if isinstance(f, Exists) else "forall"
        # the quantifier scope stops at ';', so a disjunctive body needs parentheses
        return f"{quant}({_args(f.vars)})$ {format_formula(f.body, 2)}", 0
    if isinstance(f, Implies):
        return f"{format_formula(f.lhs, 1)} => {format_formula(f.rhs, 0)}", 0
    raise TypeError(f"Not a formula: {f!r}")


def _residual_formula(r: Residual) -> Formula:
    if not r.excluded:
        return r.atom
    alternatives = [
        conjoin(Equal(t, s) for t, s in zip(r.atom.args, row)) for row in r.excluded
    ]
    return And((r.atom, Not(disjoin(alternatives))))


def format_denial(d: Denial) -> str:
    body = format_formula(conjoin(d.body), 3) if d.body else "true"
    if d.uvars:
        names = _args(sorted(d.uvars, key=lambda v: v.id))
        return f"forall({names})$ not {body}"
    return f"not {body}"


def predicates_of(f) -> Set[Tuple[str, int]]:
    found: Set[Tuple[str, int]] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            found.add(g.key)
        elif isinstance(g, Residual):
            found.add(g.atom.key)
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend(g.items)
        elif isinstance(g, (Exists, Forall)):
            stack.append(g.body)
        elif isinstance(g, Implies):
            stack.extend((g.lhs, g.rhs))
        elif isinstance(g, Denial):
            stack.extend(g.body)
    return found
