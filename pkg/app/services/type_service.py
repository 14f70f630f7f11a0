import itertools
import logging
from typing import Dict, Hashable, Iterable, List, Optional, Set, Tuple, Union

from app.core.exceptions import TypeCheckError
from app.models.formula import (
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
    conjuncts,
    predicates_of,
)
from app.models.term import (
    Const,
    Int,
    Substitution,
    Term,
    Var,
    evaluate,
    is_arithmetic,
    is_ground,
)
from app.models.theory import (
    INT_SORT,
    SYMBOL_SORT,
    PredKey,
    Signature,
    SignatureOrigin,
    Theory,
    pred_label,
)
from app.schemas.diagnostic import Diagnostic

logger = logging.getLogger(__name__)

UNBOUNDED = "unbounded"

Universe = Union[List[Term], str]


class _SortClasses:
    """Union-find over sort nodes.

    A class carries the sort names forced on it and whether a symbolic
    constant lives in it.
    """

    def __init__(self, bases: Dict[str, str]):
        self.bases = bases
        self.parent: Dict[Hashable, Hashable] = {}
        self.labels: Dict[Hashable, Set[str]] = {}
        self.symbolic: Dict[Hashable, bool] = {}
        self._fresh = itertools.count()

    def node(self, key: Hashable) -> Hashable:
        if key not in self.parent:
            self.parent[key] = key
            self.labels[key] = set()
            self.symbolic[key] = False
        return key

    def fresh(self, label: Optional[str] = None) -> Hashable:
        key = self.node(("anon", next(self._fresh)))
        if label:
            self.labels[key].add(label)
        return key

    def find(self, key: Hashable) -> Hashable:
        self.node(key)
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def conflict(self, labels: Set[str], symbolic: bool) -> Optional[str]:
        bases = {self.bases.get(label, label) for label in labels}
        if len(bases) > 1:
            return " and ".join(sorted(labels))
        if symbolic and bases == {INT_SORT}:
            return f"{' and '.join(sorted(labels))} and a symbolic constant"
        return None

    def add_label(self, key: Hashable, label: str) -> Optional[str]:
        root = self.find(key)
        labels = self.labels[root] | {label}
        problem = self.conflict(labels, self.symbolic[root])
        if problem is None:
            self.labels[root] = labels
        return problem

    def mark_symbolic(self, key: Hashable) -> Optional[str]:
        root = self.find(key)
        problem = self.conflict(self.labels[root], True)
        if problem is None:
            self.symbolic[root] = True
        return problem

    def union(self, a: Hashable, b: Hashable) -> Optional[str]:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return None
        labels = self.labels[ra] | self.labels[rb]
        symbolic = self.symbolic[ra] or self.symbolic[rb]
        problem = self.conflict(labels, symbolic)
        if problem is not None:
            return problem
        self.parent[rb] = ra
        self.labels[ra] = labels
        self.symbolic[ra] = symbolic
        return None

    def sort_of(self, key: Hashable, preferred: Optional[str] = None) -> Optional[str]:
        root = self.find(key)
        labels = self.labels[root]
        if preferred is not None and preferred in labels:
            return preferred
        if not labels:
            return SYMBOL_SORT if self.symbolic[root] else None
        aliases = sorted(
            label for label in labels if self.bases.get(label, label) != label
        )
        if aliases:
            return aliases[0]
        return sorted(labels)[0]


def _describe(key: Hashable) -> str:
    kind = key[0]
    if kind == "var":
        return f"variable {key[1].name}"
    if kind == "const":
        return f"constant {key[1]}"
    if kind == "arg":
        return f"argument {key[3] + 1} of {key[1]}/{key[2]}"
    if kind == "fn" and key[3] == "result":
        return f"a term built with {key[1]}/{key[2]}"
    if kind == "fn":
        return f"argument {key[3] + 1} of function {key[1]}/{key[2]}"
    return "expression"


class _Checker:
    def __init__(self, theory: Theory):
        self.theory = theory
        self.diagnostics: List[Diagnostic] = []
        self.bases = self._resolve_aliases()
        self.classes = _SortClasses(self.bases)
        self.arities: Dict[str, Tuple[int, int]] = {}
        self.line = 0
        self.variables: Set[Var] = set()
        self.constants: Set[str] = set()

    def error(self, message: str, line: Optional[int] = None) -> None:
        self.diagnostics.append(
            Diagnostic(
                path=self.theory.path,
                line=self.line if line is None else line,
                message=message,
            )
        )

    def _resolve_aliases(self) -> Dict[str, str]:
        aliases = {d.name: d for d in self.theory.type_decls}
        bases: Dict[str, str] = {INT_SORT: INT_SORT, SYMBOL_SORT: SYMBOL_SORT}
        for name, decl in aliases.items():
            seen = [name]
            current = decl.base
            while current in aliases:
                if current in seen:
                    chain = " -> ".join(seen + [current])
                    self.error(
                        f"type_instance chain through {chain} is cyclic", decl.line
                    )
                    current = INT_SORT
                    break
                seen.append(current)
                current = aliases[current].base
            bases[name] = current
        for sig in self.theory.declared_signatures.values():
            for sort in sig.arg_sorts:
                bases.setdefault(sort, sort)
        return bases

    def merge(self, a: Hashable, b: Hashable) -> None:
        problem = self.classes.union(a, b)
        if problem is not None:
            self.error(f"sort clash: {_describe(a)} is used at sorts {problem}")

    def force(self, key: Hashable, label: str) -> None:
        problem = self.classes.add_label(key, label)
        if problem is not None:
            self.error(f"sort clash: {_describe(key)} is used at sorts {problem}")

    # Terms

    def term(self, t: Term) -> Hashable:
        if isinstance(t, Var):
            self.variables.add(t)
            return self.classes.node(("var", t))
        if isinstance(t, Const):
            self.constants.add(t.name)
            key = self.classes.node(("const", t.name))
            problem = self.classes.mark_symbolic(key)
            if problem is not None:
                self.error(f"sort clash: constant {t.name} is used at sorts {problem}")
            return key
        if isinstance(t, Int):
            return self.classes.fresh(INT_SORT)
        if is_arithmetic(t):
            result = self.classes.fresh(INT_SORT)
            for arg in t.args:
                self.merge(result, self.term(arg))
            return result
        arity = len(t.args)
        for i, arg in enumerate(t.args):
            self.merge(self.classes.node(("fn", t.functor, arity, i)), self.term(arg))
        result = self.classes.node(("fn", t.functor, arity, "result"))
        self.classes.mark_symbolic(result)
        return result

    def atom(self, atom: Atom) -> None:
        name, arity = atom.key
        seen = self.arities.setdefault(name, (arity, self.line))
        if seen[0] != arity:
            self.error(
                f"arity clash: {name} is used with arity {arity} here "
                f"and arity {seen[0]} on line {seen[1]}"
            )
            return
        for i, arg in enumerate(atom.args):
            self.merge(self.classes.node(("arg", name, arity, i)), self.term(arg))

    def formula(self, f) -> None:
        if isinstance(f, Atom):
            self.atom(f)
        elif isinstance(f, Residual):
            self.atom(f.atom)
        elif isinstance(f, Equal):
            self.merge(self.term(f.lhs), self.term(f.rhs))
        elif isinstance(f, Compare):
            lhs, rhs = self.term(f.lhs), self.term(f.rhs)
            self.force(lhs, INT_SORT)
            self.force(rhs, INT_SORT)
            self.merge(lhs, rhs)
        elif isinstance(f, InRange):
            nodes = [self.term(side) for side in (f.term, f.lo, f.hi)]
            for node in nodes:
                self.force(node, INT_SORT)
            self.merge(nodes[0], nodes[1])
            self.merge(nodes[0], nodes[2])
        elif isinstance(f, Not):
            self.formula(f.body)
        elif isinstance(f, (And, Or)):
            for item in f.items:
                self.formula(item)
        elif isinstance(f, (Exists, Forall)):
            for v in f.vars:
                self.term(v)
            self.formula(f.body)
        elif isinstance(f, Implies):
            self.formula(f.lhs)
            self.formula(f.rhs)
        elif isinstance(f, Denial):
            for v in f.uvars:
                self.term(v)
            for literal in f.body:
                self.formula(literal)

    def run(self, query: Optional[Formula]) -> None:
        theory = self.theory
        for key, sig in theory.declared_signatures.items():
            self.line = sig.line
            self.arities.setdefault(key[0], (key[1], sig.line))
            for i, sort in enumerate(sig.arg_sorts):
                self.force(self.classes.node(("arg", key[0], key[1], i)), sort)
        for rule in theory.definition.rules:
            self.line = rule.line
            self.atom(rule.head)
            self.formula(rule.body)
        for axiom in theory.fol_axioms:
            self.line = axiom.line
            self.formula(axiom.formula)
        for decl in theory.ob_decls:
            self.line = decl.line
            # malformed declarations are reported by expand_ob
            if self.arities.get(decl.function_pred, (2,))[0] != 2:
                continue
            for i, spec in enumerate((decl.domain_spec, decl.range_spec)):
                if self.arities.get(spec, (1,))[0] == 1:
                    self.merge(
                        self.classes.node(("arg", spec, 1, 0)),
                        self.classes.node(("arg", decl.function_pred, 2, i)),
                    )
        if query is not None:
            self.line = 0
            self.formula(query)

    def signatures(self, keys: Iterable[PredKey]) -> Dict[PredKey, Signature]:
        result: Dict[PredKey, Signature] = {}
        for key in sorted(keys):
            declared = self.theory.declared_signatures.get(key)
            sorts: List[str] = []
            unresolved = []
            for i in range(key[1]):
                preferred = declared.arg_sorts[i] if declared else None
                sort = self.classes.sort_of(("arg", key[0], key[1], i), preferred)
                if sort is None:
                    unresolved.append(i + 1)
                    sort = SYMBOL_SORT
                sorts.append(sort)
            if unresolved:
                positions = ", ".join(str(p) for p in unresolved)
                self.error(
                    f"cannot infer the sort of argument(s) {positions} of "
                    f"{pred_label(key)}; add a signature declaration",
                    declared.line if declared else 0,
                )
            if declared:
                result[key] = declared
            else:
                result[key] = Signature(key, tuple(sorts), SignatureOrigin.INFERRED)
        return result


class TypeService:
    @staticmethod
    def check_and_infer(theory: Theory, query: Optional[Formula] = None) -> Theory:
        """Type check a parsed theory (and query), filling in every signature"""
        checker = _Checker(theory)
        checker.run(query)
        keys = set(theory.predicates()) | set(theory.declared_signatures)
        if query is not None:
            keys |= predicates_of(query)
        signatures = checker.signatures(keys)

        if checker.diagnostics:
            logger.warning(
                f"Type check failed: path={theory.path}, "
                f"errors={len(checker.diagnostics)}"
            )
            raise TypeCheckError(checker.diagnostics)

        classes = checker.classes
        theory.signatures = signatures
        theory.sort_bases = dict(checker.bases)
        theory.constant_sorts = {
            name: classes.sort_of(("const", name)) for name in sorted(checker.constants)
        }
        theory.var_sorts = {}
        for v in checker.variables:
            sort = classes.sort_of(("var", v))
            if sort is not None:
                theory.var_sorts[v] = sort
        for sort in list(theory.signatures.values()):
            for name in sort.arg_sorts:
                theory.sort_bases.setdefault(name, name)

        inferred = sum(
            1 for s in signatures.values() if s.origin == SignatureOrigin.INFERRED
        )
        logger.info(
            f"Theory typed: path={theory.path}, predicates={len(signatures)}, "
            f"inferred={inferred}, constants={len(theory.constant_sorts)}"
        )
        return theory

    @staticmethod
    def herbrand_universe(theory: Theory, sort: str) -> Universe:
        """The finite set of terms of a sort, or UNBOUNDED.

        Integer sorts are finite when some unary defined predicate of exactly
        that sort bounds its argument with `X in L..U`.
        """
        base = theory.base_of(sort)
        if base != INT_SORT:
            return sorted(
                (
                    Const(name)
                    for name, s in theory.constant_sorts.items()
                    if s is not None and theory.base_of(s) == base
                ),
                key=lambda c: c.name,
            )
        if sort == INT_SORT:
            return UNBOUNDED
        values: Set[int] = set()
        found = False
        for key, sig in theory.signatures.items():
            if key[1] != 1 or sig.arg_sorts[0] != sort or not theory.is_defined(key):
                continue
            extension = TypeService.domain_extension(theory, key)
            if extension is None:
                continue
            found = True
            values.update(extension)
        if not found:
            return UNBOUNDED
        return [Int(v) for v in sorted(values)]

    @staticmethod
    def domain_extension(theory: Theory, key: PredKey) -> Optional[Set[int]]:
        """Integer extension of a unary predicate defined by ranges, or None"""
        rules = theory.definition.rules_for(key)
        if not rules:
            return None
        values: Set[int] = set()
        bounded = False
        for rule in rules:
            head = rule.head.args[0]
            if isinstance(head, Int):
                values.add(head.value)
                continue
            if not isinstance(head, Var):
                return None
            literals = list(conjuncts(_strip_exists(rule.body)))
            ranges = [
                lit for lit in literals if isinstance(lit, InRange) and lit.term == head
            ]
            if not ranges:
                return None
            bounded = True
            for binding in _fact_bindings(theory, literals):
                lo = evaluate(binding.apply(ranges[0].lo))
                hi = evaluate(binding.apply(ranges[0].hi))
                if not isinstance(lo, int) or not isinstance(hi, int):
                    return None
                span = set(range(lo, hi + 1))
                for extra in ranges[1:]:
                    elo = evaluate(binding.apply(extra.lo))
                    ehi = evaluate(binding.apply(extra.hi))
                    if not isinstance(elo, int) or not isinstance(ehi, int):
                        return None
                    span &= set(range(elo, ehi + 1))
                values |= span
        return values if bounded else None

    @staticmethod
    def fact_values(theory: Theory, key: PredKey) -> Optional[List[Tuple[Term, ...]]]:
        """Ground argument tuples of a predicate defined only by facts"""
        rules = theory.definition.rules_for(key)
        if not rules:
            return None
        rows = []
        for rule in rules:
            ground_head = all(is_ground(a) for a in rule.head.args)
            if list(conjuncts(rule.body)) or not ground_head:
                return None
            rows.append(tuple(rule.head.args))
        return rows


def _strip_exists(f: Formula) -> Formula:
    while isinstance(f, Exists):
        f = f.body
    return f


def _fact_bindings(theory: Theory, literals: List[Formula]):
    """Substitutions for the variables bound by fact-only atoms among literals"""
    bindings = [Substitution()]
    for literal in literals:
        if not isinstance(literal, Atom) or not theory.is_defined(literal.key):
            continue
        rows = TypeService.fact_values(theory, literal.key)
        if rows is None:
            continue
        extended = []
        for theta in bindings:
            for row in rows:
                mapping = dict(theta.items())
                ok = True
                for arg, value in zip(literal.args, row):
                    arg = theta.apply(arg)
                    if isinstance(arg, Var):
                        mapping[arg] = value
                    elif arg != value:
                        ok = False
                        break
                if ok:
                    extended.append(Substitution(mapping))
        bindings = extended
    return bindings
