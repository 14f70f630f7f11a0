"""Ground semantics of theories: well-founded models, answer checking and
brute-force model enumeration over finite universes."""

import itertools
import logging
import math
import operator
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
)

from app.core.config import settings
from app.core.exceptions import EnumerationBoundError, UnboundedUniverseError
from app.core.metrics import VERIFIER_CHECKS_TOTAL
from app.models.formula import (
    And,
    Atom,
    Bottom,
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
    Top,
    denial_as_formula,
    format_atom,
    format_formula,
    free_vars,
    predicates_of,
    substitute,
)
from app.models.term import (
    Compound,
    Const,
    Int,
    Substitution,
    Term,
    Var,
    evaluate,
    is_arithmetic,
    is_ground,
    term_vars,
)
from app.models.theory import INT_SORT, SYMBOL_SORT, PredKey, Theory
from app.models.verification import (
    CheckResult,
    Extension,
    Interpretation,
    Truth,
    term_order,
)
from app.services.transform_service import TransformService
from app.services.type_service import UNBOUNDED, TypeService

logger = logging.getLogger(__name__)

Env = Dict[Var, Term]
Guard = Tuple[Formula, bool]

_COMPARE = {
    "<": operator.lt,
    "<=": operator.le,
    "=": operator.eq,
    "!=": operator.ne,
    ">=": operator.ge,
    ">": operator.gt,
}


class VerifierService:
    @staticmethod
    def wfm(theory: Theory, open_facts: Iterable[Atom]) -> Interpretation:
        """Well-founded model of the definition extended with the open facts,
        by the alternating fixpoint"""
        return _Grounder(theory, _index(open_facts)).wfm()

    @staticmethod
    def evaluate(
        theory: Theory, model: Interpretation, formula, env: Env = None
    ) -> Truth:
        """Kleene three-valued value of a closed formula (or denial) in a model"""
        grounder = _Grounder(theory, model.open_facts)
        definitely = grounder.evaluator(model.true, model.possible)
        if definitely.truth(formula, dict(env or {}), True):
            return Truth.TRUE
        maybe = grounder.evaluator(model.possible, model.true)
        if not maybe.truth(formula, dict(env or {}), True):
            return Truth.FALSE
        return Truth.UNDEFINED

    @staticmethod
    def check_answer(
        theory: Theory,
        query: Optional[Formula],
        delta: Sequence[Atom],
        substitution: Sequence[Tuple[Var, Term]] = (),
    ) -> CheckResult:
        """Check that definition + Δ has a total well-founded model satisfying
        every axiom and the instantiated query"""
        return _AnswerChecker(theory, query).check(delta, substitution)

    @staticmethod
    def enumerate_models(
        theory: Theory, query: Optional[Formula] = None, bound: Optional[int] = None
    ) -> Iterator[FrozenSet[Atom]]:
        """Every Δ over the finite universes whose model satisfies the theory.

        Abducibles under an `ob` declaration range over injective total
        functions only; every other abducible over all subsets of its atoms.
        """
        bound = bound if bound is not None else settings.ENUMERATION_BOUND
        grounder = _Grounder(theory, {})
        base = grounder.wfm()
        functions = {(d.function_pred, 2): d for d in theory.ob_decls}

        options: List[List[Tuple[Atom, ...]]] = []
        candidates = 1
        for key in sorted(theory.abducibles):
            if key in functions:
                decl = functions[key]
                domain = _extension(base, decl.domain_spec)
                values = _extension(base, decl.range_spec)
                count = math.perm(len(values), len(domain))
                candidates *= count
                if candidates > bound:
                    raise EnumerationBoundError(candidates, bound)
                options.append(
                    [
                        tuple(Atom(key[0], (q, p)) for q, p in zip(domain, chosen))
                        for chosen in itertools.permutations(values, len(domain))
                    ]
                )
                continue
            signature = theory.signatures.get(key)
            sorts = signature.arg_sorts if signature else (None,) * key[1]
            universes = [grounder.sort_universe(s) for s in sorts]
            atoms = [Atom(key[0], args) for args in itertools.product(*universes)]
            candidates *= 2 ** len(atoms)
            if candidates > bound:
                raise EnumerationBoundError(candidates, bound)
            options.append(
                [
                    subset
                    for size in range(len(atoms) + 1)
                    for subset in itertools.combinations(atoms, size)
                ]
            )

        logger.info(
            f"Enumerating models: path={theory.path}, "
            f"candidates={candidates}, bound={bound}"
        )
        checker = _AnswerChecker(theory, query)
        found = 0
        for choice in itertools.product(*options):
            delta = tuple(itertools.chain.from_iterable(choice))
            if checker.check(delta).passed:
                found += 1
                yield frozenset(delta)
        logger.info(f"Enumeration finished: path={theory.path}, models={found}")


class _AnswerChecker:
    def __init__(self, theory: Theory, query: Optional[Formula]):
        self.theory = theory
        self.query = query
        self.axioms = list(theory.fol_axioms)
        for decl in theory.ob_decls:
            self.axioms.extend(TransformService.expand_ob(decl, theory))
        # open predicates the definition depends on; the model only changes with these
        self.relevant: Set[PredKey] = set()
        for rule in theory.definition.rules:
            self.relevant |= {
                key for key in predicates_of(rule.body) if theory.is_open(key)
            }
        self.models: Dict[FrozenSet[Atom], Interpretation] = {}

    def check(self, delta: Sequence[Atom], substitution=()) -> CheckResult:
        result = self._check(delta, substitution)
        VERIFIER_CHECKS_TOTAL.labels(result="pass" if result.passed else "fail").inc()
        return result

    def _check(self, delta: Sequence[Atom], substitution) -> CheckResult:
        theory = self.theory
        try:
            delta, substitution, extra = _skolemise(theory, delta, substitution)
        except ValueError as exc:
            return CheckResult(False, str(exc))
        _collect_constants(theory, delta, extra)
        for atom in delta:
            if theory.is_defined(atom.key):
                return CheckResult(
                    False, f"abduced atom {format_atom(atom)} has a defined predicate"
                )

        facts = _index(delta)
        grounder = _Grounder(theory, facts, extra)
        relevant = frozenset(a for a in delta if a.key in self.relevant)
        model = self.models.get(relevant)
        if model is None:
            model = grounder.wfm()
            self.models[relevant] = model
        undefined = model.undefined_atoms()
        if undefined:
            shown = ", ".join(format_atom(a) for a in undefined[:5])
            return CheckResult(
                False, f"well-founded model is not total, undefined: {shown}", total=False
            )

        evaluator = grounder.evaluator(model.true, model.true)
        for axiom in self.axioms:
            if not evaluator.truth(axiom.formula, {}, True):
                shown = format_formula(axiom.formula)
                message = f"axiom on line {axiom.line} is false: {shown}"
                witness = evaluator.witness(axiom.formula)
                if witness:
                    message += f" (instance {witness})"
                return CheckResult(False, message)
        if self.query is not None:
            instantiated = substitute(self.query, Substitution(dict(substitution)))
            if not evaluator.truth(instantiated, {}, True):
                message = f"query is false: {format_formula(instantiated)}"
                return CheckResult(False, message)
        return CheckResult(True)


class _Grounder:
    """Naive grounding of the definition over the sort universes"""

    def __init__(
        self,
        theory: Theory,
        open_facts: Extension,
        extra: Dict[str, List[Term]] = None,
    ):
        self.theory = theory
        self.open_facts = open_facts
        self.extra = extra or {}
        self.universes: Dict[Optional[str], List[Term]] = {}
        self._active: Optional[List[Term]] = None
        self.rules = [
            (rule, _sorted_vars(free_vars(rule.head) | free_vars(rule.body)))
            for rule in theory.definition.rules
        ]

    def evaluator(self, positive: Extension, negative: Extension) -> "_Evaluator":
        return _Evaluator(self, positive, negative)

    def wfm(self) -> Interpretation:
        true: Extension = self.empty()
        while True:
            possible = self.least_model(true)
            refined = self.least_model(possible)
            if refined == true:
                break
            true = refined
        return Interpretation(true, possible, self.open_facts)

    def empty(self) -> Extension:
        return {key: set() for key in self.theory.definition.defined_preds}

    def least_model(self, negative: Extension) -> Extension:
        """Least model of the definition with negative literals read in `negative`"""
        derived = self.empty()
        evaluator = self.evaluator(derived, negative)
        changed = True
        while changed:
            changed = False
            for rule, variables in self.rules:
                guards = _guards(rule.body, True)
                heads = [
                    tuple(_value(a, env) for a in rule.head.args)
                    for env in evaluator.assignments(variables, guards, {})
                    if evaluator.truth(rule.body, env, True)
                ]
                rows = derived[rule.head.key]
                for head in heads:
                    if head not in rows:
                        rows.add(head)
                        changed = True
        return derived

    def sort_universe(self, sort: Optional[str]) -> List[Term]:
        if sort not in self.universes:
            self.universes[sort] = self._universe(sort)
        return self.universes[sort]

    def _universe(self, sort: Optional[str]) -> List[Term]:
        if sort is None:
            return self.active_domain()
        universe = TypeService.herbrand_universe(self.theory, sort)
        base = self.theory.base_of(sort)
        if universe == UNBOUNDED:
            if not settings.ACTIVE_DOMAIN_FALLBACK:
                raise UnboundedUniverseError(sort)
            logger.debug(f"Using the active integer domain: sort={sort}")
            return [t for t in self.active_domain() if isinstance(t, Int)]
        return list(universe) + list(self.extra.get(base, ()))

    def active_domain(self) -> List[Term]:
        """Every ground term the theory and the open facts mention"""
        if self._active is None:
            found: Set[Term] = set()
            formulas = [r.head for r in self.theory.definition.rules]
            formulas += [r.body for r in self.theory.definition.rules]
            formulas += [a.formula for a in self.theory.fol_axioms]
            for f in formulas:
                for term in _terms(f):
                    if is_ground(term):
                        found.add(_normalize(term))
            for rows in self.open_facts.values():
                for row in rows:
                    found.update(row)
            for key in self.theory.definition.defined_preds:
                if key[1] == 1:
                    extension = TypeService.domain_extension(self.theory, key)
                    found.update(Int(v) for v in extension or ())
            for constants in self.extra.values():
                found.update(constants)
            self._active = sorted(found, key=term_order)
        return self._active


class _Evaluator:
    """Two-valued evaluation where positive occurrences of defined atoms are
    read in one extension and negative occurrences in another"""

    def __init__(self, grounder: _Grounder, positive: Extension, negative: Extension):
        self.grounder = grounder
        self.theory = grounder.theory
        self.sets = {True: positive, False: negative}

    def extension(self, key: PredKey, polarity: bool) -> Set[Tuple[Term, ...]]:
        if self.theory.is_defined(key):
            return self.sets[polarity].get(key, set())
        return self.grounder.open_facts.get(key, set())

    def truth(self, f, env: Env, polarity: bool) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bottom):
            return False
        if isinstance(f, Atom):
            row = tuple(_value(a, env) for a in f.args)
            return row in self.extension(f.key, polarity)
        if isinstance(f, Equal):
            return _value(f.lhs, env) == _value(f.rhs, env)
        if isinstance(f, Compare):
            lhs, rhs = _value(f.lhs, env), _value(f.rhs, env)
            if not isinstance(lhs, Int) or not isinstance(rhs, Int):
                return False
            return _COMPARE[f.op](lhs.value, rhs.value)
        if isinstance(f, InRange):
            values = [_value(t, env) for t in (f.term, f.lo, f.hi)]
            if not all(isinstance(v, Int) for v in values):
                return False
            term, lo, hi = (v.value for v in values)
            return lo <= term <= hi
        if isinstance(f, Not):
            return not self.truth(f.body, env, not polarity)
        if isinstance(f, And):
            return all(self.truth(item, env, polarity) for item in f.items)
        if isinstance(f, Or):
            return any(self.truth(item, env, polarity) for item in f.items)
        if isinstance(f, Implies):
            if not self.truth(f.lhs, env, not polarity):
                return True
            return self.truth(f.rhs, env, polarity)
        if isinstance(f, Exists):
            guards = _guards(f.body, polarity)
            return any(
                self.truth(f.body, sigma, polarity)
                for sigma in self.assignments(f.vars, guards, env)
            )
        if isinstance(f, Forall):
            guards = _refuters(f.body, polarity)
            return all(
                self.truth(f.body, sigma, polarity)
                for sigma in self.assignments(f.vars, guards, env)
            )
        if isinstance(f, Denial):
            return self.truth(denial_as_formula(f), env, polarity)
        raise TypeError(f"Cannot evaluate {f!r}")

    def witness(self, f) -> Optional[str]:
        """A falsifying instance of a universally quantified formula"""
        variables: List[Var] = []
        body = f
        while isinstance(body, Forall):
            variables.extend(body.vars)
            body = body.body
        if not variables:
            return None
        for sigma in self.assignments(variables, _refuters(body, True), {}):
            if not self.truth(body, sigma, True):
                return ", ".join(f"{v}={sigma[v]}" for v in variables)
        return None

    def assignments(
        self, variables: Sequence[Var], guards: List[Guard], env: Env
    ) -> Iterator[Env]:
        """Candidate values for the variables: matches of guard literals first,
        the sort universe for variables no guard binds"""
        unbound = [v for v in variables if v not in env]
        if not unbound:
            yield env
            return
        targets = set(unbound)
        for literal, polarity in guards:
            bindings = self.candidates(literal, polarity, env, targets)
            if bindings is not None:
                for binding in bindings:
                    yield from self.assignments(variables, guards, {**env, **binding})
                return
        var = unbound[0]
        for value in self.grounder.sort_universe(self.theory.sort_of_var(var)):
            yield from self.assignments(variables, guards, {**env, var: value})

    def candidates(
        self, literal: Formula, polarity: bool, env: Env, targets: Set[Var]
    ) -> Optional[List[Env]]:
        if isinstance(literal, Atom):
            args = [_resolve(a, env) for a in literal.args]
            if not any(isinstance(a, Var) and a in targets for a in args):
                return None
            found: Dict[tuple, Env] = {}
            for row in self.extension(literal.key, polarity):
                binding: Env = {}
                for arg, value in zip(args, row):
                    if isinstance(arg, Var) and arg in targets:
                        if binding.setdefault(arg, value) != value:
                            break
                    elif is_ground(arg) and _normalize(arg) != value:
                        break
                else:
                    found[tuple(sorted(binding.items(), key=lambda b: b[0].id))] = binding
            return list(found.values())
        equation = isinstance(literal, Compare) and literal.op == "="
        if isinstance(literal, Equal) or equation:
            for x, t in ((literal.lhs, literal.rhs), (literal.rhs, literal.lhs)):
                x, t = _resolve(x, env), _resolve(t, env)
                if isinstance(x, Var) and x in targets and is_ground(t):
                    return [{x: _normalize(t)}]
            return None
        if isinstance(literal, InRange):
            term = _resolve(literal.term, env)
            if not (isinstance(term, Var) and term in targets):
                return None
            lo, hi = (_normalize(_resolve(b, env)) for b in (literal.lo, literal.hi))
            if isinstance(lo, Int) and isinstance(hi, Int):
                return [{term: Int(v)} for v in range(lo.value, hi.value + 1)]
        return None


def _guards(f, polarity: bool) -> List[Guard]:
    """Literals (with the polarity they are read at) that hold whenever f holds"""
    if isinstance(f, (Atom, Equal, Compare, InRange)):
        return [(f, polarity)]
    if isinstance(f, And):
        return [g for item in f.items for g in _guards(item, polarity)]
    if isinstance(f, Exists):
        return _guards(f.body, polarity)
    if isinstance(f, Not):
        return _refuters(f.body, not polarity)
    return []


def _refuters(f, polarity: bool) -> List[Guard]:
    """Literals that hold whenever f fails"""
    if isinstance(f, Or):
        return [g for item in f.items for g in _refuters(item, polarity)]
    if isinstance(f, Implies):
        return _guards(f.lhs, not polarity) + _refuters(f.rhs, polarity)
    if isinstance(f, Not):
        return _guards(f.body, not polarity)
    if isinstance(f, Forall):
        return _refuters(f.body, polarity)
    return []


def _resolve(term: Term, env: Env) -> Term:
    if isinstance(term, Var):
        return env.get(term, term)
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_resolve(a, env) for a in term.args))
    return term


def _normalize(term: Term) -> Term:
    if is_arithmetic(term):
        value = evaluate(term)
        return Int(value) if isinstance(value, int) else term
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_normalize(a) for a in term.args))
    return term


def _value(term: Term, env: Env) -> Term:
    value = _normalize(_resolve(term, env))
    if not is_ground(value):
        raise ValueError(f"Unbound variable in {term}")
    return value


def _extension(model: Interpretation, pred: str) -> List[Term]:
    return sorted((row[0] for row in model.true.get((pred, 1), ())), key=term_order)


def _sorted_vars(variables) -> List[Var]:
    return sorted(variables, key=lambda v: v.id)


def _index(atoms: Iterable[Atom]) -> Extension:
    facts: Extension = {}
    for atom in atoms:
        facts.setdefault(atom.key, set()).add(tuple(_normalize(a) for a in atom.args))
    return facts


def _terms(f) -> Iterator[Term]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            yield from g.args
        elif isinstance(g, (Equal, Compare)):
            yield from (g.lhs, g.rhs)
        elif isinstance(g, InRange):
            yield from (g.term, g.lo, g.hi)
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend(g.items)
        elif isinstance(g, (Exists, Forall)):
            stack.append(g.body)
        elif isinstance(g, Implies):
            stack.extend((g.lhs, g.rhs))


def _skolemise(theory: Theory, delta: Sequence[Atom], substitution):
    """Replace answer variables by fresh constants of their position's sort"""
    constants: Dict[Var, Const] = {}
    extra: Dict[str, List[Term]] = {}
    counter = itertools.count(1)

    def name(term: Term, sort: Optional[str]) -> None:
        for var in sorted(set(term_vars(term)), key=lambda v: v.id):
            if var in constants:
                continue
            base = theory.base_of(sort) if sort else SYMBOL_SORT
            if base == INT_SORT:
                raise ValueError(f"answer leaves integer variable {var} unlabeled")
            constants[var] = Const(f"sk_{next(counter)}")
            extra.setdefault(base, []).append(constants[var])

    for atom in delta:
        signature = theory.signatures.get(atom.key)
        for i, arg in enumerate(atom.args):
            name(arg, signature.arg_sorts[i] if signature else None)
    for var, term in substitution:
        name(term, theory.sort_of_var(var))
    if not constants:
        return list(delta), list(substitution), extra
    theta = Substitution(constants)
    return (
        [substitute(a, theta) for a in delta],
        [(v, theta.apply(t)) for v, t in substitution],
        extra,
    )


def _collect_constants(theory: Theory, delta: Sequence[Atom], extra) -> None:
    """Constants an answer introduces join the universe of their sort"""
    for atom in delta:
        signature = theory.signatures.get(atom.key)
        for i, arg in enumerate(atom.args):
            if not isinstance(arg, Const) or arg.name in theory.constant_sorts:
                continue
            sort = signature.arg_sorts[i] if signature else None
            base = theory.base_of(sort) if sort else SYMBOL_SORT
            known = extra.setdefault(base, [])
            if arg not in known:
                known.append(arg)
