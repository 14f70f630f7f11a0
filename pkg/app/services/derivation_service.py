"""The abductive derivation engine.

A derivation rewrites a state (Θ, Δ, CS) one selected goal at a time until
every goal left is a denial in success form, the constraint store is labeled,
and the query's bindings plus the abduced atoms form an answer.
"""

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

from app.core.config import settings
from app.core.metrics import (
    DERIVATION_DURATION_SECONDS,
    DERIVATION_OUTCOMES_TOTAL,
    LABELINGS_TOTAL,
    RULE_APPLICATIONS_TOTAL,
)
from app.models.derivation import (
    Answer,
    Floundering,
    Outcome,
    OutcomeKind,
    State,
    TraceEvent,
)
from app.models.formula import (
    FALSE,
    NEGATED_OP,
    TRUE,
    And,
    Atom,
    Bottom,
    Compare,
    Denial,
    Equal,
    Exists,
    Formula,
    Goal,
    InRange,
    Not,
    Or,
    Residual,
    Top,
    conjuncts,
    format_formula,
    free_vars,
    is_clp,
    substitute,
)
from app.models.store import Store
from app.models.term import (
    Int,
    Substitution,
    Term,
    Var,
    is_arithmetic,
    occurs,
    term_vars,
)
from app.models.theory import Completion, PredKey, TransformedTheory
from app.services.constraint_service import INFINITE, ConstraintService
from app.services.term_service import TermService
from app.services.transform_service import TransformService, positive

logger = logging.getLogger(__name__)

# Goal selection priorities, lowest first
SIMPLIFY, UNFOLD, CONSTRAIN, RESOLVE, BRANCH, ABDUCE = range(6)

Successors = List[State]
DeltaIndex = Dict[PredKey, List[Tuple[Term, ...]]]
Trace = Callable[[TraceEvent], None]


@dataclass(frozen=True)
class Selection:
    index: int
    goal: Goal
    priority: int
    rule: str
    apply: Callable[[], Successors] = field(compare=False, repr=False)


class DerivationService:
    @staticmethod
    def initial_state(transformed: TransformedTheory, query: Formula) -> State:
        """Θ holds the query and every denial of the theory; Δ and CS start empty"""
        query_vars = sorted(free_vars(query), key=lambda v: v.id)
        goals = (positive(query),) + tuple(transformed.goals)
        return State(goals=goals, answer=tuple((v, v) for v in query_vars))

    @staticmethod
    def select(
        state: State, transformed: TransformedTheory, reuse: bool = True
    ) -> Union[Selection, Floundering, None]:
        """The next goal to rewrite, a Floundering when only unsafe goals
        remain, or None when the state is saturated."""
        return _Engine(transformed.completion, reuse).select(state)

    @staticmethod
    def step(
        state: State, goal: Goal, transformed: TransformedTheory, reuse: bool = True
    ) -> Union[Successors, Floundering]:
        """Rewrite one goal of the state; an empty list is a failed branch"""
        if goal not in state.goals:
            raise ValueError(f"Goal is not in the state: {format_formula(goal)}")
        engine = _Engine(transformed.completion, reuse)
        index = state.goals.index(goal)
        plan = engine.plan(state, index, goal, state.delta_index())
        if plan is None:
            raise ValueError(f"Goal is already in success form: {format_formula(goal)}")
        if isinstance(plan, Floundering):
            return plan
        return plan.apply()

    @staticmethod
    def success_check(state: State) -> bool:
        """Every goal is a denial in success form and the store has a solution"""
        delta = state.delta_index()
        for goal in state.goals:
            if not isinstance(goal, Denial) or _unanchored(goal, state):
                return False
            if not _parked(goal, state.store, delta):
                return False
        return ConstraintService.is_satisfiable(state.store)

    @staticmethod
    def run(
        transformed: TransformedTheory,
        query: Formula,
        max_solutions: Optional[int] = None,
        step_budget: Optional[int] = None,
        reuse: bool = True,
        label: bool = True,
        trace: Optional[Trace] = None,
    ) -> Iterator[Outcome]:
        """Depth-first search over derivations.

        Yields one SUCCESS outcome per distinct answer, then exactly one
        terminal outcome. `max_solutions=None` asks for every answer.
        """
        budget = step_budget if step_budget is not None else settings.STEP_BUDGET
        engine = _Engine(transformed.completion, reuse)
        started = time.perf_counter()
        logger.info(
            f"Starting derivation: path={transformed.theory.path}, "
            f"query={format_formula(query)}, max_solutions={max_solutions}, "
            f"step_budget={budget}, reuse={reuse}, label={label}"
        )

        steps = 0
        found = 0
        seen = set()
        floundered: List[Floundering] = []
        terminal: Optional[OutcomeKind] = None
        stack: List[Iterator[State]] = [
            iter([DerivationService.initial_state(transformed, query)])
        ]
        while stack:
            state = next(stack[-1], None)
            if state is None:
                stack.pop()
                continue
            if steps >= budget:
                terminal = OutcomeKind.BUDGET_EXHAUSTED
                break

            selection = engine.select(state)
            if selection is None or isinstance(selection, Floundering):
                # ground values may make a stuck denial safe again
                if label and _has_finite_vars(state.store):
                    steps += 1
                    RULE_APPLICATIONS_TOTAL.labels(rule="labeling").inc()
                    if trace:
                        trace(_event(steps, "labeling", "store", state))
                    stack.append(engine.label(state))
                    continue
            if isinstance(selection, Floundering):
                logger.debug(
                    f"Branch floundered: goal={format_formula(selection.goal)}, "
                    f"reason={selection.reason}"
                )
                floundered.append(selection)
                continue

            if selection is None:
                if not ConstraintService.is_satisfiable(state.store):
                    continue
                answer = Answer(state.answer, state.delta, state.store, state.labeled)
                if answer.key() in seen:
                    continue
                seen.add(answer.key())
                found += 1
                logger.info(f"Answer found: steps={steps}, delta_size={len(state.delta)}")
                yield Outcome(OutcomeKind.SUCCESS, steps, answer)
                if max_solutions is not None and found >= max_solutions:
                    terminal = OutcomeKind.SOLUTION_LIMIT
                    break
                continue

            steps += 1
            successors = selection.apply()
            RULE_APPLICATIONS_TOTAL.labels(rule=selection.rule).inc()
            if trace:
                added: Tuple[str, ...] = ()
                if len(successors) == 1:
                    before = set(state.goals)
                    added = tuple(
                        format_formula(g) for g in successors[0].goals if g not in before
                    )
                goal = format_formula(selection.goal)
                trace(_event(steps, selection.rule, goal, state, added))
            stack.append(iter(successors))

        diagnostic = None
        if terminal is None:
            if found:
                terminal = OutcomeKind.COMPLETE
            elif floundered:
                terminal = OutcomeKind.FLOUNDERING
                first = floundered[0]
                diagnostic = f"floundered on {format_formula(first.goal)}: {first.reason}"
            else:
                terminal = OutcomeKind.FAILURE
        elapsed = time.perf_counter() - started
        DERIVATION_OUTCOMES_TOTAL.labels(outcome=terminal.value).inc()
        DERIVATION_DURATION_SECONDS.observe(elapsed)
        logger.info(
            f"Derivation finished: outcome={terminal.value}, answers={found}, "
            f"steps={steps}, floundered_branches={len(floundered)}, seconds={elapsed:.3f}"
        )
        if terminal is OutcomeKind.FLOUNDERING:
            logger.warning(f"Derivation floundered: {diagnostic}")
        elif terminal is OutcomeKind.BUDGET_EXHAUSTED:
            logger.warning(f"Step budget exhausted: budget={budget}, answers={found}")
        yield Outcome(terminal, steps, diagnostic=diagnostic)


class _Engine:
    def __init__(self, completion: Dict[PredKey, Completion], reuse: bool = True):
        self.completion = completion
        self.reuse = reuse

    def select(self, state: State) -> Union[Selection, Floundering, None]:
        delta = state.delta_index()
        best: Optional[Selection] = None
        stuck: Optional[Floundering] = None
        for i, goal in enumerate(state.goals):
            plan = self.plan(state, i, goal, delta)
            if plan is None:
                continue
            if isinstance(plan, Floundering):
                stuck = stuck or plan
                continue
            if best is None or plan.priority < best.priority:
                best = plan
                if best.priority == SIMPLIFY:
                    break
        return best or stuck

    def plan(
        self, state: State, i: int, goal: Goal, delta: DeltaIndex
    ) -> Union[Selection, Floundering, None]:
        if isinstance(goal, Denial):
            return self.plan_denial(state, i, goal, delta)
        return self.plan_positive(state, i, goal, delta)

    def plan_positive(
        self, state: State, i: int, goal: Goal, delta: DeltaIndex
    ) -> Selection:
        def select(priority, rule, apply, *args):
            return Selection(i, goal, priority, rule, partial(apply, *args))

        if isinstance(goal, Top):
            return select(SIMPLIFY, "true", self.rewrite, state, i, ())
        if isinstance(goal, Bottom):
            return select(SIMPLIFY, "false", _fail)
        if isinstance(goal, And):
            return select(SIMPLIFY, "conjunction", self.rewrite, state, i, goal.items)
        if isinstance(goal, Exists):
            return select(SIMPLIFY, "exists", self.eliminate_exists, state, i, goal)
        if isinstance(goal, Equal):
            return select(SIMPLIFY, "equality", self.unify, state, i, goal)
        if isinstance(goal, Not):
            return select(SIMPLIFY, "negation", self.negate, state, i, goal.body)
        if isinstance(goal, Atom):
            if goal.key in self.completion:
                return select(UNFOLD, "unfold", self.unfold, state, i, goal)
            return select(ABDUCE, "abduction", self.abduce, state, i, goal, delta)
        if is_clp(goal):
            return select(CONSTRAIN, "constraint", self.constrain, state, i, goal)
        if isinstance(goal, Or):
            return select(BRANCH, "disjunction", self.branch, state, i, goal.items)
        raise TypeError(f"Not a goal: {goal!r}")

    def plan_denial(
        self, state: State, i: int, d: Denial, delta: DeltaIndex
    ) -> Union[Selection, Floundering, None]:
        risky = _unanchored(d, state)
        if risky is None and _parked(d, state.store, delta):
            return None

        def select(priority, rule, apply, *args):
            return Selection(i, d, priority, rule, partial(apply, *args))

        if not d.body:
            return select(SIMPLIFY, "denial-fail", _fail)
        for j, literal in enumerate(d.body):
            simplified = _simplify(d, j, literal, state.store)
            if simplified is not None:
                rule, goals = simplified
                return select(SIMPLIFY, rule, self.rewrite, state, i, goals)

        stuck: Optional[str] = risky
        for j, literal in enumerate(d.body):
            if not is_clp(literal):
                continue
            variables = free_vars(literal)
            if variables <= d.uvars:
                context = tuple(x for k, x in enumerate(d.body) if k != j and is_clp(x))
                solutions = _solutions(literal, context)
                if solutions != INFINITE:
                    return select(
                        RESOLVE,
                        "denial-enumerate",
                        self.instances,
                        *(state, i, d, j, solutions),
                    )
                stuck = stuck or (
                    f"{format_formula(literal)} has infinitely many solutions"
                )
            elif variables & d.uvars:
                stuck = stuck or (
                    f"{format_formula(literal)} mixes universally quantified "
                    f"and free variables"
                )
        # an open atom nothing in Δ matches parks the denial without unfolding
        for j, literal in enumerate(d.body):
            if (
                isinstance(literal, Atom)
                and literal.key not in self.completion
                and not delta.get(literal.key)
            ):
                return select(
                    RESOLVE,
                    "denial-resolution",
                    self.resolve,
                    *(state, i, d, j, literal, (), []),
                )
        for j, literal in enumerate(d.body):
            if isinstance(literal, Atom) and literal.key in self.completion:
                return select(
                    RESOLVE, "denial-unfold", self.unfold_literal, state, i, d, j, literal
                )
        for j, literal in enumerate(d.body):
            if isinstance(literal, Or):
                split = tuple(_splice(d, j, (item,)) for item in literal.items)
                return select(RESOLVE, "denial-split", self.rewrite, state, i, split)
        for j, literal in enumerate(d.body):
            if isinstance(literal, (Atom, Residual)):
                atom = literal if isinstance(literal, Atom) else literal.atom
                excluded = literal.excluded if isinstance(literal, Residual) else ()
                rows = [row for row in delta.get(atom.key, ()) if row not in excluded]
                if isinstance(literal, Residual) and not rows:
                    continue
                return select(
                    RESOLVE,
                    "denial-resolution",
                    self.resolve,
                    *(state, i, d, j, atom, excluded, rows),
                )

        for j, literal in enumerate(d.body):
            if isinstance(literal, Not):
                if free_vars(literal) & d.uvars:
                    stuck = stuck or (
                        f"{format_formula(literal)} negates a formula over universally "
                        f"quantified variables"
                    )
                    continue
                return select(
                    BRANCH, "denial-negation", self.split_negation, state, i, d, j
                )
            if is_clp(literal) and not free_vars(literal) & d.uvars:
                return select(
                    BRANCH, "denial-constraint", self.split_constraint, state, i, d, j
                )
        return Floundering(d, stuck or "no rule applies")

    # Rules on positive goals

    def rewrite(self, state: State, i: int, goals) -> Successors:
        return [_without(state, i, goals)]

    def eliminate_exists(self, state: State, i: int, goal: Exists) -> Successors:
        renamed = TermService.rename_fresh(goal)
        return self.rewrite(state, i, (renamed.body,))

    def unify(self, state: State, i: int, goal: Equal) -> Successors:
        theta = TermService.unify(goal.lhs, goal.rhs)
        if theta is None:
            return []
        return _some(_bind(_without(state, i), theta))

    def negate(self, state: State, i: int, body: Formula) -> Successors:
        return self.rewrite(state, i, (_negation(body, state.store),))

    def instance(self, atom: Atom) -> Formula:
        completion = self.completion[atom.key]
        body = positive(TermService.rename_fresh(completion.body))
        return substitute(body, Substitution(dict(zip(completion.head_vars, atom.args))))

    def unfold(self, state: State, i: int, atom: Atom) -> Successors:
        return self.rewrite(state, i, (self.instance(atom),))

    def abduce(self, state: State, i: int, atom: Atom, delta: DeltaIndex) -> Successors:
        rest = _without(state, i)
        successors: Successors = []
        if self.reuse:
            for row in delta.get(atom.key, ()):
                theta = TermService.unify_args(atom.args, row)
                if theta is not None:
                    successors.extend(_some(_bind(rest, theta)))
        if atom not in state.delta:
            successors.append(rest.replace(delta=rest.delta + (atom,)))
        elif not self.reuse:
            successors.append(rest)
        return successors

    def constrain(self, state: State, i: int, literal) -> Successors:
        return _some(_constrained(_without(state, i), literal))

    def branch(self, state: State, i: int, items) -> Successors:
        return [_without(state, i, (item,)) for item in items]

    # Rules on denials

    def instances(self, state: State, i: int, d: Denial, j: int, solutions) -> Successors:
        rest = d.body[:j] + d.body[j + 1 :]
        goals = []
        for solution in solutions:
            theta = Substitution({v: Int(x) for v, x in solution.items()})
            goals.append(
                _denial(
                    d.uvars - theta.domain(), tuple(substitute(x, theta) for x in rest)
                )
            )
        return self.rewrite(state, i, goals)

    def unfold_literal(
        self, state: State, i: int, d: Denial, j: int, atom: Atom
    ) -> Successors:
        return self.rewrite(state, i, (_splice(d, j, (self.instance(atom),)),))

    def resolve(
        self, state: State, i: int, d: Denial, j: int, atom: Atom, excluded, rows
    ) -> Successors:
        """Resolve one literal against every abduced atom it has not met yet"""
        rest = d.body[:j] + d.body[j + 1 :]
        goals = [
            _denial(d.uvars, tuple(Equal(s, t) for s, t in zip(row, atom.args)) + rest)
            for row in rows
        ]
        residual = Residual(atom, tuple(excluded) + tuple(rows))
        goals.append(Denial(d.uvars, d.body[:j] + (residual,) + d.body[j + 1 :]))
        return self.rewrite(state, i, goals)

    def split_negation(self, state: State, i: int, d: Denial, j: int) -> Successors:
        body = d.body[j].body
        rest = _denial(d.uvars, d.body[:j] + d.body[j + 1 :])
        return [
            _without(state, i, (body,)),
            _without(state, i, (TransformService.denial_of(body), rest)),
        ]

    def split_constraint(self, state: State, i: int, d: Denial, j: int) -> Successors:
        literal = d.body[j]
        dropped = _without(state, i)
        successors: Successors = []
        for alternative in ConstraintService.negate(literal):
            successors.extend(_some(_constrained(dropped, alternative)))
        rest = _denial(d.uvars, d.body[:j] + d.body[j + 1 :])
        successors.extend(_some(_constrained(_without(state, i, (rest,)), literal)))
        return successors

    def label(self, state: State) -> Iterator[State]:
        for assignment in ConstraintService.label(state.store):
            LABELINGS_TOTAL.inc()
            theta = Substitution({v: Int(x) for v, x in assignment.items()})
            labeled = _bind(state, theta)
            if labeled is not None:
                yield labeled.replace(labeled=True)


def _fail() -> Successors:
    return []


def _some(state: Optional[State]) -> Successors:
    return [] if state is None else [state]


def _without(state: State, i: int, goals=()) -> State:
    return state.replace(goals=tuple(goals) + state.goals[:i] + state.goals[i + 1 :])


def _apply(state: State, theta: Substitution, store: Store) -> State:
    return state.replace(
        goals=tuple(dict.fromkeys(substitute(g, theta) for g in state.goals)),
        delta=tuple(dict.fromkeys(substitute(a, theta) for a in state.delta)),
        store=store,
        answer=tuple((v, theta.apply(t)) for v, t in state.answer),
    )


def _settle(state: State) -> Optional[State]:
    """Substitute the values the store has fixed into the whole state"""
    while True:
        fixed = ConstraintService.fixed_vars(state.store)
        if not fixed:
            return state
        theta = Substitution({v: Int(x) for v, x in fixed.items()})
        store = ConstraintService.substitute(state.store, theta)
        if store is None:
            return None
        state = _apply(state, theta, store)


def _bind(state: State, theta: Substitution) -> Optional[State]:
    store = ConstraintService.substitute(state.store, theta)
    if store is None:
        return None
    return _settle(_apply(state, theta, store))


def _constrained(state: State, literal) -> Optional[State]:
    store = ConstraintService.add(state.store, literal)
    if store is None:
        return None
    return _settle(state.replace(store=store))


def _has_finite_vars(store: Store) -> bool:
    return any(store.domain(v).is_finite() for v in store.variables())


def _event(step: int, rule: str, goal: str, state: State, added=()) -> TraceEvent:
    return TraceEvent(
        step, rule, goal, len(state.goals), len(state.delta), state.store.summary(), added
    )


def _numeric(term: Term, store: Store) -> bool:
    if isinstance(term, Var):
        return term in store
    return isinstance(term, Int) or is_arithmetic(term)


def _negation(body: Formula, store: Store) -> Goal:
    """The goal for `not body` in positive position"""
    if isinstance(body, Top):
        return FALSE
    if isinstance(body, Bottom):
        return TRUE
    if isinstance(body, Not):
        return body.body
    if isinstance(body, Equal):
        if TermService.unify(body.lhs, body.rhs) is None:
            return TRUE
        if _numeric(body.lhs, store) and _numeric(body.rhs, store):
            return Compare(body.lhs, "!=", body.rhs)
    if isinstance(body, Compare):
        return Compare(body.lhs, NEGATED_OP[body.op], body.rhs)
    if isinstance(body, InRange):
        return Or((Compare(body.term, "<", body.lo), Compare(body.term, ">", body.hi)))
    return TransformService.denial_of(body)


def _denial(uvars, body: Tuple[Formula, ...]) -> Denial:
    used = set()
    for literal in body:
        used |= free_vars(literal)
    return Denial(frozenset(v for v in uvars if v in used), tuple(body))


def _splice(d: Denial, j: int, literals) -> Denial:
    return _denial(d.uvars, d.body[:j] + tuple(literals) + d.body[j + 1 :])


def _solved_equality(y: Term, t: Term, uvars, store: Store) -> bool:
    return (
        isinstance(y, Var)
        and y not in uvars
        and y not in store
        and not occurs(y, t)
        and not (isinstance(t, Var) and t in uvars)
    )


def _unanchored(d: Denial, state: State) -> Optional[str]:
    """Why the denial cannot rest in success form: a literal joins universally
    quantified variables with a free variable that only denials mention"""
    if not d.uvars:
        return None
    anchored = None
    for literal in d.body:
        if isinstance(literal, Equal):
            continue
        variables = free_vars(literal)
        loose = {v for v in variables - d.uvars if v not in state.store}
        if not loose or not variables & d.uvars:
            continue
        if anchored is None:
            anchored = _anchored(state)
        loose -= anchored
        if loose:
            names = ", ".join(sorted(str(v) for v in loose))
            return (
                f"{format_formula(literal)} mixes universally quantified variables "
                f"with unbound {names}"
            )
    return None


def _anchored(state: State) -> set:
    """Free variables that an abduced atom or the answer constrains"""
    found = set()
    for atom in state.delta:
        for arg in atom.args:
            found.update(term_vars(arg))
    for _, term in state.answer:
        found.update(term_vars(term))
    return found


def _parked(d: Denial, store: Store, delta: DeltaIndex) -> bool:
    """A denial in success form: a residual equality on a free variable, or
    an abducible literal already resolved against every matching atom"""
    for literal in d.body:
        if isinstance(literal, Equal) and (
            _solved_equality(literal.lhs, literal.rhs, d.uvars, store)
            or _solved_equality(literal.rhs, literal.lhs, d.uvars, store)
        ):
            return True
        if isinstance(literal, Residual):
            excluded = set(literal.excluded)
            if all(row in excluded for row in delta.get(literal.atom.key, ())):
                return True
    return False


def _simplify(d: Denial, j: int, literal: Formula, store: Store):
    """A deterministic rewrite of one denial literal as (rule, goals), or None"""
    rest = d.body[:j] + d.body[j + 1 :]
    if isinstance(literal, Top):
        return "denial-true", (_denial(d.uvars, rest),)
    if isinstance(literal, Bottom):
        return "denial-discharge", ()
    if isinstance(literal, And):
        return "denial-conjunction", (_splice(d, j, literal.items),)
    if isinstance(literal, Exists):
        renamed = TermService.rename_fresh(literal)
        lifted = Denial(d.uvars | frozenset(renamed.vars), d.body)
        return "denial-exists", (_splice(lifted, j, conjuncts(renamed.body)),)
    if isinstance(literal, Equal):
        return "denial-equality", _denial_equality(d, j, literal, store)
    if isinstance(literal, Not):
        inner = literal.body
        if isinstance(inner, Top):
            return "denial-discharge", ()
        if isinstance(inner, Bottom):
            return "denial-true", (_denial(d.uvars, rest),)
        if isinstance(inner, Not):
            return "denial-double-negation", (_splice(d, j, (inner.body,)),)
        if isinstance(inner, (Compare, InRange)):
            negated = _splice(d, j, (_negation(inner, store),))
            return "denial-negated-constraint", (negated,)
        if isinstance(inner, Equal):
            if TermService.unify(inner.lhs, inner.rhs) is None:
                return "denial-true", (_denial(d.uvars, rest),)
            if _numeric(inner.lhs, store) and _numeric(inner.rhs, store):
                return "denial-disequality", (_splice(d, j, (_negation(inner, store),)),)
        return None
    if is_clp(literal):
        if not free_vars(literal):
            if ConstraintService.add(Store(), literal) is None:
                return "denial-discharge", ()
            return "denial-true", (_denial(d.uvars, rest),)
        if isinstance(literal, Compare) and literal.op == "=":
            for x, t in ((literal.lhs, literal.rhs), (literal.rhs, literal.lhs)):
                if (
                    isinstance(x, Var)
                    and x in d.uvars
                    and isinstance(t, (Var, Int))
                    and x != t
                ):
                    theta = Substitution({x: t})
                    body = tuple(substitute(y, theta) for y in rest)
                    return "universal-elimination", (_denial(d.uvars - {x}, body),)
    return None


def _denial_equality(d: Denial, j: int, literal: Equal, store: Store) -> Tuple[Goal, ...]:
    """Unify inside a denial: universal bindings are substituted away, bindings
    of free variables stay behind as residual equalities"""
    theta = TermService.unify(literal.lhs, literal.rhs, prefer=d.uvars)
    if theta is None:
        return ()
    universal = Substitution({v: t for v, t in theta.items() if v in d.uvars})
    residual: List[Formula] = []
    for v, t in theta.items():
        if v in d.uvars:
            continue
        if v in store or (isinstance(t, Var) and t in store):
            residual.append(Compare(v, "=", t))
        else:
            residual.append(Equal(v, t))
    rest = tuple(substitute(x, universal) for x in d.body[:j] + d.body[j + 1 :])
    return (_denial(d.uvars - universal.domain(), tuple(residual) + rest),)


@lru_cache(maxsize=4096)
def _solutions(literal, context):
    return ConstraintService.enumerate(literal, context)
