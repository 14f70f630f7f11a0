import logging
from typing import Dict, List, Tuple

from app.core.exceptions import ObDeclarationError
from app.models.formula import (
    FALSE,
    And,
    Atom,
    Bottom,
    Compare,
    Denial,
    Equal,
    Exists,
    Forall,
    Formula,
    Goal,
    Implies,
    InRange,
    NEGATED_OP,
    Not,
    Or,
    Top,
    conjoin,
    conjuncts,
    disjoin,
    format_denial,
    format_formula,
    free_vars,
    substitute,
)
from app.models.term import Substitution, Var, is_arithmetic
from app.models.theory import (
    Axiom,
    Completion,
    Definition,
    ObDecl,
    PredKey,
    Theory,
    TransformedTheory,
    pred_label,
)
from app.services.term_service import TermService

logger = logging.getLogger(__name__)


class TransformService:
    @staticmethod
    def complete(definition: Definition) -> Dict[PredKey, Completion]:
        """Build B_p for every defined predicate, one disjunct per rule"""
        completion: Dict[PredKey, Completion] = {}
        for key in sorted(definition.defined_preds):
            head_vars = tuple(Var.fresh("X") for _ in range(key[1]))
            disjuncts = [
                _rule_disjunct(rule, head_vars) for rule in definition.rules_for(key)
            ]
            completion[key] = Completion(head_vars, disjoin(disjuncts))
        return completion

    @staticmethod
    def to_denials(formula: Formula) -> List[Goal]:
        """Split an axiom into positive goals and denials.

        No Forall or Implies survives outside a denial.
        """
        if isinstance(formula, And):
            goals: List[Goal] = []
            for item in formula.items:
                goals.extend(TransformService.to_denials(item))
            return goals
        if isinstance(formula, Top):
            return []
        if isinstance(formula, Forall):
            lifted, literals = _negated(formula.body)
            return [_denial(tuple(formula.vars) + lifted, literals)]
        if isinstance(formula, Implies):
            lifted, literals = _negated(formula)
            return [_denial(lifted, literals)]
        if isinstance(formula, Not):
            lifted, literals = _literals(formula.body)
            return [_denial(lifted, literals)]
        return [positive(formula)]

    @staticmethod
    def denial_of(formula: Formula) -> Denial:
        """`← formula`, its leading existentials becoming universals"""
        lifted, literals = _literals(formula)
        return _denial(lifted, literals)

    @staticmethod
    def expand_ob(decl: ObDecl, theory: Theory) -> List[Axiom]:
        """Totality, functionality and injectivity axioms of an `ob` declaration"""
        function = (decl.function_pred, 2)
        if function not in theory.abducibles or theory.is_defined(function):
            raise ObDeclarationError(
                f"ob declaration on line {decl.line}: {decl.function_pred} must be a "
                f"binary abducible predicate"
            )
        for spec in (decl.domain_spec, decl.range_spec):
            if not theory.is_defined((spec, 1)):
                raise ObDeclarationError(
                    f"ob declaration on line {decl.line}: {spec} must be a unary "
                    f"defined predicate"
                )

        def f(a, b):
            return Atom(decl.function_pred, (a, b))

        q, p = Var.named("Q"), Var.named("P")
        totality = Forall(
            (q,),
            Implies(
                Atom(decl.domain_spec, (q,)),
                Exists((p,), And((Atom(decl.range_spec, (p,)), f(q, p)))),
            ),
        )
        q, p1, p2 = Var.named("Q"), Var.named("P1"), Var.named("P2")
        functionality = Forall(
            (q, p1, p2), Implies(And((f(q, p1), f(q, p2))), Equal(p1, p2))
        )
        q1, q2, p = Var.named("Q1"), Var.named("Q2"), Var.named("P")
        injectivity = Forall(
            (q1, q2, p), Implies(And((f(q1, p), f(q2, p))), Equal(q1, q2))
        )
        return [Axiom(a, decl.line) for a in (totality, functionality, injectivity)]

    @staticmethod
    def transform(theory: Theory) -> TransformedTheory:
        completion = TransformService.complete(theory.definition)
        expanded: List[Axiom] = []
        for decl in theory.ob_decls:
            expanded.extend(TransformService.expand_ob(decl, theory))
        goals: List[Goal] = []
        for axiom in list(theory.fol_axioms) + expanded:
            goals.extend(TransformService.to_denials(axiom.formula))
        logger.info(
            f"Theory transformed: path={theory.path}, completions={len(completion)}, "
            f"ob_axioms={len(expanded)}, goals={len(goals)}, "
            f"denials={sum(1 for g in goals if isinstance(g, Denial))}"
        )
        return TransformedTheory(theory, completion, goals, expanded)

    @staticmethod
    def format_transformed(transformed: TransformedTheory) -> str:
        lines = []
        for key, completion in transformed.completion.items():
            lines.append(f"% completion of {pred_label(key)}")
            lines.append(completion.format(key))
        if transformed.goals:
            lines.append("% denials and positive goals")
        for goal in transformed.goals:
            if isinstance(goal, Denial):
                text = format_denial(goal)
            else:
                text = format_formula(goal)
            lines.append(f"fol {text}.")
        return "\n".join(lines) + "\n"


def _rule_disjunct(rule, head_vars: Tuple[Var, ...]) -> Formula:
    variables = free_vars(rule.head) | free_vars(rule.body)
    renamed_body, renaming = TermService.rename_vars(rule.body, variables)
    args = tuple(renaming.apply(a) for a in rule.head.args)

    bindings: Dict[Var, Var] = {}
    equalities: List[Formula] = []
    for x, t in zip(head_vars, args):
        if isinstance(t, Var) and t not in bindings:
            bindings[t] = x
        elif is_arithmetic(t):
            equalities.append(Compare(x, "=", t))
        else:
            equalities.append(Equal(x, t))
    theta = Substitution(bindings)
    body = conjoin(
        [substitute(e, theta) for e in equalities]
        + list(conjuncts(substitute(renamed_body, theta)))
    )
    locals_ = sorted(free_vars(body) - set(head_vars), key=lambda v: v.id)
    if locals_:
        body = Exists(tuple(locals_), body)
    return body


def _denial(uvars, literals: List[Formula]) -> Denial:
    body = tuple(literals)
    used = set()
    for literal in body:
        used |= free_vars(literal)
    return Denial(frozenset(v for v in uvars if v in used), body)


def _literals(f: Formula) -> Tuple[Tuple[Var, ...], List[Formula]]:
    """f as a conjunction of literals, lifting its leading existentials"""
    if isinstance(f, And):
        lifted: Tuple[Var, ...] = ()
        literals: List[Formula] = []
        for item in f.items:
            extra, lits = _literals(item)
            lifted += extra
            literals.extend(lits)
        return lifted, literals
    if isinstance(f, Exists):
        extra, literals = _literals(f.body)
        return tuple(f.vars) + extra, literals
    if isinstance(f, Top):
        return (), []
    return (), [positive(f)]


def _negated(f: Formula) -> Tuple[Tuple[Var, ...], List[Formula]]:
    """¬f as a conjunction of literals, lifting universals that become existential"""
    if isinstance(f, Implies):
        lifted, literals = _literals(f.lhs)
        extra, negated = _negated(f.rhs)
        return lifted + extra, literals + negated
    if isinstance(f, Or):
        lifted: Tuple[Var, ...] = ()
        literals: List[Formula] = []
        for item in f.items:
            extra, lits = _negated(item)
            lifted += extra
            literals.extend(lits)
        return lifted, literals
    if isinstance(f, Forall):
        extra, literals = _negated(f.body)
        return tuple(f.vars) + extra, literals
    if isinstance(f, Not):
        return _literals(f.body)
    if isinstance(f, Compare):
        return (), [Compare(f.lhs, NEGATED_OP[f.op], f.rhs)]
    if isinstance(f, InRange):
        return (), [Or((Compare(f.term, "<", f.lo), Compare(f.term, ">", f.hi)))]
    if isinstance(f, Top):
        return (), [FALSE]
    if isinstance(f, Bottom):
        return (), []
    return (), [Not(positive(f))]


def positive(f: Formula) -> Formula:
    """Rewrite nested ∀ and ⇒ away: ∀X.F as ¬∃X.¬F and A ⇒ B as ¬(A ∧ ¬B)"""
    if isinstance(f, Forall):
        return Not(Exists(f.vars, Not(positive(f.body))))
    if isinstance(f, Implies):
        return Not(And((positive(f.lhs), Not(positive(f.rhs)))))
    if isinstance(f, Not):
        return Not(positive(f.body))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(positive(i) for i in f.items))
    if isinstance(f, Exists):
        return Exists(f.vars, positive(f.body))
    return f
