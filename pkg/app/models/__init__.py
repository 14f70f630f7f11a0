from app.models.derivation import Answer, Outcome, OutcomeKind, State
from app.models.formula import Atom, Denial, Formula, Residual
from app.models.store import Domain, Store
from app.models.term import Compound, Const, Int, Substitution, Term, Var
from app.models.theory import Definition, Rule, Signature, Theory, TransformedTheory
from app.models.verification import CheckResult, Interpretation, Truth

__all__ = [
    "Term",
    "Var",
    "Int",
    "Const",
    "Compound",
    "Substitution",
    "Formula",
    "Atom",
    "Denial",
    "Residual",
    "Domain",
    "Store",
    "Rule",
    "Definition",
    "Signature",
    "Theory",
    "TransformedTheory",
    "State",
    "Answer",
    "Outcome",
    "OutcomeKind",
    "Interpretation",
    "Truth",
    "CheckResult",
]
