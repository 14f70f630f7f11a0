"""Derivation states, answers and outcomes of the abductive engine."""

import enum
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from app.models.formula import Atom, Goal, format_atom
from app.models.store import Store
from app.models.term import Term, Var


@dataclass(frozen=True)
class State:
    """(Θ, Δ, CS) plus the bindings of the query variables.

    New goals are prepended to `goals`, so selection among equal priorities
    is depth first.
    """

    goals: Tuple[Goal, ...] = ()
    delta: Tuple[Atom, ...] = ()
    store: Store = field(default_factory=Store)
    answer: Tuple[Tuple[Var, Term], ...] = ()
    labeled: bool = False

    def replace(self, **changes) -> "State":
        return replace(self, **changes)

    def delta_index(self) -> Dict[Tuple[str, int], List[Tuple[Term, ...]]]:
        index: Dict[Tuple[str, int], List[Tuple[Term, ...]]] = {}
        for atom in self.delta:
            index.setdefault(atom.key, []).append(atom.args)
        return index


@dataclass(frozen=True)
class Answer:
    substitution: Tuple[Tuple[Var, Term], ...]
    delta: Tuple[Atom, ...]
    store: Store
    labeled: bool

    def key(self) -> Tuple[frozenset, Tuple[str, ...]]:
        return (
            frozenset(format_atom(a) for a in self.delta),
            tuple(f"{v}={t}" for v, t in self.substitution),
        )


class OutcomeKind(str, enum.Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    FLOUNDERING = "floundering"
    BUDGET_EXHAUSTED = "budget_exhausted"
    COMPLETE = "complete"
    SOLUTION_LIMIT = "solution_limit"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    steps: int
    answer: Optional[Answer] = None
    diagnostic: Optional[str] = None


@dataclass(frozen=True)
class Floundering:
    """No sound rule applies to the selected goal"""

    goal: Goal
    reason: str


@dataclass(frozen=True)
class TraceEvent:
    step: int
    rule: str
    goal: str
    theta_size: int
    delta_size: int
    store_summary: str
    added: Tuple[str, ...] = ()

    def __str__(self) -> str:
        line = (
            f"{self.step} {self.rule} {self.goal} "
            f"|theta|={self.theta_size} |delta|={self.delta_size} {self.store_summary}"
        )
        return "\n".join([line] + [f"  + {g}" for g in self.added])
