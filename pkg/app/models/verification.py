"""Three-valued interpretations and verifier results."""

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from app.models.formula import Atom
from app.models.term import Int, Term
from app.models.theory import PredKey

Extension = Dict[PredKey, Set[Tuple[Term, ...]]]


class Truth(str, enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDEFINED = "undefined"


def term_order(term: Term):
    """Sort key putting integers first, in numeric order"""
    if isinstance(term, Int):
        return (0, term.value, "")
    return (1, 0, str(term))


@dataclass
class Interpretation:
    """A well-founded model: `true` atoms, `possible` atoms (true or
    undefined) of the defined predicates, and the two-valued open facts."""

    true: Extension = field(default_factory=dict)
    possible: Extension = field(default_factory=dict)
    open_facts: Extension = field(default_factory=dict)

    def value(self, atom: Atom) -> Truth:
        if atom.key in self.open_facts or atom.key not in self.possible:
            holds = atom.args in self.open_facts.get(atom.key, ())
            return Truth.TRUE if holds else Truth.FALSE
        if atom.args in self.true.get(atom.key, ()):
            return Truth.TRUE
        if atom.args in self.possible[atom.key]:
            return Truth.UNDEFINED
        return Truth.FALSE

    def undefined_atoms(self) -> List[Atom]:
        atoms = []
        for key in sorted(self.possible):
            rows = self.possible[key] - self.true.get(key, set())
            for row in sorted(rows, key=lambda r: [term_order(t) for t in r]):
                atoms.append(Atom(key[0], row))
        return atoms

    def is_total(self) -> bool:
        return not self.undefined_atoms()


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    counterexample: Optional[str] = None
    total: bool = True
