import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from app.models.formula import (
    Atom,
    Formula,
    Goal,
    format_atom,
    format_formula,
    predicates_of,
)
from app.models.term import Var

PredKey = Tuple[str, int]

INT_SORT = "int"
SYMBOL_SORT = "sym"


def pred_label(key: PredKey) -> str:
    return f"{key[0]}/{key[1]}"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: Formula
    line: int = 0

    def __str__(self) -> str:
        return f"{format_atom(self.head)} <- {format_formula(self.body)}."


@dataclass
class Definition:
    defined_preds: Set[PredKey] = field(default_factory=set)
    rules: List[Rule] = field(default_factory=list)

    def rules_for(self, key: PredKey) -> List[Rule]:
        return [r for r in self.rules if r.head.key == key]


@dataclass(frozen=True)
class TypeDecl:
    """`type_instance(name, base).`"""

    name: str
    base: str
    line: int = 0


@dataclass(frozen=True)
class ObDecl:
    """`ob f :: d(_) -> r(_).`"""

    function_pred: str
    domain_spec: str
    range_spec: str
    line: int = 0

    def __str__(self) -> str:
        return (
            f"ob {self.function_pred} :: {self.domain_spec}(_) -> {self.range_spec}(_)."
        )


class SignatureOrigin(str, enum.Enum):
    DECLARED = "declared"
    INFERRED = "inferred"


@dataclass(frozen=True)
class Signature:
    predicate: PredKey
    arg_sorts: Tuple[str, ...]
    origin: SignatureOrigin = SignatureOrigin.DECLARED
    line: int = 0

    def __str__(self) -> str:
        name = self.predicate[0]
        if not self.arg_sorts:
            return f"{name}::pred."
        return f"{name}({', '.join(self.arg_sorts)})::pred."


@dataclass(frozen=True)
class Axiom:
    formula: Formula
    line: int = 0

    def __str__(self) -> str:
        return f"fol {format_formula(self.formula)}."


@dataclass
class Theory:
    definition: Definition = field(default_factory=Definition)
    fol_axioms: List[Axiom] = field(default_factory=list)
    type_decls: List[TypeDecl] = field(default_factory=list)
    abducibles: Set[PredKey] = field(default_factory=set)
    ob_decls: List[ObDecl] = field(default_factory=list)
    declared_signatures: Dict[PredKey, Signature] = field(default_factory=dict)
    path: str = "<input>"
    warnings: list = field(default_factory=list)
    # Filled in by type checking
    signatures: Dict[PredKey, Signature] = field(default_factory=dict)
    constant_sorts: Dict[str, str] = field(default_factory=dict)
    var_sorts: Dict[Var, str] = field(default_factory=dict)
    sort_bases: Dict[str, str] = field(default_factory=dict)

    def is_defined(self, key: PredKey) -> bool:
        return key in self.definition.defined_preds

    def is_open(self, key: PredKey) -> bool:
        return key not in self.definition.defined_preds

    def predicates(self) -> Set[PredKey]:
        keys: Set[PredKey] = set(self.definition.defined_preds) | set(self.abducibles)
        for rule in self.definition.rules:
            keys.update(predicates_of(rule.body))
        for axiom in self.fol_axioms:
            keys.update(predicates_of(axiom.formula))
        return keys

    def open_predicates(self) -> Set[PredKey]:
        return {k for k in self.predicates() if self.is_open(k)}

    def base_of(self, sort: str) -> str:
        return self.sort_bases.get(sort, sort)

    def sort_of_var(self, var: Var) -> Optional[str]:
        return self.var_sorts.get(var)


@dataclass(frozen=True)
class Completion:
    """p(head_vars) <-> body, the completed definition of one predicate"""

    head_vars: Tuple[Var, ...]
    body: Formula

    def format(self, key: PredKey) -> str:
        head = Atom(key[0], self.head_vars)
        return f"{format_atom(head)} <- {format_formula(self.body)}."


@dataclass
class TransformedTheory:
    theory: Theory
    completion: Dict[PredKey, Completion]
    goals: List[Goal]
    expanded_axioms: List[Axiom] = field(default_factory=list)
