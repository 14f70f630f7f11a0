import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from lark import Lark, Transformer, UnexpectedInput, v_args

from app.core.exceptions import ParseError
from app.models.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    Compare,
    Equal,
    Exists,
    Forall,
    Formula,
    Implies,
    InRange,
    Not,
    Or,
)
from app.models.term import Compound, Const, Int, Term, Var, is_arithmetic
from app.models.theory import (
    Axiom,
    ObDecl,
    Rule,
    Signature,
    SignatureOrigin,
    Theory,
    TypeDecl,
    pred_label,
)
from app.schemas.diagnostic import Diagnostic, Severity

logger = logging.getLogger(__name__)

GRAMMAR = r"""
theory: statement*
query: formula

?statement: "fol" formula "."                      -> axiom
          | "ob" NAME "::" term "->" term "."      -> ob_decl
          | term "::" "pred" "."                   -> signature
          | term "<-" formula "."                  -> rule
          | term "."                               -> fact

?formula: disjunction "=>" formula                 -> implies
        | disjunction
?disjunction: disjunction ";" conjunction          -> or_
            | conjunction
?conjunction: conjunction "," unary                -> and_
            | unary
?scoped: conjunction "=>" scoped                   -> implies
       | conjunction
?unary: "forall" "(" varlist ")" "$" scoped        -> forall
      | "exists" "(" varlist ")" "$" scoped        -> exists
      | "not" unary                                -> negation
      | "\\+" unary                                -> negation
      | primary
?primary: "(" formula ")"
        | "true"                                   -> true_
        | "false"                                  -> false_
        | sum COMP_OP sum                          -> comparison
        | sum "in" sum ".." sum                    -> in_range
        | sum                                      -> atom
varlist: VAR ("," VAR)*

?sum: sum "+" product                              -> add
    | sum "-" product                              -> sub
    | lead_product
?lead_product: lead_product "*" factor             -> mul
             | lead_factor
?product: product "*" factor                       -> mul
        | factor
?factor: lead_factor
       | "(" sum ")"
?lead_factor: VAR                                  -> var
            | INT                                  -> int_
            | "-" factor                           -> neg
            | term
?term: NAME                                        -> const
     | NAME "(" args ")"                           -> compound
args: sum ("," sum)*

COMP_OP: /=<|<=|>=|\\=|<(?!-)|>|=(?!>)/
VAR: /[A-Z_][A-Za-z0-9_]*/
NAME: /[a-z][A-Za-z0-9_]*/
INT: /[0-9]+/
COMMENT: /%[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_PARSER = Lark(
    GRAMMAR,
    parser="lalr",
    start=["theory", "query"],
    propagate_positions=True,
    maybe_placeholders=False,
)

_OPERATORS = {
    "=<": "<=",
    "<=": "<=",
    ">=": ">=",
    "\\=": "!=",
    "<": "<",
    ">": ">",
    "=": "=",
}

ANONYMOUS = "_"

_TERMINAL_NAMES = {
    "VAR": "variable",
    "NAME": "name",
    "INT": "integer",
    "COMP_OP": "comparison",
}


@dataclass(frozen=True)
class _SourceVar:
    """A variable as written, before scoping turns it into a Var"""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class _Statement:
    kind: str
    line: int
    column: int
    data: tuple


def _line(meta) -> int:
    return getattr(meta, "line", 0) or 0


def _column(meta) -> int:
    return getattr(meta, "column", 0) or 0


class _AstBuilder(Transformer):
    def __init__(self, path: str):
        super().__init__()
        self.path = path
        self.diagnostics: List[Diagnostic] = []

    def _error(self, meta, message: str) -> None:
        self.diagnostics.append(
            Diagnostic(
                path=self.path, line=_line(meta), column=_column(meta), message=message
            )
        )

    # Statements

    def theory(self, children):
        return list(children)

    def query(self, children):
        return children[0]

    @v_args(meta=True)
    def axiom(self, meta, children):
        return _Statement("axiom", _line(meta), _column(meta), (children[0],))

    @v_args(meta=True)
    def ob_decl(self, meta, children):
        name, domain, range_ = children
        return _Statement("ob", _line(meta), _column(meta), (str(name), domain, range_))

    @v_args(meta=True)
    def signature(self, meta, children):
        return _Statement("signature", _line(meta), _column(meta), (children[0],))

    @v_args(meta=True)
    def rule(self, meta, children):
        head, body = children
        return _Statement("rule", _line(meta), _column(meta), (head, body))

    @v_args(meta=True)
    def fact(self, meta, children):
        return _Statement("fact", _line(meta), _column(meta), (children[0],))

    # Formulas

    def implies(self, children):
        return Implies(children[0], children[1])

    def or_(self, children):
        left, right = children
        items = left.items if isinstance(left, Or) else (left,)
        return Or(items + (right,))

    def and_(self, children):
        left, right = children
        items = left.items if isinstance(left, And) else (left,)
        return And(items + (right,))

    def forall(self, children):
        names, body = children
        return Forall(names, body)

    def exists(self, children):
        names, body = children
        return Exists(names, body)

    def negation(self, children):
        return Not(children[0])

    def true_(self, _children):
        return TRUE

    def false_(self, _children):
        return FALSE

    def comparison(self, children):
        lhs, op, rhs = children
        op = _OPERATORS[str(op)]
        if op in ("=", "!=") and not (is_arithmetic(lhs) or is_arithmetic(rhs)):
            return Equal(lhs, rhs) if op == "=" else Not(Equal(lhs, rhs))
        return Compare(lhs, op, rhs)

    def in_range(self, children):
        term, lo, hi = children
        return InRange(term, lo, hi)

    @v_args(meta=True)
    def atom(self, meta, children):
        atom = _as_atom(children[0])
        if atom is None:
            self._error(meta, f"expected an atom, found term '{children[0]}'")
            return FALSE
        return atom

    def varlist(self, children):
        return tuple(str(c) for c in children)

    # Terms

    def add(self, children):
        return Compound("+", tuple(children))

    def sub(self, children):
        return Compound("-", tuple(children))

    def mul(self, children):
        return Compound("*", tuple(children))

    def var(self, children):
        return _SourceVar(str(children[0]))

    def int_(self, children):
        return Int(int(children[0]))

    def neg(self, children):
        inner = children[0]
        if isinstance(inner, Int):
            return Int(-inner.value)
        return Compound("-", (Int(0), inner))

    def const(self, children):
        return Const(str(children[0]))

    def compound(self, children):
        return Compound(str(children[0]), tuple(children[1]))

    def args(self, children):
        return list(children)


def _as_atom(term) -> Optional[Atom]:
    if isinstance(term, Const):
        return Atom(term.name, ())
    if isinstance(term, Compound) and not is_arithmetic(term):
        return Atom(term.functor, term.args)
    return None


class _Scope:
    """Turns source variable names into Vars, one binder per quantifier"""

    def __init__(self, path: str, line: int, warnings: List[Diagnostic]):
        self.path = path
        self.line = line
        self.warnings = warnings
        self.free: Dict[str, Var] = {}
        self.anonymous: List[Var] = []
        self.bound: List[Dict[str, Var]] = []

    def lookup(self, name: str) -> Var:
        if name == ANONYMOUS:
            var = Var.fresh("_")
            self.anonymous.append(var)
            return var
        for frame in reversed(self.bound):
            if name in frame:
                return frame[name]
        if name not in self.free:
            self.free[name] = Var.named(name)
        return self.free[name]

    def visible(self, name: str) -> bool:
        return name in self.free or any(name in frame for frame in self.bound)

    def term(self, t):
        if isinstance(t, _SourceVar):
            return self.lookup(t.name)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(self.term(a) for a in t.args))
        return t

    def formula(self, f: Formula) -> Formula:
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(self.term(a) for a in f.args)) if f.args else f
        if isinstance(f, Equal):
            return Equal(self.term(f.lhs), self.term(f.rhs))
        if isinstance(f, Compare):
            return Compare(self.term(f.lhs), f.op, self.term(f.rhs))
        if isinstance(f, InRange):
            return InRange(self.term(f.term), self.term(f.lo), self.term(f.hi))
        if isinstance(f, Not):
            return Not(self.formula(f.body))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(self.formula(i) for i in f.items))
        if isinstance(f, Implies):
            return Implies(self.formula(f.lhs), self.formula(f.rhs))
        if isinstance(f, (Exists, Forall)):
            frame: Dict[str, Var] = {}
            for name in f.vars:
                if name == ANONYMOUS:
                    frame.setdefault(name, Var.fresh("_"))
                    continue
                if self.visible(name):
                    self.warnings.append(
                        Diagnostic(
                            path=self.path,
                            line=self.line,
                            severity=Severity.WARNING,
                            message=(
                                f"quantifier rebinds variable {name}; "
                                f"the inner binder shadows the outer one"
                            ),
                        )
                    )
                frame[name] = Var.named(name)
            self.bound.append(frame)
            body = self.formula(f.body)
            self.bound.pop()
            return type(f)(tuple(frame.values()), body)
        return f


class ParserService:
    @staticmethod
    def parse_theory(source, path: str = "<input>") -> Theory:
        """Parse an ID-logic theory; every definition block is merged into one"""
        text = source.read() if hasattr(source, "read") else source
        statements = _parse(text, "theory", path)
        diagnostics: List[Diagnostic] = []
        warnings: List[Diagnostic] = []
        theory = Theory(path=path)
        abducible_lines: Dict[Tuple[str, int], int] = {}

        def error(stmt: _Statement, message: str) -> None:
            diagnostics.append(
                Diagnostic(path=path, line=stmt.line, column=stmt.column, message=message)
            )

        for stmt in statements:
            if stmt.kind == "axiom":
                scope = _Scope(path, stmt.line, warnings)
                formula = scope.formula(stmt.data[0])
                if scope.free:
                    warnings.append(
                        Diagnostic(
                            path=path,
                            line=stmt.line,
                            severity=Severity.WARNING,
                            message="free variables "
                            + ", ".join(scope.free)
                            + " are implicitly universally quantified",
                        )
                    )
                closed = list(scope.free.values()) + scope.anonymous
                formula = _close(formula, closed, Forall)
                theory.fol_axioms.append(Axiom(formula, stmt.line))

            elif stmt.kind == "ob":
                name, domain, range_ = stmt.data
                specs = []
                for spec in (domain, range_):
                    atom = _as_atom(spec)
                    if atom is None or len(atom.args) != 1:
                        error(
                            stmt,
                            f"ob declaration expects unary predicate patterns, "
                            f"found '{spec}'",
                        )
                        break
                    specs.append(atom.pred)
                else:
                    theory.ob_decls.append(ObDecl(name, specs[0], specs[1], stmt.line))

            elif stmt.kind == "signature":
                atom = _as_atom(stmt.data[0])
                if atom is None or not all(isinstance(a, Const) for a in atom.args):
                    error(
                        stmt, f"malformed signature '{stmt.data[0]}'; sorts must be names"
                    )
                    continue
                sig = Signature(
                    atom.key,
                    tuple(a.name for a in atom.args),
                    SignatureOrigin.DECLARED,
                    stmt.line,
                )
                previous = theory.declared_signatures.get(atom.key)
                if previous is not None and previous.arg_sorts != sig.arg_sorts:
                    error(
                        stmt,
                        f"conflicting signature for {pred_label(atom.key)}: "
                        f"{previous} (line {previous.line}) and {sig}",
                    )
                    continue
                theory.declared_signatures[atom.key] = sig

            elif stmt.kind == "fact" and _is_declaration(stmt.data[0], "abducible"):
                pattern = _as_atom(stmt.data[0].args[0])
                if pattern is None:
                    error(
                        stmt,
                        f"abducible expects a predicate pattern, found '{stmt.data[0]}'",
                    )
                    continue
                theory.abducibles.add(pattern.key)
                abducible_lines.setdefault(pattern.key, stmt.line)

            elif stmt.kind == "fact" and _is_declaration(stmt.data[0], "type_instance"):
                args = stmt.data[0].args
                if len(args) != 2 or not all(isinstance(a, Const) for a in args):
                    error(
                        stmt,
                        f"type_instance expects two sort names, found '{stmt.data[0]}'",
                    )
                    continue
                theory.type_decls.append(TypeDecl(args[0].name, args[1].name, stmt.line))

            else:
                head_term = stmt.data[0]
                head = _as_atom(head_term)
                if head is None:
                    error(stmt, f"rule head must be an atom, found '{head_term}'")
                    continue
                body = stmt.data[1] if stmt.kind == "rule" else TRUE
                scope = _Scope(path, stmt.line, warnings)
                head = scope.formula(head)
                body = scope.formula(body)
                theory.definition.rules.append(Rule(head, body, stmt.line))
                theory.definition.defined_preds.add(head.key)

        for key, line in sorted(abducible_lines.items(), key=lambda item: item[1]):
            if theory.is_defined(key):
                diagnostics.append(
                    Diagnostic(
                        path=path,
                        line=line,
                        message=(
                            f"predicate {pred_label(key)} is declared abducible "
                            f"but has rules"
                        ),
                    )
                )

        if diagnostics:
            logger.warning(f"Theory rejected: path={path}, errors={len(diagnostics)}")
            raise ParseError(diagnostics)

        for key in sorted(theory.open_predicates() - theory.abducibles):
            warnings.append(
                Diagnostic(
                    path=path,
                    severity=Severity.WARNING,
                    message=(
                        f"open predicate {pred_label(key)} is not declared abducible; "
                        f"treating it as abducible"
                    ),
                )
            )
            theory.abducibles.add(key)

        theory.warnings.extend(warnings)
        logger.info(
            f"Theory parsed: path={path}, rules={len(theory.definition.rules)}, "
            f"axioms={len(theory.fol_axioms)}, abducibles={len(theory.abducibles)}, "
            f"ob_decls={len(theory.ob_decls)}, warnings={len(warnings)}"
        )
        return theory

    @staticmethod
    def parse_query(source, path: str = "<query>") -> Formula:
        """Parse a query; named free variables become the answer variables"""
        text = source.read() if hasattr(source, "read") else source
        raw = _parse(text, "query", path)
        scope = _Scope(path, 1, [])
        formula = scope.formula(raw)
        if scope.anonymous:
            formula = Exists(tuple(scope.anonymous), formula)
        return formula

    @staticmethod
    def parse_facts(source, path: str = "<answer>") -> List[Atom]:
        """Parse an answer file: ground facts, one per statement"""
        text = source.read() if hasattr(source, "read") else source
        statements = _parse(text, "theory", path)
        facts: List[Atom] = []
        diagnostics: List[Diagnostic] = []
        for stmt in statements:
            atom = _as_atom(stmt.data[0]) if stmt.kind == "fact" else None
            if atom is None or any(_has_source_var(a) for a in atom.args):
                diagnostics.append(
                    Diagnostic(
                        path=path,
                        line=stmt.line,
                        column=stmt.column,
                        message="answer files may only contain ground facts",
                    )
                )
                continue
            facts.append(atom)
        if diagnostics:
            raise ParseError(diagnostics)
        return facts


def _parse(text: str, start: str, path: str):
    try:
        tree = _PARSER.parse(text, start=start)
    except UnexpectedInput as exc:
        diagnostic = _syntax_diagnostic(exc, path)
        logger.warning(
            f"Syntax error: path={path}, line={diagnostic.line}, "
            f"column={diagnostic.column}"
        )
        raise ParseError([diagnostic]) from exc
    builder = _AstBuilder(path)
    result = builder.transform(tree)
    if builder.diagnostics:
        raise ParseError(builder.diagnostics)
    return result


def _syntax_diagnostic(exc: UnexpectedInput, path: str) -> Diagnostic:
    token = getattr(exc, "token", None)
    if token is not None:
        found = "end of input" if token.type == "$END" else f"'{token}'"
        expected = getattr(exc, "expected", None) or ()
    elif hasattr(exc, "char"):
        found = f"character '{exc.char}'"
        expected = getattr(exc, "allowed", None) or ()
    else:
        found = "end of input"
        expected = getattr(exc, "expected", None) or ()
    line = exc.line if isinstance(exc.line, int) and exc.line > 0 else 0
    column = exc.column if isinstance(exc.column, int) and exc.column > 0 else 0
    return Diagnostic(
        path=path,
        line=line,
        column=column,
        message=f"syntax error: unexpected {found}",
        expected=sorted({_describe_terminal(name) for name in expected}) or None,
    )


def _describe_terminal(name: str) -> str:
    if name == "$END":
        return "end of input"
    try:
        terminal = _PARSER.get_terminal(name)
    except KeyError:
        return name
    if terminal.pattern.type == "str":
        return f"'{terminal.pattern.value}'"
    return _TERMINAL_NAMES.get(name, name)


def _is_declaration(term, name: str) -> bool:
    return isinstance(term, Compound) and term.functor == name and len(term.args) >= 1


def _has_source_var(term: Term) -> bool:
    if isinstance(term, _SourceVar):
        return True
    if isinstance(term, Compound):
        return any(_has_source_var(a) for a in term.args)
    return False


def _close(formula: Formula, variables: List[Var], quantifier) -> Formula:
    if not variables:
        return formula
    return quantifier(tuple(variables), formula)

