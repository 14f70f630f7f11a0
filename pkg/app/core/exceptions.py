"""Error hierarchy shared by the services and the command layer."""

from typing import List


class IdlError(Exception):
    """Base class for every error raised by the solver pipeline"""


class DiagnosticError(IdlError):
    """An error carrying one or more source diagnostics"""

    def __init__(self, diagnostics: List["Diagnostic"]):  # noqa: F821
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ParseError(DiagnosticError):
    pass


class TypeCheckError(DiagnosticError):
    pass


class ObDeclarationError(IdlError, ValueError):
    pass


class UnboundedUniverseError(IdlError):
    def __init__(self, sort: str):
        self.sort = sort
        super().__init__(f"Universe of sort '{sort}' is unbounded")


class EnumerationBoundError(IdlError):
    def __init__(self, candidates: int, bound: int):
        self.candidates = candidates
        self.bound = bound
        super().__init__(
            f"Candidate space of {candidates} abducible sets exceeds bound {bound}"
        )


class NonLinearConstraintError(IdlError, ValueError):
    pass
