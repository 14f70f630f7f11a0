from app.schemas.answer import AnswerRead, SolveReport
from app.schemas.diagnostic import Diagnostic, Severity
from app.schemas.run_config import OutputFormat, RunConfig

__all__ = [
    "AnswerRead",
    "SolveReport",
    "Diagnostic",
    "Severity",
    "OutputFormat",
    "RunConfig",
]
