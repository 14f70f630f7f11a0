import enum
from typing import Optional

from pydantic import BaseModel


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


class Diagnostic(BaseModel):
    """A located message about a theory, query or answer file"""

    path: str = "<input>"
    line: int = 0
    column: int = 0
    severity: Severity = Severity.ERROR
    message: str
    expected: Optional[list[str]] = None

    def __str__(self) -> str:
        location = f"{self.path}:{self.line}:{self.column}"
        text = f"{location}: {self.severity.value}: {self.message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        return text
