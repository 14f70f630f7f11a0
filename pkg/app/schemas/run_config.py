import enum
from typing import Optional

from pydantic import BaseModel, field_validator

from app.core.config import settings


class OutputFormat(str, enum.Enum):
    TEXT = "text"
    JSON = "json"


class RunConfig(BaseModel):
    theory_path: str
    query_text: str = "true"
    max_solutions: int = settings.MAX_SOLUTIONS
    step_budget: int = settings.STEP_BUDGET
    trace: bool = False
    dump_transformed: bool = False
    reuse: bool = True
    verify: bool = False
    label: bool = True
    output: OutputFormat = OutputFormat.TEXT
    metrics_file: Optional[str] = None

    @field_validator("max_solutions")
    @classmethod
    def max_solutions_must_be_positive(cls, v):
        if v < 1:
            raise ValueError("Max solutions must be at least 1")
        return v

    @field_validator("step_budget")
    @classmethod
    def step_budget_must_be_positive(cls, v):
        if v < 1:
            raise ValueError("Step budget must be at least 1")
        return v
