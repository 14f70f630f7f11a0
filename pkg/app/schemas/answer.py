from typing import Dict, List, Optional

from pydantic import BaseModel


class AnswerRead(BaseModel):
    substitution: Dict[str, str] = {}
    delta: List[str]
    labeled: bool
    constraints: List[str] = []
    verified: Optional[bool] = None


class SolveReport(BaseModel):
    answers: List[AnswerRead] = []
    outcome: str
    steps: int
