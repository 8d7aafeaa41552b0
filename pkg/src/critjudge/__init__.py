"""Criterion-decomposed LLM relevance judging and qrels evaluation."""

from .model import (
    Criterion,
    CriterionGrades,
    Grade,
    JudgedPair,
    Passage,
    QrelsSet,
    Query,
    QueryPassagePair,
    RelevanceLabel,
    validate_label,
)
from .judges import JudgeMethod, judge

__all__ = [
    "Criterion",
    "CriterionGrades",
    "Grade",
    "JudgeMethod",
    "JudgedPair",
    "Passage",
    "QrelsSet",
    "Query",
    "QueryPassagePair",
    "RelevanceLabel",
    "judge",
    "validate_label",
]
