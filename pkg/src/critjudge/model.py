"""Domain types shared by the judging, aggregation and evaluation layers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping


class OutOfRange(ValueError):
    """Raised when an integer falls outside the 0-3 scale."""

    def __init__(self, raw):
        super().__init__(f"value {raw!r} is outside the 0-3 scale")
        self.raw = raw


class Grade(enum.IntEnum):
    """A 0-3 grade for one relevance criterion."""

    NONE = 0
    MARGINAL = 1
    FAIR = 2
    HIGH = 3


class RelevanceLabel(enum.IntEnum):
    IRRELEVANT = 0
    RELATED = 1
    HIGHLY_RELEVANT = 2
    PERFECTLY_RELEVANT = 3


def _coerce(raw, kind):
    # bool is an int subclass; True/False are not scores
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise OutOfRange(raw)
    try:
        return kind(raw)
    except ValueError:
        raise OutOfRange(raw) from None


def validate_label(raw: int) -> RelevanceLabel:
    return _coerce(raw, RelevanceLabel)


def validate_grade(raw: int) -> Grade:
    return _coerce(raw, Grade)


class Criterion(enum.Enum):
    """The four relevance criteria, with the name and description used in prompts."""

    EXACTNESS = ("Exactness", "How precisely does the passage answer the query.")
    COVERAGE = (
        "Coverage",
        "How much of the passage is dedicated to discussing the query and its related topics.",
    )
    TOPICALITY = (
        "Topicality",
        "Is the passage about the same subject as the whole query (not only a single word of it).",
    )
    CONTEXTUAL_FIT = ("Contextual Fit", "Does the passage provide relevant background or context.")

    def __init__(self, label: str, description: str):
        self.label = label
        self.description = description

    @property
    def key(self) -> str:
        return self.name.lower()

    @classmethod
    def from_key(cls, key: str) -> "Criterion":
        return cls[key.upper()]


@dataclass(frozen=True)
class Query:
    id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("query id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"query {self.id!r} has empty text")


@dataclass(frozen=True)
class Passage:
    id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("passage id must be non-empty")
        if not self.text:
            raise ValueError(f"passage {self.id!r} has empty text")


@dataclass(frozen=True)
class QueryPassagePair:
    query: Query
    passage: Passage

    @property
    def key(self) -> tuple[str, str]:
        return (self.query.id, self.passage.id)


@dataclass(frozen=True)
class CriterionGrades:
    exactness: Grade
    coverage: Grade
    topicality: Grade
    contextual_fit: Grade

    def __post_init__(self):
        for crit in Criterion:
            object.__setattr__(self, crit.key, validate_grade(getattr(self, crit.key)))

    @classmethod
    def from_mapping(cls, grades: Mapping[Criterion, int]) -> "CriterionGrades":
        return cls(**{c.key: grades[c] for c in Criterion})

    def __getitem__(self, criterion: Criterion) -> Grade:
        return getattr(self, criterion.key)

    def as_tuple(self) -> tuple[int, int, int, int]:
        """Grades as plain ints in (exactness, coverage, topicality, contextual_fit) order."""
        return tuple(int(self[c]) for c in Criterion)

    def total(self) -> int:
        return sum(self.as_tuple())


@dataclass(frozen=True)
class CallRecord:
    """One backend round trip made while judging a pair."""

    step: str
    prompt_hash: str
    system_message: str
    user_prompt: str
    reply: str | None
    error: str | None = None


@dataclass(frozen=True)
class JudgedPair:
    """The outcome of judging one pair, including everything needed to audit it.

    ``grades`` holds only the criteria the method actually graded (all four for
    the four-criterion methods, two for the binary-check method, none otherwise).
    """

    query_id: str
    passage_id: str
    method: str
    label: RelevanceLabel
    grades: Mapping[Criterion, Grade] | None = None
    binary_check: bool | None = None
    generated_query: str | None = None
    notes: tuple[str, ...] = ()
    calls: tuple[CallRecord, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "label", validate_label(self.label))
        if self.grades is not None:
            object.__setattr__(
                self, "grades", {c: validate_grade(g) for c, g in self.grades.items()}
            )

    @property
    def error(self) -> str | None:
        return "; ".join(self.notes) if self.notes else None


class QrelsSet(Mapping[tuple[str, str], RelevanceLabel]):
    """Relevance labels keyed by (query id, passage id)."""

    def __init__(self, entries: Mapping[tuple[str, str], int] | Iterable[tuple[tuple[str, str], int]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._entries: dict[tuple[str, str], RelevanceLabel] = {}
        for key, label in items:
            if key in self._entries:
                raise KeyError(f"duplicate qrels key {key}")
            self._entries[key] = validate_label(label)
        self._by_query: dict[str, dict[str, RelevanceLabel]] = {}
        for (qid, pid), label in self._entries.items():
            self._by_query.setdefault(qid, {})[pid] = label

    def __getitem__(self, key):
        return self._entries[key]

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"QrelsSet({len(self)} entries)"

    def for_query(self, qid: str) -> dict[str, RelevanceLabel]:
        return dict(self._by_query.get(qid, {}))

    def query_ids(self) -> set[str]:
        return set(self._by_query)

    def map_labels(self, fn) -> "QrelsSet":
        return QrelsSet({k: fn(int(v)) for k, v in self._entries.items()})
