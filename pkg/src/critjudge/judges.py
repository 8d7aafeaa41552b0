"""The five judging strategies.

Every judge is total: whatever the backend does, it returns a ``JudgedPair``
with a label in 0-3. Backend faults and unparseable replies degrade to 0 and
leave a note on the result.
"""

from __future__ import annotations

import enum
import logging

from . import prompts
from .aggregation import DEFAULT_THRESHOLDS, GaussianNBModel, ThresholdMap, nb_predict
from .backend import Backend, BackendError, ChatRequest, DecodeParams
from .model import CallRecord, Criterion, CriterionGrades, Grade, JudgedPair, QueryPassagePair, RelevanceLabel

log = logging.getLogger(__name__)


class JudgeMethod(str, enum.Enum):
    FOUR_PROMPTS = "TREMA-4prompts"
    SUM_DECOMPOSE = "TREMA-sumdecompose"
    NAIVE_BAYES = "TREMA-naiveBdecompose"
    BINARY_CHECK_COT = "TREMA-CoT"
    PASSAGE_TO_QUERY = "TREMA-other"

    @classmethod
    def parse(cls, text: str) -> "JudgeMethod":
        for m in cls:
            if text in (m.value, m.name, m.name.lower(), _ALIASES[m]):
                return m
        raise ValueError(f"unknown judge method {text!r}; choose from {[m.value for m in cls]}")


_ALIASES = {
    JudgeMethod.FOUR_PROMPTS: "4prompts",
    JudgeMethod.SUM_DECOMPOSE: "sum",
    JudgeMethod.NAIVE_BAYES: "naive-bayes",
    JudgeMethod.BINARY_CHECK_COT: "binary",
    JudgeMethod.PASSAGE_TO_QUERY: "p2q",
}

YES_CRITERIA = (Criterion.EXACTNESS, Criterion.COVERAGE)
NO_CRITERIA = (Criterion.TOPICALITY, Criterion.CONTEXTUAL_FIT)


class Transcript:
    """Records the backend calls and error notes for one pair."""

    def __init__(self, backend: Backend, decode: DecodeParams | None = None):
        self.backend = backend
        self.decode = decode or DecodeParams()
        self.calls: list[CallRecord] = []
        self.notes: list[str] = []

    def ask(self, step: str, prompt: prompts.RenderedPrompt) -> str | None:
        request = ChatRequest(prompt.system_message, prompt.user_prompt, self.decode)
        try:
            reply = self.backend.complete(request).text
        except BackendError as err:
            self.note(f"{step}: {err}")
            self.calls.append(CallRecord(step, prompt.hash, prompt.system_message, prompt.user_prompt, None, str(err)))
            return None
        self.calls.append(CallRecord(step, prompt.hash, prompt.system_message, prompt.user_prompt, reply))
        return reply

    def score(self, step: str, prompt: prompts.RenderedPrompt, lo: int = 0, hi: int = 3) -> int | None:
        reply = self.ask(step, prompt)
        if reply is None:
            return None
        try:
            return prompts.parse_score(reply, lo, hi)
        except prompts.NoValidScore as err:
            self.note(f"{step}: NoValidScore: {err}")
            return None

    def note(self, text: str) -> None:
        log.debug(text)
        self.notes.append(text)

    def result(self, pair: QueryPassagePair, method: JudgeMethod, label: int | None, **extra) -> JudgedPair:
        return JudgedPair(
            query_id=pair.query.id,
            passage_id=pair.passage.id,
            method=method.value,
            label=RelevanceLabel(0 if label is None else label),
            notes=tuple(self.notes),
            calls=tuple(self.calls),
            **extra,
        )


def _grade(pair: QueryPassagePair, criteria, transcript: Transcript) -> dict[Criterion, Grade]:
    grades = {}
    for criterion in criteria:
        prompt = prompts.render_criterion_prompt(criterion, pair.query, pair.passage)
        value = transcript.score(f"criterion:{criterion.key}", prompt)
        grades[criterion] = Grade(0 if value is None else value)
    return grades


def grade_all_criteria(pair: QueryPassagePair, backend: Backend, transcript: Transcript | None = None) -> CriterionGrades:
    transcript = transcript or Transcript(backend)
    return CriterionGrades.from_mapping(_grade(pair, tuple(Criterion), transcript))


def judge_four_prompts(pair: QueryPassagePair, backend: Backend, decode: DecodeParams | None = None) -> JudgedPair:
    t = Transcript(backend, decode)
    grades = grade_all_criteria(pair, backend, t)
    label = t.score("aggregate", prompts.render_aggregation_prompt(pair.query, pair.passage, grades))
    return t.result(pair, JudgeMethod.FOUR_PROMPTS, label, grades=_as_map(grades))


def judge_sum(
    pair: QueryPassagePair,
    backend: Backend,
    thresholds: ThresholdMap = DEFAULT_THRESHOLDS,
    decode: DecodeParams | None = None,
) -> JudgedPair:
    t = Transcript(backend, decode)
    grades = grade_all_criteria(pair, backend, t)
    return t.result(pair, JudgeMethod.SUM_DECOMPOSE, thresholds(grades.total()), grades=_as_map(grades))


def judge_naive_bayes(
    pair: QueryPassagePair, backend: Backend, model: GaussianNBModel, decode: DecodeParams | None = None
) -> JudgedPair:
    t = Transcript(backend, decode)
    grades = grade_all_criteria(pair, backend, t)
    return t.result(pair, JudgeMethod.NAIVE_BAYES, nb_predict(model, grades), grades=_as_map(grades))


def judge_binary_branch(pair: QueryPassagePair, backend: Backend, decode: DecodeParams | None = None) -> JudgedPair:
    """Binary relevance check first, then two criteria and a range-restricted final grade.

    "Yes" grades exactness and coverage and asks for a 2-or-3 label; "No"
    grades topicality and contextual fit and asks for a 0-or-1 label.
    """
    t = Transcript(backend, decode)
    method = JudgeMethod.BINARY_CHECK_COT
    reply = t.ask("binary", prompts.render_binary_prompt(pair.query, pair.passage))
    if reply is None:
        return t.result(pair, method, None)
    try:
        relevant = prompts.parse_yes_no(reply)
    except prompts.AmbiguousDecision as err:
        t.note(f"binary: AmbiguousDecision: {err}")
        return t.result(pair, method, None)

    if relevant:
        grades = _grade(pair, YES_CRITERIA, t)
        prompt = prompts.render_relevance_grading_prompt(
            pair.query, pair.passage, grades[Criterion.EXACTNESS], grades[Criterion.COVERAGE]
        )
        label = t.score("relevance-grading", prompt, 2, 3)
    else:
        grades = _grade(pair, NO_CRITERIA, t)
        prompt = prompts.render_nonrelevance_grading_prompt(
            pair.query, pair.passage, grades[Criterion.TOPICALITY], grades[Criterion.CONTEXTUAL_FIT]
        )
        label = t.score("nonrelevance-grading", prompt, 0, 1)
    return t.result(pair, method, label, grades=grades, binary_check=relevant)


def clean_generated_query(text: str) -> str:
    return text.strip().strip("\"'`“”‘’").strip()


def judge_passage_to_query(pair: QueryPassagePair, backend: Backend, decode: DecodeParams | None = None) -> JudgedPair:
    t = Transcript(backend, decode)
    method = JudgeMethod.PASSAGE_TO_QUERY
    reply = t.ask("generate-query", prompts.render_query_generation_prompt(pair.passage))
    if reply is None:
        return t.result(pair, method, None)
    generated = clean_generated_query(reply)
    if not prompts.normalize(generated):
        t.note("generate-query: empty generated query")
        return t.result(pair, method, None, generated_query=generated)
    label = t.score("similarity", prompts.render_similarity_prompt(generated, pair.query))
    return t.result(pair, method, label, generated_query=generated)


def judge(
    pair: QueryPassagePair,
    backend: Backend,
    method: JudgeMethod,
    *,
    thresholds: ThresholdMap = DEFAULT_THRESHOLDS,
    nb_model: GaussianNBModel | None = None,
    decode: DecodeParams | None = None,
) -> JudgedPair:
    if method is JudgeMethod.FOUR_PROMPTS:
        return judge_four_prompts(pair, backend, decode)
    if method is JudgeMethod.SUM_DECOMPOSE:
        return judge_sum(pair, backend, thresholds, decode)
    if method is JudgeMethod.NAIVE_BAYES:
        if nb_model is None:
            raise ValueError("the naive Bayes method needs a fitted model")
        return judge_naive_bayes(pair, backend, nb_model, decode)
    if method is JudgeMethod.BINARY_CHECK_COT:
        return judge_binary_branch(pair, backend, decode)
    if method is JudgeMethod.PASSAGE_TO_QUERY:
        return judge_passage_to_query(pair, backend, decode)
    raise ValueError(f"unhandled method {method}")


def _as_map(grades: CriterionGrades) -> dict[Criterion, Grade]:
    return {c: grades[c] for c in Criterion}
