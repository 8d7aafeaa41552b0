"""Prompt templates for every judging step, plus reply parsers.

Templates are kept as string constants on purpose: the wording is the method,
so any change to it should show up as a code diff.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .backend import prompt_hash
from .model import Criterion, CriterionGrades, Grade, Passage, Query

CRITERION_SYSTEM = (
    "Please assess how well the provided passage meets specific criteria in relation to the query. "
    "Use the following scoring scale (0-3) for evaluation:\n"
    "\n"
    "0: Not relevant at all / No information provided.\n"
    "1: Marginally relevant / Partially addresses the criterion.\n"
    "2: Fairly relevant / Adequately addresses the criterion.\n"
    "3: Highly relevant / Fully satisfies the criterion."
)

CRITERION_PROMPT = (
    "Please rate how well the given passage meets the {criterion_name} criterion in relation to the query. "
    "The output should be a single score (0-3) indicating {criterion_description}.\n"
    "Query: {query}\n"
    "Passage: {passage}\n"
    "Score:"
)

AGGREGATION_SYSTEM = (
    "You are a search quality rater evaluating the relevance of passages. Given a query and passage, "
    "you must provide a score on an integer scale of 0 to 3 with the following meanings:\n"
    "3 = Perfectly relevant: The passage is dedicated to the query and contains the exact answer.\n"
    "2 = Highly relevant: The passage has some answer for the query, but the answer may be a bit "
    "unclear, or hidden amongst extraneous information.\n"
    "1 = Related: The passage seems related to the query but does not answer it.\n"
    "0 = Irrelevant: The passage has nothing to do with the query.\n"
    "Assume that you are writing an answer to the query. If the passage seems to be related to the "
    "query but does not include any answer to the query, mark it 1. If you would use any of the "
    "information contained in the passage in such an answer, mark it 2. If the passage is primarily "
    "about the query, or contains vital information about the topic, mark it 3. Otherwise, mark it 0."
)

AGGREGATION_PROMPT = (
    "Please rate how the given passage is relevant to the query based on the given scores. "
    "The output must be only a score that indicates how relevant they are.\n"
    "Query: {query}\n"
    "Passage: {passage}\n"
    "Exactness: {exactness}\n"
    "Topicality: {topicality}\n"
    "Coverage: {coverage}\n"
    "Contextual Fit: {contextual_fit}\n"
    "Score:"
)

BINARY_PROMPT = (
    "Instruction: Given a passage and a query, predict whether the passage includes an answer "
    'to the query by producing either "Yes" or "No".\n'
    "Question: {query} Passage: {passage} Answer:"
)

RELEVANCE_GRADING_SYSTEM = (
    "You are a search quality rater evaluating the relevance of passages. Given a query and passage, "
    "you must provide a score on an integer scale of 2 or 3 with the following meanings:\n"
    "2 = Highly relevant: The passage has some answer for the query, but the answer may be a bit "
    "unclear, or hidden amongst extraneous information.\n"
    "3 = Perfectly relevant: The passage is dedicated to the query and contains the exact answer."
)

RELEVANCE_GRADING_PROMPT = (
    "The given passage is relevant to the query, please rate how relevant it is to the query. "
    "The output must be only a score (2 or 3) that indicates how relevant they are.\n"
    "Query: {query}\n"
    "Passage: {passage}\n"
    "Exactness: {exactness}\n"
    "Coverage: {coverage}\n"
    "Score:"
)

NONRELEVANCE_GRADING_SYSTEM = (
    "You are a search quality rater evaluating the relevance of passages. Given a query and passage, "
    "you must provide a score on an integer scale of 0 or 1 with the following meanings:\n"
    "0 = Irrelevant: The passage has nothing to do with the query.\n"
    "1 = Related: The passage seems related to the query but does not answer it."
)

NONRELEVANCE_GRADING_PROMPT = (
    "The given passage is irrelevant to the query, please rate how irrelevant it is to the query. "
    "The output must be only a score (0 or 1) that indicates how irrelevant they are.\n"
    "Query: {query}\n"
    "Passage: {passage}\n"
    "Topicality: {topicality}\n"
    "Contextual Fit: {contextual_fit}\n"
    "Score:"
)

QUERY_GENERATION_SYSTEM = (
    "You are a query generator. For example, having this document:'Categories: Dogs. "
    "Article Summary X. If your puppy is starting to get teeth, it's probably between 3 and 4 "
    "weeks old. At 8 weeks of age, your puppy will have 28 baby teeth. For an adult dog, expect "
    "1 or 2-year-olds to have white teeth, while 3-year-olds may have signs of tooth decay, such "
    "as yellow and brown tartar.' You should generate a query such as: 'dog age by teeth'."
)

QUERY_GENERATION_PROMPT = (
    "Please identify the search query that best corresponds to the following passage. "
    "Keep your response concise. Passage: {passage}."
)

SIMILARITY_SYSTEM = (
    "You are a similarity evaluator agent. "
    "Please rate the similarity between the two items on a scale from 0 to 3."
)

SIMILARITY_PROMPT = (
    "Please rate the similarity between the following queries:\n"
    "{generated_query}\n"
    "and\n"
    "{original_query}\n"
    "3: Highest similarity\n"
    "2: Fairly similar\n"
    "1: Minor similarity\n"
    "0: Not similar"
)

_WS = re.compile(r"\s+")
_DIGIT_RUN = re.compile(r"[0-9]+")
_ALPHA_TOKEN = re.compile(r"[A-Za-z]+")


class NoValidScore(ValueError):
    pass


class AmbiguousDecision(ValueError):
    pass


@dataclass(frozen=True)
class RenderedPrompt:
    system_message: str
    user_prompt: str

    @property
    def hash(self) -> str:
        return prompt_hash(self.system_message, self.user_prompt)


def normalize(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim."""
    return _WS.sub(" ", text).strip()


def render_criterion_prompt(criterion: Criterion, query: Query, passage: Passage) -> RenderedPrompt:
    # the template already ends the description slot with a period
    description = criterion.description.rstrip(".")
    user = CRITERION_PROMPT.format(
        criterion_name=criterion.label,
        criterion_description=description,
        query=normalize(query.text),
        passage=normalize(passage.text),
    )
    return RenderedPrompt(CRITERION_SYSTEM, user)


def render_aggregation_prompt(query: Query, passage: Passage, grades: CriterionGrades) -> RenderedPrompt:
    user = AGGREGATION_PROMPT.format(
        query=normalize(query.text),
        passage=normalize(passage.text),
        exactness=int(grades.exactness),
        topicality=int(grades.topicality),
        coverage=int(grades.coverage),
        contextual_fit=int(grades.contextual_fit),
    )
    return RenderedPrompt(AGGREGATION_SYSTEM, user)


def render_binary_prompt(query: Query, passage: Passage) -> RenderedPrompt:
    user = BINARY_PROMPT.format(query=normalize(query.text), passage=normalize(passage.text))
    return RenderedPrompt("", user)


def render_relevance_grading_prompt(query: Query, passage: Passage, exactness: Grade, coverage: Grade) -> RenderedPrompt:
    user = RELEVANCE_GRADING_PROMPT.format(
        query=normalize(query.text),
        passage=normalize(passage.text),
        exactness=int(Grade(exactness)),
        coverage=int(Grade(coverage)),
    )
    return RenderedPrompt(RELEVANCE_GRADING_SYSTEM, user)


def render_nonrelevance_grading_prompt(
    query: Query, passage: Passage, topicality: Grade, contextual_fit: Grade
) -> RenderedPrompt:
    user = NONRELEVANCE_GRADING_PROMPT.format(
        query=normalize(query.text),
        passage=normalize(passage.text),
        topicality=int(Grade(topicality)),
        contextual_fit=int(Grade(contextual_fit)),
    )
    return RenderedPrompt(NONRELEVANCE_GRADING_SYSTEM, user)


def render_query_generation_prompt(passage: Passage) -> RenderedPrompt:
    return RenderedPrompt(QUERY_GENERATION_SYSTEM, QUERY_GENERATION_PROMPT.format(passage=normalize(passage.text)))


def render_similarity_prompt(generated_query: str, original_query: Query) -> RenderedPrompt:
    generated = normalize(generated_query)
    if not generated:
        raise ValueError("generated query is empty")
    user = SIMILARITY_PROMPT.format(generated_query=generated, original_query=normalize(original_query.text))
    return RenderedPrompt(SIMILARITY_SYSTEM, user)


def parse_score(text: str, lo: int = 0, hi: int = 3) -> int:
    """Return the first standalone number in ``text`` that lies in ``[lo, hi]``.

    A standalone number is a maximal run of ASCII digits, so "42" is read as
    forty-two (and skipped for a 0-3 scale) rather than as a 4 followed by a 2.
    Signs and decimal points act as delimiters.
    """
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    width = len(str(hi))
    for match in _DIGIT_RUN.finditer(text):
        digits = match.group().lstrip("0") or "0"
        if len(digits) > width:
            # too long to be in range; also sidesteps int()'s digit limit
            continue
        value = int(digits)
        if lo <= value <= hi:
            return value
    raise NoValidScore(f"no standalone number in [{lo}, {hi}] in reply {text[:80]!r}")


def parse_yes_no(text: str) -> bool:
    match = _ALPHA_TOKEN.search(text)
    if match:
        token = match.group().lower()
        if token.startswith("yes"):
            return True
        if token.startswith("no"):
            return False
    raise AmbiguousDecision(f"reply is neither yes nor no: {text[:80]!r}")
