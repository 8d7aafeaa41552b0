import re
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from conftest import P4068, P75, P8163, Q18, Q35
from critjudge import prompts as P
from critjudge.model import Criterion, CriterionGrades, Passage, Query

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_CASES = {
    "criterion_exactness_q18_p4068": lambda: P.render_criterion_prompt(Criterion.EXACTNESS, Q18, P4068),
    "criterion_contextual_fit_q18_p75": lambda: P.render_criterion_prompt(Criterion.CONTEXTUAL_FIT, Q18, P75),
    "aggregation_q18_p4068": lambda: P.render_aggregation_prompt(Q18, P4068, CriterionGrades(2, 2, 3, 3)),
    "binary_q18_p4068": lambda: P.render_binary_prompt(Q18, P4068),
    "relevance_grading_q18_p4068": lambda: P.render_relevance_grading_prompt(Q18, P4068, 2, 2),
    "nonrelevance_grading_q18_p75": lambda: P.render_nonrelevance_grading_prompt(Q18, P75, 0, 0),
    "query_generation_p8163": lambda: P.render_query_generation_prompt(P8163),
    "similarity_q35_p8163": lambda: P.render_similarity_prompt("toughness of lobsters", Q35),
}


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_transcripts(name):
    rp = GOLDEN_CASES[name]()
    rendered = f"=== SYSTEM ===\n{rp.system_message}\n=== USER ===\n{rp.user_prompt}\n"
    assert rendered == (GOLDEN / f"{name}.txt").read_text(encoding="utf-8")


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_render_is_pure(name):
    assert GOLDEN_CASES[name]() == GOLDEN_CASES[name]()


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_no_unresolved_placeholders(name):
    rp = GOLDEN_CASES[name]()
    assert not re.search(r"\{[A-Za-z_ ]+\}", rp.system_message + rp.user_prompt)


def test_criterion_prompt_content():
    rp = P.render_criterion_prompt(Criterion.EXACTNESS, Q18, P4068)
    assert "meets the Exactness criterion" in rp.user_prompt
    assert "indicating How precisely does the passage answer the query." in rp.user_prompt
    assert rp.system_message.startswith("Please assess how well the provided passage meets specific criteria")
    cov = P.render_criterion_prompt(Criterion.COVERAGE, Q18, P75)
    assert "How much of the passage is dedicated to discussing the query and its related topics." in cov.user_prompt


@pytest.mark.parametrize("criterion", list(Criterion))
def test_criterion_name_round_trips(criterion):
    rp = P.render_criterion_prompt(criterion, Q18, P4068)
    found = re.findall(r"meets the (.+?) criterion in relation", rp.user_prompt)
    assert found == [criterion.label]
    assert [c for c in Criterion if f"meets the {c.label} criterion" in rp.user_prompt] == [criterion]


def test_aggregation_grade_order():
    rp = P.render_aggregation_prompt(Q18, P4068, CriterionGrades(exactness=2, coverage=2, topicality=3, contextual_fit=3))
    lines = rp.user_prompt.splitlines()
    assert lines[-5:] == ["Exactness: 2", "Topicality: 3", "Coverage: 2", "Contextual Fit: 3", "Score:"]
    assert "3 = Perfectly relevant" in rp.system_message
    assert "0 = Irrelevant" in rp.system_message
    zero = P.render_aggregation_prompt(Q18, P75, CriterionGrades(0, 0, 0, 0))
    assert zero.user_prompt.splitlines()[-5:-1] == ["Exactness: 0", "Topicality: 0", "Coverage: 0", "Contextual Fit: 0"]


def test_binary_prompt():
    rp = P.render_binary_prompt(Q18, P4068)
    assert rp.system_message == ""
    assert rp.user_prompt.startswith("Instruction: Given a passage and a query, predict whether the passage")
    # whitespace-only passages are a validation concern, not a rendering one
    assert P.render_binary_prompt(Q18, Passage("p0", "  \n ")).user_prompt.endswith("Passage:  Answer:")


def test_branch_grading_prompts():
    rel = P.render_relevance_grading_prompt(Q18, P4068, 3, 2)
    assert "Exactness: 3" in rel.user_prompt and "Coverage: 2" in rel.user_prompt
    assert "Topicality" not in rel.user_prompt
    assert "integer scale of 2 or 3" in rel.system_message
    assert P.render_relevance_grading_prompt(Q18, P4068, 0, 0).user_prompt
    non = P.render_nonrelevance_grading_prompt(Q18, P75, 1, 0)
    assert "Topicality: 1" in non.user_prompt and "Contextual Fit: 0" in non.user_prompt
    assert "Exactness" not in non.user_prompt
    assert "integer scale of 0 or 1" in non.system_message
    assert P.render_nonrelevance_grading_prompt(Q18, P75, 3, 3).user_prompt


def test_query_generation_and_similarity():
    gen = P.render_query_generation_prompt(P8163)
    assert "'dog age by teeth'" in gen.system_message
    assert "Larger lobsters are easier to overcook" in gen.user_prompt
    sim = P.render_similarity_prompt("toughness of lobsters", Q35)
    body = sim.user_prompt
    assert body.index("toughness of lobsters") < body.index(Q35.text)
    assert "3: Highest similarity" in body
    same = P.render_similarity_prompt(Q35.text, Q35)
    assert same.user_prompt.count(Q35.text) == 2
    with pytest.raises(ValueError):
        P.render_similarity_prompt("   ", Q35)


def test_whitespace_normalized_only_at_render():
    messy = Passage("p", "Line one.\n\n   Line\ttwo.  ")
    rp = P.render_binary_prompt(Query("q", "  a   query "), messy)
    assert "Question: a query Passage: Line one. Line two. Answer:" in rp.user_prompt
    assert messy.text == "Line one.\n\n   Line\ttwo.  "


def test_braces_in_passage_survive():
    rp = P.render_criterion_prompt(Criterion.COVERAGE, Q18, Passage("p", "uses {Query} and {0} literally"))
    assert "uses {Query} and {0} literally" in rp.user_prompt


# ---- parse_score ----------------------------------------------------------

# (reply, lo, hi, expected); None means NoValidScore
PARSE_CASES = [
    ("2", 0, 3, 2),
    ("0", 0, 3, 0),
    ("1", 0, 3, 1),
    ("3", 0, 3, 3),
    ("4", 0, 3, None),
    (" 3 ", 0, 3, 3),
    ("3\n", 0, 3, 3),
    ("Score: 2", 0, 3, 2),
    ("The answer is 42, so I rate it 1.", 0, 3, 1),
    ("42, so 1", 0, 3, 1),
    ("I cannot determine relevance.", 0, 3, None),
    ("", 0, 3, None),
    ("Score: 3\nBecause the passage...", 2, 3, 3),
    ("Score: 1", 2, 3, None),
    ("1 or maybe 2", 2, 3, 2),
    ("0", 2, 3, None),
    ("2", 0, 1, None),
    ("Score: 0", 0, 1, 0),
    ("3, no wait, 1", 0, 1, 1),
    ("30", 0, 3, None),
    ("03", 0, 3, 3),
    ("007", 0, 3, None),
    ("2.5", 0, 3, 2),
    ("-1", 0, 3, 1),
    ("Relevance: two (2)", 0, 3, 2),
    ("**3**", 0, 3, 3),
    ("[1]", 0, 3, 1),
    ("Exactness: 12 / Coverage: 3", 0, 3, 3),
    ("2023 was a year; label 2", 0, 3, 2),
    ("score=3", 0, 3, 3),
    ("3/3", 0, 3, 3),
    ("10/10", 0, 3, None),
    ("10 out of 10", 0, 3, None),
    ("The passage is highly relevant.", 0, 3, None),
    ("three", 0, 3, None),
    ("a1b", 0, 3, 1),
    ("x99y2", 0, 3, 2),
    ("Rating:\t0", 0, 3, 0),
    ("٣", 0, 3, None),  # Arabic-Indic digit is not an ASCII digit run
    ("1e3", 0, 3, 1),
    ("Step 4: final 3", 0, 3, 3),
    ("Step 4: final 3", 2, 3, 3),
    ("Step 4: final 3", 0, 1, None),
    ("4 5 6", 0, 3, None),
    ("9" * 5000 + " 2", 0, 3, 2),
    ("0" * 5000 + "1", 0, 3, 1),
    ("Yes", 0, 3, None),
    ("(1)", 0, 1, 1),
    ("Answer: 2\n\nExplanation: the passage mentions 3 facts", 0, 3, 2),
    ("1", 1, 1, 1),
]


def test_parse_table_size():
    assert len(PARSE_CASES) == 50


@pytest.mark.parametrize("text,lo,hi,expected", PARSE_CASES)
def test_parse_score_table(text, lo, hi, expected):
    if expected is None:
        with pytest.raises(P.NoValidScore):
            P.parse_score(text, lo, hi)
    else:
        assert P.parse_score(text, lo, hi) == expected


@given(st.text(), st.integers(0, 3), st.integers(0, 3))
def test_parse_score_total_and_in_range(text, lo, hi):
    if lo > hi:
        lo, hi = hi, lo
    try:
        value = P.parse_score(text, lo, hi)
    except P.NoValidScore:
        assert not any(lo <= int(m) <= hi for m in re.findall(r"[0-9]+", text) if len(m) < 50)
        return
    assert lo <= value <= hi


@given(st.lists(st.integers(0, 99), min_size=1, max_size=8), st.sampled_from([" ", ", ", "x", "\n", " / "]))
def test_parse_score_picks_leftmost_in_range(nums, sep):
    text = sep.join(str(n) for n in nums)
    in_range = [n for n in nums if n <= 3]
    if in_range:
        assert P.parse_score(text, 0, 3) == in_range[0]
    else:
        with pytest.raises(P.NoValidScore):
            P.parse_score(text, 0, 3)


def test_parse_score_bad_range():
    with pytest.raises(ValueError):
        P.parse_score("1", 3, 2)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Yes", True),
        ("yes.", True),
        ('"Yes"', True),
        ("  YES, it does", True),
        ("no, the passage does not answer it", False),
        ("No.", False),
        ("**No**", False),
        ("1. Yes", True),
    ],
)
def test_parse_yes_no(text, expected):
    assert P.parse_yes_no(text) is expected


@pytest.mark.parametrize("text", ["Maybe", "", "42", "The passage is relevant"])
def test_parse_yes_no_ambiguous(text):
    with pytest.raises(P.AmbiguousDecision):
        P.parse_yes_no(text)
