"""Replay the two worked examples through the judges with a scripted backend.

Prints each label, the criterion grades or generated query, and the calls made.
"""

from critjudge import JudgeMethod, judge
from critjudge import prompts as P
from critjudge.backend import ScriptedBackend
from critjudge.model import Criterion, CriterionGrades, Passage, Query, QueryPassagePair

Q18 = Query("q18", "dog age by teeth")
Q35 = Query("q35", "Do larger lobsters become tougher when cooked?")
P4068 = Passage(
    "p4068",
    "Puppies start to get their puppy teeth at the age of 3 to 4 weeks. They will start with 28 puppy "
    "teeth. These teeth will be replaced with their 42 permanent adult teeth at about the age of four "
    "months. Dogs have four different types of teeth",
)
P75 = Passage(
    "p75",
    "Humans and most other mammals have a temporary set of teeth, the deciduous, or milk, teeth; in "
    "humans, they usually erupt between the 6th and 24th months. These number 20 in all: 2 central "
    "incisors, 2 lateral incisors, 2 canines, and 4 premolars in each jaw. At about six years of age, "
    "the preliminary teeth begin to be shed as the permanent set replaces them.",
)
P8163 = Passage(
    "p8163",
    "I thought the whole bigger lobsters are tougher business was a myth. Larger lobsters are easier "
    "to overcook, making them tougher...but cooked properly they are no tougher. Also, meat from "
    "soft-shell lobsters is more tender than that from hard-shell lobsters. At least that's what I've read.",
)
P4661 = Passage(
    "p4661",
    "by the time a lobster gets to 3lbs, it is starting to get tough. long time cooking softens it up. "
    "a long time ago, we bought 6-8 lb lobsters in the waltham market. regular price $0.79 a lb. "
    "special, $0.69 a pound. those babies were tough. cook for about an hour, then chop them up for "
    "salad. Reply. slawecki.",
)

FOUR_PROMPT_CASES = [(QueryPassagePair(Q18, P4068), (2, 2, 3, 3), "2"), (QueryPassagePair(Q18, P75), (0, 0, 0, 0), "0")]
P2Q_CASES = [(QueryPassagePair(Q35, P8163), "toughness of lobsters", "3"), (QueryPassagePair(Q35, P4661), "cooking lobster", "2")]


def main():
    b = ScriptedBackend()
    for pair, grades, agg in FOUR_PROMPT_CASES:
        for crit, g in zip(Criterion, grades):
            b.expect(P.render_criterion_prompt(crit, pair.query, pair.passage), str(g))
        b.expect(P.render_aggregation_prompt(pair.query, pair.passage, CriterionGrades(*grades)), agg)
    for pair, generated, sim in P2Q_CASES:
        b.expect(P.render_query_generation_prompt(pair.passage), generated)
        b.expect(P.render_similarity_prompt(generated, pair.query), sim)

    for method, cases in ((JudgeMethod.FOUR_PROMPTS, FOUR_PROMPT_CASES), (JudgeMethod.SUM_DECOMPOSE, FOUR_PROMPT_CASES), (JudgeMethod.PASSAGE_TO_QUERY, P2Q_CASES)):
        print(f"== {method.value}")
        for case in cases:
            r = judge(case[0], b, method)
            detail = (
                " ".join(f"{c.key}={int(g)}" for c, g in r.grades.items()) if r.grades else f"generated={r.generated_query!r}"
            )
            print(f"{r.query_id} {r.passage_id} label={int(r.label)}  {detail}  calls={len(r.calls)}")


if __name__ == "__main__":
    main()
