"""Leaderboard correlation and label agreement statistics."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import QrelsSet


class UndefinedStatistic(ArithmeticError):
    """The statistic has a zero denominator for this input."""


class EmptyRun(ValueError):
    pass


class CollapseScheme(enum.Enum):
    """Label groupings for binarized agreement; each group maps to its smallest member."""

    FOUR_POINT = ("4point", (0, 1, 2, 3))
    ZERO_VS_123 = ("0v123", (0, 1, 1, 1))
    ZERO_ONE_VS_23 = ("01v23", (0, 0, 2, 2))
    ZERO_ONE_TWO_VS_3 = ("012v3", (0, 0, 0, 3))

    def __init__(self, tag: str, table: tuple[int, ...]):
        self.tag = tag
        self.table = table

    def __call__(self, label: int) -> int:
        return self.table[label]


class Distance(enum.Enum):
    NOMINAL = "nominal"
    ORDINAL = "ordinal"
    INTERVAL = "interval"


@dataclass(frozen=True)
class LabelVectorPair:
    """Two label vectors aligned on the keys both sides share."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    only_a: int = 0
    only_b: int = 0

    def __post_init__(self):
        if len(self.a) != len(self.b):
            raise ValueError("label vectors differ in length")
        if not self.a:
            raise ValueError("label vectors are empty")

    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def align(cls, a: Mapping, b: Mapping) -> "LabelVectorPair":
        common = sorted(set(a) & set(b))
        return cls(
            tuple(int(a[k]) for k in common),
            tuple(int(b[k]) for k in common),
            only_a=len(a) - len(common),
            only_b=len(b) - len(common),
        )


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def kendall_tau(a: Sequence[float], b: Sequence[float]) -> float:
    """Kendall's tau-b.

    tau_b = (C - D) / sqrt((n0 - n1) * (n0 - n2)) where n1 and n2 count the
    pairs tied in ``a`` and in ``b``. Leaderboards hold tens of systems, so the
    quadratic pair scan is fine.
    """
    n = len(a)
    if n != len(b):
        raise ValueError("vectors differ in length")
    if n < 2:
        raise ValueError("need at least two items")
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = _sign(a[i] - a[j]) * _sign(b[i] - b[j])
            if s > 0:
                concordant += 1
            elif s < 0:
                discordant += 1
    n0 = n * (n - 1) // 2
    ties_a = sum(c * (c - 1) // 2 for c in Counter(a).values())
    ties_b = sum(c * (c - 1) // 2 for c in Counter(b).values())
    denom = (n0 - ties_a) * (n0 - ties_b)
    if denom == 0:
        raise UndefinedStatistic("tau-b undefined: one vector is constant")
    return (concordant - discordant) / math.sqrt(denom)


def cohens_kappa(pair: LabelVectorPair, scheme: CollapseScheme = CollapseScheme.FOUR_POINT) -> float:
    a = [scheme(x) for x in pair.a]
    b = [scheme(x) for x in pair.b]
    n = len(a)
    p_o = sum(x == y for x, y in zip(a, b)) / n
    ca, cb = Counter(a), Counter(b)
    p_e = sum(ca[k] * cb[k] for k in ca) / (n * n)
    if p_e == 1:
        raise UndefinedStatistic("kappa undefined: both raters constant and equal")
    return (p_o - p_e) / (1 - p_e)


def _delta_squared(values: Sequence[int], counts: Mapping[int, int], distance: Distance):
    if distance is Distance.NOMINAL:
        return lambda c, k: 0.0 if c == k else 1.0
    if distance is Distance.INTERVAL:
        return lambda c, k: float((c - k) ** 2)
    # ordinal: cumulative mass between the two ranks, halving the endpoints
    ordered = sorted(values)

    def ordinal(c, k):
        if c == k:
            return 0.0
        lo, hi = min(c, k), max(c, k)
        mass = sum(counts.get(g, 0) for g in ordered if lo <= g <= hi)
        return (mass - (counts[c] + counts[k]) / 2.0) ** 2

    return ordinal


def krippendorff_alpha(pair: LabelVectorPair, distance: Distance = Distance.INTERVAL) -> float:
    """Two-rater Krippendorff's alpha from the coincidence matrix, 1 - D_o / D_e."""
    coincidence: Counter = Counter()
    for x, y in zip(pair.a, pair.b):
        # each unit has two pairable values, weight 1 / (m_u - 1) = 1
        coincidence[(x, y)] += 1
        coincidence[(y, x)] += 1
    marginals: Counter = Counter()
    for (c, _), w in coincidence.items():
        marginals[c] += w
    n = sum(marginals.values())
    if n < 2:
        raise UndefinedStatistic("alpha needs at least two pairable values")
    values = sorted(marginals)
    d2 = _delta_squared(values, marginals, distance)
    d_o = math.fsum(w * d2(c, k) for (c, k), w in coincidence.items()) / n
    d_e = math.fsum(marginals[c] * marginals[k] * d2(c, k) for c in values for k in values) / (n * (n - 1))
    if d_e == 0:
        raise UndefinedStatistic("alpha undefined: no variation in pooled values")
    return 1.0 - d_o / d_e


@dataclass(frozen=True)
class RunFile:
    system_tag: str
    entries: Mapping[str, tuple[tuple[str, float], ...]]

    def __post_init__(self):
        for qid, ranked in self.entries.items():
            pids = [pid for pid, _ in ranked]
            if len(set(pids)) != len(pids):
                raise ValueError(f"run {self.system_tag}: duplicate passage in query {qid}")


@dataclass(frozen=True)
class Leaderboard:
    rows: tuple[tuple[str, float], ...]

    @property
    def tags(self) -> list[str]:
        return [tag for tag, _ in self.rows]

    def scores(self) -> dict[str, float]:
        return dict(self.rows)


def dcg(labels: Sequence[int], k: int) -> float:
    return math.fsum((2**lab - 1) / math.log2(rank + 1) for rank, lab in enumerate(labels[:k], start=1))


def ndcg_at_k(run: RunFile, qrels: QrelsSet, k: int = 10) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not run.entries:
        raise EmptyRun(f"run {run.system_tag} has no queries")
    per_query = []
    for qid in sorted(run.entries):
        judged = qrels.for_query(qid)
        ideal = dcg(sorted((int(v) for v in judged.values()), reverse=True), k)
        if ideal == 0:
            per_query.append(0.0)
            continue
        gains = [int(judged.get(pid, 0)) for pid, _ in run.entries[qid]]
        per_query.append(dcg(gains, k) / ideal)
    return math.fsum(per_query) / len(per_query)


def build_leaderboard(runs: Sequence[RunFile], qrels: QrelsSet, k: int = 10) -> Leaderboard:
    if len(runs) < 2:
        raise ValueError("a leaderboard needs at least two runs")
    scored = [(run.system_tag, ndcg_at_k(run, qrels, k)) for run in runs]
    # sorted() is stable, so equal scores keep input order
    return Leaderboard(tuple(sorted(scored, key=lambda row: -row[1])))


def leaderboard_correlation(runs: Sequence[RunFile], qrels_manual: QrelsSet, qrels_predicted: QrelsSet, k: int = 10) -> float:
    manual = build_leaderboard(runs, qrels_manual, k).scores()
    predicted = build_leaderboard(runs, qrels_predicted, k).scores()
    tags = [run.system_tag for run in runs]
    return kendall_tau([manual[t] for t in tags], [predicted[t] for t in tags])
