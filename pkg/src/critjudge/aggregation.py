"""Non-prompt aggregation of criterion grades: sum thresholds and Gaussian naive Bayes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .model import CriterionGrades, RelevanceLabel, validate_label

MAX_SUM = 12
N_FEATURES = 4


@dataclass(frozen=True)
class ThresholdMap:
    """Inclusive ranges of grade sums, each mapped to a relevance label."""

    ranges: tuple[tuple[int, int, RelevanceLabel], ...]

    def __post_init__(self):
        ranges = tuple(sorted((lo, hi, validate_label(lab)) for lo, hi, lab in self.ranges))
        expected = 0
        prev_label = -1
        for lo, hi, label in ranges:
            if lo != expected or hi < lo:
                raise ValueError(f"threshold ranges must partition 0..{MAX_SUM} without gaps or overlaps")
            if label < prev_label:
                raise ValueError("labels must not decrease as sums increase")
            expected, prev_label = hi + 1, label
        if expected != MAX_SUM + 1:
            raise ValueError(f"threshold ranges must end at {MAX_SUM}")
        object.__setattr__(self, "ranges", ranges)

    def __call__(self, total: int) -> RelevanceLabel:
        for lo, hi, label in self.ranges:
            if lo <= total <= hi:
                return label
        raise ValueError(f"sum {total} outside 0..{MAX_SUM}")

    @classmethod
    def parse(cls, spec: str) -> "ThresholdMap":
        """Parse ``"0-4:0,5-6:1,7-9:2,10-12:3"``."""
        ranges = []
        for part in spec.split(","):
            span, label = part.strip().split(":")
            lo, _, hi = span.partition("-")
            ranges.append((int(lo), int(hi or lo), int(label)))
        return cls(tuple(ranges))

    def __str__(self):
        return ",".join(f"{lo}-{hi}:{int(lab)}" for lo, hi, lab in self.ranges)


DEFAULT_THRESHOLDS = ThresholdMap(((0, 4, 0), (5, 6, 1), (7, 9, 2), (10, 12, 3)))


def sum_to_label(grades: CriterionGrades, thresholds: ThresholdMap = DEFAULT_THRESHOLDS) -> RelevanceLabel:
    return thresholds(grades.total())


class EmptyTrainingSet(ValueError):
    pass


class DegenerateVariance(ValueError):
    pass


@dataclass(frozen=True)
class GaussianNBModel:
    classes: tuple[int, ...]
    priors: tuple[float, ...]
    means: tuple[tuple[float, ...], ...]
    variances: tuple[tuple[float, ...], ...]
    epsilon: float

    def to_json(self) -> str:
        # repr() of a float is the shortest string that round-trips exactly
        doc = {
            "classes": list(self.classes),
            "priors": list(self.priors),
            "means": [list(m) for m in self.means],
            "variances": [list(v) for v in self.variances],
            "epsilon": self.epsilon,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GaussianNBModel":
        doc = json.loads(text)
        model = cls(
            classes=tuple(int(c) for c in doc["classes"]),
            priors=tuple(float(p) for p in doc["priors"]),
            means=tuple(tuple(float(x) for x in row) for row in doc["means"]),
            variances=tuple(tuple(float(x) for x in row) for row in doc["variances"]),
            epsilon=float(doc["epsilon"]),
        )
        for c in model.classes:
            validate_label(c)
        if any(v <= 0 for row in model.variances for v in row):
            raise DegenerateVariance("model file has non-positive variances")
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "GaussianNBModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _mean(xs):
    return math.fsum(xs) / len(xs)


def _pvariance(xs):
    mu = _mean(xs)
    return math.fsum((x - mu) ** 2 for x in xs) / len(xs)


def nb_fit(features: Sequence[Sequence[float]], labels: Sequence[int], epsilon: float = 1e-9) -> GaussianNBModel:
    """Fit per-class feature means and smoothed population variances.

    The smoothing term added to every variance is ``epsilon`` times the
    largest per-feature variance of the whole training set, or ``epsilon``
    itself when every training row is identical.
    """
    if len(features) != len(labels):
        raise ValueError("features and labels differ in length")
    if not features:
        raise EmptyTrainingSet("no training rows")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    rows = [tuple(float(x) for x in row) for row in features]
    if any(len(r) != N_FEATURES for r in rows):
        raise ValueError(f"every feature row must have {N_FEATURES} values")

    columns = list(zip(*rows))
    spread = max(_pvariance(col) for col in columns)
    smoothing = epsilon * spread if spread > 0 else epsilon

    classes = sorted({int(validate_label(lab)) for lab in labels})
    n = len(rows)
    priors, means, variances = [], [], []
    for c in classes:
        members = [r for r, lab in zip(rows, labels) if lab == c]
        cols = list(zip(*members))
        priors.append(len(members) / n)
        means.append(tuple(_mean(col) for col in cols))
        var = tuple(_pvariance(col) + smoothing for col in cols)
        if any(v <= 0 for v in var):
            raise DegenerateVariance(f"class {c} has a constant feature and the smoothing term is zero")
        variances.append(var)
    return GaussianNBModel(tuple(classes), tuple(priors), tuple(means), tuple(variances), epsilon)


def log_joint(model: GaussianNBModel, x: Sequence[float]) -> list[float]:
    """Unnormalized log posterior of each class, in ``model.classes`` order."""
    out = []
    for prior, mu, var in zip(model.priors, model.means, model.variances):
        ll = math.log(prior)
        for xi, m, v in zip(x, mu, var):
            ll -= 0.5 * math.log(2.0 * math.pi * v) + (xi - m) ** 2 / (2.0 * v)
        out.append(ll)
    return out


def nb_predict(model: GaussianNBModel, grades: CriterionGrades | Sequence[float]) -> RelevanceLabel:
    x = grades.as_tuple() if isinstance(grades, CriterionGrades) else tuple(grades)
    scores = log_joint(model, x)
    # classes are sorted ascending and only a strictly larger score wins,
    # so exact ties go to the smaller label
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return RelevanceLabel(model.classes[best])
