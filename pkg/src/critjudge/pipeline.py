"""Batch orchestration: judge a pool, fit the naive Bayes aggregator, evaluate."""

from __future__ import annotations

import configparser
import dataclasses
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import formats
from .aggregation import DEFAULT_THRESHOLDS, EmptyTrainingSet, GaussianNBModel, ThresholdMap, nb_fit
from .backend import DEFAULT_MAX_CHARS, DEFAULT_MODEL, Backend, DecodeParams, OpenAIChatBackend, ScriptedBackend
from .judges import JudgeMethod, Transcript, grade_all_criteria, judge
from .metrics import (
    CollapseScheme,
    Distance,
    LabelVectorPair,
    RunFile,
    UndefinedStatistic,
    build_leaderboard,
    cohens_kappa,
    krippendorff_alpha,
    leaderboard_correlation,
)
from .model import JudgedPair, QrelsSet, QueryPassagePair

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class NoOverlap(ValueError):
    pass


@dataclass
class PipelineConfig:
    """Settings for one batch run.

    Loaded from a flat ``key = value`` file; the API key itself is never read
    from the file, only the name of the environment variable holding it.
    """

    method: JudgeMethod = JudgeMethod.FOUR_PROMPTS
    backend: str = "openai"
    endpoint: str = "http://localhost:8000/v1"
    model: str = DEFAULT_MODEL
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    max_new_tokens: int = 64
    max_chars: int = DEFAULT_MAX_CHARS
    retries: int = 2
    timeout: float = 60.0
    parallelism: int = 4
    thresholds: ThresholdMap = DEFAULT_THRESHOLDS
    nb_model: Path | None = None
    script: Path | None = None
    pairs: Path | None = None
    output: Path | None = None
    audit: Path | None = None
    verbose_audit: bool = False
    record_timing: bool = False

    def validate(self) -> None:
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.backend not in ("openai", "scripted"):
            raise ConfigError(f"backend must be 'openai' or 'scripted', not {self.backend!r}")
        if self.backend == "scripted" and self.script is None:
            raise ConfigError("the scripted backend needs a script path")
        if (self.method is JudgeMethod.NAIVE_BAYES) != (self.nb_model is not None):
            raise ConfigError("nb_model is required for, and only for, the naive Bayes method")
        try:
            self.decode()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def decode(self) -> DecodeParams:
        return DecodeParams(self.temperature, self.max_new_tokens, self.model)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        fields = {f.name for f in dataclasses.fields(self)}
        clean = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in fields:
                raise ConfigError(f"unknown setting {key!r}")
            clean[key] = _coerce(key, value)
        return dataclasses.replace(self, **clean)

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides) -> "PipelineConfig":
        values = {}
        if path is not None:
            parser = configparser.ConfigParser(interpolation=None)
            try:
                text = Path(path).read_text(encoding="utf-8")
                parser.read_string("[config]\n" + text)
            except (OSError, configparser.Error) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            values = dict(parser["config"])
            if "api_key" in values:
                raise ConfigError("api keys must come from the environment, not the config file")
        cfg = cls().with_overrides(**values).with_overrides(**overrides)
        cfg.validate()
        return cfg

    def make_backend(self) -> Backend:
        if self.backend == "scripted":
            return ScriptedBackend.from_file(self.script, max_chars=self.max_chars, parallelism=self.parallelism)
        return OpenAIChatBackend(
            self.endpoint,
            os.environ.get(self.api_key_env),
            max_chars=self.max_chars,
            retries=self.retries,
            timeout=self.timeout,
            parallelism=self.parallelism,
        )


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _coerce(key: str, value):
    try:
        if key == "method":
            return value if isinstance(value, JudgeMethod) else JudgeMethod.parse(str(value))
        if key == "thresholds":
            return value if isinstance(value, ThresholdMap) else ThresholdMap.parse(str(value))
        if key in ("nb_model", "script", "pairs", "output", "audit"):
            return Path(value)
        if key in ("max_new_tokens", "max_chars", "retries", "parallelism"):
            return int(value)
        if key in ("temperature", "timeout"):
            return float(value)
        if key in ("verbose_audit", "record_timing"):
            return value if isinstance(value, bool) else _BOOL[str(value).lower()]
        return str(value)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc


def _judge_one(pair, backend, cfg: PipelineConfig, nb_model) -> tuple[JudgedPair, float]:
    start = time.perf_counter()
    try:
        result = judge(pair, backend, cfg.method, thresholds=cfg.thresholds, nb_model=nb_model, decode=cfg.decode())
    except Exception as exc:  # any per-pair fault becomes data, never a halted batch
        log.exception("judging %s failed", pair.key)
        result = JudgedPair(pair.query.id, pair.passage.id, cfg.method.value, 0, notes=(f"internal: {exc!r}",))
    return result, time.perf_counter() - start


def judge_pairs(
    pairs: Sequence[QueryPassagePair],
    backend: Backend,
    cfg: PipelineConfig,
    nb_model: GaussianNBModel | None = None,
) -> tuple[QrelsSet, list[dict]]:
    """Judge every pair with at most ``cfg.parallelism`` in flight.

    Results come back in input order whatever order they finish in.
    """
    if cfg.method is JudgeMethod.NAIVE_BAYES and nb_model is None:
        nb_model = GaussianNBModel.load(cfg.nb_model)
    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        results = list(pool.map(lambda p: _judge_one(p, backend, cfg, nb_model), pairs))
    qrels = QrelsSet({(r.query_id, r.passage_id): r.label for r, _ in results})
    audit = [
        formats.audit_record(r, verbose=cfg.verbose_audit, duration=dt if cfg.record_timing else None)
        for r, dt in results
    ]
    failed = sum(1 for r, _ in results if r.notes)
    log.info("judged %d pairs with %s (%d with error notes)", len(results), cfg.method.value, failed)
    return qrels, audit


def run_judging(cfg: PipelineConfig, backend: Backend | None = None) -> tuple[QrelsSet, list[dict]]:
    if cfg.pairs is None:
        raise ConfigError("no input pairs file configured")
    pairs = formats.read_pairs(cfg.pairs)
    qrels, audit = judge_pairs(pairs, backend or cfg.make_backend(), cfg)
    if cfg.output is not None:
        formats.write_qrels(qrels, cfg.output)
    if cfg.audit is not None:
        formats.write_audit(audit, cfg.audit)
    return qrels, audit


def run_fit_nb(
    cfg: PipelineConfig,
    dev_pairs_path: str | Path,
    dev_qrels_path: str | Path,
    model_path: str | Path | None = None,
    backend: Backend | None = None,
    epsilon: float = 1e-9,
) -> tuple[GaussianNBModel, int]:
    """Grade dev pairs, join with dev labels and fit the aggregator.

    Returns the model and the number of pairs skipped for lacking a label.
    """
    pairs = formats.read_pairs(dev_pairs_path)
    dev_qrels = formats.read_qrels(dev_qrels_path)
    labelled = [p for p in pairs if p.key in dev_qrels]
    skipped = len(pairs) - len(labelled)
    if skipped:
        log.warning("%d dev pairs have no dev label and were skipped", skipped)
    if not labelled:
        raise EmptyTrainingSet("no dev pair has a dev label")
    backend = backend or cfg.make_backend()
    decode = cfg.decode()

    def grade(pair):
        return grade_all_criteria(pair, backend, Transcript(backend, decode)).as_tuple()

    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        features = list(pool.map(grade, labelled))
    model = nb_fit(features, [int(dev_qrels[p.key]) for p in labelled], epsilon)
    if model_path is not None:
        model.save(model_path)
    return model, skipped


KAPPA_KEYS = {
    CollapseScheme.FOUR_POINT: "kappa_4point",
    CollapseScheme.ZERO_VS_123: "kappa_0v123",
    CollapseScheme.ZERO_ONE_VS_23: "kappa_01v23",
    CollapseScheme.ZERO_ONE_TWO_VS_3: "kappa_012v3",
}


def _stat(fn, *args):
    try:
        return fn(*args), None
    except UndefinedStatistic as exc:
        return None, str(exc)


def run_evaluate(
    predicted: QrelsSet,
    manual: QrelsSet,
    runs: Sequence[RunFile] | None = None,
    k: int = 10,
    distance: Distance = Distance.INTERVAL,
) -> dict:
    """Agreement between predicted and manual labels, plus leaderboard tau when runs are given.

    Undefined statistics are reported as ``null`` with the reason under ``undefined``.
    """
    common = set(predicted) & set(manual)
    if not common:
        raise NoOverlap("predicted and manual qrels share no (query, passage) keys")
    pair = LabelVectorPair.align(manual, predicted)
    report: dict = {
        "alignment": {
            "common": pair.n,
            "only_manual": pair.only_a,
            "only_predicted": pair.only_b,
        },
        "tau": None,
    }
    undefined = {}
    report["alpha"], why = _stat(krippendorff_alpha, pair, distance)
    if why:
        undefined["alpha"] = why
    report["alpha_distance"] = distance.value
    for scheme, key in KAPPA_KEYS.items():
        report[key], why = _stat(cohens_kappa, pair, scheme)
        if why:
            undefined[key] = why
    if runs:
        report["tau"], why = _stat(leaderboard_correlation, runs, manual, predicted, k)
        if why:
            undefined["tau"] = why
        report["ndcg_k"] = k
        report["leaderboard_manual"] = [list(r) for r in build_leaderboard(runs, manual, k).rows]
        report["leaderboard_predicted"] = [list(r) for r in build_leaderboard(runs, predicted, k).rows]
    report["undefined"] = undefined
    return report


def _fmt(value) -> str:
    return "undefined" if value is None else f"{value:.4f}"


def format_report(report: dict) -> str:
    align = report["alignment"]
    lines = [
        f"aligned pairs: {align['common']}  (only manual: {align['only_manual']}, "
        f"only predicted: {align['only_predicted']})",
        "",
    ]
    cols = ["tau", "alpha"] + list(KAPPA_KEYS.values())
    heads = ["Tau", "Alpha", "Kappa 4-point", "0 vs 123", "01 vs 23", "012 vs 3"]
    widths = [max(len(h), 9) for h in heads]
    lines.append("  ".join(h.rjust(w) for h, w in zip(heads, widths)))
    lines.append("  ".join(_fmt(report.get(c)).rjust(w) for c, w in zip(cols, widths)))
    if "leaderboard_manual" in report:
        lines += ["", f"leaderboard (nDCG@{report['ndcg_k']})", f"{'system':<20} {'manual':>9} {'predicted':>9}"]
        pred = dict(map(tuple, report["leaderboard_predicted"]))
        for tag, score in report["leaderboard_manual"]:
            lines.append(f"{tag:<20} {score:>9.4f} {pred[tag]:>9.4f}")
    return "\n".join(lines) + "\n"


def write_report_json(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
