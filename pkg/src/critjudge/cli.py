"""Command-line entry point: ``critjudge {judge,fit-nb,evaluate,leaderboard}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import formats
from .aggregation import EmptyTrainingSet
from .metrics import Distance, build_leaderboard
from .pipeline import ConfigError, NoOverlap, PipelineConfig, format_report, run_evaluate, run_fit_nb, run_judging, write_report_json

log = logging.getLogger("critjudge")


def _backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--backend", choices=["openai", "scripted"])
    p.add_argument("--endpoint", help="OpenAI-compatible base URL, e.g. http://host:8000/v1")
    p.add_argument("--model")
    p.add_argument("--api-key-env", dest="api_key_env", help="environment variable holding the API key")
    p.add_argument("--script", help="reply script for the scripted backend (JSON)")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-new-tokens", dest="max_new_tokens", type=int)
    p.add_argument("--max-chars", dest="max_chars", type=int, help="request length budget in characters")
    p.add_argument("--retries", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--parallelism", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="critjudge", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    j = sub.add_parser("judge", help="predict relevance labels for a pool of query-passage pairs")
    _backend_flags(j)
    j.add_argument("--method", help="TREMA-4prompts, TREMA-sumdecompose, TREMA-naiveBdecompose, TREMA-CoT or TREMA-other")
    j.add_argument("--pairs", help="input pairs, JSON lines with qid, query, pid, passage")
    j.add_argument("--output", help="output qrels path")
    j.add_argument("--audit", help="audit log path (JSON lines)")
    j.add_argument("--thresholds", help="sum thresholds, e.g. 0-4:0,5-6:1,7-9:2,10-12:3")
    j.add_argument("--nb-model", dest="nb_model", help="fitted naive Bayes model (JSON)")
    j.add_argument("--verbose-audit", dest="verbose_audit", action="store_const", const=True,
                   help="store full rendered prompts in the audit log")
    j.add_argument("--record-timing", dest="record_timing", action="store_const", const=True,
                   help="add wall-clock durations to audit records (output is then not reproducible)")

    f = sub.add_parser("fit-nb", help="fit the naive Bayes aggregator on dev-set criterion grades")
    _backend_flags(f)
    f.add_argument("--dev-pairs", required=True)
    f.add_argument("--dev-qrels", required=True)
    f.add_argument("--model-out", required=True)
    f.add_argument("--epsilon", type=float, default=1e-9)

    e = sub.add_parser("evaluate", help="agreement and leaderboard correlation against manual qrels")
    e.add_argument("--predicted", required=True)
    e.add_argument("--manual", required=True)
    e.add_argument("--runs", help="run file or directory of run files")
    e.add_argument("-k", type=int, default=10)
    e.add_argument("--alpha-distance", choices=[d.value for d in Distance], default="interval")
    e.add_argument("--json", help="also write the report as JSON here")

    lb = sub.add_parser("leaderboard", help="rank systems by nDCG@k under a qrels file")
    lb.add_argument("--runs", required=True)
    lb.add_argument("--qrels", required=True)
    lb.add_argument("-k", type=int, default=10)
    return parser


_CONFIG_KEYS = (
    "backend", "endpoint", "model", "api_key_env", "script", "temperature", "max_new_tokens",
    "max_chars", "retries", "timeout", "parallelism", "method", "pairs", "output", "audit",
    "thresholds", "nb_model", "verbose_audit", "record_timing",
)


def _config(args) -> PipelineConfig:
    overrides = {k: getattr(args, k) for k in _CONFIG_KEYS if hasattr(args, k)}
    return PipelineConfig.load(args.config, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "judge":
            cfg = _config(args)
            if cfg.output is None:
                raise ConfigError("an output qrels path is required")
            qrels, audit = run_judging(cfg)
            failed = sum(1 for rec in audit if rec["errors"])
            print(f"wrote {len(qrels)} labels to {cfg.output} ({failed} pairs fell back on errors)")
        elif args.command == "fit-nb":
            cfg = _config(args)
            model, skipped = run_fit_nb(cfg, args.dev_pairs, args.dev_qrels, args.model_out, epsilon=args.epsilon)
            print(f"fitted classes {list(model.classes)} -> {args.model_out} (skipped {skipped} unlabelled pairs)")
        elif args.command == "evaluate":
            runs = formats.read_runs(args.runs) if args.runs else None
            report = run_evaluate(
                formats.read_qrels(args.predicted),
                formats.read_qrels(args.manual),
                runs,
                args.k,
                Distance(args.alpha_distance),
            )
            sys.stdout.write(format_report(report))
            if args.json:
                write_report_json(report, args.json)
        elif args.command == "leaderboard":
            board = build_leaderboard(formats.read_runs(args.runs), formats.read_qrels(args.qrels), args.k)
            for rank, (tag, score) in enumerate(board.rows, start=1):
                print(f"{rank:>3}  {tag:<24} {score:.4f}")
    except (ConfigError, formats.FormatError, NoOverlap, EmptyTrainingSet, OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
