"""Readers and writers for pairs (JSONL), qrels, TREC run files and audit logs."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .metrics import RunFile
from .model import JudgedPair, Passage, QrelsSet, Query, QueryPassagePair, OutOfRange, validate_label


class FormatError(ValueError):
    def __init__(self, path, line_no: int | None, message: str):
        where = f"{path}:{line_no}" if line_no is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line_no = line_no


class MalformedLine(FormatError):
    pass


class DuplicateKey(FormatError):
    pass


class InconsistentTag(FormatError):
    pass


class LabelOutOfRange(FormatError):
    pass


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line.strip():
                yield line_no, line


def read_pairs(path: str | Path) -> list[QueryPassagePair]:
    pairs, seen = [], set()
    for line_no, line in _lines(path):
        try:
            obj = json.loads(line)
            pair = QueryPassagePair(
                Query(str(obj["qid"]), obj["query"]),
                Passage(str(obj["pid"]), obj["passage"]),
            )
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise MalformedLine(path, line_no, f"bad pair record ({exc})") from exc
        if pair.key in seen:
            raise DuplicateKey(path, line_no, f"duplicate pair {pair.key}")
        seen.add(pair.key)
        pairs.append(pair)
    return pairs


def write_pairs(pairs: Iterable[QueryPassagePair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            rec = {"qid": p.query.id, "query": p.query.text, "pid": p.passage.id, "passage": p.passage.text}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_qrels(path: str | Path) -> QrelsSet:
    entries = {}
    for line_no, line in _lines(path):
        cols = line.split()
        if len(cols) != 4:
            raise MalformedLine(path, line_no, f"expected 4 columns, got {len(cols)}")
        qid, _, pid, raw = cols
        try:
            value = int(raw)
        except ValueError:
            raise MalformedLine(path, line_no, f"label {raw!r} is not an integer") from None
        try:
            label = validate_label(value)
        except OutOfRange:
            raise LabelOutOfRange(path, line_no, f"label {value} outside 0-3") from None
        if (qid, pid) in entries:
            raise DuplicateKey(path, line_no, f"duplicate qrels key ({qid}, {pid})")
        entries[(qid, pid)] = label
    return QrelsSet(entries)


def format_qrels(qrels: QrelsSet) -> str:
    return "".join(f"{qid} 0 {pid} {int(qrels[(qid, pid)])}\n" for qid, pid in sorted(qrels))


def write_qrels(qrels: QrelsSet, path: str | Path) -> None:
    Path(path).write_text(format_qrels(qrels), encoding="utf-8")


def _read_run_file(path) -> list[RunFile]:
    rows: dict[str, dict[str, list]] = {}
    for line_no, line in _lines(path):
        cols = line.split()
        if len(cols) != 6:
            raise MalformedLine(path, line_no, f"expected 6 columns, got {len(cols)}")
        qid, _, pid, rank, score, tag = cols
        try:
            int(rank)
            value = float(score)
        except ValueError:
            raise MalformedLine(path, line_no, "rank must be an integer and score a number") from None
        if not math.isfinite(value):
            raise MalformedLine(path, line_no, f"score {score!r} is not finite")
        if rows and tag not in rows:
            raise InconsistentTag(path, line_no, f"tag {tag!r} differs from {next(iter(rows))!r}")
        per_query = rows.setdefault(tag, {}).setdefault(qid, [])
        if any(p == pid for p, _ in per_query):
            raise DuplicateKey(path, line_no, f"passage {pid} repeated in query {qid}")
        per_query.append((pid, value))
    runs = []
    for tag, queries in rows.items():
        # stable sort: equal scores keep file order
        entries = {qid: tuple(sorted(ranked, key=lambda e: -e[1])) for qid, ranked in queries.items()}
        runs.append(RunFile(tag, entries))
    return runs


def read_runs(path: str | Path) -> list[RunFile]:
    """Read one run file, or every file in a directory (sorted by name)."""
    path = Path(path)
    files = sorted(p for p in path.iterdir() if p.is_file()) if path.is_dir() else [path]
    runs, tags = [], set()
    for f in files:
        for run in _read_run_file(f):
            if run.system_tag in tags:
                raise InconsistentTag(f, None, f"system tag {run.system_tag!r} appears in more than one file")
            tags.add(run.system_tag)
            runs.append(run)
    return runs


def format_run(run: RunFile) -> str:
    out = []
    for qid in sorted(run.entries):
        for rank, (pid, score) in enumerate(run.entries[qid], start=1):
            out.append(f"{qid} Q0 {pid} {rank} {score!r} {run.system_tag}\n")
    return "".join(out)


def write_run(run: RunFile, path: str | Path) -> None:
    Path(path).write_text(format_run(run), encoding="utf-8")


def audit_record(judged: JudgedPair, *, verbose: bool = False, duration: float | None = None) -> dict:
    calls = []
    for c in judged.calls:
        call = {"step": c.step, "prompt_hash": c.prompt_hash, "reply": c.reply}
        if c.error is not None:
            call["error"] = c.error
        if verbose:
            call["system"] = c.system_message
            call["prompt"] = c.user_prompt
        calls.append(call)
    rec = {
        "qid": judged.query_id,
        "pid": judged.passage_id,
        "method": judged.method,
        "label": int(judged.label),
        "grades": None if judged.grades is None else {c.key: int(g) for c, g in judged.grades.items()},
        "binary_check": judged.binary_check,
        "generated_query": judged.generated_query,
        "errors": list(judged.notes),
        "calls": calls,
    }
    if duration is not None:
        rec["duration_s"] = round(duration, 6)
    return rec


def write_audit(records: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=False) + "\n")


def read_audit(path: str | Path) -> list[dict]:
    return [json.loads(line) for _, line in _lines(path)]
