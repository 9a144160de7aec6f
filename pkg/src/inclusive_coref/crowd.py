"""Crowd annotation batches for the ablation study, and ingestion of the answers."""

from __future__ import annotations

import csv
import io
import logging
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

from .ablation import PRESET_ORDER, PRESETS
from .corpus import CHOICES, MapInstance
from .errors import DataError, IngestError
from .scoring import BinaryPrediction, score_binary
from .stats import CERTAINTY_LABELS, certainty_summary, wilson_interval

log = logging.getLogger(__name__)

TASK_COLUMNS = ("batch_id", "item_index", "instance_id", "condition", "text", "pronoun", "candidate_a", "candidate_b")
KEY_COLUMNS = ("batch_id", "item_index", "instance_id", "condition", "gold_label", "gold_check")
RESULT_COLUMNS = ("worker_id", "instance_id", "condition", "choice", "certainty", "duration_seconds")


@dataclass(frozen=True)
class AnnotationRecord:
    worker_id: str
    instance_id: str
    condition: str
    choice: str
    certainty: str
    duration_seconds: float | None = None

    def __post_init__(self):
        if self.condition not in PRESETS:
            raise DataError(f"unknown condition {self.condition!r}")
        if self.choice not in CHOICES:
            raise DataError(f"choice must be one of {CHOICES}, got {self.choice!r}")
        if self.certainty not in CERTAINTY_LABELS:
            raise DataError(f"certainty must be one of {CERTAINTY_LABELS}, got {self.certainty!r}")


@dataclass(frozen=True)
class TaskItem:
    instance_id: str
    condition: str
    instance: MapInstance
    gold_check: bool = False


@dataclass
class Batch:
    batch_id: str
    items: list[TaskItem]
    short: bool = False


def gen_batches(
    variants: Mapping[str, Mapping[str, MapInstance]],
    conditions: Sequence[str] = PRESET_ORDER,
    batch_size: int = 10,
    seed: int = 0,
    rounds: int = 1,
    gold_checks: Sequence[MapInstance] = (),
) -> list[Batch]:
    """Split ``instance_id -> condition -> variant`` into annotation batches.

    Each round shows every instance once, in one condition. Conditions rotate over
    the shuffled instances, so they are balanced within a round, and shift by one
    between rounds, so over ``len(conditions)`` rounds every instance is seen in
    every condition. Gold-check items (unablated) are appended to every batch.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    if not conditions:
        raise ValueError("no conditions requested")
    for c in conditions:
        if c not in PRESETS:
            raise DataError(f"unknown condition {c!r}")
    for iid, by_cond in variants.items():
        for c in conditions:
            if c not in by_cond:
                raise DataError(f"instance {iid!r} has no variant for condition {c!r}")
    rng = random.Random(seed)
    ids = sorted(variants)
    # condition slots are fixed once; rounds rotate them, the display order is reshuffled
    slots = ids[:]
    rng.shuffle(slots)
    offset = rng.randrange(len(conditions))
    base = {iid: k + offset for k, iid in enumerate(slots)}
    batches: list[Batch] = []
    for r in range(rounds):
        order = ids[:]
        rng.shuffle(order)
        items = []
        for iid in order:
            cond = conditions[(base[iid] + r) % len(conditions)]
            items.append(TaskItem(iid, cond, variants[iid][cond]))
        for start in range(0, len(items), batch_size):
            chunk = items[start:start + batch_size]
            chunk += [TaskItem(g.instance_id, "Orig", g, gold_check=True) for g in gold_checks]
            short = len(chunk) - len(gold_checks) < batch_size
            batches.append(Batch(f"r{r + 1}-b{len(batches) + 1:04d}", chunk, short))
    for b in batches:
        if b.short:
            log.warning("batch %s holds %d items, fewer than %d", b.batch_id, len(b.items), batch_size)
    return batches


def _csv(rows: Iterable[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def tasks_csv(batches: Sequence[Batch]) -> str:
    rows = []
    for b in batches:
        for k, it in enumerate(b.items):
            inst = it.instance
            rows.append([b.batch_id, k, it.instance_id, it.condition, inst.text(), inst.pronoun,
                         inst.candidate_a, inst.candidate_b])
    return _csv(rows, TASK_COLUMNS)


def answer_key_csv(batches: Sequence[Batch]) -> str:
    rows = []
    for b in batches:
        for k, it in enumerate(b.items):
            rows.append([b.batch_id, k, it.instance_id, it.condition, it.instance.gold_label,
                         "1" if it.gold_check else "0"])
    return _csv(rows, KEY_COLUMNS)


def read_answer_key(stream: TextIO | str) -> list[dict]:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    if tuple(reader.fieldnames or ()) != KEY_COLUMNS:
        raise DataError(f"answer key header must be {','.join(KEY_COLUMNS)}")
    out = []
    for row in reader:
        row["item_index"] = int(row["item_index"])
        row["gold_check"] = row["gold_check"] == "1"
        out.append(row)
    return out


def emit_results(records: Iterable[AnnotationRecord]) -> str:
    rows = []
    for r in records:
        dur = "" if r.duration_seconds is None else repr(float(r.duration_seconds))
        rows.append([r.worker_id, r.instance_id, r.condition, r.choice, r.certainty, dur])
    return _csv(rows, RESULT_COLUMNS)


def _norm_choice(value: str) -> str:
    v = value.strip()
    for c in CHOICES:
        if v.lower() == c.lower():
            return c
    return v


def ingest_results(
    stream: TextIO | str,
    instance_ids: Iterable[str] | None = None,
    conditions: Iterable[str] | None = None,
) -> list[AnnotationRecord]:
    """Validate a results CSV; every problem is reported with its row number."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    missing = [c for c in RESULT_COLUMNS if c != "duration_seconds" and c not in header]
    if missing:
        raise IngestError([(1, f"missing columns: {', '.join(missing)}")])
    known = set(instance_ids) if instance_ids is not None else None
    allowed = set(conditions) if conditions is not None else set(PRESETS)
    problems: list[tuple[int, str]] = []
    records = []
    first_seen: dict[tuple, int] = {}
    for row_no, row in enumerate(reader, start=2):
        if None in row or any(row.get(c) is None for c in header):
            problems.append((row_no, "wrong number of fields"))
            continue
        iid = row["instance_id"].strip()
        cond = row["condition"].strip()
        if known is not None and iid not in known:
            problems.append((row_no, f"unknown instance {iid!r}"))
            continue
        if cond not in allowed:
            problems.append((row_no, f"unknown condition {cond!r}"))
            continue
        dur_cell = (row.get("duration_seconds") or "").strip()
        try:
            dur = float(dur_cell) if dur_cell else None
            rec = AnnotationRecord(row["worker_id"].strip(), iid, cond, _norm_choice(row["choice"]),
                                   row["certainty"].strip().lower(), dur)
        except (DataError, ValueError) as exc:
            problems.append((row_no, str(exc)))
            continue
        key = (rec.worker_id, rec.instance_id, rec.condition)
        if key in first_seen:
            problems.append((row_no, f"duplicate of row {first_seen[key]} (worker {key[0]!r}, "
                                     f"instance {key[1]!r}, condition {key[2]!r})"))
            continue
        first_seen[key] = row_no
        records.append(rec)
    if problems:
        raise IngestError(problems)
    return records


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    correct: int
    scored: int
    accuracy: float
    low: float
    high: float
    certainty: dict[str, float]
    certainty_counts: dict[str, int]


def per_condition_report(
    records: Sequence[AnnotationRecord],
    gold: Iterable[MapInstance] | Mapping[str, MapInstance],
    conditions: Sequence[str] = PRESET_ORDER,
    confidence: float = 0.95,
) -> list[ConditionReport]:
    """The table behind an accuracy-per-condition chart with certainty bars."""
    preds = [BinaryPrediction(r.instance_id, r.choice, r.worker_id, r.condition) for r in records]
    by_cond: dict[str, list[int]] = {}
    if preds:
        for s in score_binary(preds, gold, confidence=confidence):
            acc = by_cond.setdefault(s.condition, [0, 0])
            acc[0] += s.correct
            acc[1] += s.scored
    cert = certainty_summary(records)
    out = []
    for c in conditions:
        if c not in by_cond:
            log.warning("condition %s has no scored records; omitted", c)
            continue
        correct, scored = by_cond[c]
        low, high = wilson_interval(correct, scored, confidence)
        summary = cert[c]
        out.append(ConditionReport(c, correct, scored, correct / scored, low, high,
                                   summary.distribution, summary.counts))
    return out


def report_csv(rows: Sequence[ConditionReport]) -> str:
    out = []
    for r in rows:
        out.append([r.condition, r.correct, r.scored, f"{r.accuracy:.6f}", f"{r.low:.6f}", f"{r.high:.6f}"]
                   + [f"{r.certainty.get(lab, 0.0):.6f}" for lab in CERTAINTY_LABELS])
    return _csv(out, ["condition", "correct", "scored", "accuracy", "ci_low", "ci_high"]
                + [f"share_{lab}" for lab in CERTAINTY_LABELS])
