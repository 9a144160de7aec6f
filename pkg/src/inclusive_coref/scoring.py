"""Scoring: MAP accuracy, LEA with incorrect-reference modes, pronoun recall, IAA.

LEA weights every entity by its size and credits the fraction of its coreference
links that the other side recovers. Per-document scores are pooled by summing
numerators and denominators, never by averaging F1.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Mapping, Sequence, TextIO

from .corpus import CHOICES, Document, MapInstance, MentionSpan
from .errors import ScoringError
from .lexicon import CATEGORIES, Lexicon, is_punctuation
from .stats import wilson_interval

log = logging.getLogger(__name__)

MODES = ("include", "exclude")
# pronouns outside the third-person paradigms that still count as pronoun mentions
OTHER_PERSONAL_PRONOUNS = frozenset(
    "i me my mine myself you your yours yourself yourselves we us our ours ourselves it its itself".split()
)


# ---------------------------------------------------------------- MAP accuracy

@dataclass(frozen=True)
class BinaryPrediction:
    instance_id: str
    choice: str
    system_id: str = "system"
    condition: str = "Orig"

    def __post_init__(self):
        if self.choice not in CHOICES:
            raise ScoringError(f"{self.instance_id}: choice must be one of {CHOICES}, got {self.choice!r}")


@dataclass(frozen=True)
class BinaryScore:
    system_id: str
    condition: str
    correct: int
    scored: int
    low: float
    high: float
    neither_skipped: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.scored


def score_binary(
    predictions: Iterable[BinaryPrediction],
    gold: Iterable[MapInstance] | Mapping[str, MapInstance],
    *,
    include_neither: bool = False,
    confidence: float = 0.95,
) -> list[BinaryScore]:
    """Accuracy with a Wilson interval for every (system, condition) group."""
    if not isinstance(gold, Mapping):
        gold = {g.instance_id: g for g in gold}
    groups: dict[tuple[str, str], list[int]] = {}
    seen = set()
    n = 0
    for p in predictions:
        n += 1
        inst = gold.get(p.instance_id)
        if inst is None:
            raise ScoringError(f"prediction for unknown instance {p.instance_id!r}")
        key = (p.instance_id, p.system_id, p.condition)
        if key in seen:
            raise ScoringError(f"duplicate prediction for {p.instance_id!r} by {p.system_id!r} ({p.condition})")
        seen.add(key)
        counts = groups.setdefault((p.system_id, p.condition), [0, 0, 0])
        if inst.is_neither and not include_neither:
            counts[2] += 1
            continue
        counts[0] += p.choice == inst.gold_label
        counts[1] += 1
    if n == 0:
        raise ScoringError("no predictions to score")
    out = []
    for (system, cond), (correct, scored, skipped) in sorted(groups.items()):
        if scored == 0:
            log.warning("%s/%s: every instance has a 'Neither' gold label; nothing scored", system, cond)
            continue
        low, high = wilson_interval(correct, scored, confidence)
        out.append(BinaryScore(system, cond, correct, scored, low, high, skipped))
    return out


def read_predictions(stream: TextIO | str, source: str | None = None) -> list[BinaryPrediction]:
    """Predictions CSV: instance_id, system_id, choice and an optional condition column."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    missing = {"instance_id", "system_id", "choice"} - set(reader.fieldnames or ())
    if missing:
        raise ScoringError(f"{source or 'predictions'}: missing columns {sorted(missing)}")
    out = []
    for row_no, row in enumerate(reader, start=2):
        try:
            out.append(BinaryPrediction(row["instance_id"], row["choice"], row["system_id"],
                                        row.get("condition") or "Orig"))
        except ScoringError as exc:
            raise ScoringError(f"{source or 'predictions'}: line {row_no}: {exc}") from None
    return out


# ---------------------------------------------------------------- LEA

@dataclass(frozen=True)
class LeaScore:
    recall_num: float = 0.0
    recall_den: float = 0.0
    precision_num: float = 0.0
    precision_den: float = 0.0
    mode: str | None = None

    @property
    def recall(self) -> float:
        return self.recall_num / self.recall_den if self.recall_den else 0.0

    @property
    def precision(self) -> float:
        return self.precision_num / self.precision_den if self.precision_den else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "LeaScore") -> "LeaScore":
        return LeaScore(
            self.recall_num + other.recall_num,
            self.recall_den + other.recall_den,
            self.precision_num + other.precision_num,
            self.precision_den + other.precision_den,
            self.mode if self.mode == other.mode else None,
        )

    def as_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1, "mode": self.mode}


def _links(n: int) -> int:
    return n * (n - 1) // 2


def _lea_side(keys: Sequence[frozenset], response: Sequence[frozenset]) -> tuple[float, float]:
    owner = {}
    for idx, cluster in enumerate(response):
        for m in cluster:
            owner[m] = idx
    num = 0.0
    den = 0.0
    for k in keys:
        size = len(k)
        if size == 0:
            continue
        den += size
        if size == 1:
            (m,) = k
            # a singleton is resolved only by the same singleton on the other side
            if m in owner and len(response[owner[m]]) == 1:
                num += 1
            continue
        overlap: dict[int, int] = defaultdict(int)
        for m in k:
            if m in owner:
                overlap[owner[m]] += 1
        common = sum(_links(c) for c in overlap.values())
        num += size * common / _links(size)
    return num, den


def lea(gold: Iterable[Iterable[Hashable]], system: Iterable[Iterable[Hashable]], mode: str | None = None) -> LeaScore:
    """LEA over two clusterings given as collections of mention collections."""
    g = [frozenset(c) for c in gold if c]
    s = [frozenset(c) for c in system if c]
    if not g or not s:
        log.info("LEA on an empty side; scoring 0")
    r_num, r_den = _lea_side(g, s)
    p_num, p_den = _lea_side(s, g)
    return LeaScore(r_num, r_den, p_num, p_den, mode)


# ---------------------------------------------------------------- incorrect references and alignment

def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ScoringError(f"mode must be one of {MODES}, got {mode!r}")


def filter_incorrect_references(doc: Document, mode: str = "exclude") -> Document:
    """``exclude`` drops flagged mentions; ``include`` keeps them as ordinary members."""
    _check_mode(mode)
    if mode == "include":
        if not any(m.incorrect_reference for m in doc.mentions):
            return doc
        kept = tuple(MentionSpan(m.start, m.end, m.entity_id) for m in doc.mentions)
    else:
        kept = tuple(m for m in doc.mentions if not m.incorrect_reference)
    return replace(doc, mentions=kept)


def is_pronoun_token(surface: str, lexicon: Lexicon) -> bool:
    return lexicon.is_pronoun(surface) or surface.lower() in OTHER_PERSONAL_PRONOUNS


def _capitalized_run(doc: Document, start: int, end: int, lexicon: Lexicon) -> bool:
    words = [t.surface for t in doc.tokens[start:end] if not is_punctuation(t.surface)]
    if not words or (len(words) == 1 and is_pronoun_token(words[0], lexicon)):
        return False
    return all(w[:1].isupper() for w in words)


def _name_checker(gold: Document, lexicon: Lexicon):
    spans = gold.name_spans()
    if not spans:
        log.warning("%s: no PERSON annotations; identifying name mentions by capitalization", gold.doc_id)
        return lambda s, e: _capitalized_run(gold, s, e, lexicon)
    exact = set(spans)

    def check(s: int, e: int) -> bool:
        if (s, e) in exact:
            return True
        # "Mrs. Smith" whose name part "Smith" is annotated
        for ns, ne in spans:
            if s <= ns and ne <= e:
                rest = [t.surface for t in gold.tokens[s:ns] + gold.tokens[ne:e]]
                if all(lexicon.is_address_term(w) or is_punctuation(w) for w in rest):
                    return True
        return False

    return check


@dataclass(frozen=True)
class Alignment:
    gold: tuple[MentionSpan, ...]
    system: tuple[MentionSpan, ...]
    dropped_system: int = 0

    def gold_clusters(self) -> list[list[tuple[int, int]]]:
        return _clusters(self.gold)

    def system_clusters(self) -> list[list[tuple[int, int]]]:
        return _clusters(self.system)

    @property
    def matched(self) -> set[tuple[int, int]]:
        return {m.span for m in self.gold} & {m.span for m in self.system}


def _clusters(mentions: Iterable[MentionSpan]) -> list[list[tuple[int, int]]]:
    by: dict[str, list] = defaultdict(list)
    for m in mentions:
        by[m.entity_id].append(m.span)
    return [sorted(v) for _, v in sorted(by.items())]


def align_mentions(
    gold: Document,
    system: Document,
    lexicon: Lexicon,
    excluded: Iterable[tuple[int, int]] = (),
) -> Alignment:
    """Restrict both sides to pronoun tokens and name spans, matched by exact span.

    ``excluded`` spans (incorrect references removed from the gold side) are
    removed from the system side as well.
    """
    if [t.surface for t in gold.tokens] != [t.surface for t in system.tokens]:
        raise ScoringError(f"{gold.doc_id}: gold and system token sequences differ")
    is_name = _name_checker(gold, lexicon)
    excluded = set(excluded)

    def keep(m: MentionSpan) -> bool:
        if m.end - m.start == 1 and is_pronoun_token(gold.tokens[m.start].surface, lexicon):
            return True
        return is_name(m.start, m.end)

    g = tuple(m for m in gold.mentions if keep(m))
    s = tuple(m for m in system.mentions if m.span not in excluded and keep(m))
    return Alignment(g, s, len(system.mentions) - len(s))


def score_document(gold: Document, system: Document, lexicon: Lexicon, mode: str = "exclude") -> LeaScore:
    _check_mode(mode)
    excluded = {m.span for m in gold.mentions if m.incorrect_reference} if mode == "exclude" else set()
    filtered = filter_incorrect_references(gold, mode)
    al = align_mentions(filtered, system, lexicon, excluded)
    return lea(al.gold_clusters(), al.system_clusters(), mode)


def _pair_documents(gold: Iterable[Document], system: Iterable[Document]) -> list[tuple[Document, Document]]:
    g = {d.key: d for d in gold}
    s = {d.key: d for d in system}
    if set(g) != set(s):
        only_g = sorted(set(g) - set(s))
        only_s = sorted(set(s) - set(g))
        raise ScoringError(f"document sets differ; only in gold: {only_g}, only in system: {only_s}")
    return [(g[k], s[k]) for k in sorted(g)]


def _score_pair(args):
    gold, system, lexicon, mode = args
    return score_document(gold, system, lexicon, mode)


@dataclass
class CorefReport:
    total: LeaScore
    per_document: dict[str, LeaScore] = field(default_factory=dict)


def score_coref(
    gold: Iterable[Document],
    system: Iterable[Document],
    lexicon: Lexicon,
    mode: str = "exclude",
    jobs: int = 1,
) -> CorefReport:
    """Pooled LEA over a corpus of aligned documents."""
    _check_mode(mode)
    pairs = _pair_documents(gold, system)
    work = [(g, s, lexicon, mode) for g, s in pairs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_score_pair, work))
    else:
        scores = [_score_pair(w) for w in work]
    total = LeaScore(mode=mode)
    per = {}
    for (g, _), sc in zip(pairs, scores):
        per[f"{g.doc_id}/{g.part}"] = sc
        total = total + sc
    return CorefReport(replace(total, mode=mode), per)


# ---------------------------------------------------------------- pronoun recall

@dataclass
class CategoryRecall:
    counts: dict[str, tuple[int, int]] = field(default_factory=dict)  # category -> (detected, gold)

    def recall(self, category: str) -> float | None:
        detected, total = self.counts.get(category, (0, 0))
        return detected / total if total else None

    def as_dict(self) -> dict[str, dict]:
        return {
            c: {"detected": d, "gold": n, "recall": (d / n if n else None)}
            for c, (d, n) in self.counts.items()
        }


def pronoun_recall_by_category(
    gold: Document | Iterable[Document],
    system: Document | Iterable[Document],
    lexicon: Lexicon,
) -> CategoryRecall:
    """Share of gold third-person pronoun mentions that some system mention covers exactly."""
    if isinstance(gold, Document):
        gold = [gold]
    if isinstance(system, Document):
        system = [system]
    tally = {c: [0, 0] for c in CATEGORIES}
    for g, s in _pair_documents(gold, system):
        if [t.surface for t in g.tokens] != [t.surface for t in s.tokens]:
            raise ScoringError(f"{g.doc_id}: gold and system token sequences differ")
        sys_spans = {m.span for m in s.mentions}
        for m in g.mentions:
            if m.end - m.start != 1:
                continue
            cat = lexicon.category_of(g.tokens[m.start].surface)
            if cat is None:
                continue
            tally[cat][1] += 1
            tally[cat][0] += m.span in sys_spans
    return CategoryRecall({c: (d, n) for c, (d, n) in tally.items()})


# ---------------------------------------------------------------- agreement

@dataclass(frozen=True)
class AgreementResult:
    a_as_gold: LeaScore
    b_as_gold: LeaScore

    @property
    def f1(self) -> float:
        return self.a_as_gold.f1

    @property
    def f1_swapped(self) -> float:
        return self.b_as_gold.f1


def _raw_score(gold: Document, system: Document, mode: str) -> LeaScore:
    if [t.surface for t in gold.tokens] != [t.surface for t in system.tokens]:
        raise ScoringError(f"{gold.doc_id}: annotation layers do not share a token sequence")
    return lea(_clusters(filter_incorrect_references(gold, mode).mentions),
               _clusters(filter_incorrect_references(system, mode).mentions), mode)


def interannotator_agreement(
    a: Iterable[Document],
    b: Iterable[Document],
    mode: str = "exclude",
) -> AgreementResult:
    """LEA F1 with annotation A as gold and B as response, and with roles swapped."""
    _check_mode(mode)
    pairs = _pair_documents(a, b)
    ab = LeaScore(mode=mode)
    ba = LeaScore(mode=mode)
    for da, db in pairs:
        ab = ab + _raw_score(da, db, mode)
        ba = ba + _raw_score(db, da, mode)
    return AgreementResult(ab, ba)
