"""Cue-frequency statistics over MAP instances or coreference documents."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .corpus import Document, MapInstance, Token
from .lexicon import Lexicon


@dataclass
class CorpusStats:
    n_instances: int
    # None when the corpus is empty: the fraction is undefined, not zero
    frac_with_sem_nouns: float | None
    frac_with_addr_terms: float | None
    pronoun_category_distribution: dict[str, float] = field(default_factory=dict)
    n_with_sem_nouns: int = 0
    n_with_addr_terms: int = 0
    pronoun_counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["statistic", "value"])
        w.writerow(["n_instances", self.n_instances])
        w.writerow(["frac_with_sem_nouns", _fmt(self.frac_with_sem_nouns)])
        w.writerow(["frac_with_addr_terms", _fmt(self.frac_with_addr_terms)])
        for key in sorted(self.pronoun_category_distribution):
            w.writerow([f"pronoun_share:{key}", _fmt(self.pronoun_category_distribution[key])])
        return buf.getvalue()


def _fmt(x):
    return "" if x is None else f"{x:.6f}"


def pronoun_bucket(surface: str, lexicon: Lexicon) -> str | None:
    """Reporting bucket of a pronoun token: the paradigm id for binary and singular
    they paradigms, ``"neo"`` for every neopronoun paradigm."""
    readings = lexicon.pronoun_readings(surface)
    if not readings:
        return None
    paradigm = lexicon.paradigm(readings[0][0])
    return "neo" if paradigm.category == "neopronoun" else paradigm.paradigm_id


def _tokens(item) -> Sequence[Token]:
    if isinstance(item, (Document, MapInstance)):
        return item.tokens
    return item


def corpus_stats(items: Iterable[MapInstance | Document], lexicon: Lexicon) -> CorpusStats:
    n = sem = addr = 0
    counts: Counter[str] = Counter()
    for item in items:
        n += 1
        has_sem = has_addr = False
        for tok in _tokens(item):
            s = tok.surface
            if lexicon.is_address_term(s):
                has_addr = True
            elif lexicon.lookup_noun(s) is not None:
                has_sem = True
            else:
                bucket = pronoun_bucket(s, lexicon)
                if bucket is not None:
                    counts[bucket] += 1
        sem += has_sem
        addr += has_addr
    total = sum(counts.values())
    dist = {k: v / total for k, v in sorted(counts.items())} if total else {}
    return CorpusStats(
        n_instances=n,
        frac_with_sem_nouns=sem / n if n else None,
        frac_with_addr_terms=addr / n if n else None,
        pronoun_category_distribution=dist,
        n_with_sem_nouns=sem,
        n_with_addr_terms=addr,
        pronoun_counts=dict(sorted(counts.items())),
    )
