"""Core data types: tokens, mention spans, coreference documents and MAP instances.

Spans are half-open ``[start, end)`` token intervals throughout.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

GENRES = ("wikipedia", "periodical", "fanfiction", "other")
CHOICES = ("A", "B", "Neither")


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    pos_tag: str | None = None
    trailing_space: bool = True

    def __post_init__(self):
        if not self.surface:
            raise ValueError(f"token {self.index}: empty surface")
        if any(ch.isspace() for ch in self.surface):
            raise ValueError(f"token {self.index}: surface {self.surface!r} contains whitespace")


@dataclass(frozen=True, order=True)
class MentionSpan:
    start: int
    end: int
    entity_id: str | None = None
    incorrect_reference: bool = False

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    def __len__(self):
        return self.end - self.start


@dataclass(frozen=True, order=True)
class NamedEntity:
    start: int
    end: int
    label: str = "PERSON"


def render_text(tokens: Sequence[Token]) -> str:
    """Join token surfaces, honouring each token's trailing space flag."""
    parts = []
    for i, tok in enumerate(tokens):
        parts.append(tok.surface)
        if tok.trailing_space and i < len(tokens) - 1:
            parts.append(" ")
    return "".join(parts)


def char_offsets(tokens: Sequence[Token]) -> list[tuple[int, int]]:
    """Character ``(start, end)`` of every token within :func:`render_text`."""
    out = []
    pos = 0
    for i, tok in enumerate(tokens):
        out.append((pos, pos + len(tok.surface)))
        pos += len(tok.surface)
        if tok.trailing_space and i < len(tokens) - 1:
            pos += 1
    return out


def reindex(tokens: Iterable[Token]) -> tuple[Token, ...]:
    out = []
    for i, tok in enumerate(tokens):
        out.append(tok if tok.index == i else Token(i, tok.surface, tok.pos_tag, tok.trailing_space))
    return tuple(out)


def _check_tokens(tokens: Sequence[Token], owner: str) -> None:
    for i, tok in enumerate(tokens):
        if tok.index != i:
            raise ValueError(f"{owner}: token indices must be contiguous from 0 (got {tok.index} at {i})")


@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: tuple[Token, ...]
    mentions: tuple[MentionSpan, ...] = ()
    genre: str = "other"
    metadata: dict = field(default_factory=dict)
    named_entities: tuple[NamedEntity, ...] = ()
    # token index at which each sentence begins; always starts with 0 for non-empty docs
    sentence_starts: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "mentions", tuple(self.mentions))
        object.__setattr__(self, "named_entities", tuple(self.named_entities))
        starts = tuple(self.sentence_starts) or ((0,) if self.tokens else ())
        object.__setattr__(self, "sentence_starts", starts)
        if self.genre not in GENRES:
            raise ValueError(f"{self.doc_id}: unknown genre {self.genre!r}")
        _check_tokens(self.tokens, self.doc_id)
        n = len(self.tokens)
        for m in self.mentions:
            if m.end > n:
                raise ValueError(f"{self.doc_id}: mention [{m.start}, {m.end}) exceeds {n} tokens")
            if m.entity_id is None:
                raise ValueError(f"{self.doc_id}: mention [{m.start}, {m.end}) has no entity id")
        for ne in self.named_entities:
            if not 0 <= ne.start < ne.end <= n:
                raise ValueError(f"{self.doc_id}: named entity [{ne.start}, {ne.end}) out of range")

    @property
    def part(self) -> str:
        return self.metadata.get("part", "0")

    @property
    def key(self) -> tuple[str, str]:
        return (self.doc_id, self.part)

    def text(self) -> str:
        return render_text(self.tokens)

    def clusters(self) -> dict[str, list[MentionSpan]]:
        """Mentions grouped by entity id, in first-mention order."""
        out: dict[str, list[MentionSpan]] = defaultdict(list)
        for m in sorted(self.mentions):
            out[m.entity_id].append(m)
        return dict(out)

    def name_spans(self, labels: Iterable[str] = ("PERSON",)) -> list[tuple[int, int]]:
        labels = set(labels)
        return [(ne.start, ne.end) for ne in self.named_entities if ne.label in labels]

    def span_text(self, start: int, end: int) -> str:
        return render_text(self.tokens[start:end])


@dataclass(frozen=True)
class MapInstance:
    """One pronoun and two candidate names; the task is to pick the antecedent."""

    instance_id: str
    tokens: tuple[Token, ...]
    pronoun_span: MentionSpan
    candidate_a_span: MentionSpan
    candidate_b_span: MentionSpan
    a_is_coref: bool
    b_is_coref: bool
    source_url: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        _check_tokens(self.tokens, self.instance_id)
        n = len(self.tokens)
        spans = {"pronoun": self.pronoun_span, "A": self.candidate_a_span, "B": self.candidate_b_span}
        for name, sp in spans.items():
            if sp.end > n:
                raise ValueError(f"{self.instance_id}: {name} span [{sp.start}, {sp.end}) exceeds {n} tokens")
        if len(self.pronoun_span) != 1:
            raise ValueError(f"{self.instance_id}: pronoun span must cover exactly one token")
        items = list(spans.items())
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                (na, a), (nb, b) = items[i], items[j]
                if a.start < b.end and b.start < a.end:
                    raise ValueError(f"{self.instance_id}: {na} and {nb} spans overlap")
        if self.a_is_coref and self.b_is_coref:
            raise ValueError(f"{self.instance_id}: both candidates marked coreferent")

    @property
    def is_neither(self) -> bool:
        return not (self.a_is_coref or self.b_is_coref)

    @property
    def gold_label(self) -> str:
        if self.a_is_coref:
            return "A"
        if self.b_is_coref:
            return "B"
        return "Neither"

    @property
    def pronoun(self) -> str:
        return self.tokens[self.pronoun_span.start].surface

    @property
    def candidate_a(self) -> str:
        return render_text(self.tokens[self.candidate_a_span.start:self.candidate_a_span.end])

    @property
    def candidate_b(self) -> str:
        return render_text(self.tokens[self.candidate_b_span.start:self.candidate_b_span.end])

    def text(self) -> str:
        return render_text(self.tokens)
