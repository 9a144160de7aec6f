"""GAP-style tab-separated MAP files.

Text fields are tokenized on whitespace, with leading and trailing punctuation split
off into their own tokens (``"Bobbitt,"`` becomes ``Bobbitt`` + ``,``). Abbreviations
and initials keep their period. Character offsets in the file are converted to token
spans; a possessive clitic is split from a name when an offset boundary requires it.
"""

from __future__ import annotations

import re
from typing import TYPE_CHECKING, Iterable, TextIO

from .corpus import MapInstance, MentionSpan, Token, char_offsets, render_text
from .errors import ParseError

if TYPE_CHECKING:
    from .lexicon import Lexicon

COLUMNS = (
    "ID", "Text", "Pronoun", "Pronoun-offset",
    "A", "A-offset", "A-coref", "B", "B-offset", "B-coref", "URL",
)

LEADING_PUNCT = set("\"'([{“‘«¿¡")
TRAILING_PUNCT = set(".,;:!?\"')]}”’»…")
ABBREVIATIONS = {
    "mr.", "mrs.", "ms.", "mx.", "dr.", "prof.", "st.", "mt.", "jr.", "sr.", "sra.", "srta.",
    "mme.", "mlle.", "messrs.", "mmes.", "rev.", "hon.", "gen.", "col.", "lt.", "sgt.", "capt.",
    "cpt.", "gov.", "sen.", "rep.", "pres.", "vs.", "etc.", "inc.", "ltd.", "co.", "corp.",
    "vol.", "ed.", "eds.", "approx.", "dept.", "univ.", "ave.", "blvd.", "fig.",
    "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.",
}
_INITIAL = re.compile(r"^[A-Z]\.$")
_DOTTED = re.compile(r"^(?:[A-Za-z]\.){2,}$")
_CLITICS = ("'s", "’s", "'", "’")


def _keeps_period(word: str) -> bool:
    return bool(_INITIAL.match(word) or _DOTTED.match(word) or word.lower() in ABBREVIATIONS)


def _split_word(word: str, start: int) -> list[tuple[int, int]]:
    """Character extents of the pieces of one whitespace-delimited word."""
    lo, hi = 0, len(word)
    head, tail = [], []
    while lo < hi and word[lo] in LEADING_PUNCT and hi - lo > 1:
        head.append((start + lo, start + lo + 1))
        lo += 1
    while hi - lo > 1 and word[hi - 1] in TRAILING_PUNCT:
        core = word[lo:hi]
        if word[hi - 1] == "." and _keeps_period(core):
            break
        if word[hi - 1] in "'’" and core[:-1].isalpha() and core[:-1][-1:] in "sS":
            # possessive plural ("Evans'") keeps its apostrophe
            break
        tail.append((start + hi - 1, start + hi))
        hi -= 1
    return head + [(start + lo, start + hi)] + tail[::-1]


def tokenize(text: str, boundaries: Iterable[int] = ()) -> list[tuple[int, int, bool]]:
    """Tokenize ``text`` into ``(char_start, char_end, trailing_space)`` triples.

    ``boundaries`` are character offsets that must fall on token edges. A boundary
    inside a word is honoured only when it separates a possessive clitic.
    """
    cuts = set(boundaries)
    pieces: list[tuple[int, int]] = []
    for m in re.finditer(r"\S+", text):
        for s, e in _split_word(m.group(), m.start()):
            inner = sorted(c for c in cuts if s < c < e)
            for c in inner:
                if text[c:e] in _CLITICS or text[c:e].rstrip("".join(TRAILING_PUNCT)) in _CLITICS:
                    pieces.append((s, c))
                    s = c
            pieces.append((s, e))
    out = []
    for i, (s, e) in enumerate(pieces):
        space = i < len(pieces) - 1 and pieces[i + 1][0] > e
        out.append((s, e, space))
    return out


def tokens_from_text(text: str, boundaries: Iterable[int] = ()) -> tuple[list[Token], list[tuple[int, int]]]:
    triples = tokenize(text, boundaries)
    tokens = [Token(i, text[s:e], None, space) for i, (s, e, space) in enumerate(triples)]
    return tokens, [(s, e) for s, e, _ in triples]


def _parse_bool(value: str, column: str, row_id: str) -> bool:
    v = value.strip().upper()
    if v == "TRUE":
        return True
    if v == "FALSE":
        return False
    raise ParseError(f"row {row_id}: {column} must be TRUE or FALSE, got {value!r}")


def _char_span_to_tokens(extents, start: int, end: int, what: str, row_id: str) -> MentionSpan:
    starts = {s: i for i, (s, _) in enumerate(extents)}
    ends = {e: i for i, (_, e) in enumerate(extents)}
    if start not in starts or end not in ends or ends[end] < starts[start]:
        raise ParseError(f"row {row_id}: {what} offset {start} is not on a token boundary")
    return MentionSpan(starts[start], ends[end] + 1)


def parse_map(stream: TextIO | str, lexicon: Lexicon | None = None, source: str | None = None) -> list[MapInstance]:
    """Parse a MAP/GAP TSV file. With a lexicon, pronoun fields are checked against it."""
    text = stream if isinstance(stream, str) else stream.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty file: missing header row", 1, source)
    header = tuple(h.strip() for h in lines[0].rstrip("\r").split("\t"))
    if header != COLUMNS:
        raise ParseError(f"header must be {'/'.join(COLUMNS)}, got {'/'.join(header)}", 1, source)
    out = []
    seen = set()
    for line_no, raw in enumerate(lines[1:], start=2):
        raw = raw.rstrip("\r")
        if not raw.strip():
            continue
        row = raw.split("\t")
        if len(row) != len(COLUMNS):
            raise ParseError(f"expected {len(COLUMNS)} columns, got {len(row)}", line_no, source)
        rec = dict(zip(COLUMNS, row))
        if rec["ID"] in seen:
            raise ParseError(f"row {rec['ID']}: duplicate ID", line_no, source)
        seen.add(rec["ID"])
        try:
            out.append(_instance_from_row(rec, lexicon))
        except ParseError as exc:
            raise ParseError(exc.message, line_no, source) from None
        except ValueError as exc:
            raise ParseError(f"row {rec['ID']}: {exc}", line_no, source) from None
    return out


def _instance_from_row(rec: dict, lexicon: Lexicon | None) -> MapInstance:
    row_id = rec["ID"]
    text = rec["Text"]
    fields = {}
    for key in ("Pronoun", "A", "B"):
        try:
            off = int(rec[f"{key}-offset"])
        except ValueError:
            raise ParseError(f"row {row_id}: {key}-offset is not an integer: {rec[f'{key}-offset']!r}") from None
        surface = rec[key]
        if not surface or text[off:off + len(surface)] != surface:
            raise ParseError(
                f"row {row_id}: {key} {surface!r} does not match text at offset {off} "
                f"({text[off:off + len(surface)]!r})"
            )
        fields[key] = (off, off + len(surface))
    cuts = [b for span in fields.values() for b in span]
    tokens, extents = tokens_from_text(text, cuts)
    spans = {k: _char_span_to_tokens(extents, s, e, k, row_id) for k, (s, e) in fields.items()}
    a_coref = _parse_bool(rec["A-coref"], "A-coref", row_id)
    b_coref = _parse_bool(rec["B-coref"], "B-coref", row_id)
    if a_coref and b_coref:
        raise ParseError(f"row {row_id}: A-coref and B-coref are both TRUE")
    if len(spans["Pronoun"]) != 1:
        raise ParseError(f"row {row_id}: pronoun must be a single token")
    if lexicon is not None and not lexicon.is_pronoun(rec["Pronoun"]):
        raise ParseError(f"row {row_id}: {rec['Pronoun']!r} is not a known pronoun form")
    return MapInstance(
        instance_id=row_id,
        tokens=tuple(tokens),
        pronoun_span=spans["Pronoun"],
        candidate_a_span=spans["A"],
        candidate_b_span=spans["B"],
        a_is_coref=a_coref,
        b_is_coref=b_coref,
        source_url=rec["URL"],
    )


def _row(inst: MapInstance) -> list[str]:
    offsets = char_offsets(inst.tokens)
    text = render_text(inst.tokens)

    def field(span: MentionSpan):
        s = offsets[span.start][0]
        e = offsets[span.end - 1][1]
        return text[s:e], str(s)

    pro, pro_off = field(inst.pronoun_span)
    a, a_off = field(inst.candidate_a_span)
    b, b_off = field(inst.candidate_b_span)
    return [
        inst.instance_id, text, pro, pro_off,
        a, a_off, "TRUE" if inst.a_is_coref else "FALSE",
        b, b_off, "TRUE" if inst.b_is_coref else "FALSE",
        inst.source_url,
    ]


def emit_map(instances: Iterable[MapInstance]) -> str:
    lines = ["\t".join(COLUMNS)]
    for inst in instances:
        row = _row(inst)
        if any("\t" in c or "\n" in c for c in row):
            raise ValueError(f"{inst.instance_id}: fields may not contain tabs or newlines")
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"
