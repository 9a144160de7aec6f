"""CoNLL-2012 reading and writing.

Column layout follows the shared-task files: document id, part, word index, word,
POS, parse, lemma, frameset, sense, speaker, named entities, [predicate args,]
coreference. Shorter layouts are accepted as long as the word is the fourth
column and coreference is the last one.

Incorrect references (misgendering, deadnaming) are marked by a ``*`` after the
entity id in the opening bracket: ``(3*`` ... ``3)`` or ``(3*)``.
"""

from __future__ import annotations

import io
import re
from typing import Iterable, TextIO

from .corpus import Document, MentionSpan, NamedEntity, Token
from .errors import ParseError

_BEGIN = re.compile(r"^#begin document\s*\(?(?P<name>[^)]*?)\)?\s*(?:;\s*part\s+(?P<part>\S+))?\s*$")
_SINGLE = re.compile(r"^\((?P<id>[^()|*]+)(?P<flag>\*?)\)$")
_OPEN = re.compile(r"^\((?P<id>[^()|*]+)(?P<flag>\*?)$")
_CLOSE = re.compile(r"^(?P<id>[^()|*]+)\)$")
# "(PERSON*" opens, "(PERSON*)" and "(PERSON)" are single-token entities
_NE_OPEN = re.compile(r"^\((?P<label>[^()*]+)(?:\*(?P<close>\))?|(?P<single>\)))$")

GENRE_PREFIXES = {
    "wikipedia": "wikipedia", "wiki": "wikipedia",
    "periodical": "periodical", "periodicals": "periodical", "news": "periodical",
    "fanfiction": "fanfiction", "fanfic": "fanfiction", "ao3": "fanfiction",
}


def genre_from_doc_id(doc_id: str) -> str:
    head = re.split(r"[/_\-]", doc_id.strip().lower(), maxsplit=1)[0]
    return GENRE_PREFIXES.get(head, "other")


class _DocBuilder:
    def __init__(self, name: str, part: str, line: int):
        self.name = name
        self.part = part
        self.begin_line = line
        self.tokens: list[Token] = []
        self.sentence_starts: list[int] = []
        self.new_sentence = True
        self.mentions: list[MentionSpan] = []
        self.open: dict[str, list[tuple[int, bool, int]]] = {}
        self.entities: list[NamedEntity] = []
        self.ne_open: tuple[str, int, int] | None = None

    def add_line(self, cols: list[str], line: int, source: str | None):
        if len(cols) < 5:
            raise ParseError(f"expected at least 5 columns, got {len(cols)}", line, source)
        i = len(self.tokens)
        if self.new_sentence:
            self.sentence_starts.append(i)
            self.new_sentence = False
        pos = cols[4] if len(cols) >= 6 and cols[4] != "-" else None
        self.tokens.append(Token(i, cols[3], pos, True))
        if len(cols) >= 12:
            self._named_entity(cols[10], i, line, source)
        self._coref(cols[-1], i, line, source)

    def _named_entity(self, cell: str, i: int, line: int, source):
        if cell in ("*", "-"):
            return
        m = _NE_OPEN.match(cell)
        if m:
            if self.ne_open is not None:
                raise ParseError(f"named entity opened inside another: {cell!r}", line, source)
            if m.group("close") or m.group("single"):
                self.entities.append(NamedEntity(i, i + 1, m.group("label")))
            else:
                self.ne_open = (m.group("label"), i, line)
        elif cell == "*)":
            if self.ne_open is None:
                raise ParseError("named entity closed without being opened", line, source)
            label, start, _ = self.ne_open
            self.entities.append(NamedEntity(start, i + 1, label))
            self.ne_open = None
        else:
            raise ParseError(f"malformed named entity column {cell!r}", line, source)

    def _coref(self, cell: str, i: int, line: int, source):
        if cell in ("-", "_"):
            return
        for part in cell.split("|"):
            if m := _SINGLE.match(part):
                self.mentions.append(MentionSpan(i, i + 1, m.group("id"), bool(m.group("flag"))))
            elif m := _OPEN.match(part):
                self.open.setdefault(m.group("id"), []).append((i, bool(m.group("flag")), line))
            elif m := _CLOSE.match(part):
                stack = self.open.get(m.group("id"))
                if not stack:
                    raise ParseError(f"cluster {m.group('id')!r} closed without being opened", line, source)
                start, flag, _ = stack.pop()
                self.mentions.append(MentionSpan(start, i + 1, m.group("id"), flag))
            else:
                raise ParseError(f"malformed coreference marker {part!r}", line, source)

    def finish(self, line: int, source):
        for eid, stack in self.open.items():
            if stack:
                raise ParseError(
                    f"unbalanced cluster bracket: {eid!r} opened on line {stack[-1][2]} is never closed",
                    line, source,
                )
        if self.ne_open is not None:
            raise ParseError(f"named entity opened on line {self.ne_open[2]} is never closed", line, source)
        return Document(
            doc_id=self.name,
            tokens=tuple(self.tokens),
            mentions=tuple(sorted(self.mentions)),
            genre=genre_from_doc_id(self.name),
            metadata={"part": self.part},
            named_entities=tuple(sorted(self.entities)),
            sentence_starts=tuple(self.sentence_starts),
        )


def parse_conll(stream: TextIO | str, source: str | None = None) -> list[Document]:
    """Parse every document in a CoNLL-2012 stream. Errors carry the line number."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    docs: list[Document] = []
    cur: _DocBuilder | None = None
    line_no = 0
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if line.startswith("#begin document"):
            if cur is not None:
                raise ParseError(f"'#begin document' inside document {cur.name!r} (missing '#end document')",
                                 line_no, source)
            m = _BEGIN.match(line)
            if not m:
                raise ParseError(f"malformed document header {line!r}", line_no, source)
            cur = _DocBuilder(m.group("name").strip(), m.group("part") or "000", line_no)
        elif line.startswith("#end document"):
            if cur is None:
                raise ParseError("'#end document' without '#begin document'", line_no, source)
            docs.append(cur.finish(line_no, source))
            cur = None
        elif not line.strip():
            if cur is not None:
                cur.new_sentence = True
        elif line.startswith("#"):
            continue
        else:
            if cur is None:
                raise ParseError("token line outside a document (missing '#begin document')", line_no, source)
            cur.add_line(line.split(), line_no, source)
    if cur is not None:
        raise ParseError(f"document {cur.name!r} has no '#end document'", line_no, source)
    return docs


def _coref_cells(doc: Document) -> list[str]:
    n = len(doc.tokens)
    opens: list[list[MentionSpan]] = [[] for _ in range(n)]
    closes: list[list[MentionSpan]] = [[] for _ in range(n)]
    singles: list[list[MentionSpan]] = [[] for _ in range(n)]
    for m in doc.mentions:
        if m.end - m.start == 1:
            singles[m.start].append(m)
        else:
            opens[m.start].append(m)
            closes[m.end - 1].append(m)
    cells = []
    for i in range(n):
        parts = []
        # closes of older mentions first so a same-id open on this token is not popped
        for m in sorted(closes[i], key=lambda m: -m.start):
            parts.append(f"{m.entity_id})")
        for m in singles[i]:
            parts.append(f"({m.entity_id}{'*' if m.incorrect_reference else ''})")
        for m in sorted(opens[i], key=lambda m: -m.end):
            parts.append(f"({m.entity_id}{'*' if m.incorrect_reference else ''}")
        cells.append("|".join(parts) or "-")
    return cells


def _ne_cells(doc: Document) -> list[str]:
    cells = ["*"] * len(doc.tokens)
    for ne in doc.named_entities:
        if ne.end - ne.start == 1:
            cells[ne.start] = f"({ne.label})"
        else:
            cells[ne.start] = f"({ne.label}*"
            cells[ne.end - 1] = "*)"
    return cells


def emit_conll(docs: Document | Iterable[Document]) -> str:
    """Render documents in the 12-column CoNLL-2012 layout.

    Token surfaces are written verbatim; spacing is not recorded by the format,
    so a parsed document always has ``trailing_space=True`` on every token.
    """
    if isinstance(docs, Document):
        docs = [docs]
    out = []
    for doc in docs:
        part = doc.part
        if not doc.doc_id or any(ch.isspace() for ch in doc.doc_id + part):
            raise ValueError(f"document id {doc.doc_id!r} / part {part!r} cannot be written as a CoNLL column")
        out.append(f"#begin document ({doc.doc_id}); part {part}\n")
        coref = _coref_cells(doc)
        ne = _ne_cells(doc)
        starts = set(doc.sentence_starts)
        word_idx = 0
        for i, tok in enumerate(doc.tokens):
            if i in starts and i > 0:
                out.append("\n")
                word_idx = 0
            cols = [doc.doc_id, part, str(word_idx), tok.surface, tok.pos_tag or "-",
                    "-", "-", "-", "-", "-", ne[i], coref[i]]
            out.append("\t".join(cols) + "\n")
            word_idx += 1
        if doc.tokens:
            out.append("\n")
        out.append("#end document\n")
    return "".join(out)
