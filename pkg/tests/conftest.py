import re
from pathlib import Path

import pytest

from inclusive_coref.corpus import Document, MentionSpan, NamedEntity, Token
from inclusive_coref.lexicon import default_lexicon
from inclusive_coref.map_format import COLUMNS, parse_map

FIXTURES = Path(__file__).parent / "fixtures"

_MARK = re.compile(r"\[([ABP]) ([^\]]+)\]")


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


def map_row(marked: str, iid: str = "t1", coref: str = "A") -> str:
    """One TSV row from text marked up as ``[A name] ... [B name] ... [P pronoun]``."""
    text, spans, pos = [], {}, 0
    last = 0
    for m in _MARK.finditer(marked):
        text.append(marked[last:m.start()])
        pos += m.start() - last
        spans[m.group(1)] = (m.group(2), pos)
        text.append(m.group(2))
        pos += len(m.group(2))
        last = m.end()
    text.append(marked[last:])
    text = "".join(text)
    (a, ao), (b, bo), (p, po) = spans["A"], spans["B"], spans["P"]
    return "\t".join([iid, text, p, str(po), a, str(ao), str(coref == "A").upper(), b, str(bo),
                      str(coref == "B").upper(), "http://example.org/" + iid])


def map_tsv(*rows: str) -> str:
    return "\t".join(COLUMNS) + "\n" + "".join(r + "\n" for r in rows)


def make_map(marked: str, iid: str = "t1", coref: str = "A", lexicon=None):
    return parse_map(map_tsv(map_row(marked, iid, coref)), lexicon)[0]


def make_doc(markup: str, doc_id: str = "wiki_test", part: str = "000") -> Document:
    """Document from whitespace-separated tokens with bracket markup.

    ``[e`` opens a mention of entity ``e`` (``[e*`` flags an incorrect reference),
    ``]`` closes the innermost open mention, ``<`` and ``>`` delimit a PERSON
    name and ``||`` starts a new sentence.
    """
    tokens, mentions, names, starts = [], [], [], [0]
    stack, name_start = [], None
    for t in markup.split():
        if t.startswith("[") and len(t) > 1:
            eid = t[1:]
            flag = eid.endswith("*")
            stack.append((len(tokens), eid.rstrip("*"), flag))
        elif t == "]":
            s, eid, flag = stack.pop()
            mentions.append(MentionSpan(s, len(tokens), eid, flag))
        elif t == "<":
            name_start = len(tokens)
        elif t == ">":
            names.append(NamedEntity(name_start, len(tokens), "PERSON"))
        elif t == "||":
            starts.append(len(tokens))
        else:
            tokens.append(Token(len(tokens), t))
    assert not stack
    return Document(doc_id, tuple(tokens), tuple(sorted(mentions)), metadata={"part": part},
                    named_entities=tuple(names), sentence_starts=tuple(starts) if tokens else ())
