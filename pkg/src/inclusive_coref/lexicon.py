"""Inventory of gender cue classes: pronoun paradigms, gendered nouns, terms of
address, and the pool of replacement names.

The shipped defaults live in ``inclusive_coref/data``; any of the four TSV files can
be swapped for a user-supplied one.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Token
from .errors import LexiconError

CASES = ("nominative", "accusative", "possessive-determiner", "possessive-independent", "reflexive")
NOM, ACC, POS_DET, POS_IND, REFL = CASES
CATEGORIES = ("binary", "singular-they", "neopronoun")
_CASE_COLUMNS = dict(zip(("nom", "acc", "pos_det", "pos_ind", "refl"), CASES))

PUNCTUATION = set(".,;:!?\"'()[]{}“”‘’«»…-–—/")
SENTENCE_FINAL = {".", "!", "?", "…", "...", '"', "”", "''"}

# Tokens after which an ambiguous "her"/"his"/"zir" cannot be a determiner.
FUNCTION_WORDS = frozenset("""
and or but nor so yet because although though while whereas if unless until since as than when
whenever where wherever after before that which who whom whose what why how whether
to in on at for from with by about into onto over under of off out up down through during without
within against among amongst between behind beyond toward towards upon around across along like
near past via per despite except throughout underneath
the a an this these those some any no every each all both either neither another such
i me my mine myself you your yours yourself we us our ours ourselves it its itself
he him his himself she her hers herself they them their theirs themselves
again too also now then there here today yesterday tomorrow later soon once twice anymore
away home well alone together either instead either
""".split())
AUXILIARIES = frozenset("""
is are was were be been being am has have had do does did will would shall should can could
may might must 's 're 've 'd 'll n't isn't wasn't hasn't doesn't didn't won't wouldn't can't
couldn't shouldn't
""".split())
# Verbs that essentially never head a noun phrase after a possessive.
_VERB_ONLY = frozenset("""
go goes went gone come came know knew say said see saw tell told leave left make made get got
take took give gave become became seem seemed bring brought sit sat begin began speak spoke
buy bought eat ate sing sang die died marry married choose chose remain remained seek sought
feel felt find found keep kept think thought believe believed
""".split())


@dataclass(frozen=True)
class PronounParadigm:
    paradigm_id: str
    category: str
    # case -> surface variants; the first variant is the canonical rendering
    variants: dict

    @property
    def forms(self) -> dict[str, str]:
        return {case: vs[0] for case, vs in self.variants.items()}

    def cases_of(self, surface: str) -> list[str]:
        s = surface.lower()
        return [case for case in CASES if s in self.variants.get(case, ())]

    def render(self, case: str, capitalize: bool = False) -> str:
        return render_pronoun(self, case, capitalize)


@dataclass(frozen=True)
class GenderedNounEntry:
    gendered_form: str
    plural_form: str | None
    neutral_form: str
    neutral_plural: str | None
    lexical_gender: str


@dataclass(frozen=True)
class AddressTerm:
    surface_variants: tuple[str, ...]
    action: str = "delete"


@dataclass(frozen=True, order=True)
class NameEntry:
    initial: str
    last_name: str

    def render(self) -> str:
        return f"{self.initial} {self.last_name}"


@dataclass(frozen=True)
class NamePool:
    entries: tuple[NameEntry, ...]
    rng_seed: int = 0
    # when set, replacements are taken in pool order instead of being sampled
    ordered: bool = False

    @classmethod
    def pinned(cls, names: Iterable[str]) -> "NamePool":
        """Pool whose entries are handed out in the given order, e.g. ``["M. Booth"]``."""
        entries = []
        for name in names:
            initial, _, last = name.partition(" ")
            entries.append(NameEntry(initial, last))
        return cls(tuple(entries), ordered=True)


@dataclass(frozen=True)
class CueClass:
    kind: str  # pronoun | gendered_noun | address_term | name | other
    paradigm: str | None = None
    case: str | None = None
    entry: GenderedNounEntry | None = None


def render_pronoun(paradigm: PronounParadigm, case: str, capitalize: bool = False) -> str:
    form = paradigm.forms[case]
    return form[:1].upper() + form[1:] if capitalize else form


def _surface(tok) -> str:
    return tok.surface if isinstance(tok, Token) else tok


def _strip_clitic(s: str) -> tuple[str, str]:
    for clitic in ("'s", "’s", "'", "’"):
        if s.endswith(clitic) and len(s) > len(clitic):
            return s[: -len(clitic)], clitic
    return s, ""


def is_punctuation(s: str) -> bool:
    return all(ch in PUNCTUATION for ch in s)


@dataclass(frozen=True)
class Lexicon:
    paradigms: tuple[PronounParadigm, ...]
    nouns: tuple[GenderedNounEntry, ...]
    address_terms: tuple[AddressTerm, ...]
    name_pool: NamePool
    _pronouns: dict = field(default_factory=dict, repr=False, compare=False)
    _nouns: dict = field(default_factory=dict, repr=False, compare=False)
    _neutral: frozenset = field(default=frozenset(), repr=False, compare=False)
    _address: frozenset = field(default=frozenset(), repr=False, compare=False)

    def __post_init__(self):
        pronouns: dict[str, list[tuple[str, str]]] = {}
        for p in self.paradigms:
            for case in CASES:
                for v in p.variants[case]:
                    pronouns.setdefault(v, []).append((p.paradigm_id, case))
        nouns = {}
        for e in self.nouns:
            nouns[e.gendered_form.lower()] = (e, False)
            if e.plural_form:
                nouns[e.plural_form.lower()] = (e, True)
        neutral = set()
        for e in self.nouns:
            for form in (e.neutral_form, e.neutral_plural):
                if form:
                    # words of "police officer" count too, so name detection sees the same
                    # tokens before and after the noun substitution
                    neutral.add(form.lower())
                    neutral.update(form.lower().split())
        address = {v for a in self.address_terms for v in a.surface_variants}
        object.__setattr__(self, "_pronouns", pronouns)
        object.__setattr__(self, "_nouns", nouns)
        object.__setattr__(self, "_neutral", frozenset(neutral))
        object.__setattr__(self, "_address", frozenset(address))

    def paradigm(self, paradigm_id: str) -> PronounParadigm:
        for p in self.paradigms:
            if p.paradigm_id == paradigm_id:
                return p
        raise KeyError(f"unknown pronoun paradigm {paradigm_id!r}")

    @property
    def paradigm_ids(self) -> list[str]:
        return [p.paradigm_id for p in self.paradigms]

    def is_pronoun(self, surface: str) -> bool:
        return surface.lower() in self._pronouns

    def pronoun_readings(self, surface: str) -> list[tuple[str, str]]:
        return list(self._pronouns.get(surface.lower(), ()))

    def category_of(self, surface: str) -> str | None:
        readings = self.pronoun_readings(surface)
        return self.paradigm(readings[0][0]).category if readings else None

    def is_address_term(self, surface: str) -> bool:
        return surface in self._address

    def lookup_noun(self, surface: str) -> tuple[GenderedNounEntry, bool] | None:
        """``(entry, is_plural)`` for a gendered noun token, ignoring a possessive clitic."""
        base, _ = _strip_clitic(surface)
        return self._nouns.get(base.lower())

    def is_neutral_noun(self, surface: str) -> bool:
        base, _ = _strip_clitic(surface)
        return base.lower() in self._neutral

    def pronoun_case(
        self,
        surface: str,
        next_token: str | None = None,
        pos_tag: str | None = None,
        next_pos: str | None = None,
    ) -> tuple[str, str]:
        """Resolve a pronoun form to ``(paradigm_id, case)``.

        Forms shared by two cases ("her", "his", "zir") are disambiguated with POS tags
        when given, otherwise by what follows: a following content word makes the form
        a possessive determiner.
        """
        readings = self.pronoun_readings(surface)
        if not readings:
            raise KeyError(f"{surface!r} is not a known pronoun form")
        paradigm_id = readings[0][0]
        cases = [c for p, c in readings if p == paradigm_id]
        if len(cases) == 1:
            return paradigm_id, cases[0]
        if POS_IND in cases and pos_tag == "PRP$":
            # Penn tags both readings of "his" as PRP$
            pos_tag = None
        determiner = _looks_like_determiner(next_token, pos_tag, next_pos)
        if POS_DET in cases and determiner:
            return paradigm_id, POS_DET
        for other in (ACC, POS_IND, NOM, REFL):
            if other in cases:
                return paradigm_id, other
        return paradigm_id, cases[0]


def _looks_like_determiner(next_token: str | None, pos_tag: str | None, next_pos: str | None) -> bool:
    if pos_tag is not None:
        if pos_tag == "PRP$":
            return True
        if pos_tag == "PRP":
            return False
    if next_pos is not None:
        return next_pos.startswith(("NN", "JJ", "CD", "VBG")) or next_pos in ("RBS", "RBR")
    if next_token is None:
        return False
    nxt = next_token.lower()
    if is_punctuation(nxt) or nxt in FUNCTION_WORDS or nxt in AUXILIARIES or nxt in _VERB_ONLY:
        return False
    return True


def classify_token(
    token: Token | str,
    left: Sequence[Token | str],
    right: Sequence[Token | str],
    lexicon: Lexicon,
    is_name: bool | None = None,
) -> CueClass:
    """Assign one token to exactly one cue class.

    ``is_name`` comes from corpus annotations (MAP candidate spans, PERSON entities).
    When it is ``None`` an uppercase-initial, non-sentence-initial word counts as a name.
    """
    s = _surface(token)
    if lexicon.is_pronoun(s):
        nxt = _next_word(right, lexicon)
        tag = token.pos_tag if isinstance(token, Token) else None
        paradigm, case = lexicon.pronoun_case(s, nxt, tag)
        return CueClass("pronoun", paradigm=paradigm, case=case)
    if lexicon.is_address_term(s):
        return CueClass("address_term")
    hit = lexicon.lookup_noun(s)
    if hit is not None:
        return CueClass("gendered_noun", entry=hit[0])
    if is_name is None:
        prev = _surface(left[-1]) if left else None
        sentence_initial = prev is None or prev in SENTENCE_FINAL
        base, _ = _strip_clitic(s)
        if base[:1].isupper() and base.isalpha() and not sentence_initial:
            return CueClass("name")
    elif is_name and any(ch.isalnum() for ch in s):
        return CueClass("name")
    return CueClass("other")


def _next_word(right: Sequence[Token | str], lexicon: Lexicon) -> str | None:
    # address terms are transparent so that deleting them cannot change the reading
    for tok in right:
        s = _surface(tok)
        if not lexicon.is_address_term(s):
            return s
    return None


def pronoun_case(surface: str, lexicon: Lexicon, next_token: str | None = None, pos_tag: str | None = None):
    return lexicon.pronoun_case(surface, next_token, pos_tag)


# ---------------------------------------------------------------- loading

def _read_tsv(path: Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LexiconError(f"cannot read lexicon file {path}: {exc}") from None
    lines = [(i, ln.rstrip("\r")) for i, ln in enumerate(text.split("\n"), start=1)]
    lines = [(i, ln) for i, ln in lines if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise LexiconError(f"{path}: empty file")
    header = [h.strip() for h in lines[0][1].split("\t")]
    return header, [(i, [c.strip() for c in ln.split("\t")]) for i, ln in lines[1:]]


def _opt(value: str) -> str | None:
    return None if value in ("", "-") else value


def load_paradigms(path: Path) -> tuple[PronounParadigm, ...]:
    header, rows = _read_tsv(path)
    if header[:2] != ["paradigm_id", "category"]:
        raise LexiconError(f"{path}: header must start with paradigm_id, category")
    out, seen = [], set()
    for line, row in rows:
        rec = dict(zip(header, row))
        pid = rec.get("paradigm_id", "")
        if pid in seen:
            raise LexiconError(f"{path}:{line}: duplicate paradigm {pid!r}")
        seen.add(pid)
        category = rec.get("category", "")
        if category not in CATEGORIES:
            raise LexiconError(f"{path}:{line}: paradigm {pid!r} has unknown category {category!r}")
        expected = {"she": "binary", "he": "binary", "they": "singular-they"}.get(pid, "neopronoun")
        if category != expected:
            raise LexiconError(f"{path}:{line}: paradigm {pid!r} must have category {expected!r}")
        variants = {}
        for col, case in _CASE_COLUMNS.items():
            cell = rec.get(col, "")
            forms = tuple(v.strip().lower() for v in cell.split("|") if v.strip())
            if not forms or cell == "-":
                raise LexiconError(f"{path}:{line}: paradigm {pid!r} missing case {case!r}")
            variants[case] = forms
        out.append(PronounParadigm(pid, category, variants))
    return tuple(out)


def load_nouns(path: Path) -> tuple[GenderedNounEntry, ...]:
    header, rows = _read_tsv(path)
    cols = ["gendered", "plural", "neutral", "neutral_plural", "lexical_gender"]
    if header != cols:
        raise LexiconError(f"{path}: header must be {', '.join(cols)}")
    out, seen = [], {}
    for line, row in rows:
        if len(row) != len(cols):
            raise LexiconError(f"{path}:{line}: expected {len(cols)} columns")
        g, pl, n, npl, lg = row
        if lg not in ("fem", "masc"):
            raise LexiconError(f"{path}:{line}: lexical_gender must be fem or masc")
        entry = GenderedNounEntry(g, _opt(pl), n, _opt(npl), lg)
        if g.lower() == n.lower():
            raise LexiconError(f"{path}:{line}: {g!r} maps to itself")
        for form in filter(None, (entry.gendered_form, entry.plural_form)):
            key = form.lower()
            if key in seen:
                raise LexiconError(f"{path}:{line}: duplicate gendered form {form!r} (first on line {seen[key]})")
            seen[key] = line
        out.append(entry)
    return tuple(out)


def load_address_terms(path: Path) -> tuple[AddressTerm, ...]:
    _, rows = _read_tsv(path)
    out, seen = [], set()
    for line, row in rows:
        variants = tuple(v for v in row if v)
        if not variants:
            raise LexiconError(f"{path}:{line}: empty address term row")
        for v in variants:
            if v in seen:
                raise LexiconError(f"{path}:{line}: duplicate address variant {v!r}")
            seen.add(v)
        out.append(AddressTerm(variants))
    return tuple(out)


def load_names(path: Path, rng_seed: int = 0) -> NamePool:
    header, rows = _read_tsv(path)
    if header != ["initial", "last_name"]:
        raise LexiconError(f"{path}: header must be initial, last_name")
    entries, seen = [], set()
    for line, row in rows:
        if len(row) != 2 or not all(row):
            raise LexiconError(f"{path}:{line}: expected initial and last_name")
        entry = NameEntry(row[0], row[1])
        if len(entry.initial) != 2 or not entry.initial[0].isalpha() or entry.initial[1] != ".":
            raise LexiconError(f"{path}:{line}: initial must be a letter followed by '.'")
        if entry in seen:
            raise LexiconError(f"{path}:{line}: duplicate name {entry.render()!r}")
        seen.add(entry)
        entries.append(entry)
    if not entries:
        raise LexiconError(f"{path}: name pool is empty")
    return NamePool(tuple(entries), rng_seed)


def check_cue_classes(lexicon: Lexicon) -> None:
    """Reject any surface form that would belong to two cue classes."""
    classes: dict[str, set[str]] = {}

    def add(form: str, cls: str):
        classes.setdefault(form.lower(), set()).add(cls)

    for form in lexicon._pronouns:
        add(form, "pronoun")
    for form in lexicon._nouns:
        add(form, "gendered noun")
    for form in lexicon._address:
        add(form, "address term")
    for form in lexicon._neutral:
        for word in form.split():
            if word in lexicon._pronouns or word in lexicon._nouns or word in {a.lower() for a in lexicon._address}:
                add(word, "neutral noun")
    for e in lexicon.name_pool.entries:
        add(e.last_name, "replacement name")
        add(e.initial, "replacement name")
    clashes = sorted(f"{form!r} ({' / '.join(sorted(c))})" for form, c in classes.items() if len(c) > 1)
    if clashes:
        raise LexiconError("surface forms in more than one cue class: " + ", ".join(clashes))


def default_lexicon_dir() -> Path:
    return Path(str(resources.files("inclusive_coref") / "data"))


def load_lexicon(
    lexicon_dir: str | Path | None = None,
    *,
    paradigms: str | Path | None = None,
    nouns: str | Path | None = None,
    address: str | Path | None = None,
    names: str | Path | None = None,
    rng_seed: int = 0,
) -> Lexicon:
    """Load and validate a lexicon. Individual paths override files in ``lexicon_dir``."""
    base = Path(lexicon_dir) if lexicon_dir is not None else default_lexicon_dir()
    if lexicon_dir is not None and not base.is_dir():
        raise LexiconError(f"lexicon directory {base} does not exist")
    lex = Lexicon(
        paradigms=load_paradigms(Path(paradigms) if paradigms else base / "paradigms.tsv"),
        nouns=load_nouns(Path(nouns) if nouns else base / "nouns.tsv"),
        address_terms=load_address_terms(Path(address) if address else base / "address.tsv"),
        name_pool=load_names(Path(names) if names else base / "names.tsv", rng_seed),
    )
    check_cue_classes(lex)
    return lex


@functools.lru_cache(maxsize=None)
def default_lexicon() -> Lexicon:
    return load_lexicon()


@functools.lru_cache(maxsize=None)
def base_verbs() -> frozenset[str]:
    """Small list of verb base forms used to undo third-person ``-s`` agreement."""
    text = (default_lexicon_dir() / "verbs.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.split() if w.strip())
