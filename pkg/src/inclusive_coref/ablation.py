"""Gender-cue ablations for MAP instances and coreference documents.

Four substitutions hide one cue class each:

* ``Pro``  - third person gendered pronouns become a neutral paradigm (they, ze, xey)
* ``Name`` - person names become ``<initial>. <last name>`` drawn from a name pool
* ``Sem``  - semantically gendered nouns become their gender-indefinite variant
* ``Addr`` - terms of address are deleted

They touch disjoint token classes, so the order of application does not matter;
:data:`CANONICAL_ORDER` fixes one anyway. Every substitution returns an
:class:`OffsetMap` and all tracked spans (pronoun, candidates, mentions, entities)
are carried through it. Gold labels are never touched.
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, TypeVar, Union

from .corpus import Document, MapInstance, MentionSpan, NamedEntity, Token, reindex
from .errors import AblationError, NamePoolExhausted
from .lexicon import (
    ACC,
    NOM,
    Lexicon,
    NameEntry,
    NamePool,
    _strip_clitic,
    base_verbs,
    is_punctuation,
)

log = logging.getLogger(__name__)

PRO, NAME, SEM, ADDR = "Pro", "Name", "Sem", "Addr"
SUBSTITUTIONS = (PRO, NAME, SEM, ADDR)
CANONICAL_ORDER = (ADDR, SEM, NAME, PRO)

PRESETS: dict[str, frozenset[str]] = {
    # forward selection: start with everything hidden, add one cue back at a time
    "Zero": frozenset({PRO, NAME, SEM, ADDR}),
    "NotNameNotSemNotAddr": frozenset({NAME, SEM, ADDR}),
    "NotSemNotAddr": frozenset({SEM, ADDR}),
    "NotNameNotAddr": frozenset({NAME, ADDR}),
    "NotNameNotSem": frozenset({NAME, SEM}),
    # backward selection: hide one cue at a time
    "Orig": frozenset(),
    "NotPro": frozenset({PRO}),
    "NotName": frozenset({NAME}),
    "NotSem": frozenset({SEM}),
    "NotAddr": frozenset({ADDR}),
}
PRESET_ORDER = tuple(PRESETS)
FORWARD_PRESETS = PRESET_ORDER[:5]
BACKWARD_PRESETS = PRESET_ORDER[5:]
PRESET_LABELS = {
    "Zero": "Zero",
    "NotNameNotSemNotAddr": "¬Name¬Sem¬Addr",
    "NotSemNotAddr": "¬Sem¬Addr",
    "NotNameNotAddr": "¬Name¬Addr",
    "NotNameNotSem": "¬Name¬Sem",
    "Orig": "Orig",
    "NotPro": "¬Pro",
    "NotName": "¬Name",
    "NotSem": "¬Sem",
    "NotAddr": "¬Addr",
}

_AGREEMENT = {
    "is": "are", "was": "were", "has": "have", "does": "do",
    "isn't": "aren't", "wasn't": "weren't", "hasn't": "haven't", "doesn't": "don't",
}

Item = Union[MapInstance, Document]
T = TypeVar("T", MapInstance, Document)


# ---------------------------------------------------------------- config types

@dataclass(frozen=True)
class AblationConfig:
    active: frozenset[str] | None = None
    preset_name: str | None = None
    target_paradigm: str = "they"
    # "off" | "basic"; None picks basic for singular they and off otherwise
    agreement_mode: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.preset_name is not None:
            if self.preset_name not in PRESETS:
                raise ValueError(f"unknown preset {self.preset_name!r}; expected one of {', '.join(PRESETS)}")
            fixed = PRESETS[self.preset_name]
            if self.active is not None and frozenset(self.active) != fixed:
                raise ValueError(f"preset {self.preset_name} fixes active substitutions to {sorted(fixed)}")
            object.__setattr__(self, "active", fixed)
        active = frozenset(self.active or ())
        unknown = active - set(SUBSTITUTIONS)
        if unknown:
            raise ValueError(f"unknown substitutions: {sorted(unknown)}")
        object.__setattr__(self, "active", active)
        if self.agreement_mode not in (None, "off", "basic"):
            raise ValueError("agreement_mode must be 'off' or 'basic'")

    @classmethod
    def from_preset(cls, name: str, **kwargs) -> "AblationConfig":
        return cls(preset_name=name, **kwargs)

    def resolved_agreement(self, lexicon: Lexicon) -> str:
        if self.agreement_mode is not None:
            return self.agreement_mode
        return default_agreement(self.target_paradigm, lexicon)


def default_agreement(target_paradigm: str, lexicon: Lexicon) -> str:
    return "basic" if lexicon.paradigm(target_paradigm).category == "singular-they" else "off"


@dataclass(frozen=True)
class OffsetMap:
    """Monotone map from original token positions to transformed positions.

    ``boundaries[i]`` is where the image of original token ``i`` begins, and
    ``boundaries[n]`` is the transformed length; a deleted token maps to an empty
    range at the gap it leaves.
    """

    boundaries: tuple[int, ...]

    @classmethod
    def identity(cls, n: int) -> "OffsetMap":
        return cls(tuple(range(n + 1)))

    @property
    def source_len(self) -> int:
        return len(self.boundaries) - 1

    @property
    def target_len(self) -> int:
        return self.boundaries[-1]

    @property
    def is_identity(self) -> bool:
        return all(b == i for i, b in enumerate(self.boundaries))

    def __getitem__(self, i: int) -> int:
        return self.boundaries[i]

    def image(self, i: int) -> tuple[int, int]:
        return self.boundaries[i], self.boundaries[i + 1]

    def map_span(self, start: int, end: int) -> tuple[int, int]:
        return self.boundaries[start], self.boundaries[end]

    def then(self, other: "OffsetMap") -> "OffsetMap":
        if other.source_len != self.target_len:
            raise ValueError("offset maps do not compose")
        return OffsetMap(tuple(other.boundaries[b] for b in self.boundaries))


@dataclass
class NameMapping:
    """Original full name -> replacement, for one instance or document."""

    mapping: dict[str, NameEntry] = field(default_factory=dict)

    def __post_init__(self):
        seen = {}
        for name, entry in self.mapping.items():
            if entry in seen:
                raise ValueError(f"{name!r} and {seen[entry]!r} both map to {entry.render()!r}")
            seen[entry] = name

    def __getitem__(self, name: str) -> NameEntry:
        return self.mapping[name]

    def __contains__(self, name):
        return name in self.mapping

    def __len__(self):
        return len(self.mapping)

    def to_dict(self) -> dict[str, str]:
        return {k: v.render() for k, v in self.mapping.items()}

    @classmethod
    def from_dict(cls, d: Mapping[str, str]) -> "NameMapping":
        out = {}
        for k, v in d.items():
            initial, _, last = v.partition(" ")
            out[k] = NameEntry(initial, last)
        return cls(out)


@dataclass(frozen=True)
class AblationResult:
    item: Item
    offset_map: OffsetMap
    name_mapping: NameMapping | None = None
    config: AblationConfig | None = None


# ---------------------------------------------------------------- helpers

def derive_seed(seed: int, item_id: str) -> int:
    """Instance-local seed; independent of processing order and Python's hash salt."""
    digest = hashlib.sha256(f"{seed}:{item_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def item_id(item: Item) -> str:
    if isinstance(item, MapInstance):
        return item.instance_id
    return f"{item.doc_id}/{item.part}"


def case_style(surface: str) -> str:
    letters = [ch for ch in surface if ch.isalpha()]
    if len(letters) > 1 and all(ch.isupper() for ch in letters):
        return "upper"
    if letters and letters[0].isupper():
        return "title"
    return "lower"


def apply_style(word: str, style: str) -> str:
    if style == "upper":
        return word.upper()
    if style == "title":
        return word[:1].upper() + word[1:]
    return word


def _rewrite(tokens: Sequence[Token], replacements: Mapping[int, list[Token]]) -> tuple[tuple[Token, ...], OffsetMap]:
    out: list[Token] = []
    bounds = []
    for i, tok in enumerate(tokens):
        bounds.append(len(out))
        if i not in replacements:
            out.append(tok)
            continue
        new = replacements[i]
        if not new:
            # "Smith Mr.," must not become "Smith ,"
            if out and out[-1].trailing_space and not tok.trailing_space:
                out[-1] = replace(out[-1], trailing_space=False)
            continue
        out.extend(new)
    bounds.append(len(out))
    return reindex(out), OffsetMap(tuple(bounds))


def _remap_span(omap: OffsetMap, start: int, end: int, what: str, owner: str) -> tuple[int, int]:
    s, e = omap.map_span(start, end)
    if s >= e:
        raise AblationError(f"{owner}: {what} [{start}, {end}) was deleted entirely by the ablation")
    return s, e


def _rebuild(item: T, tokens: tuple[Token, ...], omap: OffsetMap) -> T:
    if isinstance(item, MapInstance):
        def span(sp: MentionSpan, what: str) -> MentionSpan:
            s, e = _remap_span(omap, sp.start, sp.end, what, item.instance_id)
            return MentionSpan(s, e, sp.entity_id, sp.incorrect_reference)

        return replace(
            item,
            tokens=tokens,
            pronoun_span=span(item.pronoun_span, "pronoun"),
            candidate_a_span=span(item.candidate_a_span, "candidate A"),
            candidate_b_span=span(item.candidate_b_span, "candidate B"),
        )
    owner = item_id(item)
    mentions = []
    for m in item.mentions:
        s, e = _remap_span(omap, m.start, m.end, f"mention of entity {m.entity_id}", owner)
        mentions.append(MentionSpan(s, e, m.entity_id, m.incorrect_reference))
    entities = []
    for ne in item.named_entities:
        s, e = omap.map_span(ne.start, ne.end)
        if s < e:
            entities.append(NamedEntity(s, e, ne.label))
    starts = sorted({omap[s] for s in item.sentence_starts if omap[s] < len(tokens)})
    return replace(
        item,
        tokens=tokens,
        mentions=tuple(sorted(mentions)),
        named_entities=tuple(entities),
        sentence_starts=tuple(starts),
    )


def _finish(item: T, replacements: Mapping[int, list[Token]]) -> tuple[T, OffsetMap]:
    if not replacements:
        return item, OffsetMap.identity(len(item.tokens))
    tokens, omap = _rewrite(item.tokens, replacements)
    return _rebuild(item, tokens, omap), omap


def _next_index(tokens: Sequence[Token], i: int, lexicon: Lexicon) -> int | None:
    # address terms are skipped so that deleting them first cannot change the outcome
    for j in range(i + 1, len(tokens)):
        if not lexicon.is_address_term(tokens[j].surface):
            return j
    return None


def _words_as_tokens(words: Sequence[str], template: Token) -> list[Token]:
    out = []
    for k, w in enumerate(words):
        last = k == len(words) - 1
        out.append(Token(0, w, template.pos_tag, template.trailing_space if last else True))
    return out


# ---------------------------------------------------------------- (d) terms of address

def ablate_address_terms(item: T, lexicon: Lexicon) -> tuple[T, OffsetMap]:
    """Delete every term-of-address token."""
    repl = {i: [] for i, tok in enumerate(item.tokens) if lexicon.is_address_term(tok.surface)}
    return _finish(item, repl)


# ---------------------------------------------------------------- (c) gendered nouns

def ablate_gendered_nouns(item: T, lexicon: Lexicon) -> tuple[T, OffsetMap]:
    """Replace gendered nouns (singular or plural) by their gender-indefinite variant."""
    repl = {}
    for i, tok in enumerate(item.tokens):
        hit = lexicon.lookup_noun(tok.surface)
        if hit is None:
            continue
        entry, plural = hit
        base, clitic = _strip_clitic(tok.surface)
        neutral = entry.neutral_form
        if plural:
            neutral = entry.neutral_plural or entry.neutral_form + "s"
        words = neutral.split()
        style = case_style(base)
        if style == "upper":
            words = [w.upper() for w in words]
        else:
            words[0] = apply_style(words[0], style)
        words[-1] += clitic
        repl[i] = _words_as_tokens(words, tok)
    return _finish(item, repl)


# ---------------------------------------------------------------- (b) names

def name_spans(item: Item) -> list[tuple[int, int]]:
    if isinstance(item, MapInstance):
        return [item.candidate_a_span.span, item.candidate_b_span.span]
    return item.name_spans()


def _is_name_token(tok: Token, lexicon: Lexicon) -> bool:
    s = tok.surface
    return (
        any(ch.isalnum() for ch in s)
        and not lexicon.is_pronoun(s)
        and not lexicon.is_address_term(s)
        and lexicon.lookup_noun(s) is None
        and not lexicon.is_neutral_noun(s)
    )


def _name_occurrences(item: Item, lexicon: Lexicon) -> list[tuple[str, list[int]]]:
    """``(full name, token positions)`` for every annotated name span, in text order."""
    out = []
    for start, end in sorted(name_spans(item)):
        positions = [i for i in range(start, end) if _is_name_token(item.tokens[i], lexicon)]
        if not positions:
            continue
        words = [item.tokens[i].surface for i in positions]
        words[-1] = _strip_clitic(words[-1])[0]
        out.append((" ".join(words), positions))
    return out


_RENDERED: dict[int, tuple[NamePool, frozenset[str]]] = {}


def _rendered(pool: NamePool) -> frozenset[str]:
    # keyed by identity: hashing a large frozen pool costs more than rendering it
    hit = _RENDERED.get(id(pool))
    if hit is None or hit[0] is not pool:
        if len(_RENDERED) > 32:
            _RENDERED.clear()
        hit = _RENDERED[id(pool)] = (pool, frozenset(e.render() for e in pool.entries))
    return hit[1]


def assign_names(
    names: Sequence[str],
    pool: NamePool,
    rng: random.Random,
    existing: NameMapping | None = None,
) -> NameMapping:
    """Map each distinct name to a distinct pool entry, sampling without replacement."""
    mapping = dict(existing.mapping) if existing else {}
    rendered = _rendered(pool)
    todo = []
    for name in names:
        if name not in mapping and name not in todo and name not in rendered:
            todo.append(name)
    if not todo:
        return NameMapping(mapping)
    used = set(mapping.values())
    # a replacement sharing a surname with any original name would leak it
    words = {w for name in names for w in name.split()}
    available = [e for e in pool.entries if e not in used and e.render() not in names and e.last_name not in words]
    if len(todo) > len(available):
        raise NamePoolExhausted(
            f"{len(todo)} distinct names need replacements but only {len(available)} pool entries are free"
        )
    chosen = available[: len(todo)] if pool.ordered else rng.sample(available, len(todo))
    mapping.update(zip(todo, chosen))
    return NameMapping(mapping)


def _name_tokens(entry: NameEntry, clitic: str, template_first: Token, template_last: Token, split: bool):
    first = Token(0, entry.initial, "NNP", template_first.trailing_space if split else True)
    last = Token(0, entry.last_name + clitic, "NNP", template_last.trailing_space)
    return first, last


def ablate_names(
    item: T,
    lexicon: Lexicon,
    seed: int = 0,
    name_pool: NamePool | None = None,
    mapping: NameMapping | None = None,
) -> tuple[T, OffsetMap, NameMapping]:
    """Replace each distinct name by one ``initial + last name`` pool entry.

    Every occurrence of a full name is replaced consistently; standalone uses of a
    name's first or last word elsewhere in the text are replaced too when that word
    belongs to a single name. A possessive clitic stays attached to the last word.
    Names that already are pool entries are left alone, which makes the operation
    idempotent.
    """
    pool = name_pool or lexicon.name_pool
    tokens = item.tokens
    occurrences = _name_occurrences(item, lexicon)
    rendered = _rendered(pool)
    occurrences = [(n, p) for n, p in occurrences if n not in rendered]
    rng = random.Random(derive_seed(seed ^ pool.rng_seed, item_id(item)))
    mapping = assign_names([n for n, _ in occurrences], pool, rng, mapping)

    repl: dict[int, list[Token]] = {}
    claimed: set[int] = set()

    def put(name: str, positions: list[int]):
        entry = mapping[name]
        first_i, last_i = positions[0], positions[-1]
        clitic = _strip_clitic(tokens[last_i].surface)[1]
        if first_i == last_i:
            a, b = _name_tokens(entry, clitic, tokens[first_i], tokens[last_i], split=False)
            repl[first_i] = [a, b]
        else:
            a, b = _name_tokens(entry, clitic, tokens[first_i], tokens[last_i], split=True)
            repl[first_i] = [a]
            repl[last_i] = [b]
            for i in positions[1:-1]:
                repl[i] = []
        claimed.update(positions)

    for name, positions in occurrences:
        put(name, positions)

    # the same full name elsewhere in the text
    keys = sorted({n for n, _ in occurrences}, key=lambda n: -len(n.split()))
    split = [_strip_clitic(t.surface) for t in tokens]
    for name in keys:
        words = name.split()
        k = len(words)
        for s in range(len(tokens) - k + 1):
            last = s + k - 1
            if split[last][0] != words[-1]:
                continue
            span = range(s, s + k)
            if any(i in claimed for i in span):
                continue
            if all(tokens[i].surface == w for i, w in zip(span, words[:-1])):
                put(name, list(span))

    # standalone first or last words that identify exactly one name
    firsts: dict[str, set[str]] = {}
    lasts: dict[str, set[str]] = {}
    for name in keys:
        words = name.split()
        if len(words) < 2:
            continue
        firsts.setdefault(words[0], set()).add(name)
        lasts.setdefault(words[-1], set()).add(name)
    for i, tok in enumerate(tokens):
        base, clitic = split[i]
        if base not in lasts and base not in firsts:
            continue
        if i in claimed or not base[:1].isupper() or not _is_name_token(tok, lexicon):
            continue
        owners_last = lasts.get(base, set())
        owners_first = firsts.get(base, set())
        if len(owners_last) == 1 and not owners_first:
            entry = mapping[next(iter(owners_last))]
            repl[i] = [Token(0, entry.last_name + clitic, "NNP", tok.trailing_space)]
            claimed.add(i)
        elif len(owners_first) == 1 and not owners_last:
            put(next(iter(owners_first)), [i])

    new_item, omap = _finish(item, repl)
    return new_item, omap, mapping


# ---------------------------------------------------------------- (a) pronouns

def _third_person_singular(word: str) -> str | None:
    """Base form of a third-person singular present verb, if it is in the verb list."""
    verbs = base_verbs()
    w = word.lower()
    if w.endswith("s") and w[:-1] in verbs:
        return word[:-1]
    if w.endswith("es") and w[:-2] in verbs:
        return word[:-2]
    if w.endswith("ies") and w[:-3] + "y" in verbs:
        return word[:-3] + ("Y" if word[-3:].isupper() else "y")
    return None


def _agree(word: str) -> str | None:
    mapped = _AGREEMENT.get(word.lower())
    if mapped is not None:
        return apply_style(mapped, case_style(word))
    return _third_person_singular(word)


def ablate_pronouns(
    item: T,
    lexicon: Lexicon,
    target_paradigm: str = "they",
    agreement_mode: str | None = None,
) -> tuple[T, OffsetMap]:
    """Replace she/he pronoun forms by the same case of ``target_paradigm``.

    With ``agreement_mode="basic"`` a verb directly after a replaced subject is
    made plural: is/was/has/does and third-person ``-s`` forms from the verb list.
    """
    target = lexicon.paradigm(target_paradigm)
    if target.category == "binary":
        raise AblationError(f"target paradigm {target_paradigm!r} is not gender neutral")
    mode = agreement_mode or default_agreement(target_paradigm, lexicon)
    tokens = item.tokens
    repl: dict[int, list[Token]] = {}
    for i, tok in enumerate(tokens):
        readings = lexicon.pronoun_readings(tok.surface)
        if not readings or lexicon.paradigm(readings[0][0]).category != "binary":
            continue
        j = _next_index(tokens, i, lexicon)
        nxt = tokens[j] if j is not None else None
        _, case = lexicon.pronoun_case(
            tok.surface,
            nxt.surface if nxt is not None else None,
            tok.pos_tag,
            nxt.pos_tag if nxt is not None else None,
        )
        form = target.forms.get(case)
        if form is None:
            log.warning("%s: no %s form in paradigm %s; using accusative", item_id(item), case, target_paradigm)
            form = target.forms[ACC]
        repl[i] = [replace(tok, surface=apply_style(form, case_style(tok.surface)))]
        if mode == "basic" and case == NOM and nxt is not None and j not in repl:
            fixed = _agree(nxt.surface)
            if fixed is not None and not lexicon.is_pronoun(nxt.surface) and not is_punctuation(nxt.surface):
                repl[j] = [replace(nxt, surface=fixed)]
    return _finish(item, repl)


# ---------------------------------------------------------------- composition

def apply_substitutions(
    item: T,
    substitutions: Sequence[str],
    lexicon: Lexicon,
    *,
    target_paradigm: str = "they",
    agreement_mode: str | None = None,
    seed: int = 0,
    name_pool: NamePool | None = None,
    name_mapping: NameMapping | None = None,
) -> AblationResult:
    """Apply substitutions in exactly the given order."""
    omap = OffsetMap.identity(len(item.tokens))
    mapping = name_mapping
    cur = item
    for sub in substitutions:
        if sub == ADDR:
            cur, step = ablate_address_terms(cur, lexicon)
        elif sub == SEM:
            cur, step = ablate_gendered_nouns(cur, lexicon)
        elif sub == NAME:
            cur, step, mapping = ablate_names(cur, lexicon, seed, name_pool, mapping)
        elif sub == PRO:
            cur, step = ablate_pronouns(cur, lexicon, target_paradigm, agreement_mode)
        else:
            raise ValueError(f"unknown substitution {sub!r}")
        omap = omap.then(step)
    return AblationResult(cur, omap, mapping)


def apply_config(
    item: T,
    config: AblationConfig,
    lexicon: Lexicon,
    *,
    name_pool: NamePool | None = None,
    name_mapping: NameMapping | None = None,
    check_order_invariance: bool = False,
) -> AblationResult:
    """Apply the active substitutions in canonical order (Addr, Sem, Name, Pro)."""
    order = [s for s in CANONICAL_ORDER if s in config.active]
    kwargs = dict(
        target_paradigm=config.target_paradigm,
        agreement_mode=config.resolved_agreement(lexicon),
        seed=config.seed,
        name_pool=name_pool,
        name_mapping=name_mapping,
    )
    result = apply_substitutions(item, order, lexicon, **kwargs)
    if check_order_invariance and len(order) > 1:
        kwargs["name_mapping"] = result.name_mapping
        other = apply_substitutions(item, order[::-1], lexicon, **kwargs)
        if other.item != result.item:
            raise AblationError(f"{item_id(item)}: substitution order changed the output")
    return AblationResult(result.item, result.offset_map, result.name_mapping, config)


def condition_suite(
    item: T,
    lexicon: Lexicon,
    seed: int = 0,
    *,
    target_paradigm: str = "they",
    agreement_mode: str | None = None,
    name_pool: NamePool | None = None,
    presets: Sequence[str] = PRESET_ORDER,
) -> dict[str, AblationResult]:
    """All requested presets for one item, sharing a single name mapping."""
    _, _, mapping = ablate_names(item, lexicon, seed, name_pool)
    out = {}
    for name in presets:
        config = AblationConfig(preset_name=name, target_paradigm=target_paradigm,
                                agreement_mode=agreement_mode, seed=seed)
        res = apply_config(item, config, lexicon, name_pool=name_pool, name_mapping=mapping)
        out[name] = AblationResult(res.item, res.offset_map, mapping, config)
    return out
