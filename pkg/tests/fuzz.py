"""Random MAP instances built from cue-bearing fragments."""

import random

from inclusive_coref.map_format import parse_map

from conftest import map_tsv

FIRST = ["Rebekah", "Lyndon", "Dana", "Kim", "Ana", "Marie", "Joseph", "Priya", "Oscar", "Noor", "Tomas"]
MIDDLE = ["B.", "Johnson", "Maria", "J.", "Anne"]
LAST = ["Bobbitt", "Johnson", "Zzyym", "Ruiz", "Curie", "Haydn", "Okafor", "Lindqvist", "Moreau", "Tanaka"]
ADDR = ["Mrs.", "Mr.", "Ms.", "Miss", "Sir", "Dame", "Mr", "Mx.", "Herr", "Señora"]
NOUNS = ["sister", "brother", "mother", "Father", "aunts", "nephew", "wife", "husbands", "queen", "Mother",
         "policeman", "chairwoman", "grandmother", "boyfriend", "girls", "actress", "widow", "son", "daughters"]
WORDS = ["the", "old", "house", "near", "Texas", "in", "1910", "worked", "department", "Library", "of",
         "Congress", "quickly", "and", "with", "a", "letter", "about", "politics", "Stonewall", "but"]
VERBS = ["is", "was", "has", "does", "works", "watches", "tries", "goes", "isn't", "walked", "sang", "uses"]
SUBJ = ["she", "he", "they", "ze", "xey"]
OBJ = ["her", "him", "them", "zir", "xem"]
DET = ["her", "his", "their", "zir", "xyr"]
REFL = ["herself", "himself", "themselves", "zirself", "xemself"]
INDEP = ["hers", "his", "theirs", "zirs", "xyrs"]
PUNCT = [",", ".", ";", "!", "?"]


def _name(rng):
    parts = [rng.choice(FIRST)]
    if rng.random() < 0.3:
        parts.append(rng.choice(MIDDLE))
    parts.append(rng.choice(LAST))
    if rng.random() < 0.15:
        parts = parts[-1:]
    return parts


def random_instance(rng: random.Random, iid: str):
    """One MAP instance; both candidate names appear, possibly repeatedly."""
    while True:
        a, b = _name(rng), _name(rng)
        if a != b and a[-1] != b[-1] and a[0] != b[0]:
            break
    pieces = []  # (text, tag): tag marks the A/B candidate or a pronoun piece

    def name_piece(parts, tag=None):
        if rng.random() < 0.35:
            addr = rng.choice(ADDR)
            if tag and rng.random() < 0.2:
                pieces.append((addr + " " + " ".join(parts), tag))
            else:
                pieces.append((addr, None))
                pieces.append((" ".join(parts), tag))
        else:
            pieces.append((" ".join(parts), tag))
        if rng.random() < 0.2:
            pieces.append(("'s", "clitic"))

    def pronoun_piece():
        kind = rng.randrange(5)
        if kind == 0:
            pieces.append((rng.choice(SUBJ), "pron"))
            pieces.append((rng.choice(VERBS), None))
        elif kind == 1:
            pieces.append((rng.choice(OBJ), "pron"))
            pieces.append((rng.choice(PUNCT + WORDS[:3]), None))
        elif kind == 2:
            pieces.append((rng.choice(DET), "pron"))
            pieces.append((rng.choice(NOUNS + ["book", "team", "Johnson"]), None))
        elif kind == 3:
            pieces.append((rng.choice(REFL), "pron"))
        else:
            pieces.append((rng.choice(INDEP), "pron"))
            pieces.append((".", None))

    name_piece(a, "A")
    for _ in range(rng.randint(3, 12)):
        r = rng.random()
        if r < 0.2:
            pronoun_piece()
        elif r < 0.35:
            pieces.append((rng.choice(NOUNS), None))
        elif r < 0.45:
            name_piece(rng.choice([a, b, a[-1:], b[-1:], a[:1]]))
        elif r < 0.5:
            pieces.append((rng.choice(PUNCT), None))
        elif r < 0.55:
            # a bare term of address ("thank you, Sir.")
            pieces.append((rng.choice(ADDR), None))
            pieces.append((rng.choice(PUNCT), None))
        else:
            pieces.append((rng.choice(WORDS), None))
    name_piece(b, "B")
    for _ in range(rng.randint(1, 6)):
        if rng.random() < 0.4:
            pronoun_piece()
        else:
            pieces.append((rng.choice(WORDS + NOUNS), None))
    if not any(tag == "pron" for _, tag in pieces):
        pronoun_piece()
    pieces.append((".", None))

    # capitalize after sentence-final punctuation
    cap = True
    out = []
    for text, tag in pieces:
        if cap and text[:1].islower():
            text = text[0].upper() + text[1:]
        cap = text in (".", "!", "?")
        out.append((text, tag))
    pron_idx = rng.choice([k for k, (_, t) in enumerate(out) if t == "pron"])

    text, offsets = "", {}
    for k, (piece, tag) in enumerate(out):
        if text and not (piece in PUNCT or tag == "clitic"):
            text += " "
        key = "P" if k == pron_idx else tag if tag in ("A", "B") and tag not in offsets else None
        if key:
            offsets[key] = (piece, len(text))
        text += piece
    coref = rng.choice(["A", "B", "N"])
    (ps, po), (as_, ao), (bs, bo) = offsets["P"], offsets["A"], offsets["B"]
    row = "\t".join([iid, text, ps, str(po), as_, str(ao), str(coref == "A").upper(), bs, str(bo),
                     str(coref == "B").upper(), "http://example.org/" + iid])
    return parse_map(map_tsv(row))[0]


def corpus(n: int, seed: int = 0):
    rng = random.Random(seed)
    return [random_instance(rng, f"fz{seed}-{i:04d}") for i in range(n)]


# ---------------------------------------------------------------- property checks

import itertools  # noqa: E402

from inclusive_coref import ablation as ab  # noqa: E402
from inclusive_coref.ablation import (  # noqa: E402
    CANONICAL_ORDER,
    PRESET_ORDER,
    AblationConfig,
    apply_config,
    apply_substitutions,
    condition_suite,
)

ORDERS = list(itertools.permutations(CANONICAL_ORDER))
AGREEMENT_BAD = {"is", "was", "has", "does", "works", "watches", "tries", "goes", "isn't", "uses"}


def _labels(inst):
    return (inst.instance_id, inst.a_is_coref, inst.b_is_coref, inst.source_url, inst.gold_label)


def check_instance(inst, lexicon, seed=0, all_orders=True):
    """Every ablation property on one instance; returns a list of failure messages."""
    failures = []
    suite = condition_suite(inst, lexicon, seed)
    mapping = suite["Zero"].name_mapping

    # idempotence of each single substitution
    for sub in CANONICAL_ORDER:
        once = apply_substitutions(inst, [sub], lexicon, seed=seed, name_mapping=mapping).item
        twice = apply_substitutions(once, [sub], lexicon, seed=seed, name_mapping=mapping).item
        if once != twice:
            failures.append(f"{inst.instance_id}: {sub} not idempotent: {once.text()!r} vs {twice.text()!r}")

    # order invariance
    orders = ORDERS if all_orders else [CANONICAL_ORDER, CANONICAL_ORDER[::-1]]
    ref = apply_substitutions(inst, CANONICAL_ORDER, lexicon, seed=seed, name_mapping=mapping)
    for order in orders:
        other = apply_substitutions(inst, order, lexicon, seed=seed, name_mapping=mapping)
        if other.item != ref.item or other.offset_map != ref.offset_map:
            failures.append(f"{inst.instance_id}: order {order} gives {other.item.text()!r}, "
                            f"canonical gives {ref.item.text()!r}")
            break

    # span integrity and label preservation for every preset
    for name in PRESET_ORDER:
        res = suite[name]
        out, omap = res.item, res.offset_map
        active = res.config.active
        if _labels(out) != _labels(inst):
            failures.append(f"{inst.instance_id}/{name}: labels changed")
        for attr in ("pronoun_span", "candidate_a_span", "candidate_b_span"):
            s0 = getattr(inst, attr)
            s1 = getattr(out, attr)
            if (s1.start, s1.end) != omap.map_span(s0.start, s0.end):
                failures.append(f"{inst.instance_id}/{name}: {attr} not carried by the offset map")
        pro0 = inst.tokens[inst.pronoun_span.start].surface
        pro1 = out.tokens[out.pronoun_span.start].surface
        binary = lexicon.category_of(pro0) == "binary"
        if ab.PRO in active and binary:
            if lexicon.category_of(pro1) != "singular-they":
                failures.append(f"{inst.instance_id}/{name}: pronoun {pro0!r} became {pro1!r}")
        elif pro1 != pro0:
            failures.append(f"{inst.instance_id}/{name}: pronoun {pro0!r} changed to {pro1!r}")
        for attr, cand in (("candidate_a_span", inst.candidate_a), ("candidate_b_span", inst.candidate_b)):
            sp = getattr(out, attr)
            got = " ".join(t.surface for t in out.tokens[sp.start:sp.end])
            words = cand.split()
            if ab.ADDR in active:
                words = [w for w in words if not lexicon.is_address_term(w)]
            if ab.NAME in active:
                key = " ".join(w for w in cand.split() if not lexicon.is_address_term(w))
                expect = mapping.to_dict().get(key, key)
                if ab.ADDR not in active:
                    lead = [w for w in cand.split() if lexicon.is_address_term(w)]
                    expect = " ".join(lead + [expect])
            else:
                expect = " ".join(words)
            if got != expect:
                failures.append(f"{inst.instance_id}/{name}: candidate {cand!r} became {got!r}, expected {expect!r}")
        # tokens outside every cue class are carried over unchanged
        touched_after = {inst.pronoun_span.start}
        for i, tok in enumerate(inst.tokens):
            if lexicon.is_pronoun(tok.surface):
                touched_after.add(i)
        for i, tok in enumerate(inst.tokens):
            s = tok.surface
            cue = (lexicon.is_pronoun(s) or lexicon.is_address_term(s) or lexicon.lookup_noun(s)
                   or s[:1].isupper() or s in ("'s",) or (i - 1) in touched_after)
            if cue:
                continue
            lo, hi = omap.image(i)
            if hi - lo != 1 or out.tokens[lo].surface != s:
                failures.append(f"{inst.instance_id}/{name}: token {i} {s!r} changed")
                break
        # every cue of an active class is gone
        replaced = {omap.image(i)[0] for i, t in enumerate(inst.tokens) if lexicon.category_of(t.surface) == "binary"}
        for k, tok in enumerate(out.tokens):
            s = tok.surface
            nxt = out.tokens[k + 1].surface if k + 1 < len(out.tokens) else ""
            if ab.PRO in active and lexicon.category_of(s) == "binary":
                failures.append(f"{inst.instance_id}/{name}: binary pronoun {s!r} left")
            if ab.PRO in active and k in replaced and s.lower() == "they" and nxt in AGREEMENT_BAD:
                failures.append(f"{inst.instance_id}/{name}: no agreement in {s!r} {nxt!r}")
            if ab.SEM in active and lexicon.lookup_noun(s):
                failures.append(f"{inst.instance_id}/{name}: gendered noun {s!r} left")
            if ab.ADDR in active and lexicon.is_address_term(s):
                failures.append(f"{inst.instance_id}/{name}: address term {s!r} left")
        if ab.SEM in active:
            for i, tok in enumerate(inst.tokens):
                if lexicon.lookup_noun(tok.surface):
                    lo, _ = omap.image(i)
                    if out.tokens[lo].surface[:1].isupper() != tok.surface[:1].isupper():
                        failures.append(f"{inst.instance_id}/{name}: capitalization of {tok.surface!r} lost")
        if ab.NAME in active:
            for key in mapping.to_dict():
                if f" {key} " in f" {out.text()} ":
                    failures.append(f"{inst.instance_id}/{name}: name {key!r} left")
        if not out.text().strip() or "  " in out.text() or any(f" {p}" in out.text() for p in PUNCT):
            failures.append(f"{inst.instance_id}/{name}: bad spacing in {out.text()!r}")

    # determinism, independent of processing order
    again = condition_suite(inst, lexicon, seed)
    if any(again[k].item != suite[k].item for k in PRESET_ORDER):
        failures.append(f"{inst.instance_id}: condition suite not deterministic")
    cfg = AblationConfig(preset_name="Zero", seed=seed)
    if apply_config(inst, cfg, lexicon).item != apply_config(inst, cfg, lexicon).item:
        failures.append(f"{inst.instance_id}: apply_config not deterministic")
    return failures
