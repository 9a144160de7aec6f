import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inclusive_coref import ablation as ab
from inclusive_coref.ablation import (
    BACKWARD_PRESETS,
    FORWARD_PRESETS,
    PRESET_LABELS,
    PRESETS,
    AblationConfig,
    NameMapping,
    OffsetMap,
    apply_config,
    apply_substitutions,
    assign_names,
    condition_suite,
    derive_seed,
)
from inclusive_coref.errors import AblationError, NamePoolExhausted
from inclusive_coref.lexicon import NamePool
from inclusive_coref.map_format import parse_map

from conftest import FIXTURES, make_doc, make_map
from fuzz import check_instance, corpus

EXAMPLE_POOL = NamePool.pinned(["M. Booth", "T. Schneider"])


def worked_example():
    return parse_map((FIXTURES / "worked_example.tsv").read_text(encoding="utf-8"))[0]


def zero(inst, lexicon, **kw):
    return apply_config(inst, AblationConfig(preset_name="Zero"), lexicon, **kw)


# ---------------------------------------------------------------- presets

def test_ten_presets_in_two_grids():
    assert len(PRESETS) == 10
    assert FORWARD_PRESETS[0] == "Zero" and BACKWARD_PRESETS[0] == "Orig"
    assert all(len(PRESETS[p]) >= 2 for p in FORWARD_PRESETS)
    assert all(len(PRESETS[p]) <= 1 for p in BACKWARD_PRESETS)
    assert PRESET_LABELS["NotNameNotSemNotAddr"] == "¬Name¬Sem¬Addr"


def test_config_validation():
    with pytest.raises(ValueError, match="unknown preset"):
        AblationConfig(preset_name="NotEverything")
    with pytest.raises(ValueError, match="unknown substitutions"):
        AblationConfig(active=frozenset({"Verb"}))
    with pytest.raises(ValueError, match="fixes active"):
        AblationConfig(active=frozenset({"Pro"}), preset_name="NotName")
    assert AblationConfig(active={"Pro", "Name"}).active == frozenset({"Pro", "Name"})


def test_agreement_default_depends_on_paradigm(lexicon):
    assert AblationConfig().resolved_agreement(lexicon) == "basic"
    assert AblationConfig(target_paradigm="ze").resolved_agreement(lexicon) == "off"
    assert AblationConfig(target_paradigm="ze", agreement_mode="basic").resolved_agreement(lexicon) == "basic"


# ---------------------------------------------------------------- worked example

def test_worked_example_exact(lexicon):
    res = zero(worked_example(), lexicon, name_pool=EXAMPLE_POOL)
    expected = (FIXTURES / "worked_example_expected.txt").read_text(encoding="utf-8").strip()
    assert res.item.text() == expected
    assert res.item.candidate_a == "M. Booth" and res.item.candidate_b == "T. Schneider"
    assert res.item.pronoun == "they"
    assert res.item.gold_label == "A"


def test_worked_example_backward_grid(lexicon):
    suite = condition_suite(worked_example(), lexicon, name_pool=EXAMPLE_POOL)
    assert suite["Orig"].item == worked_example()
    assert suite["NotAddr"].item.text().startswith("Rebekah Johnson Bobbitt was the younger sister")
    assert suite["NotSem"].item.text().startswith("Mrs. Rebekah Johnson Bobbitt was the younger sibling")
    assert "before her sibling" in suite["NotSem"].item.text()
    assert suite["NotName"].item.text().startswith("Mrs. M. Booth was the younger sister of T. Schneider,")
    assert ", they worked" in suite["NotPro"].item.text()
    assert "before their brother" in suite["NotPro"].item.text()


def test_name_cue_differs_between_adjacent_forward_presets(lexicon):
    suite = condition_suite(worked_example(), lexicon, name_pool=EXAMPLE_POOL)
    a = suite["NotSemNotAddr"].item
    b = suite["NotNameNotSemNotAddr"].item
    assert a.candidate_a == "Rebekah Johnson Bobbitt" and b.candidate_a == "M. Booth"
    assert a.pronoun == b.pronoun == "she"


def test_zero_is_pro_after_other_three(lexicon):
    inst = worked_example()
    three = apply_config(inst, AblationConfig(preset_name="NotNameNotSemNotAddr"), lexicon, name_pool=EXAMPLE_POOL)
    pro = apply_config(three.item, AblationConfig(preset_name="NotPro"), lexicon, name_pool=EXAMPLE_POOL)
    assert pro.item == zero(inst, lexicon, name_pool=EXAMPLE_POOL).item


# ---------------------------------------------------------------- single substitutions

@pytest.mark.parametrize("marked, paradigm, expected", [
    ("[A Kim Lee] met [B Ana Ruiz]. [P She] is here.", "they", "Kim Lee met Ana Ruiz. They are here."),
    ("[A Kim Lee] met [B Ana Ruiz]. [P She] works here and she watches TV.", "they",
     "Kim Lee met Ana Ruiz. They work here and they watch TV."),
    ("[A Kim Lee] met [B Ana Ruiz]. [P She] is here.", "ze", "Kim Lee met Ana Ruiz. Ze is here."),
    ("[A Kim Lee] met [B Ana Ruiz] and [P his] friend saw himself and him. It was hers.", "they",
     "Kim Lee met Ana Ruiz and their friend saw themselves and them. It was theirs."),
    ("[A Kim Lee] met [B Ana Ruiz] and [P her] friend saw her.", "xey",
     "Kim Lee met Ana Ruiz and xyr friend saw xem."),
])
def test_pronoun_substitution(lexicon, marked, paradigm, expected):
    out, _ = ab.ablate_pronouns(make_map(marked), lexicon, paradigm)
    assert out.text() == expected


def test_agreement_off_keeps_verbs(lexicon):
    out, _ = ab.ablate_pronouns(make_map("[A Kim Lee] met [B Ana Ruiz]. [P She] is here."), lexicon, "they", "off")
    assert out.text().endswith("They is here.")


def test_pronoun_target_must_be_neutral(lexicon):
    with pytest.raises(AblationError, match="not gender neutral"):
        ab.ablate_pronouns(make_map("[A Kim Lee] met [B Ana Ruiz] and [P she] left."), lexicon, "he")


def test_neutral_pronouns_are_untouched(lexicon):
    inst = make_map("[A Kim Lee] met [B Ana Ruiz] and [P zir] friend said they left.")
    out, omap = ab.ablate_pronouns(inst, lexicon)
    assert out == inst and omap.is_identity


def test_gendered_nouns_keep_case_plural_and_clitic(lexicon):
    inst = make_map("Mother of [A Kim Lee] met [B Ana Ruiz] and [P her] brothers' dog.")
    out, _ = ab.ablate_gendered_nouns(inst, lexicon)
    assert out.text() == "Parent of Kim Lee met Ana Ruiz and her siblings' dog."


def test_address_deletion_shifts_spans(lexicon):
    inst = make_map("Yesterday [A Mrs. Kim Lee] met [B Mr. Ruiz] and [P she] left.")
    out, omap = ab.ablate_address_terms(inst, lexicon)
    assert out.text() == "Yesterday Kim Lee met Ruiz and she left."
    assert (out.candidate_a, out.candidate_b, out.pronoun) == ("Kim Lee", "Ruiz", "she")
    assert omap.image(1) == (1, 1)  # "Mrs." has an empty image
    assert omap.target_len == omap.source_len - 2


def test_names_consistent_across_mentions(lexicon):
    inst = make_map("Yesterday [A Mrs. Kim Lee] met [B Mr. Ruiz] and [P she] left. Lee's cat saw Kim Lee.")
    out, _, mapping = ab.ablate_names(inst, lexicon, seed=3)
    new = mapping["Kim Lee"].render()
    last = mapping["Kim Lee"].last_name
    assert out.candidate_a == "Mrs. " + new
    assert out.text().endswith(f"{last}'s cat saw {new}.")
    assert "Kim" not in out.text() and "Ruiz" not in out.text()
    assert mapping["Kim Lee"] != mapping["Ruiz"]


def test_names_do_not_reuse_original_surnames(lexicon):
    pool = NamePool.pinned(["D. Lee", "M. Booth", "T. Schneider"])
    out, _, mapping = ab.ablate_names(make_map("[A Kim Lee] met [B Ana Ruiz] and [P she] left."), lexicon,
                                      name_pool=pool)
    assert mapping.to_dict() == {"Kim Lee": "M. Booth", "Ana Ruiz": "T. Schneider"}


def test_name_pool_exhausted(lexicon):
    with pytest.raises(NamePoolExhausted, match="2 distinct names"):
        ab.ablate_names(make_map("[A Kim Lee] met [B Ana Ruiz] and [P she] left."), lexicon,
                        name_pool=NamePool.pinned(["M. Booth"]))


def test_assign_names_is_injective_and_extends():
    pool = NamePool.pinned(["M. Booth", "T. Schneider", "R. Okafor"])
    first = assign_names(["Kim Lee"], pool, random.Random(0))
    both = assign_names(["Kim Lee", "Ana Ruiz"], pool, random.Random(0), first)
    assert both["Kim Lee"] == first["Kim Lee"]
    assert len(set(both.mapping.values())) == 2
    with pytest.raises(ValueError):
        NameMapping({"a": pool.entries[0], "b": pool.entries[0]})


def test_name_mapping_round_trip():
    pool = NamePool.pinned(["M. Booth", "T. Schneider"])
    m = assign_names(["Kim Lee", "Ana Ruiz"], pool, random.Random(0))
    assert NameMapping.from_dict(m.to_dict()).to_dict() == m.to_dict()


def test_seeded_names_are_deterministic(lexicon):
    inst = make_map("[A Kim Lee] met [B Ana Ruiz] and [P she] left.")
    m1 = ab.ablate_names(inst, lexicon, seed=11)[2].to_dict()
    m2 = ab.ablate_names(inst, lexicon, seed=11)[2].to_dict()
    seeds = {tuple(ab.ablate_names(inst, lexicon, seed=s)[2].to_dict().values()) for s in range(8)}
    assert m1 == m2
    assert len(seeds) > 1
    assert derive_seed(11, "a") == derive_seed(11, "a") != derive_seed(11, "b")


# ---------------------------------------------------------------- documents

def test_document_zero(lexicon):
    doc = make_doc("[0 < Mrs. Dana Park > ] said [0 she ] met [1 her mother ] . || [2 < Mr. Lee > ] nodded")
    pool = NamePool.pinned(["M. Booth", "T. Schneider"])
    out = zero(doc, lexicon, name_pool=pool).item
    assert out.text() == "M. Booth said they met their parent . T. Schneider nodded"
    spans = [(m.start, m.end, m.entity_id) for m in out.mentions]
    assert spans == [(0, 2, "0"), (3, 4, "0"), (5, 7, "1"), (8, 10, "2")]
    assert [(n.start, n.end) for n in out.named_entities] == [(0, 2), (8, 10)]
    assert out.sentence_starts == (0, 8)


def test_deleting_a_whole_mention_is_an_error(lexicon):
    doc = make_doc("[0 Mrs. ] Park said [0 she ] left")
    with pytest.raises(AblationError, match="deleted entirely"):
        apply_config(doc, AblationConfig(preset_name="NotAddr"), lexicon)


def test_orig_is_identity(lexicon):
    doc = make_doc("[0 < Mrs. Dana Park > ] said [0 she ] left")
    res = apply_config(doc, AblationConfig(preset_name="Orig"), lexicon)
    assert res.item == doc and res.offset_map.is_identity


def test_order_check_flag(lexicon):
    res = apply_config(worked_example(), AblationConfig(preset_name="Zero"), lexicon, name_pool=EXAMPLE_POOL,
                       check_order_invariance=True)
    assert res.item.pronoun == "they"


# ---------------------------------------------------------------- offset maps

def test_offset_map_composition():
    a = OffsetMap((0, 1, 1, 3))  # drop token 1, split token 2
    b = OffsetMap((0, 2, 3, 4))
    assert a.then(b).boundaries == (0, 2, 2, 4)
    assert a.map_span(0, 3) == (0, 3)
    assert OffsetMap.identity(3).is_identity


@st.composite
def offset_maps(draw, n=None):
    n = draw(st.integers(0, 8)) if n is None else n
    widths = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    b = [0]
    for w in widths:
        b.append(b[-1] + w)
    return OffsetMap(tuple(b))


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_offset_map_then_matches_pointwise(data):
    a = data.draw(offset_maps())
    b = data.draw(offset_maps(a.target_len))
    c = a.then(b)
    assert c.source_len == a.source_len and c.target_len == b.target_len
    for i in range(a.source_len + 1):
        assert c[i] == b[a[i]]


# ---------------------------------------------------------------- fuzzed properties

def test_fuzzed_instances_small_sample(lexicon):
    failures = []
    for inst in corpus(60, seed=7):
        failures += check_instance(inst, lexicon, seed=5)
    assert failures == []


def test_apply_substitutions_rejects_unknown(lexicon):
    with pytest.raises(ValueError):
        apply_substitutions(worked_example(), ["Verb"], lexicon)
