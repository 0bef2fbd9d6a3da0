import pytest

from cfprobe.captions import (
    dataset_census,
    enumerate_captions,
    enumerate_plan,
    neutral_prompt,
)
from cfprobe.config import (
    AttributeValue,
    Prefix,
    ProbeConfig,
    Subject,
    default_config,
)
from cfprobe.errors import ConfigurationError


def _attrs(category, labels):
    return [AttributeValue(category, l) for l in labels]


GENDERS = _attrs("gender", ["male", "female"])
RACES3 = _attrs("race", ["White", "Black", "Asian"])


def test_cardinality_product():
    # 2 prefixes x 1 subject x 2 genders x 3 races -> 2 sets of 6
    sets = enumerate_captions(
        [Prefix("A photo of a"), Prefix("A picture of a")],
        [Subject("occupation", "doctor")],
        GENDERS,
        RACES3,
    )
    assert len(sets) == 2
    assert all(len(s.members) == 6 for s in sets)
    assert sum(len(s.members) for s in sets) == 12


def test_published_template_example():
    sets = enumerate_captions(
        [Prefix("A photo of a")],
        [Subject("occupation", "electrician")],
        _attrs("race", ["White"]),
        _attrs("gender", ["male"]),
    )
    assert sets[0].members[0].text == "A photo of a White male electrician"


def test_enumeration_order():
    sets = enumerate_captions(
        [Prefix("A"), Prefix("B goes")],
        [Subject("occupation", "doctor"), Subject("occupation", "pilot")],
        GENDERS,
        RACES3,
    )
    assert [(s.prefix.text, s.subject.label) for s in sets] == [
        ("A", "doctor"), ("A", "pilot"), ("B goes", "doctor"), ("B goes", "pilot")]
    first = sets[0]
    assert [(m.attr1.label, m.attr2.label) for m in first.members] == [
        ("male", "White"), ("male", "Black"), ("male", "Asian"),
        ("female", "White"), ("female", "Black"), ("female", "Asian")]


def test_members_cover_cross_product_once():
    sets = enumerate_captions([Prefix("A")], [Subject("occupation", "chef")], GENDERS, RACES3)
    combos = {(m.attr1.label, m.attr2.label) for m in sets[0].members}
    assert len(combos) == len(sets[0].members) == 6


def test_ids_stable_across_runs():
    twice = [
        enumerate_captions([Prefix("A")], [Subject("occupation", "chef")], GENDERS, RACES3)
        for _ in range(2)
    ]
    assert [s.id for s in twice[0]] == [s.id for s in twice[1]]
    assert [m.id for m in twice[0][0].members] == [m.id for m in twice[1][0].members]


def test_captions_partition_into_sets():
    sets = enumerate_captions(
        [Prefix("A"), Prefix("A photo of a")],
        [Subject("occupation", "chef"), Subject("occupation", "pilot")],
        GENDERS, RACES3)
    seen = set()
    for s in sets:
        for m in s.members:
            assert m.id not in seen
            seen.add(m.id)
    assert len(seen) == 2 * 2 * 2 * 3


def test_empty_inputs_rejected():
    with pytest.raises(ConfigurationError):
        enumerate_captions([], [Subject("occupation", "chef")], GENDERS, RACES3)
    with pytest.raises(ConfigurationError):
        enumerate_captions([Prefix("A")], [], GENDERS, RACES3)
    with pytest.raises(ConfigurationError):
        enumerate_captions([Prefix("A")], [Subject("occupation", "chef")], [], RACES3)


def test_same_category_rejected():
    with pytest.raises(ConfigurationError):
        enumerate_captions(
            [Prefix("A")], [Subject("occupation", "chef")],
            _attrs("race", ["White"]), _attrs("race", ["Black"]))


def test_duplicate_labels_rejected():
    with pytest.raises(ConfigurationError):
        enumerate_captions(
            [Prefix("A")], [Subject("occupation", "chef")],
            _attrs("gender", ["male", "male"]), RACES3)
    with pytest.raises(ConfigurationError):
        enumerate_captions(
            [Prefix("A"), Prefix("A")], [Subject("occupation", "chef")], GENDERS, RACES3)


def test_neutral_prompt_examples():
    assert neutral_prompt(Prefix("A"), Subject("occupation", "construction worker")) == \
        "A construction worker"
    assert neutral_prompt(Prefix("A photo of a"), Subject("occupation", "doctor")) == \
        "A photo of a doctor"


def test_neutral_prompts_carry_no_attribute_tokens():
    config = default_config()
    attribute_labels = config.attribute_labels()
    for prefix in config.prefixes:
        for subject in config.subjects:
            tokens = set(neutral_prompt(prefix, subject).split(" "))
            assert not tokens & attribute_labels


def test_census_matches_published_table():
    census = dataset_census(default_config())
    rows = {(r.subject_kind, r.cat_a, r.cat_b): r for r in census.rows}
    expected = {
        ("occupation", "race", "gender"): (1044, 12, 1_252_800),
        ("occupation", "religion", "gender"): (1044, 8, 835_200),
        ("occupation", "race", "religion"): (1044, 24, 2_505_600),
        ("occupation", "physical", "gender"): (1044, 28, 2_923_200),
        ("occupation", "physical", "race"): (1044, 84, 8_769_600),
        ("occupation", "physical", "religion"): (1044, 56, 5_846_400),
        ("personality_trait", "race", "gender"): (252, 12, 302_400),
        ("personality_trait", "religion", "gender"): (252, 8, 201_600),
        ("personality_trait", "race", "religion"): (252, 24, 604_800),
    }
    assert set(rows) == set(expected)
    for key, (sets, per_set, total) in expected.items():
        row = rows[key]
        assert (row.sets, row.images_per_set, row.total_images) == (sets, per_set, total)
    # Grand totals follow from the rows above.
    assert census.total_sets == 7_020
    assert census.total_captions == 232_416
    assert census.total_images == 23_241_600


def test_census_tracks_samples_per_set():
    census = dataset_census(default_config(), samples_per_set=1)
    assert census.total_images == census.total_captions


def test_plan_enumeration_agrees_with_census_on_small_config():
    config = ProbeConfig(
        prefixes=(Prefix("A"), Prefix("A photo of a")),
        subjects=(Subject("occupation", "chef"), Subject("personality_trait", "warm")),
        attributes=tuple(GENDERS) + tuple(RACES3) + tuple(_attrs("religion", ["Hindu"])),
        plan=(
            ("occupation", ("race", "gender")),
            ("personality_trait", ("religion", "gender")),
        ),
    )
    census = dataset_census(config)
    sets = list(enumerate_plan(config))
    assert len(sets) == census.total_sets
    assert sum(len(s.members) for s in sets) == census.total_captions
