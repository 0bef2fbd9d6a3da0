import random

import numpy as np
import pytest

from cfprobe.audit import (
    UNDETERMINED,
    AuditAnnotation,
    confusion_stats,
    error_census,
    predict_attribute,
    predict_gender,
    read_annotations,
    write_annotations,
)
from cfprobe.embeddings import mock_embed, normalize
from cfprobe.errors import DimensionMismatchError


def test_predict_gender_clear_male():
    male = normalize([1.0, 0.0, 0.0])
    female = normalize([0.0, 1.0, 0.0])
    assert predict_gender(male, male, female) == "male"
    assert predict_gender(female, male, female) == "female"


def test_predict_gender_tie_is_undetermined():
    male = normalize([1.0, 0.0])
    female = normalize([0.0, 1.0])
    image = normalize([1.0, 1.0])
    assert predict_gender(image, male, female) == UNDETERMINED


def test_predict_gender_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        predict_gender([1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])


def test_predict_attribute_generalizes_to_many_labels():
    queries = {label: mock_embed(f"query {label}", 32) for label in ("a", "b", "c", "d")}
    for label, q in queries.items():
        assert predict_attribute(q, queries) == label


def test_planted_fixture_full_agreement():
    # plant each image near its gender query: cosine with own query is higher
    male_q = mock_embed("A male person", 32)
    female_q = mock_embed("A female person", 32)
    rng = np.random.default_rng(0)
    for i in range(50):
        truth = "male" if i % 2 == 0 else "female"
        anchor = male_q if truth == "male" else female_q
        image = normalize(anchor + 0.2 * rng.normal(size=32))
        got = predict_gender(image, male_q, female_q)
        assert got == truth


def test_confusion_all_correct():
    annotations = [
        AuditAnnotation(f"a{i}", "good", "male" if i < 5 else "female") for i in range(10)
    ]
    predictions = {a.asset_id: a.annotated_gender for a in annotations}
    stats = confusion_stats(predictions, annotations)
    for cls in ("male", "female"):
        s = stats.per_class[cls]
        assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)
    assert stats.per_class["male"].support == 5
    assert stats.per_class["female"].support == 5


def test_confusion_hand_computed_fixture():
    # 10 male (9 predicted male, 1 predicted female), 10 female all correct
    annotations = [AuditAnnotation(f"m{i}", "good", "male") for i in range(10)]
    annotations += [AuditAnnotation(f"f{i}", "good", "female") for i in range(10)]
    predictions = {f"m{i}": "male" for i in range(9)}
    predictions["m9"] = "female"
    predictions.update({f"f{i}": "female" for i in range(10)})
    stats = confusion_stats(predictions, annotations)
    male = stats.per_class["male"]
    female = stats.per_class["female"]
    assert male.precision == pytest.approx(1.0, abs=1e-12)
    assert male.recall == pytest.approx(0.9, abs=1e-12)
    assert female.precision == pytest.approx(10.0 / 11.0, abs=1e-12)
    assert female.recall == pytest.approx(1.0, abs=1e-12)
    assert male.support == 10 and female.support == 10


def test_confusion_undetermined_counts_against_recall_only():
    annotations = [AuditAnnotation(f"m{i}", "good", "male") for i in range(4)]
    predictions = {"m0": "male", "m1": "male", "m2": UNDETERMINED, "m3": UNDETERMINED}
    stats = confusion_stats(predictions, annotations)
    male = stats.per_class["male"]
    assert male.precision == 1.0      # nothing wrongly credited to male
    assert male.recall == 0.5         # undetermined misses count as errors


def test_confusion_label_swap_symmetry():
    rng = random.Random(1)
    annotations, predictions = [], {}
    for i in range(40):
        truth = rng.choice(["male", "female"])
        annotations.append(AuditAnnotation(f"x{i}", "good", truth))
        predictions[f"x{i}"] = rng.choice(["male", "female"])
    stats = confusion_stats(predictions, annotations)

    flip = {"male": "female", "female": "male"}
    flipped_annotations = [
        AuditAnnotation(a.asset_id, "good", flip[a.annotated_gender]) for a in annotations
    ]
    flipped_predictions = {k: flip[v] for k, v in predictions.items()}
    flipped = confusion_stats(flipped_predictions, flipped_annotations)
    assert stats.per_class["male"] == flipped.per_class["female"]
    assert stats.per_class["female"] == flipped.per_class["male"]


def test_confusion_no_overlap():
    annotations = [AuditAnnotation("a", "good", "male")]
    with pytest.raises(ValueError):
        confusion_stats({"b": "male"}, annotations)


def test_census_percentages():
    annotations = [AuditAnnotation(f"a{i}", "good", "male") for i in range(9)]
    annotations.append(AuditAnnotation("a9", "fail_female", "male"))
    census = error_census(annotations)
    assert census.percentages["good"] == pytest.approx(90.0, abs=1e-9)
    assert census.percentages["fail_female"] == pytest.approx(10.0, abs=1e-9)


def test_census_sums_to_hundred():
    rng = random.Random(2)
    categories = ["good", "cannot_discern_gender", "fail_female", "fail_male", "out_of_frame"]
    for _ in range(30):
        annotations = []
        for i in range(rng.randint(1, 200)):
            cat = rng.choice(categories)
            gender = rng.choice(["male", "female"]) if cat in ("good", "fail_female", "fail_male") else None
            annotations.append(AuditAnnotation(f"a{i}", cat, gender))
        census = error_census(annotations)
        assert sum(census.percentages.values()) == pytest.approx(100.0, abs=1e-9)


def test_census_breakdown_matches_recount_oracle():
    rng = random.Random(3)
    races = ["White", "Black", "Indian", "Asian", "Middle Eastern", "Latino"]
    annotations, attrs = [], {}
    for i in range(300):
        cat = rng.choice(["good", "fail_female", "fail_male"])
        annotations.append(AuditAnnotation(f"a{i}", cat, "male"))
        attrs[f"a{i}"] = {"race": rng.choice(races), "gender": rng.choice(["male", "female"])}
    census = error_census(annotations, attrs)
    assert census.breakdown
    for (cat, race, gender), (count, percent) in census.breakdown.items():
        expected_count = sum(
            1 for a in annotations
            if a.category == cat and attrs[a.asset_id] == {"race": race, "gender": gender})
        cell_total = sum(1 for aid in attrs if attrs[aid] == {"race": race, "gender": gender})
        assert count == expected_count
        assert percent == pytest.approx(100.0 * expected_count / cell_total, abs=1e-9)


def test_census_order_invariance():
    rng = random.Random(4)
    annotations = []
    for i in range(20):
        category = rng.choice(["good", "out_of_frame"])
        gender = "male" if category == "good" else None
        annotations.append(AuditAnnotation(f"a{i}", category, gender))
    shuffled = annotations[:]
    rng.shuffle(shuffled)
    assert error_census(annotations).percentages == error_census(shuffled).percentages


def test_annotation_invariants():
    with pytest.raises(ValueError):
        AuditAnnotation("a", "good")  # discernible without a gender
    with pytest.raises(ValueError):
        AuditAnnotation("a", "cannot_discern_gender", "male")
    with pytest.raises(ValueError):
        AuditAnnotation("a", "nonsense", "male")


def test_annotation_file_round_trip(tmp_path):
    annotations = [
        AuditAnnotation("a1", "good", "female"),
        AuditAnnotation("a2", "out_of_frame", None),
        AuditAnnotation("a3", "fail_male", "female"),
    ]
    path = tmp_path / "annotations.csv"
    write_annotations(annotations, path)
    assert read_annotations(path) == annotations
