"""
Embedding-based gender prediction and error audits
==================================================

Predict the depicted gender by comparing image embeddings against the
"A male person" / "A female person" query embeddings, score the predictions
against human annotations, and tabulate the annotation error census.
"""

import random

import numpy as np

from cfprobe import confusion_stats, error_census, predict_gender
from cfprobe.audit import FEMALE_QUERY_TEXT, MALE_QUERY_TEXT, AuditAnnotation
from cfprobe.embeddings import mock_embed, normalize

rng = np.random.default_rng(3)
chooser = random.Random(3)
DIM = 64

male_query = mock_embed(MALE_QUERY_TEXT, DIM)
female_query = mock_embed(FEMALE_QUERY_TEXT, DIM)

# Synthetic annotated batch: most images are good; a failed generation shows
# the opposite gender from the caption. Images drift toward the query
# embedding of whatever gender they actually depict.
annotations, predictions = [], {}
races = ("White", "Black", "Indian", "Asian", "Middle Eastern", "Latino")
attrs = {}
for i in range(600):
    asset_id = f"img-{i:04d}"
    category = chooser.choices(
        ["good", "cannot_discern_gender", "fail_female", "out_of_frame", "fail_male"],
        weights=[90.8, 5.2, 2.2, 1.0, 0.8])[0]
    if category == "good":
        intended = chooser.choice(["male", "female"])
        shown = intended
    elif category == "fail_female":
        intended, shown = "female", "male"
    elif category == "fail_male":
        intended, shown = "male", "female"
    else:
        intended = chooser.choice(["male", "female"])
        shown = None
    annotations.append(AuditAnnotation(asset_id, category, shown))
    attrs[asset_id] = {"race": chooser.choice(races), "gender": intended}
    if shown is not None:
        anchor = male_query if shown == "male" else female_query
        image = normalize(anchor + 0.4 * rng.normal(size=DIM))
        predictions[asset_id] = predict_gender(image, male_query, female_query)

stats = confusion_stats(predictions, annotations)
print("class    precision  recall   f1     support")
for cls, s in stats.per_class.items():
    print(f"{cls:8s} {s.precision:8.3f} {s.recall:8.3f} {s.f1:7.3f} {s.support:6d}")

census = error_census(annotations, attrs)
print("\ncategory                 percent")
for category, percent in census.percentages.items():
    print(f"{category:24s} {percent:6.1f}%")

print("\nfailure rates by race (percent of that race-gender cell):")
for (category, race, gender), (count, percent) in (census.breakdown or {}).items():
    if category.startswith("fail_"):
        print(f"   {category:12s} {race:15s} {gender:7s} {percent:5.1f}% ({count})")
