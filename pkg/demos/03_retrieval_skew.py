"""
Neutral-prompt retrieval and MaxSkew@K
======================================

Retrieve with attribute-neutral queries over per-subject image pools and
measure how far the retrieved attribute mix strays from uniform. One subject
gets a deliberately skewed pool; it should surface as the boxplot maximum.
"""

import numpy as np

from cfprobe import DesiredDistribution, aggregate_across_subjects, mock_embed, skew_report, top_k
from cfprobe.embeddings import EmbeddingStore
from cfprobe.plotting import save_maxskew_boxplot

RACES = ("White", "Black", "Indian", "Asian", "Middle Eastern", "Latino")
GENDERS = ("male", "female")
PAIRS = [(r, g) for r in RACES for g in GENDERS]
K = len(PAIRS)  # 12
DIM = 48

desired = DesiredDistribution.uniform(PAIRS)
subjects = ["doctor", "pilot", "teacher", "farmer", "chef"]
planted = "doctor"

reports = []
for subject in subjects:
    # pool of exactly K images; the planted subject over-represents one pair
    if subject == planted:
        pool_pairs = [("White", "male")] * 3 + PAIRS[1:10]
    else:
        pool_pairs = list(PAIRS)
    ids = [f"{subject}-{i:02d}" for i in range(len(pool_pairs))]
    store = EmbeddingStore(ids, np.array([mock_embed(i, DIM) for i in ids]))
    pair_of_asset = dict(zip(ids, pool_pairs))

    query = mock_embed(f"A photo of a {subject}", DIM)
    result = top_k(query, store, K, subject=subject)
    reports.append(skew_report(result, desired, pair_of_asset, category_pair=("race", "gender")))

print("subject      MaxSkew@12")
for report in reports:
    print(f"{report.subject:12s} {report.max_skew:8.4f}")

summary = aggregate_across_subjects(reports, group="occupation|race|gender")
print(f"\nmost skewed subject: {summary.argmax_subject} ({summary.maximum:.4f} = ln 3)")
print(f"least skewed subject: {summary.argmin_subject} ({summary.minimum:.4f})")

planted_report = next(r for r in reports if r.subject == planted)
print(f"\n{planted} joint proportions (nonzero):")
for pair, prop in sorted(planted_report.proportions.items()):
    if prop > 0:
        print(f"   {pair[0]:15s} {pair[1]:7s} {prop:.3f}")

# Marginal gender skew within each race's pool: restrict the candidates to
# one race, retrieve with the same neutral query, measure gender only.
from cfprobe import conditional_skew

subject = planted
pool_pairs = [("White", "male")] * 3 + PAIRS[1:10]
ids = [f"{subject}-{i:02d}" for i in range(len(pool_pairs))]
store = EmbeddingStore(ids, np.array([mock_embed(i, DIM) for i in ids]))
attrs = {aid: {"race": r, "gender": g} for aid, (r, g) in zip(ids, pool_pairs)}
gender_desired = DesiredDistribution.uniform([("male",), ("female",)])
query = mock_embed(f"A photo of a {subject}", DIM)

print(f"\nmarginal gender MaxSkew within each race pool ({subject}):")
for race in RACES:
    try:
        report = conditional_skew(
            query, store, ("race", race), "gender", gender_desired, attrs)
        print(f"   {race:15s} {report.max_skew:8.4f}")
    except ValueError:
        print(f"   {race:15s}    (no images)")

save_maxskew_boxplot(reports, "maxskew_demo.svg", title="occupations: race x gender")
print("\nwrote maxskew_demo.svg")
