"""
Counterfactual caption sets and the dataset census
===================================================

Enumerate captions of the form  <prefix> <attr1> <attr2> <subject>  for every
attribute pair in the shipped plan, and tally how many sets and planned
images that implies.
"""

from cfprobe import default_config, enumerate_captions, neutral_prompt
from cfprobe.captions import dataset_census

config = default_config()

# The shipped inventories: 4 prefixes, 261 occupations, 63 traits,
# 6 races x 4 religions x 2 genders x 14 physical characteristics.
print("prefixes:   ", [p.text for p in config.prefixes])
print("occupations:", len(config.subjects_of("occupation")))
print("traits:     ", len(config.subjects_of("personality_trait")))
for category in ("race", "religion", "gender", "physical"):
    print(f"{category:9s} ->", [a.label for a in config.attribute_values(category)])

# One counterfactual set: one (prefix, subject), full race x gender product.
sets = enumerate_captions(
    config.prefixes[:1],
    config.subjects_of("occupation")[:1],
    config.attribute_values("race"),
    config.attribute_values("gender"),
)
print("\none counterfactual set:", sets[0].subject.label)
for member in sets[0].members:
    print("   ", member.text)
print("neutral prompt:", neutral_prompt(sets[0].prefix, sets[0].subject))

# The census over the full plan (100 planned generation attempts per set).
census = dataset_census(config)
print("\nsubject_kind        pair                     sets  per-set       images")
for row in census.rows:
    pair = f"{row.cat_a} x {row.cat_b}"
    print(f"{row.subject_kind:18s} {pair:24s} {row.sets:5d} {row.images_per_set:8d} {row.total_images:12,d}")
print(f"\ntotal sets     {census.total_sets:12,d}")
print(f"total captions {census.total_captions:12,d}")
print(f"total images   {census.total_images:12,d}")
