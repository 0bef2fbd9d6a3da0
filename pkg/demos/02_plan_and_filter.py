"""
Over-generation plans and counterfactual filtering
==================================================

Plan 100 seeded generation attempts per counterfactual set, then score a
synthetic batch with the mock embedder and watch the two-stage filter work:
a per-member caption-image cosine floor of 0.2, then keep-up-to-10 by mean
pairwise directional similarity.
"""

import numpy as np

from cfprobe import enumerate_captions, mock_embed, plan_jobs, select_and_filter
from cfprobe.config import AttributeValue, Prefix, Subject
from cfprobe.embeddings import normalize
from cfprobe.filtering import score_sample

rng = np.random.default_rng(0)
DIM = 64

sets = enumerate_captions(
    [Prefix("A photo of a")],
    [Subject("occupation", "welder")],
    [AttributeValue("race", r) for r in ("White", "Black")],
    [AttributeValue("gender", g) for g in ("male", "female")],
)
cf_set = sets[0]
print("set members:", [m.text for m in cf_set.members])

jobs = plan_jobs(sets, samples_per_set=100, master_seed=7)
print(f"\nplanned {len(jobs)} jobs; p ranges "
      f"{min(j.p for j in jobs):.3f} .. {max(j.p for j in jobs):.3f}")

# Synthetic generation: each sample's images sit near their captions, with
# noise shrinking as the attention-share parameter p grows.
caption_embs = [mock_embed(m.text, DIM) for m in cf_set.members]
samples = []
for job in jobs:
    image_embs = []
    for member_index, cap in enumerate(caption_embs):
        noise = mock_embed(f"scene {job.seed} {member_index}", DIM)
        image_embs.append(normalize(cap + (1.2 - job.p) * noise))
    samples.append(score_sample(cf_set.id, job.sample_index, caption_embs, image_embs))

decisions = select_and_filter(samples, min_cosine=0.2, keep=10)
survivors = [d for d in decisions if d.retained]
print(f"retained {len(survivors)} of {len(decisions)} samples")

by_p = sorted(zip((j.p for j in jobs), (d.retained for d in decisions)))
high_p = [kept for p, kept in by_p if p > 0.5]
low_p = [kept for p, kept in by_p if p <= 0.5]
print(f"retention rate: p > 0.5 -> {np.mean(high_p):.2f}, p <= 0.5 -> {np.mean(low_p):.2f}")
print("(higher attention share -> tighter sets -> higher directional score)")
