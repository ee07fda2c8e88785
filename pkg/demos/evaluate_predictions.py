"""
Scoring lane predictions
========================

The evaluator reads line-delimited lane records (one JSON object per frame
with ``lanes``, ``h_samples`` and ``raw_file``) and reports accuracy,
precision and recall. Here the ground truth comes from the synthetic
generator and the "predictions" are deliberately perturbed copies.
"""

import numpy as np

from lanetune import LaneRecord, evaluate_clip, generate_clip
from lanetune.synth import SceneSpec

_, truth = generate_clip(SceneSpec(lane_count=3), 5)
print("self-evaluation:", evaluate_clip(truth, truth))

rng = np.random.default_rng(0)


def jitter(rec, sigma, drop_last=False):
    lanes = rec.lanes[:-1] if drop_last else rec.lanes
    noisy = [[x if x == -2 else int(x + rng.normal(0, sigma)) for x in lane] for lane in lanes]
    return LaneRecord(noisy, rec.h_samples, rec.raw_file)


# %%
# Small jitter stays under the 20-pixel point threshold; large jitter does
# not, and dropping a lane costs recall but not precision.
for sigma in (3, 12, 30):
    print(f"jitter {sigma:>2}px:", evaluate_clip([jitter(r, sigma) for r in truth], truth))
print("one lane missing:", evaluate_clip([jitter(r, 3, drop_last=True) for r in truth], truth))
