"""
The threshold controller's response curve
=========================================

The tuner maps a Hough line count to a threshold step. Few lines push the
threshold down (gently, at most 1.5 per frame), a count in the "Good" band
leaves it alone, and too many lines push it up hard (about +4 per frame).
"""

import numpy as np

from lanetune import FuzzySystem, TunerState, fis_delta, tune

system = FuzzySystem()

# %%
# Membership degrees for a few counts.
for x in (0, 4, 8, 15, 22, 35, 60):
    degrees = {k: round(v, 2) for k, v in system.fuzzify(x).items() if v > 0}
    print(f"count {x:>3}: {degrees}")

# %%
# The crisp step as a crude text plot.
for x in np.arange(0, 61, 3):
    d = fis_delta(x)
    bar = "#" * int(round(abs(d) * 8))
    print(f"{x:>4} {d:+.3f} {'-' if d < 0 else '+'}{bar}")

# %%
# Feeding a constant count shows the clamp at the lower end: a dead frame
# (count 0) never drives the threshold below 1.
state = TunerState(3.0)
for _ in range(4):
    state = tune(state, 0)
    print("after count 0:", round(state.th_high, 3))
