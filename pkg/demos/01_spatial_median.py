"""
Robust centers for curves
=========================

The pointwise mean of a functional sample is dragged around by a handful of
wild curves.  The spatial median is not.  This script contaminates a
Brownian-motion sample in two ways and compares the two centers.
"""

import numpy as np

from spatialsign import Sample

from spatialsign import (
    contaminate,
    gen_bm,
    norm,
    pointwise_mean,
    spatial_median_asgd,
    spatial_median_weiszfeld,
)

###############################################################################
# A clean sample and a contaminated copy
# --------------------------------------
# One curve in ten is multiplied by the absolute value of a Cauchy draw.

clean = gen_bm(m=100, count=300, seed=1)
dirty, hit = contaminate(clean, epsilon=0.1, seed=2, return_mask=True)
print(f"{hit.sum()} of {dirty.n} curves were rescaled")

###############################################################################
# Scaling by a positive factor is symmetric about zero, so it leaves the true
# center in place.  A one-sided shift of the same curves does not.

shifted = Sample(clean.grid, clean.values + 5.0 * hit[:, None])

###############################################################################
# Distance of each center from the true center (the zero curve)

for label, sample in (("clean", clean), ("scaled", dirty), ("shifted", shifted)):
    mean = pointwise_mean(sample)
    med = spatial_median_weiszfeld(sample)
    print(
        f"{label:>12}:  ||mean|| = {norm(mean):7.3f}   "
        f"||median|| = {norm(med.estimate):6.3f}   ({med.iterations} Weiszfeld steps)"
    )

###############################################################################
# The one-pass stochastic estimator lands close to the same objective value.

med = spatial_median_weiszfeld(dirty)
fast = spatial_median_asgd(dirty, seed=3)
print(f"objective: Weiszfeld {med.objective:.4f}, averaged SGD {fast.objective:.4f}")
print("objective path (first 5):", np.round(med.objectives[:5], 4))
