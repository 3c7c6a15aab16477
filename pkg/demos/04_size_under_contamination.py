"""
Level of the tests under contamination
======================================

A small Monte Carlo experiment under the null.  Both samples are Brownian
motions and one curve in ten is blown up by a Cauchy factor.  The sign test
keeps its level; the classical test becomes conservative.

The full-scale study (1000 replications, 5000 bootstrap draws) runs through
``spatialsign experiment --config ...``; this demo uses 200 so the
binomial band is narrow enough to tell the two apart.
"""

from spatialsign.experiment import ExperimentConfig, classify_size, run_experiment
from spatialsign.simgen import SimDesign

REPS = 200

for contaminated in (False, True):
    cfg = ExperimentConfig(
        design=SimDesign(contaminated=contaminated, seed=5),
        M_list=[3, 10],
        replications=REPS,
        N_b=1000,
        modes=["sign", "classical"],
    )
    table = run_experiment(cfg)
    print("contaminated" if contaminated else "clean")
    for row in table.rows:
        freq = row["rejection_freq"]
        print(f"  {row['mode']:>9}  M={row['M']:>2}  rejected {freq:.3f}  "
              f"({classify_size(freq, REPS)})")
