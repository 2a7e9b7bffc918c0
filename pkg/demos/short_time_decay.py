"""
The index shows up in the propagator: 1 - ||exp(-B t)|| behaves like
c t^(2m+1) for small t. This script fits the exponent for indices 0, 1, 2
and optionally writes the samples for plotting.
"""

import argparse
import csv

import numpy as np

from hypoindex import epsilon_scaling_study, hc_index, short_time_exponent_fit

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--csv", help="write t and deficits for every generator")
args = parser.parse_args()

chain = np.array([[0, 1, 0, 0], [-1, 0, 1, 0], [0, -1, 1, 0], [0, 0, 0, 1]], float)
generators = {
    "identity": np.eye(2),
    "rotation with one damper": np.array([[1.0, -1.0], [1.0, 0.0]]),
    "damped chain": chain,
}

rows = []
for name, B in generators.items():
    m = hc_index(B).m_hc
    fit = short_time_exponent_fit(B, m)
    print(f"{name:26s} m={m}  a={fit.a_est:.4f} (expected {fit.a_expected})  c={fit.c_est:.3g}")
    rows += [(name, t, d) for t, d in zip(fit.t_samples, fit.deficits)]

# Weak coupling: B(eps) = C + eps A. The constant scales like eps^(2m).
skew = np.diag([1.0, 1.0], 1) - np.diag([1.0, 1.0], -1)
study = epsilon_scaling_study(skew, np.diag([1.0, 0.0, 0.0]), [0.1, 0.2, 0.4])
print(f"eps slope {study.slope_est:.3f} (expected {study.slope_expected})")

if args.csv:
    with open(args.csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generator", "t", "deficit"])
        w.writerows(rows)
    print("wrote", args.csv)
