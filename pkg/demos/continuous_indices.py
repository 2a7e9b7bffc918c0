"""
Walk through the continuous-time side: classification, the hypocoercivity
index by every route, what happens when no index exists, and the shifted
index for a generator whose Hermitian part is indefinite.
"""

import numpy as np

from hypoindex import (
    accretive_transform, classify_continuous, hc_index, shifted_hc_index,
)

np.set_printoptions(precision=4, suppress=True)

# x' = -B x with B accretive: the Hermitian part diag(1, 0) damps only the
# first coordinate, the rotation carries the damping over to the second.
B = np.array([[1.0, -1.0], [1.0, 0.0]])
c = classify_continuous(-B)
print("asymptotically stable:", c.asymptotically_stable, " semi-dissipative:", c.semi_dissipative)

res = hc_index(B)
print("index", res.m_hc, "from", res.per_method)

# A congruence with a Lyapunov weight removes the delay altogether.
P = np.array([[2.0, -1.0], [-1.0, 2.0]])
Bhat = accretive_transform(B, P)
print("weighted generator\n", Bhat, "\nindex", hc_index(Bhat).m_hc)

# An undamped mode on the imaginary axis: no finite index, and the report
# names the culprit eigenvector.
bad = hc_index(np.diag([1j, 1.0]))
print("exists:", bad.exists, " witness:", bad.witness_vector)

# Indefinite Hermitian part: shift by its smallest eigenvalue first.
U = np.array([[9.0, -3.0], [3.0, -1.0]])
s = shifted_hc_index(U)
print("lambda_min =", round(s.lambda_min_BH, 12), " shifted index", s.m_shc)
