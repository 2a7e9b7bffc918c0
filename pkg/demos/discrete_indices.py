"""
The discrete-time side: the hypocontractivity index of a semi-contractive
matrix is the last power whose norm is still one. The shift matrix keeps
its norm for two steps and then drops to zero.
"""

import numpy as np

from hypoindex import classify_discrete, dhc_index, discrete_power_report, scaled_dhc_index

np.set_printoptions(precision=4, suppress=True)

N = np.diag([1.0, 1.0], 1)
print(classify_discrete(N))

res = dhc_index(N)
print("index", res.m_dhc, "agreed by", sorted(res.per_method))

rep = discrete_power_report(N)
for j, nrm in rep.profile:
    print(f"  ||N^{j}|| = {nrm:.3f}")

# Doubling the shift breaks semi-contractivity; the scaled index divides by
# sigma_max and the norms follow sigma_max**j until the same drop.
sc = scaled_dhc_index(2 * N)
print("sigma_max", sc.sigma_max, " scaled index", sc.m_dshc)
print("profile", [round(v, 3) for _, v in discrete_power_report(2 * N).profile])

# A unitary matrix never loses norm, so there is no index; the witness is an
# eigenvector on the unit circle.
I = dhc_index(np.eye(2))
print("identity has an index:", I.exists, " witness", I.witness_vector)
