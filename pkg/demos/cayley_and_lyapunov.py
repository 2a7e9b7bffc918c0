"""
Cayley transforms carry continuous-time systems to discrete time and keep
the index. The same Lyapunov matrix certifies both systems.
"""

import numpy as np

from hypoindex import (
    cayley, hc_index, dhc_index, index_preservation_check, inverse_cayley,
    lyapunov_cayley_map, shifted_hc_index, scaled_dhc_index,
)

np.set_printoptions(precision=4, suppress=True)

Ac = np.array([[0, -1, 0, 0], [1, 0, -1, 0], [0, 1, -1, 0], [0, 0, 0, -1]], float)
Ad = cayley(Ac).image
print("discrete image (times 5)\n", 5 * Ad.real)
print("indices", hc_index(-Ac).m_hc, dhc_index(Ad).m_dhc, index_preservation_check(Ac))

# Going back recovers the generator to rounding.
print("round trip error", np.abs(inverse_cayley(Ad).image - Ac).max())

# The scaled variants are not preserved: twice the shift has scaled index 2
# but its preimage has shifted index 1.
N2 = 2 * np.diag([1.0, 1.0], 1)
pre = inverse_cayley(N2).image
print("preimage\n", pre.real)
print("scaled discrete", scaled_dhc_index(N2).m_dshc, " shifted continuous", shifted_hc_index(pre).m_shc)

res = lyapunov_cayley_map(Ac, np.eye(4))
print("P\n", res.P.real)
print("residuals", res.residual_c, res.residual_d)
