"""
Staircase forms: a unitary change of basis that exposes how the damping
reaches each coordinate. The number of stairs minus two is the index.
"""

import numpy as np

from hypoindex import (
    hermitian_split, index_from_staircase, polar_decompose, staircase_jr, staircase_uq,
    validate_staircase,
)

np.set_printoptions(precision=3, suppress=True)

B = -np.array([[0, -1, 0, 0], [1, 0, -1, 0], [0, 1, -1, 0], [0, 0, 0, -1]], float)
sp = hermitian_split(B)
form = staircase_jr(sp.S, sp.H)
print("block sizes", form.block_sizes, "->", index_from_staircase(form))
print("V^H J V\n", form.transformed_first.real)
checks = validate_staircase(form, sp.S, sp.H)
print({k: v for k, v in checks.items() if k != "monotone"})

# The discrete analogue uses the polar factors A = U Q.
A = np.diag([1.0, 1.0], 1)
pf = polar_decompose(A)
form = staircase_uq(pf.U, pf.Q)
print("block sizes", form.block_sizes, "->", index_from_staircase(form))
