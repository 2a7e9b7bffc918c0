"""Hypothesis strategies for small complex matrices."""

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from generators import random_accretive, random_semi_contractive, rng

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False, width=64)


@st.composite
def complex_matrices(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    re = draw(hnp.arrays(np.float64, (n, n), elements=finite))
    im = draw(hnp.arrays(np.float64, (n, n), elements=finite))
    return re + 1j * im


seeds = st.integers(0, 2**32 - 1)


@st.composite
def accretive_matrices(draw):
    return random_accretive(rng(draw(seeds)))


@st.composite
def semi_contractive_matrices(draw):
    return random_semi_contractive(rng(draw(seeds)))
