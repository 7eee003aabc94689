"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

from extstab.pauli import PhasedPauli

ONE_QUBIT = ["H", "S", "SDG", "X", "Y", "Z"]
TWO_QUBIT = ["CNOT", "CZ", "SWAP"]


@st.composite
def paulis(draw, n, hermitian=False):
    letters = draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
    s = draw(st.sampled_from([0, 2] if hermitian else [0, 1, 2, 3]))
    return PhasedPauli.from_letters(letters, s)


@st.composite
def pauli_tuples(draw, k, max_n=8, min_n=1, hermitian=False):
    n = draw(st.integers(min_n, max_n))
    return tuple(draw(paulis(n, hermitian)) for _ in range(k))


@st.composite
def gates(draw, n):
    if n >= 2 and draw(st.booleans()):
        a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
        return draw(st.sampled_from(TWO_QUBIT)), (a, b)
    return draw(st.sampled_from(ONE_QUBIT)), (draw(st.integers(0, n - 1)),)


def seeds():
    return st.integers(0, 2**32 - 1).map(np.random.default_rng)
