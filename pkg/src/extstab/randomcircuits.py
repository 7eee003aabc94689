"""Random circuits for differential testing and benchmarks."""

from __future__ import annotations

import math

import numpy as np

from .circuit import Angle, Circuit
from .pauli import PhasedPauli

ONE_QUBIT = ("H", "S", "SDG", "X", "Y", "Z")
TWO_QUBIT = ("CNOT", "CZ", "SWAP")
THETA_CHOICES = ("pi/4", "-pi/4", "pi/3", "uniform")


def random_angle(rng: np.random.Generator) -> Angle:
    pick = THETA_CHOICES[rng.integers(len(THETA_CHOICES))]
    if pick == "uniform":
        return Angle(radians_value=float(rng.uniform(-math.pi, math.pi)))
    return Angle.coerce(pick)


def random_pauli(rng: np.random.Generator, n: int, max_weight: int | None = None) -> PhasedPauli:
    """Non-identity Hermitian Pauli with random sign."""
    while True:
        letters = rng.choice(list("IXYZ"), size=n)
        if max_weight is not None:
            keep = rng.permutation(n)[:max_weight]
            mask = np.zeros(n, bool)
            mask[keep] = True
            letters = np.where(mask, letters, "I")
        if (letters != "I").any():
            return PhasedPauli.from_letters("".join(letters), 2 * int(rng.integers(2)))


def random_circuit(
    rng: np.random.Generator,
    n: int | None = None,
    max_qubits: int = 5,
    max_gates: int = 30,
    max_measurements: int = 3,
    nonclifford: bool = True,
) -> Circuit:
    """Random inits, Cliffords, one ``R_Z`` and a few Pauli measurements."""
    n = int(rng.integers(1, max_qubits + 1)) if n is None else n
    c = Circuit(n)
    for q in range(n):
        c.init(q, "0+Y"[rng.integers(3)])
    n_gates = int(rng.integers(0, max_gates + 1))
    n_meas = int(rng.integers(0, max_measurements + 1))
    slots = ["g"] * n_gates + ["m"] * n_meas + (["t"] if nonclifford else [])
    rng.shuffle(slots)
    for k, kind in enumerate(slots):
        if kind == "t":
            c.rz(random_angle(rng), int(rng.integers(n)))
        elif kind == "m":
            c.measure(random_pauli(rng, n), f"m{k}")
        elif n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, size=2, replace=False)
            c.gate(TWO_QUBIT[rng.integers(3)], int(a), int(b))
        else:
            c.gate(ONE_QUBIT[rng.integers(6)], int(rng.integers(n)))
    return c
