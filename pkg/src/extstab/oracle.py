"""Brute-force dense reference simulator.

State vectors (or density matrices) over ``2**n`` amplitudes with qubit 0 as
the least significant bit of the basis index. Gates are exact matrices or
index permutations; Pauli measurements use explicit projectors. Nothing here
touches the tableau code, so it can serve as an independent check.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, Init, InsertError, Measure, NonClifford, Unitary
from .limits import check_matrix, check_vector

ZERO_PROB = 1e-12

_S2 = 1 / math.sqrt(2)
SINGLE_QUBIT_GATES = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}
_INIT_VECTORS = {
    "0": np.array([1, 0], dtype=complex),
    "+": np.array([_S2, _S2], dtype=complex),
    "Y": np.array([_S2, 1j * _S2], dtype=complex),
}


def _apply_1q(a: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply ``u`` to qubit ``q`` along axis 0 of ``a`` (shape ``(2**n, m)``)."""
    m = a.shape[1]
    t = a.reshape(2 ** (n - q - 1), 2, 2**q, m)
    return np.einsum("ij,ajbm->aibm", u, t).reshape(2**n, m)


def _bit(idx: np.ndarray, q: int) -> np.ndarray:
    return (idx >> q) & 1


def _apply_2q(a: np.ndarray, name: str, qa: int, qb: int, n: int) -> np.ndarray:
    idx = np.arange(2**n)
    if name == "CNOT":
        return a[idx ^ (_bit(idx, qa) << qb)]
    if name == "CZ":
        return a * (1 - 2 * (_bit(idx, qa) & _bit(idx, qb)))[:, None]
    if name == "SWAP":
        d = _bit(idx, qa) ^ _bit(idx, qb)
        return a[idx ^ (d << qa) ^ (d << qb)]
    raise ValueError(f"unknown two-qubit gate {name}")


def _apply_pauli(a: np.ndarray, letters: str, phase: int, n: int) -> np.ndarray:
    out = a
    for q, c in enumerate(letters):
        if c != "I":
            out = _apply_1q(out, SINGLE_QUBIT_GATES[c], q, n)
    return (1j**phase) * out


@dataclass
class DenseState:
    """Dense vector (``kind='vector'``) or density matrix (``kind='matrix'``)."""

    n: int
    data: np.ndarray
    kind: str = "vector"

    @classmethod
    def from_inits(cls, inits: Sequence[str], kind: str = "vector") -> DenseState:
        n = len(inits)
        (check_vector if kind == "vector" else check_matrix)(n)
        v = np.ones(1, dtype=complex)
        for b in inits:
            v = np.kron(_INIT_VECTORS[b], v)
        if kind == "matrix":
            return cls(n, np.outer(v, v.conj()), "matrix")
        return cls(n, v, "vector")

    def copy(self) -> DenseState:
        return DenseState(self.n, self.data.copy(), self.kind)

    def _op(self, f) -> None:
        """Apply a linear map ``f`` acting on axis 0 as a unitary channel."""
        if self.kind == "vector":
            self.data = f(self.data[:, None])[:, 0]
        else:
            left = f(self.data)
            self.data = f(left.conj().T).conj().T

    def apply_matrix(self, u: np.ndarray, qubit: int) -> None:
        self._op(lambda a: _apply_1q(a, np.asarray(u, dtype=complex), qubit, self.n))

    def apply_gate(self, name: str, targets: Sequence[int]) -> None:
        if name in SINGLE_QUBIT_GATES:
            self.apply_matrix(SINGLE_QUBIT_GATES[name], targets[0])
        else:
            self._op(lambda a: _apply_2q(a, name, targets[0], targets[1], self.n))

    def apply_pauli(self, letters: str, phase: int = 0) -> None:
        self._op(lambda a: _apply_pauli(a, letters, phase, self.n))

    def trace(self) -> float:
        if self.kind == "vector":
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def project(self, letters: str, phase: int, bit: int) -> float:
        """Apply ``(I + (-1)**bit P)/2`` (unnormalized); returns the new trace."""
        sign = -1 if bit else 1

        def proj(a):
            return (a + sign * _apply_pauli(a, letters, phase, self.n)) / 2

        self._op(proj)
        return self.trace()

    def normalize(self) -> None:
        t = self.trace()
        self.data = self.data / (math.sqrt(t) if self.kind == "vector" else t)

    def density(self) -> np.ndarray:
        if self.kind == "matrix":
            return self.data
        check_matrix(self.n)
        return np.outer(self.data, self.data.conj())

    def expectation(self, letters: str, phase: int = 0) -> complex:
        if self.kind == "vector":
            v = self.data[:, None]
            return complex(np.vdot(v, _apply_pauli(v, letters, phase, self.n)) / self.trace())
        return complex(np.trace(_apply_pauli(self.data, letters, phase, self.n)) / self.trace())

    def fidelity_with(self, projector: np.ndarray) -> float:
        if self.kind == "vector":
            v = self.data
            return float(np.real(np.vdot(v, projector @ v)) / self.trace())
        return float(np.real(np.trace(self.data @ projector)) / self.trace())

    def fidelity_code(self, stabilizers, logicals, bloch) -> float:
        """Fidelity with ``prod (I + s)/2 * (I + sum r_a L_a)/2``.

        ``stabilizers`` and ``logicals`` are objects with ``letters()`` and
        ``s``; projectors are applied to the state directly.
        """
        if self.kind == "vector":
            phi = self.data[:, None]
            for st in stabilizers:
                phi = (phi + _apply_pauli(phi, st.letters(), st.s, self.n)) / 2
            val = np.vdot(phi, phi).real
            for r, op in zip(bloch, logicals):
                if r:
                    val += r * np.vdot(phi, _apply_pauli(phi, op.letters(), op.s, self.n)).real
            return float(val / 2 / self.trace())
        rho = self.data
        for st in stabilizers:
            rho = (rho + _apply_pauli(rho, st.letters(), st.s, self.n)) / 2
        val = np.trace(rho).real
        for r, op in zip(bloch, logicals):
            if r:
                val += r * np.trace(_apply_pauli(rho, op.letters(), op.s, self.n)).real
        return float(val / 2 / self.trace())

    def fidelity_vector(self, target: np.ndarray) -> float:
        target = np.asarray(target, dtype=complex)
        if self.kind == "vector":
            return float(abs(np.vdot(target, self.data)) ** 2 / self.trace())
        return float(np.real(np.vdot(target, self.data @ target)) / self.trace())


@dataclass
class DenseBranch:
    outcomes: list[tuple[str, int, float]]
    probability: float
    state: DenseState

    def bits(self) -> dict[str, int]:
        return {label: bit for label, bit, _ in self.outcomes}


def rz_dense(theta: float) -> np.ndarray:
    return np.diag([1, cmath.exp(1j * theta)]).astype(complex)


def run_dense(
    circuit: Circuit,
    mode: str = "enumerate",
    postselect: bool = True,
    kind: str = "vector",
    forced: dict[str, int] | None = None,
) -> list[DenseBranch]:
    """Run every outcome branch with nonzero probability.

    ``mode='enumerate'`` explores both outcomes of every measurement;
    ``mode='postselect'`` additionally forces every unforced measurement to
    ``+1``. Circuit postselect fields and ``forced`` are honored when
    ``postselect`` is true. Branches are renormalized after each measurement.
    """
    if mode not in ("enumerate", "postselect"):
        raise ValueError(f"unknown mode {mode!r}")
    forced = dict(forced or {})
    state = DenseState.from_inits(circuit.inits(), kind)
    branches = [DenseBranch([], 1.0, state)]
    for ins in circuit.instructions:
        if isinstance(ins, Init):
            continue
        nxt = []
        for br in branches:
            st = br.state
            if isinstance(ins, Gate):
                if ins.condition is None or br.bits()[ins.condition]:
                    st.apply_gate(ins.name, ins.targets)
                nxt.append(br)
            elif isinstance(ins, NonClifford):
                st.apply_matrix(rz_dense(ins.theta.radians), ins.qubit)
                nxt.append(br)
            elif isinstance(ins, Unitary):
                st.apply_matrix(ins.matrix, ins.qubit)
                nxt.append(br)
            elif isinstance(ins, InsertError):
                st.apply_pauli(ins.pauli.letters(), ins.pauli.s)
                nxt.append(br)
            elif isinstance(ins, Measure):
                want = None
                if postselect:
                    want = forced.get(ins.label, ins.postselect)
                    if want is None and mode == "postselect":
                        want = 0
                bits = (0, 1) if want is None else (want,)
                for bit in bits:
                    s2 = st.copy()
                    t = s2.project(ins.pauli.letters(), ins.pauli.s, bit)
                    if t <= ZERO_PROB:
                        continue
                    s2.normalize()
                    nxt.append(DenseBranch(br.outcomes + [(ins.label, bit, t)], br.probability * t, s2))
            else:
                raise TypeError(f"unsupported instruction {ins!r}")
        branches = nxt
        if not branches:
            break
    return branches
