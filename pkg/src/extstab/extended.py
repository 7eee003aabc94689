"""Decomposed density matrix for circuits with a single non-Clifford gate.

The state is stored as

    rho = 2**log2_scale * sum_{i,k} c[i, k] P[i, k] Pi_k

where ``Pi_k = prod_j (I + (-1)**eps[k, j] g_j) / 2`` is the pure stabilizer
projector of branch ``k``. All branches share one unsigned
:class:`~extstab.tableau.GeneratorTableau`; ``P[i, k]`` are Hermitian letter
strings (phase 0) with every ``i``-phase folded into ``c[i, k]``.

Before the non-Clifford gate ``nu == 1`` and the state is a plain stabilizer
state with ``P[0, 0] = I``. Applying ``U = sum_i u_i P_i`` expands it to
``nu = len(terms)`` branches.
"""

from __future__ import annotations

import cmath
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .limits import check_matrix
from .pauli import PhasedPauli, _words, canonical_gate
from .tableau import GeneratorTableau, TableauError

ZERO_PROB = 1e-12
SNAPSHOT_FORMAT = "extstab.state/1"

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_I_POW = np.array([1, 1j, -1, -1j])


class PostSelectionRejected(Exception):
    """A forced measurement outcome has zero probability."""

    def __init__(self, label: str | None, bit: int, probability: float):
        self.label = label
        self.bit = bit
        self.probability = probability
        where = f" at {label}" if label else ""
        super().__init__(f"outcome {bit}{where} has probability {probability:.3g}")


class NonCliffordError(ValueError):
    """Raised when a second non-Clifford gate is requested."""


class Outcome(NamedTuple):
    label: str | None
    bit: int
    probability: float


def decompose_unitary(u, atol: float = 1e-12) -> list[tuple[complex, PhasedPauli]]:
    """Expand a 2x2 unitary over ``{I, X, Y, Z}`` by trace inner products.

    Terms with ``|c| < 1e-14`` are dropped.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if not np.allclose(u.conj().T @ u, np.eye(2), atol=atol, rtol=0):
        raise ValueError("matrix is not unitary")
    terms = []
    for letter in "IXYZ":
        c = complex(np.trace(_PAULI_1Q[letter] @ u) / 2)
        if abs(c) >= 1e-14:
            terms.append((c, PhasedPauli.from_letters(letter)))
    return terms


def rz_terms(theta: float) -> list[tuple[complex, PhasedPauli]]:
    """Both Pauli terms of ``R_Z(theta) = diag(1, e^{i theta})``, kept even when zero."""
    ph = cmath.exp(1j * theta)
    return [
        ((1 + ph) / 2, PhasedPauli.from_letters("I")),
        ((1 - ph) / 2, PhasedPauli.from_letters("Z")),
    ]


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([1.0, cmath.exp(1j * theta)])


@dataclass
class TargetState:
    """Pure (or code-space reduced) target for fidelity checks.

    The target projector is ``prod_s (I + s)/2 * (I + rx Xl + ry Yl + rz Zl)/2``
    with ``Yl = i Xl Zl``. With fewer than ``n - 1`` stabilizers the fidelity
    is that of the reduced state on the logical qubit.
    """

    n: int
    stabilizers: list[PhasedPauli]
    logical_x: PhasedPauli
    logical_z: PhasedPauli
    bloch: tuple[float, float, float]
    name: str = field(default="target")

    def __post_init__(self):
        for s in self.stabilizers:
            if not s.is_hermitian():
                raise ValueError(f"stabilizer {s} is not Hermitian")
            for other in (self.logical_x, self.logical_z):
                if not s.commutes(other):
                    raise ValueError(f"logical {other} does not commute with {s}")
        if self.logical_x.commutes(self.logical_z):
            raise ValueError("logical X and Z must anticommute")
        norm = math.sqrt(sum(r * r for r in self.bloch))
        if abs(norm - 1) > 1e-9:
            raise ValueError("Bloch vector must have unit length")

    @property
    def logical_y(self) -> PhasedPauli:
        return (self.logical_x * self.logical_z).with_phase((self.logical_x * self.logical_z).s + 1)

    @classmethod
    def single_qubit(cls, n: int, qubit: int, theta: float) -> TargetState:
        """``(|0> + e^{i theta}|1>)/sqrt 2`` on one qubit of an ``n``-qubit register."""
        return cls(
            n, [], PhasedPauli.single(n, qubit, "X"), PhasedPauli.single(n, qubit, "Z"),
            (math.cos(theta), math.sin(theta), 0.0), name=f"T(q{qubit})",
        )

    def projector(self) -> np.ndarray:
        check_matrix(self.n)
        dim = 2**self.n
        eye = np.eye(dim, dtype=complex)
        proj = eye.copy()
        for s in self.stabilizers:
            proj = proj @ (eye + s.to_dense()) / 2
        rx, ry, rz = self.bloch
        log = eye + rx * self.logical_x.to_dense() + ry * self.logical_y.to_dense() + rz * self.logical_z.to_dense()
        return proj @ log / 2

    def to_vector(self) -> np.ndarray:
        """Unit vector of the target; only defined for a rank-1 projector."""
        vals, vecs = np.linalg.eigh(self.projector())
        if np.sum(vals > 0.5) != 1:
            raise ValueError("target is not a pure state (incomplete stabilizer set)")
        return vecs[:, -1]


class ExtendedState:
    """Stabilizer decomposition ``rho = sum c_ik P_ik Pi_k`` (see module doc)."""

    def __init__(self, tableau: GeneratorTableau, eps, coeffs, px, pz, log2_scale: int = 0):
        self.n = tableau.n
        self.tab = tableau
        self.eps = np.ascontiguousarray(eps, dtype=np.uint8)
        self.coeffs = np.ascontiguousarray(coeffs, dtype=complex)
        nu = self.coeffs.shape[0]
        w = _words(self.n)
        self.px = np.ascontiguousarray(px, dtype=np.uint64).reshape(nu, nu, w)
        self.pz = np.ascontiguousarray(pz, dtype=np.uint64).reshape(nu, nu, w)
        self.log2_scale = int(log2_scale)
        self.outcomes: list[Outcome] = []
        self.nonclifford_applied = nu > 1
        if self.eps.shape != (nu, self.n) or self.coeffs.shape != (nu, nu):
            raise ValueError("branch signs and coefficients disagree on nu")

    # construction -----------------------------------------------------

    @classmethod
    def from_stabilizer(cls, n: int, inits: Sequence[str] | None = None) -> ExtendedState:
        tab = GeneratorTableau.from_basis(n, inits)
        w = _words(n)
        return cls(
            tab,
            np.zeros((1, n), np.uint8),
            np.ones((1, 1), complex),
            np.zeros((1, 1, w), np.uint64),
            np.zeros((1, 1, w), np.uint64),
        )

    def copy(self) -> ExtendedState:
        out = ExtendedState(self.tab.copy(), self.eps.copy(), self.coeffs.copy(), self.px.copy(), self.pz.copy(), self.log2_scale)
        out.outcomes = list(self.outcomes)
        out.nonclifford_applied = self.nonclifford_applied
        return out

    @property
    def nu(self) -> int:
        return self.coeffs.shape[0]

    def entry(self, i: int, k: int) -> tuple[complex, PhasedPauli]:
        """``(c_ik, P_ik)`` with the global scale folded into ``c``."""
        c = complex(self.coeffs[i, k]) * 2.0**self.log2_scale
        return c, PhasedPauli(self.n, self.px[i, k], self.pz[i, k])

    def branch_generators(self, k: int) -> list[PhasedPauli]:
        """Signed generators of branch ``k``."""
        return [-g if self.eps[k, j] else g for j, g in enumerate(self.tab.stabs())]

    def _flat(self):
        m = self.nu * self.nu
        return self.px.reshape(m, -1), self.pz.reshape(m, -1)

    # unitaries --------------------------------------------------------

    def apply_clifford(self, gate: str, targets: Sequence[int]) -> None:
        self.tab.conjugate_all(self.eps, gate, targets)
        code = kernels.GATE_CODES[canonical_gate(gate)]
        fx, fz = self._flat()
        flips = kernels.apply_gate(fx, fz, code, *targets)
        if flips.any():
            self.coeffs[flips.reshape(self.nu, self.nu).astype(bool)] *= -1

    def apply_pauli(self, p: PhasedPauli) -> None:
        """Conjugate by a Pauli operator (error insertion): ``rho -> p rho p``."""
        fx, fz = self._flat()
        anti = kernels.omega_rows(fx, fz, p.x, p.z).reshape(self.nu, self.nu).astype(bool)
        self.coeffs[anti] *= -1
        self.tab.apply_pauli(self.eps, p)

    def apply_nonclifford(self, terms: Sequence[tuple[complex, PhasedPauli]], qubit: int | None = None) -> None:
        """Apply ``U = sum_i c_i P_i`` to a ``nu = 1`` state.

        Single-qubit terms are placed on ``qubit``; full-width terms are used
        as given. Each term's own phase is folded into its coefficient.
        """
        if self.nonclifford_applied or self.nu != 1:
            raise NonCliffordError("only one non-Clifford gate per run is supported")
        if not terms:
            raise ValueError("empty decomposition")
        paulis, cs = [], []
        for c, p in terms:
            if p.n != self.n:
                if p.n != 1 or qubit is None:
                    raise ValueError("single-qubit terms need a target qubit")
                if not 0 <= qubit < self.n:
                    raise ValueError(f"qubit {qubit} out of range for {self.n} qubits")
                p = PhasedPauli.single(self.n, qubit, p.letters()).with_phase(p.s)
            cs.append(complex(c) * _I_POW[p.s])
            paulis.append(p.unsigned())
        nu = len(paulis)
        c00 = complex(self.coeffs[0, 0])
        w = _words(self.n)
        coeffs = np.zeros((nu, nu), complex)
        px = np.zeros((nu, nu, w), np.uint64)
        pz = np.zeros((nu, nu, w), np.uint64)
        eps = np.empty((nu, self.n), np.uint8)
        for k, pk in enumerate(paulis):
            eps[k] = self.eps[0] ^ self.tab.anticommuting(pk)
            for i, pi in enumerate(paulis):
                prod = pi * pk
                coeffs[i, k] = c00 * cs[i] * np.conj(cs[k]) * _I_POW[prod.s]
                px[i, k] = prod.x
                pz[i, k] = prod.z
        self.eps, self.coeffs, self.px, self.pz = eps, coeffs, px, pz
        self.nonclifford_applied = True

    def apply_unitary(self, u, qubit: int) -> None:
        self.apply_nonclifford(decompose_unitary(u), qubit)

    def apply_rz(self, theta: float, qubit: int) -> None:
        self.apply_nonclifford(rz_terms(theta), qubit)

    # trace and expectations ------------------------------------------

    def _weighted_sum(self, left: PhasedPauli | None = None) -> complex:
        """``sum_ik c_ik <psi_k| left P_ik |psi_k>`` (unscaled)."""
        total = 0j
        for i, k in zip(*np.nonzero(self.coeffs)):
            x, z, s = self.px[i, k], self.pz[i, k], 0
            if left is not None:
                s = left.s + kernels.mul_phase(left.x, left.z, x, z)
                x, z = left.x ^ x, left.z ^ z
            f = self.tab.member_factors(self.eps[k : k + 1], x, z, s)
            if f is not None:
                total += self.coeffs[i, k] * f[0]
        return total

    def trace(self) -> float:
        t = self._weighted_sum() * 2.0**self.log2_scale
        if abs(t.imag) > 1e-12 * max(1.0, abs(t.real)):
            raise TableauError(f"trace is not real: {t}")
        return float(t.real)

    def normalize(self) -> None:
        t = self.trace()
        if t <= ZERO_PROB * 1e-3:
            raise ValueError("cannot normalize an annihilated state")
        self.coeffs *= 2.0**self.log2_scale / t
        self.log2_scale = 0

    def expectation(self, p: PhasedPauli) -> complex:
        """``tr(rho p) / tr(rho)``."""
        return complex(self._weighted_sum(p) / self._weighted_sum())

    def coefficient_as(self, i: int, k: int, target: PhasedPauli) -> complex | None:
        """Coefficient ``c'`` with ``c_ik P_ik Pi_k == c' target Pi_k``.

        ``None`` when ``target`` and ``P_ik`` do not agree modulo the signed
        stabilizer group of branch ``k``. Scale is included.
        """
        c, p = self.entry(i, k)
        m = target * p
        f = self.tab.member_factors(self.eps[k : k + 1], m.x, m.z, m.s)
        if f is None:
            return None
        return c * complex(f[0])

    # measurement ------------------------------------------------------

    def _project(self, q: PhasedPauli, bit: int, pivot: int | None = None) -> None:
        """``rho -> Q_b rho Q_b`` with ``Q_b = (I + (-1)**bit q)/2``, unnormalized."""
        anti = self.tab.anticommuting(q)
        fx, fz = self._flat()
        ent_anti = kernels.omega_rows(fx, fz, q.x, q.z).astype(bool)
        if not anti.any():
            sigma = self.tab.membership_signs(self.eps, q)
            if sigma is None:
                raise TableauError("commuting measurement is not in a full-rank group")
            want = 1 - 2 * bit
            keep = (sigma == want)[None, :] & ~ent_anti.reshape(self.nu, self.nu)
            self.coeffs[~keep] = 0
            return
        p = self.tab.rewrite_anticommuting(self.eps, q, pivot)
        gx, gz = self.tab.sx[p].copy(), self.tab.sz[p].copy()
        sign_g = 1 - 2 * self.eps[:, p].astype(np.int64)  # per column k
        sel = ent_anti & (self.coeffs.reshape(-1) != 0)
        if sel.any():
            e = kernels.right_mul_rows(fx, fz, sel, gx, gz)
            factor = _I_POW[e.reshape(self.nu, self.nu)] * sign_g[None, :]
            mask = sel.reshape(self.nu, self.nu)
            self.coeffs[mask] *= factor[mask]
        self.tab.replace_pivot(self.eps, p, q, bit)
        self.log2_scale -= 1

    def _check_measurable(self, q: PhasedPauli) -> None:
        if q.n != self.n:
            raise ValueError(f"measurement acts on {q.n} qubits, state has {self.n}")
        if not q.is_hermitian():
            raise ValueError(f"{q} is not Hermitian")
        if q.is_identity():
            raise ValueError("cannot measure the identity")

    def outcome_probabilities(self, q: PhasedPauli) -> tuple[float, float]:
        self._check_measurable(q)
        before = self.trace()
        probs = []
        for bit in (0, 1):
            trial = self.copy()
            trial._project(q, bit)
            probs.append(trial.trace() / before)
        return probs[0], probs[1]

    def measure(
        self,
        q: PhasedPauli,
        outcome: int | None = None,
        rng: np.random.Generator | None = None,
        label: str | None = None,
        pivot: int | None = None,
        normalize: bool = True,
    ) -> tuple[int, float]:
        """Measure Hermitian ``q`` in place; returns ``(bit, probability)``.

        With ``outcome`` given the result is forced (post-selection) and a
        zero-probability outcome raises :class:`PostSelectionRejected`.
        Otherwise the outcome is sampled from ``rng``.
        """
        self._check_measurable(q)
        before = self.trace()
        trial = self.copy()
        trial._project(q, 0, pivot)
        p0 = trial.trace() / before
        if outcome is None:
            rng = rng if rng is not None else np.random.default_rng()
            outcome = 0 if rng.random() < p0 else 1
        outcome = int(outcome)
        if outcome not in (0, 1):
            raise ValueError("outcome must be 0 or 1")
        if outcome == 0:
            chosen, prob = trial, p0
        else:
            chosen = self.copy()
            chosen._project(q, 1, pivot)
            prob = chosen.trace() / before
        if prob <= ZERO_PROB:
            raise PostSelectionRejected(label, outcome, prob)
        self.tab, self.eps, self.coeffs = chosen.tab, chosen.eps, chosen.coeffs
        self.px, self.pz, self.log2_scale = chosen.px, chosen.pz, chosen.log2_scale
        if normalize:
            self.normalize()
        self.outcomes.append(Outcome(label, outcome, float(prob)))
        return outcome, float(prob)

    def measure_all_outcomes(self, q: PhasedPauli, label: str | None = None, normalize: bool = True):
        """Both outcomes with nonzero probability as ``(bit, prob, state)``."""
        out = []
        for bit in (0, 1):
            s = self.copy()
            try:
                _, prob = s.measure(q, outcome=bit, label=label, normalize=normalize)
            except PostSelectionRejected:
                continue
            out.append((bit, prob, s))
        return out

    # fidelity ---------------------------------------------------------

    def fidelity(self, target: TargetState) -> float:
        """``tr(rho Proj) / tr(rho)`` for the target projector, via projections."""
        s = self.copy()
        s.outcomes = []
        p = 1.0
        for stab in target.stabilizers:
            try:
                _, prob = s.measure(stab, outcome=0)
            except PostSelectionRejected:
                return 0.0
            p *= prob
        rx, ry, rz = target.bloch
        log = 1.0
        for r, op in ((rx, target.logical_x), (ry, target.logical_y), (rz, target.logical_z)):
            if r:
                log += r * s.expectation(op).real
        return float(p * log / 2)

    def fidelity_dense(self, target: TargetState) -> float:
        rho = self.to_dense()
        return float(np.real(np.trace(rho @ target.projector())) / np.real(np.trace(rho)))

    # dense form -------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        check_matrix(self.n)
        dim = 2**self.n
        eye = np.eye(dim, dtype=complex)
        gens = [g.to_dense() for g in self.tab.stabs()]
        rho = np.zeros((dim, dim), complex)
        for k in range(self.nu):
            cols = np.nonzero(self.coeffs[:, k])[0]
            if cols.size == 0:
                continue
            proj = eye.copy()
            for j, g in enumerate(gens):
                proj = proj @ (eye + (-1.0) ** self.eps[k, j] * g) / 2
            for i in cols:
                c, p = self.entry(i, k)
                rho += c * (p.to_dense() @ proj)
        return rho

    # serialization ----------------------------------------------------

    def to_json(self) -> dict:
        entries = []
        for i in range(self.nu):
            row = []
            for k in range(self.nu):
                c = complex(self.coeffs[i, k])
                row.append([c.real, c.imag, PhasedPauli(self.n, self.px[i, k], self.pz[i, k]).sparse()])
            entries.append(row)
        return {
            "format": SNAPSHOT_FORMAT,
            "n": self.n,
            "generators": [g.sparse() for g in self.tab.stabs()],
            "destabilizers": [self.tab.destab(j).sparse() for j in range(self.n)],
            "signs": ["".join(str(b) for b in row) for row in self.eps],
            "entries": entries,
            "log2_scale": self.log2_scale,
            "nonclifford_applied": self.nonclifford_applied,
            "outcomes": [list(o) for o in self.outcomes],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> ExtendedState:
        if isinstance(data, str):
            data = json.loads(data)
        if data.get("format") != SNAPSHOT_FORMAT:
            raise ValueError(f"unsupported snapshot format {data.get('format')!r}")
        n = data["n"]
        tab = GeneratorTableau.from_generators(
            [PhasedPauli.parse(s, n) for s in data["generators"]],
            [PhasedPauli.parse(s, n) for s in data["destabilizers"]],
        )
        eps = np.array([[int(b) for b in row] for row in data["signs"]], np.uint8)
        nu = len(data["entries"])
        w = _words(n)
        coeffs = np.zeros((nu, nu), complex)
        px = np.zeros((nu, nu, w), np.uint64)
        pz = np.zeros((nu, nu, w), np.uint64)
        for i, row in enumerate(data["entries"]):
            for k, (re, im, label) in enumerate(row):
                p = PhasedPauli.parse(label, n)
                coeffs[i, k] = complex(re, im)
                px[i, k], pz[i, k] = p.x, p.z
        out = cls(tab, eps, coeffs, px, pz, data["log2_scale"])
        out.nonclifford_applied = data["nonclifford_applied"]
        out.outcomes = [Outcome(*o) for o in data["outcomes"]]
        return out

    def dump(self) -> str:
        lines = [self.tab.dump(self.eps), f"scale 2^{self.log2_scale}"]
        for i in range(self.nu):
            for k in range(self.nu):
                c, p = complex(self.coeffs[i, k]), PhasedPauli(self.n, self.px[i, k], self.pz[i, k])
                if c != 0:
                    lines.append(f"D[{i},{k}] = ({c.real:+.12g}{c.imag:+.12g}j) {p.sparse()}")
        return "\n".join(lines)
