"""Phased n-qubit Pauli operators on bit-packed X/Z words.

A :class:`PhasedPauli` is ``i**s`` times a tensor product of single-qubit
letters, where ``(x, z)`` bits select ``I``, ``X`` (1, 0), ``Z`` (0, 1) or
the Hermitian ``Y`` (1, 1). Since ``Y = i X Z`` the product ``X0 * Z0`` comes
out as ``-i Y0`` (``s = 3``). Operators are Hermitian iff ``s`` is even.

Two text forms are understood:

* dense labels ``[+|-][i]?[IXYZ]{n}``, character ``k`` acting on qubit ``k``;
* sparse products such as ``-X0*Z3*Z5`` (the qubit count comes from context).

Dense matrices use qubit 0 as the least significant bit of the basis index.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence

import numpy as np

from . import kernels
from .limits import check_matrix

__all__ = [
    "PhasedPauli",
    "GATE_ARITY",
    "canonical_gate",
    "mul",
    "omega",
    "conjugate",
    "to_dense",
]

GATE_ARITY = {
    "I": 1, "H": 1, "S": 1, "SDG": 1, "X": 1, "Y": 1, "Z": 1,
    "CNOT": 2, "CZ": 2, "SWAP": 2,
}

_GATE_ALIASES = {
    "ID": "I", "S_DAG": "SDG", "SDAG": "SDG", "SDAGGER": "SDG", "CX": "CNOT",
}

_LETTERS = "IXZY"  # indexed by x + 2 z
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}

_DENSE_RE = re.compile(r"^([+-]?)(i?)([IXYZ]*)$")
_SPARSE_TERM_RE = re.compile(r"^([IXYZ])(\d+)$")


def canonical_gate(name: str) -> str:
    """Upper-case gate name with aliases resolved; raises on unknown gates."""
    key = name.strip().upper()
    key = _GATE_ALIASES.get(key, key)
    if key not in GATE_ARITY:
        raise ValueError(f"unknown Clifford gate {name!r}")
    return key


def _words(n: int) -> int:
    return max(1, (n + 63) // 64)


def _pack(bits: Sequence[int], n: int) -> np.ndarray:
    out = np.zeros(_words(n), dtype=np.uint64)
    for q, b in enumerate(bits):
        if b:
            out[q >> 6] |= np.uint64(1) << np.uint64(q & 63)
    return out


def _unpack(words: np.ndarray, n: int) -> np.ndarray:
    q = np.arange(n)
    return ((words[q >> 6] >> (q & 63).astype(np.uint64)) & np.uint64(1)).astype(np.uint8)


class PhasedPauli:
    """Immutable ``i**s`` times a Pauli string on ``n`` qubits."""

    __slots__ = ("n", "x", "z", "s")

    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, s: int = 0):
        if n < 1:
            raise ValueError("a Pauli needs at least one qubit")
        w = _words(n)
        x = np.array(x, dtype=np.uint64).reshape(-1)
        z = np.array(z, dtype=np.uint64).reshape(-1)
        if x.shape != (w,) or z.shape != (w,):
            raise ValueError(f"expected {w} words for {n} qubits")
        if n % 64:
            top = (np.uint64(1) << np.uint64(n % 64)) - np.uint64(1)
            if (x[-1] & ~top) or (z[-1] & ~top):
                raise ValueError("bits set beyond the qubit count")
        x.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "s", int(s) % 4)

    def __setattr__(self, name, value):
        raise AttributeError("PhasedPauli is immutable")

    # construction -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> PhasedPauli:
        w = _words(n)
        return cls(n, np.zeros(w, np.uint64), np.zeros(w, np.uint64))

    @classmethod
    def from_bits(cls, xbits: Sequence[int], zbits: Sequence[int], s: int = 0) -> PhasedPauli:
        n = len(xbits)
        if len(zbits) != n:
            raise ValueError("x and z bit vectors differ in length")
        return cls(n, _pack(xbits, n), _pack(zbits, n), s)

    @classmethod
    def from_letters(cls, letters: str, s: int = 0) -> PhasedPauli:
        xs, zs = zip(*(_LETTER_BITS[c] for c in letters))
        return cls.from_bits(xs, zs, s)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PhasedPauli:
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range for {n} qubits")
        return cls.from_sparse({qubit: letter}, n)

    @classmethod
    def from_sparse(cls, ops: dict[int, str] | Iterable[tuple[int, str]], n: int, s: int = 0) -> PhasedPauli:
        letters = ["I"] * n
        items = ops.items() if isinstance(ops, dict) else ops
        for q, c in items:
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range for {n} qubits")
            if letters[q] != "I":
                raise ValueError(f"qubit {q} appears twice")
            letters[q] = c.upper()
        return cls.from_letters("".join(letters), s)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> PhasedPauli:
        """Parse a dense label or a sparse ``X0*Z3`` product.

        Sparse products need ``n``; dense labels must match it when given.
        """
        t = text.strip().replace(" ", "")
        m = _DENSE_RE.match(t)
        if m and m.group(3) and (n is None or len(m.group(3)) == n):
            sign, imag, body = m.groups()
            return cls.from_letters(body, _phase_exponent(sign, imag))
        if n is None:
            raise ValueError(f"cannot parse {text!r} without a qubit count")
        sign = ""
        if t[:1] in "+-":
            sign, t = t[0], t[1:]
        imag = ""
        if t[:1] == "i":
            imag, t = "i", t[1:]
        if t in ("", "I"):
            return cls.identity(n).with_phase(_phase_exponent(sign, imag))
        ops = []
        for term in t.split("*"):
            tm = _SPARSE_TERM_RE.match(term)
            if not tm:
                raise ValueError(f"bad Pauli term {term!r} in {text!r}")
            ops.append((int(tm.group(2)), tm.group(1)))
        ops = [(q, c) for q, c in ops if c != "I"]
        return cls.from_sparse(ops, n, _phase_exponent(sign, imag))

    # views ------------------------------------------------------------

    def xbits(self) -> np.ndarray:
        return _unpack(self.x, self.n)

    def zbits(self) -> np.ndarray:
        return _unpack(self.z, self.n)

    def letters(self) -> str:
        xb, zb = self.xbits(), self.zbits()
        return "".join(_LETTERS[a + 2 * b] for a, b in zip(xb, zb))

    def support(self) -> list[int]:
        return [q for q, c in enumerate(self.letters()) if c != "I"]

    @property
    def weight(self) -> int:
        return len(self.support())

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def is_hermitian(self) -> bool:
        return self.s % 2 == 0

    def unsigned(self) -> PhasedPauli:
        return PhasedPauli(self.n, self.x, self.z, 0)

    def with_phase(self, s: int) -> PhasedPauli:
        return PhasedPauli(self.n, self.x, self.z, s)

    def sign(self) -> int:
        """+1 or -1 for Hermitian operators."""
        if not self.is_hermitian():
            raise ValueError(f"{self} is not Hermitian")
        return 1 if self.s == 0 else -1

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.s] + self.letters()

    def sparse(self) -> str:
        """``X0*Z3`` form with a leading sign when not ``+1``."""
        body = "*".join(f"{c}{q}" for q, c in enumerate(self.letters()) if c != "I") or "I"
        prefix = {0: "", 1: "+i", 2: "-", 3: "-i"}[self.s]
        return prefix + body

    def __repr__(self) -> str:
        return f"PhasedPauli({str(self)!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhasedPauli):
            return NotImplemented
        return (
            self.n == other.n
            and self.s == other.s
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.s, self.x.tobytes(), self.z.tobytes()))

    # algebra ----------------------------------------------------------

    def _check(self, other: PhasedPauli) -> None:
        if self.n != other.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")

    def __mul__(self, other: PhasedPauli) -> PhasedPauli:
        self._check(other)
        e = kernels.mul_phase(self.x, self.z, other.x, other.z)
        return PhasedPauli(self.n, self.x ^ other.x, self.z ^ other.z, self.s + other.s + e)

    def __neg__(self) -> PhasedPauli:
        return self.with_phase(self.s + 2)

    def inverse(self) -> PhasedPauli:
        # letters square to I, so only the phase inverts
        return self.with_phase(-self.s)

    def adjoint(self) -> PhasedPauli:
        return self.inverse()

    def omega(self, other: PhasedPauli) -> int:
        self._check(other)
        return int(kernels.omega_rows(self.x[None, :], self.z[None, :], other.x, other.z)[0])

    def commutes(self, other: PhasedPauli) -> bool:
        return self.omega(other) == 0

    def conjugate(self, gate: str, targets: Sequence[int]) -> PhasedPauli:
        """``U p U^dagger`` for a named Clifford ``U`` on ``targets``."""
        name = canonical_gate(gate)
        targets = _check_targets(name, targets, self.n)
        x = self.x.copy()[None, :]
        z = self.z.copy()[None, :]
        flips = kernels.apply_gate(x, z, kernels.GATE_CODES[name], *targets)
        return PhasedPauli(self.n, x[0], z[0], self.s + 2 * int(flips[0]))

    def to_dense(self) -> np.ndarray:
        check_matrix(self.n)
        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.ones((1, 1), dtype=complex)
        # qubit 0 is the least significant bit, so it is the rightmost factor
        for c in self.letters():
            out = np.kron(mats[c], out)
        return (1j ** self.s) * out


def _phase_exponent(sign: str, imag: str) -> int:
    return (2 if sign == "-" else 0) + (1 if imag else 0)


def _check_targets(name: str, targets: Sequence[int], n: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(targets) != GATE_ARITY[name]:
        raise ValueError(f"{name} takes {GATE_ARITY[name]} target(s), got {len(targets)}")
    if any(not 0 <= t < n for t in targets):
        raise ValueError(f"targets {targets} out of range for {n} qubits")
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated target in {targets}")
    return targets


def mul(a: PhasedPauli, b: PhasedPauli) -> PhasedPauli:
    return a * b


def omega(a: PhasedPauli, b: PhasedPauli) -> int:
    return a.omega(b)


def conjugate(p: PhasedPauli, gate: str, targets: Sequence[int]) -> PhasedPauli:
    return p.conjugate(gate, targets)


def to_dense(p: PhasedPauli) -> np.ndarray:
    return p.to_dense()
