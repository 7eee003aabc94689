"""Circuit instructions and the line-oriented text format.

Grammar, one instruction per line (``#`` starts a comment)::

    qubits N
    init qK +|0|Y
    h|s|sdg|x|y|z qK          cnot|cz|swap qA qB
    rz ANGLE qK               t qK
    mpp LABEL PAULI [postselect=0|1]
    cif LABEL GATE TARGETS    # Clifford applied iff measurement LABEL gave 1
    error PAULI@LABEL         # Pauli inserted right before LABEL (or @end)

``PAULI`` is a sparse product such as ``X0*X1*Z3`` with an optional leading
sign. ``ANGLE`` is an exact multiple of pi (``pi/4``, ``-3*pi/8``) or a
float in radians. The ``q`` prefix on qubit indices is optional.
"""

from __future__ import annotations

import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .pauli import GATE_ARITY, PhasedPauli, canonical_gate

END = "end"
INIT_BASES = ("0", "+", "Y")
_LABEL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


class CircuitParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class CircuitError(ValueError):
    """A structurally invalid circuit."""


@dataclass(frozen=True)
class Angle:
    """Rotation angle, exact when given as a rational multiple of pi."""

    pi_multiple: Fraction | None = None
    radians_value: float | None = None

    def __post_init__(self):
        if (self.pi_multiple is None) == (self.radians_value is None):
            raise ValueError("give exactly one of pi_multiple or radians_value")

    @classmethod
    def pi(cls, num: int, den: int = 1) -> Angle:
        return cls(pi_multiple=Fraction(num, den))

    @classmethod
    def coerce(cls, value) -> Angle:
        if isinstance(value, Angle):
            return value
        if isinstance(value, Fraction):
            return cls(pi_multiple=value)
        if isinstance(value, str):
            return parse_angle(value)
        return cls(radians_value=float(value))

    @property
    def radians(self) -> float:
        if self.pi_multiple is not None:
            return float(self.pi_multiple) * math.pi
        return self.radians_value

    def __str__(self) -> str:
        f = self.pi_multiple
        if f is None:
            return repr(self.radians_value)
        if f == 0:
            return "0*pi"
        sign = "-" if f < 0 else ""
        num, den = abs(f.numerator), f.denominator
        body = "pi" if num == 1 else f"{num}*pi"
        return sign + body + ("" if den == 1 else f"/{den}")


_ANGLE_RE = re.compile(r"^([+-]?)(?:(\d+)\*?)?pi(?:/(\d+))?$")


def parse_angle(text: str) -> Angle:
    t = text.strip().replace(" ", "").lower()
    m = _ANGLE_RE.match(t)
    if m:
        sign, num, den = m.groups()
        f = Fraction(int(num or 1), int(den or 1))
        return Angle(pi_multiple=-f if sign == "-" else f)
    try:
        return Angle(radians_value=float(t))
    except ValueError:
        raise ValueError(f"bad angle {text!r}") from None


# instructions ---------------------------------------------------------


@dataclass(frozen=True)
class Init:
    qubit: int
    basis: str


@dataclass(frozen=True)
class Gate:
    name: str
    targets: tuple[int, ...]
    condition: str | None = None


@dataclass(frozen=True)
class NonClifford:
    """``R_Z(theta)`` on one qubit."""

    qubit: int
    theta: Angle


@dataclass(frozen=True, eq=False)
class Unitary:
    """Arbitrary single-qubit unitary (API only; not in the text format)."""

    qubit: int
    matrix: np.ndarray

    def __eq__(self, other):
        return isinstance(other, Unitary) and self.qubit == other.qubit and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


@dataclass(frozen=True)
class Measure:
    pauli: PhasedPauli
    label: str
    postselect: int | None = None


@dataclass(frozen=True)
class InsertError:
    pauli: PhasedPauli
    before: str


Instruction = Init | Gate | NonClifford | Unitary | Measure | InsertError


@dataclass
class Circuit:
    n: int
    instructions: list = field(default_factory=list)

    # builders ---------------------------------------------------------

    def _pauli(self, p) -> PhasedPauli:
        p = p if isinstance(p, PhasedPauli) else PhasedPauli.parse(p, self.n)
        if p.n != self.n:
            raise CircuitError(f"Pauli {p} has {p.n} qubits, circuit has {self.n}")
        return p

    def init(self, qubit: int, basis: str) -> Circuit:
        if basis not in INIT_BASES:
            raise CircuitError(f"unknown initial state {basis!r}")
        self._qubit(qubit)
        self.instructions.append(Init(qubit, basis))
        return self

    def gate(self, name: str, *targets: int, condition: str | None = None) -> Circuit:
        name = canonical_gate(name)
        if len(targets) != GATE_ARITY[name]:
            raise CircuitError(f"{name} takes {GATE_ARITY[name]} target(s)")
        for t in targets:
            self._qubit(t)
        self.instructions.append(Gate(name, tuple(int(t) for t in targets), condition))
        return self

    def rz(self, theta, qubit: int) -> Circuit:
        self._qubit(qubit)
        self.instructions.append(NonClifford(qubit, Angle.coerce(theta)))
        return self

    def t(self, qubit: int) -> Circuit:
        return self.rz(Angle.pi(1, 4), qubit)

    def unitary(self, matrix, qubit: int) -> Circuit:
        self._qubit(qubit)
        self.instructions.append(Unitary(qubit, np.asarray(matrix, dtype=complex)))
        return self

    def measure(self, pauli, label: str, postselect: int | None = None) -> Circuit:
        self.instructions.append(Measure(self._pauli(pauli), label, postselect))
        return self

    def _qubit(self, q: int) -> None:
        if not 0 <= q < self.n:
            raise CircuitError(f"qubit {q} out of range for {self.n} qubits")

    def with_error(self, pauli, before: str) -> Circuit:
        """Copy with a Pauli error placed right before measurement ``before``."""
        err = InsertError(self._pauli(pauli), before)
        out = Circuit(self.n, list(self.instructions))
        if before == END:
            out.instructions.append(err)
            return out
        for idx, ins in enumerate(out.instructions):
            if isinstance(ins, Measure) and ins.label == before:
                out.instructions.insert(idx, err)
                return out
        raise CircuitError(f"no measurement labelled {before!r}")

    # queries ----------------------------------------------------------

    def inits(self) -> list[str]:
        bases = ["0"] * self.n
        for ins in self.instructions:
            if isinstance(ins, Init):
                bases[ins.qubit] = ins.basis
        return bases

    def labels(self) -> list[str]:
        return [ins.label for ins in self.instructions if isinstance(ins, Measure)]

    def nonclifford(self) -> list:
        return [ins for ins in self.instructions if isinstance(ins, (NonClifford, Unitary))]

    def body(self) -> list:
        return [ins for ins in self.instructions if not isinstance(ins, Init)]

    def validate(self, max_nonclifford: int | None = 1) -> None:
        seen_init: set[int] = set()
        labels: set[str] = set()
        started = False
        for ins in self.instructions:
            if isinstance(ins, Init):
                if started:
                    raise CircuitError("init must precede every other instruction")
                if ins.qubit in seen_init:
                    raise CircuitError(f"qubit {ins.qubit} initialised twice")
                seen_init.add(ins.qubit)
                continue
            started = True
            if isinstance(ins, Measure):
                if not _LABEL_RE.match(ins.label) or ins.label == END:
                    raise CircuitError(f"bad label {ins.label!r}")
                if ins.label in labels:
                    raise CircuitError(f"duplicate label {ins.label!r}")
                if ins.pauli.is_identity() or not ins.pauli.is_hermitian():
                    raise CircuitError(f"cannot measure {ins.pauli}")
                labels.add(ins.label)
            elif isinstance(ins, Gate) and ins.condition is not None:
                if ins.condition not in labels:
                    raise CircuitError(f"condition {ins.condition!r} is not an earlier measurement")
        all_labels = set(self.labels())
        for ins in self.instructions:
            if isinstance(ins, InsertError) and ins.before != END and ins.before not in all_labels:
                raise CircuitError(f"error targets unknown label {ins.before!r}")
        if max_nonclifford is not None and len(self.nonclifford()) > max_nonclifford:
            raise CircuitError(f"at most {max_nonclifford} non-Clifford gate(s) allowed")

    # text form --------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"qubits {self.n}"]
        for ins in self.instructions:
            lines.append(format_instruction(ins))
        return "\n".join(lines) + "\n"


def format_instruction(ins) -> str:
    if isinstance(ins, Init):
        return f"init q{ins.qubit} {ins.basis}"
    if isinstance(ins, Gate):
        body = f"{ins.name.lower()} " + " ".join(f"q{t}" for t in ins.targets)
        return f"cif {ins.condition} {body}" if ins.condition else body
    if isinstance(ins, NonClifford):
        return f"rz {ins.theta} q{ins.qubit}"
    if isinstance(ins, Measure):
        tail = "" if ins.postselect is None else f" postselect={ins.postselect}"
        return f"mpp {ins.label} {ins.pauli.sparse()}{tail}"
    if isinstance(ins, InsertError):
        return f"error {ins.pauli.sparse()}@{ins.before}"
    raise CircuitError(f"{type(ins).__name__} has no text form")


def _parse_qubit(tok: str, n: int, line: int, col: int) -> int:
    t = tok[1:] if tok[:1] in "qQ" else tok
    if not t.isdigit():
        raise CircuitParseError(f"bad qubit {tok!r}", line, col)
    q = int(t)
    if q >= n:
        raise CircuitParseError(f"qubit {q} out of range for {n} qubits", line, col)
    return q


def _tokens(raw: str) -> list[tuple[str, int]]:
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", raw)]


def parse_circuit(text: str, max_nonclifford: int | None = 1) -> Circuit:
    """Parse the text format; errors carry line and column."""
    circuit: Circuit | None = None
    errors: list[tuple[InsertError, int, int]] = []
    labels: set[str] = set()
    n_nonclifford = 0
    started = False
    last_line = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0]
        toks = _tokens(raw)
        if not toks:
            continue
        op, col = toks[0][0].lower(), toks[0][1]
        args = toks[1:]
        last_line = lineno

        def need(k: int) -> None:
            if len(args) != k:
                raise CircuitParseError(f"{op} expects {k} argument(s), got {len(args)}", lineno, col)

        if circuit is None:
            if op != "qubits":
                raise CircuitParseError("file must start with 'qubits N'", lineno, col)
            need(1)
            if not args[0][0].isdigit() or int(args[0][0]) < 1:
                raise CircuitParseError(f"bad qubit count {args[0][0]!r}", lineno, args[0][1])
            circuit = Circuit(int(args[0][0]))
            continue
        n = circuit.n
        try:
            if op == "qubits":
                raise CircuitParseError("duplicate 'qubits' line", lineno, col)
            if op == "init" and started:
                raise CircuitParseError("init must precede every other instruction", lineno, col)
            started = started or op != "init"
            if op == "init":
                need(2)
                q = _parse_qubit(args[0][0], n, lineno, args[0][1])
                if args[1][0] not in INIT_BASES:
                    raise CircuitParseError(f"unknown initial state {args[1][0]!r}", lineno, args[1][1])
                circuit.init(q, args[1][0])
            elif op in ("rz", "t"):
                n_nonclifford += 1
                if max_nonclifford is not None and n_nonclifford > max_nonclifford:
                    raise CircuitParseError(
                        f"at most {max_nonclifford} non-Clifford gate(s) allowed", lineno, col
                    )
                if op == "t":
                    need(1)
                    circuit.t(_parse_qubit(args[0][0], n, lineno, args[0][1]))
                else:
                    need(2)
                    try:
                        theta = parse_angle(args[0][0])
                    except ValueError as exc:
                        raise CircuitParseError(str(exc), lineno, args[0][1]) from None
                    circuit.rz(theta, _parse_qubit(args[1][0], n, lineno, args[1][1]))
            elif op == "mpp":
                if len(args) not in (2, 3):
                    raise CircuitParseError("mpp expects LABEL PAULI [postselect=0|1]", lineno, col)
                label = args[0][0]
                if not _LABEL_RE.match(label) or label == END:
                    raise CircuitParseError(f"bad label {label!r}", lineno, args[0][1])
                if label in labels:
                    raise CircuitParseError(f"duplicate label {label!r}", lineno, args[0][1])
                labels.add(label)
                p = _parse_pauli(args[1][0], n, lineno, args[1][1])
                post = None
                if len(args) == 3:
                    m = re.fullmatch(r"postselect=([01])", args[2][0])
                    if not m:
                        raise CircuitParseError(f"bad option {args[2][0]!r}", lineno, args[2][1])
                    post = int(m.group(1))
                circuit.measure(p, label, post)
            elif op == "cif":
                if len(args) < 2:
                    raise CircuitParseError("cif expects LABEL GATE TARGETS", lineno, col)
                label = args[0][0]
                if label not in labels:
                    raise CircuitParseError(
                        f"condition {label!r} is not an earlier measurement", lineno, args[0][1]
                    )
                name, targets = _parse_gate(args[1:], n, lineno)
                circuit.gate(name, *targets, condition=label)
            elif op == "error":
                need(1)
                tok, tcol = args[0]
                if "@" not in tok:
                    raise CircuitParseError("error expects PAULI@LABEL", lineno, tcol)
                ptxt, before = tok.rsplit("@", 1)
                p = _parse_pauli(ptxt, n, lineno, tcol)
                errors.append((InsertError(p, before), lineno, tcol + len(ptxt) + 1))
            else:
                name, targets = _parse_gate(toks, n, lineno)
                circuit.gate(name, *targets)
        except CircuitError as exc:
            raise CircuitParseError(str(exc), lineno, col) from None
    if circuit is None:
        raise CircuitParseError("empty circuit file", 1, 1)
    for err, lineno, col in errors:
        try:
            circuit = circuit.with_error(err.pauli, err.before)
        except CircuitError as exc:
            raise CircuitParseError(str(exc), lineno, col) from None
    try:
        circuit.validate(max_nonclifford)
    except CircuitError as exc:
        raise CircuitParseError(str(exc), last_line, 1) from None
    return circuit


def _parse_gate(toks: Sequence[tuple[str, int]], n: int, line: int) -> tuple[str, list[int]]:
    name_tok, col = toks[0]
    try:
        name = canonical_gate(name_tok)
    except ValueError:
        raise CircuitParseError(f"unknown instruction {name_tok!r}", line, col) from None
    arity = GATE_ARITY[name]
    if len(toks) - 1 != arity:
        raise CircuitParseError(f"{name_tok} expects {arity} qubit(s)", line, col)
    return name, [_parse_qubit(t, n, line, c) for t, c in toks[1:]]


def _parse_pauli(text: str, n: int, line: int, col: int) -> PhasedPauli:
    try:
        return PhasedPauli.parse(text.replace("q", "").replace("Q", ""), n)
    except ValueError as exc:
        raise CircuitParseError(str(exc), line, col) from None


def load_circuit(path, max_nonclifford: int | None = 1) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read(), max_nonclifford)
