"""Circuit builders and checkers for teleportation and magic-state injection.

Surface-code geometry
---------------------
Qubit ``d*col + row`` sits at column ``col`` and row ``row`` (row 0 at the
bottom). The injection corner is the top of column 0, qubit ``d - 1``.
Plaquettes live on the cells ``(c, r)`` with ``c, r`` in ``-1 .. d-1``; cell
``(c, r)`` covers columns ``c, c+1`` and rows ``r, r+1`` clipped to the
grid. A cell is X-type when ``c + r`` is even, Z-type otherwise; boundary
cells are kept only if they are Z-type on the left/right edges or X-type on
the top/bottom edges. ``X_L`` is X on column 0 and ``Z_L`` is Z on the top
row, so both pass through the corner.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Angle, Circuit, Gate, Init, InsertError, Measure, NonClifford
from .extended import ExtendedState, PostSelectionRejected, TargetState
from .oracle import DenseState, run_dense
from .pauli import PhasedPauli
from .runner import Branch, run_extended

SUPPORTED_DISTANCES = (2, 3, 5)
LAYOUT_FORMAT = "extstab.layout/1"
REJECT_PROB = 1e-12
FIDELITY_TOL = 1e-9


# teleportation and [[4,1,2]] ------------------------------------------------


def build_t_teleportation(theta=Angle.pi(1, 4)) -> Circuit:
    """Consume ``R_Z(theta)|+>`` on qubit 1 to rotate qubit 0.

    Qubit 0 carries the data ``|+>``; the conditioned ``S`` fixes the
    ``R_Z(-2 theta)`` byproduct, which is Clifford only for ``theta = pi/4``.
    """
    c = Circuit(2)
    c.init(0, "+").init(1, "+")
    c.rz(theta, 1)
    c.gate("CNOT", 0, 1)
    c.measure("Z1", "alpha")
    c.gate("S", 0, condition="alpha")
    return c


def build_412_injection(theta=Angle.pi(1, 4)) -> Circuit:
    c = Circuit(4)
    for q, b in enumerate("++" "+0"):
        c.init(q, b)
    c.rz(theta, 1)
    c.measure("Z0*Z1", "n0")
    c.measure("Z2*Z3", "n1")
    c.measure("X0*X1*X2*X3", "m")
    return c


def code_412_target(theta: float, n0: int = 0, n1: int = 0, m: int = 0) -> TargetState:
    """Logical ``R_Z(theta)|+>`` of the [[4,1,2]] code in the given frame."""
    layout = SurfaceCodeLayout(2)
    stabs = []
    for pl, bit in zip(layout.plaquettes, (m, n0, n1)):
        stabs.append(-pl.pauli if bit else pl.pauli)
    return TargetState(4, stabs, layout.logical_x, layout.logical_z, (math.cos(theta), math.sin(theta), 0.0), "T_L")


# surface-code layout -------------------------------------------------------


@dataclass(frozen=True)
class Plaquette:
    kind: str  # "X" or "Z"
    qubits: tuple[int, ...]
    cell: tuple[int, int]
    n: int

    @property
    def label(self) -> str:
        return self.kind + "_".join(str(q) for q in self.qubits)

    @property
    def pauli(self) -> PhasedPauli:
        return PhasedPauli.from_sparse({q: self.kind for q in self.qubits}, self.n)


class SurfaceCodeLayout:
    """Rotated surface code of distance ``d`` with corner injection."""

    def __init__(self, d: int):
        if d not in SUPPORTED_DISTANCES:
            raise ValueError(f"distance {d} not supported (choose from {SUPPORTED_DISTANCES})")
        self.d = d
        self.n = d * d
        self.corner = d - 1
        self.coords = [(q // d, q % d) for q in range(self.n)]  # (col, row)
        self.inits = []
        for col, row in self.coords:
            if (col, row) == (0, d - 1):
                self.inits.append("psi")
            elif row + col <= d - 1:
                self.inits.append("+")
            else:
                self.inits.append("0")
        self.plaquettes = self._plaquettes()
        self.logical_x = PhasedPauli.from_sparse({self.qubit(0, r): "X" for r in range(d)}, self.n)
        self.logical_z = PhasedPauli.from_sparse({self.qubit(c, d - 1): "Z" for c in range(d)}, self.n)
        self.check()

    def qubit(self, col: int, row: int) -> int:
        return self.d * col + row

    def _plaquettes(self) -> list[Plaquette]:
        d = self.d
        out = []
        for r in range(-1, d):
            for c in range(-1, d):
                kind = "X" if (c + r) % 2 == 0 else "Z"
                side = c in (-1, d - 1)
                topbot = r in (-1, d - 1)
                if side and topbot:
                    continue
                if side and kind != "Z":
                    continue
                if topbot and kind != "X":
                    continue
                qs = sorted(
                    self.qubit(cc, rr)
                    for cc in (c, c + 1)
                    for rr in (r, r + 1)
                    if 0 <= cc < d and 0 <= rr < d
                )
                out.append(Plaquette(kind, tuple(qs), (c, r), self.n))
        out.sort(key=lambda p: (p.kind != "X", p.qubits))
        return out

    def check(self) -> None:
        paulis = [p.pauli for p in self.plaquettes]
        for i, a in enumerate(paulis):
            for b in paulis[i + 1 :]:
                if not a.commutes(b):
                    raise AssertionError(f"plaquettes {a} and {b} anticommute")
            if not (a.commutes(self.logical_x) and a.commutes(self.logical_z)):
                raise AssertionError(f"logical operator anticommutes with {a}")
        if self.logical_x.commutes(self.logical_z):
            raise AssertionError("logical X and Z commute")
        if len(paulis) != self.n - 1:
            raise AssertionError("wrong number of plaquettes")

    def touches_corner(self, p: Plaquette) -> bool:
        return self.corner in p.qubits

    @property
    def x_plaquettes(self) -> list[Plaquette]:
        return [p for p in self.plaquettes if p.kind == "X"]

    @property
    def z_plaquettes(self) -> list[Plaquette]:
        return [p for p in self.plaquettes if p.kind == "Z"]

    def reduced_z(self) -> list[Plaquette]:
        """Z checks on column 0 away from the corner: measured before the rotation."""
        col0 = {self.qubit(0, r) for r in range(self.d)}
        return [p for p in self.z_plaquettes if col0 & set(p.qubits) and not self.touches_corner(p)]

    def reduced_x(self) -> list[Plaquette]:
        """X checks on the top row away from the corner: measured before the rotation."""
        top = {self.qubit(c, self.d - 1) for c in range(self.d)}
        return [p for p in self.x_plaquettes if top & set(p.qubits) and not self.touches_corner(p)]

    def postselected(self) -> list[Plaquette]:
        """X checks entirely on ``|+>`` qubits and Z checks entirely on ``|0>`` qubits."""
        want = {"X": "+", "Z": "0"}
        return [p for p in self.plaquettes if all(self.inits[q] == want[p.kind] for q in p.qubits)]

    def schedule(self) -> tuple[list[Plaquette], list[Plaquette]]:
        """Measurement order before and after the rotation."""
        pre = self.reduced_z() + self.reduced_x()
        done = {p.label for p in pre}
        rest = [p for p in self.plaquettes if p.label not in done]
        post = (
            [p for p in rest if p.kind == "Z" and self.touches_corner(p)]
            + [p for p in rest if p.kind == "Z" and not self.touches_corner(p)]
            + [p for p in rest if p.kind == "X" and self.touches_corner(p)]
            + [p for p in rest if p.kind == "X" and not self.touches_corner(p)]
        )
        return pre, post

    def plaquette(self, label: str) -> Plaquette:
        for p in self.plaquettes:
            if p.label == label:
                return p
        raise KeyError(label)

    def to_json(self) -> dict:
        pre, post = self.schedule()
        return {
            "format": LAYOUT_FORMAT,
            "distance": self.d,
            "qubits": [
                {"index": q, "col": c, "row": r, "init": self.inits[q]} for q, (c, r) in enumerate(self.coords)
            ],
            "corner": self.corner,
            "plaquettes": [
                {"label": p.label, "type": p.kind, "qubits": list(p.qubits), "cell": list(p.cell)}
                for p in self.plaquettes
            ],
            "logical_x": self.logical_x.sparse(),
            "logical_z": self.logical_z.sparse(),
            "postselect": [p.label for p in self.postselected()],
            "schedule": {"before_rotation": [p.label for p in pre], "after_rotation": [p.label for p in post]},
        }

    def render(self) -> str:
        """Text picture of the grid, top row first."""
        sym = {"+": "+", "0": "0", "psi": "T"}
        rows = []
        for r in reversed(range(self.d)):
            rows.append(" ".join(f"{sym[self.inits[self.qubit(c, r)]]}{self.qubit(c, r):<3d}" for c in range(self.d)))
        return "\n".join(rows)


def build_surface_injection(d: int, theta=Angle.pi(1, 4)) -> tuple[Circuit, SurfaceCodeLayout]:
    layout = SurfaceCodeLayout(d)
    c = Circuit(layout.n)
    for q, b in enumerate(layout.inits):
        c.init(q, "+" if b == "psi" else b)
    post_set = {p.label for p in layout.postselected()}
    pre, post = layout.schedule()
    for p in pre:
        c.measure(p.pauli, p.label, 0 if p.label in post_set else None)
    c.rz(theta, layout.corner)
    for p in post:
        c.measure(p.pauli, p.label, 0 if p.label in post_set else None)
    return c, layout


def relabel_412(circuit: Circuit) -> Circuit:
    """Rename the d=2 plaquette labels to ``n0, n1, m``."""
    names = {"Z0_1": "n0", "Z2_3": "n1", "X0_1_2_3": "m"}
    out = Circuit(circuit.n)
    for ins in circuit.instructions:
        if isinstance(ins, Measure):
            ins = Measure(ins.pauli, names.get(ins.label, ins.label), ins.postselect)
        elif isinstance(ins, InsertError):
            ins = InsertError(ins.pauli, names.get(ins.before, ins.before))
        out.instructions.append(ins)
    return out


# logical frame -------------------------------------------------------------


def _frame_circuit(circuit: Circuit, replacement: str | None) -> Circuit:
    """Same circuit with the rotation removed (``None``) or replaced by a Clifford."""
    out = Circuit(circuit.n)
    for ins in circuit.instructions:
        if isinstance(ins, InsertError):
            continue
        if isinstance(ins, NonClifford):
            if replacement is not None:
                out.instructions.append(Gate(replacement, (ins.qubit,)))
            continue
        out.instructions.append(ins)
    return out


def _frame_run_extended(circuit: Circuit, record: dict[str, int]) -> ExtendedState:
    st = ExtendedState.from_stabilizer(circuit.n, circuit.inits())
    for ins in circuit.instructions:
        if isinstance(ins, Init):
            continue
        if isinstance(ins, Gate):
            if ins.condition is None or record[ins.condition]:
                st.apply_clifford(ins.name, ins.targets)
        elif isinstance(ins, Measure):
            p0, p1 = st.outcome_probabilities(ins.pauli)
            bit = record[ins.label] if min(p0, p1) > REJECT_PROB else int(p1 > p0)
            st.measure(ins.pauli, outcome=bit, label=ins.label)
    return st


def _frame_run_dense(circuit: Circuit, record: dict[str, int]) -> DenseState:
    st = DenseState.from_inits(circuit.inits(), "vector")
    for ins in circuit.instructions:
        if isinstance(ins, Init):
            continue
        if isinstance(ins, Gate):
            if ins.condition is None or record[ins.condition]:
                st.apply_gate(ins.name, ins.targets)
        elif isinstance(ins, Measure):
            trial = st.copy()
            p0 = trial.project(ins.pauli.letters(), ins.pauli.s, 0)
            if REJECT_PROB < p0 < 1 - REJECT_PROB:
                bit = record[ins.label]
            else:
                bit = 0 if p0 >= 0.5 else 1
            if bit == 0:
                st = trial
            else:
                st.project(ins.pauli.letters(), ins.pauli.s, 1)
            st.normalize()
    return st


def logical_frame(circuit: Circuit, layout: SurfaceCodeLayout, record: dict[str, int], backend: str = "extended") -> tuple[int, int]:
    """Signs ``(s_x, s_y)`` mapping corner ``X``/``Y`` onto ``X_L``/``Y_L``.

    The error-free circuit is rerun with the rotation replaced by identity
    (corner ``|+>``) and by ``S`` (corner ``|Y>``), following the recorded
    outcome wherever that measurement is random.
    """
    xl, zl = layout.logical_x, layout.logical_z
    yl = (xl * zl).with_phase((xl * zl).s + 1)
    signs = []
    for repl, op in ((None, xl), ("S", yl)):
        fc = _frame_circuit(circuit, repl)
        if backend == "extended":
            st = _frame_run_extended(fc, record)
            sign = st.tab.membership_with_sign(st.eps[0], op)
            if sign is None:
                raise RuntimeError(f"{op.sparse()} is not fixed by the error-free frame run")
        elif backend == "oracle":
            val = _frame_run_dense(fc, record).expectation(op.letters(), op.s).real
            if abs(abs(val) - 1) > 1e-9:
                raise RuntimeError(f"{op.sparse()} is not fixed by the error-free frame run")
            sign = 1 if val > 0 else -1
        else:
            raise ValueError(f"unknown backend {backend!r}")
        signs.append(int(sign))
    return signs[0], signs[1]


def injection_target(
    circuit: Circuit, layout: SurfaceCodeLayout, record: dict[str, int], theta: float, backend: str = "extended"
) -> TargetState:
    """Frame-corrected logical ``R_Z(theta)|+>`` for one outcome record."""
    sx, sy = logical_frame(circuit, layout, record, backend)
    stabs = []
    for p in layout.plaquettes:
        bit = record.get(p.label, 0)
        stabs.append(-p.pauli if bit else p.pauli)
    return TargetState(
        layout.n, stabs, layout.logical_x, layout.logical_z,
        (sx * math.cos(theta), sy * math.sin(theta), 0.0), name="T_L",
    )


def theta_of(circuit: Circuit) -> float:
    nc = circuit.nonclifford()
    if len(nc) != 1 or not isinstance(nc[0], NonClifford):
        raise ValueError("circuit must contain exactly one R_Z rotation")
    return nc[0].theta.radians


# logical-form check --------------------------------------------------------


@dataclass
class LogicalFormReport:
    passed: bool
    checks: dict[str, bool] = field(default_factory=dict)
    witnesses: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": dict(self.checks), "witnesses": dict(self.witnesses)}

    def __str__(self) -> str:
        lines = [f"logical form: {'PASS' if self.passed else 'FAIL'}"]
        for k, v in self.checks.items():
            lines.append(f"  {'ok ' if v else 'BAD'} {k}" + (f": {self.witnesses[k]}" if k in self.witnesses else ""))
        return "\n".join(lines)


def _fmt_c(c: complex) -> str:
    return f"{c.real:+.12g}{c.imag:+.12g}j"


def check_logical_form(
    state: ExtendedState,
    layout: SurfaceCodeLayout,
    record: dict[str, int] | None = None,
    logical_z: PhasedPauli | None = None,
    logical_x: PhasedPauli | None = None,
) -> LogicalFormReport:
    """Check the injected state has the expected symbolic structure.

    (a) every plaquette, signed by its recorded outcome, stabilizes every
    branch; (b) every nonzero off-diagonal ``P_ik`` equals ``Z_L`` up to a
    coefficient modulo the branch-k stabilizer group; (c) ``X_L`` belongs to
    every branch group, with opposite signs in the two branches.
    """
    record = record if record is not None else {o.label: o.bit for o in state.outcomes}
    zl = logical_z if logical_z is not None else layout.logical_z
    xl = logical_x if logical_x is not None else layout.logical_x
    rep = LogicalFormReport(True)
    bad = []
    for p in layout.plaquettes:
        want = -1 if record.get(p.label, 0) else 1
        signs = state.tab.membership_signs(state.eps, p.pauli)
        if signs is None or not np.all(signs == want):
            bad.append(p.label)
    rep.checks["plaquettes stabilize every branch"] = not bad
    if bad:
        rep.witnesses["plaquettes stabilize every branch"] = "violated: " + ", ".join(bad)

    off_ok, notes = True, []
    for i in range(state.nu):
        for k in range(state.nu):
            if i == k or state.coeffs[i, k] == 0:
                continue
            c_raw, p = state.entry(i, k)
            c = state.coefficient_as(i, k, zl)
            if c is None:
                off_ok = False
                notes.append(f"D[{i},{k}] = {p.sparse()} is not equivalent to {zl.sparse()}")
                continue
            notes.append(f"D[{i},{k}] = ({_fmt_c(c_raw)}) {p.sparse()} == ({_fmt_c(c)}) {zl.sparse()}")
    rep.checks["off-diagonal is the logical Z"] = off_ok and bool(notes)
    rep.witnesses["off-diagonal is the logical Z"] = "; ".join(notes) if notes else "no off-diagonal entries"

    signs = state.tab.membership_signs(state.eps, xl)
    x_ok = signs is not None and (state.nu == 1 or len(set(signs.tolist())) == 2)
    rep.checks["branch signs differ by the logical X"] = bool(x_ok)
    rep.witnesses["branch signs differ by the logical X"] = (
        f"{xl.sparse()} not in the branch groups" if signs is None
        else "signs per branch: " + " ".join("+" if s > 0 else "-" for s in signs)
    )
    rep.passed = all(rep.checks.values())
    return rep


# runs and sweeps -----------------------------------------------------------


@dataclass
class InjectionBranch:
    record: dict[str, int]
    probability: float
    fidelity: float
    oracle_fidelity: float | None = None
    oracle_probability: float | None = None
    max_deviation: float | None = None


def run_injection(
    circuit: Circuit, layout: SurfaceCodeLayout, oracle: bool = False, postselect: bool = True
) -> tuple[list[Branch], list[InjectionBranch]]:
    """Enumerate every accepted branch with its frame-corrected fidelity."""
    theta = theta_of(circuit)
    branches = run_extended(circuit, mode="enumerate", postselect=postselect)
    dense = {}
    if oracle:
        for db in run_dense(circuit, postselect=postselect, kind="vector"):
            dense[tuple(b for _, b, _ in db.outcomes)] = db
    rows = []
    for br in branches:
        rec = br.bits()
        target = injection_target(circuit, layout, rec, theta)
        row = InjectionBranch(rec, br.probability, br.state.fidelity(target))
        if oracle:
            db = dense.get(br.key())
            if db is None:
                row.oracle_probability = 0.0
            else:
                row.oracle_probability = db.probability
                otarget = injection_target(circuit, layout, rec, theta, backend="oracle")
                row.oracle_fidelity = oracle_fidelity(db.state, otarget)
                if layout.n <= 9:
                    rho = db.state.density()
                    row.max_deviation = float(np.abs(br.state.to_dense() - rho).max())
        rows.append(row)
    return branches, rows


@dataclass
class SweepCase:
    error: str
    position: str
    status: str  # "ok", "rejected" or "logical"
    acceptance: float
    min_fidelity: float | None
    oracle_status: str | None = None
    oracle_acceptance: float | None = None
    oracle_min_fidelity: float | None = None

    @property
    def agrees(self) -> bool | None:
        return None if self.oracle_status is None else self.status == self.oracle_status

    def to_json(self) -> dict:
        return {
            "error": self.error, "position": self.position, "status": self.status,
            "acceptance": self.acceptance, "min_fidelity": self.min_fidelity,
            "oracle_status": self.oracle_status, "oracle_acceptance": self.oracle_acceptance,
            "oracle_min_fidelity": self.oracle_min_fidelity, "agrees": self.agrees,
        }


def classify(acceptance: float, min_fidelity: float | None) -> str:
    if acceptance < REJECT_PROB or min_fidelity is None:
        return "rejected"
    return "logical" if min_fidelity < 1 - FIDELITY_TOL else "ok"


def post_rotation_labels(circuit: Circuit) -> list[str]:
    seen, out = False, []
    for ins in circuit.instructions:
        if isinstance(ins, NonClifford):
            seen = True
        elif seen and isinstance(ins, Measure):
            out.append(ins.label)
    return out


def _sweep_extended(circuit: Circuit, layout: SurfaceCodeLayout, theta: float) -> tuple[float, float | None]:
    try:
        branches = run_extended(circuit, mode="enumerate", postselect=True)
    except PostSelectionRejected:
        return 0.0, None
    acc = sum(b.probability for b in branches)
    fids = [b.state.fidelity(injection_target(circuit, layout, b.bits(), theta)) for b in branches]
    return acc, min(fids)


def oracle_fidelity(state: DenseState, target: TargetState) -> float:
    logicals = (target.logical_x, target.logical_y, target.logical_z)
    return state.fidelity_code(target.stabilizers, logicals, target.bloch)


def _sweep_oracle(circuit: Circuit, layout: SurfaceCodeLayout, theta: float) -> tuple[float, float | None]:
    branches = run_dense(circuit, postselect=True, kind="vector")
    if not branches:
        return 0.0, None
    acc = sum(b.probability for b in branches)
    fids = []
    for b in branches:
        target = injection_target(circuit, layout, b.bits(), theta, backend="oracle")
        fids.append(oracle_fidelity(b.state, target))
    return acc, min(fids)


def insert_error_sweep(
    circuit: Circuit,
    layout: SurfaceCodeLayout,
    letters: str = "XYZ",
    positions: list[str] | None = None,
    qubits: list[int] | None = None,
    oracle: bool = True,
) -> list[SweepCase]:
    """Insert every single-qubit Pauli before every post-rotation measurement.

    Each case runs with post-selection; it is ``rejected`` when no accepted
    branch survives, ``logical`` when an accepted branch has fidelity below
    ``1 - 1e-9`` with its frame-corrected target, and ``ok`` otherwise.
    """
    theta = theta_of(circuit)
    positions = post_rotation_labels(circuit) if positions is None else positions
    qubits = range(layout.n) if qubits is None else qubits
    cases = []
    for pos in positions:
        for q in qubits:
            for letter in letters:
                err = PhasedPauli.single(layout.n, q, letter)
                c = circuit.with_error(err, pos)
                acc, fid = _sweep_extended(c, layout, theta)
                case = SweepCase(err.sparse(), pos, classify(acc, fid), acc, fid)
                if oracle:
                    oacc, ofid = _sweep_oracle(c, layout, theta)
                    case.oracle_status = classify(oacc, ofid)
                    case.oracle_acceptance = oacc
                    case.oracle_min_fidelity = ofid
                cases.append(case)
    return cases


def layout_json(layout: SurfaceCodeLayout) -> str:
    return json.dumps(layout.to_json(), indent=2, sort_keys=True)
