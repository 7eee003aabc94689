"""Drive an :class:`ExtendedState` through a :class:`Circuit`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, Init, InsertError, Measure, NonClifford, Unitary
from .extended import ExtendedState, Outcome, PostSelectionRejected


@dataclass
class Branch:
    outcomes: list[Outcome]
    probability: float
    state: ExtendedState

    def bits(self) -> dict[str, int]:
        return {o.label: o.bit for o in self.outcomes}

    def key(self) -> tuple[int, ...]:
        return tuple(o.bit for o in self.outcomes)


def run_extended(
    circuit: Circuit,
    mode: str = "enumerate",
    postselect: bool = True,
    seed: int | None = None,
    forced: dict[str, int] | None = None,
) -> list[Branch]:
    """Simulate ``circuit`` with the stabilizer decomposition.

    ``enumerate`` returns every outcome branch with nonzero probability;
    ``sample`` follows one branch drawn with ``seed``; ``postselect`` forces
    every unforced measurement to ``+1`` as well. Measurements carrying a
    ``postselect`` bit (or listed in ``forced``) are forced when
    ``postselect`` is true. Raises :class:`PostSelectionRejected` when no
    branch survives.
    """
    if mode not in ("enumerate", "sample", "postselect"):
        raise ValueError(f"unknown mode {mode!r}")
    circuit.validate()
    forced = dict(forced or {})
    rng = np.random.default_rng(seed)
    state = ExtendedState.from_stabilizer(circuit.n, circuit.inits())
    branches = [Branch([], 1.0, state)]
    rejection: PostSelectionRejected | None = None
    for ins in circuit.instructions:
        if isinstance(ins, Init):
            continue
        nxt = []
        for br in branches:
            st = br.state
            if isinstance(ins, Gate):
                if ins.condition is None or br.bits()[ins.condition]:
                    st.apply_clifford(ins.name, ins.targets)
                nxt.append(br)
            elif isinstance(ins, NonClifford):
                st.apply_rz(ins.theta.radians, ins.qubit)
                nxt.append(br)
            elif isinstance(ins, Unitary):
                st.apply_unitary(ins.matrix, ins.qubit)
                nxt.append(br)
            elif isinstance(ins, InsertError):
                st.apply_pauli(ins.pauli)
                nxt.append(br)
            elif isinstance(ins, Measure):
                want = None
                if postselect:
                    want = forced.get(ins.label, ins.postselect)
                    if want is None and mode == "postselect":
                        want = 0
                if want is None and mode == "sample":
                    bit, p = st.measure(ins.pauli, rng=rng, label=ins.label)
                    nxt.append(Branch(br.outcomes + [st.outcomes[-1]], br.probability * p, st))
                    continue
                bits = (0, 1) if want is None else (want,)
                for bit in bits:
                    s2 = st.copy()
                    try:
                        _, p = s2.measure(ins.pauli, outcome=bit, label=ins.label)
                    except PostSelectionRejected as exc:
                        if want is not None:
                            rejection = exc
                        continue
                    nxt.append(Branch(br.outcomes + [s2.outcomes[-1]], br.probability * p, s2))
            else:
                raise TypeError(f"unsupported instruction {ins!r}")
        branches = nxt
        if not branches:
            raise rejection or PostSelectionRejected(None, 0, 0.0)
    return branches
