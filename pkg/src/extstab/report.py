"""Run reports: text rendering and versioned JSON."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

SCHEMA = "extstab.report/1"


@dataclass
class OutcomeRecord:
    labels: list[str]
    bits: list[int]
    probability: float
    trace: float = 1.0
    fidelity: float | None = None
    oracle_probability: float | None = None
    oracle_fidelity: float | None = None
    max_deviation: float | None = None
    logical_form: dict | None = None


@dataclass
class OracleSummary:
    checked: bool
    agree: bool | None = None
    max_deviation: float | None = None
    max_probability_deviation: float | None = None
    note: str | None = None


@dataclass
class RunReport:
    command: str
    qubits: int
    mode: str
    backend: str
    outcomes: list[OutcomeRecord] = field(default_factory=list)
    seed: int | None = None
    target: str | None = None
    oracle: OracleSummary | None = None
    sweep: list[dict] | None = None
    layout: dict | None = None
    timing: dict | None = None
    schema: str = SCHEMA

    @property
    def total_probability(self) -> float:
        return sum(o.probability for o in self.outcomes)

    def to_json(self) -> dict:
        d = asdict(self)
        d["total_probability"] = self.total_probability
        if self.timing is None:
            del d["timing"]
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, data: dict | str) -> RunReport:
        if isinstance(data, str):
            data = json.loads(data)
        data = dict(data)
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        data.pop("total_probability", None)
        data["outcomes"] = [OutcomeRecord(**o) for o in data.get("outcomes", [])]
        if data.get("oracle") is not None:
            data["oracle"] = OracleSummary(**data["oracle"])
        return cls(**data)

    def render(self) -> str:
        lines = [f"{self.command}: {self.qubits} qubits, mode {self.mode}, kernels {self.backend}"]
        if self.seed is not None:
            lines[0] += f", seed {self.seed}"
        if self.target:
            lines.append(f"fidelity target: {self.target}")
        for o in self.outcomes:
            rec = " ".join(f"{lab}={b}" for lab, b in zip(o.labels, o.bits)) or "(no measurements)"
            line = f"  {rec}  p={o.probability:.12g}"
            if o.fidelity is not None:
                line += f"  F={o.fidelity:.12g}"
            if o.oracle_fidelity is not None:
                line += f"  F_oracle={o.oracle_fidelity:.12g}"
            if o.max_deviation is not None:
                line += f"  |rho-rho_oracle|={o.max_deviation:.2e}"
            if o.logical_form is not None:
                line += "  logical-form " + ("PASS" if o.logical_form["passed"] else "FAIL")
            lines.append(line)
        lines.append(f"total probability: {self.total_probability:.12g}")
        if self.oracle is not None:
            if self.oracle.checked:
                lines.append(
                    f"oracle: {'agree' if self.oracle.agree else 'DISAGREE'}"
                    f" (max |rho diff| {self.oracle.max_deviation:.2e},"
                    f" max |p diff| {self.oracle.max_probability_deviation:.2e})"
                )
            else:
                lines.append(f"oracle: skipped ({self.oracle.note})")
        if self.sweep is not None:
            lines.append(f"error sweep: {len(self.sweep)} cases")
            lines.append(f"  {'error':<6} {'before':<12} {'status':<9} {'accept':>10} {'min F':>14}  oracle")
            for c in self.sweep:
                mf = "-" if c["min_fidelity"] is None else f"{c['min_fidelity']:.10f}"
                orc = "" if c["oracle_status"] is None else (c["oracle_status"] + ("" if c["agrees"] else " MISMATCH"))
                lines.append(
                    f"  {c['error']:<6} {c['position']:<12} {c['status']:<9} {c['acceptance']:>10.6f} {mf:>14}  {orc}"
                )
            counts = {}
            for c in self.sweep:
                counts[c["status"]] = counts.get(c["status"], 0) + 1
            lines.append("  " + ", ".join(f"{k}: {v}" for k, v in sorted(counts.items())))
        if self.timing is not None:
            lines.append("timing: " + ", ".join(f"{k} {v:.3f}s" for k, v in self.timing.items()))
        return "\n".join(lines)
