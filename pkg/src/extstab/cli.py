"""``extstab`` command-line interface.

Exit codes: 0 success, 1 error (including a failed cross-check), 2 when
post-selection rejects every branch.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import kernels
from .circuit import CircuitParseError, load_circuit, parse_angle
from .extended import PostSelectionRejected, TargetState
from .limits import DenseLimitError, matrix_limit
from .oracle import run_dense
from .protocols import (
    build_surface_injection,
    check_logical_form,
    injection_target,
    insert_error_sweep,
    layout_json,
    oracle_fidelity,
    theta_of,
)
from .report import OracleSummary, OutcomeRecord, RunReport
from .runner import run_extended

EXIT_OK, EXIT_ERROR, EXIT_REJECTED = 0, 1, 2
AGREE_TOL = 1e-10


def _oracle_compare(circuit, branches, postselect: bool, report: RunReport, records: list[OutcomeRecord]) -> bool:
    if circuit.n > matrix_limit():
        report.oracle = OracleSummary(False, note=f"{circuit.n} qubits exceeds the dense limit {matrix_limit()}")
        return True
    dense = {tuple(b for _, b, _ in db.outcomes): db for db in run_dense(circuit, postselect=postselect, kind="vector")}
    dev = pdev = 0.0
    for br, rec in zip(branches, records):
        db = dense.get(br.key())
        if db is None:
            pdev = max(pdev, br.probability)
            rec.oracle_probability = 0.0
            continue
        rec.oracle_probability = db.probability
        d = float(np.abs(br.state.to_dense() - db.state.density()).max())
        rec.max_deviation = d
        dev = max(dev, d)
        pdev = max(pdev, abs(br.probability - db.probability))
    if report.mode == "enumerate":
        covered = {br.key() for br in branches}
        for key, db in dense.items():
            if key not in covered:
                pdev = max(pdev, db.probability)
    agree = dev <= AGREE_TOL and pdev <= AGREE_TOL
    report.oracle = OracleSummary(True, agree, dev, pdev)
    return agree


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    circuit = load_circuit(args.file)
    mode = "enumerate" if args.enumerate else "sample"
    report = RunReport("simulate", circuit.n, mode, kernels.BACKEND, seed=args.seed)
    t1 = time.perf_counter()
    try:
        branches = run_extended(circuit, mode=mode, postselect=args.postselect, seed=args.seed)
    except PostSelectionRejected as exc:
        print(f"post-selection rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    t2 = time.perf_counter()
    target = None
    if args.fidelity_qubit is not None:
        rot = circuit.nonclifford()
        theta = theta_of(circuit) if rot else 0.0
        target = TargetState.single_qubit(circuit.n, args.fidelity_qubit, theta)
        report.target = f"R_Z({theta:.12g})|+> on qubit {args.fidelity_qubit}"
    for br in branches:
        rec = OutcomeRecord(
            [o.label for o in br.outcomes], [o.bit for o in br.outcomes], br.probability, br.state.trace()
        )
        if target is not None:
            rec.fidelity = br.state.fidelity(target)
        report.outcomes.append(rec)
    ok = True
    if args.oracle:
        ok = _oracle_compare(circuit, branches, args.postselect, report, report.outcomes)
    t3 = time.perf_counter()
    if args.timing:
        report.timing = {"parse": t1 - t0, "simulate": t2 - t1, "checks": t3 - t2}
    _emit(report, args.json)
    return EXIT_OK if ok else EXIT_ERROR


def cmd_inject(args) -> int:
    t0 = time.perf_counter()
    theta = parse_angle(args.theta)
    circuit, layout = build_surface_injection(args.distance, theta)
    if args.export_layout:
        with open(args.export_layout, "w", encoding="utf-8") as fh:
            fh.write(layout_json(layout) + "\n")
    enumerate_all = args.enumerate or (args.distance <= 3 and not args.sample)
    mode = "enumerate" if enumerate_all else "sample"
    report = RunReport("inject", circuit.n, mode, kernels.BACKEND, seed=None if enumerate_all else args.seed)
    report.target = f"frame-corrected logical R_Z({theta})|+>"
    report.layout = layout.to_json()
    try:
        branches = run_extended(circuit, mode=mode, postselect=True, seed=args.seed)
    except PostSelectionRejected as exc:
        print(f"post-selection rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    t1 = time.perf_counter()
    ok = True
    for br in branches:
        rec_bits = br.bits()
        target = injection_target(circuit, layout, rec_bits, theta.radians)
        lf = check_logical_form(br.state, layout, rec_bits)
        rec = OutcomeRecord(
            [o.label for o in br.outcomes], [o.bit for o in br.outcomes], br.probability, br.state.trace(),
            fidelity=br.state.fidelity(target), logical_form=lf.to_json(),
        )
        ok &= lf.passed and abs(rec.fidelity - 1) <= 1e-9
        report.outcomes.append(rec)
    if args.oracle:
        ok &= _oracle_compare(circuit, branches, True, report, report.outcomes)
        if report.oracle.checked:
            dense = {
                tuple(b for _, b, _ in db.outcomes): db
                for db in run_dense(circuit, postselect=True, kind="vector")
            }
            for br, rec in zip(branches, report.outcomes):
                db = dense.get(br.key())
                if db is not None:
                    otarget = injection_target(circuit, layout, br.bits(), theta.radians, backend="oracle")
                    rec.oracle_fidelity = oracle_fidelity(db.state, otarget)
    t2 = time.perf_counter()
    if args.sweep_errors:
        cases = insert_error_sweep(circuit, layout, oracle=args.oracle and circuit.n <= matrix_limit())
        report.sweep = [c.to_json() for c in cases]
        ok &= all(c.agrees is not False for c in cases)
    t3 = time.perf_counter()
    if args.timing:
        report.timing = {"simulate": t1 - t0, "checks": t2 - t1, "sweep": t3 - t2}
    _emit(report, args.json)
    return EXIT_OK if ok else EXIT_ERROR


def _emit(report: RunReport, as_json: bool) -> None:
    print(report.dumps() if as_json else report.render())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="extstab", description="Extended stabilizer simulator for one non-Clifford gate.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a circuit file")
    s.add_argument("file")
    s.add_argument("--enumerate", action="store_true", help="explore every measurement outcome")
    s.add_argument("--postselect", action="store_true", help="honor postselect= fields")
    s.add_argument("--oracle", action="store_true", help="cross-check against the dense simulator")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--fidelity-qubit", type=int, default=None, help="report fidelity of this qubit with R_Z(theta)|+>")
    s.add_argument("--json", action="store_true")
    s.add_argument("--timing", action="store_true", help="include wall-clock timings (breaks bit-identical output)")
    s.set_defaults(func=cmd_simulate)

    j = sub.add_parser("inject", help="corner magic-state injection on the rotated surface code")
    j.add_argument("--distance", "-d", type=int, required=True, choices=(2, 3, 5))
    j.add_argument("--theta", default="pi/4", help="rotation angle, e.g. pi/4 or 0.3")
    j.add_argument("--sweep-errors", action="store_true", help="single-qubit Pauli error sweep")
    j.add_argument("--oracle", action="store_true")
    j.add_argument("--enumerate", action="store_true", help="enumerate all frames (default for d <= 3)")
    j.add_argument("--sample", action="store_true", help="follow one sampled branch")
    j.add_argument("--seed", type=int, default=0)
    j.add_argument("--export-layout", metavar="FILE")
    j.add_argument("--json", action="store_true")
    j.add_argument("--timing", action="store_true")
    j.set_defaults(func=cmd_inject)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CircuitParseError as exc:
        print(f"{getattr(args, 'file', '<input>')}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
    except (DenseLimitError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
