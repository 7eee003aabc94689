import json
import math

import pytest

from extstab.circuit import Gate, NonClifford
from extstab.pauli import PhasedPauli
from extstab.protocols import (
    SurfaceCodeLayout,
    build_412_injection,
    build_surface_injection,
    build_t_teleportation,
    check_logical_form,
    classify,
    code_412_target,
    injection_target,
    insert_error_sweep,
    layout_json,
    logical_frame,
    relabel_412,
    run_injection,
)
from extstab.runner import run_extended

OFF = 0.5 * math.sin(math.pi / 4)


def sparse(p):
    return p.sparse()


# teleportation -----------------------------------------------------------------


def test_teleportation_builder_shape():
    c = build_t_teleportation()
    assert len([i for i in c.instructions if isinstance(i, NonClifford)]) == 1
    assert [i.condition for i in c.instructions if isinstance(i, Gate) and i.condition] == ["alpha"]


def test_alpha1_branch_is_minus_rotation_on_y():
    [br] = run_extended(build_t_teleportation(), forced={"alpha": 1})
    st = br.state
    assert st.tab.stab(1) == PhasedPauli.parse("YI")
    z0 = PhasedPauli.parse("ZI")
    assert abs(st.coefficient_as(0, 1, z0) + 1j * OFF) < 1e-15
    assert abs(st.coefficient_as(1, 0, z0) - 1j * OFF) < 1e-15


# [[4,1,2]] ---------------------------------------------------------------------------


def test_412_code():
    layout = SurfaceCodeLayout(2)
    assert sorted(sparse(p.pauli) for p in layout.plaquettes) == ["X0*X1*X2*X3", "Z0*Z1", "Z2*Z3"]
    assert sparse(layout.logical_z) == "Z1*Z3" and sparse(layout.logical_x) == "X0*X1"
    assert layout.postselected() == []


def test_d2_is_412_after_relabeling():
    c, _ = build_surface_injection(2)
    assert relabel_412(c).instructions == build_412_injection().instructions


def test_412_logical_operators_in_every_frame():
    layout = SurfaceCodeLayout(2)
    for br in run_extended(build_412_injection()):
        st = br.state
        signs = st.tab.membership_signs(st.eps, layout.logical_x)
        assert sorted(signs.tolist()) == [-1, 1]
        assert st.coefficient_as(0, 1, layout.logical_z) is not None


def test_412_oracle_agreement():
    c, layout = build_surface_injection(2)
    _, rows = run_injection(c, layout, oracle=True)
    assert len(rows) == 8
    for r in rows:
        assert abs(r.fidelity - 1) < 1e-12 and abs(r.oracle_fidelity - 1) < 1e-12
        assert r.max_deviation < 1e-12 and abs(r.probability - r.oracle_probability) < 1e-12


def test_code_412_target_frames():
    t = code_412_target(math.pi / 4, 1, 0, 1)
    assert sorted(s.sparse() for s in t.stabilizers) == ["-X0*X1*X2*X3", "-Z0*Z1", "Z2*Z3"]


# layouts -----------------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 5])
def test_layout_invariants(d):
    layout = SurfaceCodeLayout(d)
    layout.check()
    assert len(layout.plaquettes) == d * d - 1
    for a in layout.plaquettes:
        assert all(a.pauli.commutes(b.pauli) for b in layout.plaquettes)
        assert a.pauli.commutes(layout.logical_x) and a.pauli.commutes(layout.logical_z)
    assert not layout.logical_x.commutes(layout.logical_z)
    assert layout.inits[layout.corner] == "psi"
    for q, (col, row) in enumerate(layout.coords):
        if q != layout.corner:
            assert layout.inits[q] == ("+" if row + col <= d - 1 else "0")


def test_unsupported_distance():
    with pytest.raises(ValueError):
        SurfaceCodeLayout(4)


def test_d5_matches_listed_generators():
    layout = SurfaceCodeLayout(5)
    assert [p.label for p in layout.reduced_z()] == ["Z0_1", "Z1_2_6_7", "Z2_3"]
    assert [p.label for p in layout.reduced_x()] == ["X8_9_13_14", "X14_19", "X18_19_23_24"]
    pre, post = layout.schedule()
    assert post[0].label == "Z3_4_8_9"
    assert [p.label for p in post if p.kind == "X"][0] == "X4_9"
    labels = {p.label for p in layout.plaquettes}
    assert {"Z13_14_18_19", "Z23_24", "X4_9", "X0_1_5_6"} <= labels
    assert sparse(layout.logical_x) == "X0*X1*X2*X3*X4"
    assert sparse(layout.logical_z) == "Z4*Z9*Z14*Z19*Z24"


def test_d3_postselection_set():
    layout = SurfaceCodeLayout(3)
    assert sorted(p.label for p in layout.postselected()) == ["X0_1_3_4", "X3_6", "Z7_8"]


def test_layout_export():
    data = json.loads(layout_json(SurfaceCodeLayout(3)))
    assert data["format"] == "extstab.layout/1" and data["distance"] == 3
    assert len(data["qubits"]) == 9 and data["corner"] == 2
    assert data["schedule"]["before_rotation"] == ["Z0_1", "X4_5_7_8"]
    assert "T" in SurfaceCodeLayout(3).render()


def test_injection_circuit_order():
    c, layout = build_surface_injection(3)
    kinds = [type(i).__name__ for i in c.instructions if type(i).__name__ != "Init"]
    assert kinds.index("NonClifford") == 2
    post = {p.label for p in layout.postselected()}
    assert {i.label for i in c.instructions if getattr(i, "postselect", None) == 0} == post


# logical form -----------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3])
def test_logical_form_every_frame(d):
    c, layout = build_surface_injection(d)
    for br in run_extended(c):
        rep = check_logical_form(br.state, layout, br.bits())
        assert rep.passed, str(rep)


def test_logical_form_d5_single_branch():
    c, layout = build_surface_injection(5)
    [br] = run_extended(c, mode="sample", seed=7)
    assert check_logical_form(br.state, layout).passed


def test_logical_form_fails_on_stray_x():
    c, layout = build_surface_injection(3)
    noisy = c.with_error(PhasedPauli.single(9, 0, "X"), "end")
    [br] = run_extended(noisy, mode="postselect")
    rep = check_logical_form(br.state, layout, br.bits())
    assert not rep.passed
    assert not rep.checks["plaquettes stabilize every branch"]


def test_full_logical_flip_keeps_form_but_not_state():
    # Z-bar commutes with every plaquette, so the structure survives while the state is orthogonal
    c, layout = build_surface_injection(3)
    [clean] = run_extended(c, mode="postselect")
    noisy = c.with_error(layout.logical_z, "end")
    [br] = run_extended(noisy, mode="postselect")
    assert br.bits() == clean.bits()
    assert check_logical_form(br.state, layout, br.bits()).passed
    target = injection_target(c, layout, clean.bits(), math.pi / 4)
    assert abs(clean.state.fidelity(target) - 1) < 1e-12
    assert br.state.fidelity(target) < 1e-12


def test_logical_form_fails_on_wrong_z_string():
    c, layout = build_surface_injection(3)
    [br] = run_extended(c, mode="postselect")
    wrong = PhasedPauli.from_sparse({2: "Z", 5: "Z"}, 9)
    rep = check_logical_form(br.state, layout, logical_z=wrong)
    assert not rep.passed and not rep.checks["off-diagonal is the logical Z"]


# frames and targets ------------------------------------------------------------


def test_frame_backends_agree():
    c, layout = build_surface_injection(3)
    for br in run_extended(c):
        rec = br.bits()
        assert logical_frame(c, layout, rec) == logical_frame(c, layout, rec, backend="oracle")


# error sweep -----------------------------------------------------------------


def test_classify():
    assert classify(0.0, None) == "rejected"
    assert classify(0.5, 1.0) == "ok"
    assert classify(0.5, 0.9) == "logical"


def test_sweep_examples_d3():
    c, layout = build_surface_injection(3)
    sweep = insert_error_sweep(c, layout, oracle=True, qubits=[0, 2, 8], positions=["Z1_2_4_5"])
    cases = {(k.error, k.position): k for k in sweep}
    # Z on the corner right after the rotation: classification agrees with the oracle
    corner_z = cases[("Z2", "Z1_2_4_5")]
    assert corner_z.agrees
    assert corner_z.status in ("rejected", "logical")
    # X on a |0> qubit of the top row flips the post-selected Z7_8 check
    assert cases[("X8", "Z1_2_4_5")].status == "rejected"
    # X on the X-bar support before the first post-rotation check is a logical fault
    assert cases[("X0", "Z1_2_4_5")].status == "logical"
    assert all(k.agrees for k in cases.values())


def test_no_error_is_accepted():
    c, layout = build_surface_injection(3)
    _, rows = run_injection(c, layout)
    assert rows and all(abs(r.fidelity - 1) < 1e-12 for r in rows)
    # the post-selected checks are deterministic without errors
    assert abs(sum(r.probability for r in rows) - 1) < 1e-12
