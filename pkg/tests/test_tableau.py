import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extstab.pauli import PhasedPauli
from extstab.tableau import GeneratorTableau, TableauError

from .strategies import ONE_QUBIT, TWO_QUBIT, gates, seeds

P = PhasedPauli.parse


def tab_of(stabs, destabs):
    return GeneratorTableau.from_generators([P(s) for s in stabs], [P(d) for d in destabs])


def random_tableau(rng, n):
    tab = GeneratorTableau.from_basis(n, ["0+Y"[i] for i in rng.integers(0, 3, n)])
    eps = np.zeros((1, n), np.uint8)
    for _ in range(4 * n):
        if n > 1 and rng.random() < 0.5:
            a, b = rng.choice(n, 2, replace=False)
            tab.conjugate_all(eps, TWO_QUBIT[rng.integers(3)], [int(a), int(b)])
        else:
            tab.conjugate_all(eps, ONE_QUBIT[rng.integers(6)], [int(rng.integers(n))])
    return tab


def random_member(rng, tab):
    """A random group element (unsigned product of generators) and its subset."""
    mask = rng.integers(0, 2, tab.n).astype(bool)
    acc = PhasedPauli.identity(tab.n)
    for j in np.flatnonzero(mask):
        acc = acc * tab.stab(j)
    return acc, mask


def signed_group(tab, eps_k):
    """Every signed element of the branch group, by explicit subset products."""
    out = set()
    gens = [-g if eps_k[j] else g for j, g in enumerate(tab.stabs())]
    for bits in itertools.product((0, 1), repeat=tab.n):
        acc = PhasedPauli.identity(tab.n)
        for b, g in zip(bits, gens):
            if b:
                acc = acc * g
        out.add((acc.letters(), acc.s))
    return out


def enumerate_sign(tab, eps_k, p):
    """Membership by brute force over all subsets."""
    group = signed_group(tab, eps_k)
    if (p.letters(), p.s) in group:
        return 1
    if (p.letters(), (p.s + 2) % 4) in group:
        return -1
    return None


# construction ----------------------------------------------------------------


def test_from_basis():
    t = GeneratorTableau.from_basis(3, ["+", "0", "Y"])
    assert [g.letters() for g in t.stabs()] == ["XII", "IZI", "IIY"]
    t.check_invariants()


def test_mixed_state_rejected():
    with pytest.raises(TableauError):
        GeneratorTableau(2, np.zeros((1, 1), np.uint64), np.zeros((1, 1), np.uint64),
                         np.zeros((1, 1), np.uint64), np.zeros((1, 1), np.uint64))


def test_invariant_violations_detected():
    with pytest.raises(TableauError):
        tab_of(["XI", "ZI"], ["ZI", "XI"])  # anticommuting generators
    with pytest.raises(TableauError):
        tab_of(["XI", "IZ"], ["XI", "IX"])  # broken pairing
    with pytest.raises(TableauError):
        GeneratorTableau.from_basis(1, ["1"])


# conjugate_all -------------------------------------------------------------------


def test_hadamard_swaps_x_and_z():
    t = tab_of(["X"], ["Z"])
    eps = np.array([[0], [1]], np.uint8)
    t.conjugate_all(eps, "H", [0])
    assert t.stab(0) == P("Z")
    np.testing.assert_array_equal(eps, [[0], [1]])


def test_pauli_gate_flips_every_branch():
    t = tab_of(["X"], ["Z"])
    eps = np.array([[0], [1]], np.uint8)
    t.conjugate_all(eps, "Z", [0])
    assert t.stab(0) == P("X")
    np.testing.assert_array_equal(eps, [[1], [0]])


def test_cnot_on_bell_generators():
    # frozen from the 2-qubit dense conjugation CNOT (XX, ZZ) CNOT
    t = tab_of(["XX", "ZZ"], ["ZI", "XI"])
    eps = np.zeros((1, 2), np.uint8)
    t.conjugate_all(eps, "CNOT", [0, 1])
    assert [g.letters() for g in t.stabs()] == ["XI", "IZ"]
    assert not eps.any()


# membership ------------------------------------------------------------------


def test_membership_examples():
    t = tab_of(["Z"], ["X"])
    assert t.membership_with_sign(np.array([0]), P("Z")) == 1
    assert t.membership_with_sign(np.array([0]), P("X")) is None
    # {Z0Z1, Z1Z2, X0X1X2}: Z0Z2 is rows 0 and 1, sign (-1)^1 (-1)^0
    t3 = tab_of(["ZZI", "IZZ", "XXX"], ["XII", "IIX", "ZII"])
    assert t3.membership_with_sign(np.array([1, 0, 0]), P("ZIZ")) == -1
    assert t3.membership_slow(np.array([1, 0, 0]), P("ZIZ")) == -1
    assert enumerate_sign(t3, [1, 0, 0], P("ZIZ")) == -1


def test_membership_rejects_non_hermitian():
    t = tab_of(["Z"], ["X"])
    with pytest.raises(TableauError):
        t.membership_with_sign(np.array([0]), P("iZ"))
    with pytest.raises(TableauError):
        t.membership_slow(np.array([0]), P("iZ"))


def test_y_generator_sign():
    t = GeneratorTableau.from_basis(1, ["Y"])
    assert t.membership_with_sign(np.array([0]), P("Y")) == 1
    assert t.membership_with_sign(np.array([1]), P("-Y")) == 1


@given(seeds(), st.integers(1, 6))
def test_membership_matches_enumeration(rng, n):
    tab = random_tableau(rng, n)
    eps_k = rng.integers(0, 2, n).astype(np.uint8)
    for _ in range(10):
        if rng.random() < 0.7:
            p, _ = random_member(rng, tab)
            p = p.with_phase(p.s + 2 * int(rng.integers(2)))
            if not p.is_hermitian():
                p = p.with_phase(p.s + 1)
        else:
            p = PhasedPauli.from_letters("".join(rng.choice(list("IXYZ"), n)), 2 * int(rng.integers(2)))
        want = enumerate_sign(tab, eps_k, p)
        assert tab.membership_with_sign(eps_k, p) == want
        assert tab.membership_slow(eps_k, p) == want


def test_membership_many_random_cases():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        tab = random_tableau(rng, n)
        eps_k = rng.integers(0, 2, n).astype(np.uint8)
        p = PhasedPauli.from_letters("".join(rng.choice(list("IXYZ"), n)), 2 * int(rng.integers(2)))
        if rng.random() < 0.6:
            m, _ = random_member(rng, tab)
            p = m if m.is_hermitian() else m.with_phase(m.s + 1)
        assert tab.membership_with_sign(eps_k, p) == tab.membership_slow(eps_k, p)


# rewrite ---------------------------------------------------------------------


def test_rewrite_examples():
    t = tab_of(["XI", "IX"], ["ZI", "IZ"])
    eps = np.zeros((1, 2), np.uint8)
    assert t.rewrite_anticommuting(eps, P("ZZ")) == 0
    assert [g.letters() for g in t.stabs()] == ["XI", "XX"]
    t.check_invariants()

    t = tab_of(["X"], ["Z"])
    assert t.rewrite_anticommuting(np.zeros((1, 1), np.uint8), P("Z")) == 0
    assert t.stab(0) == P("X")

    t = tab_of(["XX", "ZZ"], ["ZI", "XI"])
    before = t.anticommuting(P("XI"))
    np.testing.assert_array_equal(before, [0, 1])
    assert t.rewrite_anticommuting(np.zeros((1, 2), np.uint8), P("XI")) == 1
    assert t.stab(0) == P("XX")
    np.testing.assert_array_equal(t.anticommuting(P("XI")), [0, 1])


def test_rewrite_errors():
    t = tab_of(["XI", "IX"], ["ZI", "IZ"])
    with pytest.raises(TableauError):
        t.rewrite_anticommuting(np.zeros((1, 2), np.uint8), P("XX"))
    with pytest.raises(TableauError):
        t.rewrite_anticommuting(np.zeros((1, 2), np.uint8), P("ZI"), pivot=1)


@given(seeds(), st.integers(1, 6))
def test_rewrite_preserves_group(rng, n):
    tab = random_tableau(rng, n)
    eps = rng.integers(0, 2, (2, n)).astype(np.uint8)
    q = PhasedPauli.from_letters("".join(rng.choice(list("IXYZ"), n)))
    anti = np.flatnonzero(tab.anticommuting(q))
    if not len(anti):
        return
    before = [signed_group(tab, eps[k]) for k in range(2)]
    pivot = int(rng.choice(anti))
    got = tab.rewrite_anticommuting(eps, q, pivot)
    assert got == pivot
    tab.check_invariants()
    assert np.flatnonzero(tab.anticommuting(q)).tolist() == [pivot]
    assert [signed_group(tab, eps[k]) for k in range(2)] == before


@given(seeds(), st.integers(1, 6), st.integers(0, 1))
def test_replace_pivot_keeps_invariants(rng, n, bit):
    tab = random_tableau(rng, n)
    eps = rng.integers(0, 2, (2, n)).astype(np.uint8)
    q = PhasedPauli.from_letters("".join(rng.choice(list("IXYZ"), n)), 2 * int(rng.integers(2)))
    if not tab.anticommuting(q).any():
        return
    p = tab.rewrite_anticommuting(eps, q)
    tab.replace_pivot(eps, p, q, bit)
    tab.check_invariants()
    want = (-1) ** bit
    assert all(tab.membership_with_sign(eps[k], q) == want for k in range(2))


@given(seeds(), st.integers(1, 6), st.data())
def test_conjugate_all_keeps_invariants_and_group(rng, n, data):
    tab = random_tableau(rng, n)
    eps = rng.integers(0, 2, (2, n)).astype(np.uint8)
    g, t = data.draw(gates(n))

    def conj(item):
        p = PhasedPauli.from_letters(*item).conjugate(g, t)
        return p.letters(), p.s

    before = [{conj(item) for item in signed_group(tab, eps[k])} for k in range(2)]
    tab.conjugate_all(eps, g, t)
    tab.check_invariants()
    assert [signed_group(tab, eps[k]) for k in range(2)] == before


def test_dump_format():
    t = tab_of(["XX", "ZZ"], ["ZI", "XI"])
    eps = np.array([[0, 1], [1, 1]], np.uint8)
    lines = t.dump(eps).splitlines()
    assert lines[0].split() == ["#", "k0", "k1"]
    assert lines[1].split() == ["X0*X1", "+", "-"]
    assert lines[2].split() == ["Z0*Z1", "-", "-"]
