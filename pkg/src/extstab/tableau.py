"""Unsigned stabilizer/destabilizer tableau shared by all decomposition branches.

The ``nu`` branches of an extended state differ only in the signs of their
generators, so the tableau stores each generator once, without a sign, and a
separate ``(nu, r)`` bit array ``eps`` holds the signs: ``eps[k, j] == 1``
means generator ``j`` enters branch ``k`` as ``-g_j``. Every structural
rewrite (Clifford conjugation, re-multiplying generators by a pivot) is
sign-independent and therefore applied once for all branches.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from . import kernels
from .pauli import PhasedPauli, _check_targets, _words, canonical_gate

INIT_BASES = ("0", "+", "Y")

# stabilizer / destabilizer letters per initial single-qubit state
_INIT_ROWS = {"0": ("Z", "X"), "+": ("X", "Z"), "Y": ("Y", "Z")}


class TableauError(ValueError):
    """A tableau precondition or invariant does not hold."""


class GeneratorTableau:
    """``r = n`` unsigned stabilizer generators with paired destabilizers.

    Rows are bit-packed: ``sx[j]``/``sz[j]`` are the X/Z words of generator
    ``j`` and ``dx[j]``/``dz[j]`` those of its destabilizer.
    """

    def __init__(self, n: int, sx, sz, dx, dz):
        self.n = n
        self.sx = np.ascontiguousarray(sx, dtype=np.uint64)
        self.sz = np.ascontiguousarray(sz, dtype=np.uint64)
        self.dx = np.ascontiguousarray(dx, dtype=np.uint64)
        self.dz = np.ascontiguousarray(dz, dtype=np.uint64)
        shape = (n, _words(n))
        for a in (self.sx, self.sz, self.dx, self.dz):
            if a.shape != shape:
                raise TableauError(
                    f"tableau rows must have shape {shape}, got {a.shape}; "
                    "mixed states (fewer generators than qubits) are not supported"
                )

    @classmethod
    def from_basis(cls, n: int, inits: Sequence[str] | None = None) -> GeneratorTableau:
        inits = list(inits) if inits is not None else ["0"] * n
        if len(inits) != n:
            raise TableauError(f"need {n} initial states, got {len(inits)}")
        w = _words(n)
        rows = [np.zeros((n, w), dtype=np.uint64) for _ in range(4)]
        sx, sz, dx, dz = rows
        for q, basis in enumerate(inits):
            if basis not in _INIT_ROWS:
                raise TableauError(f"unknown initial state {basis!r} on qubit {q}")
            s_letter, d_letter = _INIT_ROWS[basis]
            bit = np.uint64(1) << np.uint64(q & 63)
            for letter, ax, az in ((s_letter, sx, sz), (d_letter, dx, dz)):
                if letter in "XY":
                    ax[q, q >> 6] |= bit
                if letter in "ZY":
                    az[q, q >> 6] |= bit
        return cls(n, sx, sz, dx, dz)

    @classmethod
    def from_generators(cls, stabs: Sequence[PhasedPauli], destabs: Sequence[PhasedPauli]) -> GeneratorTableau:
        n = stabs[0].n
        t = cls(
            n,
            np.array([p.x for p in stabs]),
            np.array([p.z for p in stabs]),
            np.array([p.x for p in destabs]),
            np.array([p.z for p in destabs]),
        )
        t.check_invariants()
        return t

    @property
    def r(self) -> int:
        return self.n

    def copy(self) -> GeneratorTableau:
        return GeneratorTableau(self.n, self.sx.copy(), self.sz.copy(), self.dx.copy(), self.dz.copy())

    def stab(self, j: int) -> PhasedPauli:
        return PhasedPauli(self.n, self.sx[j], self.sz[j])

    def destab(self, j: int) -> PhasedPauli:
        return PhasedPauli(self.n, self.dx[j], self.dz[j])

    def stabs(self) -> list[PhasedPauli]:
        return [self.stab(j) for j in range(self.n)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeneratorTableau):
            return NotImplemented
        return self.n == other.n and all(
            np.array_equal(a, b)
            for a, b in zip((self.sx, self.sz, self.dx, self.dz), (other.sx, other.sz, other.dx, other.dz))
        )

    # invariants -------------------------------------------------------

    def _omega_matrix(self, ax, az, bx, bz) -> np.ndarray:
        return np.array([kernels.omega_rows(ax, az, bx[j], bz[j]) for j in range(len(bx))]).T

    def check_invariants(self) -> None:
        """Raise :class:`TableauError` unless the tableau is a symplectic basis."""
        ss = self._omega_matrix(self.sx, self.sz, self.sx, self.sz)
        if ss.any():
            raise TableauError("stabilizer generators do not commute")
        ds = self._omega_matrix(self.dx, self.dz, self.sx, self.sz)
        if not np.array_equal(ds, np.eye(self.n, dtype=ds.dtype)):
            raise TableauError("destabilizer pairing broken")
        if _gf2_rank(np.hstack([self.unpacked_x(), self.unpacked_z()])) != self.n:
            raise TableauError("stabilizer generators are dependent")

    def unpacked_x(self) -> np.ndarray:
        return np.array([self.stab(j).xbits() for j in range(self.n)], dtype=np.uint8)

    def unpacked_z(self) -> np.ndarray:
        return np.array([self.stab(j).zbits() for j in range(self.n)], dtype=np.uint8)

    # queries ----------------------------------------------------------

    def anticommuting(self, p: PhasedPauli) -> np.ndarray:
        """Bit per generator: 1 where the generator anticommutes with ``p``."""
        return kernels.omega_rows(self.sx, self.sz, p.x, p.z)

    def decompose(self, x: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, int] | None:
        """Express the letter string ``(x, z)`` as an ordered generator product.

        Returns ``(mask, e)`` with ``prod_{j in mask} g_j = i**e sigma(x, z)``,
        or ``None`` when the string is not in the (unsigned) group.
        """
        if kernels.omega_rows(self.sx, self.sz, x, z).any():
            return None
        mask = kernels.omega_rows(self.dx, self.dz, x, z)
        px, pz, e = kernels.row_product(self.sx, self.sz, mask)
        if not (np.array_equal(px, x) and np.array_equal(pz, z)):
            raise TableauError("destabilizer decomposition failed; tableau corrupted")
        return mask, e

    def member_factors(self, eps: np.ndarray, x, z, s: int = 0) -> np.ndarray | None:
        """Per-branch eigenvalue of ``i**s sigma(x, z)`` on each branch state.

        The result is complex (``i**t`` times a sign) so that non-Hermitian
        products can be traced too; ``None`` means the operator is not in the
        group and has zero expectation on every branch.
        """
        dec = self.decompose(x, z)
        if dec is None:
            return None
        mask, e = dec
        parity = (eps.astype(np.int64) @ mask.astype(np.int64)) & 1
        t = (s - e) % 4
        return (1j ** t) * (1 - 2 * parity)

    def membership_with_sign(self, eps_k: np.ndarray, p: PhasedPauli) -> int | None:
        """Sign ``+1``/``-1`` with which Hermitian ``p`` stabilizes branch ``eps_k``.

        ``None`` when ``p`` (up to sign) is not in the stabilizer group.
        """
        signs = self.membership_signs(np.asarray(eps_k)[None, :], p)
        return None if signs is None else int(signs[0])

    def membership_signs(self, eps: np.ndarray, p: PhasedPauli) -> np.ndarray | None:
        if not p.is_hermitian():
            raise TableauError(f"{p} is not Hermitian")
        f = self.member_factors(eps, p.x, p.z, p.s)
        if f is None:
            return None
        return np.rint(f.real).astype(np.int64)

    def membership_slow(self, eps_k: np.ndarray, p: PhasedPauli) -> int | None:
        """Same contract as :meth:`membership_with_sign` via GF(2) elimination.

        Ignores the destabilizers entirely; kept for differential testing.
        """
        if not p.is_hermitian():
            raise TableauError(f"{p} is not Hermitian")
        a = np.hstack([self.unpacked_x(), self.unpacked_z()]).T  # (2n, r)
        b = np.concatenate([p.xbits(), p.zbits()])
        coeffs = _gf2_solve(a, b)
        if coeffs is None:
            return None
        acc = PhasedPauli.identity(self.n)
        for j in np.flatnonzero(coeffs):
            g = self.stab(j)
            if eps_k[j]:
                g = -g
            acc = acc * g
        # acc equals p up to the sign we are after
        ratio = (p.s - acc.s) % 4
        if ratio % 2:
            raise TableauError("generator product is not Hermitian")
        return 1 if ratio == 0 else -1

    # mutations --------------------------------------------------------

    def conjugate_all(self, eps: np.ndarray, gate: str, targets: Sequence[int]) -> None:
        """Conjugate every row by a Clifford gate; sign flips land in ``eps``."""
        name = canonical_gate(gate)
        targets = _check_targets(name, targets, self.n)
        code = kernels.GATE_CODES[name]
        flips = kernels.apply_gate(self.sx, self.sz, code, *targets)
        kernels.apply_gate(self.dx, self.dz, code, *targets)
        eps ^= flips[None, :]

    def apply_pauli(self, eps: np.ndarray, p: PhasedPauli) -> None:
        """Conjugate by a Pauli operator: flips signs of anticommuting rows."""
        eps ^= self.anticommuting(p)[None, :]

    def rewrite_anticommuting(self, eps: np.ndarray, q: PhasedPauli, pivot: int | None = None) -> int:
        """Leave exactly one generator (returned) anticommuting with ``q``.

        Every other anticommuting generator ``g_j`` becomes ``g_pivot g_j``;
        branch signs follow, and the pivot's destabilizer absorbs the
        destabilizers of the rewritten rows so the pairing survives.
        """
        anti = self.anticommuting(q).astype(bool)
        if not anti.any():
            raise TableauError(f"{q} commutes with every generator")
        if pivot is None:
            pivot = int(np.flatnonzero(anti)[0])
        elif not anti[pivot]:
            raise TableauError(f"pivot {pivot} commutes with {q}")
        others = anti.copy()
        others[pivot] = False
        if others.any():
            gx, gz = self.sx[pivot].copy(), self.sz[pivot].copy()
            phases = kernels.left_mul_rows(self.sx, self.sz, others, gx, gz)
            # commuting Hermitian rows multiply to a real sign: e in {0, 2}
            eps[:, others] ^= eps[:, [pivot]] ^ (phases[others] >> 1).astype(eps.dtype)[None, :]
            dpx, dpz, _ = kernels.row_product(self.dx, self.dz, others)
            self.dx[pivot] ^= dpx
            self.dz[pivot] ^= dpz
        return pivot

    def replace_pivot(self, eps: np.ndarray, pivot: int, q: PhasedPauli, bit: int) -> None:
        """Swap the pivot generator for measured ``q`` with outcome sign ``(-1)**bit``.

        Destabilizers anticommuting with ``q`` are re-multiplied by the old
        pivot, which then becomes the pivot's destabilizer.
        """
        gx, gz = self.sx[pivot].copy(), self.sz[pivot].copy()
        anti_d = kernels.omega_rows(self.dx, self.dz, q.x, q.z).astype(bool)
        anti_d[pivot] = False
        if anti_d.any():
            kernels.left_mul_rows(self.dx, self.dz, anti_d, gx, gz)
        self.dx[pivot] = gx
        self.dz[pivot] = gz
        self.sx[pivot] = q.x
        self.sz[pivot] = q.z
        eps[:, pivot] = bit ^ (q.s >> 1)

    # output -----------------------------------------------------------

    def dump(self, eps: np.ndarray | None = None) -> str:
        """One generator per line in sparse form, then one sign column per branch."""
        eps = np.zeros((1, self.n), dtype=np.uint8) if eps is None else eps
        names = [self.stab(j).sparse() for j in range(self.n)]
        width = max(len(s) for s in names)
        header = "#".ljust(width) + "  " + " ".join(f"k{k}" for k in range(eps.shape[0]))
        lines = [header]
        for j, name in enumerate(names):
            cols = " ".join(("-" if eps[k, j] else "+").ljust(len(f"k{k}")) for k in range(eps.shape[0]))
            lines.append(f"{name.ljust(width)}  {cols}".rstrip())
        return "\n".join(lines)


def _gf2_rank(m: np.ndarray) -> int:
    m = m.copy() % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = np.flatnonzero(m[rank:, c])
        if piv.size == 0:
            continue
        p = rank + piv[0]
        m[[rank, p]] = m[[p, rank]]
        hit = np.flatnonzero(m[:, c])
        hit = hit[hit != rank]
        m[hit] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve ``a @ c = b`` over GF(2); ``None`` if inconsistent."""
    aug = np.hstack([a % 2, (b % 2)[:, None]]).astype(np.uint8)
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        piv = np.flatnonzero(aug[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        aug[[r, p]] = aug[[p, r]]
        hit = np.flatnonzero(aug[:, c])
        hit = hit[hit != r]
        aug[hit] ^= aug[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if aug[r:, -1].any():
        return None
    sol = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        sol[c] = aug[i, -1]
    return sol
