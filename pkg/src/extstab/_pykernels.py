"""Pure numpy implementations of the bit-packed Pauli kernels.

Every Pauli row is a pair of ``uint64`` word vectors ``(x, z)``; qubit ``q``
lives in word ``q >> 6`` at bit ``q & 63``. Rows use the letter convention:
``(x, z) = (1, 1)`` is the Hermitian ``Y``, so a product of rows carries an
``i**e`` phase that the kernels return as ``e mod 4``.

Gate codes are shared with :mod:`extstab._ckernels`; see ``GATE_CODES``.
"""

from __future__ import annotations

import numpy as np

GATE_CODES = {
    "I": 0, "H": 1, "S": 2, "SDG": 3, "X": 4, "Y": 5, "Z": 6,
    "CNOT": 7, "CZ": 8, "SWAP": 9,
}

BACKEND = "python"

_ONE = np.uint64(1)


def _pc(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).sum(axis=-1, dtype=np.int64)


def omega_rows(ax, az, bx, bz) -> np.ndarray:
    """Symplectic product of every row of ``(ax, az)`` with ``(bx, bz)``."""
    return (_pc((ax & bz) ^ (az & bx)) & 1).astype(np.uint8)


def mul_phase(x1, z1, x2, z2) -> int:
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    e = _pc(x1 & z1) + _pc(x2 & z2) + 2 * _pc(z1 & x2) - _pc(x3 & z3)
    return int(e) % 4


def _mul_phase_rows(ax, az, bx, bz) -> np.ndarray:
    x3 = ax ^ bx
    z3 = az ^ bz
    e = _pc(ax & az) + _pc(bx & bz) + 2 * _pc(az & bx) - _pc(x3 & z3)
    return e % 4


def right_mul_rows(ax, az, sel, bx, bz) -> np.ndarray:
    """``row <- row * b`` for selected rows, in place; returns phase exponents."""
    sel = np.asarray(sel, dtype=bool)
    out = np.zeros(ax.shape[0], dtype=np.uint8)
    if not sel.any():
        return out
    rx, rz = ax[sel], az[sel]
    out[sel] = _mul_phase_rows(rx, rz, bx, bz)
    ax[sel] = rx ^ bx
    az[sel] = rz ^ bz
    return out


def left_mul_rows(ax, az, sel, bx, bz) -> np.ndarray:
    """``row <- b * row`` for selected rows, in place; returns phase exponents."""
    sel = np.asarray(sel, dtype=bool)
    out = np.zeros(ax.shape[0], dtype=np.uint8)
    if not sel.any():
        return out
    rx, rz = ax[sel], az[sel]
    x3 = rx ^ bx
    z3 = rz ^ bz
    e = _pc(bx & bz) + _pc(rx & rz) + 2 * _pc(bz & rx) - _pc(x3 & z3)
    out[sel] = e % 4
    ax[sel] = x3
    az[sel] = z3
    return out


def row_product(ax, az, sel):
    """Ordered product of the selected rows (lowest index leftmost)."""
    w = ax.shape[1]
    x = np.zeros(w, dtype=np.uint64)
    z = np.zeros(w, dtype=np.uint64)
    e = 0
    for j in np.flatnonzero(sel):
        e += mul_phase(x, z, ax[j], az[j])
        x ^= ax[j]
        z ^= az[j]
    return x, z, e % 4


def _bit(a, q):
    return (a[:, q >> 6] >> np.uint64(q & 63)) & _ONE


def _flip(a, q, mask):
    a[:, q >> 6] ^= mask.astype(np.uint64) << np.uint64(q & 63)


def apply_gate(ax, az, code: int, a: int, b: int = -1) -> np.ndarray:
    """Conjugate every row by a Clifford gate in place; returns sign flips."""
    m = ax.shape[0]
    if code == 0:
        return np.zeros(m, dtype=np.uint8)
    xa, za = _bit(ax, a), _bit(az, a)
    if code == 1:
        flips = xa & za
        d = xa ^ za
        _flip(ax, a, d)
        _flip(az, a, d)
    elif code == 2:
        flips = xa & za
        _flip(az, a, xa)
    elif code == 3:
        flips = xa & (za ^ _ONE)
        _flip(az, a, xa)
    elif code == 4:
        flips = za
    elif code == 5:
        flips = xa ^ za
    elif code == 6:
        flips = xa
    else:
        xb, zb = _bit(ax, b), _bit(az, b)
        if code == 7:
            flips = xa & zb & (xb ^ za ^ _ONE)
            _flip(ax, b, xa)
            _flip(az, a, zb)
        elif code == 8:
            flips = xa & xb & (za ^ zb)
            _flip(az, a, xb)
            _flip(az, b, xa)
        elif code == 9:
            flips = np.zeros(m, dtype=np.uint64)
            dx = xa ^ xb
            dz = za ^ zb
            _flip(ax, a, dx)
            _flip(ax, b, dx)
            _flip(az, a, dz)
            _flip(az, b, dz)
        else:
            raise ValueError(f"unknown gate code {code}")
    return flips.astype(np.uint8)
