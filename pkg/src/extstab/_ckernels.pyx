# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of :mod:`extstab._pykernels`; same signatures, same results."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint8_t, int64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

GATE_CODES = {
    "I": 0, "H": 1, "S": 2, "SDG": 3, "X": 4, "Y": 5, "Z": 6,
    "CNOT": 7, "CZ": 8, "SWAP": 9,
}

BACKEND = "cython"


cdef inline int _phase(const uint64_t[:] x1, const uint64_t[:] z1,
                       const uint64_t[:] x2, const uint64_t[:] z2) nogil:
    cdef Py_ssize_t w
    cdef int64_t e = 0
    cdef uint64_t a, b, c, d
    for w in range(x1.shape[0]):
        a = x1[w]; b = z1[w]; c = x2[w]; d = z2[w]
        e += __builtin_popcountll(a & b) + __builtin_popcountll(c & d)
        e += 2 * __builtin_popcountll(b & c)
        e -= __builtin_popcountll((a ^ c) & (b ^ d))
    return <int>(((e % 4) + 4) % 4)


def omega_rows(const uint64_t[:, :] ax, const uint64_t[:, :] az,
               const uint64_t[:] bx, const uint64_t[:] bz):
    cdef Py_ssize_t m = ax.shape[0], nw = ax.shape[1], i, w
    cdef int acc
    out = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[:] o = out
    with nogil:
        for i in range(m):
            acc = 0
            for w in range(nw):
                acc += __builtin_popcountll((ax[i, w] & bz[w]) ^ (az[i, w] & bx[w]))
            o[i] = acc & 1
    return out


def mul_phase(const uint64_t[:] x1, const uint64_t[:] z1,
              const uint64_t[:] x2, const uint64_t[:] z2):
    return _phase(x1, z1, x2, z2)


def right_mul_rows(uint64_t[:, :] ax, uint64_t[:, :] az, sel,
                   const uint64_t[:] bx, const uint64_t[:] bz):
    cdef Py_ssize_t m = ax.shape[0], nw = ax.shape[1], i, w
    cdef const uint8_t[:] s = np.ascontiguousarray(sel, dtype=np.uint8)
    out = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[:] o = out
    with nogil:
        for i in range(m):
            if s[i]:
                o[i] = _phase(ax[i], az[i], bx, bz)
                for w in range(nw):
                    ax[i, w] ^= bx[w]
                    az[i, w] ^= bz[w]
    return out


def left_mul_rows(uint64_t[:, :] ax, uint64_t[:, :] az, sel,
                  const uint64_t[:] bx, const uint64_t[:] bz):
    cdef Py_ssize_t m = ax.shape[0], nw = ax.shape[1], i, w
    cdef const uint8_t[:] s = np.ascontiguousarray(sel, dtype=np.uint8)
    out = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[:] o = out
    with nogil:
        for i in range(m):
            if s[i]:
                o[i] = _phase(bx, bz, ax[i], az[i])
                for w in range(nw):
                    ax[i, w] ^= bx[w]
                    az[i, w] ^= bz[w]
    return out


def row_product(const uint64_t[:, :] ax, const uint64_t[:, :] az, sel):
    cdef Py_ssize_t m = ax.shape[0], nw = ax.shape[1], i, w
    cdef const uint8_t[:] s = np.ascontiguousarray(sel, dtype=np.uint8)
    x = np.zeros(nw, dtype=np.uint64)
    z = np.zeros(nw, dtype=np.uint64)
    cdef uint64_t[:] xv = x
    cdef uint64_t[:] zv = z
    cdef int e = 0
    with nogil:
        for i in range(m):
            if s[i]:
                e += _phase(xv, zv, ax[i], az[i])
                for w in range(nw):
                    xv[w] ^= ax[i, w]
                    zv[w] ^= az[i, w]
    return x, z, e % 4


def apply_gate(uint64_t[:, :] ax, uint64_t[:, :] az, int code, int a, int b=-1):
    cdef Py_ssize_t m = ax.shape[0], i
    cdef Py_ssize_t wa = a >> 6, wb = 0
    cdef uint64_t one = 1
    cdef uint64_t ba = one << (a & 63), bb = 0
    cdef uint64_t xa, za, xb, zb, f
    if code < 0 or code > 9:
        raise ValueError(f"unknown gate code {code}")
    if code >= 7:
        wb = b >> 6
        bb = one << (b & 63)
    out = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[:] o = out
    if code == 0:
        return out
    with nogil:
        for i in range(m):
            xa = (ax[i, wa] >> (a & 63)) & one
            za = (az[i, wa] >> (a & 63)) & one
            f = 0
            if code == 1:
                f = xa & za
                if xa != za:
                    ax[i, wa] ^= ba
                    az[i, wa] ^= ba
            elif code == 2:
                f = xa & za
                if xa:
                    az[i, wa] ^= ba
            elif code == 3:
                f = xa & (za ^ one)
                if xa:
                    az[i, wa] ^= ba
            elif code == 4:
                f = za
            elif code == 5:
                f = xa ^ za
            elif code == 6:
                f = xa
            else:
                xb = (ax[i, wb] >> (b & 63)) & one
                zb = (az[i, wb] >> (b & 63)) & one
                if code == 7:
                    f = xa & zb & (xb ^ za ^ one)
                    if xa:
                        ax[i, wb] ^= bb
                    if zb:
                        az[i, wa] ^= ba
                elif code == 8:
                    f = xa & xb & (za ^ zb)
                    if xb:
                        az[i, wa] ^= ba
                    if xa:
                        az[i, wb] ^= bb
                else:
                    if xa != xb:
                        ax[i, wa] ^= ba
                        ax[i, wb] ^= bb
                    if za != zb:
                        az[i, wa] ^= ba
                        az[i, wb] ^= bb
            o[i] = <uint8_t>f
    return out
