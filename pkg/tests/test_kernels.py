"""Both kernel backends must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from extstab import kernels
from extstab import _pykernels as py

BACKENDS = kernels.available_backends()


def _rows(rng, m, w):
    return rng.integers(0, 2**63, (m, w), dtype=np.uint64) * np.uint64(2) + rng.integers(0, 2, (m, w), dtype=np.uint64)


def _mask_to_qubits(a, n):
    """Zero bits beyond ``n`` so gate kernels see a valid register."""
    a = a.copy()
    tail = n & 63
    if tail:
        a[:, -1] &= np.uint64((1 << tail) - 1)
    return a


@pytest.fixture(params=sorted(BACKENDS))
def impl(request):
    return BACKENDS[request.param]


def test_fallback_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_gate_codes_shared(impl):
    assert impl.GATE_CODES == py.GATE_CODES


@pytest.mark.parametrize("n", [1, 7, 64, 65, 130])
def test_omega_and_phase(impl, n, rng):
    w = (n + 63) // 64
    ax, az = _mask_to_qubits(_rows(rng, 20, w), n), _mask_to_qubits(_rows(rng, 20, w), n)
    bx, bz = ax[3].copy(), az[5].copy()
    np.testing.assert_array_equal(impl.omega_rows(ax, az, bx, bz), py.omega_rows(ax, az, bx, bz))
    for j in range(20):
        assert impl.mul_phase(ax[j], az[j], bx, bz) == py.mul_phase(ax[j], az[j], bx, bz)


@pytest.mark.parametrize("n", [3, 64, 100])
def test_row_multiplication(impl, n, rng):
    w = (n + 63) // 64
    ax, az = _mask_to_qubits(_rows(rng, 12, w), n), _mask_to_qubits(_rows(rng, 12, w), n)
    bx, bz = _mask_to_qubits(_rows(rng, 1, w), n)[0], _mask_to_qubits(_rows(rng, 1, w), n)[0]
    sel = rng.integers(0, 2, 12).astype(bool)
    for name in ("right_mul_rows", "left_mul_rows"):
        a1 = (ax.copy(), az.copy())
        a2 = (ax.copy(), az.copy())
        e1 = getattr(impl, name)(a1[0], a1[1], sel, bx, bz)
        e2 = getattr(py, name)(a2[0], a2[1], sel, bx, bz)
        np.testing.assert_array_equal(e1, e2)
        np.testing.assert_array_equal(a1[0], a2[0])
        np.testing.assert_array_equal(a1[1], a2[1])
    x1, z1, e1 = impl.row_product(ax, az, sel)
    x2, z2, e2 = py.row_product(ax, az, sel)
    np.testing.assert_array_equal(x1, x2)
    np.testing.assert_array_equal(z1, z2)
    assert e1 == e2


@pytest.mark.parametrize("code", range(10))
def test_apply_gate(impl, code, rng):
    n = 70
    w = 2
    ax, az = _mask_to_qubits(_rows(rng, 16, w), n), _mask_to_qubits(_rows(rng, 16, w), n)
    targets = (65, 3) if code >= 7 else (65,)
    a1 = (ax.copy(), az.copy())
    a2 = (ax.copy(), az.copy())
    f1 = impl.apply_gate(a1[0], a1[1], code, *targets)
    f2 = py.apply_gate(a2[0], a2[1], code, *targets)
    np.testing.assert_array_equal(np.asarray(f1, dtype=np.uint8), np.asarray(f2, dtype=np.uint8))
    np.testing.assert_array_equal(a1[0], a2[0])
    np.testing.assert_array_equal(a1[1], a2[1])


def test_env_var_forces_fallback():
    code = "import extstab.kernels as k; print(k.BACKEND)"
    env = {**os.environ, "EXTSTAB_KERNELS": "python"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
