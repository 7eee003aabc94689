"""Size limits for dense (2**n) materialisation.

``EXTSTAB_DENSE_LIMIT`` overrides the density-matrix limit; state vectors are
allowed three more qubits than density matrices.
"""

from __future__ import annotations

import os

DEFAULT_MATRIX_QUBITS = 9


def matrix_limit() -> int:
    return int(os.environ.get("EXTSTAB_DENSE_LIMIT", DEFAULT_MATRIX_QUBITS))


def vector_limit() -> int:
    return matrix_limit() + 3


class DenseLimitError(ValueError):
    """Raised when a dense object would exceed the configured qubit limit."""


def check_matrix(n: int) -> None:
    if n > matrix_limit():
        raise DenseLimitError(f"{n} qubits exceeds dense matrix limit {matrix_limit()}")


def check_vector(n: int) -> None:
    if n > vector_limit():
        raise DenseLimitError(f"{n} qubits exceeds dense vector limit {vector_limit()}")
