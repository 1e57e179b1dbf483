"""Dense complex linear algebra for small Hilbert spaces.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.
Every constructor here returns a read-only array, so values can be shared
between threads without copying.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

ATOL = 1e-12
MAX_DIM = 128


class DimensionError(ValueError):
    """Operand shapes are incompatible or exceed the dimension cap."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_matrix(m, max_dim: int = MAX_DIM) -> np.ndarray:
    """Validate ``m`` as a finite complex matrix and return a frozen copy."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    if max(a.shape) > max_dim:
        raise DimensionError(f"dimension {max(a.shape)} exceeds cap {max_dim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return _freeze(a)


def as_vector(v, max_dim: int = MAX_DIM) -> np.ndarray:
    """Validate ``v`` as a finite complex vector and return a frozen copy."""
    a = np.array(v, dtype=np.complex128)
    if a.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {a.shape}")
    if a.size > max_dim:
        raise DimensionError(f"dimension {a.size} exceeds cap {max_dim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return _freeze(a)


def ket(*amplitudes) -> np.ndarray:
    return as_vector(amplitudes)


def identity(d: int) -> np.ndarray:
    return _freeze(np.eye(d, dtype=np.complex128))


def kron(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise DimensionError("kron needs two vectors or two matrices")
    if a.ndim == 1:
        if a.size * b.size > max_dim:
            raise DimensionError(f"product dimension {a.size * b.size} exceeds cap {max_dim}")
        return _freeze(np.kron(a, b))
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise DimensionError(f"product dimension {max(rows, cols)} exceeds cap {max_dim}")
    return _freeze(np.kron(a, b))


def dagger(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    return _freeze(m.conj().T.copy())


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return _freeze(a @ b)


def trace(m) -> complex:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"trace of non-square shape {m.shape}")
    return complex(np.trace(m))


def inner(v, w) -> complex:
    """``<v|w>``, conjugate-linear in ``v``."""
    v = np.asarray(v)
    w = np.asarray(w)
    if v.shape != w.shape:
        raise DimensionError(f"inner product of {v.shape} and {w.shape}")
    return complex(np.vdot(v, w))


def outer(v, w) -> np.ndarray:
    """``|v><w|``."""
    return _freeze(np.outer(np.asarray(v), np.conj(np.asarray(w))))


def projector(v) -> np.ndarray:
    """Rank-1 projector onto the normalised direction of ``v``."""
    v = np.asarray(v, dtype=np.complex128)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot project onto the zero vector")
    return outer(v / n, v / n)


def scale(c: complex, m) -> np.ndarray:
    return _freeze(c * np.asarray(m, dtype=np.complex128))


def add(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}")
    return _freeze(a + b)


def partial_trace(rho, dims: Sequence[int], keep: str) -> np.ndarray:
    """Trace out one half of a bipartite operator.

    ``dims`` is ``(dA, dB)`` and ``keep`` is ``"A"`` or ``"B"``.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    da, db = dims
    if rho.shape != (da * db, da * db):
        raise DimensionError(f"shape {rho.shape} does not match dims {tuple(dims)}")
    t = rho.reshape(da, db, da, db)
    if keep == "A":
        return _freeze(np.einsum("ijkj->ik", t))
    if keep == "B":
        return _freeze(np.einsum("ijil->jl", t))
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_transpose(rho, dims: Sequence[int]) -> np.ndarray:
    """Transpose the second factor of a bipartite operator."""
    rho = np.asarray(rho, dtype=np.complex128)
    da, db = dims
    if rho.shape != (da * db, da * db):
        raise DimensionError(f"shape {rho.shape} does not match dims {tuple(dims)}")
    t = rho.reshape(da, db, da, db).transpose(0, 3, 2, 1)
    return _freeze(t.reshape(da * db, da * db).copy())


def hermitian_eigvals(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def is_hermitian(m, atol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= atol)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return _freeze(q * ph)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return _freeze(rho / np.trace(rho).real)


# Single-qubit constants used throughout.
ZERO = ket(1, 0)
ONE = ket(0, 1)
PLUS = ket(1 / np.sqrt(2), 1 / np.sqrt(2))
MINUS = ket(1 / np.sqrt(2), -1 / np.sqrt(2))
I2 = identity(2)
PAULI_Z = as_matrix([[1, 0], [0, -1]])
PAULI_Y = as_matrix([[0, -1j], [1j, 0]])
