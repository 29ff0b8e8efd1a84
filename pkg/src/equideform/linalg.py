"""Dense linear algebra over F_p by exact Gaussian elimination."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import check_prime


def _as_mod(A, p: int) -> np.ndarray:
    return np.array(A, dtype=np.int64, ndmin=2) % p


def rref(A, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p and the pivot columns."""
    R = _as_mod(A, p).copy()
    m, n = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.flatnonzero(R[row:, col])
        if len(nz) == 0:
            continue
        r = row + int(nz[0])
        if r != row:
            R[[row, r]] = R[[r, row]]
        R[row] = (R[row] * pow(int(R[row, col]), -1, p)) % p
        f = R[:, col].copy()
        f[row] = 0
        hit = np.flatnonzero(f)
        if len(hit):
            R[hit] = (R[hit] - np.outer(f[hit], R[row])) % p
        pivots.append(col)
        row += 1
    return R, pivots


def rank(A, p: int) -> int:
    A = _as_mod(A, p)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def nullspace(A, p: int) -> np.ndarray:
    """Basis of ``{v : A v = 0}`` as the columns of the returned matrix."""
    A = _as_mod(A, p)
    m, n = A.shape
    R, pivots = rref(A, p)
    free = [j for j in range(n) if j not in set(pivots)]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for k, j in enumerate(free):
        basis[j, k] = 1
        for i, pc in enumerate(pivots):
            basis[pc, k] = (-R[i, j]) % p
    return basis


def solve(A, b, p: int) -> np.ndarray | None:
    """One solution of ``A v = b`` (free variables zero), or ``None``."""
    A = _as_mod(A, p)
    m, n = A.shape
    b = np.array(b, dtype=np.int64).reshape(m, 1) % p
    R, pivots = rref(np.hstack([A, b]), p)
    if n in pivots:
        return None
    v = np.zeros(n, dtype=np.int64)
    for i, pc in enumerate(pivots):
        v[pc] = R[i, n]
    return v


@dataclass(frozen=True, eq=False)
class FpMatrix:
    entries: np.ndarray
    p: int

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "entries", _as_mod(self.entries, self.p))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def rank(self) -> int:
        return rank(self.entries, self.p)

    def nullspace(self) -> np.ndarray:
        return nullspace(self.entries, self.p)

    def solve(self, b) -> np.ndarray | None:
        return solve(self.entries, b, self.p)

    def __matmul__(self, other):
        if isinstance(other, FpMatrix):
            return FpMatrix(matmul_mod(self.entries, other.entries, self.p), self.p)
        return matmul_mod(self.entries, np.asarray(other, dtype=np.int64), self.p)


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """``A @ B mod p`` for residue matrices, exact for any size."""
    k = A.shape[-1]
    if (p - 1) ** 2 * k < 2**62:
        return (A @ B) % p
    return np.array((A.astype(object) @ B.astype(object)) % p, dtype=np.int64)
