"""Dense exact linear algebra over the prime field GF(p).

Matrices are ``int64`` numpy arrays with entries in ``[0, p)``.  Products of two
residues must fit in 64 bits, which bounds ``p`` below ``2**31``.
"""

from __future__ import annotations

import numpy as np

MAX_PRIME = 2**31 - 1


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def reduce_mod(M, p: int) -> np.ndarray:
    return np.asarray(M, dtype=np.int64) % p


def rref(M, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form of ``M`` over GF(p) and its pivot columns."""
    R = reduce_mod(M, p).copy()
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
        inv = pow(int(R[row, col]), -1, p)
        R[row] = (R[row] * inv) % p
        factors = R[:, col].copy()
        factors[row] = 0
        R = (R - np.outer(factors, R[row])) % p
        pivots.append(col)
        row += 1
    return R, pivots


def rank(M, p: int) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(rref(M, p)[1])


def nullspace(M, p: int) -> np.ndarray:
    """Columns spanning the kernel of ``M`` (shape ``(n, n - rank)``)."""
    M = np.asarray(M)
    n = M.shape[1]
    if M.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=np.int64)
    R, pivots = rref(M, p)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for r, pc in enumerate(pivots):
            basis[pc, k] = (-R[r, f]) % p
    return basis


def column_basis(M, p: int) -> np.ndarray:
    """A subset of the columns of ``M`` forming a basis of its column space."""
    M = reduce_mod(M, p)
    if M.size == 0:
        return M.reshape(M.shape[0], 0)
    _, pivots = rref(M, p)
    return M[:, pivots]
