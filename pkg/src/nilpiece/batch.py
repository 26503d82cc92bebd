"""Vectorized finite-field arithmetic on stacks of matrices (numpy).

Used by the exhaustive scans.  Arrays hold encoded field elements as small
integers; every routine here is exact.
"""

from __future__ import annotations

import functools

import numpy as np

from .exactlin import GF

DTYPE = np.int16


@functools.lru_cache(maxsize=None)
def tables(F: GF):
    """numpy copies of the add, mul, neg and inv tables of F."""
    add = np.array(F.add, dtype=DTYPE)
    mul = np.array(F.mul, dtype=DTYPE)
    neg = np.array(F.neg, dtype=DTYPE)
    inv = np.array(F.inv, dtype=DTYPE)
    return add, mul, neg, inv


def is_prime_field(F: GF) -> bool:
    return F.k == 1


def matmul(F: GF, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched product over F; broadcasting over leading axes."""
    if is_prime_field(F):
        # float products are exact here (entries < p <= 7, sizes are tiny)
        prod = A.astype(np.float64) @ B.astype(np.float64)
        return np.fmod(prod, F.p).astype(DTYPE)
    add, mul, _, _ = tables(F)
    n = A.shape[-1]
    acc = None
    for k in range(n):
        term = mul[A[..., :, k, None], B[..., None, k, :]]
        acc = term if acc is None else add[acc, term]
    return acc


def matadd(F: GF, A, B):
    if is_prime_field(F):
        return ((A.astype(np.int64) + B) % F.p).astype(DTYPE)
    add = tables(F)[0]
    return add[A, B]


def matsub(F: GF, A, B):
    if is_prime_field(F):
        return ((A.astype(np.int64) - B) % F.p).astype(DTYPE)
    add, _, neg, _ = tables(F)
    return add[A, neg[B]]


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=DTYPE)


def is_zero(A: np.ndarray) -> np.ndarray:
    """Boolean per matrix in the stack."""
    return ~A.reshape(A.shape[0], -1).any(axis=1)


def nilpotent_mask(F: GF, A: np.ndarray) -> np.ndarray:
    """Which matrices of the stack satisfy A^n = 0 (n = size)."""
    n = A.shape[-1]
    P = A
    e = 1
    while e < n:
        P = matmul(F, P, P)
        e *= 2
    return is_zero(P)


def vectors(F: GF, n: int) -> np.ndarray:
    """All q^n vectors; row r has coordinate i equal to (r // q^i) % q."""
    q = F.q
    idx = np.arange(q**n, dtype=np.int64)
    return np.stack([(idx // q**i) % q for i in range(n)], axis=1).astype(DTYPE)


def vector_index(F: GF, V: np.ndarray) -> np.ndarray:
    q = F.q
    n = V.shape[-1]
    w = q ** np.arange(n, dtype=np.int64)
    return (V.astype(np.int64) * w).sum(axis=-1)


def quad_values(F: GF, quad, V: np.ndarray) -> np.ndarray:
    """Q(v) for every row v of V."""
    add, mul, _, _ = tables(F)
    n = V.shape[1]
    acc = np.zeros(V.shape[0], dtype=DTYPE)
    for i in range(n):
        for j in range(i, n):
            c = quad[i][j]
            if c:
                acc = add[acc, mul[c, mul[V[:, i], V[:, j]]]]
    return acc


def bilinear_table(F: GF, gram, V: np.ndarray) -> np.ndarray:
    """(u, v) for all pairs of rows of V, shape (len(V), len(V))."""
    G = np.array(gram, dtype=DTYPE)
    GV = matmul(F, G[None, :, :], V[:, :, None])[:, :, 0]  # rows G v
    if is_prime_field(F):
        return ((V.astype(np.int64) @ GV.T.astype(np.int64)) % F.p).astype(DTYPE)
    add, mul, _, _ = tables(F)
    n = V.shape[1]
    acc = np.zeros((V.shape[0], V.shape[0]), dtype=DTYPE)
    for i in range(n):
        acc = add[acc, mul[V[:, i, None], GV[None, :, i]]]
    return acc


def rank_gf2(A: np.ndarray) -> np.ndarray:
    """Ranks of a stack of 0/1 matrices over GF(2)."""
    N, n, m = A.shape
    w = (1 << np.arange(m, dtype=np.int64))
    rows = (A.astype(np.int64) * w).sum(axis=2)  # (N, n) packed rows
    used = np.zeros((N, n), dtype=bool)
    rank = np.zeros(N, dtype=np.int64)
    ar = np.arange(N)
    for c in range(m):
        has_bit = ((rows >> c) & 1).astype(bool)
        cand = has_bit & ~used
        found = cand.any(axis=1)
        piv = cand.argmax(axis=1)
        prow = rows[ar, piv]
        elim = has_bit & found[:, None]
        elim[ar, piv] = False
        rows = np.where(elim, rows ^ prow[:, None], rows)
        used[ar[found], piv[found]] = True
        rank += found
    return rank


def det(F: GF, A: np.ndarray) -> np.ndarray:
    """Determinants of a stack of square matrices over F."""
    add, mul, neg, inv = tables(F)
    M = A.astype(DTYPE).copy()
    N, n, _ = M.shape
    d = np.ones(N, dtype=DTYPE)
    ar = np.arange(N)
    alive = np.ones(N, dtype=bool)
    for c in range(n):
        col = M[:, c:, c]
        nz = col != 0
        found = nz.any(axis=1)
        alive &= found
        piv = c + nz.argmax(axis=1)
        swap = piv != c
        # swap rows c and piv
        rc = M[ar, c].copy()
        M[ar, c] = M[ar, piv]
        M[ar, piv] = rc
        d = np.where(swap, neg[d], d)
        pv = M[:, c, c]
        d = mul[d, pv]
        pinv = inv[pv]
        for j in range(c + 1, n):
            f = mul[neg[M[:, j, c]], pinv]
            M[:, j, :] = add[M[:, j, :], mul[f[:, None], M[:, c, :]]]
    return np.where(alive, d, 0).astype(DTYPE)
