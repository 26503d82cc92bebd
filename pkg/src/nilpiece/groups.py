"""Exhaustive enumeration of GL(V), Sp(V), O(V) and SO(V) over small fields.

Elements are built column by column: the image of the j-th basis vector
must satisfy every form condition involving the earlier columns.  Partial
solutions are kept in numpy arrays, so each extension step is a handful of
vectorized table lookups.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

from . import batch
from .exactlin import GF, Matrix
from .formspace import FormedSpace

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


def budget_value(budget: int | None = None) -> int:
    if budget is not None:
        return budget
    env = os.environ.get("NILPIECE_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _extend(partials, allowed_fn, nvec, chunk=1 << 22):
    """Append one column index to every partial solution."""
    out = []
    step = max(1, chunk // max(nvec, 1))
    for s in range(0, len(partials), step):
        block = partials[s:s + step]
        mask = allowed_fn(block)
        rows, cols = np.nonzero(mask)
        out.append(np.concatenate([block[rows], cols[:, None].astype(np.int32)], axis=1))
    if not out:
        return np.zeros((0, partials.shape[1] + 1), dtype=np.int32)
    return np.concatenate(out, axis=0)


def _form_preserving(space: FormedSpace, budget: int) -> np.ndarray:
    F, n = space.field, space.dim
    V = batch.vectors(F, n)
    nvec = len(V)
    bil = batch.bilinear_table(F, space.gram, V)
    if space.kind == "O":
        qv = batch.quad_values(F, space.quad, V)
        targets_q = [space.quad[j][j] for j in range(n)]
        targets_b = space.quad
    else:
        qv = None
        targets_b = space.gram
    nonzero = np.any(V != 0, axis=1)
    partials = np.zeros((1, 0), dtype=np.int32)
    for j in range(n):
        base = nonzero.copy()
        if qv is not None:
            base &= qv == targets_q[j]

        def allowed(block, j=j, base=base):
            mask = np.broadcast_to(base, (len(block), nvec)).copy()
            for i in range(j):
                mask &= bil[block[:, i]] == targets_b[i][j]
            return mask

        partials = _extend(partials, allowed, nvec)
        if len(partials) > budget:
            raise BudgetExceeded(f"group enumeration exceeds budget {budget}")
    # columns -> matrices
    mats = V[partials]  # (N, n cols, n coords)
    return np.ascontiguousarray(np.transpose(mats, (0, 2, 1)))


def _general_linear(F: GF, n: int, budget: int) -> np.ndarray:
    q = F.q
    if q ** (n * n) > budget * 16:
        raise BudgetExceeded(f"GL_{n}({q}) enumeration exceeds budget")
    V = batch.vectors(F, n)
    nvec = len(V)
    add, mul, _, _ = batch.tables(F)
    # index arithmetic on vectors: sum and scalar multiple
    w = q ** np.arange(n, dtype=np.int64)
    sum_idx = (add[V[:, None, :], V[None, :, :]].astype(np.int64) * w).sum(axis=2)
    scal_idx = (mul[np.arange(q)[:, None, None], V[None, :, :]].astype(np.int64) * w).sum(axis=2)
    partials = np.zeros((1, 0), dtype=np.int32)
    spans = np.zeros((1, nvec), dtype=bool)
    spans[0, 0] = True
    for j in range(n):
        rows, cols = np.nonzero(~spans)
        new_partials = np.concatenate([partials[rows], cols[:, None].astype(np.int32)], axis=1)
        old = spans[rows]
        new_span = old.copy()
        for c in range(1, q):
            shift = scal_idx[c][cols]  # index of c * v
            # s + c v for every s in the old span
            moved = np.zeros_like(old)
            srows, sidx = np.nonzero(old)
            moved[srows, sum_idx[sidx, shift[srows]]] = True
            new_span |= moved
        partials, spans = new_partials, new_span
        if len(partials) > budget:
            raise BudgetExceeded(f"GL_{n}({q}) enumeration exceeds budget")
    mats = V[partials]
    return np.ascontiguousarray(np.transpose(mats, (0, 2, 1)))


def dickson_mask(space: FormedSpace, mats: np.ndarray) -> np.ndarray:
    """True for the elements of the stack lying in SO(V)."""
    F, n = space.field, space.dim
    if F.p == 2:
        if n % 2:
            return np.ones(len(mats), dtype=bool)
        diff = batch.matsub(F, mats, batch.identity(n)[None])
        if F.q == 2:
            return batch.rank_gf2(diff) % 2 == 0
        return np.array([Matrix.from_rows(F, d.tolist()).rank() % 2 == 0 for d in diff])
    return batch.det(F, mats) == 1


def enumerate_group(space: FormedSpace, connected: bool = True, budget: int | None = None) -> np.ndarray:
    """All elements of GL(V), Sp(V), SO(V) (or O(V) if not ``connected``).

    Returns an array of shape (N, dim, dim); entry [g, i, j] is row i,
    column j of the g-th element.  Order is deterministic.
    """
    budget = budget_value(budget)
    if space.dim == 0:
        return np.zeros((1, 0, 0), dtype=batch.DTYPE)
    if space.kind == "GL":
        return _general_linear(space.field, space.dim, budget)
    mats = _form_preserving(space, budget)
    if space.kind == "O" and connected:
        mats = mats[dickson_mask(space, mats)]
    return mats


def enumerate_matrices(F: GF, nrows: int, ncols: int, budget: int | None = None):
    """Every nrows x ncols matrix over F as an (N, nrows, ncols) array."""
    budget = budget_value(budget)
    total = F.q ** (nrows * ncols)
    if total > budget:
        raise BudgetExceeded(f"{total} matrices exceed budget {budget}")
    if nrows * ncols == 0:
        return np.zeros((1, nrows, ncols), dtype=batch.DTYPE)
    V = batch.vectors(F, nrows * ncols)
    return V.reshape(total, nrows, ncols)


def to_matrix(F: GF, arr) -> Matrix:
    return Matrix.from_rows(F, arr.tolist(), arr.shape[1])


def product_stack(F: GF, stacks):
    """Block-diagonal products of one element from each stack (in order)."""
    sizes = [s.shape[1] for s in stacks]
    n = sum(sizes)
    total = 1
    for s in stacks:
        total *= len(s)
    out = np.zeros((total, n, n), dtype=batch.DTYPE)
    for k, combo in enumerate(itertools.product(*[range(len(s)) for s in stacks])):
        off = 0
        for s, idx, size in zip(stacks, combo, sizes):
            out[k, off:off + size, off:off + size] = s[idx]
            off += size
    return out
