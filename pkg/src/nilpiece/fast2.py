"""Batched classification over F_2 with bit-packed vectors.

A vector of F_2^n is an integer whose bit i is coordinate i.  A stack of
N elements is an (N, n) int64 array of columns (column j is the image of
e_j).  Subspaces are (N, n) arrays of reduced echelon rows (pivot = lowest
set bit, rows in increasing pivot order, zero rows last), which matches
the echelon form of :mod:`nilpiece.exactlin`.

The recursion follows :func:`nilpiece.recovery.canonical_filtration`
without forming quotients: each level works on a pair L <= U of ambient
subspaces standing for U/L.  Results are cross-checked against the
generic classifier in the test suite.
"""

from __future__ import annotations

import numpy as np

from .exactlin import Subspace, field
from .formspace import FormedSpace
from .gradings import Filtration

INT = np.int64


# ----------------------------------------------------------------------
# packing


def pack_columns(mats: np.ndarray) -> np.ndarray:
    """(N, n, n) 0/1 matrices -> (N, n) packed columns."""
    n = mats.shape[1]
    w = (1 << np.arange(n, dtype=INT))
    return (mats.astype(INT) * w[None, :, None]).sum(axis=1)


def unpack_columns(cols: np.ndarray, n: int) -> np.ndarray:
    bits = (cols[:, None, :] >> np.arange(n, dtype=INT)[None, :, None]) & 1
    return bits.astype(np.int16)


def vector_tuple(v: int, n: int) -> tuple:
    return tuple((int(v) >> i) & 1 for i in range(n))


def parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out


# ----------------------------------------------------------------------
# batched linear algebra


def apply(cols: np.ndarray, v: np.ndarray) -> np.ndarray:
    """x v for a stack of vectors v (shape (N,) or (N, k))."""
    n = cols.shape[1]
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    out = np.zeros_like(v)
    for j in range(n):
        out ^= np.where((v >> j) & 1, cols[:, j, None], 0)
    return out[:, 0] if squeeze else out


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Columns of a @ b."""
    return apply(a, b)


def rref(rows: np.ndarray, width: int, pivot_width: int | None = None):
    """Reduced echelon form of a stack of row sets; returns (rows, rank).

    Only the low ``pivot_width`` bits are used as pivot columns.
    """
    rows = rows.copy()
    N, k = rows.shape
    pw = width if pivot_width is None else pivot_width
    rank = np.zeros(N, dtype=INT)
    ar = np.arange(N)
    idx = np.arange(k)[None, :]
    for c in range(pw):
        bit = (rows >> c) & 1
        cand = (bit == 1) & (idx >= rank[:, None])
        found = cand.any(axis=1)
        if not found.any():
            continue
        piv = cand.argmax(axis=1)
        tgt = np.minimum(rank, k - 1)
        a = rows[ar, tgt].copy()
        b = rows[ar, piv].copy()
        rows[ar, tgt] = np.where(found, b, a)
        rows[ar, piv] = np.where(found, a, b)
        prow = rows[ar, tgt]
        elim = ((rows >> c) & 1).astype(bool) & found[:, None]
        elim[ar, tgt] = False
        rows = np.where(elim, rows ^ prow[:, None], rows)
        rank += found
    return rows, rank


def reduce(vecs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Residuals of vecs (N, m) modulo echelon rows basis (N, k)."""
    out = vecs.copy()
    for i in range(basis.shape[1]):
        r = basis[:, i, None]
        piv = r & -r
        out ^= np.where((out & piv) != 0, r, 0)
    return out


def combine(coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """sum_i c_i basis_i for coefficient bitmasks coeffs (N, m)."""
    out = np.zeros_like(coeffs)
    for i in range(basis.shape[1]):
        out ^= np.where((coeffs >> i) & 1, basis[:, i, None], 0)
    return out


def left_kernel(R: np.ndarray, width: int) -> np.ndarray:
    """Coefficient bitmasks c with sum c_i R_i = 0 (a spanning set, (N, k))."""
    N, k = R.shape
    aug = R | (np.int64(1) << (width + np.arange(k, dtype=INT)))[None, :]
    red, rank = rref(aug, width + k, pivot_width=width)
    keep = np.arange(k)[None, :] >= rank[:, None]
    return np.where(keep, red >> width, 0)


def span(vecs: np.ndarray, n: int) -> np.ndarray:
    """Echelon basis of the span, always with n row slots."""
    rows = rref(vecs, n)[0]
    k = rows.shape[1]
    if k >= n:
        return rows[:, :n]
    return np.concatenate([rows, np.zeros((rows.shape[0], n - k), dtype=INT)], axis=1)


# ----------------------------------------------------------------------
# form tables


class Tables:
    def __init__(self, space: FormedSpace):
        n = space.dim
        self.n = n
        size = 1 << n
        vs = [vector_tuple(v, n) for v in range(size)]
        self.kind = space.kind
        if space.kind == "O":
            self.Q = np.array([space.Q(v) for v in vs], dtype=INT)
        else:
            self.Q = None
        if space.kind == "GL":
            self.B = None
        else:
            gcols = np.array([sum(space.gram[i][j] << i for i in range(n)) for j in range(n)], dtype=INT)
            gv = apply(np.broadcast_to(gcols, (size, n)), np.arange(size, dtype=INT))
            allv = np.arange(size, dtype=INT)
            self.B = parity(allv[:, None] & gv[None, :]).astype(np.int8)


# ----------------------------------------------------------------------
# recursion


def _images(cols, U, steps):
    """[x^t U for t = 0..steps]."""
    out = [U]
    cur = U
    for _ in range(steps):
        cur = apply(cols, cur)
        out.append(cur)
    return out


def _nil_index(imgs, L):
    """Smallest e >= 1 with x^e U inside L (per element)."""
    N = L.shape[0]
    e = np.zeros(N, dtype=INT)
    for t in range(1, len(imgs)):
        inside = ~np.any(reduce(imgs[t], L), axis=1)
        e = np.where((e == 0) & inside, t, e)
    if np.any(e == 0):
        raise ArithmeticError("element is not nilpotent")
    return e


def _pick(imgs, t):
    """imgs[t[e]] per element."""
    stack = np.stack(imgs, axis=1)  # (N, T, k)
    return stack[np.arange(len(t)), t]


def _preimage(U, Y, L, n):
    """{v in U : (vectors Y_i = y u_i) combination lands in L}."""
    R = reduce(Y, L)
    c = left_kernel(R, n)
    return span(combine(c, U), n)


def _singular_part(D, S_D, tab: Tables, n):
    """{v in D : Q(S v) = 0}; S_D holds S applied to D's rows."""
    k = D.shape[1]
    for i in range(k):
        for j in range(i + 1, k):
            if np.any(tab.B[S_D[:, i], S_D[:, j]]):
                raise ArithmeticError("Q o S is not additive on the domain")
    vals = tab.Q[S_D]  # (N, k): a functional with values in F_2
    # kernel of c -> sum c_i vals_i, written as a one-column left kernel
    c = left_kernel(vals, 1)
    return span(combine(c, D), n)


def _quad_index(imgs, L, tab: Tables):
    """Smallest f >= 1 with Q(x^f u) = 0 on U/L, i.e. on U."""
    N = imgs[0].shape[0]
    f = np.zeros(N, dtype=INT)
    k = imgs[0].shape[1]
    for t in range(1, len(imgs)):
        Y = imgs[t]
        ok = ~np.any(tab.Q[Y], axis=1)
        for i in range(k):
            for j in range(i + 1, k):
                ok &= tab.B[Y[:, i], Y[:, j]] == 0
        f = np.where((f == 0) & ok, t, f)
    if np.any(f == 0):
        raise ArithmeticError("Q o x^f never vanishes")
    return f


def _level(cols, L, U, tab: Tables, n, orth2: bool):
    """One recursion level on U/L; returns (m, H, top) with m = 0 where x' = 0."""
    imgs = _images(cols, U, n + 1)
    e = _nil_index(imgs, L)
    active = e > 1
    N = len(e)
    m = np.zeros(N, dtype=INT)
    H = U.copy()
    top = L.copy()
    if not active.any():
        return m, H, top
    e = np.maximum(e, 2)
    if not orth2:
        m = np.where(active, e - 1, 0)
        Y = _pick(imgs, e - 1)
        H = _preimage(U, Y, L, n)
        top = span(np.concatenate([Y, L], axis=1), n)
    else:
        f = _quad_index(imgs, L, tab)
        m = np.where(active, np.maximum(e - 1, 2 * f - 2), 0)
        Y = _pick(imgs, e - 1)
        kerset = _preimage(U, Y, L, n)
        case1 = e >= 2 * f
        case2 = e == 2 * f - 1
        # domain: ker x^{e-1} (cases i, ii) or U (case iii)
        D = np.where(case2[:, None], kerset, U)
        D = np.where((active & ~case1)[:, None], D, 0)
        SD = apply_power(cols, D, f - 1)
        sing = _singular_part(D, SD, tab, n)
        H = np.where(case1[:, None], kerset, sing)
        # top = {v in U : (v, H) = 0, Q(v) = 0}
        B = tab.B[U[:, :, None], H[:, None, :]].astype(INT)  # (N, k_u, k_h)
        R = (B << np.arange(B.shape[2], dtype=INT)[None, None, :]).sum(axis=2)
        c = left_kernel(R, n)
        P = span(combine(c, U), n)
        P = np.where(active[:, None], P, 0)
        top = _singular_part(P, P, tab, n)
    H = np.where(active[:, None], H, U)
    top = np.where(active[:, None], top, L)
    return m, H, top


def apply_power(cols, V, t):
    """x^{t_e} applied to rows of V, per element exponent t."""
    out = V.copy()
    tmax = int(t.max()) if len(t) else 0
    cur = V
    for s in range(1, tmax + 1):
        cur = apply(cols, cur)
        out = np.where((t == s)[:, None], cur, out)
    return out


def filtration_steps(cols: np.ndarray, space: FormedSpace, tab: Tables | None = None):
    """Per-element filtration steps.

    Returns (lo, steps) where steps has shape (N, S, n) and steps[:, s] is
    V_{>=lo+s} in packed echelon rows; S covers every weight that occurs.
    """
    n = space.dim
    N = cols.shape[0]
    tab = tab or Tables(space)
    orth2 = space.kind == "O"
    full = np.broadcast_to((np.int64(1) << np.arange(n, dtype=INT)), (N, n)).copy()
    zero = np.zeros((N, n), dtype=INT)
    L, U = zero, full
    levels = []
    alive = np.ones(N, dtype=bool)
    while alive.any():
        m, H, top = _level(cols, L, U, tab, n, orth2)
        m = np.where(alive, m, 0)
        if levels and np.any(m[alive] >= levels[-1][0][alive]):
            raise ArithmeticError("recursion weights do not decrease")
        levels.append((m, H, top))
        alive = alive & (m > 0)
        L = np.where(alive[:, None], top, L)
        U = np.where(alive[:, None], H, U)
    M = int(max(lv[0].max() for lv in levels)) if levels else 0
    lo = -M
    S = 2 * M + 2
    steps = np.empty((N, S, n), dtype=INT)
    for s in range(S):
        a = lo + s
        steps[:, s] = full if a <= 0 else zero
    for m, H, top in levels:
        for s in range(S):
            a = lo + s
            sel_h = (m > 0) & (-m < a) & (a <= 0)
            sel_t = (m > 0) & (1 <= a) & (a <= m)
            steps[:, s] = np.where(sel_h[:, None], H, steps[:, s])
            steps[:, s] = np.where(sel_t[:, None], top, steps[:, s])
    return lo, steps


def to_filtration(space: FormedSpace, lo: int, steps_row: np.ndarray) -> Filtration:
    n = space.dim
    F = space.field
    subs = [Subspace.span(F, n, [vector_tuple(v, n) for v in row if v]) for row in steps_row]
    return Filtration.make(space, lo, subs)


# ----------------------------------------------------------------------
# postconditions on gr, batched per filtration


def matmul2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # float products are exact for 0/1 matrices of this size and use BLAS
    return (a.astype(np.float64) @ b.astype(np.float64)).astype(INT) & 1


def rank2(mats: np.ndarray) -> np.ndarray:
    from .batch import rank_gf2
    if mats.shape[1] == 0 or mats.shape[2] == 0:
        return np.zeros(len(mats), dtype=INT)
    return rank_gf2(mats)


def kernel_vectors2(mats: np.ndarray) -> np.ndarray:
    """A spanning set of the right kernel of each matrix, packed (N, m)."""
    N, r, m = mats.shape
    # columns of mats as packed vectors of length r; kernel = left kernel of the column list
    w = (1 << np.arange(r, dtype=INT))
    colpack = (mats.astype(INT) * w[None, :, None]).sum(axis=1)  # (N, m)
    return left_kernel(colpack, r)


class GradedCheck:
    """Batched membership test of degree-2 maps over F_2.

    All elements share the dimension vector of ``gs``; their forms may
    differ, so the gram and quadratic tables can be given per element as
    (N, n, n) stacks (defaults: those of ``gs``).
    """

    def __init__(self, gs, grams=None, quads=None):
        self.gs = gs
        self.weights = np.array(gs.weights)
        self.kind = gs.kind
        sp = gs.space
        n = gs.dim
        self.n = n
        if grams is None and sp.gram is not None:
            grams = np.array(sp.gram, dtype=INT)[None]
        if quads is None and sp.quad is not None:
            quads = np.array(sp.quad, dtype=INT)[None]
        self.grams, self.quads = grams, quads
        w = self.weights
        self.low_mask = w[:, None] < w[None, :] + 2  # entries that must vanish
        self.deg2_mask = w[:, None] == w[None, :] + 2

    def _forms(self, stack, idx):
        if stack is None or len(stack) == 1:
            return stack
        return stack[idx]

    def block(self, X, dst, src):
        r = list(self.gs.block(dst))
        c = list(self.gs.block(src))
        return X[:, r][:, :, c]

    def q_values(self, vecs_full, quads):
        """Q of vectors given by full coordinates, (N, n) 0/1 -> (N,)"""
        out = np.zeros(len(vecs_full), dtype=INT)
        n = self.n
        for i in range(n):
            for j in range(i, n):
                c = quads[:, i, j]
                if c.any():
                    out ^= vecs_full[:, i] & vecs_full[:, j] & c
        return out

    def nondegenerate(self, K_full, idx):
        """K_full: (N, n, d) columns in ambient gr coordinates (injective)."""
        N, n, d = K_full.shape
        gram = self._forms(self.grams, idx)
        G = matmul2(np.transpose(K_full, (0, 2, 1)), matmul2(gram, K_full))
        r = rank2(G)
        ok = r == d
        near = r == d - 1
        if near.any():
            near_idx = np.nonzero(near)[0]
            ker = kernel_vectors2(G[near_idx])  # coefficient bitmasks
            # the kernel is one-dimensional: take the nonzero combination
            c = ker.max(axis=1)
            bits = ((c[:, None] >> np.arange(d, dtype=INT)[None, :]) & 1)
            v = (K_full[near_idx] * bits[:, None, :]).sum(axis=2) & 1
            quads = self._forms(self.quads, idx)
            quads = quads[near_idx] if len(quads) > 1 else quads
            ok[near_idx] = self.q_values(v, quads) == 1
        return ok

    def radical_vector(self, K_full, idx):
        """The nonzero vector of the radical line of (,) on span(K) (full coords)."""
        N, n, d = K_full.shape
        gram = self._forms(self.grams, idx)
        G = matmul2(np.transpose(K_full, (0, 2, 1)), matmul2(gram, K_full))
        ker = kernel_vectors2(G)
        c = ker.max(axis=1)
        bits = ((c[:, None] >> np.arange(d, dtype=INT)[None, :]) & 1)
        return (K_full * bits[:, None, :]).sum(axis=2) & 1

    def in_set(self, A, idx=None):
        """A: (N, n, n) degree-2 maps; returns bool mask.

        ``idx`` selects the per-element forms for the rows of A.
        """
        if idx is None:
            idx = np.arange(len(A))
        gs = self.gs
        N = len(A)
        ok = np.ones(N, dtype=bool)
        top = gs.top_weight()
        powers = [np.broadcast_to(np.eye(self.n, dtype=INT), A.shape)]
        for _ in range(top):
            powers.append(matmul2(powers[-1], A))
        for n_ in range(1, top + 1):
            d = gs.d(n_)
            if not d:
                continue
            if self.kind != "O" or n_ % 2:
                ok &= rank2(self.block(powers[n_], n_, -n_)) == d
            else:
                half = powers[n_ // 2]
                cols = list(gs.block(-n_))
                K = half[:, :, cols]
                inj = rank2(K) == d
                ok &= inj
                ok &= self.nondegenerate(K, idx)
        return ok

    def subpiece(self, A, M, idx=None):
        """f_A per element as an (N, t) 0/1 array."""
        if idx is None:
            idx = np.arange(len(A))
        gs = self.gs
        lines = []
        P = np.broadcast_to(np.eye(self.n, dtype=INT), A.shape)
        power = 0
        for n_ in M:
            while power < n_:
                P = matmul2(P, A)
                power += 1
            cols = list(gs.block(-2 * n_))
            lines.append(self.radical_vector(P[:, :, cols], idx))
        out = [np.any(lines[i] != lines[i - 1], axis=1).astype(INT) for i in range(1, len(lines))]
        if not out:
            return np.zeros((len(A), 0), dtype=INT)
        return np.stack(out, axis=1)


def adapted(mats: np.ndarray, P: np.ndarray, Pinv: np.ndarray) -> np.ndarray:
    return matmul2(Pinv[None], matmul2(mats, P[None]))


def check_field(space: FormedSpace):
    if space.field != field(2):
        raise ValueError("the packed classifier works over F_2 only")


class StackResult:
    """Classification of a stack: filtrations, per-element index and subpieces."""

    def __init__(self, filtrations, graded, index, subpieces):
        self.filtrations = filtrations  # list of Filtration
        self.graded = graded  # list of GradedSpace (gr of each filtration)
        self.index = index  # (N,) position in filtrations
        self.subpieces = subpieces  # list of per-element f tuples or None


def classify_stack(space: FormedSpace, xs: np.ndarray, chunk: int = 1 << 17) -> StackResult:
    """Classify every nilpotent x in the (N, n, n) stack ``xs``.

    Elements are grouped by recovered filtration for the membership checks
    and by dimension vector for the batched set test.  Raises
    ArithmeticError naming the first element whose postconditions fail.
    """
    from .gradings import associated_graded
    from .pieces import odd_set

    check_field(space)
    N, n = xs.shape[0], space.dim
    tab = Tables(space)
    known = {}
    filtrations, graded, bases = [], [], []
    index = np.empty(N, dtype=INT)
    pending = {}  # dims -> lists of (element positions, adapted degree-2 parts)
    for start in range(0, N, chunk):
        block = xs[start:start + chunk]
        lo, steps = filtration_steps(pack_columns(block), space, tab)
        keys = steps.reshape(len(block), -1)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        order = np.argsort(inverse, kind="stable")
        bounds = np.searchsorted(inverse[order], np.arange(len(uniq) + 1))
        for u in range(len(uniq)):
            key = (lo, uniq[u].tobytes())
            if key not in known:
                filt = to_filtration(space, lo, uniq[u].reshape(-1, n))
                if not filt.is_member():
                    raise ArithmeticError(f"recovered filtration is not in the family:\n{filt.to_text()}")
                ag = associated_graded(filt, check=False)
                P = np.array(ag.basis, dtype=INT).T if n else np.zeros((0, 0), dtype=INT)
                Pinv = np.array(ag.adapted_matrix().inverse().rows, dtype=INT) if n else P
                known[key] = len(filtrations)
                filtrations.append(filt)
                graded.append(ag.graded)
                bases.append((P, Pinv))
            fi = known[key]
            sel = order[bounds[u]:bounds[u + 1]]
            index[start + sel] = fi
            P, Pinv = bases[fi]
            X = adapted(block[sel], P, Pinv) if n else block[sel].astype(INT)
            w = np.array(graded[fi].weights)
            bad = np.any(X[:, w[:, None] < w[None, :] + 2] != 0, axis=1)
            if bad.any():
                first = start + sel[np.argmax(bad)]
                raise ArithmeticError(f"x does not raise its filtration by 2 (element {int(first)}):\n"
                                      f"{xs[first].tolist()}")
            A = X * (w[:, None] == w[None, :] + 2)[None]
            slot = pending.setdefault(graded[fi].dims, ([], [], []))
            slot[0].append(start + sel)
            slot[1].append(A.astype(np.int8))
            slot[2].append(np.full(len(sel), fi, dtype=INT))
    subpieces = [None] * N
    for dims, (pos_l, a_l, f_l) in pending.items():
        pos = np.concatenate(pos_l)
        A = np.concatenate(a_l).astype(INT)
        fis = np.concatenate(f_l)
        used = np.unique(fis)
        remap = np.zeros(len(filtrations), dtype=INT)
        remap[used] = np.arange(len(used))
        gs0 = graded[used[0]]
        grams = quads = None
        if space.kind != "GL":
            grams = np.array([graded[f].space.gram for f in used], dtype=INT).reshape(len(used), n, n)
        if space.kind == "O":
            quads = np.array([graded[f].space.quad for f in used], dtype=INT).reshape(len(used), n, n)
        chk = GradedCheck(gs0, grams, quads)
        idx = remap[fis]
        for s0 in range(0, len(A), chunk):
            sl = slice(s0, s0 + chunk)
            good = chk.in_set(A[sl], idx[sl])
            if not good.all():
                first = pos[sl][np.argmin(good)]
                raise ArithmeticError(f"induced map is not in the set (element {int(first)}):\n"
                                      f"{xs[first].tolist()}")
            M = odd_set(gs0) if space.kind == "O" else ()
            if M:
                fv = chk.subpiece(A[sl], M, idx[sl])
                for p_, row in zip(pos[sl], fv):
                    subpieces[p_] = (M, tuple(int(b) for b in row))
    return StackResult(filtrations, graded, index, subpieces)
