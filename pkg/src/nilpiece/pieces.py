"""The open subsets of weight-2 elements with parabolic centralizer.

For a graded space ``gs`` (basis blocks by decreasing weight) and a degree-2
element ``A`` of the Lie algebra this module provides

* :func:`in_bang_set`: the explicit rank / nondegeneracy test,
* :func:`commuting_witness`: for elements outside the set, an explicit
  unipotent ``B`` in the opposite unipotent radical commuting with ``A``,
* :func:`centralizer_oracle`: brute-force check that every group element
  commuting with ``A`` is block-upper-triangular,
* :func:`subpiece_invariant`: the radical-line function ``f_A`` for
  orthogonal spaces in characteristic 2,
* :func:`enumerate_bang_set`: all members over the base field.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from . import batch
from .exactlin import (
    GF,
    Matrix,
    Subspace,
    field,
    lin_comb,
    null_space_rows,
    vec_scale,
)
from .formspace import (
    FormedSpace,
    group_order_formula,
    in_group,
    lie_algebra_basis,
    lie_algebra_member,
    make_space_from_quad,
)
from .gradings import GradedSpace
from .groups import BudgetExceeded, budget_value, enumerate_matrices


class WitnessError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# block helpers


def block_of(gs: GradedSpace, M: Matrix, dst: int, src: int) -> Matrix:
    """The block of M mapping V_src to V_dst."""
    return M.block(list(gs.block(dst)), list(gs.block(src)))


def embed_block(gs: GradedSpace, vec_block, weight: int) -> tuple:
    """A vector of V_weight given by block coordinates, in ambient coordinates."""
    v = [0] * gs.dim
    for k, c in zip(gs.block(weight), vec_block):
        v[k] = c
    return tuple(v)


def block_kernel(gs: GradedSpace, M: Matrix, src: int, dst: int) -> list:
    """RREF basis of ker(M : V_src -> V_dst), as ambient vectors."""
    F = gs.field
    d = len(gs.block(src))
    if d == 0:
        return []
    blk = block_of(gs, M, dst, src)
    if blk.nrows == 0:
        ker = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    else:
        ker = list(null_space_rows(F, blk.rows, d))
    return [embed_block(gs, k, src) for k in ker]


def block_cokernel_functionals(gs: GradedSpace, M: Matrix, src: int, dst: int) -> list:
    """Functionals xi on V_dst (as block row vectors) with xi o M = 0 on V_src."""
    F = gs.field
    d = len(gs.block(dst))
    if d == 0:
        return []
    blk = block_of(gs, M, dst, src)
    if blk.ncols == 0:
        return [tuple(int(i == j) for j in range(d)) for i in range(d)]
    return list(null_space_rows(F, blk.T.rows, d))


def block_rank(gs: GradedSpace, M: Matrix, src: int, dst: int) -> int:
    blk = block_of(gs, M, dst, src)
    if blk.nrows == 0 or blk.ncols == 0:
        return 0
    return blk.rank()


def is_degree(gs: GradedSpace, A: Matrix, shift: int) -> bool:
    w = gs.weights
    n = gs.dim
    return all(not A[i, j] or w[i] == w[j] + shift for i in range(n) for j in range(n))


def is_strictly_lower(gs: GradedSpace, B: Matrix) -> bool:
    """B - 1 maps each V_i into V_{<i}."""
    F = gs.field
    w = gs.weights
    n = gs.dim
    for i in range(n):
        for j in range(n):
            target = int(i == j)
            if w[i] >= w[j] and B[i, j] != target:
                return False
    return True


def is_block_upper(gs: GradedSpace, g: Matrix) -> bool:
    """g maps V_{>=a} into V_{>=a} for all a."""
    w = gs.weights
    n = gs.dim
    return all(not g[i, j] or w[i] >= w[j] for i in range(n) for j in range(n))


# ----------------------------------------------------------------------
# membership


def _check_query(gs: GradedSpace, A: Matrix):
    if A.shape != (gs.dim, gs.dim):
        raise ValueError("element does not match the graded space")
    if not is_degree(gs, A, 2):
        raise ValueError("element does not raise weights by exactly 2")
    if not lie_algebra_member(gs.space, A):
        raise ValueError(f"element is not in the {gs.kind} Lie algebra")


def in_bang_set(gs: GradedSpace, A: Matrix, check: bool = True) -> bool:
    if check:
        _check_query(gs, A)
    kind = gs.kind
    top = gs.top_weight()
    P = Matrix.identity(gs.field, gs.dim)
    powers = [P]
    for _ in range(top):
        P = P @ A
        powers.append(P)
    for n in range(1, top + 1):
        dn = gs.d(n)
        if not dn:
            continue
        if kind != "O" or n % 2:
            if block_rank(gs, powers[n], -n, n) != dn:
                return False
        else:
            if not _even_condition(gs, powers[n // 2], n):
                return False
    return True


def _image_in_v0(gs: GradedSpace, An2: Matrix, n: int) -> list:
    """Columns of A^{n/2} on V_{-n}, as ambient vectors in V_0."""
    return [An2.column(k) for k in gs.block(-n)]


def _even_condition(gs: GradedSpace, An2: Matrix, n: int) -> bool:
    F = gs.field
    cols = _image_in_v0(gs, An2, n)
    K = Subspace.span(F, gs.dim, cols)
    if K.dim != len(cols):
        return False
    return gs.space.is_nondegenerate_on(K)


def bang_report(gs: GradedSpace, A: Matrix) -> dict:
    """Per-weight outcome of the membership conditions (for diagnostics)."""
    out = {}
    P = Matrix.identity(gs.field, gs.dim)
    powers = [P]
    for _ in range(gs.top_weight()):
        P = P @ A
        powers.append(P)
    for n in range(1, gs.top_weight() + 1):
        if not gs.d(n):
            continue
        if gs.kind != "O" or n % 2:
            out[n] = block_rank(gs, powers[n], -n, n) == gs.d(n)
        else:
            out[n] = _even_condition(gs, powers[n // 2], n)
    return out


# ----------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class Witness:
    B: Matrix
    case: str
    n: int
    extension_degree: int = 1

    def header(self) -> str:
        return f"{self.case} n={self.n}"

    def to_text(self) -> str:
        return self.header() + "\n" + self.B.to_text()


def _rank_one_update(F: GF, n: int, terms) -> Matrix:
    """1 + sum of c * v (w, .) over (c, v, w) with w given as a row functional."""
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    add, mul = F.add, F.mul
    for c, v, w in terms:
        if not c:
            continue
        for i in range(n):
            if v[i]:
                cv = mul[c][v[i]]
                row = M[i]
                for j in range(n):
                    if w[j]:
                        row[j] = add[row[j]][mul[cv][w[j]]]
    return Matrix(F, tuple(tuple(r) for r in M), n)


def _dot_col(F: GF, u, gram, j):
    add, mul = F.add, F.mul
    acc = 0
    for i, ui in enumerate(u):
        g = gram[i][j]
        if ui and g:
            acc = add[acc][mul[ui][g]]
    return acc


def _block_functional(gs: GradedSpace, xi_block, weight: int) -> tuple:
    """A functional on V_weight (block row vector) as an ambient row vector."""
    w = [0] * gs.dim
    for k, c in zip(gs.block(weight), xi_block):
        w[k] = c
    return tuple(w)


def _sign(F: GF, j: int) -> int:
    return 1 if j % 2 == 0 else F.neg[1]


def _gl_witness(gs: GradedSpace, A: Matrix) -> Witness:
    F, N = gs.field, gs.dim
    top = gs.top_weight()
    # (1) A : V_{-i} -> V_{-i+2} not injective, i >= 2
    for i in range(2, top + 1):
        ker = block_kernel(gs, A, -i, -i + 2)
        if ker:
            xi = block_cokernel_functionals(gs, A, -i, -i + 2)
            B = _rank_one_update(F, N, [(1, ker[0], _block_functional(gs, xi[0], -i + 2))])
            return Witness(B, "GL.case1", i)
    # (2) A : V_i -> V_{i+2} not surjective, i >= 0
    for i in range(0, top + 1):
        if not gs.d(i + 2):
            continue
        if block_rank(gs, A, i, i + 2) < gs.d(i + 2):
            ker = block_kernel(gs, A, i, i + 2)
            xi = block_cokernel_functionals(gs, A, i, i + 2)
            B = _rank_one_update(F, N, [(1, ker[0], _block_functional(gs, xi[0], i + 2))])
            return Witness(B, "GL.case2", i)
    # (3) chain case
    powers = _powers(A, top)
    for n in range(1, top + 1):
        if not gs.d(n) or block_rank(gs, powers[n], -n, n) == gs.d(n):
            continue
        e = block_kernel(gs, powers[n], -n, n)[0]
        xi_n = _block_functional(gs, block_cokernel_functionals(gs, powers[n], -n, n)[0], n)
        terms = []
        for j in range(n):
            ej = powers[j].apply(e)
            # xi_{2j-n+2} = xi_n o A^{n-j-1}
            xi = _row_times(F, xi_n, powers[n - j - 1])
            terms.append((1, ej, xi))
        return Witness(_rank_one_update(F, N, terms), "GL.case3", n)
    raise WitnessError("no applicable case: element is in the set")


def _powers(A: Matrix, top: int) -> list:
    P = Matrix.identity(A.field, A.nrows)
    out = [P]
    for _ in range(max(top, 1) + 1):
        P = P @ A
        out.append(P)
    return out


def _row_times(F: GF, row, M: Matrix) -> tuple:
    """The row vector row * M."""
    return tuple(_dot_col(F, row, M.rows, j) for j in range(M.ncols))


def _pair(space: FormedSpace, u) -> tuple:
    return tuple(_dot_col(space.field, u, space.gram, j) for j in range(space.dim))


def _lower_injectivity_failure(gs: GradedSpace, A: Matrix):
    """Smallest i >= 2 with A : V_{-i} -> V_{-i+2} not injective."""
    for i in range(2, gs.top_weight() + 1):
        ker = block_kernel(gs, A, -i, -i + 2)
        if ker:
            return i, ker[0]
    return None


def _sp_like_pair_witness(gs, A, powers, n, label):
    """The signed (e, f) chain construction shared by Sp and O."""
    F, N, sp = gs.field, gs.dim, gs.space
    ker = block_kernel(gs, powers[n], -n, n)
    if len(ker) < 2:
        raise WitnessError(f"{label}: kernel of A^{n} on V_-{n} has dimension < 2")
    e0, f0 = ker[0], ker[1]
    e = {2 * j - n: powers[j].apply(e0) for j in range(n + 1)}
    f = {2 * j - n: powers[j].apply(f0) for j in range(n + 1)}
    terms = []
    for j in range(n):
        s = _sign(F, j)
        terms.append((s, e[2 * j - n], _pair(sp, f[n - 2 * j - 2])))
        terms.append((F.neg[s], f[2 * j - n], _pair(sp, e[n - 2 * j - 2])))
    return Witness(_rank_one_update(F, N, terms), label, n)


def _sp_witness(gs: GradedSpace, A: Matrix) -> Witness:
    F, N, sp = gs.field, gs.dim, gs.space
    top = gs.top_weight()
    fail = _lower_injectivity_failure(gs, A)
    if fail is not None:
        i, e_mi = fail
        if i > 2:
            e_i2 = block_kernel(gs, A, i - 2, i)[0]
            B = _rank_one_update(F, N, [(1, e_mi, _pair(sp, e_i2)), (1, e_i2, _pair(sp, e_mi))])
            return Witness(B, "Sp.case1", i)
        e0 = block_kernel(gs, A, 0, 2)[0]
        B = _rank_one_update(F, N, [(1, e_mi, _pair(sp, e0)), (1, e0, _pair(sp, e_mi))])
        return Witness(B, "Sp.case2", 2)
    powers = _powers(A, top)
    failing = [n for n in range(1, top + 1) if gs.d(n) and block_rank(gs, powers[n], -n, n) != gs.d(n)]
    even = [n for n in failing if n % 2 == 0]
    if even:
        return _sp_like_pair_witness(gs, A, powers, even[0], "Sp.case3")
    if failing:
        n = failing[0]
        e0 = block_kernel(gs, powers[n], -n, n)[0]
        e = {2 * j - n: powers[j].apply(e0) for j in range(n + 1)}
        terms = [(_sign(F, j), e[2 * j - n], _pair(sp, e[n - 2 * j - 2])) for j in range(n)]
        return Witness(_rank_one_update(F, N, terms), "Sp.case4", n)
    raise WitnessError("no applicable case: element is in the set")


def singular_radical_vector(space: FormedSpace, K: Subspace):
    """A nonzero vector of the radical of (,)|K with Q = 0, or None."""
    F = space.field
    rad = space.restricted_radical(K)
    if rad.dim == 0:
        return None
    if F.p != 2:
        return rad.basis[0]
    # Q is additive and Frobenius-semilinear on the radical:
    # Q(sum c_i r_i) = (sum c_i sqrt(Q(r_i)))^2
    roots = [F.sqrt(space.Q(r)) for r in rad.basis]
    coeffs = null_space_rows(F, [roots], len(roots)) if any(roots) else \
        tuple(tuple(int(i == j) for j in range(len(roots))) for i in range(len(roots)))
    if not coeffs:
        return None
    return lin_comb(F, coeffs[0], rad.basis, space.dim)


def _o_witness(gs: GradedSpace, A: Matrix) -> Witness:
    F, N, sp = gs.field, gs.dim, gs.space
    top = gs.top_weight()
    neg = F.neg
    fail = _lower_injectivity_failure(gs, A)
    if fail is not None:
        i, e_mi = fail
        if i > 2:
            e_i2 = block_kernel(gs, A, i - 2, i)[0]
            B = _rank_one_update(F, N, [(1, e_mi, _pair(sp, e_i2)), (neg[1], e_i2, _pair(sp, e_mi))])
            return Witness(B, "O.case1", i)
        e_m2 = e_mi
        e0 = block_kernel(gs, A, 0, 2)[0]
        # gamma(x_2) = -Q(e_0) (e_{-2}, x_2) e_{-2}
        qe0 = sp.Q(e0)
        B = _rank_one_update(F, N, [
            (1, e_m2, _pair(sp, e0)),
            (neg[qe0], e_m2, _pair(sp, e_m2)),
            (neg[1], e0, _pair(sp, e_m2)),
        ])
        return Witness(B, "O.case2", 2)
    powers = _powers(A, top)
    # (3) some n with a singular radical vector in K_n = A^n(V_{-2n})
    for n in range(1, top // 2 + 1):
        if not gs.d(2 * n):
            continue
        cols = [powers[n].column(k) for k in gs.block(-2 * n)]
        K = Subspace.span(F, N, cols)
        xi = singular_radical_vector(sp, K)
        if xi is None:
            continue
        # unique preimage of xi in V_{-2n}
        blk = block_of(gs, powers[n], 0, -2 * n)
        target = [xi[k] for k in gs.block(0)]
        aug = [r + (t,) for r, t in zip(blk.rows, target)]
        d = blk.ncols
        sol = null_space_rows(F, aug, d + 1)
        pre = None
        for s in sol:
            if s[d]:
                c = F.inv[F.neg[s[d]]]
                pre = vec_scale(F, c, s[:d])
                break
        if pre is None:
            raise WitnessError("O.case3: xi has no preimage")
        e_m2n = embed_block(gs, pre, -2 * n)
        e = {-2 * n + 2 * j: powers[j].apply(e_m2n) for j in range(2 * n + 1)}
        terms = [(_sign(F, j), e[-2 * n + 2 * j], _pair(sp, e[2 * n - 2 * j - 2])) for j in range(2 * n)]
        return Witness(_rank_one_update(F, N, terms), "O.case3", n)
    failing = [n for n in range(1, top + 1, 2) if gs.d(n) and block_rank(gs, powers[n], -n, n) != gs.d(n)]
    if failing:
        return _sp_like_pair_witness(gs, A, powers, failing[0], "O.case4")
    raise WitnessError("no applicable case: element is in the set")


def verify_witness(gs: GradedSpace, A: Matrix, W: Witness) -> list:
    """List of violated witness properties (empty when the certificate holds)."""
    problems = []
    B = W.B
    if not in_group(gs.space, B):
        problems.append("B is not in the group")
    if B == Matrix.identity(gs.field, gs.dim):
        problems.append("B is the identity")
    if not is_strictly_lower(gs, B):
        problems.append("B - 1 is not strictly block-lower")
    if B @ A != A @ B:
        problems.append("B does not commute with A")
    return problems


def commuting_witness(gs: GradedSpace, A: Matrix) -> Witness:
    _check_query(gs, A)
    if in_bang_set(gs, A, check=False):
        raise WitnessError("element lies in the set; no witness exists")
    builder = {"GL": _gl_witness, "Sp": _sp_witness, "O": _o_witness}[gs.kind]
    W = builder(gs, A)
    problems = verify_witness(gs, A, W)
    if problems:
        raise WitnessError(f"{W.header()}: " + "; ".join(problems))
    return W


# ----------------------------------------------------------------------
# centralizer oracle


def extend_graded_space(gs: GradedSpace, s: int):
    """The same graded model over F_{q^s}, with the embedding table."""
    F = gs.field
    big = field(F.p, F.k * s)
    emb = F.embedding_into(big)
    sp = gs.space
    if sp.kind == "GL":
        new = FormedSpace("GL", sp.dim, big)
    elif sp.kind == "Sp":
        new = FormedSpace("Sp", sp.dim, big, tuple(tuple(emb[x] for x in r) for r in sp.gram))
    else:
        new = make_space_from_quad(big, [[emb[x] for x in r] for r in sp.quad], validate=sp.dim > 0)
    return GradedSpace(new, gs.dims), emb


def centralizer_algebra(F: GF, A: Matrix) -> list:
    """Basis of {g : g A = A g} as matrices."""
    n = A.nrows
    rows = []
    # (gA - Ag)_{ij} = sum_k g_ik A_kj - A_ik g_kj, variables g_ab at index a*n+b
    for i in range(n):
        for j in range(n):
            row = [0] * (n * n)
            for k in range(n):
                if A[k, j]:
                    idx = i * n + k
                    row[idx] = F.add[row[idx]][A[k, j]]
                if A[i, k]:
                    idx = k * n + j
                    row[idx] = F.sub[row[idx]][A[i, k]]
            if any(row):
                rows.append(row)
    if rows:
        sol = null_space_rows(F, rows, n * n)
    else:
        sol = tuple(tuple(int(a == b) for b in range(n * n)) for a in range(n * n))
    return [Matrix(F, tuple(tuple(s[i * n:(i + 1) * n]) for i in range(n)), n) for s in sol]


def group_mask(space: FormedSpace, mats: np.ndarray) -> np.ndarray:
    """Vectorized membership in GL / Sp / SO for a stack of matrices."""
    from .groups import dickson_mask
    F, n = space.field, space.dim
    if n == 0:
        return np.ones(len(mats), dtype=bool)
    if space.kind == "GL":
        if F.q == 2:
            return batch.rank_gf2(mats) == n
        return batch.det(F, mats) != 0
    mT = np.transpose(mats, (0, 2, 1))
    if space.kind == "Sp":
        G = np.array(space.gram, dtype=batch.DTYPE)
        lhs = batch.matmul(F, batch.matmul(F, mT, G[None]), mats)
        ok = (lhs == G[None]).reshape(len(mats), -1).all(axis=1)
        return ok
    cols = np.ascontiguousarray(mT)  # cols[g, j] = image of e_j
    N = len(mats)
    ok = np.ones(N, dtype=bool)
    flat = cols.reshape(N * n, n)
    qv = batch.quad_values(F, space.quad, flat).reshape(N, n)
    for j in range(n):
        ok &= qv[:, j] == space.quad[j][j]
    G = np.array(space.gram, dtype=batch.DTYPE)
    GC = batch.matmul(F, G[None], mats)  # columns G g e_j
    B = batch.matmul(F, mT, GC)  # (g e_i, g e_j)
    for i in range(n):
        for j in range(i + 1, n):
            ok &= B[:, i, j] == space.quad[i][j]
    out = np.zeros(N, dtype=bool)
    if ok.any():
        sub = mats[ok]
        out[np.nonzero(ok)[0]] = dickson_mask(space, sub)
    return out


@functools.lru_cache(maxsize=8)
def _enumerate_or_fail(space: FormedSpace, budget: int):
    """The group as an array, or the BudgetExceeded raised while building it."""
    from .groups import enumerate_group
    try:
        return enumerate_group(space, connected=True, budget=budget)
    except BudgetExceeded as exc:
        return exc


def _cached_group(space: FormedSpace, budget: int) -> np.ndarray:
    out = _enumerate_or_fail(space, budget)
    if isinstance(out, BudgetExceeded):
        raise BudgetExceeded(str(out))
    return out


def _algebra_members(egs: GradedSpace, basis: list, budget: int, chunk: int):
    """Group elements of the span of ``basis``, chunk by chunk."""
    F, n = egs.field, egs.dim
    d = len(basis)
    total = F.q ** d
    stack = np.array([b.rows for b in basis], dtype=batch.DTYPE).reshape(d, n, n)
    add, mul, _, _ = batch.tables(F)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        g = np.zeros((len(idx), n, n), dtype=batch.DTYPE)
        for k in range(d):
            c = ((idx // F.q**k) % F.q).astype(batch.DTYPE)
            g = add[g, mul[c[:, None, None], stack[k][None]]]
        yield g[group_mask(egs.space, g)]


def _group_members(egs: GradedSpace, Ae: Matrix, budget: int, chunk: int):
    F = egs.field
    G = _cached_group(egs.space, budget)
    A = np.array(Ae.rows, dtype=batch.DTYPE)
    for start in range(0, len(G), chunk):
        g = G[start:start + chunk]
        comm = batch.matmul(F, g, A[None]) == batch.matmul(F, A[None], g)
        yield g[comm.reshape(len(g), -1).all(axis=1)]


def centralizer_oracle(gs: GradedSpace, A: Matrix, extension_degrees=(1,), budget: int | None = None,
                       chunk: int = 1 << 16) -> dict:
    """For each extension degree s: does all of G(F_{q^s}) ∩ Z(A) lie in the parabolic?

    Returns {s: bool}.  The commuting group elements come either from the
    centralizer algebra or from a full group enumeration, whichever is
    smaller.  Raises BudgetExceeded when both are too large.
    """
    budget = budget_value(budget)
    out = {}
    upper = np.array([[gs.weights[i] >= gs.weights[j] for j in range(gs.dim)] for i in range(gs.dim)],
                     dtype=bool)
    for s in extension_degrees:
        egs, emb = extend_graded_space(gs, s) if s > 1 else (gs, list(range(gs.field.q)))
        F = egs.field
        Ae = Matrix(F, tuple(tuple(emb[x] for x in r) for r in A.rows), A.ncols)
        basis = centralizer_algebra(F, Ae)
        algebra_size = F.q ** len(basis)
        group_size = group_order_formula(egs.space)
        if min(algebra_size, group_size) > budget:
            raise BudgetExceeded(f"centralizer search over F_{F.q} exceeds budget {budget}")
        if algebra_size <= group_size:
            members = _algebra_members(egs, basis, budget, chunk)
        else:
            members = _group_members(egs, Ae, budget, chunk)
        out[s] = not any(len(g) and np.any(g[:, ~upper] != 0) for g in members)
    return out


# ----------------------------------------------------------------------
# subpieces (orthogonal, characteristic 2)


@dataclass(frozen=True)
class SubpieceLabel:
    M: tuple
    f: tuple

    def __str__(self):
        return f"M=[{','.join(map(str, self.M))}] f=[{','.join(map(str, self.f))}]"

    @classmethod
    def parse(cls, text: str) -> "SubpieceLabel":
        parts = dict(tok.split("=", 1) for tok in text.split())

        def ints(s):
            s = s.strip("[]")
            return tuple(int(x) for x in s.split(",")) if s else ()

        return cls(ints(parts["M"]), ints(parts["f"]))


def odd_set(gs: GradedSpace) -> tuple:
    """M = {n >= 0 : dim V_{-2n} odd}."""
    top = gs.top_weight()
    return tuple(n for n in range(0, top // 2 + 1) if gs.d(-2 * n) % 2)


def allowed_functions(gs: GradedSpace) -> list:
    """The set X of admissible functions {1..t} -> {0,1}, as tuples."""
    M = odd_set(gs)
    t = len(M) - 1
    if t < 0:
        return [()]
    out = []
    for f in itertools.product((0, 1), repeat=t):
        ok = True
        for i in range(1, t + 1):
            gap = M[i] - M[i - 1]
            if gap >= 2 and f[i - 1] != 1:
                ok = False
            if gap == 1 and gs.d(-2 * M[i - 1]) == gs.d(-2 * M[i]) and f[i - 1] != 0:
                ok = False
        if ok:
            out.append(f)
    return out


def alpha(gs: GradedSpace) -> int:
    M = odd_set(gs)
    return sum(1 for i in range(1, len(M))
               if M[i - 1] == M[i] - 1 and gs.d(-2 * M[i - 1]) > gs.d(-2 * M[i]))


def radical_lines(gs: GradedSpace, A: Matrix) -> dict:
    """n -> L_n, the radical of (,) on K_n = A^n(V_{-2n}), for n in M."""
    F, N, sp = gs.field, gs.dim, gs.space
    out = {}
    P = Matrix.identity(F, N)
    M = odd_set(gs)
    powers = [P]
    for _ in range(max(M, default=0)):
        powers.append(powers[-1] @ A)
    for n in M:
        cols = [powers[n].column(k) for k in gs.block(-2 * n)]
        K = Subspace.span(F, N, cols)
        L = sp.restricted_radical(K)
        if L.dim != 1:
            raise ValueError(f"radical of K_{n} has dimension {L.dim}, expected a line")
        out[n] = L
    return out


def subpiece_invariant(gs: GradedSpace, A: Matrix, check: bool = True) -> SubpieceLabel:
    if gs.kind != "O" or gs.field.p != 2:
        raise ValueError("subpieces are defined for orthogonal spaces in characteristic 2")
    if check and not in_bang_set(gs, A):
        raise ValueError("element is not in the set")
    M = odd_set(gs)
    if not M:
        raise ValueError("M is empty: the set is a single orbit")
    lines = radical_lines(gs, A)
    f = tuple(0 if lines[M[i]] == lines[M[i - 1]] else 1 for i in range(1, len(M)))
    label = SubpieceLabel(M, f)
    if f not in allowed_functions(gs):
        raise ValueError(f"{label} is not an admissible function")
    return label


# ----------------------------------------------------------------------
# enumeration


def degree_positions(gs: GradedSpace, shift: int, at_least: bool = False) -> list:
    w = gs.weights
    n = gs.dim
    if at_least:
        return [(i, j) for i in range(n) for j in range(n) if w[i] >= w[j] + shift]
    return [(i, j) for i in range(n) for j in range(n) if w[i] == w[j] + shift]


def graded_lie_basis(gs: GradedSpace, shift: int = 2, at_least: bool = False) -> list:
    """Basis of the Lie algebra part of degree ``shift`` (or >= shift)."""
    return lie_algebra_basis(gs.space, degree_positions(gs, shift, at_least))


def iterate_span(F: GF, basis: list, n: int, budget: int | None = None):
    """Every F-linear combination of ``basis`` as a Matrix (deterministic order)."""
    budget = budget_value(budget)
    d = len(basis)
    if F.q ** d > budget:
        raise BudgetExceeded(f"{F.q}^{d} elements exceed budget {budget}")
    stack = np.array([b.rows for b in basis], dtype=batch.DTYPE).reshape(d, n, n)
    add, mul, _, _ = batch.tables(F)
    coeffs = enumerate_matrices(F, 1, d, budget)[:, 0, :] if d else np.zeros((1, 0), dtype=batch.DTYPE)
    for c in coeffs:
        acc = np.zeros((n, n), dtype=batch.DTYPE)
        for k in range(d):
            if c[k]:
                acc = add[acc, mul[c[k], stack[k]]]
        yield Matrix(F, tuple(tuple(int(x) for x in r) for r in acc), n)


def enumerate_fg2(gs: GradedSpace, budget: int | None = None):
    return iterate_span(gs.field, graded_lie_basis(gs), gs.dim, budget)


def enumerate_bang_set(gs: GradedSpace, budget: int | None = None) -> list:
    return [A for A in enumerate_fg2(gs, budget) if in_bang_set(gs, A, check=False)]


def bang_set_count(gs: GradedSpace, budget: int | None = None) -> int:
    return sum(1 for A in enumerate_fg2(gs, budget) if in_bang_set(gs, A, check=False))
