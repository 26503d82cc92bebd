"""Exact arithmetic over small finite fields: scalars, dense matrices, subspaces.

Field elements are encoded as integers ``0 .. q-1``: the element
``c_0 + c_1 x + ... + c_{k-1} x^{k-1}`` of ``F_p[x]/(m(x))`` is stored as
``c_0 + c_1 p + ... + c_{k-1} p^{k-1}``.  All arithmetic goes through
precomputed tables, so every operation is exact.

Matrices act on column vectors from the left.  Vectors are plain tuples of
encoded scalars.  Over GF(2) the row reductions run on bit-packed rows; the
observable results do not depend on that.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Fixed moduli (Conway polynomials), coefficients listed from x^0 upward.
# Keeping them fixed makes every census bit-reproducible.
CONWAY = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 1): (3, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (5, 4): (2, 4, 4, 0, 1),
    (7, 1): (4, 1),
    (7, 2): (3, 6, 1),
    (7, 3): (4, 0, 6, 1),
    (7, 4): (3, 4, 5, 0, 1),
}

MAX_ORDER = 2401


class FieldError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def _poly_mod_p(a, b, p):
    """Remainder of a by b over F_p (coefficient lists, low degree first)."""
    a = list(a)
    db = len(b) - 1
    lead_inv = pow(b[-1], p - 2, p)
    while len(a) - 1 >= db and any(a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) - 1 < db:
            break
        c = a[-1] * lead_inv % p
        shift = len(a) - 1 - db
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return a


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    k = len(modulus) - 1
    if k == 1:
        return True
    for d in range(1, k // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            divisor = list(tail) + [1]
            if not _poly_mod_p(modulus, divisor, p):
                return False
    return True


class GF:
    """A finite field F_{p^k} with table-driven arithmetic.

    Obtain instances through :func:`field`; they are cached so that two
    descriptors of the same field are the same object.
    """

    def __init__(self, p: int, k: int = 1):
        if p not in (2, 3, 5, 7):
            raise FieldError(f"unsupported characteristic {p}")
        if not 1 <= k <= 4:
            raise FieldError(f"unsupported degree {k}")
        q = p**k
        if q > MAX_ORDER:
            raise FieldError(f"field order {q} exceeds {MAX_ORDER}")
        self.p, self.k, self.q = p, k, q
        self.modulus = CONWAY[(p, k)]
        if not is_irreducible(self.modulus, p):
            raise FieldError(f"modulus {self.modulus} is reducible over F_{p}")
        self._build_tables()

    def __eq__(self, other):
        return isinstance(other, GF) and (self.p, self.k) == (other.p, other.k)

    def __hash__(self):
        return hash((self.p, self.k))

    def _digits(self, a):
        p = self.p
        return [(a // p**i) % p for i in range(self.k)]

    def _encode(self, digits):
        p = self.p
        return sum(c * p**i for i, c in enumerate(digits))

    def _times_generator(self, a):
        """Multiply the encoded element a by the class of x (or the root for k=1)."""
        p, k, mod = self.p, self.k, self.modulus
        if k == 1:
            return a * ((-mod[0]) % p) % p
        d = self._digits(a)
        top = d[-1]
        shifted = [0] + d[:-1]
        if top:
            shifted = [(c - top * m) % p for c, m in zip(shifted, mod[:k])]
        return self._encode(shifted)

    def _build_tables(self):
        p, k, q = self.p, self.k, self.q
        digits = np.array([self._digits(a) for a in range(q)], dtype=np.int64)
        weights = p ** np.arange(k, dtype=np.int64)
        summed = (digits[:, None, :] + digits[None, :, :]) % p
        add = summed @ weights
        negd = (-digits) % p
        neg = negd @ weights
        # exp/log tables; the fixed moduli are primitive so x generates F_q^*
        exp = [1] * (q - 1)
        for i in range(1, q - 1):
            exp[i] = self._times_generator(exp[i - 1])
        log = np.zeros(q, dtype=np.int64)
        log[np.array(exp)] = np.arange(q - 1)
        if len(set(exp)) != q - 1:
            raise FieldError(f"modulus {self.modulus} is not primitive")
        exp_arr = np.array(exp + exp, dtype=np.int64)
        mul = exp_arr[log[:, None] + log[None, :]]
        mul[0, :] = 0
        mul[:, 0] = 0
        self.add = add.tolist()
        self.neg = neg.tolist()
        self.sub = add[:, neg].tolist()
        self.mul = mul.tolist()
        inv = [0] * q
        for a in range(1, q):
            inv[a] = exp[(-int(log[a])) % (q - 1)]
        self.inv = inv
        self.exp, self.log = exp, log.tolist()
        self.square = [self.mul[a][a] for a in range(q)]
        roots = {}
        for a in range(q):
            roots.setdefault(self.square[a], a)
        # smallest square root of every square (unique when p = 2)
        self.sqrt_table = [roots.get(a) for a in range(q)]

    # ------------------------------------------------------------------
    def __repr__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    def __reduce__(self):
        return (field, (self.p, self.k))

    def elements(self) -> range:
        return range(self.q)

    def nonzero(self) -> range:
        return range(1, self.q)

    def from_int(self, n: int) -> int:
        """The image of the integer n under Z -> F_p -> F_q."""
        return n % self.p

    def pow(self, a: int, e: int) -> int:
        r = 1
        mul = self.mul
        for _ in range(e):
            r = mul[r][a]
        return r

    def is_square(self, a: int) -> bool:
        return self.sqrt_table[a] is not None

    def sqrt(self, a: int) -> int:
        r = self.sqrt_table[a]
        if r is None:
            raise FieldError(f"{a} is not a square in {self}")
        return r

    def is_primitive_modulus(self) -> bool:
        """True when x generates the multiplicative group."""
        if self.q == 2:
            return True
        gen = self.p if self.k > 1 else (-self.modulus[0]) % self.p
        seen, a = set(), 1
        for _ in range(self.q - 1):
            a = self.mul[a][gen]
            seen.add(a)
        return len(seen) == self.q - 1

    def embedding_into(self, big: "GF") -> list:
        """A field homomorphism self -> big as a lookup list."""
        if big.p != self.p or big.k % self.k:
            raise FieldError(f"{self} does not embed in {big}")
        if big is self:
            return list(range(self.q))
        mod = self.modulus
        # find a root of our modulus inside the big field
        for alpha in big.elements():
            acc, power = 0, 1
            for c in mod:
                acc = big.add[acc][big.mul[big.from_int(c)][power]]
                power = big.mul[power][alpha]
            if acc == 0:
                break
        else:  # pragma: no cover - irreducible moduli always split
            raise FieldError("no root found")
        table = []
        for a in self.elements():
            acc, power = 0, 1
            for c in self._digits(a):
                acc = big.add[acc][big.mul[big.from_int(c)][power]]
                power = big.mul[power][alpha]
            table.append(acc)
        return table


@functools.lru_cache(maxsize=None)
@functools.lru_cache(maxsize=None)
def _cached_field(p: int, k: int) -> GF:
    return GF(p, k)


def field(p: int, k: int = 1) -> GF:
    return _cached_field(int(p), int(k))


def field_of_order(q: int) -> GF:
    for p in (2, 3, 5, 7):
        k, n = 0, q
        while n % p == 0:
            n //= p
            k += 1
        if n == 1 and k:
            return field(p, k)
    raise FieldError(f"{q} is not a supported prime power")


# ----------------------------------------------------------------------
# raw row-tuple kernels


def _pack(row):
    v = 0
    for i, x in enumerate(row):
        if x:
            v |= 1 << i
    return v


def _unpack(v, n):
    return tuple((v >> i) & 1 for i in range(n))


def _rref_gf2(rows, ncols):
    packed = [_pack(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        bit = 1 << c
        for i in range(r, len(packed)):
            if packed[i] & bit:
                break
        else:
            continue
        packed[r], packed[i] = packed[i], packed[r]
        pr = packed[r]
        for j in range(len(packed)):
            if j != r and packed[j] & bit:
                packed[j] ^= pr
        pivots.append(c)
        r += 1
        if r == len(packed):
            break
    return [_unpack(v, ncols) for v in packed[:r]], pivots


def rref_rows(F: GF, rows, ncols):
    """Reduced row echelon form.  Returns (nonzero rows, pivot columns)."""
    if F.q == 2:
        return _rref_gf2(rows, ncols)
    add, mul, neg, inv = F.add, F.mul, F.neg, F.inv
    work = [list(r) for r in rows]
    pivots = []
    r = 0
    nrows = len(work)
    for c in range(ncols):
        for i in range(r, nrows):
            if work[i][c]:
                break
        else:
            continue
        work[r], work[i] = work[i], work[r]
        pr = work[r]
        s = inv[pr[c]]
        if s != 1:
            ms = mul[s]
            pr = work[r] = [ms[x] for x in pr]
        for j in range(nrows):
            if j != r:
                rj = work[j]
                f = rj[c]
                if f:
                    mf = mul[neg[f]]
                    work[j] = [add[x][mf[y]] for x, y in zip(rj, pr)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return [tuple(w) for w in work[:r]], pivots


def mat_mul_rows(F: GF, A, B):
    if not A:
        return ()
    if F.q == 2:
        ncols = len(B[0]) if B else 0
        pb = [_pack(r) for r in B]
        out = []
        for row in A:
            v = 0
            for x, b in zip(row, pb):
                if x:
                    v ^= b
            out.append(_unpack(v, ncols))
        return tuple(out)
    add, mul = F.add, F.mul
    cols = list(zip(*B))
    out = []
    for row in A:
        newrow = []
        for col in cols:
            acc = 0
            for x, y in zip(row, col):
                if x and y:
                    acc = add[acc][mul[x][y]]
            newrow.append(acc)
        out.append(tuple(newrow))
    return tuple(out)


def mat_vec(F: GF, A, v):
    add, mul = F.add, F.mul
    out = []
    for row in A:
        acc = 0
        for x, y in zip(row, v):
            if x and y:
                acc = add[acc][mul[x][y]]
        out.append(acc)
    return tuple(out)


def vec_add(F: GF, u, v):
    add = F.add
    return tuple(add[a][b] for a, b in zip(u, v))


def vec_sub(F: GF, u, v):
    sub = F.sub
    return tuple(sub[a][b] for a, b in zip(u, v))


def vec_scale(F: GF, c, v):
    mc = F.mul[c]
    return tuple(mc[a] for a in v)


def dot(F: GF, u, v):
    add, mul = F.add, F.mul
    acc = 0
    for a, b in zip(u, v):
        if a and b:
            acc = add[acc][mul[a][b]]
    return acc


def lin_comb(F: GF, coeffs, vectors, n):
    """sum_i coeffs[i] * vectors[i] as a length-n tuple."""
    add, mul = F.add, F.mul
    acc = [0] * n
    for c, v in zip(coeffs, vectors):
        if c:
            mc = mul[c]
            for i, x in enumerate(v):
                if x:
                    acc[i] = add[acc[i]][mc[x]]
    return tuple(acc)


def null_space_rows(F: GF, rows, ncols):
    """Basis (RREF) of {v : rows . v = 0}."""
    red, pivots = rref_rows(F, rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    neg = F.neg
    basis = []
    for fcol in free:
        v = [0] * ncols
        v[fcol] = 1
        for row, pc in zip(red, pivots):
            v[pc] = neg[row[fcol]]
        basis.append(tuple(v))
    if not basis:
        return ()
    red2, _ = rref_rows(F, basis, ncols)
    return tuple(red2)


# ----------------------------------------------------------------------
# public value types


@dataclass(frozen=True)
class Matrix:
    """Dense matrix over a finite field; ``rows`` is a tuple of tuples."""

    field: GF
    rows: tuple
    ncols: int

    def __post_init__(self):
        for r in self.rows:
            if len(r) != self.ncols:
                raise DimensionError("ragged matrix")

    @classmethod
    def from_rows(cls, F: GF, rows: Iterable[Iterable[int]], ncols: int | None = None) -> "Matrix":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            for x in r:
                if not 0 <= x < F.q:
                    raise FieldError(f"entry {x} not in {F}")
        return cls(F, rows, ncols)

    @classmethod
    def zeros(cls, F: GF, n: int, m: int | None = None) -> "Matrix":
        m = n if m is None else m
        return cls(F, tuple((0,) * m for _ in range(n)), m)

    @classmethod
    def identity(cls, F: GF, n: int) -> "Matrix":
        return cls(F, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), n)

    @classmethod
    def from_columns(cls, F: GF, cols: Sequence[Sequence[int]], nrows: int) -> "Matrix":
        if not cols:
            return cls(F, tuple(() for _ in range(nrows)), 0)
        return cls(F, tuple(zip(*cols)), len(cols))

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list:
        return [self.column(j) for j in range(self.ncols)]

    @property
    def T(self) -> "Matrix":
        return Matrix(self.field, tuple(zip(*self.rows)) if self.rows else tuple(() for _ in range(self.ncols)),
                      self.nrows)

    def _check(self, other):
        if other.field != self.field:
            raise FieldError("matrices over different fields")

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        rows = mat_mul_rows(self.field, self.rows, other.rows)
        return Matrix(self.field, tuple(rows), other.ncols)

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        add = self.field.add
        return Matrix(self.field, tuple(tuple(add[a][b] for a, b in zip(r, s))
                                        for r, s in zip(self.rows, other.rows)), self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        sub = self.field.sub
        return Matrix(self.field, tuple(tuple(sub[a][b] for a, b in zip(r, s))
                                        for r, s in zip(self.rows, other.rows)), self.ncols)

    def __neg__(self) -> "Matrix":
        neg = self.field.neg
        return Matrix(self.field, tuple(tuple(neg[a] for a in r) for r in self.rows), self.ncols)

    def scale(self, c: int) -> "Matrix":
        mc = self.field.mul[c]
        return Matrix(self.field, tuple(tuple(mc[a] for a in r) for r in self.rows), self.ncols)

    def apply(self, v: Sequence[int]) -> tuple:
        return mat_vec(self.field, self.rows, v)

    def power(self, e: int) -> "Matrix":
        if self.nrows != self.ncols:
            raise DimensionError("power of a non-square matrix")
        result = Matrix.identity(self.field, self.nrows)
        base = self
        while e:
            if e & 1:
                result = result @ base
            base = base @ base
            e >>= 1
        return result

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def rank(self) -> int:
        return len(rref_rows(self.field, self.rows, self.ncols)[0])

    def inverse(self) -> "Matrix":
        n = self.nrows
        if n != self.ncols:
            raise DimensionError("inverse of a non-square matrix")
        aug = [r + tuple(int(i == j) for j in range(n)) for i, r in enumerate(self.rows)]
        red, pivots = rref_rows(self.field, aug, 2 * n)
        if len(red) < n or pivots[n - 1] != n - 1:
            raise ValueError("matrix is singular")
        return Matrix(self.field, tuple(r[n:] for r in red), n)

    def det(self) -> int:
        F = self.field
        n = self.nrows
        work = [list(r) for r in self.rows]
        d = 1
        for c in range(n):
            for i in range(c, n):
                if work[i][c]:
                    break
            else:
                return 0
            if i != c:
                work[c], work[i] = work[i], work[c]
                d = F.neg[d]
            pivot = work[c][c]
            d = F.mul[d][pivot]
            pinv = F.inv[pivot]
            for j in range(c + 1, n):
                f = work[j][c]
                if f:
                    m = F.mul[F.neg[f]][pinv]
                    work[j] = [F.add[x][F.mul[m][y]] for x, y in zip(work[j], work[c])]
        return d

    def is_nilpotent(self) -> bool:
        return self.power(self.nrows).is_zero()

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix(self.field, tuple(tuple(self.rows[i][j] for j in cols) for i in rows), len(cols))

    def to_text(self) -> str:
        F = self.field
        lines = [f"{self.nrows} {self.ncols} {F.p} {F.k}"]
        lines += [" ".join(str(x) for x in r) for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Matrix":
        tokens = text.split()
        nrows, ncols, p, k = (int(t) for t in tokens[:4])
        entries = [int(t) for t in tokens[4:]]
        if len(entries) != nrows * ncols:
            raise DimensionError(f"expected {nrows * ncols} entries, got {len(entries)}")
        F = field(p, k)
        return cls.from_rows(F, [entries[i * ncols:(i + 1) * ncols] for i in range(nrows)], ncols)

    def __str__(self):
        return "\n".join(" ".join(str(x) for x in r) for r in self.rows)


@dataclass(frozen=True)
class Subspace:
    """A subspace of F^n stored by the RREF basis of its row span."""

    field: GF
    ambient_dim: int
    basis: tuple

    @classmethod
    def span(cls, F: GF, n: int, vectors: Iterable[Sequence[int]]) -> "Subspace":
        vecs = [tuple(v) for v in vectors]
        for v in vecs:
            if len(v) != n:
                raise DimensionError(f"vector of length {len(v)} in F^{n}")
        if not vecs:
            return cls(F, n, ())
        red, _ = rref_rows(F, vecs, n)
        return cls(F, n, tuple(red))

    @classmethod
    def zero(cls, F: GF, n: int) -> "Subspace":
        return cls(F, n, ())

    @classmethod
    def full(cls, F: GF, n: int) -> "Subspace":
        return cls(F, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def pivots(self) -> list:
        out = []
        for row in self.basis:
            for j, x in enumerate(row):
                if x:
                    out.append(j)
                    break
        return out

    def _check(self, other: "Subspace"):
        if other.field != self.field:
            raise FieldError("subspaces over different fields")
        if other.ambient_dim != self.ambient_dim:
            raise DimensionError("subspaces of different ambient spaces")

    def contains_vector(self, v: Sequence[int]) -> bool:
        return self.reduce(v) is not None and not any(self.reduce(v)[0])

    def reduce(self, v: Sequence[int]):
        """Return (residual, coefficients) of v against the RREF basis."""
        F = self.field
        add, mul, neg = F.add, F.mul, F.neg
        res = list(v)
        coeffs = []
        for row, pc in zip(self.basis, self.pivots()):
            c = res[pc]
            coeffs.append(c)
            if c:
                mc = mul[neg[c]]
                for j, x in enumerate(row):
                    if x:
                        res[j] = add[res[j]][mc[x]]
        return tuple(res), tuple(coeffs)

    def coordinates(self, v: Sequence[int]) -> tuple:
        """Coefficients of v in the RREF basis; raises if v is outside."""
        res, coeffs = self.reduce(v)
        if any(res):
            raise ValueError(f"vector {tuple(v)} not in subspace")
        return coeffs

    def __contains__(self, v) -> bool:
        res, _ = self.reduce(v)
        return not any(res)

    def contains(self, other: "Subspace") -> bool:
        self._check(other)
        return all(v in self for v in other.basis)

    def __le__(self, other: "Subspace") -> bool:
        return other.contains(self)

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace.span(self.field, self.ambient_dim, self.basis + other.basis)

    def intersection(self, other: "Subspace") -> "Subspace":
        self._check(other)
        F, n = self.field, self.ambient_dim
        if not self.basis or not other.basis:
            return Subspace.zero(F, n)
        # (a, b) with sum a_i u_i = sum b_j w_j; columns of [U | W]
        cols = list(self.basis) + list(other.basis)
        rows = [tuple(c[i] for c in cols) for i in range(n)]
        # kernel of [U | -W] equals kernel of [U | W] up to sign of b
        ker = null_space_rows(F, rows, len(cols))
        u = len(self.basis)
        vecs = [lin_comb(F, k[:u], self.basis, n) for k in ker]
        return Subspace.span(F, n, vecs)

    def complement_basis(self, sub: "Subspace") -> list:
        """Vectors completing a basis of ``sub`` to a basis of self.

        Greedy over the RREF basis rows of self, in order.
        """
        self._check(sub)
        if not self.contains(sub):
            raise ValueError("not a subspace")
        F, n = self.field, self.ambient_dim
        chosen = []
        current = sub
        for v in self.basis:
            if v not in current:
                chosen.append(v)
                current = Subspace.span(F, n, current.basis + (v,))
            if current.dim == self.dim:
                break
        return chosen

    def as_matrix(self) -> Matrix:
        return Matrix(self.field, self.basis, self.ambient_dim)


def mat_rank_kernel_image(A: Matrix):
    """(rank, right kernel, column space) of A."""
    F = A.field
    kernel = Subspace(F, A.ncols, null_space_rows(F, A.rows, A.ncols))
    image = Subspace.span(F, A.nrows, A.columns()) if A.ncols else Subspace.zero(F, A.nrows)
    return image.dim, kernel, image


def image_of(A: Matrix, U: Subspace) -> Subspace:
    """A(U) as a subspace."""
    return Subspace.span(A.field, A.nrows, [A.apply(v) for v in U.basis])


def preimage(A: Matrix, W: Subspace) -> Subspace:
    """{v : A v in W}."""
    F, n = A.field, A.ncols
    # pick linear functionals cutting out W, compose with A
    cut = null_space_rows(F, W.basis, W.ambient_dim) if W.basis else tuple(
        tuple(int(i == j) for j in range(W.ambient_dim)) for i in range(W.ambient_dim))
    rows = [tuple(dot(F, c, A.column(j)) for j in range(n)) for c in cut]
    if not rows:
        return Subspace.full(F, n)
    return Subspace(F, n, null_space_rows(F, rows, n))


def subspace_ops(U: Subspace, W: Subspace) -> dict:
    """Sum, intersection, equality and containment of two subspaces."""
    U._check(W)
    return {
        "sum": U + W,
        "intersection": U.intersection(W),
        "equal": U == W,
        "contains": U.contains(W),
        "contained_in": W.contains(U),
    }


def quotient_basis(U: Subspace, W: Subspace) -> list:
    """Section vectors spanning a complement of W inside U."""
    return U.complement_basis(W)


def coordinates_in(F: GF, basis: Sequence[Sequence[int]], n: int):
    """A solver v -> coefficients of v in the given (independent) basis."""
    k = len(basis)
    # rows of [basis^T | I]: reduce the transposed system once
    rows = [tuple(b) + tuple(int(i == j) for j in range(k)) for i, b in enumerate(basis)]
    red, pivots = rref_rows(F, rows, n + k)
    if len(red) != k or (pivots and pivots[-1] >= n):
        raise ValueError("basis vectors are dependent")
    add, mul, neg = F.add, F.mul, F.neg

    def solve(v):
        res = list(v) + [0] * k
        for row, pc in zip(red, pivots):
            c = res[pc]
            if c:
                mc = mul[neg[c]]
                for j, x in enumerate(row):
                    if x:
                        res[j] = add[res[j]][mc[x]]
        if any(res[:n]):
            raise ValueError(f"vector {tuple(v)} not in span")
        # res[n:] holds -(coefficients)
        return tuple(neg[x] for x in res[n:])

    return solve


def quotient_map(U: Subspace, W: Subspace, A: Matrix) -> Matrix:
    """Matrix of the map induced by A on U/W in the section basis.

    The section basis completes W's RREF basis greedily from U's RREF rows.
    Raises ValueError naming the offending vector when A(U) is not inside U
    or A(W) is not inside W.
    """
    F = A.field
    if not U.contains(W):
        raise ValueError("W is not contained in U")
    for w in W.basis:
        img = A.apply(w)
        if img not in W:
            raise ValueError(f"A does not preserve W: A{w} = {img}")
    section = quotient_basis(U, W)
    n = U.ambient_dim
    solve = coordinates_in(F, list(section) + list(W.basis), n)
    d = len(section)
    cols = []
    for s in section:
        img = A.apply(s)
        try:
            coeffs = solve(img)
        except ValueError:
            raise ValueError(f"A does not preserve U: A{s} = {img}") from None
        cols.append(coeffs[:d])
    return Matrix.from_columns(F, cols, d) if d else Matrix.zeros(F, 0)
