"""Vector spaces carrying a symplectic form or a quadratic form.

A :class:`FormedSpace` is one of

* ``GL``: a bare vector space,
* ``Sp``: a space with a nondegenerate alternating form,
* ``O``: a space with a quadratic form ``Q``, stored as an upper-triangular
  coefficient table ``Q(v) = sum_{i<=j} q_ij v_i v_j``.  The bilinear form is
  its polarization.  In characteristic 2 with odd dimension the polar form
  has a one-dimensional radical on which ``Q`` is nonzero.

Group membership for orthogonal spaces also reports the Dickson component.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .exactlin import (
    GF,
    DimensionError,
    Matrix,
    Subspace,
    dot,
    field,
    lin_comb,
    mat_vec,
    null_space_rows,
)

KINDS = ("GL", "Sp", "O")

NOT_IN_GROUP = "not_in_O_or_Sp"
IN_GL = "in_GL"
IN_SP = "in_Sp"
IN_SO = "in_O_Dickson0"
IN_O_NOT_SO = "in_O_Dickson1"


class FormError(ValueError):
    pass


@dataclass(frozen=True)
class FormedSpace:
    kind: str
    dim: int
    field: GF
    gram: tuple | None = None
    quad: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FormError(f"unknown kind {self.kind!r}")
        if self.kind == "GL":
            return
        if self.gram is None or len(self.gram) != self.dim:
            raise FormError("missing or malformed gram matrix")
        if self.kind == "O" and (self.quad is None or len(self.quad) != self.dim):
            raise FormError("orthogonal space needs a quadratic table")

    # -- evaluation --------------------------------------------------------
    def bil(self, u: Sequence[int], v: Sequence[int]) -> int:
        """The bilinear form (u, v)."""
        return dot(self.field, u, mat_vec(self.field, self.gram, v))

    def Q(self, v: Sequence[int]) -> int:
        F = self.field
        add, mul = F.add, F.mul
        acc = 0
        quad = self.quad
        for i, vi in enumerate(v):
            if vi:
                row = quad[i]
                s = 0
                for j in range(i, len(v)):
                    c = row[j]
                    if c and v[j]:
                        s = add[s][mul[c][v[j]]]
                if s:
                    acc = add[acc][mul[vi][s]]
        return acc

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def p(self) -> int:
        return self.field.p

    def basis(self):
        n = self.dim
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]

    # -- structure ---------------------------------------------------------
    def radical(self) -> Subspace:
        """Radical of the bilinear form (zero for GL and Sp)."""
        if self.kind != "O":
            return Subspace.zero(self.field, self.dim)
        return Subspace(self.field, self.dim, null_space_rows(self.field, self.gram, self.dim))

    @functools.cached_property
    def radical_space(self) -> Subspace:
        return self.radical()

    def perp(self, U: Subspace) -> Subspace:
        """{x : (x, U) = 0}."""
        F, n = self.field, self.dim
        if self.kind == "GL":
            raise FormError("GL spaces carry no form")
        if not U.basis:
            return Subspace.full(F, n)
        # (x, u) = x^T G u, so the functionals are the vectors G u
        rows = [mat_vec(F, self.gram, u) for u in U.basis]
        return Subspace(F, n, null_space_rows(F, rows, n))

    def restricted_radical(self, W: Subspace) -> Subspace:
        """Radical of the bilinear form restricted to W (a subspace of W)."""
        F, n = self.field, self.dim
        basis = W.basis
        if not basis:
            return W
        k = len(basis)
        gw = [[self.bil(a, b) for b in basis] for a in basis]
        coeff = null_space_rows(F, gw, k)
        return Subspace.span(F, n, [lin_comb(F, c, basis, n) for c in coeff])

    def is_nondegenerate_on(self, W: Subspace) -> bool:
        """Nondegeneracy of the restriction of the forms to W.

        Sp / odd characteristic: the restricted bilinear form is nonsingular.
        Characteristic 2, kind O: the restricted radical has dimension at most
        one and Q does not vanish on it.
        """
        rad = self.restricted_radical(W)
        if rad.dim == 0:
            return True
        if self.kind != "O" or self.p != 2 or rad.dim > 1:
            return False
        return self.Q(rad.basis[0]) != 0

    def is_totally_singular(self, W: Subspace) -> bool:
        """Both forms vanish identically on W (Q on O spaces, (,) on Sp)."""
        b = W.basis
        for i, u in enumerate(b):
            if self.kind == "O" and self.Q(u):
                return False
            for v in b[i + 1:] if self.kind == "O" else b:
                if self.bil(u, v):
                    return False
        return True

    def validate(self) -> None:
        """Raise FormError unless the stored data define a nondegenerate form."""
        F, n = self.field, self.dim
        if self.kind == "GL":
            return
        G = Matrix(F, self.gram, n)
        if self.kind == "Sp":
            if n % 2:
                raise FormError("symplectic spaces have even dimension")
            for i in range(n):
                if G[i, i]:
                    raise FormError(f"gram not alternating at ({i},{i})")
                for j in range(i + 1, n):
                    if G[i, j] != F.neg[G[j, i]]:
                        raise FormError(f"gram not alternating at ({i},{j})")
            if G.rank() != n:
                raise FormError("symplectic form is singular")
            return
        for i in range(n):
            for j in range(i):
                if self.quad[i][j]:
                    raise FormError("quadratic table must be upper triangular")
        for i in range(n):
            if G[i, i] != F.add[self.quad[i][i]][self.quad[i][i]]:
                raise FormError(f"gram is not the polarization of Q at ({i},{i})")
            for j in range(i + 1, n):
                if G[i, j] != self.quad[i][j] or G[j, i] != self.quad[i][j]:
                    raise FormError(f"gram is not the polarization of Q at ({i},{j})")
        if not self.is_nondegenerate_on(Subspace.full(F, n)):
            raise FormError("quadratic form is degenerate")

    # -- serialization -----------------------------------------------------
    def to_text(self) -> str:
        F = self.field
        out = [f"{self.kind} {self.dim} {F.p} {F.k}"]
        if self.kind != "GL":
            out.append("gram")
            out.append(Matrix(F, self.gram, self.dim).to_text().rstrip("\n"))
        if self.kind == "O":
            out.append("quad")
            out.append(Matrix(F, self.quad, self.dim).to_text().rstrip("\n"))
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FormedSpace":
        """Parse a space descriptor.

        The first line is ``kind dim p k``.  Without further blocks the split
        model is returned; otherwise ``gram`` and ``quad`` keywords introduce
        matrices in the matrix text format.
        """
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        kind, dim, p, k = lines[0].split()
        dim, F = int(dim), field(int(p), int(k))
        blocks: dict = {}
        i = 1
        while i < len(lines):
            key = lines[i].strip().lower()
            if key not in ("gram", "quad"):
                raise FormError(f"unexpected line {lines[i]!r}")
            rows = lines[i + 1:i + 2 + dim]
            blocks[key] = Matrix.from_text("\n".join(rows))
            i += 2 + dim
        if not blocks:
            return make_split_space(kind, dim, F)
        if kind == "O" and "quad" in blocks:
            return make_space_from_quad(F, blocks["quad"].rows)
        if kind == "Sp" and "gram" in blocks:
            sp = cls("Sp", dim, F, blocks["gram"].rows, None)
            sp.validate()
            return sp
        raise FormError(f"descriptor for {kind} lacks the needed block")


def polarize(F: GF, quad: Sequence[Sequence[int]]) -> tuple:
    n = len(quad)
    gram = [[0] * n for _ in range(n)]
    for i in range(n):
        gram[i][i] = F.add[quad[i][i]][quad[i][i]]
        for j in range(i + 1, n):
            gram[i][j] = gram[j][i] = quad[i][j]
    return tuple(tuple(r) for r in gram)


def make_space_from_quad(F: GF, quad, validate: bool = True) -> FormedSpace:
    quad = tuple(tuple(r) for r in quad)
    sp = FormedSpace("O", len(quad), F, polarize(F, quad), quad)
    if validate:
        sp.validate()
    return sp


def make_split_space(kind: str, dim: int, F: GF) -> FormedSpace:
    """Split model: hyperbolic pairs (e_1, f_1, e_2, f_2, ...), plus z for odd O."""
    if kind == "GL":
        return FormedSpace("GL", dim, F)
    if kind == "Sp":
        if dim % 2:
            raise FormError("symplectic spaces have even dimension")
        gram = [[0] * dim for _ in range(dim)]
        for i in range(0, dim, 2):
            gram[i][i + 1] = 1
            gram[i + 1][i] = F.neg[1]
        return FormedSpace("Sp", dim, F, tuple(tuple(r) for r in gram))
    if kind == "O":
        if dim < 1:
            raise FormError("orthogonal spaces need dim >= 1")
        quad = [[0] * dim for _ in range(dim)]
        for i in range(0, dim - 1, 2):
            quad[i][i + 1] = 1
        if dim % 2:
            quad[dim - 1][dim - 1] = 1
        return make_space_from_quad(F, quad)
    raise FormError(f"unknown kind {kind!r}")


# ----------------------------------------------------------------------
# Lie algebra and group membership


def lie_algebra_member(space: FormedSpace, T: Matrix) -> bool:
    if T.shape != (space.dim, space.dim):
        raise DimensionError("matrix does not match the space")
    if space.kind == "GL":
        return True
    F = space.field
    n = space.dim
    cols = T.columns()
    G = space.gram
    if space.kind == "Sp":
        # (T e_i, e_j) + (e_i, T e_j) = (G^T T + ... ) checked entrywise
        for i in range(n):
            for j in range(n):
                a = dot(F, cols[i], [G[k][j] for k in range(n)])
                b = dot(F, G[i], cols[j])
                if F.add[a][b]:
                    return False
        return True
    # O: (Tv, v) = 0 on basis vectors and pairwise sums, T kills the radical
    basis = space.basis()

    def tv_v(v):
        return space.bil(T.apply(v), v)

    for i in range(n):
        if tv_v(basis[i]):
            return False
    for i, j in itertools.combinations(range(n), 2):
        v = tuple(F.add[a][b] for a, b in zip(basis[i], basis[j]))
        if tv_v(v):
            return False
    for r in space.radical_space.basis:
        if any(T.apply(r)):
            return False
    return True


def preserves_form(space: FormedSpace, g: Matrix) -> bool:
    """Does g preserve the structure (Q for O, (,) for Sp)?  GL: invertible."""
    n = space.dim
    if g.shape != (n, n):
        raise DimensionError("matrix does not match the space")
    if space.kind == "GL":
        return g.rank() == n
    cols = g.columns()
    if space.kind == "Sp":
        for i in range(n):
            for j in range(i + 1, n):
                if space.bil(cols[i], cols[j]) != space.gram[i][j]:
                    return False
        return True
    quad = space.quad
    for i in range(n):
        if space.Q(cols[i]) != quad[i][i]:
            return False
        for j in range(i + 1, n):
            if space.bil(cols[i], cols[j]) != quad[i][j]:
                return False
    return True


def dickson_invariant(space: FormedSpace, g: Matrix) -> int:
    """0 when g lies in SO(V), 1 otherwise (g assumed to preserve Q).

    Characteristic 2, even dimension: rank(g - 1) mod 2.  Characteristic 2,
    odd dimension: the orthogonal group is connected, so always 0.  Odd
    characteristic: 0 iff det g = 1.
    """
    F = space.field
    if F.p == 2:
        if space.dim % 2:
            return 0
        return (g - Matrix.identity(F, space.dim)).rank() % 2
    return 0 if g.det() == 1 else 1


def group_member(space: FormedSpace, g: Matrix) -> str:
    if space.kind == "GL":
        return IN_GL if g.rank() == space.dim else NOT_IN_GROUP
    if not preserves_form(space, g):
        return NOT_IN_GROUP
    if space.kind == "Sp":
        return IN_SP
    return IN_SO if dickson_invariant(space, g) == 0 else IN_O_NOT_SO


def in_group(space: FormedSpace, g: Matrix) -> bool:
    """Membership in the connected group GL(V), Sp(V) or SO(V)."""
    return group_member(space, g) in (IN_GL, IN_SP, IN_SO)


# ----------------------------------------------------------------------
# orders


def gl_order(n: int, q: int) -> int:
    return math.prod(q**n - q**i for i in range(n))


def sp_order(dim: int, q: int) -> int:
    n = dim // 2
    return q ** (n * n) * math.prod(q ** (2 * i) - 1 for i in range(1, n + 1))


def so_order(dim: int, q: int) -> int:
    """Order of the split special orthogonal group SO(V) (identity component)."""
    if dim % 2:
        return sp_order(dim - 1, q)
    n = dim // 2
    if n == 0:
        return 1
    return q ** (n * (n - 1)) * (q**n - 1) * math.prod(q ** (2 * i) - 1 for i in range(1, n))


def o_order(dim: int, q: int) -> int:
    """Order of the full orthogonal group of the split form."""
    if dim % 2 and q % 2 == 0:
        return so_order(dim, q)
    return 2 * so_order(dim, q)


def group_order_formula(space: FormedSpace, full_orthogonal: bool = False) -> int:
    q, n = space.q, space.dim
    if space.kind == "GL":
        return gl_order(n, q)
    if space.kind == "Sp":
        return sp_order(n, q)
    return o_order(n, q) if full_orthogonal else so_order(n, q)


def number_of_roots(kind: str, dim: int) -> int:
    if kind == "GL":
        return dim * dim - dim
    n = dim // 2
    if kind == "Sp" or dim % 2:
        return 2 * n * n
    return 2 * n * n - 2 * n


def group_order(space: FormedSpace, method: str = "formula", full_orthogonal: bool = False,
                budget: int | None = None) -> int:
    """Order of GL(V), Sp(V) or SO(V) (or O(V) with ``full_orthogonal``).

    ``method="enumerate"`` counts the elements one by one; ``"formula"`` uses
    the classical closed forms.
    """
    if method == "formula":
        return group_order_formula(space, full_orthogonal)
    from .groups import enumerate_group
    mats = enumerate_group(space, connected=not full_orthogonal, budget=budget)
    return len(mats)



def lie_algebra_basis(space: FormedSpace, positions=None) -> list:
    """Basis of {T in fg : T_ij = 0 for (i, j) outside ``positions``}.

    ``positions`` is a list of (row, col) pairs; None means all entries.
    The defining conditions are linear in the entries of T, so the answer is
    the null space of a constraint matrix over the free entries.
    """
    F, n = space.field, space.dim
    if positions is None:
        positions = [(i, j) for i in range(n) for j in range(n)]
    positions = list(positions)
    index = {pos: k for k, pos in enumerate(positions)}
    nv = len(positions)
    if nv == 0:
        return []
    rows = []
    G = space.gram

    def add_term(row, i, j, c):
        k = index.get((i, j))
        if k is not None and c:
            row[k] = F.add[row[k]][c]

    if space.kind == "Sp":
        for i in range(n):
            for j in range(i + 1, n):
                row = [0] * nv
                for k in range(n):
                    add_term(row, k, i, G[k][j])  # (T e_i, e_j)
                    add_term(row, k, j, G[i][k])  # (e_i, T e_j)
                rows.append(row)
    elif space.kind == "O":
        for i in range(n):
            row = [0] * nv
            for k in range(n):
                add_term(row, k, i, G[k][i])
            rows.append(row)
            for j in range(i + 1, n):
                row = [0] * nv
                for k in range(n):
                    add_term(row, k, i, G[k][j])
                    add_term(row, k, j, G[k][i])
                rows.append(row)
        for r in space.radical_space.basis:
            for k in range(n):
                row = [0] * nv
                for j in range(n):
                    add_term(row, k, j, r[j])
                rows.append(row)
    rows = [r for r in rows if any(r)]
    if rows:
        sol = null_space_rows(F, rows, nv)
    else:
        sol = tuple(tuple(int(a == b) for b in range(nv)) for a in range(nv))
    basis = []
    for s in sol:
        M = [[0] * n for _ in range(n)]
        for (i, j), c in zip(positions, s):
            M[i][j] = c
        basis.append(Matrix(F, tuple(tuple(r) for r in M), n))
    return basis
