"""Partitions, good gradings, filtrations and associated graded spaces.

A grading is stored by its dimension vector ``{weight: dim}``.  The basis of
a graded space lists the weight blocks in strictly decreasing weight order,
so endomorphisms raising weights are block-lower-triangular and the
parabolic of weight-nondecreasing maps is block-upper-triangular.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from .exactlin import (
    GF,
    Matrix,
    Subspace,
    coordinates_in,
    field,
)
from .formspace import FormedSpace, FormError, make_space_from_quad

# ----------------------------------------------------------------------
# partitions and labels


def partitions(n: int, max_part: int | None = None) -> Iterator[tuple]:
    """Partitions of n in lexicographically decreasing order."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def multiplicities(lam) -> dict:
    out: dict = {}
    for part in lam:
        out[part] = out.get(part, 0) + 1
    return out


def is_valid_label(kind: str, lam) -> bool:
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)) or any(x <= 0 for x in lam):
        return False
    mult = multiplicities(lam)
    if kind == "Sp":
        return all(m % 2 == 0 for part, m in mult.items() if part % 2)
    if kind == "O":
        return all(m % 2 == 0 for part, m in mult.items() if part % 2 == 0)
    return kind == "GL"


@dataclass(frozen=True)
class PieceLabel:
    kind: str
    partition: tuple

    def __post_init__(self):
        if not is_valid_label(self.kind, self.partition):
            raise ValueError(f"{list(self.partition)} is not a valid {self.kind} label")

    @property
    def dim(self) -> int:
        return sum(self.partition)

    def __str__(self):
        return "[" + ",".join(str(x) for x in self.partition) + "]"


def enumerate_piece_labels(kind: str, dim: int) -> list:
    if kind == "Sp" and dim % 2:
        return []
    return [PieceLabel(kind, lam) for lam in partitions(dim) if is_valid_label(kind, lam)]


def dims_from_partition(lam) -> dict:
    """Weight multiplicities of the grading attached to a Jordan type."""
    dims: dict = {}
    for part in lam:
        for w in range(part - 1, -part, -2):
            dims[w] = dims.get(w, 0) + 1
    return dict(sorted(dims.items(), reverse=True))


def partition_from_dims(dims: dict) -> tuple:
    """Inverse of :func:`dims_from_partition` on good dimension vectors."""
    parts = []
    top = max((w for w, d in dims.items() if d), default=0)
    for i in range(top, -1, -1):
        mult = dims.get(i, 0) - dims.get(i + 2, 0)
        if mult < 0:
            raise ValueError(f"dimension vector {dims} is not good")
        parts += [i + 1] * mult
    return tuple(parts)


# ----------------------------------------------------------------------
# graded spaces


def _clean_dims(dims: dict) -> tuple:
    return tuple(sorted(((int(w), int(d)) for w, d in dims.items() if d), reverse=True))


@dataclass(frozen=True)
class GradedSpace:
    """A formed space with a weight decomposition of its standard basis."""

    space: FormedSpace
    dims: tuple  # ((weight, dim), ...) by decreasing weight, zero dims dropped

    def __post_init__(self):
        if sum(d for _, d in self.dims) != self.space.dim:
            raise ValueError("dimension vector does not add up to dim V")

    @property
    def kind(self) -> str:
        return self.space.kind

    @property
    def field(self) -> GF:
        return self.space.field

    @property
    def dim(self) -> int:
        return self.space.dim

    def d(self, i: int) -> int:
        return dict(self.dims).get(i, 0)

    @cached_property
    def dim_map(self) -> dict:
        return dict(self.dims)

    @cached_property
    def weights(self) -> tuple:
        """Weight of each standard basis vector."""
        out = []
        for w, d in self.dims:
            out += [w] * d
        return tuple(out)

    @cached_property
    def offsets(self) -> dict:
        out, pos = {}, 0
        for w, d in self.dims:
            out[w] = pos
            pos += d
        return out

    def block(self, i: int) -> range:
        if i not in self.offsets:
            return range(0)
        o = self.offsets[i]
        return range(o, o + self.dim_map[i])

    def top_weight(self) -> int:
        return self.dims[0][0] if self.dims else 0

    def block_subspace(self, i: int) -> Subspace:
        n = self.dim
        return Subspace(self.field, n, tuple(tuple(int(k == j) for j in range(n)) for k in self.block(i)))

    def ge_subspace(self, a: int) -> Subspace:
        n = self.dim
        rows = [tuple(int(k == j) for j in range(n)) for k, w in enumerate(self.weights) if w >= a]
        return Subspace(self.field, n, tuple(rows))

    def partition(self) -> tuple:
        return partition_from_dims(self.dim_map)

    def label(self) -> PieceLabel:
        return PieceLabel(self.kind, self.partition())

    # -- goodness ----------------------------------------------------------
    def is_good(self) -> bool:
        dm = self.dim_map
        top = self.top_weight()
        if any(dm.get(i, 0) != dm.get(-i, 0) for i in range(top + 1)):
            return False
        if any(w < -top for w in dm):
            return False
        return all(dm.get(i, 0) >= dm.get(i + 2, 0) for i in range(top + 1))

    def forms_respect_grading(self) -> bool:
        """(V_i, V_j) = 0 unless i + j = 0, and Q|V_i = 0 for i != 0 (kind O)."""
        sp = self.space
        wts = self.weights
        n = self.dim
        for i in range(n):
            for j in range(n):
                if wts[i] + wts[j] != 0 and sp.gram[i][j]:
                    return False
        if sp.kind == "O":
            for i in range(n):
                for j in range(i, n):
                    if sp.quad[i][j] and wts[i] + wts[j] != 0:
                        return False
        return True

    def is_valid(self) -> bool:
        """good / s-good / o-good according to the kind."""
        if not self.is_good():
            return False
        if self.kind == "GL":
            return True
        dm = self.dim_map
        if self.kind == "Sp" and any(d % 2 for w, d in dm.items() if w % 2 == 0):
            return False
        if self.kind == "O" and any(d % 2 for w, d in dm.items() if w % 2):
            return False
        return self.forms_respect_grading()

    # -- serialization -----------------------------------------------------
    def to_text(self) -> str:
        F = self.field
        pairs = " ".join(f"{w}:{d}" for w, d in self.dims)
        return f"{self.kind} {self.dim} {F.p} {F.k}\n{pairs}\n"

    @classmethod
    def from_text(cls, text: str) -> "GradedSpace":
        tokens = text.split()
        kind, dim, p, k = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
        dims = {}
        for tok in tokens[4:]:
            w, d = tok.split(":")
            dims[int(w)] = int(d)
        gs = graded_model(kind, dims, field(p, k))
        if gs.dim != dim:
            raise ValueError("grading dims do not add up to the stated dimension")
        return gs


def graded_model(kind: str, dims: dict, F: GF) -> GradedSpace:
    """The split model of a graded space with the given dimension vector.

    Basis index k pairs with index N-1-k, which pairs V_i with V_{-i} by
    reversed dual bases.  Sp: (e_k, e_{N-1-k}) = 1 for k < N/2.  O: Q is
    sum_{k < N/2} x_k x_{N-1-k}, plus x_mid^2 when N is odd.
    """
    cd = _clean_dims(dims)
    N = sum(d for _, d in cd)
    if kind == "GL":
        return GradedSpace(FormedSpace("GL", N, F), cd)
    if kind == "Sp":
        if N % 2:
            raise FormError("symplectic spaces have even dimension")
        gram = [[0] * N for _ in range(N)]
        for k in range(N // 2):
            gram[k][N - 1 - k] = 1
            gram[N - 1 - k][k] = F.neg[1]
        return GradedSpace(FormedSpace("Sp", N, F, tuple(tuple(r) for r in gram)), cd)
    if kind == "O":
        quad = [[0] * N for _ in range(N)]
        for k in range(N // 2):
            quad[k][N - 1 - k] = 1
        if N % 2:
            quad[N // 2][N // 2] = 1
        return GradedSpace(make_space_from_quad(F, quad, validate=N > 0), cd)
    raise FormError(f"unknown kind {kind!r}")


def grading_from_partition(label: PieceLabel, F: GF) -> GradedSpace:
    gs = graded_model(label.kind, dims_from_partition(label.partition), F)
    assert gs.is_valid(), "graded model fails its goodness invariant"
    return gs


def enumerate_gradings(kind: str, dim: int, F: GF) -> list:
    """One graded model per good (s-good, o-good) dimension vector."""
    return [grading_from_partition(lab, F) for lab in enumerate_piece_labels(kind, dim)]


# ----------------------------------------------------------------------
# filtrations


@dataclass(frozen=True)
class Filtration:
    """A descending chain V_{>=a}.

    ``steps[i]`` is V_{>=lo+i}.  Canonical form: steps[0] = V, steps[-1] = 0,
    steps[1] != V and steps[-2] != 0 (so lo is the lowest weight and
    lo + len(steps) - 2 the highest weight).  A zero-dimensional space has
    lo = 0 and a single step.
    """

    space: FormedSpace
    lo: int
    steps: tuple

    @classmethod
    def make(cls, space: FormedSpace, lo: int, steps) -> "Filtration":
        steps = list(steps)
        F, n = space.field, space.dim
        full, zero = Subspace.full(F, n), Subspace.zero(F, n)
        if n == 0:
            return cls(space, 0, (zero,))
        if not steps or steps[0] != full:
            steps = [full] + steps
            lo -= 1
        if steps[-1] != zero:
            steps = steps + [zero]
        for a, b in zip(steps, steps[1:]):
            if not a.contains(b):
                raise ValueError("filtration steps are not descending")
        while len(steps) >= 2 and steps[1] == full:
            steps.pop(0)
            lo += 1
        while len(steps) >= 2 and steps[-2] == zero:
            steps.pop()
        return cls(space, lo, tuple(steps))

    @property
    def hi(self) -> int:
        """Largest a with V_{>=a} nonzero (equal to lo - 1 only for dim 0)."""
        return self.lo + len(self.steps) - 2

    def step(self, a: int) -> Subspace:
        if a <= self.lo:
            return self.steps[0]
        if a - self.lo >= len(self.steps):
            return self.steps[-1]
        return self.steps[a - self.lo]

    def graded_dims(self) -> dict:
        out = {}
        for a in range(self.lo, self.hi + 1):
            d = self.step(a).dim - self.step(a + 1).dim
            if d:
                out[a] = d
        if self.space.dim == 0:
            return {}
        return dict(sorted(out.items(), reverse=True))

    def partition(self) -> tuple:
        return partition_from_dims(self.graded_dims())

    def key(self) -> tuple:
        return (self.lo, tuple(s.basis for s in self.steps))

    # -- invariants ----------------------------------------------------------
    def is_self_dual(self) -> bool:
        """perp(V_{>=a}) = V_{>=1-a} + R for all a, R the radical of (,).

        R is zero except for odd-dimensional quadratic spaces in
        characteristic 2, where it always lies in V_{>=1-a} for a >= 1.
        """
        sp = self.space
        rad = sp.radical_space
        for a in range(self.lo - 1, self.hi + 3):
            if sp.perp(self.step(a)) != self.step(1 - a) + rad:
                return False
        return True

    def is_q_filtration(self) -> bool:
        if not self.is_self_dual():
            return False
        for a in range(1, self.hi + 1):
            if not self.space.is_totally_singular(self.step(a)):
                return False
        return True

    def dims_valid(self) -> bool:
        """The graded dimension vector is good (s-good, o-good by parity)."""
        gd = self.graded_dims()
        gs_dims = _clean_dims(gd)
        top = gs_dims[0][0] if gs_dims else 0
        dm = dict(gs_dims)
        if any(dm.get(i, 0) != dm.get(-i, 0) for i in range(top + 1)):
            return False
        if any(w < -top for w in dm):
            return False
        if not all(dm.get(i, 0) >= dm.get(i + 2, 0) for i in range(top + 1)):
            return False
        if self.space.kind == "Sp" and any(d % 2 for w, d in dm.items() if w % 2 == 0):
            return False
        if self.space.kind == "O" and any(d % 2 for w, d in dm.items() if w % 2):
            return False
        return True

    def is_member(self) -> bool:
        """Membership in the filtration family of the ambient kind."""
        if not self.dims_valid():
            return False
        if self.space.kind == "Sp":
            return self.is_self_dual()
        if self.space.kind == "O":
            return self.is_q_filtration()
        return True

    # -- serialization -------------------------------------------------------
    def to_text(self) -> str:
        F = self.space.field
        out = [f"{self.space.kind} {self.space.dim} {F.p} {F.k}"]
        for i, s in enumerate(self.steps):
            out.append(f"{self.lo + i} {s.dim}")
            out += [" ".join(str(x) for x in row) for row in s.basis]
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str, space: FormedSpace | None = None) -> "Filtration":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        kind, n, p, k = lines[0][0], int(lines[0][1]), int(lines[0][2]), int(lines[0][3])
        F = field(p, k)
        if space is None:
            from .formspace import make_split_space
            space = make_split_space(kind, n, F)
        i, lo, steps = 1, None, []
        while i < len(lines):
            a, d = int(lines[i][0]), int(lines[i][1])
            rows = [tuple(int(x) for x in r) for r in lines[i + 1:i + 1 + d]]
            if lo is None:
                lo = a
            steps.append(Subspace.span(F, n, rows))
            i += 1 + d
        return cls.make(space, lo if lo is not None else 0, steps)

    def to_json(self) -> list:
        return [{"a": self.lo + i, "dim": s.dim, "basis": [list(r) for r in s.basis]}
                for i, s in enumerate(self.steps)]


def filtration_from_grading(gs: GradedSpace) -> Filtration:
    if gs.dim == 0:
        return Filtration.make(gs.space, 0, [])
    lo = gs.dims[-1][0]
    hi = gs.dims[0][0]
    return Filtration.make(gs.space, lo, [gs.ge_subspace(a) for a in range(lo, hi + 2)])


# ----------------------------------------------------------------------
# associated graded


@dataclass(frozen=True)
class AssociatedGraded:
    """gr(V_*) realized on section vectors.

    ``basis`` lists the section vectors (in ambient coordinates) block by
    block in decreasing weight order; ``graded`` is the graded space carrying
    the induced forms in that basis.
    """

    filtration: Filtration
    graded: GradedSpace
    basis: tuple

    @cached_property
    def _solver(self):
        F = self.filtration.space.field
        return coordinates_in(F, self.basis, self.filtration.space.dim)

    def to_adapted(self, A: Matrix) -> Matrix:
        """Matrix of A in the adapted basis."""
        F = A.field
        n = A.nrows
        cols = [self._solver(A.apply(b)) for b in self.basis]
        return Matrix.from_columns(F, cols, n) if n else A

    def adapted_matrix(self) -> Matrix:
        return Matrix.from_columns(self.filtration.space.field, self.basis, self.filtration.space.dim)


def section_basis(filt: Filtration) -> list:
    """Section vectors of each gr_a, highest weight first: [(a, [vectors])]."""
    out = []
    for a in range(filt.hi, filt.lo - 1, -1):
        upper, lower = filt.step(a), filt.step(a + 1)
        vecs = upper.complement_basis(lower)
        if vecs:
            out.append((a, vecs))
    return out


def associated_graded(filt: Filtration, check: bool = True) -> AssociatedGraded:
    sp = filt.space
    F = sp.field
    if check and not filt.is_member():
        raise ValueError(f"filtration is not in the {sp.kind} family")
    blocks = section_basis(filt)
    basis = [v for _, vs in blocks for v in vs]
    weights = [a for a, vs in blocks for _ in vs]
    dims = {a: len(vs) for a, vs in blocks}
    N = len(basis)
    if sp.kind == "GL":
        gr_space = FormedSpace("GL", N, F)
    elif sp.kind == "Sp":
        gram = [[sp.bil(basis[i], basis[j]) if weights[i] + weights[j] == 0 else 0
                 for j in range(N)] for i in range(N)]
        gr_space = FormedSpace("Sp", N, F, tuple(tuple(r) for r in gram))
        if check:
            gr_space.validate()
    else:
        quad = [[0] * N for _ in range(N)]
        for i in range(N):
            if weights[i] == 0:
                quad[i][i] = sp.Q(basis[i])
            for j in range(i + 1, N):
                if weights[i] + weights[j] == 0:
                    quad[i][j] = sp.bil(basis[i], basis[j])
        gr_space = make_space_from_quad(F, quad, validate=check and N > 0)
    gs = GradedSpace(gr_space, _clean_dims(dims))
    return AssociatedGraded(filt, gs, tuple(basis))


class FiltrationError(ValueError):
    pass


def induced_graded_map(A: Matrix, ag: AssociatedGraded, shift: int = 2) -> Matrix:
    """The degree-``shift`` part of A on gr, in the section basis.

    Raises FiltrationError naming the largest a with A(V_{>=a}) not inside
    V_{>=a+shift}.
    """
    B = ag.to_adapted(A)
    wts = ag.graded.weights
    n = len(wts)
    bad = None
    for j in range(n):
        for i in range(n):
            if B[i, j] and wts[i] < wts[j] + shift:
                if bad is None or wts[j] > bad:
                    bad = wts[j]
    if bad is not None:
        raise FiltrationError(f"A does not map V_>={bad} into V_>={bad + shift}")
    rows = tuple(tuple(B[i, j] if wts[i] == wts[j] + shift else 0 for j in range(n)) for i in range(n))
    return Matrix(A.field, rows, n)


def shifts_filtration(A: Matrix, filt: Filtration, shift: int = 2) -> bool:
    """A(V_{>=a}) inside V_{>=a+shift} for every a."""
    for a in range(filt.lo, filt.hi + 1):
        target = filt.step(a + shift)
        for v in filt.step(a).basis:
            if A.apply(v) not in target:
                return False
    return True
