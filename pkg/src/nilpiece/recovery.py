"""Recovering the piece filtration of a nilpotent or unipotent element.

The filtration is built from the outside in.  With m the top weight, the
steps V_{>=-m+1} and V_{>=m} are determined by the element (kernel and
image of x^m, or the subspace H_x in characteristic 2 for quadratic
spaces); the middle part comes from recursing on V_{>=-m+1} / V_{>=m}.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .exactlin import GF, Matrix, Subspace, lin_comb, null_space_rows
from .formspace import FormedSpace, in_group, lie_algebra_member, make_space_from_quad
from .gradings import (
    Filtration,
    GradedSpace,
    PieceLabel,
    associated_graded,
    induced_graded_map,
    partition_from_dims,
)
from .pieces import SubpieceLabel, in_bang_set, odd_set, subpiece_invariant


class RecoveryError(RuntimeError):
    """A postcondition of the recursion failed (an implementation bug)."""


# ----------------------------------------------------------------------
# e, f and H


def nilpotency_index(T: Matrix) -> int:
    """Smallest e >= 1 with T^e = 0."""
    n = T.nrows
    P = T
    for e in range(1, n + 2):
        if P.is_zero():
            return e
        P = P @ T
    raise ValueError("matrix is not nilpotent")


def quad_vanishes(space: FormedSpace, S: Matrix) -> bool:
    """Whether Q o S is identically zero."""
    cols = S.columns()
    for i, c in enumerate(cols):
        if space.Q(c):
            return False
        for j in range(i + 1, len(cols)):
            if space.bil(c, cols[j]):
                return False
    return True


def quad_vanishing_index(space: FormedSpace, T: Matrix) -> int:
    """Smallest f >= 1 with Q o T^f = 0."""
    P = T
    for f in range(1, T.nrows + 2):
        if quad_vanishes(space, P):
            return f
        P = P @ T
    raise ValueError("Q o T^f never vanishes; T is not nilpotent")


def singular_part(space: FormedSpace, D: Subspace, S: Matrix) -> Subspace:
    """{x in D : Q(S x) = 0}, asserted to be a subspace.

    The map x -> Q(Sx) restricted to D must have zero polar form.  In
    characteristic 2 it is then additive and Frobenius-semilinear, so its
    zero set is the kernel of c -> sum c_i sqrt(Q(S d_i)); in odd
    characteristic it vanishes on all of D.
    """
    F = space.field
    imgs = [S.apply(d) for d in D.basis]
    for i, u in enumerate(imgs):
        for v in imgs[i + 1:]:
            if space.bil(u, v):
                raise RecoveryError("Q o S is not additive on the domain")
    values = [space.Q(u) for u in imgs]
    if not any(values):
        return D
    if F.p != 2:
        raise RecoveryError("Q o S is not identically zero on the domain")
    roots = [F.sqrt(v) for v in values]
    coeffs = null_space_rows(F, [roots], len(roots))
    return Subspace.span(F, D.ambient_dim, [lin_comb(F, c, D.basis, D.ambient_dim) for c in coeffs])


def kernel(T: Matrix) -> Subspace:
    F = T.field
    return Subspace(F, T.ncols, null_space_rows(F, T.rows, T.ncols))


def image(T: Matrix) -> Subspace:
    return Subspace.span(T.field, T.nrows, T.columns())


@dataclass(frozen=True)
class EfhData:
    e: int
    f: int | None
    H: Subspace
    case: str

    @property
    def m(self) -> int:
        if self.f is None:
            return self.e - 1
        return max(self.e - 1, 2 * self.f - 2)


def efh(space: FormedSpace, T: Matrix) -> EfhData:
    """e_T, f_T and H_T for a nonzero nilpotent T."""
    if T.is_zero():
        raise ValueError("T is the zero map")
    if not T.is_nilpotent():
        raise ValueError("T is not nilpotent")
    e = max(2, nilpotency_index(T))
    Te1 = T.power(e - 1)
    if space.kind != "O":
        return EfhData(e, None, kernel(Te1), "kernel")
    f = quad_vanishing_index(space, T)
    S = T.power(f - 1)
    if e >= 2 * f:
        return EfhData(e, f, kernel(Te1), "i")
    full = Subspace.full(space.field, space.dim)
    if e == 2 * f - 1:
        return EfhData(e, f, singular_part(space, kernel(Te1), S), "ii")
    return EfhData(e, f, singular_part(space, full, S), "iii")


# ----------------------------------------------------------------------
# the recursion


def _outer_steps(space: FormedSpace, x: Matrix):
    """(m, V_{>=-m+1}, V_{>=m}) for a nonzero nilpotent x."""
    if space.kind == "O" and space.field.p == 2:
        data = efh(space, x)
        m, H = data.m, data.H
        perp = space.perp(H)
        top = singular_part(space, perp, Matrix.identity(space.field, space.dim))
        return m, H, top
    e = nilpotency_index(x)
    m = e - 1
    xm = x.power(m)
    return m, kernel(xm), image(xm)


def _quotient_space(space: FormedSpace, section: list) -> FormedSpace:
    F = space.field
    d = len(section)
    if space.kind == "GL":
        return FormedSpace("GL", d, F)
    if space.kind == "Sp":
        gram = tuple(tuple(space.bil(a, b) for b in section) for a in section)
        return FormedSpace("Sp", d, F, gram)
    quad = [[0] * d for _ in range(d)]
    for i in range(d):
        quad[i][i] = space.Q(section[i])
        for j in range(i + 1, d):
            quad[i][j] = space.bil(section[i], section[j])
    return make_space_from_quad(F, quad, validate=False)


def _quotient_map(F: GF, section: list, W: Subspace, x: Matrix) -> Matrix:
    """Matrix of x on U/W in the section basis (x(U) inside U assumed)."""
    from .exactlin import coordinates_in
    n = W.ambient_dim
    d = len(section)
    solve = coordinates_in(F, list(section) + list(W.basis), n)
    cols = []
    for s in section:
        try:
            cols.append(solve(x.apply(s))[:d])
        except ValueError:
            raise RecoveryError("x does not preserve V_{>=-m+1}") from None
    return Matrix.from_columns(F, cols, d) if d else Matrix.zeros(F, 0)


def canonical_filtration(space: FormedSpace, x: Matrix) -> Filtration:
    """The filtration attached to the nilpotent endomorphism x."""
    F, n = space.field, space.dim
    full, zero = Subspace.full(F, n), Subspace.zero(F, n)
    if n == 0 or x.is_zero():
        return Filtration.make(space, 0, [full, zero])
    m, H, top = _outer_steps(space, x)
    if m < 1 or top.dim == 0 or not H.contains(top):
        raise RecoveryError(f"degenerate outer steps (m={m})")
    section = H.complement_basis(top)
    inner_space = _quotient_space(space, section)
    inner_x = _quotient_map(F, section, top, x)
    inner = canonical_filtration(inner_space, inner_x)
    if inner_space.dim and (inner.hi >= m or inner.lo <= -m):
        raise RecoveryError(f"inner weights [{inner.lo},{inner.hi}] escape (-{m},{m})")
    steps = []
    for a in range(-m, m + 2):
        if a <= -m:
            steps.append(full)
        elif a == m:
            steps.append(top)
        elif a > m:
            steps.append(zero)
        else:
            lifted = [lin_comb(F, c, section, n) for c in inner.step(a).basis]
            steps.append(Subspace.span(F, n, list(top.basis) + lifted))
    return Filtration.make(space, -m, steps)


# ----------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ClassifiedElement:
    element: Matrix
    filtration: Filtration
    label: PieceLabel
    subpiece: SubpieceLabel | None = None
    unipotent: bool = False
    graded: GradedSpace | None = dc_field(default=None, compare=False)
    graded_map: Matrix | None = dc_field(default=None, compare=False)

    def to_json(self) -> dict:
        out = {"label": str(self.label), "steps": self.filtration.to_json()}
        if self.subpiece is not None:
            out["subpiece"] = str(self.subpiece)
        return out


def _graded_data(filt: Filtration, check: bool, cache: dict | None):
    """Membership check and associated graded of a filtration (memoized)."""
    key = filt.key()
    if cache is not None and key in cache:
        return cache[key]
    if check and not filt.is_member():
        raise RecoveryError("recovered filtration is not in the family")
    ag = associated_graded(filt, check=check)
    if cache is not None:
        cache[key] = ag
    return ag


def _finish(space: FormedSpace, element: Matrix, x: Matrix, unipotent: bool, check: bool,
            cache: dict | None) -> ClassifiedElement:
    filt = canonical_filtration(space, x)
    ag = _graded_data(filt, check, cache)
    xbar = induced_graded_map(x, ag)
    gs = ag.graded
    if check:
        if not lie_algebra_member(gs.space, xbar):
            raise RecoveryError("induced graded map is not in the Lie algebra of gr")
        if not in_bang_set(gs, xbar, check=False):
            raise RecoveryError("induced graded map is not in the set for gr")
    label = PieceLabel(space.kind, partition_from_dims(dict(gs.dims)))
    sub = None
    if space.kind == "O" and space.field.p == 2 and odd_set(gs):
        sub = subpiece_invariant(gs, xbar, check=False)
    return ClassifiedElement(element, filt, label, sub, unipotent, gs, xbar)


def classify_nilpotent(space: FormedSpace, x: Matrix, check: bool = True,
                       cache: dict | None = None) -> ClassifiedElement:
    """Piece filtration, label and subpiece of a nilpotent Lie algebra element.

    ``cache`` (a dict) memoizes per-filtration work across calls.
    """
    if x.shape != (space.dim, space.dim):
        raise ValueError("matrix does not match the space")
    if not x.is_nilpotent():
        raise ValueError("element is not nilpotent")
    if space.kind != "GL" and not lie_algebra_member(space, x):
        raise ValueError(f"element is not in the {space.kind} Lie algebra")
    return _finish(space, x, x, False, check, cache)


def classify_unipotent(space: FormedSpace, u: Matrix, check: bool = True,
                       cache: dict | None = None) -> ClassifiedElement:
    if u.shape != (space.dim, space.dim):
        raise ValueError("matrix does not match the space")
    if not in_group(space, u):
        raise ValueError(f"element is not in the {space.kind} group")
    x = u - Matrix.identity(space.field, space.dim)
    if not x.is_nilpotent():
        raise ValueError("element is not unipotent")
    return _finish(space, u, x, True, check, cache)


# ----------------------------------------------------------------------
# perturbations


def perturbation_check(gs: GradedSpace, A: Matrix, C: Matrix) -> bool:
    """The conclusions about T = A + C for A in the set and C of degree >= 3."""
    space = gs.space
    if space.kind != "O" or space.field.p != 2:
        raise ValueError("perturbation statements concern quadratic spaces in characteristic 2")
    if not in_bang_set(gs, A):
        raise ValueError("A is not in the set")
    w = gs.weights
    if any(C[i, j] and w[i] < w[j] + 3 for i in range(gs.dim) for j in range(gs.dim)):
        raise ValueError("C does not raise weights by at least 3")
    if not lie_algebra_member(space, C):
        raise ValueError("C is not in the Lie algebra")
    m = gs.top_weight()
    if m < 1:
        raise ValueError("grading is concentrated in weight 0")
    target = gs.ge_subspace(-m + 1)
    a = efh(space, A)
    t = efh(space, A + C)
    ok = a.H == target
    if m % 2:
        ok &= a.e == 2 * a.f == m + 1
    else:
        ok &= (a.e == 2 * a.f - 1 == m + 1) or (a.e < 2 * a.f - 1 == m + 1)
    if a.e == 2 * a.f:
        ok &= t.e == a.e == m + 1
    elif a.e == 2 * a.f - 1:
        ok &= t.e == a.e == m + 1 and t.f == a.f
    else:
        ok &= t.f == a.f == (m + 2) // 2 and 2 * t.f - 1 > t.e
    ok &= t.H == target
    ok &= m == max(t.e - 1, 2 * t.f - 2)
    return bool(ok)
