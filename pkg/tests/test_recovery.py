import json
import random

import pytest

from nilpiece.census import member_filtrations, uniqueness_check
from nilpiece.exactlin import Matrix, Subspace, field, field_of_order, image_of
from nilpiece.formspace import make_split_space, number_of_roots
from nilpiece.gradings import Filtration, PieceLabel, grading_from_partition, shifts_filtration
from nilpiece.groups import enumerate_group
from nilpiece.pieces import enumerate_bang_set, graded_lie_basis
from nilpiece.recovery import (
    RecoveryError,
    classify_nilpotent,
    classify_unipotent,
    efh,
    image,
    kernel,
    perturbation_check,
    singular_part,
)

import oracles

F2, F3 = field(2), field(3)


def J(F, sizes):
    n = sum(sizes)
    rows = [[0] * n for _ in range(n)]
    off = 0
    for s in sizes:
        for i in range(s - 1):
            rows[off + i][off + i + 1] = 1
        off += s
    return Matrix.from_rows(F, rows, n)


def lie_nilpotents(space):
    from nilpiece.census import enumerate_lie_nilpotents
    return list(enumerate_lie_nilpotents(space))


def unipotents(space):
    from nilpiece.census import enumerate_unipotents
    return list(enumerate_unipotents(space))


def jordan_type(F, x):
    """Jordan partition of a nilpotent matrix from brute-force ranks of its powers."""
    n = x.nrows
    ranks = [n]
    P = x.rows
    for _ in range(n):
        ranks.append(oracles.brute_rank(F, P) if F.q ** n <= 4096 else Matrix(F, P, n).rank())
        P = oracles.matmul(F, P, x.rows)
    # number of blocks of size >= k is rank(x^{k-1}) - rank(x^k)
    ge = [ranks[k - 1] - ranks[k] for k in range(1, n + 1)]
    parts = []
    for k in range(n, 0, -1):
        exact = ge[k - 1] - (ge[k] if k < n else 0)
        parts += [k] * exact
    return tuple(parts)


def conj(g, x):
    return g @ x @ g.inverse()


def moved(filt, g):
    return Filtration.make(filt.space, filt.lo, [image_of(g, s) for s in filt.steps])


# ----------------------------------------------------------------------
# e, f, H


def test_efh_gl_example():
    d = efh(make_split_space("GL", 2, F2), J(F2, [2]))
    assert (d.e, d.f) == (2, None)
    assert d.H == Subspace.span(F2, 2, [(1, 0)])


def test_efh_small_orthogonal_case_one():
    sp = make_split_space("O", 4, F2)
    found = 0
    for x in lie_nilpotents(sp):
        if x.is_zero() or not x.power(2).is_zero():
            continue
        if any(sp.Q(c) for c in x.columns()):
            continue
        d = efh(sp, x)
        assert (d.e, d.f, d.case) == (2, 1, "i") and d.H == kernel(x)
        found += 1
    assert found


def test_efh_on_bang_elements_matches_grading_step():
    gs = grading_from_partition(PieceLabel("O", (3, 1, 1)), F2)
    m = gs.top_weight()
    for A in enumerate_bang_set(gs):
        d = efh(gs.space, A)
        assert d.m == m
        assert d.H == gs.ge_subspace(-m + 1)


def test_efh_rejects_zero_and_non_nilpotent():
    sp = make_split_space("O", 3, F2)
    with pytest.raises(ValueError):
        efh(sp, Matrix.zeros(F2, 3))
    with pytest.raises(ValueError):
        efh(sp, Matrix.identity(F2, 3))


def test_efh_sets_agree_with_definition_exhaustively():
    sp = make_split_space("O", 5, F2)
    for x in random.Random(2).sample(lie_nilpotents(sp), 60):
        if x.is_zero():
            continue
        d = efh(sp, x)
        S = x.power(d.f - 1)
        members = {v for v in oracles.vectors(2, 5)
                   if (d.case == "iii" or not any(x.power(d.e - 1).apply(v)))
                   and (d.case == "i" or sp.Q(S.apply(v)) == 0)}
        assert oracles.span_set(F2, d.H.basis, 5) == members


def test_singular_part_refuses_non_additive_maps():
    sp = make_split_space("O", 2, F2)
    with pytest.raises(RecoveryError):
        singular_part(sp, Subspace.full(F2, 2), Matrix.identity(F2, 2))


# ----------------------------------------------------------------------
# classification examples


@pytest.mark.parametrize("kind,n,q", [("GL", 3, 2), ("Sp", 4, 3), ("O", 5, 2), ("O", 4, 3)])
def test_zero_and_identity(kind, n, q):
    F = field_of_order(q)
    sp = make_split_space(kind, n, F)
    ce = classify_nilpotent(sp, Matrix.zeros(F, n))
    assert ce.label.partition == (1,) * n
    assert (ce.filtration.lo, ce.filtration.hi) == (0, 0)
    assert classify_unipotent(sp, Matrix.identity(F, n)).label.partition == (1,) * n


def test_gl_regular_nilpotent():
    sp = make_split_space("GL", 3, F2)
    x = J(F2, [3])
    ce = classify_nilpotent(sp, x)
    assert ce.label.partition == (3,)
    assert ce.filtration.graded_dims() == {2: 1, 0: 1, -2: 1}
    assert ce.filtration.step(-1) == kernel(x.power(2))
    assert ce.filtration.step(2) == image(x.power(2))


def test_sp4_regular_unipotent():
    sp = make_split_space("Sp", 4, F2)
    one = Matrix.identity(F2, 4)
    regular = [u for u in unipotents(sp) if not (u - one).power(3).is_zero()]
    assert regular
    assert {classify_unipotent(sp, u).label.partition for u in regular} == {(4,)}


def test_o5_over_f2_all_nilpotents_and_unipotents():
    sp = make_split_space("O", 5, F2)
    labels = {lab.partition for lab in [PieceLabel("O", p) for p in [(5,), (3, 1, 1), (2, 2, 1), (1,) * 5]]}
    nil = lie_nilpotents(sp)
    uni = unipotents(sp)
    assert len(nil) == len(uni) == 2 ** 8
    cache = {}
    got = {classify_nilpotent(sp, x, cache=cache).label.partition for x in nil}
    got |= {classify_unipotent(sp, u, cache=cache).label.partition for u in uni}
    assert got == labels


def test_classification_errors():
    sp = make_split_space("Sp", 2, F2)
    with pytest.raises(ValueError, match="nilpotent"):
        classify_nilpotent(sp, Matrix.identity(F2, 2))
    o3 = make_split_space("O", 3, F2)
    with pytest.raises(ValueError, match="Lie algebra"):
        classify_nilpotent(o3, Matrix.from_rows(F2, [[0, 0, 1], [0, 0, 0], [0, 0, 0]]))
    with pytest.raises(ValueError, match="group"):
        classify_unipotent(sp, Matrix.from_rows(F2, [[1, 1], [1, 1]]))
    o2 = make_split_space("O", 2, F2)
    with pytest.raises(ValueError, match="group"):
        classify_unipotent(o2, Matrix.from_rows(F2, [[0, 1], [1, 0]]))  # Dickson 1


def test_classified_json():
    sp = make_split_space("O", 5, F2)
    x = next(x for x in lie_nilpotents(sp) if classify_nilpotent(sp, x).subpiece is not None)
    out = json.loads(json.dumps(classify_nilpotent(sp, x).to_json()))
    assert set(out) == {"label", "steps", "subpiece"}
    assert out["steps"][0]["dim"] == 5 and out["steps"][-1]["dim"] == 0


# ----------------------------------------------------------------------
# structural properties


@pytest.mark.parametrize("kind,n,q", [("GL", 4, 2), ("GL", 3, 3), ("Sp", 4, 3), ("O", 4, 3), ("O", 5, 3)])
def test_label_is_jordan_type_outside_char2_forms(kind, n, q):
    F = field_of_order(q)
    sp = make_split_space(kind, n, F)
    nil = lie_nilpotents(sp)
    for x in random.Random(0).sample(nil, min(300, len(nil))):
        assert classify_nilpotent(sp, x).label.partition == jordan_type(F, x)


@pytest.mark.parametrize("kind,n,q", [("Sp", 4, 2), ("O", 5, 2), ("O", 4, 2), ("GL", 3, 3), ("O", 4, 3)])
def test_classification_is_equivariant(kind, n, q):
    F = field_of_order(q)
    sp = make_split_space(kind, n, F)
    rng = random.Random(5)
    G = enumerate_group(sp)
    nil = lie_nilpotents(sp)
    for x in rng.sample(nil, min(40, len(nil))):
        ce = classify_nilpotent(sp, x)
        for g in rng.sample(list(G), 5):
            g = Matrix.from_rows(F, g.tolist())
            other = classify_nilpotent(sp, conj(g, x))
            assert other.label == ce.label and other.subpiece == ce.subpiece
            assert other.filtration == moved(ce.filtration, g)


@pytest.mark.parametrize("kind,n,q", [("GL", 3, 2), ("Sp", 4, 2), ("O", 3, 2), ("O", 4, 2),
                                      ("GL", 2, 3), ("O", 3, 3), ("Sp", 2, 3)])
def test_unique_fitting_filtration(kind, n, q):
    res = uniqueness_check(make_split_space(kind, n, field_of_order(q)))
    assert res["failures"] == []
    # every nilpotent and every unipotent element was checked
    assert res["checked"] == 2 * q ** number_of_roots(kind, n)


@pytest.mark.parametrize("kind,n", [("Sp", 4), ("O", 5)])
def test_no_other_filtration_with_same_dims_is_raised_by_two(kind, n):
    sp = make_split_space(kind, n, F2)
    filts = member_filtrations(sp)
    rng = random.Random(9)
    for x in rng.sample(lie_nilpotents(sp), 60):
        ce = classify_nilpotent(sp, x)
        dims = ce.filtration.graded_dims()
        fits = [f for f in filts if f.graded_dims() == dims and shifts_filtration(x, f)]
        assert fits == [ce.filtration]


def test_recursion_restricts_to_inner_quotient():
    # the steps strictly between the outer ones come from the quotient V_{>=-m+1}/V_{>=m}
    sp = make_split_space("GL", 5, F2)
    x = J(F2, [3, 1, 1])
    f = classify_nilpotent(sp, x).filtration
    m = f.hi
    assert f.step(-m + 1) == kernel(x.power(m)) and f.step(m) == image(x.power(m))
    inner = classify_nilpotent(make_split_space("GL", 3, F2), Matrix.zeros(F2, 3)).filtration
    assert f.step(0).dim - f.step(m).dim == inner.step(0).dim


# ----------------------------------------------------------------------
# perturbations


def random_perturbations(gs, count, seed):
    rng = random.Random(seed)
    basis = graded_lie_basis(gs, 3, at_least=True)
    F = gs.field
    out = []
    for _ in range(count):
        acc = Matrix.zeros(F, gs.dim)
        for b in basis:
            c = rng.randrange(F.q)
            if c:
                acc = acc + b.scale(c)
        out.append(acc)
    return out


@pytest.mark.parametrize("lam", [(3, 1, 1), (5,), (2, 2, 1), (3, 3, 1), (4, 4, 1)])
def test_perturbation_conclusions(lam):
    gs = grading_from_partition(PieceLabel("O", lam), F2)
    bang = enumerate_bang_set(gs)
    rng = random.Random(11)
    for A in bang[:3]:
        assert perturbation_check(gs, A, Matrix.zeros(F2, gs.dim))
    for C in random_perturbations(gs, 200, 1):
        assert perturbation_check(gs, rng.choice(bang), C)


def test_perturbation_preconditions():
    gs = grading_from_partition(PieceLabel("O", (3, 1, 1)), F2)
    A = enumerate_bang_set(gs)[0]
    with pytest.raises(ValueError, match="not in the set"):
        perturbation_check(gs, Matrix.zeros(F2, 5), Matrix.zeros(F2, 5))
    bad = graded_lie_basis(gs, 2)[0]
    with pytest.raises(ValueError, match="at least 3"):
        perturbation_check(gs, A, bad)
    with pytest.raises(ValueError):
        perturbation_check(grading_from_partition(PieceLabel("O", (3,)), F3), Matrix.zeros(F3, 3),
                           Matrix.zeros(F3, 3))
