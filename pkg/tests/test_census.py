import csv
import io
import json
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilpiece.census import (
    SCHEMA,
    PartialCensus,
    classify_range,
    evaluate,
    finalize,
    flag_count_formula,
    interpolate,
    is_integral,
    lie_nilpotent_stack,
    member_filtrations,
    orbit_oracle,
    poly_text,
    run_census,
    unipotent_stack,
    verify_polynomiality,
)
from nilpiece.exactlin import Matrix, field, field_of_order
from nilpiece.formspace import dickson_invariant, make_split_space
from nilpiece.gradings import PieceLabel, enumerate_piece_labels, graded_model, grading_from_partition

import oracles


def keyset(stack):
    return {tuple(tuple(int(x) for x in r) for r in m) for m in stack}


# ----------------------------------------------------------------------
# enumeration


@pytest.mark.parametrize("kind,n,q,count", [("GL", 2, 2, 4), ("Sp", 4, 2, 256), ("O", 5, 2, 256),
                                            ("O", 4, 3, 81), ("GL", 3, 3, 729)])
def test_enumeration_sizes(kind, n, q, count):
    sp = make_split_space(kind, n, field_of_order(q))
    assert len(lie_nilpotent_stack(sp)) == count
    assert len(unipotent_stack(sp)) == count


@pytest.mark.parametrize("kind,n,q", [("GL", 2, 2), ("GL", 2, 3), ("Sp", 2, 3), ("O", 3, 2), ("O", 2, 3),
                                      ("Sp", 2, 4)])
def test_enumeration_matches_brute_force(kind, n, q):
    F = field_of_order(q)
    sp = make_split_space(kind, n, F)
    nil = {T for T in oracles.all_matrices(q, n)
           if oracles.is_nilpotent(F, T) and oracles.lie_member(F, kind, sp.gram, sp.quad, T)}
    assert keyset(lie_nilpotent_stack(sp)) == nil
    one = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    if kind == "GL":
        group = [g for g in oracles.all_matrices(q, n) if oracles.invertible(F, g)]
    else:
        group = oracles.form_group(F, kind, sp.gram, sp.quad)
    uni = set()
    for g in group:
        x = tuple(tuple(F.sub[a][b] for a, b in zip(r, o)) for r, o in zip(g, one))
        if oracles.is_nilpotent(F, x) and (kind != "O" or dickson_invariant(sp, Matrix.from_rows(F, g)) == 0):
            uni.add(g)
    assert keyset(unipotent_stack(sp)) == uni


# ----------------------------------------------------------------------
# reports


def test_gl2_report():
    rep = run_census("GL", 2, 2)
    assert rep.ok
    row = rep.row("[2]")
    assert (row.nilpotent_count, row.observed_filtration_count, row.dim_g_ge3, row.bang_set_count) == (3, 3, 0, 1)
    assert rep.row("[1,1]").nilpotent_count == 1


def test_gl3_counts_are_orbit_sizes():
    # |GL_3(F_2)| / |centralizer|: 168/4, 168/8, 168/168
    rep = run_census("GL", 3, 2)
    assert [r.nilpotent_count for r in rep.rows] == [42, 21, 1]


def test_sp4_report():
    rep = run_census("Sp", 4, 2)
    assert rep.ok and len(rep.rows) == 4
    assert [r.nilpotent_count for r in rep.rows] == [180, 60, 15, 1]
    assert rep.total_nilpotent == rep.total_unipotent == 256


def test_o5_report_and_subpieces():
    rep = run_census("O", 5, 2)
    assert rep.ok
    row = rep.row("[3,1,1]")
    assert row.alpha == 1
    assert row.subpieces == {"M=[0,1] f=[0]": {"nilpotent": 15, "unipotent": 15},
                             "M=[0,1] f=[1]": {"nilpotent": 45, "unipotent": 45}}


def test_very_even_orthogonal_counts_both_flag_classes():
    rep = run_census("O", 4, 2)
    assert rep.ok
    row = rep.row("[2,2]")
    gs = grading_from_partition(PieceLabel("O", (2, 2)), field(2))
    assert row.observed_filtration_count == flag_count_formula(gs, 2) == 6


def test_report_serialization():
    rep = run_census("Sp", 2, 3)
    data = json.loads(rep.dumps())
    assert data["schema"] == SCHEMA
    assert data["totals"] == {"nilpotent": 9, "unipotent": 9, "expected": 9}
    assert all(data["verdicts"].values())
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert [r["label"] for r in rows] == ["[2]", "[1,1]"]
    assert int(rows[0]["nilpotent"]) == 8


def test_runs_are_deterministic_and_partition_independent():
    base = run_census("O", 4, 3).dumps()
    assert run_census("O", 4, 3).dumps() == base
    assert run_census("O", 4, 3, parts=3).dumps() == base
    assert run_census("O", 4, 3, workers=2).dumps() == base


def test_merge_is_associative_and_checked():
    kind, n, q = "Sp", 4, 2
    sp = make_split_space(kind, n, field(2))
    nil, uni = lie_nilpotent_stack(sp), unipotent_stack(sp)
    parts = [classify_range(sp, a, b, PartialCensus(kind, n, q))
             for a, b in zip(np.array_split(nil, 3), np.array_split(uni, 3))]
    left = parts[0].merge(parts[1]).merge(parts[2])
    right = parts[0].merge(parts[1].merge(parts[2]))
    assert finalize(left).dumps() == finalize(right).dumps() == run_census(kind, n, q).dumps()
    with pytest.raises(ValueError):
        parts[0].merge(PartialCensus("Sp", 4, 3))


@pytest.mark.parametrize("kind,n,q", [("Sp", 4, 2), ("O", 5, 2), ("O", 4, 2), ("GL", 3, 3), ("O", 4, 3)])
def test_flag_formula_counts_member_filtrations(kind, n, q):
    F = field_of_order(q)
    counts = Counter(f.partition() for f in member_filtrations(make_split_space(kind, n, F)))
    for lab in enumerate_piece_labels(kind, n):
        assert counts[lab.partition] == flag_count_formula(grading_from_partition(lab, F), q)


# ----------------------------------------------------------------------
# polynomials


@given(st.lists(st.integers(-20, 20), min_size=1, max_size=6))
def test_interpolation_recovers_integer_polynomials(coeffs):
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    pts = [(x, evaluate([Fraction(c) for c in coeffs], x)) for x in range(2, 2 + len(coeffs))]
    got = interpolate(pts)
    assert got == [Fraction(c) for c in coeffs] and is_integral(got)


def test_poly_text():
    assert poly_text([Fraction(-1), Fraction(0), Fraction(1)]) == "q^2-1"
    assert poly_text([Fraction(0), Fraction(1), Fraction(0), Fraction(-1), Fraction(-1), Fraction(0),
                      Fraction(1)]) == "q^6-q^4-q^3+q"
    assert poly_text([Fraction(0)]) == "0"


def test_gl2_polynomials():
    v = verify_polynomiality("GL", 2, [2, 3, 4, 5])
    assert v.ok
    row = {r.label: r for r in v.rows}["[2]"]
    assert row.census == {2: 3, 3: 8, 4: 15, 5: 24}
    assert poly_text(row.count) == "q^2-1"


def test_gl3_trivial_piece_is_constant():
    v = verify_polynomiality("GL", 3, [2, 3])
    assert v.ok
    row = {r.label: r for r in v.rows}["[1,1,1]"]
    assert poly_text(row.count) == "1"
    assert poly_text({r.label: r for r in v.rows}["[3]"].count) == "q^6-q^4-q^3+q"


def test_sp4_polynomials():
    v = verify_polynomiality("Sp", 4, [2, 3])
    assert v.ok
    row = {r.label: r for r in v.rows}["[2,2]"]
    assert poly_text(row.flag) == "q^3+q^2+q+1"
    assert poly_text(row.bang) == "q^3-q^2"
    assert poly_text(row.count) == "q^6-q^2"


# ----------------------------------------------------------------------
# orbits


def test_orbit_examples():
    rep = orbit_oracle(graded_model("GL", {1: 1, -1: 1}, field(2)))
    assert rep.orbit_sizes == [1] and rep.ok
    rep = orbit_oracle(grading_from_partition(PieceLabel("O", (3, 1, 1)), field(2)))
    assert rep.ok and rep.x_size == 2 and len(rep.f_classes) == 2
    assert rep.orbit_sizes == [3, 1]
    rep = orbit_oracle(grading_from_partition(PieceLabel("Sp", (2, 2)), field(2)))
    assert len(rep.orbit_sizes) == 2 and rep.ok


@pytest.mark.parametrize("lam,sizes,x", [((3, 3, 1), [18, 6], 1), ((5, 1, 1), [3, 1], 2)])
def test_orbits_dim7(lam, sizes, x):
    rep = orbit_oracle(grading_from_partition(PieceLabel("O", lam), field(2)))
    assert rep.orbit_sizes == sizes and rep.x_size == x and rep.ok
