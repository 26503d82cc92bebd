"""Exhaustive censuses of nilpotent and unipotent elements.

Every nilpotent element of the Lie algebra and every unipotent element of
the group (SO for quadratic spaces) over F_q is classified, the results
are grouped by piece label and subpiece, and the counting identities are
checked:

* totals equal q^r (r = number of roots),
* each piece count equals (#filtrations) * q^(dim g_{>=3}) * (#set members),
* nilpotent and unipotent counts agree label by label,
* each piece splits into 2^alpha subpieces in characteristic 2.
"""

from __future__ import annotations

import json
import multiprocessing
from collections import defaultdict
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import batch, fast2
from .exactlin import Matrix, field_of_order
from .formspace import (
    FormedSpace,
    gl_order,
    group_order_formula,
    lie_algebra_basis,
    make_split_space,
    number_of_roots,
    so_order,
    sp_order,
)
from .gradings import (
    GradedSpace,
    PieceLabel,
    enumerate_piece_labels,
    filtration_from_grading,
    grading_from_partition,
)
from .groups import BudgetExceeded, budget_value, enumerate_group
from .pieces import (
    allowed_functions,
    alpha,
    bang_set_count,
    degree_positions,
    enumerate_bang_set,
    graded_lie_basis,
    odd_set,
    subpiece_invariant,
)
from .recovery import classify_nilpotent, classify_unipotent

SCHEMA = "nilpiece.census/1"


class CensusError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# enumeration


def span_chunks(space: FormedSpace, basis: list, budget: int | None = None, chunk: int = 1 << 18):
    """All combinations of the basis matrices as (M, n, n) arrays, in order."""
    budget = budget_value(budget)
    F, n = space.field, space.dim
    d = len(basis)
    total = F.q ** d
    if total > budget:
        raise BudgetExceeded(f"{F.q}^{d} elements exceed budget {budget}")
    stack = np.array([b.rows for b in basis], dtype=batch.DTYPE).reshape(d, n, n)
    add, mul, _, _ = batch.tables(F)
    powers = F.q ** np.arange(d, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % F.q
        if batch.is_prime_field(F):
            flat = digits.astype(np.float64) @ stack.reshape(d, n * n).astype(np.float64)
            yield np.fmod(flat, F.q).astype(batch.DTYPE).reshape(-1, n, n)
            continue
        acc = np.zeros((len(idx), n, n), dtype=batch.DTYPE)
        for k in range(d):
            c = digits[:, k].astype(batch.DTYPE)
            acc = add[acc, mul[c[:, None, None], stack[k][None]]]
        yield acc


def lie_nilpotent_stack(space: FormedSpace, budget: int | None = None) -> np.ndarray:
    """The nilpotent elements of the Lie algebra, as an (N, n, n) array."""
    basis = lie_algebra_basis(space)
    if space.dim == 0:
        return np.zeros((1, 0, 0), dtype=batch.DTYPE)
    parts = [c[batch.nilpotent_mask(space.field, c)] for c in span_chunks(space, basis, budget)]
    return np.concatenate(parts, axis=0)


def unipotent_stack(space: FormedSpace, budget: int | None = None) -> np.ndarray:
    """The unipotent elements of GL(V), Sp(V) or SO(V), as an (N, n, n) array."""
    F, n = space.field, space.dim
    if n == 0:
        return np.zeros((1, 0, 0), dtype=batch.DTYPE)
    eye = batch.identity(n)[None]
    if space.kind == "GL":
        return batch.matadd(F, lie_nilpotent_stack(space, budget), eye)
    G = enumerate_group(space, connected=True, budget=budget)
    return G[batch.nilpotent_mask(F, batch.matsub(F, G, eye))]


def _to_matrices(space: FormedSpace, stack: np.ndarray):
    F, n = space.field, space.dim
    for a in stack:
        yield Matrix(F, tuple(tuple(int(x) for x in r) for r in a), n)


def enumerate_lie_nilpotents(space: FormedSpace, budget: int | None = None):
    """Stream of the nilpotent members of the Lie algebra (deterministic order)."""
    return _to_matrices(space, lie_nilpotent_stack(space, budget))


def enumerate_unipotents(space: FormedSpace, budget: int | None = None):
    """Stream of the unipotent group elements (SO for quadratic spaces)."""
    return _to_matrices(space, unipotent_stack(space, budget))


# ----------------------------------------------------------------------
# partial censuses (mergeable)


@dataclass
class PartialCensus:
    """Counts for a range of elements; merging is addition / union."""

    kind: str
    dim: int
    q: int
    nilpotent: dict = dc_field(default_factory=lambda: defaultdict(int))
    unipotent: dict = dc_field(default_factory=lambda: defaultdict(int))
    sub_nilpotent: dict = dc_field(default_factory=lambda: defaultdict(int))
    sub_unipotent: dict = dc_field(default_factory=lambda: defaultdict(int))
    filtrations: dict = dc_field(default_factory=lambda: defaultdict(set))
    unipotent_filtrations: dict = dc_field(default_factory=lambda: defaultdict(set))

    def tables(self, unipotent: bool):
        if unipotent:
            return self.unipotent, self.sub_unipotent, self.unipotent_filtrations
        return self.nilpotent, self.sub_nilpotent, self.filtrations

    def merge(self, other: "PartialCensus") -> "PartialCensus":
        if (self.kind, self.dim, self.q) != (other.kind, other.dim, other.q):
            raise ValueError("cannot merge censuses of different spaces")
        out = PartialCensus(self.kind, self.dim, self.q)
        for name in ("nilpotent", "unipotent", "sub_nilpotent", "sub_unipotent"):
            acc = getattr(out, name)
            for src in (getattr(self, name), getattr(other, name)):
                for k, v in src.items():
                    acc[k] += v
        for name in ("filtrations", "unipotent_filtrations"):
            acc = getattr(out, name)
            for src in (getattr(self, name), getattr(other, name)):
                for k, v in src.items():
                    acc[k] |= v
        return out


def _sub_text(M, f) -> str:
    return f"M=[{','.join(map(str, M))}] f=[{','.join(map(str, f))}]"


def _label_of(gs: GradedSpace) -> str:
    return str(gs.label())


def classify_range(space: FormedSpace, nil: np.ndarray, uni: np.ndarray, part: PartialCensus):
    """Classify a stack of nilpotents and a stack of unipotents into ``part``."""
    F, n = space.field, space.dim
    if F.q == 2 and n > 0:
        if space.kind != "GL":
            _check_membership(space, nil, False)
            _check_membership(space, uni, True)
        xs = np.concatenate([nil, batch.matsub(F, uni, batch.identity(n)[None])], axis=0)
        try:
            res = fast2.classify_stack(space, xs)
        except ArithmeticError as exc:
            raise CensusError(str(exc)) from None
        labels = [_label_of(g) for g in res.graded]
        keys = [f.key() for f in res.filtrations]
        for lo, hi, unipotent in ((0, len(nil), False), (len(nil), len(xs), True)):
            counts, subs, filts = part.tables(unipotent)
            idx, cnt = np.unique(res.index[lo:hi], return_counts=True)
            for i, c in zip(idx, cnt):
                counts[labels[i]] += int(c)
                filts[labels[i]].add(keys[i])
            for i in range(lo, hi):
                sp = res.subpieces[i]
                if sp is not None:
                    subs[(labels[res.index[i]], _sub_text(*sp))] += 1
        return part
    cache = {}
    for stack, unipotent in ((nil, False), (uni, True)):
        counts, subs, filts = part.tables(unipotent)
        classify = classify_unipotent if unipotent else classify_nilpotent
        for k, m in enumerate(_to_matrices(space, stack)):
            try:
                ce = classify(space, m, cache=cache)
            except Exception as exc:  # surfaced with the offending element
                raise CensusError(f"element {k} failed to classify ({exc}):\n{m.to_text()}") from None
            lab = str(ce.label)
            counts[lab] += 1
            filts[lab].add(ce.filtration.key())
            if ce.subpiece is not None:
                subs[(lab, str(ce.subpiece))] += 1
    return part


def _check_membership(space: FormedSpace, stack: np.ndarray, unipotent: bool):
    """Spot-check that the stack lies in the group / Lie algebra."""
    from .formspace import in_group, lie_algebra_member
    test = in_group if unipotent else lie_algebra_member
    step = max(1, len(stack) // 64)
    for m in _to_matrices(space, stack[::step]):
        if not test(space, m):
            raise CensusError(f"enumerated element is not a member:\n{m.to_text()}")


def _worker(args):
    kind, dim, q, nil, uni = args
    space = make_split_space(kind, dim, field_of_order(q))
    return classify_range(space, nil, uni, PartialCensus(kind, dim, q))


def partial_census(kind: str, dim: int, q: int, workers: int = 1, parts: int = 1,
                   budget: int | None = None) -> PartialCensus:
    """Classify everything in ``parts`` ranges (possibly in parallel) and merge."""
    space = make_split_space(kind, dim, field_of_order(q))
    nil = lie_nilpotent_stack(space, budget)
    uni = unipotent_stack(space, budget)
    parts = max(1, parts, workers)
    jobs = [(kind, dim, q, a, b)
            for a, b in zip(np.array_split(nil, parts), np.array_split(uni, parts))]
    if workers > 1:
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            results = pool.map(_worker, jobs)
    else:
        results = [_worker(j) for j in jobs]
    total = PartialCensus(kind, dim, q)
    for r in results:
        total = total.merge(r)
    return total


# ----------------------------------------------------------------------
# reports


def dim_g_ge(gs: GradedSpace, shift: int) -> int:
    return len(graded_lie_basis(gs, shift, at_least=True)) if gs.dim else 0


@dataclass
class LabelRow:
    label: str
    nilpotent_count: int
    unipotent_count: int
    observed_filtration_count: int
    unipotent_filtration_count: int
    dim_g_ge3: int
    bang_set_count: int
    alpha: int | None
    subpieces: dict

    def factorization_ok(self, q: int) -> bool:
        expected = self.observed_filtration_count * q ** self.dim_g_ge3 * self.bang_set_count
        return self.nilpotent_count == expected and self.unipotent_count == expected

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "nilpotent_count": self.nilpotent_count,
            "unipotent_count": self.unipotent_count,
            "observed_filtration_count": self.observed_filtration_count,
            "unipotent_filtration_count": self.unipotent_filtration_count,
            "dim_g_ge3": self.dim_g_ge3,
            "bang_set_count": self.bang_set_count,
        }
        if self.alpha is not None:
            out["alpha"] = self.alpha
            out["subpieces"] = self.subpieces
        return out


@dataclass
class CensusReport:
    kind: str
    dim: int
    q: int
    r: int
    rows: list
    verdicts: dict

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def row(self, label: str) -> LabelRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def total_nilpotent(self) -> int:
        return sum(r.nilpotent_count for r in self.rows)

    @property
    def total_unipotent(self) -> int:
        return sum(r.unipotent_count for r in self.rows)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "dim": self.dim,
            "q": self.q,
            "r": self.r,
            "labels": [r.to_json() for r in self.rows],
            "totals": {
                "nilpotent": self.total_nilpotent,
                "unipotent": self.total_unipotent,
                "expected": self.q ** self.r,
            },
            "verdicts": dict(self.verdicts),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)

    def to_csv(self) -> str:
        lines = ["label,nilpotent,unipotent,filtrations,dim_g_ge3,bang_set"]
        for r in self.rows:
            lines.append(f"\"{r.label}\",{r.nilpotent_count},{r.unipotent_count},"
                         f"{r.observed_filtration_count},{r.dim_g_ge3},{r.bang_set_count}")
        return "\n".join(lines) + "\n"


def finalize(part: PartialCensus, budget: int | None = None) -> CensusReport:
    kind, dim, q = part.kind, part.dim, part.q
    F = field_of_order(q)
    r = number_of_roots(kind, dim)
    rows = []
    char2_orth = kind == "O" and F.p == 2
    sub_ok = True
    for lab in enumerate_piece_labels(kind, dim):
        gs = grading_from_partition(lab, F)
        name = str(lab)
        subs = {}
        a = None
        if char2_orth and odd_set(gs):
            a = alpha(gs)
            keys = sorted({s for (l, s) in part.sub_nilpotent if l == name}
                          | {s for (l, s) in part.sub_unipotent if l == name})
            subs = {s: {"nilpotent": part.sub_nilpotent.get((name, s), 0),
                        "unipotent": part.sub_unipotent.get((name, s), 0)} for s in keys}
            if part.nilpotent.get(name, 0) and len(subs) != 2 ** a:
                sub_ok = False
        rows.append(LabelRow(
            label=name,
            nilpotent_count=part.nilpotent.get(name, 0),
            unipotent_count=part.unipotent.get(name, 0),
            observed_filtration_count=len(part.filtrations.get(name, ())),
            unipotent_filtration_count=len(part.unipotent_filtrations.get(name, ())),
            dim_g_ge3=dim_g_ge(gs, 3),
            bang_set_count=bang_set_count(gs, budget),
            alpha=a,
            subpieces=subs,
        ))
    known = {r_.label for r_ in rows}
    stray = (set(part.nilpotent) | set(part.unipotent)) - known
    expected = q ** r
    verdicts = {
        "labels_known": not stray,
        "total_nilpotent": sum(x.nilpotent_count for x in rows) == expected,
        "total_unipotent": sum(x.unipotent_count for x in rows) == expected,
        "factorization": all(x.factorization_ok(q) for x in rows),
        "nilpotent_equals_unipotent": all(x.nilpotent_count == x.unipotent_count for x in rows),
        "same_filtrations": all(x.observed_filtration_count == x.unipotent_filtration_count for x in rows),
        "subpieces_power_of_two": sub_ok,
    }
    return CensusReport(kind, dim, q, r, rows, verdicts)


def run_census(kind: str, dim: int, q: int, workers: int = 1, parts: int = 1,
               budget: int | None = None) -> CensusReport:
    return finalize(partial_census(kind, dim, q, workers, parts, budget), budget)


# ----------------------------------------------------------------------
# uniqueness by exhaustive filtration enumeration


def rref_matrices(F, k: int, m: int):
    """Every k x m matrix in reduced row echelon form of rank k (row tuples)."""
    import itertools
    for pivots in itertools.combinations(range(m), k):
        free = [(r, c) for r in range(k) for c in range(pivots[r] + 1, m) if c not in pivots]
        for vals in itertools.product(range(F.q), repeat=len(free)):
            rows = [[0] * m for _ in range(k)]
            for r, c in enumerate(pivots):
                rows[r][c] = 1
            for (r, c), v in zip(free, vals):
                rows[r][c] = v
            yield rows


def subspaces_between(F, containing, inside, dim: int) -> list:
    """All subspaces S with containing <= S <= inside and dim S = dim."""
    from .exactlin import Subspace, lin_comb
    n = inside.ambient_dim
    k = dim - containing.dim
    section = inside.complement_basis(containing)
    if k < 0 or k > len(section):
        return []
    out = []
    for rows in rref_matrices(F, k, len(section)):
        vecs = [lin_comb(F, r, section, n) for r in rows]
        out.append(Subspace.span(F, n, list(containing.basis) + vecs))
    return out


def member_filtrations(space: FormedSpace) -> list:
    """Every filtration of the family (all piece labels) on ``space``."""
    from .exactlin import Subspace
    from .gradings import Filtration, dims_from_partition
    F, n = space.field, space.dim
    out = []
    for lab in enumerate_piece_labels(space.kind, n):
        dims = dict(sorted(dims_from_partition(lab.partition).items(), reverse=True))
        weights = sorted(dims, reverse=True)
        # cumulative dimensions of V_{>=a} from the top
        cum = []
        acc = 0
        for w in weights:
            acc += dims[w]
            cum.append(acc)
        chains = [[Subspace.zero(F, n)]]
        for c in cum:
            nxt = []
            for ch in chains:
                for S in subspaces_between(F, ch[-1], Subspace.full(F, n), c):
                    nxt.append(ch + [S])
            chains = nxt
        lo = weights[-1]
        hi = weights[0]
        for ch in chains:
            # ch[k] = V_{>= weights[k-1]}; fill the missing weights
            steps = []
            for a in range(lo, hi + 2):
                k = sum(1 for w in weights if w >= a)
                steps.append(ch[k])
            filt = Filtration.make(space, lo, steps)
            if filt.is_member():
                out.append(filt)
    return out


def _classified_keys(space: FormedSpace, nil: np.ndarray, uni: np.ndarray) -> list:
    """Filtration key of every element of nil followed by every element of uni."""
    F, n = space.field, space.dim
    if F.q == 2 and n:
        xs = np.concatenate([nil, batch.matsub(F, uni, batch.identity(n)[None])], axis=0)
        res = fast2.classify_stack(space, xs)
        keys = [f.key() for f in res.filtrations]
        return [keys[i] for i in res.index]
    cache = {}
    out = [classify_nilpotent(space, m, cache=cache).filtration.key() for m in _to_matrices(space, nil)]
    out += [classify_unipotent(space, m, cache=cache).filtration.key() for m in _to_matrices(space, uni)]
    return out


def uniqueness_check(space: FormedSpace, budget: int | None = None) -> dict:
    """Each nilpotent and unipotent element fits exactly one member filtration.

    A filtration fits x when x raises it by 2 and the induced graded map
    lies in the set for gr (x = u - 1 for unipotents).  The unique fit must
    be the filtration returned by the classifier.  Returns counts and the
    positions of failing elements.
    """
    from .gradings import associated_graded
    from .pieces import in_bang_set
    F, n = space.field, space.dim
    nil = lie_nilpotent_stack(space, budget)
    uni = unipotent_stack(space, budget)
    xs = np.concatenate([nil, batch.matsub(F, uni, batch.identity(n)[None])], axis=0) if n else nil
    filts = member_filtrations(space)
    fits = np.zeros(len(xs), dtype=np.int64)
    fit_key = [None] * len(xs)
    for filt in filts:
        ag = associated_graded(filt)
        if n:
            P = np.array(ag.basis, dtype=batch.DTYPE).T
            Pinv = np.array(ag.adapted_matrix().inverse().rows, dtype=batch.DTYPE)
            X = batch.matmul(F, Pinv[None], batch.matmul(F, xs, P[None]))
            w = np.array(ag.graded.weights)
            raises = ~np.any(X[:, w[:, None] < w[None, :] + 2] != 0, axis=1)
            X = X * (w[:, None] == w[None, :] + 2)[None]
        else:
            raises = np.ones(len(xs), dtype=bool)
            X = xs
        for i in np.nonzero(raises)[0]:
            A = Matrix(F, tuple(tuple(int(v) for v in r) for r in X[i]), n)
            if in_bang_set(ag.graded, A, check=False):
                fits[i] += 1
                fit_key[i] = filt.key()
    keys = _classified_keys(space, nil, uni)
    failures = [i for i in range(len(xs)) if fits[i] != 1 or fit_key[i] != keys[i]]
    return {"filtrations": len(filts), "checked": len(xs), "failures": failures}


# ----------------------------------------------------------------------
# polynomiality


def interpolate(points) -> list:
    """Coefficients (low degree first) of the polynomial through the points (exact)."""
    xs = [Fraction(x) for x, _ in points]
    ys = [Fraction(y) for _, y in points]
    k = len(xs)
    coeffs = [Fraction(0)] * k
    for i in range(k):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(k):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for t in range(len(basis) - 1):
                basis[t] -= xs[j] * basis[t + 1]
            denom *= xs[i] - xs[j]
        for t in range(k):
            coeffs[t] += ys[i] * basis[t] / denom
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def evaluate(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def is_integral(coeffs) -> bool:
    return all(c.denominator == 1 for c in coeffs)


def poly_text(coeffs) -> str:
    terms = []
    for d in range(len(coeffs) - 1, -1, -1):
        c = coeffs[d]
        if c == 0:
            continue
        mon = "" if d == 0 else ("q" if d == 1 else f"q^{d}")
        if mon and abs(c) == 1:
            coef = "-" if c < 0 else "+"
        else:
            coef = f"{'-' if c < 0 else '+'}{abs(c)}"
        terms.append(coef + mon)
    if not terms:
        return "0"
    s = "".join(terms)
    return s[1:] if s.startswith("+") else s


def flag_count_formula(gs: GradedSpace, q: int) -> Fraction:
    """Number of filtrations of the grading's type, from group orders.

    |G| / (|Levi| * q^dim(unipotent radical)); for orthogonal spaces of even
    dimension with no weight-0 part both SO-classes of flags are counted.
    """
    kind, dims = gs.kind, dict(gs.dims)
    n = gs.dim
    u = dim_g_ge(gs, 1)
    if kind == "GL":
        levi = 1
        for d in dims.values():
            levi *= gl_order(d, q)
        return Fraction(gl_order(n, q), levi * q**u)
    levi = 1
    for w, d in dims.items():
        if w > 0:
            levi *= gl_order(d, q)
    d0 = dims.get(0, 0)
    if kind == "Sp":
        return Fraction(sp_order(n, q), levi * sp_order(d0, q) * q**u)
    total = so_order(n, q)
    if d0 == 0 and n % 2 == 0:
        total *= 2
    return Fraction(total, levi * so_order(d0, q) * q**u)


ODD_Q = (3, 5, 7, 9, 25, 27, 49, 81)


@dataclass
class PolyRow:
    label: str
    flag: list
    dim_g_ge3: int
    bang: list
    count: list
    census: dict
    checks: dict

    @property
    def ok(self) -> bool:
        return all(v for k, v in self.checks.items() if not k.startswith("info_"))

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "flag": poly_text(self.flag),
            "dim_g_ge3": self.dim_g_ge3,
            "bang": poly_text(self.bang),
            "count": poly_text(self.count),
            "census": {str(k): v for k, v in self.census.items()},
            "checks": self.checks,
        }


@dataclass
class PolyVerdict:
    kind: str
    dim: int
    q_list: list
    rows: list
    problems: list

    @property
    def ok(self) -> bool:
        return not self.problems and all(r.ok for r in self.rows)

    def to_json(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "q": self.q_list,
                "rows": [r.to_json() for r in self.rows], "problems": self.problems, "ok": self.ok}


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def verify_polynomiality(kind: str, dim: int, q_list, reports: dict | None = None,
                         budget: int | None = None) -> PolyVerdict:
    """Check the per-label counts against count(q) = flag(q) q^d bang(q).

    flag(q) is interpolated from the group-order expression (degree bound:
    dim of the unipotent radical), bang(q) from enumerations at odd q
    (degree bound: dim g_2, plus one confirming point).  The census values
    at every q in ``q_list`` must lie on the product.  For GL and Sp the
    characteristic-2 bang count must lie on the odd-q polynomial; for O it
    is reported.
    """
    reports = dict(reports or {})
    for q in q_list:
        if q not in reports:
            reports[q] = run_census(kind, dim, q, budget=budget)
    rows, problems = [], []
    for lab in enumerate_piece_labels(kind, dim):
        name = str(lab)
        gs3 = grading_from_partition(lab, field_of_order(3))
        u = dim_g_ge(gs3, 1)
        d2 = len(graded_lie_basis(gs3, 2))
        d3 = dim_g_ge(gs3, 3)
        flag_pts = [(q, flag_count_formula(gs3, q)) for q in range(2, u + 4)]
        flag = interpolate(flag_pts[:u + 1])
        bang_q = ODD_Q[:d2 + 2]
        if len(bang_q) < d2 + 2:
            problems.append(f"{name}: not enough odd q values for degree {d2}")
            continue
        bang_pts = []
        for q in bang_q:
            gsq = grading_from_partition(lab, field_of_order(q))
            bang_pts.append((q, bang_set_count(gsq, budget)))
        bang = interpolate(bang_pts[:d2 + 1])
        checks = {
            "flag_integral": is_integral(flag),
            "flag_degree": all(evaluate(flag, x) == y for x, y in flag_pts),
            "bang_integral": is_integral(bang),
            "bang_confirmed": evaluate(bang, bang_pts[-1][0]) == bang_pts[-1][1],
        }
        total = _polymul(_polymul(flag, [Fraction(0)] * d3 + [Fraction(1)]), bang)
        census = {}
        for q, rep in sorted(reports.items()):
            row = rep.row(name)
            census[q] = row.nilpotent_count
            on_poly = evaluate(total, q) == row.nilpotent_count
            bang_here = row.bang_set_count
            flag_here = row.observed_filtration_count == evaluate(flag, q)
            checks[f"flag_observed_q{q}"] = bool(flag_here)
            if q % 2 == 0:
                key = f"bang_char2_on_poly_q{q}"
                on = evaluate(bang, q) == bang_here
                checks[key if kind != "O" else "info_" + key] = bool(on)
                checks[f"count_q{q}" if kind != "O" else f"info_count_q{q}"] = bool(on_poly)
            else:
                checks[f"count_q{q}"] = bool(on_poly)
        rows.append(PolyRow(name, flag, d3, bang, total, census, checks))
    return PolyVerdict(kind, dim, list(q_list), rows, problems)


# ----------------------------------------------------------------------
# orbits of the Levi on the set


def levi_group(gs: GradedSpace, budget: int | None = None) -> np.ndarray:
    """All elements of G_0 (grading-preserving group elements) as an array."""
    from .exactlin import Matrix as M
    from .formspace import FormedSpace as FS, make_space_from_quad
    from .groups import product_stack
    F, n = gs.field, gs.dim
    sp = gs.space
    if gs.kind == "GL":
        parts = [enumerate_group(FS("GL", d, F), budget=budget) for _, d in gs.dims]
        return product_stack(F, parts)
    # positive weights: GL(V_i); V_{-i} gets the dual action; V_0 keeps its form
    blocks = {}
    for w, d in gs.dims:
        if w > 0:
            blocks[w] = enumerate_group(FS("GL", d, F), budget=budget)
    d0 = gs.d(0)
    if d0:
        idx = list(gs.block(0))
        if gs.kind == "Sp":
            sub = FS("Sp", d0, F, tuple(tuple(sp.gram[i][j] for j in idx) for i in idx))
        else:
            quad = [[sp.quad[i][j] for j in idx] for i in idx]
            sub = make_space_from_quad(F, quad)
        g0 = enumerate_group(sub, connected=True, budget=budget)
    else:
        g0 = np.zeros((1, 0, 0), dtype=batch.DTYPE)
    pos = sorted(blocks)
    total = int(np.prod([len(blocks[w]) for w in pos])) * len(g0)
    if total > budget_value(budget):
        raise BudgetExceeded(f"Levi group of order {total} exceeds budget")
    import itertools
    out = np.zeros((total, n, n), dtype=batch.DTYPE)
    k = 0
    gram = M(F, sp.gram, n)
    for combo in itertools.product(*[range(len(blocks[w])) for w in pos], range(len(g0))):
        g = [[0] * n for _ in range(n)]
        for w, c in zip(pos, combo[:-1]):
            gi = M.from_rows(F, blocks[w][c].tolist())
            ri, rj = list(gs.block(w)), list(gs.block(-w))
            # dual action: g_{-w} = (G_{w,-w})^{-1} g_w^{-T} G_{w,-w}
            Gb = gram.block(ri, rj)
            gm = Gb.inverse() @ gi.inverse().T @ Gb
            for a, ia in enumerate(ri):
                for b, ib in enumerate(ri):
                    g[ia][ib] = gi[a, b]
            for a, ia in enumerate(rj):
                for b, ib in enumerate(rj):
                    g[ia][ib] = gm[a, b]
        if d0:
            idx = list(gs.block(0))
            h = g0[combo[-1]]
            for a, ia in enumerate(idx):
                for b, ib in enumerate(idx):
                    g[ia][ib] = int(h[a, b])
        out[k] = g
        k += 1
    from .pieces import group_mask
    if not group_mask(sp, out).all():
        raise CensusError("constructed Levi element is not in the group")
    return out


@dataclass
class OrbitReport:
    orbit_sizes: list
    f_classes: dict
    f_constant_on_orbits: bool
    x_size: int | None

    @property
    def ok(self) -> bool:
        if not self.f_constant_on_orbits:
            return False
        if self.x_size is not None and len(self.f_classes) != self.x_size:
            return False
        return True

    def to_json(self) -> dict:
        return {"orbits": len(self.orbit_sizes), "orbit_sizes": self.orbit_sizes,
                "f_classes": self.f_classes, "f_constant_on_orbits": self.f_constant_on_orbits,
                "X_size": self.x_size, "ok": self.ok}


def orbit_oracle(gs: GradedSpace, budget: int | None = None) -> OrbitReport:
    """Orbits of G_0 on the set by conjugation, with the f-classes alongside."""
    F, n = gs.field, gs.dim
    elems = enumerate_bang_set(gs, budget)
    G = levi_group(gs, budget)
    Ginv = np.array([Matrix.from_rows(F, g.tolist(), n).inverse().rows for g in G],
                    dtype=batch.DTYPE).reshape(len(G), n, n)
    index = {a.rows: i for i, a in enumerate(elems)}
    orbit_of = [-1] * len(elems)
    sizes = []
    for i, a in enumerate(elems):
        if orbit_of[i] >= 0:
            continue
        A = np.array(a.rows, dtype=batch.DTYPE)
        conj = batch.matmul(F, batch.matmul(F, G, A[None]), Ginv)
        members = set()
        for c in np.unique(conj.reshape(len(G), -1), axis=0):
            key = tuple(tuple(int(x) for x in c[r * n:(r + 1) * n]) for r in range(n))
            if key not in index:
                raise CensusError("conjugate left the set")
            members.add(index[key])
        for j in members:
            orbit_of[j] = len(sizes)
        sizes.append(len(members))
    f_classes = {}
    constant = True
    x_size = None
    if gs.kind == "O" and F.p == 2 and odd_set(gs):
        x_size = len(allowed_functions(gs))
        per_orbit = {}
        for i, a in enumerate(elems):
            f = str(subpiece_invariant(gs, a, check=False))
            f_classes[f] = f_classes.get(f, 0) + 1
            if per_orbit.setdefault(orbit_of[i], f) != f:
                constant = False
    return OrbitReport(sorted(sizes, reverse=True), f_classes, constant, x_size)
