"""Brute-force reference implementations used as test oracles.

Nothing here reuses the package's row reduction, form code or
classification.  Field arithmetic is redone from the polynomial
description (digits base p, reduction modulo the fixed modulus), and every
linear-algebra question is answered by enumerating vectors.
"""

import itertools


class PolyField:
    """F_p[x]/(m) with elements encoded base p, arithmetic from scratch."""

    def __init__(self, p, modulus):
        self.p = p
        self.modulus = tuple(modulus)
        self.k = len(modulus) - 1
        self.q = p ** self.k

    def digits(self, a):
        return [(a // self.p ** i) % self.p for i in range(self.k)]

    def encode(self, d):
        return sum(c * self.p ** i for i, c in enumerate(d))

    def add(self, a, b):
        return self.encode([(x + y) % self.p for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a):
        return self.encode([(-x) % self.p for x in self.digits(a)])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        p, k, m = self.p, self.k, self.modulus
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(self.digits(a)):
            for j, y in enumerate(self.digits(b)):
                prod[i + j] = (prod[i + j] + x * y) % p
        # reduce modulo the monic modulus m (coefficients from x^0 up)
        for deg in range(len(prod) - 1, k - 1, -1):
            c = prod[deg]
            if c:
                for t in range(k + 1):
                    prod[deg - k + t] = (prod[deg - k + t] - c * m[t]) % p
        return self.encode(prod[:k])

    def inv(self, a):
        for b in range(1, self.q):
            if self.mul(a, b) == 1:
                return b
        raise ZeroDivisionError(a)


def vectors(q, n):
    """All of F_q^n as tuples (encoded entries)."""
    return list(itertools.product(range(q), repeat=n))


def apply(F, M, v):
    out = []
    for row in M:
        acc = 0
        for a, x in zip(row, v):
            acc = F.add[acc][F.mul[a][x]]
        out.append(acc)
    return tuple(out)


def matmul(F, A, B):
    n, m = len(A), len(B[0]) if B else 0
    cols = [tuple(B[i][j] for i in range(len(B))) for j in range(m)]
    out = [apply(F, A, c) for c in cols]
    return tuple(tuple(out[j][i] for j in range(m)) for i in range(n))


def span_set(F, vecs, n):
    """The set of all linear combinations of vecs."""
    out = {tuple([0] * n)}
    for v in vecs:
        new = set()
        for w in out:
            for c in range(F.q):
                new.add(tuple(F.add[a][F.mul[c][b]] for a, b in zip(w, v)))
        out = new
    return out


def dim_of(q, size):
    d = 0
    while q ** d < size:
        d += 1
    assert q ** d == size
    return d


def brute_rank(F, M):
    n = len(M)
    cols = [tuple(M[i][j] for i in range(n)) for j in range(len(M[0]))] if M else []
    return dim_of(F.q, len(span_set(F, cols, n)))


def brute_kernel(F, M, ncols):
    return {v for v in vectors(F.q, ncols) if not any(apply(F, M, v))}


def bil(F, gram, u, v):
    acc = 0
    for i, a in enumerate(u):
        for j, b in enumerate(v):
            acc = F.add[acc][F.mul[F.mul[a][gram[i][j]]][b]]
    return acc


def quad(F, table, v):
    acc = 0
    n = len(v)
    for i in range(n):
        for j in range(i, n):
            acc = F.add[acc][F.mul[table[i][j]][F.mul[v[i]][v[j]]]]
    return acc


def all_matrices(q, n):
    for flat in itertools.product(range(q), repeat=n * n):
        yield tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n))


def is_nilpotent(F, M):
    n = len(M)
    P = M
    for _ in range(n):
        if not any(any(r) for r in P):
            return True
        P = matmul(F, P, M)
    return not any(any(r) for r in P)


def lie_member(F, kind, gram, table, T):
    """Membership in gl / sp / o by checking the defining identity on all vectors."""
    n = len(T)
    if kind == "GL":
        return True
    vs = vectors(F.q, n)
    if kind == "Sp":
        return all(F.add[bil(F, gram, apply(F, T, u), v)][bil(F, gram, u, apply(F, T, v))] == 0
                   for u in vs for v in vs)
    radical = [v for v in vs if all(bil(F, gram, v, w) == 0 for w in vs)]
    if any(any(apply(F, T, r)) for r in radical):
        return False
    return all(bil(F, gram, apply(F, T, v), v) == 0 for v in vs)


def preserves(F, kind, gram, table, g):
    n = len(g)
    vs = vectors(F.q, n)
    if kind == "Sp":
        return all(bil(F, gram, apply(F, g, u), apply(F, g, v)) == bil(F, gram, u, v) for u in vs for v in vs)
    return all(quad(F, table, apply(F, g, v)) == quad(F, table, v) for v in vs)


def invertible(F, g):
    n = len(g)
    return len({apply(F, g, v) for v in vectors(F.q, n)}) == F.q ** n


def form_group(F, kind, gram, table):
    """All invertible matrices preserving the form (tiny cases only)."""
    n = len(gram)
    return [g for g in all_matrices(F.q, n) if preserves(F, kind, gram, table, g) and invertible(F, g)]


def nilpotent_lie_count(F, kind, n, gram, table):
    return sum(1 for T in all_matrices(F.q, n) if is_nilpotent(F, T) and lie_member(F, kind, gram, table, T))


def mat_power(F, M, e):
    n = len(M)
    P = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    for _ in range(e):
        P = matmul(F, P, M)
    return P


def block_vectors(q, weights, w):
    """All vectors supported on the basis positions of weight w."""
    pos = [k for k, x in enumerate(weights) if x == w]
    out = []
    for coeffs in itertools.product(range(q), repeat=len(pos)):
        v = [0] * len(weights)
        for k, c in zip(pos, coeffs):
            v[k] = c
        out.append(tuple(v))
    return out


def bang_member(F, kind, weights, gram, table, A):
    """The isomorphism / nondegeneracy conditions, decided by listing vectors."""
    top = max(weights, default=0)
    for n in range(1, top + 1):
        d = sum(1 for w in weights if w == n)
        if not d:
            continue
        src = block_vectors(F.q, weights, -n)
        if kind != "O" or n % 2:
            P = mat_power(F, A, n)
            if len({apply(F, P, v) for v in src}) != F.q ** d:
                return False
            continue
        P = mat_power(F, A, n // 2)
        K = {apply(F, P, v) for v in src}
        if len(K) != F.q ** d:
            return False
        for k in K:
            if any(k) and quad(F, table, k) == 0 and all(bil(F, gram, k, w) == 0 for w in K):
                return False
    return True


def allowed_functions(M, d):
    """Functions {1..t} -> {0,1} obeying the gap rules, d(n) = dim V_{-2n}."""
    t = len(M) - 1
    out = []
    for f in itertools.product((0, 1), repeat=max(t, 0)):
        if all((M[i] - M[i - 1] < 2 or f[i - 1] == 1) and
               not (M[i] - M[i - 1] == 1 and d(M[i - 1]) == d(M[i]) and f[i - 1] == 1)
               for i in range(1, t + 1)):
            out.append(f)
    return out
