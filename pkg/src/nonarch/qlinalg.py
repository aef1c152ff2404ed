"""Exact linear algebra over Q and over prime fields.

Matrices are lists of row lists.  Subspaces of a coordinate space are
represented by lists of spanning row vectors.  Everything is deterministic:
pivots are chosen by leftmost column, first usable row.
"""

from __future__ import annotations

from fractions import Fraction


class QQ:
    """Rational field operations."""

    zero = Fraction(0)
    one = Fraction(1)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def inv(a):
        return 1 / Fraction(a)

    @staticmethod
    def is_zero(a):
        return a == 0

    @staticmethod
    def from_int(n):
        return Fraction(n)


class GF:
    """Prime field operations on int residues."""

    def __init__(self, p: int):
        self.p = p
        self.zero = 0
        self.one = 1 % p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        return pow(a % self.p, self.p - 2, self.p)

    def is_zero(self, a):
        return a % self.p == 0

    def from_int(self, n):
        return n % self.p


def identity(n, field=QQ):
    return [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]


def matmul(A, B, field=QQ):
    n, k = len(A), len(B)
    m = len(B[0]) if B else 0
    out = [[field.zero] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        row = out[i]
        for t in range(k):
            a = Ai[t]
            if field.is_zero(a):
                continue
            Bt = B[t]
            for j in range(m):
                row[j] = field.add(row[j], field.mul(a, Bt[j]))
    return out


def mat_vec(A, v, field=QQ):
    return [
        _dot(row, v, field)
        for row in A
    ]


def _dot(row, v, field):
    acc = field.zero
    for a, b in zip(row, v):
        if not field.is_zero(a):
            acc = field.add(acc, field.mul(a, b))
    return acc


def rref(M, field=QQ):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    rows = [list(r) for r in M]
    n = len(rows)
    m = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(m):
        sel = None
        for i in range(r, n):
            if not field.is_zero(rows[i][c]):
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        inv = field.inv(rows[r][c])
        rows[r] = [field.mul(inv, x) for x in rows[r]]
        for i in range(n):
            if i != r and not field.is_zero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [
                    field.sub(x, field.mul(f, y)) for x, y in zip(rows[i], rows[r])
                ]
        pivots.append(c)
        r += 1
        if r == n:
            break
    return rows, pivots


def rank(M, field=QQ) -> int:
    if not M:
        return 0
    if field is QQ:
        return int_rank([[Fraction(x) for x in row] for row in M])
    return len(rref(M, field)[1])


def int_rank(M) -> int:
    """Rank over Q by fraction-free Bareiss elimination on scaled integers."""
    if not M:
        return 0
    rows = []
    for row in M:
        den = 1
        for x in row:
            den = den * Fraction(x).denominator // _gcd(den, Fraction(x).denominator)
        rows.append([int(Fraction(x) * den) for x in row])
    n, m = len(rows), len(rows[0])
    r = 0
    prev = 1
    for c in range(m):
        sel = None
        for i in range(r, n):
            if rows[i][c]:
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        pivot = rows[r][c]
        for i in range(r + 1, n):
            if any(rows[i][c:]):
                rows[i] = [
                    (rows[i][j] * pivot - rows[i][c] * rows[r][j]) // prev
                    for j in range(m)
                ]
        prev = pivot
        r += 1
        if r == n:
            break
    return r


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a) if a else abs(b)


def nullspace(M, field=QQ):
    """Basis of {x : M x = 0} as row vectors."""
    if not M:
        return []
    m = len(M[0])
    rows, pivots = rref(M, field)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        vec = [field.zero] * m
        vec[fc] = field.one
        for r, pc in enumerate(pivots):
            vec[pc] = field.sub(field.zero, rows[r][fc])
        basis.append(vec)
    return basis


def solve(M, rhs, field=QQ):
    """One solution of M x = rhs (free coordinates zero), or None."""
    if not M:
        return None if any(not field.is_zero(b) for b in rhs) else []
    m = len(M[0])
    aug = [list(row) + [b] for row, b in zip(M, rhs)]
    rows, pivots = rref(aug, field)
    for row in rows:
        if all(field.is_zero(x) for x in row[:-1]) and not field.is_zero(row[-1]):
            return None
    x = [field.zero] * m
    for r, pc in enumerate(pivots):
        if pc == m:
            return None
        x[pc] = rows[r][-1]
    return x


def row_space(vectors, field=QQ):
    """Canonical basis (rref rows) of the span of the given vectors."""
    vecs = [v for v in vectors if any(not field.is_zero(x) for x in v)]
    if not vecs:
        return []
    rows, pivots = rref(vecs, field)
    return [rows[i] for i in range(len(pivots))]


def span_rank(vectors, field=QQ) -> int:
    return rank(vectors, field) if vectors else 0


def subspace_leq(A, B, field=QQ) -> bool:
    """Span(A) contained in Span(B)?"""
    if not A:
        return True
    if not B:
        return all(all(field.is_zero(x) for x in v) for v in A)
    return span_rank(list(B) + list(A), field) == span_rank(B, field)


def subspace_eq(A, B, field=QQ) -> bool:
    return subspace_leq(A, B, field) and subspace_leq(B, A, field)


def subspace_sum(A, B):
    return list(A) + list(B)


def subspace_intersection(A, B, field=QQ):
    """Basis of Span(A) meet Span(B)."""
    A = [v for v in A if any(not field.is_zero(x) for x in v)]
    B = [v for v in B if any(not field.is_zero(x) for x in v)]
    if not A or not B:
        return []
    # lambda A - mu B = 0  =>  intersection vectors are lambda A
    m = len(A[0])
    stacked = []
    for j in range(m):
        stacked.append([a[j] for a in A] + [field.sub(field.zero, b[j]) for b in B])
    out = []
    for sol in nullspace(stacked, field):
        lam = sol[: len(A)]
        vec = [field.zero] * m
        for coef, a in zip(lam, A):
            if field.is_zero(coef):
                continue
            vec = [field.add(x, field.mul(coef, y)) for x, y in zip(vec, a)]
        if any(not field.is_zero(x) for x in vec):
            out.append(vec)
    return row_space(out, field)


def clear_denominators(vec):
    """Scale a rational vector to coprime integers with positive leading entry."""
    den = 1
    for x in vec:
        fx = Fraction(x)
        den = den * fx.denominator // _gcd(den, fx.denominator)
    ints = [int(Fraction(x) * den) for x in vec]
    g = 0
    for x in ints:
        g = _gcd(g, x)
    if g:
        ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return ints
