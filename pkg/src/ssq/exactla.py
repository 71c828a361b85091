"""Exact linear algebra over Z, Q and the small prime fields F2, F3, F4.

Everything here is arbitrary precision: Gram determinants of rank-22
lattices do not fit in 64-bit words.  Matrices are immutable tuples of
tuples of python ints; rational data uses fractions.Fraction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class BudgetExceeded(Exception):
    """Raised when a search exceeds its node budget."""


class Budget:
    """Mutable node counter shared across a search.

    charge() raises BudgetExceeded once the limit is passed; limit None
    means unlimited.
    """

    def __init__(self, limit=None):
        self.limit = limit
        self.used = 0

    def charge(self, n=1):
        self.used += n
        if self.limit is not None and self.used > self.limit:
            raise BudgetExceeded(f"budget of {self.limit} nodes exceeded")

    def remaining(self):
        if self.limit is None:
            return None
        return max(0, self.limit - self.used)


# ---------------------------------------------------------------------------
# integer matrices


def mat_shape(m):
    return len(m), (len(m[0]) if m else 0)


def mat_from_rows(rows):
    return tuple(tuple(int(x) for x in r) for r in rows)


def identity_matrix(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zero_matrix(r, c):
    return tuple((0,) * c for _ in range(r))


def mat_mul(a, b):
    ra, ca = mat_shape(a)
    rb, cb = mat_shape(b)
    assert ca == rb, (ca, rb)
    bt = tuple(zip(*b)) if rb else ()
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_vec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_mat(v, a):
    ra, ca = mat_shape(a)
    return tuple(sum(v[i] * a[i][j] for i in range(ra)) for j in range(ca))


def mat_transpose(a):
    return tuple(zip(*a)) if a else ()


def mat_neg(a):
    return tuple(tuple(-x for x in r) for r in a)


def dot(gram, x, y):
    """Bilinear product x^T gram y; entries may be ints or Fractions."""
    acc = 0
    for i, xi in enumerate(x):
        if not xi:
            continue
        row = gram[i]
        acc += xi * sum(row[j] * yj for j, yj in enumerate(y) if yj)
    return acc


def det_bareiss(m):
    """Exact determinant by fraction-free Bareiss elimination."""
    n, c = mat_shape(m)
    assert n == c
    if n == 0:
        return 1
    a = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class SnfResult:
    """U * M * V = D with D diagonal, d_i >= 0, d_i | d_{i+1}."""

    D: tuple
    U: tuple
    V: tuple

    def diagonal(self):
        r, c = mat_shape(self.D)
        return tuple(self.D[i][i] for i in range(min(r, c)))


def snf(m):
    """Smith normal form with deterministic smallest-pivot strategy.

    Pivot selection: the entry of smallest nonzero absolute value, ties
    broken by lowest (row, col) index.  Returns SnfResult with
    U*M*V = D.
    """
    rows, cols = mat_shape(m)
    a = [list(r) for r in m]
    u = [list(r) for r in identity_matrix(rows)]
    v = [list(r) for r in identity_matrix(cols)]

    def row_op(i, j, q):  # row_i -= q*row_j
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, q):  # col_i -= q*col_j
        for r in a:
            r[i] -= q * r[j]
        for r in v:
            r[i] -= q * r[j]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    t = 0
    done = False
    while t < min(rows, cols) and not done:
        while True:
            # smallest nonzero entry of the trailing submatrix becomes pivot;
            # repicking each pass keeps entry growth under control
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    x = a[i][j]
                    if x != 0 and (
                        best is None or abs(x) < abs(a[best[0]][best[1]])
                    ):
                        best = (i, j)
            if best is None:
                done = True
                break
            bi, bj = best
            if bi != t:
                swap_rows(t, bi)
            if bj != t:
                swap_cols(t, bj)
            clean = True
            for i in range(t + 1, rows):
                if a[i][t] != 0:
                    row_op(i, t, a[i][t] // a[t][t])
                    if a[i][t] != 0:
                        clean = False
            for j in range(t + 1, cols):
                if a[t][j] != 0:
                    col_op(j, t, a[t][j] // a[t][t])
                    if a[t][j] != 0:
                        clean = False
            if clean:
                t += 1
                break

    # enforce divisibility chain d_i | d_{i+1} (zeros already trail)
    n = min(rows, cols)
    i = 0
    while i < n - 1:
        x, y = a[i][i], a[i + 1][i + 1]
        if x == 0 or y % x == 0:
            i += 1
            continue
        col_op(i, i + 1, -1)  # col_i += col_{i+1}; now a[i+1][i] = y
        while a[i + 1][i] != 0:  # euclid in column i
            q = a[i][i] // a[i + 1][i]
            row_op(i, i + 1, q)
            swap_rows(i, i + 1)
        if a[i][i + 1] != 0:  # clear the dirtied a[i][i+1]; gcd divides it exactly
            q = a[i][i + 1] // a[i][i]
            col_op(i + 1, i, q)
            assert a[i][i + 1] == 0
        i = max(0, i - 1)
    # make diagonal nonnegative
    for i in range(n):
        if i < rows and i < cols and a[i][i] < 0:
            for rr in a:
                rr[i] = -rr[i]
            for rr in v:
                rr[i] = -rr[i]
    return SnfResult(mat_from_rows(a), mat_from_rows(u), mat_from_rows(v))


def mat_inverse_fraction(m):
    """Exact inverse of a nonsingular integer or Fraction matrix."""
    n, c = mat_shape(m)
    assert n == c
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            raise ZeroDivisionError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def solve_rational(m, b):
    """One solution x of M x = b over Q, or None if inconsistent."""
    rows, cols = mat_shape(m)
    a = [[Fraction(x) for x in row] + [Fraction(bv)] for row, bv in zip(m, b)]
    pivots = []
    r = 0
    for col in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][col]
        a[r] = [x / pv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if a[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for i, col in enumerate(pivots):
        x[col] = a[i][cols]
    return tuple(x)


def nullspace_rational(m):
    """Basis of {x : M x = 0}.  Integer, saturated, deterministic.

    Computed from the SNF transform V: columns of V matching zero
    diagonal entries of D.  The basis is primitive in Z^n.
    """
    rows, cols = mat_shape(m)
    if rows == 0:
        return [tuple(r) for r in identity_matrix(cols)]
    res = snf(m)
    d = res.diagonal()
    rank = sum(1 for x in d if x != 0)
    vt = mat_transpose(res.V)
    return [vt[j] for j in range(rank, cols)]


def mat_rank(m):
    rows, cols = mat_shape(m)
    if rows == 0 or cols == 0:
        return 0
    a = [[Fraction(x) for x in row] for row in m]
    r = 0
    for col in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][col]
        for i in range(r + 1, rows):
            if a[i][col] != 0:
                f = a[i][col] / pv
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == rows:
            break
    return r


def hnf_rows(rows, ncols=None):
    """Row-style Hermite normal form basis of the integer row span.

    Returns a list of linearly independent rows (pivot entries positive,
    entries above pivots reduced).  Deterministic.
    """
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    a = [list(map(int, r)) for r in rows if any(r)]
    basis = []
    col = 0
    while a and col < ncols:
        # gcd-reduce column col across all rows
        live = [r for r in a if r[col] != 0]
        if not live:
            col += 1
            continue
        while True:
            live = [r for r in a if r[col] != 0]
            if len(live) <= 1:
                break
            live.sort(key=lambda r: abs(r[col]))
            p = live[0]
            for r in live[1:]:
                q = r[col] // p[col]
                for j in range(ncols):
                    r[j] -= q * p[j]
        piv = next(r for r in a if r[col] != 0)
        a.remove(piv)
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        col += 1
    # reduce above pivots
    for i in range(len(basis) - 1, -1, -1):
        pcol = next(j for j in range(ncols) if basis[i][j] != 0)
        for k in range(i):
            q = basis[k][pcol] // basis[i][pcol]
            if q:
                basis[k] = [x - q * y for x, y in zip(basis[k], basis[i])]
    return [tuple(r) for r in basis]


def saturate_rows(rows, ncols=None):
    """Primitive hull of the row span: {x in Z^n : k x in span for some k>0}."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    rows = [r for r in rows if any(r)]
    if not rows:
        return []
    res = snf(mat_from_rows(rows))
    d = res.diagonal()
    r = sum(1 for x in d if x != 0)
    vinv = mat_inverse_fraction(res.V)
    sat = []
    for i in range(r):
        row = vinv[i]
        assert all(x.denominator == 1 for x in row)
        sat.append(tuple(int(x) for x in row))
    return hnf_rows(sat, ncols)


# ---------------------------------------------------------------------------
# exact signature


def signature(gram):
    """Inertia (sigma_plus, sigma_minus, sigma_zero) by exact reduction over Q."""
    n, c = mat_shape(gram)
    assert n == c
    for i in range(n):
        for j in range(i):
            assert gram[i][j] == gram[j][i], "matrix must be symmetric"
    a = [[Fraction(x) for x in row] for row in gram]
    plus = minus = zero = 0
    idx = list(range(n))

    def eliminate(k, rest):
        pv = a[k][k]
        pivot_row = [a[k][j] for j in range(n)]  # frozen before any zeroing
        for i in rest:
            if a[i][k] != 0:
                f = a[i][k] / pv
                for j in rest:
                    a[i][j] -= f * pivot_row[j]
        for i in rest:
            a[i][k] = Fraction(0)
            a[k][i] = Fraction(0)

    remaining = idx[:]
    while remaining:
        k = None
        for i in remaining:
            if a[i][i] != 0:
                k = i
                break
        if k is not None:
            if a[k][k] > 0:
                plus += 1
            else:
                minus += 1
            remaining.remove(k)
            eliminate(k, remaining)
            continue
        # all diagonal entries zero: look for off-diagonal pivot pair
        pair = None
        for i in remaining:
            for j in remaining:
                if j > i and a[i][j] != 0:
                    pair = (i, j)
                    break
            if pair:
                break
        if pair is None:
            zero += len(remaining)
            break
        i, j = pair
        # basis change e_i -> e_i + e_j gives diagonal 2*a_ij
        for t in remaining:
            a[i][t] += a[j][t]
        for t in remaining:
            a[t][i] += a[t][j]
        # now a[i][i] = 2 a_ij != 0; loop continues
    return plus, minus, zero


# ---------------------------------------------------------------------------
# prime fields F2, F3 (numpy based) and tiny F4

F4_MUL = np.array(
    [[0, 0, 0, 0],
     [0, 1, 2, 3],
     [0, 2, 3, 1],
     [0, 3, 1, 2]], dtype=np.uint8)
# elements encoded 0,1,w,w+1 as 0..3 with w^2 = w+1; addition is xor


def f4_add(a, b):
    return a ^ b


def f4_mul(a, b):
    return F4_MUL[a, b]


def fp_rref(mat, p):
    """Reduced row echelon form mod p; returns (rref, pivot columns)."""
    a = np.array(mat, dtype=np.int64) % p
    rows, cols = a.shape
    piv = []
    r = 0
    for c in range(cols):
        hit = None
        for i in range(r, rows):
            if a[i, c] % p:
                hit = i
                break
        if hit is None:
            continue
        a[[r, hit]] = a[[hit, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        piv.append(c)
        r += 1
        if r == rows:
            break
    return a[:r], piv


def fp_span(basis, p):
    """All vectors in the span of the rows, as a numpy array (lexicographic)."""
    basis = np.atleast_2d(np.array(basis, dtype=np.int64) % p)
    k, n = basis.shape
    if k == 0:
        return np.zeros((1, n), dtype=np.int64)
    coeffs = np.array(list(itertools.product(range(p), repeat=k)), dtype=np.int64)
    vecs = coeffs.dot(basis) % p
    vecs = np.unique(vecs, axis=0)
    return vecs


def vec_encode(v, p):
    code = 0
    for x in v:
        code = code * p + int(x) % p
    return code


def vec_decode(code, n, p):
    out = []
    for _ in range(n):
        out.append(code % p)
        code //= p
    return tuple(reversed(out))


def orbit_of(start_codes, gen_tables, budget=None):
    """BFS orbit closure of a set of point codes under permutation tables."""
    seen = set(int(s) for s in start_codes)
    frontier = list(seen)
    while frontier:
        nxt = []
        for g in gen_tables:
            for s in frontier:
                t = int(g[s])
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
                    if budget is not None:
                        budget.charge()
        frontier = nxt
    return seen


def matrices_to_tables(gens, n, p):
    """Permutation tables on all p^n vector codes induced by matrices mod p."""
    total = p ** n
    vecs = np.array([vec_decode(c, n, p) for c in range(total)], dtype=np.int64)
    pows = np.array([p ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    tables = []
    for g in gens:
        img = vecs.dot(np.array(g, dtype=np.int64).T) % p
        tables.append(img.dot(pows))
    return tables


def f3_subspace_orbits(gens, dim, points=None, budget_limit=10 ** 7):
    """Orbits of vectors of F_3^dim under the group generated by `gens`.

    gens: invertible integer matrices mod 3.  points: optional iterable of
    vectors restricting the ground set (defaults to the full space).  Each
    orbit is reported by its lexicographically minimal member; the list of
    (representative, orbit_size) pairs is sorted by representative.

    Raises BudgetExceeded when the closure grows past budget_limit nodes.
    """
    budget = Budget(budget_limit)
    for g in gens:
        r, c = mat_shape(g)
        assert r == c == dim
    tables = matrices_to_tables(gens, dim, 3)
    if points is None:
        pool = range(3 ** dim)
    else:
        pool = sorted(vec_encode(v, 3) for v in points)
    remaining = set(int(x) for x in pool)
    out = []
    for c in sorted(remaining):
        if c not in remaining:
            continue
        orb = orbit_of([c], tables, budget)
        rep = min(orb)
        out.append((vec_decode(rep, dim, 3), len(orb)))
        remaining -= orb
    out.sort(key=lambda t: t[0])
    return out


def group_closure_tables(gen_tables, budget_limit=10 ** 7, max_order=None):
    """All elements of the permutation group generated by the tables.

    Elements are numpy int arrays over the point set; identity included.
    Deterministic BFS order.  Raises BudgetExceeded past the node budget.
    """
    if not gen_tables:
        return [np.arange(0)]
    npts = len(gen_tables[0])
    ident = np.arange(npts, dtype=np.int32)
    gens = [np.asarray(g, dtype=np.int32) for g in gen_tables]
    seen = {ident.tobytes(): ident}
    frontier = [ident]
    count = 1
    while frontier:
        nxt = []
        for g in gens:
            for h in frontier:
                prod = g[h]
                key = prod.tobytes()
                if key not in seen:
                    seen[key] = prod
                    nxt.append(prod)
                    count += 1
                    if max_order is not None and count > max_order:
                        raise BudgetExceeded("group larger than declared bound")
                    if count > budget_limit:
                        raise BudgetExceeded("group closure exceeds budget")
        frontier = nxt
    return list(seen.values())
