"""Exact branch-and-prune enumeration of fixed-norm vectors.

The core routine enumerates x in (offset + Z^n) with x^T G x = t for a
negative definite G, by rational Cholesky completion.  No floating
point anywhere: level bounds are computed with integer square roots on
cleared denominators, so completeness is exact.

Coordinates are searched in order of decreasing |diagonal| (deterministic
tie-break by index), which keeps the tree small on the rank-21 instances
coming from line enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from . import exactla as xla
from .exactla import Budget, BudgetExceeded
from .lattice import Lattice, LatticeError, PolarizedLattice, orthogonal_complement


@dataclass(frozen=True)
class CosetQuery:
    """Enumerate offset + L at a fixed norm; lattice must be negative definite."""

    lattice: Lattice
    offset: tuple
    target_norm: Fraction


def _cholesky_neg(gram):
    """Exact decomposition -G = sum_i d_i (x_i + sum_{j>i} l_ij x_j)^2.

    Returns (d, l) with d positive Fractions and l upper unitriangular.
    Raises LatticeError unless G is negative definite.
    """
    n = len(gram)
    a = [[Fraction(-gram[i][j]) for j in range(n)] for i in range(n)]
    d = [Fraction(0)] * n
    l = [[Fraction(0)] * n for _ in range(n)]
    for k in range(n):
        if a[k][k] <= 0:
            raise LatticeError("not negative definite")
        d[k] = a[k][k]
        for j in range(k + 1, n):
            l[k][j] = a[k][j] / a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] -= a[i][k] * a[k][j] / a[k][k]
    return d, l


def _perm_by_diag(gram):
    """Coordinate order: decreasing |G_ii|, ties by index."""
    n = len(gram)
    return sorted(range(n), key=lambda i: (-abs(gram[i][i]), i))


def enum_coset(query, budget=None):
    """All x in offset + Z^n with x^T G x = target_norm (G negative definite).

    Returns the complete list, lexicographically sorted, entries as
    Fractions when the offset is fractional and ints otherwise.
    """
    lat = query.lattice
    n = lat.rank
    t = Fraction(query.target_norm)
    if t > 0:
        return []
    if n == 0:
        return [()] if t == 0 else []
    offset = tuple(Fraction(x) for x in query.offset)

    perm = _perm_by_diag(lat.gram)
    gram_p = [[lat.gram[perm[i]][perm[j]] for j in range(n)] for i in range(n)]
    off_p = [offset[perm[i]] for i in range(n)]
    d, l = _cholesky_neg(gram_p)

    target = -t  # enumerate positive form value
    x = [0] * n
    rem = [Fraction(0)] * (n + 1)
    rem[n] = target
    found = []

    def bounds(i):
        """Integer range for x_i from d_i (x_i + s)^2 <= rem; returns (lo, hi, s)."""
        s = off_p[i]
        row = l[i]
        for j in range(i + 1, n):
            c = row[j]
            if c:
                v = x[j] + off_p[j]
                if v:
                    s += c * v
        r = rem[i + 1]
        bound = r / d[i]
        a, b = s.numerator, s.denominator
        m = isqrt((bound.numerator * b * b) // bound.denominator)
        # |x*b + a| <= m
        lo_i, hi_i = -(m + a), m - a
        lo_x = -((-lo_i) // b) if lo_i < 0 else (lo_i + b - 1) // b
        hi_x = hi_i // b if hi_i >= 0 else -((-hi_i + b - 1) // b)
        return lo_x, hi_x, s

    def descend(i):
        if budget is not None:
            budget.charge()
        lo_x, hi_x, s = bounds(i)
        for xi in range(lo_x, hi_x + 1):
            new_rem = rem[i + 1] - d[i] * (xi + s) ** 2
            if new_rem < 0:
                continue
            x[i] = xi
            rem[i] = new_rem
            if i == 0:
                if new_rem == 0:
                    found.append(tuple(x))
            else:
                descend(i - 1)
        x[i] = 0

    descend(n - 1)

    out = []
    for vec in found:
        full = [Fraction(0)] * n
        for i in range(n):
            full[perm[i]] = vec[i] + off_p[i]
        if all(f.denominator == 1 for f in full):
            out.append(tuple(int(f) for f in full))
        else:
            out.append(tuple(full))
    out.sort()
    return out


def enum_norm(lat, t, budget=None):
    """All v in L with v^2 = t (t <= 0); L negative definite.

    Complete, duplicate-free, lexicographically sorted; +-v both listed.
    """
    q = CosetQuery(lat, (Fraction(0),) * lat.rank, Fraction(t))
    return enum_coset(q, budget=budget)


def _pair_solve(lat, h):
    """(g, c) with c . (G h) = g = gcd of the pairing vector entries."""
    pair = xla.mat_vec(lat.gram, h)
    coeffs = [0] * len(pair)
    run = 0
    idx = []
    for i, v in enumerate(pair):
        if v == 0:
            continue
        if run == 0:
            run = v
            coeffs[i] = 1
        else:
            run, a, b = _xgcd(run, v)
            for j in idx:
                coeffs[j] *= a
            coeffs[i] = b
        idx.append(i)
    if run < 0:
        run = -run
        coeffs = [-c for c in coeffs]
    return run, tuple(coeffs)


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def _xgcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _xgcd(b, a % b)
    return g, y, x - (a // b) * y


class HyperplaneFrame:
    """Cached reduction of a polarized lattice to enumeration in h-perp.

    Vectors with a.h = k and a^2 = t correspond to k/4 h + w with w in a
    fixed coset of M = h-perp and w^2 = t - k^2/4.
    """

    def __init__(self, pol):
        self.pol = pol
        lat, h = pol.lattice, pol.h
        if not lat.is_nondegenerate():
            raise LatticeError("degenerate lattice")
        if lat.signature()[0] != 1:
            raise LatticeError("not-hyperbolic")
        self.M, self.basis = orthogonal_complement(lat, [h])
        if not self.M.is_negative_definite():
            raise LatticeError("h-perp must be negative definite")
        self.pair_gcd, self.pair_coeffs = _pair_solve(pol.lattice, pol.h)

    def vectors_with(self, k, t, budget=None):
        """All a in L with a.h = k, a^2 = t; returned in L coordinates."""
        lat, h = self.pol.lattice, self.pol.h
        if self.pair_gcd == 0 or k % self.pair_gcd != 0:
            return [] if k != 0 else enum_norm(self.M, t, budget)
        a_part = tuple((k // self.pair_gcd) * c for c in self.pair_coeffs)
        w = tuple(
            Fraction(a_part[i]) - Fraction(k, 4) * h[i] for i in range(lat.rank)
        )
        off = _coords(self.basis, w)
        assert off is not None, "offset not in h-perp span"
        t_res = Fraction(t) - Fraction(k * k, 4)
        found = enum_coset(CosetQuery(self.M, off, t_res), budget=budget)
        out = []
        for y in found:
            vec = [Fraction(k, 4) * h[i] for i in range(lat.rank)]
            for j, c in enumerate(y):
                if c:
                    for i in range(lat.rank):
                        vec[i] += Fraction(c) * self.basis[j][i]
            ivec = tuple(int(v) for v in vec)
            assert all(Fraction(iv) == v for iv, v in zip(ivec, vec))
            out.append(ivec)
        out.sort()
        return out


def _coords(basis_rows, vec):
    mat = [tuple(c) for c in zip(*basis_rows)]
    return xla.solve_rational(mat, vec)


def lines(pol, budget=None):
    """Fn(L) = {a : a^2 = -2, a.h = 1}; complete, sorted."""
    frame = HyperplaneFrame(pol)
    return frame.vectors_with(1, -2, budget=budget)


def is_admissible(pol, budget=None):
    """Saint-Donat admissibility: no (-2, h0) and no (0, h2) vectors.

    Returns (bool, witness): witness is a violating vector when False.
    """
    frame = HyperplaneFrame(pol)
    # exceptional divisors: e^2 = -2, e.h = 0 live in h-perp
    exc = enum_norm(frame.M, -2, budget=budget)
    if exc:
        y = exc[0]
        vec = [0] * pol.lattice.rank
        for j, c in enumerate(y):
            for i in range(pol.lattice.rank):
                vec[i] += c * frame.basis[j][i]
        return False, tuple(vec)
    doubles = frame.vectors_with(2, 0, budget=budget)
    if doubles:
        return False, doubles[0]
    return True, None
