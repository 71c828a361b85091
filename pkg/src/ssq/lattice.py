"""Integral lattices: named constructors, duals, twists, sums, complements.

Conventions follow the negative definite choice for root lattices: A_n,
D_n, E_n all have -2 on the diagonal.  A lattice stores only its Gram
matrix; operations that need an ambient embedding (complements,
overlattices, index-3 twists) return the basis vectors alongside.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import exactla as xla
from .exactla import Budget, dot


class LatticeError(ValueError):
    pass


class Lattice:
    """Finitely generated free Z-module with an integer Gram matrix."""

    __slots__ = ("gram", "_det", "_sig", "_snf")

    def __init__(self, gram):
        gram = xla.mat_from_rows(gram)
        n = len(gram)
        for row in gram:
            if len(row) != n:
                raise LatticeError("Gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if gram[i][j] != gram[j][i]:
                    raise LatticeError("Gram matrix must be symmetric")
        self.gram = gram
        self._det = None
        self._sig = None
        self._snf = None

    @property
    def rank(self):
        return len(self.gram)

    def det(self):
        if self._det is None:
            self._det = xla.det_bareiss(self.gram)
        return self._det

    def signature(self):
        """(sigma_plus, sigma_minus, sigma_zero), exact."""
        if self._sig is None:
            self._sig = xla.signature(self.gram)
        return self._sig

    def snf(self):
        if self._snf is None:
            self._snf = xla.snf(self.gram)
        return self._snf

    def is_even(self):
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def is_nondegenerate(self):
        return self.det() != 0

    def is_unimodular(self):
        return abs(self.det()) == 1

    def is_hyperbolic(self):
        return self.signature()[0] == 1 and self.signature()[2] == 0

    def is_negative_definite(self):
        p, m, z = self.signature()
        return p == 0 and z == 0

    def product(self, x, y):
        return dot(self.gram, x, y)

    def norm(self, x):
        return dot(self.gram, x, x)

    def discriminant_group_orders(self):
        """Invariant factors d_i > 1 of the discriminant group."""
        if self.det() == 0:
            raise LatticeError("degenerate lattice")
        return tuple(d for d in self.snf().diagonal() if d > 1)

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def __repr__(self):
        return f"Lattice(rank={self.rank}, det={self.det()})"


@dataclass(frozen=True)
class PolarizedLattice:
    """Lattice with a distinguished vector h of square 4."""

    lattice: Lattice
    h: tuple

    def __post_init__(self):
        if self.lattice.norm(self.h) != 4:
            raise LatticeError("polarization must have square 4")

    @property
    def rank(self):
        return self.lattice.rank

    @property
    def gram(self):
        return self.lattice.gram


# ---------------------------------------------------------------------------
# named lattices


def _chain_gram(n, bonds):
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = -2
    for i, j in bonds:
        g[i][j] = g[j][i] = 1
    return g


def make_U():
    return Lattice([[0, 1], [1, 0]])


def make_A(n):
    if n < 1:
        raise LatticeError("A_n needs n >= 1")
    return Lattice(_chain_gram(n, [(i, i + 1) for i in range(n - 1)]))


def make_D(n):
    if n < 2:
        raise LatticeError("D_n needs n >= 2")
    bonds = [(i, i + 1) for i in range(n - 2)]
    if n >= 3:
        bonds.append((n - 3, n - 1))
    return Lattice(_chain_gram(n, bonds))


def make_E(n):
    if n not in (6, 7, 8):
        raise LatticeError("E_n needs n in {6,7,8}")
    # Bourbaki: chain 0-2-3-4-...; node 1 attached to node 3
    bonds = [(0, 2), (2, 3), (1, 3)] + [(i, i + 1) for i in range(3, n - 1)]
    return Lattice(_chain_gram(n, bonds))


def make_H(n):
    if n < 1:
        raise LatticeError("H_n needs n >= 1")
    return Lattice([[-1 if i == j else 0 for j in range(n)] for i in range(n)])


def make_L_K3():
    return direct_sum(make_E(8), make_E(8), make_U(), make_U(), make_U())


def make_named(name):
    """Named lattice: U, An, Dn, E6/E7/E8, Hn, L_K3."""
    if name == "U":
        return make_U()
    if name in ("L_K3", "LK3"):
        return make_L_K3()
    for prefix, fn in (("A", make_A), ("D", make_D), ("E", make_E), ("H", make_H)):
        if name.startswith(prefix) and name[1:].isdigit():
            return fn(int(name[1:]))
    raise LatticeError(f"invalid lattice name: {name!r}")


# ---------------------------------------------------------------------------
# basic operations


def rescale(lat, s):
    """L(s): same group, form multiplied by s.  s*gram must stay integral."""
    s = Fraction(s)
    new = [[s * x for x in row] for row in lat.gram]
    for row in new:
        for x in row:
            if x.denominator != 1:
                raise LatticeError(
                    "non-integral-result: rescaling leaves the integers"
                )
    return Lattice([[int(x) for x in row] for row in new])


def dual_basis(lat):
    """Basis of the dual L* inside L (x) Q: rows of gram^-1."""
    if lat.det() == 0:
        raise LatticeError("degenerate-lattice")
    return xla.mat_inverse_fraction(lat.gram)


def dual_rescaled(lat, s):
    """L*(s): the dual lattice with form multiplied by s (must be integral).

    The Gram of L* in the dual basis is gram^-1, so this is s * gram^-1.
    """
    inv = dual_basis(lat)
    s = Fraction(s)
    new = [[s * x for x in row] for row in inv]
    for row in new:
        for x in row:
            if x.denominator != 1:
                raise LatticeError("non-integral-result: dual rescale")
    return Lattice([[int(x) for x in row] for row in new])


def direct_sum(*lats):
    n = sum(l.rank for l in lats)
    g = [[0] * n for _ in range(n)]
    off = 0
    for l in lats:
        r = l.rank
        for i in range(r):
            for j in range(r):
                g[off + i][off + j] = l.gram[i][j]
        off += r
    return Lattice(g)


def orthogonal_complement(lat, vectors):
    """Primitive complement {x in L : x.v = 0 for all v}.

    Returns (complement lattice, basis rows in L coordinates).
    """
    vecs = [tuple(v) for v in vectors]
    if vecs and xla.mat_rank(xla.mat_from_rows(vecs)) != len(vecs):
        raise LatticeError("complement vectors must be independent")
    pairing = xla.mat_from_rows([xla.mat_vec(lat.gram, v) for v in vecs])
    if not vecs:
        basis = [tuple(r) for r in xla.identity_matrix(lat.rank)]
    else:
        basis = xla.nullspace_rational(pairing)
    gram = [[lat.product(a, b) for b in basis] for a in basis]
    return Lattice(gram), [tuple(b) for b in basis]


def sublattice(lat, rows):
    """Lattice spanned by integer rows, with its induced Gram."""
    basis = xla.hnf_rows(rows, lat.rank)
    gram = [[lat.product(a, b) for b in basis] for a in basis]
    return Lattice(gram), basis


def lattice_from_rational_span(ambient_gram, rational_rows, require_even=False):
    """Integral span of rational vectors inside an ambient quadratic space.

    Returns (Lattice, basis rows as Fraction tuples).  Raises if the
    spanned group is not an integral lattice (some product leaves Z), or
    if require_even and some vector has odd square.
    """
    rows = [tuple(Fraction(x) for x in r) for r in rational_rows]
    den = 1
    for r in rows:
        for x in r:
            den = den * x.denominator // _gcd(den, x.denominator)
    int_rows = [tuple(int(x * den) for x in r) for r in rows]
    basis_scaled = xla.hnf_rows(int_rows)
    basis = [tuple(Fraction(x, den) for x in r) for r in basis_scaled]
    gram = []
    for a in basis:
        row = []
        for b in basis:
            v = dot(ambient_gram, a, b)
            if Fraction(v).denominator != 1:
                raise LatticeError("non-integral: span is not a lattice")
            row.append(int(v))
        gram.append(row)
    lat = Lattice(gram)
    if require_even and not lat.is_even():
        raise LatticeError("not-even: span has odd vectors")
    return lat, basis


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def coords_in_basis(basis_rows, vec):
    """Coordinates of vec in the given (possibly rational) basis, or None."""
    mat = [tuple(c) for c in zip(*basis_rows)]
    return xla.solve_rational(mat, vec)


# ---------------------------------------------------------------------------
# pencil lattices P_{p,q}


class PencilLattice:
    """Lattice of a pencil of type (p, q): h, axis l, fibers m_{i,+-}, n_k.

    Basis order: h, l, m_{1,+}, m_{1,-}, ..., m_{p,+}, m_{p,-}, n_1..n_q.
    """

    def __init__(self, p, q):
        if p < 0 or q < 0 or p + q < 1:
            raise LatticeError("need p, q >= 0 and p + q >= 1")
        self.p = p
        self.q = q
        n = 2 + 2 * p + q
        g = [[0] * n for _ in range(n)]
        g[0][0] = 4
        for i in range(1, n):
            g[i][i] = -2
            g[0][i] = g[i][0] = 1  # h . line = 1
        for i in range(2, n):
            g[1][i] = g[i][1] = 1  # l meets every member
        for i in range(p):
            a, b = self.m_index(i, +1), self.m_index(i, -1)
            g[a][b] = g[b][a] = 1
        self.lattice = Lattice(g)
        self.h = tuple(1 if i == 0 else 0 for i in range(n))

    @property
    def rank(self):
        return self.lattice.rank

    @property
    def gram(self):
        return self.lattice.gram

    def polarized(self):
        return PolarizedLattice(self.lattice, self.h)

    def m_index(self, i, sign):
        assert 0 <= i < self.p
        return 2 + 2 * i + (0 if sign > 0 else 1)

    def n_index(self, k):
        assert 0 <= k < self.q
        return 2 + 2 * self.p + k

    def basis_vector(self, idx):
        return tuple(1 if i == idx else 0 for i in range(self.rank))

    def l_vec(self):
        return self.basis_vector(1)

    def m_vec(self, i, sign):
        return self.basis_vector(self.m_index(i, sign))

    def m0_vec(self, i):
        """Third line of the i-th 3-fiber: h - l - m_+ - m_-."""
        v = [0] * self.rank
        v[0] = 1
        v[1] = -1
        v[self.m_index(i, +1)] = -1
        v[self.m_index(i, -1)] = -1
        return tuple(v)

    def n_vec(self, k):
        return self.basis_vector(self.n_index(k))

    # rational classes generating the discriminant (obs-style bookkeeping)

    def lam(self):
        """(l - h)/3: isotropic order-3 class."""
        v = [Fraction(0)] * self.rank
        v[0] = Fraction(-1, 3)
        v[1] = Fraction(1, 3)
        return tuple(v)

    def mu(self, i):
        """(m_{i,+} - m_{i,-})/3: square -2/3 class."""
        v = [Fraction(0)] * self.rank
        v[self.m_index(i, +1)] = Fraction(1, 3)
        v[self.m_index(i, -1)] = Fraction(-1, 3)
        return tuple(v)

    def nu(self, k):
        """n_k^* = -(lam + n_k)/2: square -1/2 class (2-torsion via 3*nu)."""
        v = [Fraction(0)] * self.rank
        v[0] = Fraction(1, 6)
        v[1] = Fraction(-1, 6)
        v[self.n_index(k)] = Fraction(-1, 2)
        return tuple(v)

    def three_nu(self, k):
        return tuple(3 * x for x in self.nu(k))

    def omega(self):
        """Order-3 generator (l + sum m - sum n)/3; needs p+q = 1 mod 3."""
        if (self.p + self.q) % 3 != 1:
            raise LatticeError("omega exists only when p + q = 1 mod 3")
        v = [Fraction(0)] * self.rank
        v[1] = Fraction(1, 3)
        for i in range(self.p):
            v[self.m_index(i, +1)] = Fraction(1, 3)
            v[self.m_index(i, -1)] = Fraction(1, 3)
        for k in range(self.q):
            v[self.n_index(k)] = Fraction(-1, 3)
        return tuple(v)

    def u9(self):
        """Order-9 generator (l - r*lam + sum m - sum n)/3, r = p+q-1 mod 3."""
        r = (self.p + self.q - 1) % 3
        if r == 0:
            raise LatticeError("u9 exists only when p + q != 1 mod 3")
        lam = self.lam()
        v = [Fraction(0)] * self.rank
        v[1] = Fraction(1, 3)
        for i in range(self.p):
            v[self.m_index(i, +1)] = Fraction(1, 3)
            v[self.m_index(i, -1)] = Fraction(1, 3)
        for k in range(self.q):
            v[self.n_index(k)] = Fraction(-1, 3)
        return tuple(x - Fraction(r, 3) * l for x, l in zip(v, lam))


def make_pencil_lattice(p, q):
    return PencilLattice(p, q)


# ---------------------------------------------------------------------------
# odd unimodular lattices for the characteristic-2 analysis


def _h_ambient(n):
    return [[-1 if i == j else 0 for j in range(n)] for i in range(n)]


def _d_rows(n):
    """Maximal even sublattice of H_n: vectors with even coordinate sum."""
    rows = [[0] * n for _ in range(n - 1)]
    for i in range(n - 1):
        rows[i][i] = 1
        rows[i][i + 1] = -1
    rows.append([1] * 0 + [2] + [0] * (n - 1))
    return rows


def make_odd_unimodular(name):
    """The four odd definite unimodular lattices used for char 2.

    D12plus (rank 12), E7sq_plus (14), A15plus (15), D8sq_plus (16).
    Returns (Lattice, basis rows, ambient_gram): basis rows live in the
    stated coordinate ambient (H_n for the D/A families, E_7^2 for E7sq).
    """
    if name == "D12plus":
        amb = _h_ambient(12)
        rows = [[Fraction(1, 2)] * 12] + [list(map(Fraction, r)) for r in _d_rows(12)]
        lat, basis = lattice_from_rational_span(amb, rows)
    elif name == "A15plus":
        amb = _h_ambient(16)
        # A15 = e-perp in H16; glue by 4 * (generator of discr A15)
        a15 = []
        for i in range(15):
            r = [0] * 16
            r[i], r[i + 1] = 1, -1
            a15.append(list(map(Fraction, r)))
        glue = [Fraction(4) - Fraction(4, 16) if i == 0 else -Fraction(4, 16)
                for i in range(16)]
        lat, basis = lattice_from_rational_span(amb, a15 + [glue])
    elif name == "E7sq_plus":
        e7 = make_E(7)
        amb = direct_sum(e7, e7).gram
        gen = _discr_generator_of_prime(e7, 2)
        rows = [list(map(Fraction, r)) for r in xla.identity_matrix(14)]
        rows.append(list(gen) + list(gen))
        lat, basis = lattice_from_rational_span(amb, rows)
    elif name == "D8sq_plus":
        amb = _h_ambient(16)
        d8a = [list(map(Fraction, r + [0] * 8)) for r in _d_rows(8)]
        d8b = [list(map(Fraction, [0] * 8 + r)) for r in _d_rows(8)]
        half_e = [Fraction(1, 2)] * 8
        e8_last = [Fraction(0)] * 7 + [Fraction(1)]
        glue1 = half_e + e8_last
        glue2 = e8_last + half_e
        lat, basis = lattice_from_rational_span(amb, d8a + d8b + [glue1, glue2])
    else:
        raise LatticeError(f"unknown odd unimodular lattice {name!r}")
    assert abs(lat.det()) == 1, name
    assert not lat.is_even(), name
    return lat, basis, amb


def _discr_generator_of_prime(lat, p):
    """A generator of the p-part of discr for cyclic discriminant groups."""
    res = lat.snf()
    d = res.diagonal()
    uinv = xla.mat_inverse_fraction(res.U)
    ginv = xla.mat_inverse_fraction(lat.gram)
    best = None
    for i, di in enumerate(d):
        if di > 1 and di % p == 0:
            col = tuple(uinv[r][i] for r in range(lat.rank))
            vec = tuple(
                sum(ginv[r][c] * col[c] for c in range(lat.rank))
                for r in range(lat.rank)
            )
            best = tuple(Fraction(x) for x in vec)
    assert best is not None
    return best


@dataclass(frozen=True)
class CharTwoComplementSpec:
    """(barT, u): odd unimodular lattice of rank 20-q plus u with u^2 = q-1 mod 3."""

    barT: Lattice
    u: tuple

    @property
    def q(self):
        return 20 - self.barT.rank


def char_two_complement(spec):
    """T with T(1/2) = {a in barT : a.u = 0 mod 3}, form doubled.

    Returns (T lattice, basis rows in barT coordinates).
    """
    barT, u = spec.barT, tuple(spec.u)
    q = spec.q
    if abs(barT.det()) != 1 or barT.is_even():
        raise LatticeError("barT must be odd unimodular")
    if (barT.norm(u) - (q - 1)) % 3 != 0:
        raise LatticeError("bad-u-square: need u^2 = q - 1 mod 3")
    n = barT.rank
    w = [x % 3 for x in xla.mat_vec(barT.gram, u)]
    piv = next((j for j, x in enumerate(w) if x % 3), None)
    if piv is None:
        rows = [list(r) for r in xla.identity_matrix(n)]
    else:
        inv = 1 if w[piv] % 3 == 1 else 2
        rows = []
        for i in range(n):
            if i == piv:
                r = [0] * n
                r[piv] = 3
                rows.append(r)
            else:
                r = [0] * n
                r[i] = 1
                r[piv] = (-w[i] * inv) % 3
                rows.append(r)
    basis = xla.hnf_rows(rows, n)
    gram = [[2 * dot(barT.gram, a, b) for b in basis] for a in basis]
    t = Lattice(gram)
    assert t.is_even()
    return t, basis


# ---------------------------------------------------------------------------
# characteristic vectors


def characteristic_class_mod2(lat):
    """Solve G c = diag(G) mod 2; c is the characteristic class mod 2L."""
    n = lat.rank
    g2 = [[lat.gram[i][j] % 2 for j in range(n)] for i in range(n)]
    target = [lat.gram[i][i] % 2 for i in range(n)]
    aug = [g2[i] + [target[i]] for i in range(n)]
    red, piv = xla.fp_rref(xla.mat_from_rows(aug), 2)
    c = [0] * n
    for r, col in enumerate(piv):
        if col == n:
            raise LatticeError("no characteristic vector (degenerate mod 2)")
        c[col] = int(red[r][n]) % 2
    # verify
    gc = xla.mat_vec(lat.gram, c)
    for i in range(n):
        if (gc[i] - lat.gram[i][i]) % 2:
            raise LatticeError("characteristic solve failed")
    return tuple(c)


def characteristic_vectors(lat, square, congruence=None, budget=None):
    """All characteristic vectors of the given square in a definite odd
    unimodular lattice; optionally filtered to the class mod 3L given by
    `congruence` (up to sign).
    """
    from . import shortvec

    if not lat.is_negative_definite():
        raise LatticeError("indefinite-lattice")
    if not abs(lat.det()) == 1:
        raise LatticeError("need unimodular lattice")
    c0 = characteristic_class_mod2(lat)
    offset = tuple(Fraction(x, 2) for x in c0)
    found = shortvec.enum_coset(
        shortvec.CosetQuery(rescale(lat, 4), offset, Fraction(square)),
        budget=budget,
    )
    out = []
    for y in found:
        vec = tuple(int(2 * t) for t in y)
        if congruence is not None:
            diff_plus = [(a - b) % 3 for a, b in zip(vec, congruence)]
            diff_minus = [(a + b) % 3 for a, b in zip(vec, congruence)]
            if any(diff_plus) and any(diff_minus):
                continue
        out.append(vec)
    return sorted(out)


# ---------------------------------------------------------------------------
# isometry of definite lattices (test helper; rank <= 22, norms <= 16)


def definite_isometric(a, b, norm_bound=16, budget_limit=10 ** 7):
    """Backtracking isometry test for negative definite lattices."""
    from . import shortvec

    if a.rank != b.rank:
        return False
    if a.det() != b.det():
        return False
    bound = max(
        [abs(a.gram[i][i]) for i in range(a.rank)]
        + [abs(b.gram[i][i]) for i in range(b.rank)]
        + [2]
    )
    if bound > norm_bound:
        raise LatticeError("norm bound exceeded for isometry search")
    budget = Budget(budget_limit)
    pools = {}
    for t in sorted({a.gram[i][i] for i in range(a.rank)}):
        va = shortvec.enum_norm(a, t, budget=budget)
        vb = shortvec.enum_norm(b, t, budget=budget)
        if len(va) != len(vb):
            return False
        pools[t] = vb

    cols = []

    def extend(i):
        budget.charge()
        if i == a.rank:
            return True
        t = a.gram[i][i]
        for w in pools[t]:
            ok = True
            for j in range(i):
                if b.product(cols[j], w) != a.gram[j][i]:
                    ok = False
                    break
            if ok:
                cols.append(w)
                if extend(i + 1):
                    return True
                cols.pop()
        return False

    return extend(0)


def same_genus_invariants(a, b):
    """Cheap genus-level comparison: rank, signature, parity, discr orders."""
    return (
        a.rank == b.rank
        and a.signature() == b.signature()
        and a.is_even() == b.is_even()
        and a.discriminant_group_orders() == b.discriminant_group_orders()
    )


# ---------------------------------------------------------------------------
# text format


def write_lattice(path, lat, h=None, comment=None):
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"rank {lat.rank}\n")
        for row in lat.gram:
            fh.write(" ".join(str(x) for x in row) + "\n")
        if h is not None:
            fh.write("h: " + " ".join(str(x) for x in h) + "\n")


def read_lattice(path):
    """Returns (Lattice, h or None) from the text format."""
    rank = None
    rows = []
    h = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("rank"):
                rank = int(line.split()[1])
            elif line.startswith("h:"):
                h = tuple(int(x) for x in line[2:].split())
            else:
                rows.append([int(x) for x in line.split()])
    if rank is None or len(rows) != rank:
        raise LatticeError("malformed lattice file")
    return Lattice(rows), h
