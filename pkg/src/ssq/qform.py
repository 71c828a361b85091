"""Finite quadratic forms and discriminant-form machinery.

A form is a finite abelian group with q: F -> Q/2Z quadratic; the
bilinear b: F x F -> Q/Z is determined by polarization, with
b(x,x) = q(x) mod 1.  Forms built from lattices carry rational lifts of
their generators, so kernels of extensions can be handed back to the
gluing layer as honest vectors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import exactla as xla
from .exactla import Budget, BudgetExceeded
from .lattice import Lattice, LatticeError


def _mod2(x):
    return Fraction(x) % 2


def _mod1(x):
    return Fraction(x) % 1


class FqfError(ValueError):
    pass


class Fqf:
    """Finite quadratic form on Z/d_1 x ... x Z/d_k (d_1 | d_2 | ...).

    qvals[i] = q(g_i) in Q/2Z; bmat[i][j] = b(g_i, g_j) in Q/Z for i != j
    (the diagonal is forced to q mod 1).  Optional lifts: rational
    vectors representing the generators in L (x) Q for lattice-backed
    forms, together with the source Gram.
    """

    def __init__(self, orders, qvals, bmat, lifts=None, source_gram=None):
        self.orders = tuple(int(d) for d in orders)
        k = len(self.orders)
        if any(d < 2 for d in self.orders):
            raise FqfError("generator orders must be >= 2")
        self.qvals = tuple(_mod2(v) for v in qvals)
        self.bmat = tuple(
            tuple(
                _mod1(self.qvals[i]) if i == j else _mod1(bmat[i][j])
                for j in range(k)
            )
            for i in range(k)
        )
        for i in range(k):
            for j in range(k):
                if self.bmat[i][j] != self.bmat[j][i]:
                    raise FqfError("b must be symmetric")
                if _mod1(self.bmat[i][j] * self.orders[i]) != 0:
                    raise FqfError("b incompatible with generator orders")
            if _mod2(self.qvals[i] * self.orders[i] ** 2) != 0:
                raise FqfError("q incompatible with generator orders")
        self.lifts = None if lifts is None else tuple(tuple(v) for v in lifts)
        self.source_gram = source_gram

    # -- basic structure ----------------------------------------------------

    @property
    def ngens(self):
        return len(self.orders)

    def order(self):
        n = 1
        for d in self.orders:
            n *= d
        return n

    def exponent(self):
        e = 1
        for d in self.orders:
            e = _lcm(e, d)
        return e

    def zero(self):
        return (0,) * self.ngens

    def reduce(self, el):
        return tuple(int(e) % d for e, d in zip(el, self.orders))

    def add(self, x, y):
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders))

    def neg(self, x):
        return tuple((-a) % d for a, d in zip(x, self.orders))

    def smul(self, n, x):
        return tuple((n * a) % d for a, d in zip(x, self.orders))

    def order_of(self, x):
        n = 1
        for a, d in zip(x, self.orders):
            if a:
                g = _gcd(a, d)
                n = _lcm(n, d // g)
        return n

    def elements(self, limit=None):
        total = self.order()
        if limit is not None and total > limit:
            raise BudgetExceeded(f"group of order {total} exceeds limit")
        for tup in itertools.product(*[range(d) for d in self.orders]):
            yield tup

    def q(self, x):
        acc = Fraction(0)
        k = self.ngens
        for i in range(k):
            if x[i]:
                acc += x[i] * x[i] * self.qvals[i]
                for j in range(i + 1, k):
                    if x[j]:
                        acc += 2 * x[i] * x[j] * self.bmat[i][j]
        return _mod2(acc)

    def b(self, x, y):
        acc = Fraction(0)
        k = self.ngens
        for i in range(k):
            if x[i]:
                row = self.bmat[i]
                for j in range(k):
                    if y[j]:
                        acc += x[i] * y[j] * row[j]
        return _mod1(acc)

    def lift(self, x):
        """Rational vector in L (x) Q representing x (lattice-backed forms)."""
        if self.lifts is None:
            raise FqfError("form carries no lattice lifts")
        n = len(self.lifts[0]) if self.lifts else 0
        v = [Fraction(0)] * n
        for c, g in zip(x, self.lifts):
            if c:
                for i in range(n):
                    v[i] += c * g[i]
        return tuple(v)

    def is_nondegenerate(self):
        """The associated map F -> Hom(F, Q/Z) is bijective."""
        k = self.ngens
        if k == 0:
            return True
        D = 1
        for row in self.bmat:
            for x in row:
                D = _lcm(D, x.denominator)
        N = [[int(self.bmat[i][j] * D) for j in range(k)] for i in range(k)]
        stacked = N + [[D if i == j else 0 for j in range(k)] for i in range(k)]
        diag = xla.snf(xla.mat_from_rows(stacked)).diagonal()
        idx = 1
        for e in diag:
            idx *= e
        # radical size = prod(d_i) * prod(e_i) / D^k; trivial iff equality
        lhs = idx
        for d in self.orders:
            lhs *= d
        return lhs == D ** len(self.orders)

    def __repr__(self):
        return f"Fqf(orders={self.orders})"

    def __eq__(self, other):
        return (
            isinstance(other, Fqf)
            and self.orders == other.orders
            and self.qvals == other.qvals
            and self.bmat == other.bmat
        )

    def __hash__(self):
        return hash((self.orders, self.qvals, self.bmat))


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def _lcm(a, b):
    return a * b // _gcd(a, b) if a and b else 0


def trivial_form():
    return Fqf((), (), ())


def cyclic_form(m, n):
    """<m/n>: Z/n with q(g) = m/n mod 2; needs gcd(m,n)=1 and mn even."""
    if _gcd(m, n) != 1 or (m * n) % 2:
        raise FqfError("cyclic form needs gcd(m,n)=1 and mn even")
    return Fqf((n,), (Fraction(m, n),), ((Fraction(0),),))


def u_block(n):
    """U_n (n = 2^k): q(g1)=q(g2)=0, b(g1,g2)=1/n."""
    z = Fraction(0)
    return Fqf((n, n), (z, z), ((z, Fraction(1, n)), (Fraction(1, n), z)))


def v_block(n):
    """V_n (n = 2^k): q = 2/n on both generators, b(g1,g2)=1/n."""
    t = Fraction(2, n)
    return Fqf((n, n), (t, t), ((t, Fraction(1, n)), (Fraction(1, n), t)))


def orthogonal_sum(*forms):
    orders = []
    qvals = []
    k = sum(f.ngens for f in forms)
    bmat = [[Fraction(0)] * k for _ in range(k)]
    off = 0
    for f in forms:
        for i in range(f.ngens):
            orders.append(f.orders[i])
            qvals.append(f.qvals[i])
            for j in range(f.ngens):
                bmat[off + i][off + j] = f.bmat[i][j]
        off += f.ngens
    # re-sort so the invariant-factor chain is respected where possible
    return Fqf(tuple(orders), tuple(qvals), bmat)


# ---------------------------------------------------------------------------
# discriminant form of an even lattice


def discr(lat):
    """discr L = L*/L with q(x) = x^2 mod 2, b = x.y mod 1."""
    if not lat.is_even():
        raise FqfError("odd-lattice: quadratic extension undefined")
    if lat.det() == 0:
        raise FqfError("degenerate lattice")
    res = lat.snf()
    d = res.diagonal()
    uinv = xla.mat_inverse_fraction(res.U)
    ginv = xla.mat_inverse_fraction(lat.gram)
    gens = []
    orders = []
    for i, di in enumerate(d):
        if di > 1:
            col = tuple(uinv[r][i] for r in range(lat.rank))
            vec = tuple(
                sum(ginv[r][c] * col[c] for c in range(lat.rank))
                for r in range(lat.rank)
            )
            gens.append(vec)
            orders.append(di)
    qvals = [xla.dot(lat.gram, g, g) for g in gens]
    bmat = [[xla.dot(lat.gram, a, b) for b in gens] for a in gens]
    form = Fqf(orders, qvals, bmat, lifts=gens, source_gram=lat.gram)
    form._discr_U = res.U
    form._discr_diag = d
    return form


def class_of(form, w):
    """Coordinates in `form` of the class of a rational vector w in L*."""
    if form.source_gram is None:
        raise FqfError("form is not lattice-backed")
    gram = form.source_gram
    pair = [xla.dot(gram, w, e) for e in _std_basis(len(gram))]
    for x in pair:
        if Fraction(x).denominator != 1:
            raise FqfError("vector is not in the dual lattice")
    c = xla.mat_vec(form._discr_U, [int(x) for x in pair])
    coords = []
    i = 0
    for slot, di in enumerate(form._discr_diag):
        if di > 1:
            coords.append(int(c[slot]) % di)
    return tuple(coords)


def _std_basis(n):
    return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]


# ---------------------------------------------------------------------------
# p-parts, lengths, determinants


def p_part(form, p):
    """The p-primary orthogonal summand, with composed lifts."""
    gens = []
    orders = []
    lifts = [] if form.lifts is not None else None
    for i, d in enumerate(form.orders):
        a = 1
        while d % p == 0:
            d //= p
            a *= p
        if a == 1:
            continue
        m = form.orders[i] // a  # coprime part
        # multiplier m * (inverse of m mod a) ... m*g has order a; scale to
        # keep q-values those of the p-component: use c = m * (m^-1 mod a)?
        gens.append((i, m))
        orders.append(a)
    k = len(gens)
    el = []
    for i, m in gens:
        e = [0] * form.ngens
        e[i] = m
        el.append(tuple(e))
    qvals = [form.q(e) for e in el]
    bmat = [[form.b(a, b) for b in el] for a in el]
    lifted = None
    if form.lifts is not None:
        lifted = [form.lift(e) for e in el]
    sub = Fqf(orders, qvals, bmat, lifts=lifted, source_gram=form.source_gram)
    sub._embed = el  # images of the p-part generators inside `form`
    sub._parent = form
    return sub


def length_p(form, p):
    return sum(1 for d in form.orders if d % p == 0)


def det_p(form, p):
    """(length, unit) with det_p = unit * |F_p|^{-1}.

    For odd p the unit is reported as a Legendre class in {+1, -1}; for
    p = 2 as the residue mod 8 (callers apply the odd-form relaxation).
    """
    part = p_part(form, p)
    if part.ngens == 0:
        return 0, 1
    # matrix of the form in a minimal basis: for p = 2 the diagonal uses
    # the quadratic values mod 2 (V_2 and U_2 share a bilinear matrix)
    mat = [[part.bmat[i][j] for j in range(part.ngens)] for i in range(part.ngens)]
    if p == 2:
        for i in range(part.ngens):
            mat[i][i] = part.qvals[i]
    det = _fraction_det(mat)
    size = part.order()
    u = det * size
    if u == 0:
        raise FqfError("degenerate p-part")
    un, ud = u.numerator, u.denominator
    # strip the prime-to-p ambiguity: u should be a p-adic unit
    while un % p == 0 and ud % p == 0:  # pragma: no cover
        un //= p
        ud //= p
    if p == 2:
        num = un % 8
        den = ud % 8
        inv = {1: 1, 3: 3, 5: 5, 7: 7}[den]
        # inverse mod 8 of odd x is x itself (x^2 = 1 mod 8)
        return part.ngens, (num * inv) % 8
    ls = _legendre(un % p, p) * _legendre(ud % p, p)
    return part.ngens, ls


def _legendre(a, p):
    a %= p
    if a == 0:
        raise FqfError("non-unit in Legendre symbol")
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _fraction_det(mat):
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    det = Fraction(1)
    for c in range(n):
        piv = None
        for r in range(c, n):
            if a[r][c] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c] != 0:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


# ---------------------------------------------------------------------------
# Brown invariant: exact Gauss sums


def _jacobi(a, n):
    """Jacobi symbol (a|n) for odd n > 0."""
    assert n > 0 and n % 2 == 1
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _brown_cyclic_odd(m, n):
    """Br<m/n> for odd prime power n: angle of (b|n) eps_n sqrt(n)."""
    b = m // 2 if m % 2 == 0 else None
    if b is None:
        # m odd, n odd: mn odd is not allowed
        raise FqfError("cyclic block with odd m and odd n")
    s = _jacobi(b % n, n)
    br = 0 if n % 4 == 1 else 2
    if s == -1:
        br = (br + 4) % 8
    return br % 8


class _Cyclotomic2:
    """Z[zeta_m] for m = 2^t >= 8, power basis zeta^0..zeta^{m/2-1}."""

    def __init__(self, m):
        assert m >= 8 and m & (m - 1) == 0
        self.m = m
        self.dim = m // 2

    def zero(self):
        return [0] * self.dim

    def add_power(self, vec, e, c=1):
        e %= self.m
        if e >= self.dim:
            vec[e - self.dim] -= c
        else:
            vec[e] += c

    def power(self, e):
        v = self.zero()
        self.add_power(v, e)
        return v

    def mul(self, a, b):
        out = [0] * self.dim
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        e = i + j
                        if e >= self.dim:
                            out[e - self.dim] -= x * y
                        else:
                            out[e] += x * y
        return out


def _brown_2adic(elements_q, n):
    """Brown of a 2-group block: q-values with denominators dividing n=2^k.

    elements_q: list of q(x) over all group elements.  Matches the sum
    against sqrt(|G|) * zeta_8^t exactly in Z[zeta_{max(2n,8)}].
    """
    m = max(2 * n, 8)
    ring = _Cyclotomic2(m)
    total = ring.zero()
    for qv in elements_q:
        # e^{i pi qv} = zeta_{2n}^{qv * n} = zeta_m^{qv * m / 2}
        e = qv * m / 2
        assert e.denominator == 1
        ring.add_power(total, int(e) % m)
    size = len(elements_q)
    # sqrt(size) = sqrt(2)^e2 * s with size = 2^e2 * s^2
    e2 = 0
    s = size
    while s % 2 == 0:
        s //= 2
        e2 += 1
    root = int(s ** 0.5 + 0.5)
    assert root * root == s, "block size must be 2^a * square"
    v_sqrt2 = ring.zero()
    ring.add_power(v_sqrt2, m // 8)
    ring.add_power(v_sqrt2, -m // 8)
    acc = ring.zero()
    acc[0] = root
    for _ in range(e2):
        acc = ring.mul(acc, v_sqrt2)
    for t in range(8):
        cand = ring.mul(acc, ring.power(t * (m // 8)))
        if cand == total:
            return t
    raise FqfError("gauss sum does not match sqrt(|G|) * zeta_8^t")


def brown(form):
    """Brown invariant in Z/8 via block decomposition."""
    br = 0
    for blk in block_decompose(form):
        br = (br + _brown_block(blk)) % 8
    return br


def _brown_block(blk):
    kind = blk[0]
    if kind == "cyc":
        _, m, n = blk
        if n % 2 == 1:
            return _brown_cyclic_odd(m, n)
        qs = [_mod2(Fraction(m * x * x, n)) for x in range(n)]
        return _brown_2adic(qs, n)
    _, n = blk[:2]
    f = u_block(n) if kind == "U" else v_block(n)
    qs = [f.q((x, y)) for x in range(n) for y in range(n)]
    return _brown_2adic(qs, n)


def brown_numeric(form, limit=10 ** 5):
    """Floating Gauss-sum Brown (cross-check only)."""
    import cmath

    size = form.order()
    if size > limit:
        raise BudgetExceeded("form too large for numeric Brown")
    total = 0j
    for el in form.elements():
        total += cmath.exp(1j * cmath.pi * float(form.q(el)))
    total /= size ** 0.5
    ang = cmath.phase(total) / (cmath.pi / 4)
    t = round(ang) % 8
    assert abs(total - cmath.exp(1j * cmath.pi * t / 4)) < 1e-6
    return t


# ---------------------------------------------------------------------------
# block decomposition


def block_decompose(form):
    """Orthogonal block decomposition into <m/n>, U_n, V_n.

    Not a claimed normal form, but deterministic, and canonical enough
    for the serializations used in reports: cyclic reps are minimized
    over unit squares, and V_2 pairs are rewritten as U_2 pairs.
    """
    blocks = []
    primes = set()
    for d in form.orders:
        dd = d
        for p in (2, 3, 5, 7, 11, 13):
            while dd % p == 0:
                primes.add(p)
                dd //= p
        if dd > 1:
            primes.add(_smallest_factor(dd))
    for p in sorted(primes):
        part = p_part(form, p)
        blocks.extend(_decompose_p(part, p))
    return _normalize_blocks(blocks)


def _smallest_factor(n):
    f = 2
    while f * f <= n:
        if n % f == 0:
            return f
        f += 1
    return n


def _decompose_p(part, p):
    """Greedy split of a p-part into standard blocks."""
    gens = []
    for i in range(part.ngens):
        e = [0] * part.ngens
        e[i] = 1
        gens.append(tuple(e))
    blocks = []
    while gens:
        orders = [part.order_of(g) for g in gens]
        K = max(orders)
        # try to find a diagonal unit at scale K
        pivot = None
        cands = [g for g, o in zip(gens, orders) if o == K]
        pool = list(cands)
        for a, bv in itertools.combinations(cands, 2):
            pool.append(part.add(a, bv))
        for x in pool:
            if part.order_of(x) != K:
                continue
            bxx = part.b(x, x)
            if bxx.denominator == K:
                pivot = x
                break
        if pivot is not None:
            x = pivot
            u = int(part.b(x, x) * K) % K  # unit mod K
            uinv = pow(u, -1, K)
            new_gens = []
            for g in gens:
                v = part.b(x, g)
                c = (int(v * K) * uinv) % K
                g2 = part.add(g, part.smul(-c, x))
                if part.order_of(g2) > 1:
                    new_gens.append(g2)
            qx = part.q(x)
            m = int(qx * K)
            blocks.append(("cyc", m, K))
            gens = _independent_subset(part, new_gens, K)
            continue
        # even 2-adic type: split a plane
        assert p == 2, "odd p-part must always have a diagonal unit"
        pair = None
        for a, bv in itertools.combinations(cands, 2):
            v = part.b(a, bv)
            if v.denominator == K:
                pair = (a, bv)
                break
        if pair is None:
            raise FqfError("degenerate block structure")
        x, y = pair
        axx = int(part.b(x, x) * K) % K
        ayy = int(part.b(y, y) * K) % K
        v = int(part.b(x, y) * K) % K
        det = (axx * ayy - v * v) % K
        detinv = pow(det, -1, K)
        new_gens = []
        for g in gens:
            if g == x or g == y:
                continue
            bx = int(part.b(x, g) * K) % K
            by = int(part.b(y, g) * K) % K
            alpha = (detinv * (ayy * bx - v * by)) % K
            beta = (detinv * (axx * by - v * bx)) % K
            g2 = part.add(g, part.add(part.smul(-alpha, x), part.smul(-beta, y)))
            if part.order_of(g2) > 1:
                new_gens.append(g2)
        blocks.append((_classify_even_plane(part, x, y, K), K))
        gens = _independent_subset(part, new_gens, K)
    return blocks


def _classify_even_plane(part, x, y, K):
    """U_K or V_K: the q-value multiset over the span is a complete invariant."""
    vals = sorted(
        part.q(part.add(part.smul(a, x), part.smul(b, y)))
        for a in range(K)
        for b in range(K)
    )
    for name, ref in (("U", u_block(K)), ("V", v_block(K))):
        ref_vals = sorted(ref.q((a, b)) for a in range(K) for b in range(K))
        if vals == ref_vals:
            return name
    raise FqfError("even plane matches neither U nor V")


def _independent_subset(part, vecs, K):
    """Prune a spanning set of the orthogonal rest to an independent one."""
    seen = {part.zero()}
    chosen = []
    for g in sorted(set(vecs)):
        if g in seen:
            continue
        chosen.append(g)
        new = set()
        for s in seen:
            cur = s
            for _ in range(part.order_of(g)):
                cur = part.add(cur, g)
                new.add(cur)
        seen |= new
        if len(seen) > 65536:
            # fall back: keep everything; later steps re-reduce
            return sorted(set(vecs) - {part.zero()})
    return chosen


def _normalize_blocks(blocks):
    out = []
    for blk in blocks:
        if blk[0] == "cyc":
            _, m, n = blk
            best = None
            for c in range(1, 2 * n):
                if _gcd(c, n) != 1:
                    continue
                mm = (m * c * c) % (2 * n)
                if best is None or mm < best:
                    best = mm
            out.append(("cyc", best, n))
        else:
            out.append(blk)
    # odd p: a Jordan constituent at scale n is determined by its rank and
    # determinant class, so put all units in the last block
    by_scale = {}
    for blk in out:
        if blk[0] == "cyc" and blk[2] % 2 == 1:
            by_scale.setdefault(blk[2], []).append(blk)
    for n, blks in by_scale.items():
        if len(blks) < 2:
            continue
        p = _smallest_factor(n)
        eps = 1
        for _, m, _ in blks:
            eps *= _legendre((m // 2) % p, p)
        m_plus = _min_cyclic_rep(n, p, 1)
        m_minus = _min_cyclic_rep(n, p, -1)
        for blk in blks:
            out.remove(blk)
        out.extend([("cyc", m_plus, n)] * (len(blks) - 1))
        out.append(("cyc", m_plus if eps == 1 else m_minus, n))
    # V_2 + V_2 = U_2 + U_2
    while out.count(("V", 2)) >= 2:
        out.remove(("V", 2))
        out.remove(("V", 2))
        out.extend([("U", 2), ("U", 2)])
    def key(blk):
        if blk[0] == "cyc":
            _, m, n = blk
            return (_smallest_factor(n), n, 2, m)
        return (2, blk[1], 0 if blk[0] == "U" else 1, 0)
    out.sort(key=key)
    return out


def _min_cyclic_rep(n, p, eps):
    """Smallest even m, gcd(m,n)=1, with Legendre((m/2)|p) = eps."""
    m = 2
    while True:
        if _gcd(m, n) == 1 and _legendre((m // 2) % p, p) == eps:
            return m
        m += 2


def serialize_blocks(blocks):
    """Token string like `<4/3> + U2^2 + V2`."""
    runs = []
    for blk in blocks:
        if runs and runs[-1][0] == blk:
            runs[-1][1] += 1
        else:
            runs.append([blk, 1])
    toks = []
    for blk, cnt in runs:
        if blk[0] == "cyc":
            base = f"<{blk[1]}/{blk[2]}>"
        else:
            base = f"{blk[0]}{blk[1]}"
        toks.append(base if cnt == 1 else f"{base}^{cnt}")
    return " + ".join(toks) if toks else "0"


def parse_blocks(s):
    """Inverse of serialize_blocks, as a sorted block list."""
    s = s.strip()
    if s == "0":
        return []
    out = []
    for tok in s.split("+"):
        tok = tok.strip()
        if "^" in tok:
            base, cnt = tok.split("^")
            cnt = int(cnt)
        else:
            base, cnt = tok, 1
        if base.startswith("<"):
            m, n = base[1:-1].split("/")
            blk = ("cyc", int(m), int(n))
        else:
            blk = (base[0], int(base[1:]))
        out.extend([blk] * cnt)
    return sorted(out, key=str)


# ---------------------------------------------------------------------------
# evenness and the characteristic element


def order2_subgroup_gens(form):
    gens = []
    for i, d in enumerate(form.orders):
        if d % 2 == 0:
            e = [0] * form.ngens
            e[i] = d // 2
            gens.append(tuple(e))
    return gens


def is_even_2(form):
    """Whether the 2-part is even: q = 0 mod Z on all order-2 elements."""
    return all(_mod1(form.q(w)) == 0 for w in order2_subgroup_gens(form))


def characteristic_element(form):
    """(is_even, c): the unique c in F_2/2F_2 with x^2 = x.c on order-2 x.

    c is returned as an element of the form; c = 0 iff the 2-part is even.
    """
    gens2 = []
    for i, d in enumerate(form.orders):
        if d % 2 == 0:
            gens2.append(i)
    w = order2_subgroup_gens(form)
    if not gens2:
        return True, form.zero()
    rows = []
    rhs = []
    for wi in w:
        row = []
        for j in gens2:
            e = [0] * form.ngens
            e[j] = 1
            val = form.b(wi, tuple(e))
            # value is a multiple of 1/2 here
            v2 = _mod1(val) * 2
            assert v2.denominator == 1
            row.append(int(v2) % 2)
        rows.append(row)
        qv = _mod1(form.q(wi)) * 2
        assert qv.denominator == 1
        rhs.append(int(qv) % 2)
    aug = [r + [t] for r, t in zip(rows, rhs)]
    red, piv = xla.fp_rref(xla.mat_from_rows(aug), 2)
    ncols = len(gens2)
    sol = [0] * ncols
    for r, col in enumerate(piv):
        if col == ncols:
            raise FqfError("no characteristic element (degenerate)")
        sol[col] = int(red[r][ncols]) % 2
    c = [0] * form.ngens
    for bit, j in zip(sol, gens2):
        c[j] = bit
    c = tuple(c)
    # verify on all order-2 generators
    for wi in w:
        assert _mod1(form.q(wi) - form.b(wi, c)) == 0
    return all(x == 0 for x in c), c


# ---------------------------------------------------------------------------
# isotropic subgroups, quotients


def isotropic_vectors(form, limit=4 * 10 ** 6):
    """All x != 0 with q(x) = 0 mod 2 (brute force, budget-guarded)."""
    out = []
    for el in form.elements(limit=limit):
        if any(el) and form.q(el) == 0:
            out.append(el)
    return out


def span_elements(form, gens):
    seen = {form.zero()}
    frontier = [form.zero()]
    for g in gens:
        new = set()
        for s in list(seen):
            cur = s
            while True:
                cur = form.add(cur, g)
                if cur in seen or cur in new:
                    break
                new.add(cur)
        seen |= new
    return seen


def is_isotropic_subgroup(form, gens):
    els = span_elements(form, gens)
    return all(form.q(e) == 0 for e in els)


def isotropic_subgroups(form, max_order=None, avoid=None, limit=4 * 10 ** 6,
                        budget=None):
    """All isotropic subgroups (as frozensets of elements), deterministic.

    avoid: optional predicate on elements; subgroups containing a hit are
    dropped.  Enumerated by BFS on generator extension with dedup.
    """
    iso = [v for v in isotropic_vectors(form, limit=limit)]
    if avoid is not None:
        iso = [v for v in iso if not avoid(v)]
    iso_set = set(iso)
    trivial = frozenset({form.zero()})
    seen = {trivial}
    frontier = [trivial]
    out = [trivial]
    while frontier:
        new_frontier = []
        for grp in frontier:
            if budget is not None:
                budget.charge()
            for v in iso:
                if v in grp:
                    continue
                # all b-pairings with the group must vanish for isotropy
                ok = all(form.b(v, g) == 0 for g in grp)
                if not ok:
                    continue
                els = set(grp)
                cur_new = set()
                for s in grp:
                    cur = s
                    while True:
                        cur = form.add(cur, v)
                        if cur in els or cur in cur_new:
                            break
                        cur_new.add(cur)
                els |= cur_new
                if not all(e in iso_set or e == form.zero() for e in els):
                    continue
                if max_order is not None and len(els) > max_order:
                    continue
                fz = frozenset(els)
                if fz not in seen:
                    seen.add(fz)
                    new_frontier.append(fz)
                    out.append(fz)
        frontier = new_frontier
    out.sort(key=lambda g: (len(g), sorted(g)))
    return out


def subgroup_basis(form, elements):
    """A generating list for a subgroup given as an element set."""
    gens = []
    seen = {form.zero()}
    for el in sorted(elements):
        if el in seen:
            continue
        gens.append(el)
        seen = span_elements(form, gens)
    return gens


# ---------------------------------------------------------------------------
# orbit labels on discr P_{p,q}


def classify_orbit(P, x):
    """Orbit label of a class in discr P_{p,q}.

    x may be a rational vector in the dual, or an element of discr(P)
    (then it must carry lifts).  Labels: ("ZERO",), ("plusL",),
    ("minusL",), ("M", k), ("O", r, s), ("N", k), ("OTHER",), following
    the lam/mu/nu/omega support taxonomy.
    """
    from . import pdisc

    w = tuple(Fraction(c) for c in x)
    order = 1
    for c in w:
        order = _lcm(order, Fraction(c).denominator)
    if order == 1:
        return ("ZERO",)
    pd = pdisc.PencilDiscr(P)
    if order == 3:
        coords = pd.coords_of_rational(w)
        if coords is None:
            return ("OTHER",)
        return pd.label3(coords)
    if order == 2:
        mask = 0
        for k in range(P.q):
            v = Fraction(xla.dot(P.gram, w, P.three_nu(k))) % 1
            if v == Fraction(1, 2):
                mask |= 1 << k
            elif v != 0:
                return ("OTHER",)
        rest = list(w)
        for k in range(P.q):
            if (mask >> k) & 1:
                rest = [a - b for a, b in zip(rest, P.three_nu(k))]
        if all(Fraction(c).denominator == 1 for c in rest):
            return pd.label2(mask)
        return ("OTHER",)
    return ("OTHER",)


def forbidden_kernel_check(P, kernel_vectors):
    """True iff every class of the subgroup spanned by the given kernel
    vectors avoids the forbidden orbits of the discriminant lemma
    (pmL, M_3, N_4; pmO_0 when p+q in {1,4,7}).

    Mixed-order classes are handled through their pure components, which
    the subgroup always contains.
    """
    from . import pdisc

    pd = pdisc.PencilDiscr(P)
    coords3 = []
    masks2 = []
    for w in kernel_vectors:
        w = tuple(Fraction(c) for c in w)
        order = 1
        for c in w:
            order = _lcm(order, c.denominator)
        if order == 1:
            continue
        if order not in (2, 3, 6):
            return False  # no isotropic classes of order 9 exist here
        if order % 3 == 0:
            mult = 4 if order == 6 else 1
            part3 = tuple(mult * c for c in w)
            coords = pd.coords_of_rational(part3)
            if coords is None:
                return False
            coords3.append(coords)
        if order % 2 == 0:
            mult = 3 if order == 6 else 1
            part2 = tuple(mult * c for c in w)
            lbl = classify_orbit(P, part2)
            if lbl[0] != "N":
                return False
            mask = 0
            for k in range(P.q):
                v = Fraction(xla.dot(P.gram, part2, P.three_nu(k))) % 1
                if v == Fraction(1, 2):
                    mask |= 1 << k
            masks2.append(mask)
    # span over F3 and F2 and check every element
    from .pdisc import _f3_span

    if coords3:
        span3 = _f3_span(set(coords3))
        for el in span3:
            if not any(el):
                continue
            if not pd.element_allowed(pd.label3(el)):
                return False
    span2 = {0}
    for m in masks2:
        span2 |= {x ^ m for x in span2}
    for m in span2:
        if m and not pd.element_allowed(pd.label2(m)):
            return False
    return True


def quotient_form(form, kernel_gens):
    """K-perp / K as a finite quadratic form (K isotropic, checked)."""
    kgens = [form.reduce(g) for g in kernel_gens]
    if not is_isotropic_subgroup(form, kgens):
        raise FqfError("not-isotropic")
    k = form.ngens
    D = 1
    for row in form.bmat:
        for x in row:
            D = _lcm(D, x.denominator)
    if not kgens:
        return form
    # K-perp: solve b(x, g) = 0 mod 1 for each kernel generator g, i.e.
    # M x = 0 mod D with M[g][i] = D * b(e_i, g); slack variables absorb D
    g_count = len(kgens)
    basis_els = [tuple(1 if i == j else 0 for j in range(k)) for i in range(k)]
    M = [
        [int(form.b(basis_els[i], g) * D) for i in range(k)]
        + [-D if j == r else 0 for j in range(g_count)]
        for r, g in enumerate(kgens)
    ]
    ns = xla.nullspace_rational(xla.mat_from_rows(M))
    perp_rows = [tuple(v[:k]) for v in ns]
    # always include the relation lattice
    perp_rows += [tuple(form.orders[i] if j == i else 0 for j in range(k))
                  for i in range(k)]
    H = xla.hnf_rows(perp_rows, k)
    # kernel subgroup lattice: spans of kernel gens + relations
    K_rows = [tuple(g) for g in kgens] + [
        tuple(form.orders[i] if j == i else 0 for j in range(k)) for i in range(k)
    ]
    Kb = xla.hnf_rows(K_rows, k)
    # write K in H-coordinates
    Hmat = xla.mat_from_rows(H)
    R = []
    for row in Kb:
        sol = xla.solve_rational(xla.mat_transpose(Hmat), row)
        assert sol is not None and all(x.denominator == 1 for x in sol)
        R.append(tuple(int(x) for x in sol))
    res = xla.snf(xla.mat_from_rows(R))
    vinv = xla.mat_inverse_fraction(res.V)
    # K = U^-1 E V^-1 H, so in the basis V^-1 H the kernel is diag(E)
    vinv_int = [[int(x) for x in row] for row in vinv]
    newb = xla.mat_mul(xla.mat_from_rows(vinv_int), Hmat)
    diag = res.diagonal()
    gens_new = []
    orders_new = []
    for i, e in enumerate(diag):
        if e > 1:
            row = tuple(int(x) for x in newb[i])
            gens_new.append(form.reduce(row))
            orders_new.append(e)
    qvals = [form.q(g) for g in gens_new]
    bmat = [[form.b(a, b) for b in gens_new] for a in gens_new]
    lifts = None
    if form.lifts is not None:
        lifts = [form.lift(g) for g in gens_new]
    return Fqf(orders_new, qvals, bmat, lifts=lifts, source_gram=form.source_gram)
