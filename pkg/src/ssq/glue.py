"""Finite-index overlattices, gluings along anti-isometries, and the
arithmetic realizability tests for Neron-Severi candidates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import exactla as xla
from . import qform as qf
from .exactla import Budget, BudgetExceeded
from .lattice import (
    Lattice,
    LatticeError,
    PolarizedLattice,
    direct_sum,
    lattice_from_rational_span,
)


class GlueError(ValueError):
    pass


@dataclass(frozen=True)
class GluingKernel:
    """Isotropic subgroup of discr L given by rational coset generators."""

    generators: tuple

    @staticmethod
    def from_vectors(vectors):
        return GluingKernel(tuple(tuple(Fraction(x) for x in v) for v in vectors))


def validate_kernel(lat, kernel):
    """Check generator classes are in L*, q-isotropic and b-orthogonal."""
    gram = lat.gram
    gens = [tuple(Fraction(x) for x in v) for v in kernel.generators]
    for v in gens:
        pair = [xla.dot(gram, v, e) for e in _std_basis(lat.rank)]
        if any(Fraction(x).denominator != 1 for x in pair):
            raise GlueError("kernel generator is not in the dual lattice")
        if qf._mod2(xla.dot(gram, v, v)) != 0:
            raise GlueError("not-isotropic: kernel class has q != 0")
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if qf._mod1(xla.dot(gram, gens[i], gens[j])) != 0:
                raise GlueError("not-isotropic: kernel classes do not pair to 0")
    return gens


def _std_basis(n):
    return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]


@dataclass
class Overlattice:
    """Result of an extension: the new lattice plus coordinate bookkeeping.

    basis rows express the new basis in old coordinates; old vectors map
    into the new lattice via to_new().
    """

    lattice: Lattice
    basis: tuple  # rows of Fractions, new basis in old coordinates
    old_gram: tuple
    index_sq: int = 0

    def to_new(self, old_vec):
        coords = _solve_in_basis(self.basis, old_vec)
        if coords is None or any(c.denominator != 1 for c in coords):
            raise GlueError("vector does not lie in the overlattice")
        return tuple(int(c) for c in coords)

    def to_old(self, new_vec):
        n = len(self.basis[0])
        out = [Fraction(0)] * n
        for c, row in zip(new_vec, self.basis):
            if c:
                for i in range(n):
                    out[i] += c * row[i]
        return tuple(out)


def _solve_in_basis(basis_rows, vec):
    mat = [tuple(c) for c in zip(*basis_rows)]
    return xla.solve_rational(mat, vec)


def overlattice(lat, kernel, require_even=True):
    """Even overlattice defined by an isotropic kernel; index = |K|."""
    gens = validate_kernel(lat, kernel)
    rows = [tuple(Fraction(x) for x in r) for r in _std_basis(lat.rank)]
    rows += [tuple(v) for v in gens]
    new, basis = lattice_from_rational_span(lat.gram, rows)
    if require_even and not new.is_even():
        raise GlueError("non-integral: overlattice is odd")
    result = Overlattice(new, tuple(basis), lat.gram)
    if lat.det() != 0:
        idx2 = abs(lat.det()) // abs(new.det()) if new.det() else 0
        # |K|^2 * det(new) = det(old)
        result.index_sq = idx2
    return result


@dataclass(frozen=True)
class AntiIsometry:
    """Partial anti-isometry psi: discr S -. discr T.

    domain: elements of discr S (coordinate tuples); images: elements of
    discr T.  q_T(psi x) = -q_S(x) and b-values negate; verified on the
    generators.
    """

    source: object  # Fqf of S
    target: object  # Fqf of T
    domain_gens: tuple
    image_gens: tuple

    def check(self):
        s, t = self.source, self.target
        for i, (x, y) in enumerate(zip(self.domain_gens, self.image_gens)):
            if qf._mod2(s.q(x) + t.q(y)) != 0:
                raise GlueError("psi is not an anti-isometry (q)")
            for x2, y2 in list(zip(self.domain_gens, self.image_gens))[i + 1:]:
                if qf._mod1(s.b(x, x2) + t.b(y, y2)) != 0:
                    raise GlueError("psi is not an anti-isometry (b)")
        return True


def glue(S, T, psi, extra=None, require_even=True):
    """Overlattice of S + T along the graph of psi (plus optional extras).

    extra: iterable of rational vectors in (S + T) (x) Q whose classes
    extend the kernel.  Returns an Overlattice over S + T coordinates.
    """
    psi.check()
    amb = direct_sum(S, T)
    rows = []
    for x, y in zip(psi.domain_gens, psi.image_gens):
        vx = psi.source.lift(x)
        vy = psi.target.lift(y)
        rows.append(tuple(list(vx) + list(vy)))
    if extra is not None:
        rows.extend(tuple(Fraction(c) for c in v) for v in extra)
    kern = GluingKernel.from_vectors(rows)
    return overlattice(amb, kern, require_even=require_even)


# ---------------------------------------------------------------------------
# Nikulin existence and geometric realizability


def nikulin_exists(sigma_plus, sigma_minus, form):
    """Existence of an even lattice with these inertia indices and discr."""
    r = sigma_plus + sigma_minus
    total_length = 0
    primes = _form_primes(form)
    for p in primes:
        total_length = max(total_length, qf.length_p(form, p))
    if total_length > r:
        return False
    if qf.brown(form) != (sigma_plus - sigma_minus) % 8:
        return False
    size = form.order()
    for p in primes:
        lp, unit = qf.det_p(form, p)
        if p == 2:
            if lp == r and qf.is_even_2(form):
                # need |F| det_2 = +-1 mod squares
                cls = _mod8_class(size, unit)
                if cls not in (1, 7):
                    return False
        else:
            if lp == r:
                # |F| det_p = (-1)^{sigma_-} mod squares
                size_unit = _strip_p(size, p)
                lhs = qf._legendre(size_unit % p, p) * unit
                rhs = qf._legendre((-1) % p, p) ** (sigma_minus % 2)
                if lhs != rhs:
                    return False
    return True


def _form_primes(form):
    primes = set()
    for d in form.orders:
        dd = d
        f = 2
        while f * f <= dd:
            while dd % f == 0:
                primes.add(f)
                dd //= f
            f += 1
        if dd > 1:
            primes.add(dd)
    return sorted(primes)


def _strip_p(n, p):
    while n % p == 0:
        n //= p
    return n


def _mod8_class(size, unit):
    s = _strip_p(size, 2) % 8
    return (s * unit) % 8


def realizable_primitive(S, p):
    """Necessary conditions for a primitive embedding S -> NS(X).

    p = 0 targets characteristic zero (or a non-supersingular surface);
    a prime p targets a supersingular surface in that characteristic.
    Implements the length and determinant conditions at every prime
    q != p for delta = 22 - rank S.
    """
    if not S.is_even():
        raise GlueError("S must be even")
    sig = S.signature()
    if sig[0] != 1 or sig[2] != 0:
        raise GlueError("S must be hyperbolic")
    delta = 22 - S.rank
    form = qf.discr(S)
    size = form.order()
    for q in _form_primes(form):
        if q == p:
            continue
        lq, unit = qf.det_p(form, q)
        if lq > delta:
            return False
        if lq == delta:
            if q == 2:
                if p != 2 and qf.is_even_2(form):
                    cls = _mod8_class(size, unit)
                    if cls not in (1, 7):
                        return False
            else:
                size_unit = _strip_p(size, q)
                lhs = qf._legendre(size_unit % q, q) * unit
                if lhs != 1:
                    return False
    return True


# ---------------------------------------------------------------------------
# kernel enumeration for pencil lattices and type elimination


def max_isotropic_rank_bound(form, p):
    """Witt index of the p-part: iterated isotropic splitting.

    Upper-bounds the rank of any isotropic subgroup; each split reduces
    the length by at most 2.
    """
    cur = qf.p_part(form, p)
    m = 0
    while cur.ngens:
        iso = None
        for el in cur.elements(limit=2 * 10 ** 6):
            if any(el) and cur.q(el) == 0:
                iso = el
                break
        if iso is None:
            break
        m += 1
        kern = qf.subgroup_basis(cur, qf.span_elements(cur, [iso]))
        cur = qf.quotient_form(cur, kern)
    return m


def eliminate_type(p_fibers, q_fibers, target_char, budget=None):
    """True when no allowed finite-index extension of P_{p,q} passes the
    realizability test for the target characteristic."""
    from .lattice import make_pencil_lattice

    P = make_pencil_lattice(p_fibers, q_fibers)
    if 3 * p_fibers + 2 * q_fibers > 24 and (p_fibers, q_fibers) != (10, 0):
        raise GlueError("type outside the Euler range")
    form = qf.discr(P.lattice)
    delta = 22 - P.rank
    # cheap exact pre-check: even the best kernel cannot fix a long prime
    for q in (2, 3):
        if q == target_char:
            continue
        ell = qf.length_p(form, q)
        if ell and ell - 2 * max_isotropic_rank_bound(form, q) > delta:
            return True
    survivors = enumerate_admitted_extensions(P, target_char, budget=budget,
                                              first_only=True)
    return not survivors


def enumerate_admitted_extensions(P, target_char, budget=None, first_only=False):
    """Extensions of P_{p,q} by allowed kernels passing realizability.

    Returns a list of ((grp3, grp2), Overlattice) pairs; the kernels run
    over isotropic subgroups of the allowed classes, composed per prime.
    Kernels too small to fix the length condition at 2 or 3 are pruned
    before any lattice is built (l(K-perp/K) = l(F) - 2 rank K).
    """
    from . import pdisc
    from math import ceil

    pd = pdisc.PencilDiscr(P)
    form = qf.discr(P.lattice)
    delta = 22 - P.rank
    ell3 = qf.length_p(form, 3)
    ell2 = qf.length_p(form, 2)
    m3_min = 0 if target_char == 3 else max(0, -(-(ell3 - delta) // 2))
    m2_min = 0 if target_char == 2 else max(0, -(-(ell2 - delta) // 2))
    if pd.has_omega and (P.p + P.q) not in (1, 4, 7):
        # omega-type kernel classes allowed: exhaust the (small) space
        k3s = pd.kernel_subgroups_3(budget=budget)
    else:
        # kernels are pure M-type: up to the pencil automorphisms
        # (fiber monomials and lam-transvections) they are exactly the
        # ternary codes on the mu coordinates with allowed weights
        k3s = _m_code_kernel_reps(P, pd, budget)
    k2s = pd.kernel_subgroups_2(budget=budget)

    def rank3(g):
        n, r = len(g) + 1, 0
        while n > 1:
            n //= 3
            r += 1
        return r

    def rank2(g):
        n, r = len(g) + 1, 0
        while n > 1:
            n //= 2
            r += 1
        return r

    out = []
    for g3 in k3s:
        if rank3(g3) < m3_min:
            continue
        for g2 in k2s:
            if rank2(g2) < m2_min:
                continue
            if budget is not None:
                budget.charge()
            vecs = pd.kernel_vectors(g3, g2)
            try:
                ov = overlattice(P.lattice, GluingKernel.from_vectors(vecs))
            except GlueError:
                continue
            if realizable_primitive(ov.lattice, target_char):
                out.append(((g3, g2), ov))
                if first_only:
                    return out
    return out


def _m_code_kernel_reps(P, pd, budget=None):
    """Isotropic M-type kernel representatives as straight code embeddings.

    Allowed weights: multiples of 3 other than 3 itself, up to p.  One
    representative per monomial class suffices: the lam-components of
    any kernel are removable by the transvection lifts.
    """
    from . import codes as codes_mod

    p = P.p
    weights = {k for k in range(6, p + 1) if k % 3 == 0}
    if not weights:
        return [frozenset()]
    max_dim = max(1, p // 2)
    reps = codes_mod.classify_codes(p, weights, max_dim)
    out = [frozenset()]
    for dim in sorted(k for k in reps if k >= 1):
        for gen in reps[dim]:
            span = codes_mod.span_matrix(gen)
            els = set()
            for row in span:
                if not row.any():
                    continue
                coords = tuple(int(c) % 3 for c in row) + (0,) * (
                    pd.dim3 - P.p)
                els.add(coords)
            out.append(frozenset(els))
    return out


# ---------------------------------------------------------------------------
# characteristic-2 orbit filter


def char2_orbit_filter(spec, budget=None):
    """True when (barT, u) survives the realizability test: no vector of
    square q-7 and no characteristic vector of square q-28 represents
    u mod 3*barT."""
    from . import shortvec
    from .lattice import characteristic_class_mod2, rescale

    barT, u = spec.barT, tuple(spec.u)
    q = spec.q
    # vectors v = u + 3w of square q - 7: enumerate w in u/3 + barT with
    # (v/3)^2 = (q-7)/9
    for sign in (1, -1):
        uu = tuple(sign * x for x in u)
        if _coset_norm_nonempty(barT, uu, Fraction(q - 7, 9), budget):
            return False
    c0 = characteristic_class_mod2(barT)
    for sign in (1, -1):
        uu = tuple(sign * x for x in u)
        if _char_coset_exists(barT, uu, c0, q - 28, budget):
            return False
    return True


def _coset_norm_nonempty(barT, u, target, budget):
    from . import shortvec

    off = tuple(Fraction(x, 3) for x in u)
    res = shortvec.enum_coset(
        shortvec.CosetQuery(Lattice([[9 * x for x in row] for row in barT.gram]),
                            off, Fraction(target) * 9),
        budget=budget,
    )
    return bool(res)


def _char_coset_exists(barT, u, c0, square, budget):
    """Is there a characteristic vector of the given square = u mod 3barT?

    Characteristic vectors form c0 + 2*barT; intersect with u + 3*barT:
    CRT per coordinate-free lattice: solve c0 + 2x = u + 3y. Setting
    v = c0 + 2x: v = u mod 3 and v = c0 mod 2: v runs over w0 + 6*barT
    for any particular solution w0 (CRT: 6 = 2*3)."""
    from . import shortvec

    w0 = tuple(3 * c - 2 * uu for c, uu in zip(c0, u))  # = c0 mod 2, = u mod 3
    off = tuple(Fraction(x, 6) for x in w0)
    res = shortvec.enum_coset(
        shortvec.CosetQuery(Lattice([[36 * x for x in row] for row in barT.gram]),
                            off, Fraction(square)),
        budget=budget,
    )
    return bool(res)
