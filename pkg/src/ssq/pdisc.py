"""Named-coordinate bookkeeping for discr P_{p,q}.

The 3-primary part of discr P_{p,q} is generated by lam = (l-h)/3 and
mu_i = (m_{i,+} - m_{i,-})/3, together with omega (order 3, when
p+q = 1 mod 3) or u9 (order 9, otherwise); the 2-primary part by the
order-2 classes 3*nu_k.  Everything here works in those coordinates:
the subgroup of elements of order dividing 3 is an F_3 quadratic space
with q = (2/3) s mod 2 for an integer form s, and the 2-part is F_2^q
with q = -wt/2 mod 2.

Orbit labels follow the observation taxonomy: pmL, M_k, pmO_s, N_k.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from . import exactla as xla
from .exactla import dot


class PencilDiscr:
    """Fast view of discr P_{p,q} in named coordinates.

    F3 coordinates: (mu_1..mu_p, lam[, omega]); the order-9 generator in
    the p+q != 1 mod 3 case only ever enters kernels via its order-3
    multiple 3*u9 = -r*lam, so kernels live in this F_3 space either way.
    F2 coordinates: bitmask over the classes 3*nu_k.
    """

    def __init__(self, P):
        self.P = P
        p, q = P.p, P.q
        self.has_omega = (p + q) % 3 == 1
        self.dim3 = p + 1 + (1 if self.has_omega else 0)
        self.mu_slice = slice(0, p)
        self.lam_index = p
        self.omega_index = p + 1 if self.has_omega else None
        vecs = [P.mu(i) for i in range(p)] + [P.lam()]
        if self.has_omega:
            vecs.append(P.omega())
        self.gen_vectors = vecs
        gram = P.gram
        # s-matrix: q(x) = (2/3) * (x^T S x mod 3) mod 2, b = (2/3) x^T S y mod 1
        S = np.zeros((self.dim3, self.dim3), dtype=np.int64)
        for i, a in enumerate(vecs):
            for j, b in enumerate(vecs):
                val = Fraction(dot(gram, a, b))
                if i == j:
                    q = val % 2  # q = (2/3) s mod 2 with s in {0,1,2}
                    s = q / Fraction(2, 3)
                    assert s.denominator == 1, "diagonal outside (2/3)Z"
                    S[i, j] = int(s) % 3
                else:
                    m = (val % 1) * 3  # b = m/3 mod 1; s solves 2s = m mod 3
                    assert m.denominator == 1, "pairing outside (1/3)Z"
                    S[i, j] = (2 * int(m)) % 3
        self.S = S
        self.kernel_mod3 = None

    # -- F3 arithmetic -------------------------------------------------------

    def s_value(self, x):
        x = np.asarray(x, dtype=np.int64) % 3
        return int(x.dot(self.S).dot(x)) % 3

    def pairing(self, x, y):
        return int(np.asarray(x, dtype=np.int64).dot(self.S).dot(
            np.asarray(y, dtype=np.int64))) % 3

    def is_isotropic(self, x):
        return self.s_value(x) == 0

    def lam_pairing(self, x):
        """s-pairing with lam: x . lam = (2/3)*value mod 1."""
        lam = np.zeros(self.dim3, dtype=np.int64)
        lam[self.lam_index] = 1
        return self.pairing(x, lam)

    def rational_vector(self, x):
        """Rational vector in P (x) Q representing the F3 coordinates."""
        n = self.P.rank
        v = [Fraction(0)] * n
        for c, g in zip(x, self.gen_vectors):
            c = int(c) % 3
            if c:
                for i in range(n):
                    v[i] += c * g[i]
        return tuple(v)

    def rational_vector_2(self, mask):
        n = self.P.rank
        v = [Fraction(0)] * n
        for k in range(self.P.q):
            if (mask >> k) & 1:
                g = self.P.three_nu(k)
                for i in range(n):
                    v[i] += g[i]
        return tuple(v)

    # -- orbit labels ---------------------------------------------------------

    def label3(self, x):
        """Orbit label of an order-(1 or 3) element in F3 coordinates."""
        x = tuple(int(c) % 3 for c in x)
        if not any(x):
            return ("ZERO",)
        lp = self.lam_pairing(x)
        if lp != 0:
            # pmO_s: alpha.lam = -(1/3) r means (2/3)*lp = -r/3 mod 1
            # lp = 1 -> pairing 2/3 = -1/3: r = +1; lp = 2 -> 1/3: r = -1
            r = 1 if lp == 1 else -1
            s = self.s_value(x)
            return ("O", r, s)
        mu = x[self.mu_slice]
        om = x[self.omega_index] if self.has_omega else 0
        if om:
            # lam-orthogonal but with omega component: only possible if
            # omega pairs trivially, cannot happen (omega.lam != 0)
            return ("OTHER",)
        k = sum(1 for c in mu if c)
        if k == 0:
            return ("plusL",) if x[self.lam_index] == 1 else ("minusL",)
        return ("M", k)

    def label2(self, mask):
        k = int(mask).bit_count()
        return ("N", k) if k else ("ZERO",)

    def coords_of_rational(self, w):
        """F3 coordinates of an order-3 class given by a rational vector,
        or None when the class is not of order dividing 3."""
        gram = self.P.gram
        w = tuple(Fraction(x) for x in w)
        coords = [0] * self.dim3
        for i in range(self.P.p):
            v = Fraction(dot(gram, w, self.P.mu(i))) % 1
            coords[i] = {Fraction(0): 0, Fraction(1, 3): 1, Fraction(2, 3): 2}.get(v)
            if coords[i] is None:
                return None
        if self.has_omega:
            v = Fraction(dot(gram, w, self.P.lam())) % 1
            s = {Fraction(0): 0, Fraction(2, 3): 1, Fraction(1, 3): 2}.get(v)
            if s is None:
                return None
            coords[self.omega_index] = s
        rest = list(w)
        for c, g in zip(coords, self.gen_vectors):
            if c:
                rest = [x - c * y for x, y in zip(rest, g)]
        lam = self.P.lam()
        for c in (0, 1, 2):
            if all((x - c * y).denominator == 1 for x, y in zip(rest, lam)):
                coords[self.lam_index] = c
                return tuple(coords)
        return None

    def element_allowed(self, label):
        """lem.discr: kernels avoid pmL, M_3, N_4, and pmO_0 when
        p+q in {1, 4, 7}."""
        if label[0] in ("plusL", "minusL"):
            return False
        if label == ("M", 3):
            return False
        if label == ("N", 4):
            return False
        if label[0] == "O" and label[2] == 0 and (self.P.p + self.P.q) in (1, 4, 7):
            return False
        if label == ("OTHER",):
            return False
        return True

    # -- isotropic elements and kernel subgroups ------------------------------

    def all_f3_elements(self):
        return np.array(
            list(itertools.product(range(3), repeat=self.dim3)), dtype=np.int8
        )

    def allowed_isotropic_3(self):
        """All allowed isotropic F3 elements (nonzero), as coordinate tuples."""
        els = self.all_f3_elements()
        S = self.S.astype(np.int64)
        vals = np.einsum("ij,jk,ik->i", els.astype(np.int64), S,
                         els.astype(np.int64)) % 3
        out = []
        for e, v in zip(els, vals):
            if v or not e.any():
                continue
            t = tuple(int(c) for c in e)
            if self.element_allowed(self.label3(t)):
                out.append(t)
        return out

    def allowed_isotropic_2(self):
        """Allowed isotropic bitmasks: weight = 0 mod 4, not N_4."""
        q = self.P.q
        out = []
        for mask in range(1, 1 << q):
            k = mask.bit_count()
            if k % 4 == 0 and k != 4:
                out.append(mask)
        return out

    def kernel_subgroups_3(self, budget=None, max_rank=None):
        """All subgroups of the allowed isotropic F3 classes (as frozensets
        of coordinate tuples, zero excluded), up to F_3-rank max_rank.

        Rank-1 and rank-2 layers are produced by vectorized closure
        tests over the allowed element list; higher layers extend by
        generator BFS.
        """
        allowed = self.allowed_isotropic_3()
        if not allowed:
            return [frozenset()]
        A = np.array(allowed, dtype=np.int64)
        nall = len(A)
        pows = 3 ** np.arange(self.dim3 - 1, -1, -1, dtype=np.int64)
        codes = A.dot(pows)
        code_index = {int(c): i for i, c in enumerate(codes)}
        sorted_codes = np.sort(codes)
        if budget is not None:
            budget.charge(max(1, nall))

        def in_allowed(arr2d):
            c = (arr2d % 3).dot(pows)
            pos = np.searchsorted(sorted_codes, c)
            pos = np.clip(pos, 0, len(sorted_codes) - 1)
            return sorted_codes[pos] == c

        out = [frozenset()]
        if max_rank is not None and max_rank <= 0:
            return out
        # rank 1: {v, 2v} with both allowed
        neg_ok = in_allowed(2 * A)
        rank1 = {}
        for v in np.nonzero(neg_ok)[0]:
            key = frozenset((int(v), code_index[int((2 * A[v] % 3).dot(pows))]))
            rank1[key] = True
        out.extend(sorted(rank1, key=sorted))
        if max_rank is not None and max_rank <= 1:
            return [frozenset(tuple(int(x) for x in A[i]) for i in g)
                    for g in out]
        # rank 2: compatible pairs with all four mixed sums allowed
        pair = ((A.dot(self.S).dot(A.T)) % 3).astype(np.int8)
        iu, ju = np.nonzero(np.triu(pair == 0, k=1))
        mask = np.ones(len(iu), dtype=bool)
        for (ci, cj) in ((1, 1), (1, 2), (2, 1), (2, 2)):
            mask &= in_allowed(ci * A[iu] + cj * A[ju])
        mask &= neg_ok[iu] & neg_ok[ju]
        rank2 = {}
        for v, w in zip(iu[mask], ju[mask]):
            els = set()
            good = True
            for ci in range(3):
                for cj in range(3):
                    if ci == 0 and cj == 0:
                        continue
                    cd = int(((ci * A[v] + cj * A[w]) % 3).dot(pows))
                    if cd not in code_index:
                        good = False
                        break
                    els.add(code_index[cd])
                if not good:
                    break
            if good:
                rank2.setdefault(frozenset(els), True)
        layer = sorted(rank2, key=sorted)
        out.extend(layer)
        rank = 2
        while layer and (max_rank is None or rank < max_rank):
            nxt = {}
            for grp in layer:
                if budget is not None:
                    budget.charge(max(1, nall // 16))
                idxs = sorted(grp)
                compat = np.all(pair[:, idxs] == 0, axis=1)
                for v in np.nonzero(compat)[0]:
                    v = int(v)
                    if v in grp:
                        continue
                    els = set(grp)
                    ok = True
                    for c in (1, 2):
                        vc = (c * A[v]) % 3
                        cd = int(vc.dot(pows))
                        if cd not in code_index:
                            ok = False
                            break
                        els.add(code_index[cd])
                        for g in idxs:
                            td = int(((A[g] + vc) % 3).dot(pows))
                            if td not in code_index:
                                ok = False
                                break
                            els.add(code_index[td])
                        if not ok:
                            break
                    if ok:
                        nxt.setdefault(frozenset(els), True)
            layer = sorted(nxt, key=sorted)
            out.extend(layer)
            rank += 1
        result = []
        for grp in out:
            result.append(frozenset(tuple(int(x) for x in A[i]) for i in grp))
        result.sort(key=lambda g: (len(g), sorted(g)))
        return result

    def kernel_subgroups_2(self, budget=None):
        """Subgroups of F_2^q whose nonzero elements all have weight in
        {8, 12, ...} (multiples of 4 other than 4) and pair evenly."""
        allowed = self.allowed_isotropic_2()
        allowed_set = set(allowed)
        out = [frozenset()]
        seen = {frozenset()}
        frontier = [frozenset()]
        while frontier:
            nxt = []
            for grp in frontier:
                if budget is not None:
                    budget.charge()
                for v in allowed:
                    if v in grp:
                        continue
                    ok = all((v & g).bit_count() % 2 == 0 for g in grp)
                    if not ok:
                        continue
                    els = set(grp) | {v} | {g ^ v for g in grp}
                    if not els <= allowed_set:
                        continue
                    fz = frozenset(els)
                    if fz not in seen:
                        seen.add(fz)
                        nxt.append(fz)
                        out.append(fz)
            frontier = nxt
        out.sort(key=lambda g: (len(g), sorted(g)))
        return out

    def kernel_vectors(self, grp3, grp2):
        """Rational kernel generators for a pair of subgroups."""
        vecs = []
        zero = tuple([0] * self.dim3)
        for g in _subgroup_basis_f3(grp3 | {zero}, self.dim3):
            vecs.append(self.rational_vector(g))
        for mask in _subgroup_basis_f2(grp2):
            vecs.append(self.rational_vector_2(mask))
        return vecs


def _f3_span(els):
    els = set(els)
    els.add(tuple([0] * len(next(iter(els)))))
    changed = True
    while changed:
        changed = False
        cur = list(els)
        for a in cur:
            for b in cur:
                t = tuple((x + y) % 3 for x, y in zip(a, b))
                if t not in els:
                    els.add(t)
                    changed = True
    return els


def _subgroup_basis_f3(els, dim):
    zero = tuple([0] * dim)
    gens = []
    seen = {zero}
    for el in sorted(els):
        if el in seen:
            continue
        gens.append(el)
        seen = _f3_span(set(seen) | {el})
    return gens


def _subgroup_basis_f2(grp):
    gens = []
    seen = {0}
    for el in sorted(grp):
        if el in seen:
            continue
        gens.append(el)
        seen |= {x ^ el for x in seen}
    return gens
