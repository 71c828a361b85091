"""Characteristic-3 reproduction pipelines: quasi-elliptic (10,0) census,
(7,0) and (4,6) exotic pencil searches.

All searches happen on the 3-elementary discriminant coordinates of
P_{p,q} (pdisc) and small F_3 spaces on the complement side; Neron-Severi
candidates are then rebuilt as honest overlattices and measured by exact
line enumeration.
"""
from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

import numpy as np

from . import codes as codes_mod
from . import exactla as xla
from . import glue
from . import lineconf
from . import pdisc
from . import qform as qf
from . import shortvec
from .exactla import Budget
from .lattice import (
    Lattice,
    PolarizedLattice,
    direct_sum,
    dual_rescaled,
    make_E,
    make_pencil_lattice,
    rescale,
)


def s_matrix_of_3elementary(form):
    """Integer matrix S mod 3 with q = (2/3) s mod 2 on a 3-elementary form."""
    k = form.ngens
    assert all(d == 3 for d in form.orders)
    S = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        q = form.qvals[i] / Fraction(2, 3)
        assert q.denominator == 1
        S[i, i] = int(q) % 3
        for j in range(k):
            if i == j:
                continue
            m = (form.bmat[i][j] % 1) * 3
            assert m.denominator == 1
            S[i, j] = (2 * int(m)) % 3
    return S


def artin_invariant(lat, p):
    """Artin invariant of a supersingular NS candidate: l_p(discr)/2."""
    form = qf.discr(lat)
    lp = qf.length_p(form, p)
    assert lp % 2 == 0, "discriminant length must be even"
    return lp // 2


def rank_fano(pol, lines):
    rows = [tuple(pol.h)] + [tuple(a) for a in lines]
    return xla.mat_rank(xla.mat_from_rows(rows))


def validate_ns(pol, p, budget=None):
    """NS sanity: even, signature (1,21), p-elementary discr, admissible."""
    L = pol.lattice
    assert L.is_even()
    assert L.signature() == (1, 21, 0)
    form = qf.discr(L)
    part = qf.p_part(form, p)
    assert part.order() == form.order(), "discr must be p-elementary-primary"
    assert all(d == p for d in part.orders), "discr must be p-elementary"
    ok, wit = shortvec.is_admissible(pol, budget=budget)
    assert ok, f"inadmissible NS: {wit}"
    sigma = artin_invariant(L, p)
    assert 1 <= sigma <= 10
    return sigma


def measure_config(pol, p, budget=None):
    """(count, pencil structure string, sigma, rank_fano) for an NS."""
    cfg = lineconf.build_config(pol, budget=budget)
    ps = lineconf.pencil_structure(cfg)
    sigma = artin_invariant(pol.lattice, p)
    rf = rank_fano(pol, cfg.lines)
    return {
        "lines": cfg.count,
        "pencil_structure": ps,
        "artin": sigma,
        "rank_fano": rf,
        "config": cfg,
    }


# ---------------------------------------------------------------------------
# (10,0): quasi-elliptic census


def quasielliptic_cases(budget=None):
    """The code census and the NS built from each code.

    Returns (counts, cases): counts = census counts for dims 1..4; cases
    include the trivial extension (no sections).
    """
    reps = codes_mod.classify_codes(10, {6, 9}, 4)
    counts = tuple(len(reps[d]) for d in (1, 2, 3, 4))
    P = make_pencil_lattice(10, 0)
    om = P.omega()
    cases = []

    def build(kernel_vectors, name, r):
        ov = glue.overlattice(P.lattice, glue.GluingKernel.from_vectors(
            kernel_vectors))
        h = ov.to_new(P.h)
        pol = PolarizedLattice(ov.lattice, h)
        sigma = validate_ns(pol, 3, budget=budget)
        meas = measure_config(pol, 3, budget=budget)
        meas.update({"case": name, "code_dim": r, "pol": pol})
        return meas

    cases.append(build([], "trivial", None))
    for dim in (1, 2, 3, 4):
        for i, gen in enumerate(reps[dim]):
            vecs = [om]
            for row in gen:
                v = [Fraction(0)] * P.rank
                for j, c in enumerate(row):
                    if c:
                        mu = P.mu(j)
                        for t in range(P.rank):
                            v[t] += int(c) * mu[t]
                vecs.append(tuple(v))
            cases.append(build(vecs, f"dim{dim}#{i}", dim))
    return counts, cases


# ---------------------------------------------------------------------------
# (7,0)


class Exotic70:
    """Search space for type-(7,0) exotic pencils.

    Domains D live in discr_3 P_{7,0} = F_3^9 with coordinates
    (mu_1..mu_7, lam, omega); the complement is bbE_6 = E_6*(3) with
    discr = F_3^5.  sec[tions] correspond to elements of D with
    lam-pairing 1 and square 2/3, independently of the anti-isometry.
    """

    def __init__(self):
        self.P = make_pencil_lattice(7, 0)
        self.pd = pdisc.PencilDiscr(self.P)
        self.T = dual_rescaled(make_E(6), 3)
        self.formT = qf.discr(self.T)
        assert all(d == 3 for d in self.formT.orders)
        self.dimT = self.formT.ngens
        self.ST = s_matrix_of_3elementary(self.formT)
        self.t_elements = np.array(
            list(itertools.product(range(3), repeat=self.dimT)), dtype=np.int8
        )
        self.t_svals = (
            np.einsum("ij,jk,ik->i", self.t_elements.astype(np.int64), self.ST,
                      self.t_elements.astype(np.int64)) % 3
        )

    def domain_span(self, code_gen, dvec, s):
        """Basis of D in pd coordinates: code rows + (d, s, 1) generator.

        code_gen: k x 7 array; dvec: length-7 mu-part of the omega
        generator or None for no omega part.
        """
        rows = []
        for row in code_gen:
            rows.append(tuple(int(c) % 3 for c in row) + (0, 0))
        if dvec is not None:
            rows.append(tuple(int(c) % 3 for c in dvec) + (int(s) % 3, 1))
        return rows

    def span_elements(self, rows):
        if not rows:
            return [tuple([0] * self.pd.dim3)]
        arr = np.array(rows, dtype=np.int64)
        k = len(rows)
        coeffs = np.array(list(itertools.product(range(3), repeat=k)),
                          dtype=np.int64)
        return [tuple(int(x) % 3 for x in v) for v in coeffs.dot(arr) % 3]

    def stats(self, els):
        """(lam_pairings, s_values, mu_weights, lam_coeffs) as arrays."""
        E = np.asarray(els, dtype=np.int64)
        S = self.pd.S
        lam = np.zeros(self.pd.dim3, dtype=np.int64)
        lam[self.pd.lam_index] = 1
        lp = E.dot(S).dot(lam) % 3
        sv = np.einsum("ij,jk,ik->i", E, S, E) % 3
        muw = np.count_nonzero(E[:, self.pd.mu_slice] % 3, axis=1)
        lamc = E[:, self.pd.lam_index] % 3
        return lp, sv, muw, lamc

    def domain_ok(self, els):
        """D must avoid pmL, M_1, M_2."""
        lp, sv, muw, lamc = self.stats(els)
        nonzero = np.array([any(e) for e in els])
        bad_l = nonzero & (lp == 0) & (muw == 0)
        bad_m = (lp == 0) & ((muw == 1) | (muw == 2))
        return not (bad_l.any() or bad_m.any())

    def sect_of(self, els):
        lp, sv, muw, lamc = self.stats(els)
        return int(((lp == 1) & (sv == 1)).sum())

    def psi_images(self, rows, els, limit=None, kernel_rule=True):
        """All anti-isometries psi: D -> discr T, as image tuples.

        kernel_rule: kernel elements must avoid M_3 and pmO_0 (the
        forbidden E_0-pairs); psi must kill no section class.
        """
        k = len(rows)
        base = np.array(rows, dtype=np.int64)
        out = []
        coeff_list = list(itertools.product(range(3), repeat=k))

        def q_of(vec):
            return int(np.asarray(vec).dot(self.pd.S).dot(np.asarray(vec))) % 3

        svals = [q_of(r) for r in rows]
        pair = [[int(np.asarray(a).dot(self.pd.S).dot(np.asarray(b))) % 3
                 for b in rows] for a in rows]

        images = []

        def ok_kernel(imgs, depth):
            # check span elements whose image vanishes
            for coeffs in coeff_list:
                if any(c and i >= depth for i, c in enumerate(coeffs)):
                    continue
                img = np.zeros(self.dimT, dtype=np.int64)
                for c, w in zip(coeffs, imgs):
                    if c:
                        img += c * np.asarray(w)
                if (img % 3).any():
                    continue
                vec = (np.array(coeffs[:depth], dtype=np.int64)
                       .dot(base[:depth]) % 3)
                el = tuple(int(x) for x in vec)
                if not any(el):
                    continue
                lbl = self.pd.label3(el)
                if lbl == ("M", 3):
                    return False
                if lbl[0] == "O" and lbl[2] == 0:
                    return False
                if lbl[0] == "O" and lbl[2] == 1:
                    return False  # would kill a section class: q mismatch
            return True

        def rec(depth):
            if limit is not None and len(out) >= limit:
                return
            if depth == k:
                out.append(tuple(tuple(int(x) for x in w) for w in images))
                return
            want_s = (-svals[depth]) % 3
            cands = self.t_elements[self.t_svals == want_s]
            for w in cands:
                wv = w.astype(np.int64)
                good = True
                for j in range(depth):
                    need = (-pair[depth][j]) % 3
                    if int(wv.dot(self.ST).dot(np.asarray(images[j]))) % 3 != need:
                        good = False
                        break
                if not good:
                    continue
                images.append(tuple(int(x) for x in w))
                if (not kernel_rule) or ok_kernel(images, depth + 1):
                    rec(depth + 1)
                images.pop()

        rec(0)
        return out
