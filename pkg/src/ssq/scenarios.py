"""End-to-end reproduction pipelines and their pass/fail assertions.

Each scenario returns a ScenarioReport: a deterministic payload (cases,
assertion outcomes) plus non-deterministic metadata (wall time).  The
CLI maps assertion failures to exit code 2 and budget exhaustion to 3.
"""
from __future__ import annotations

import itertools
import json
import os
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import char3
from . import codes as codes_mod
from . import exactla as xla
from . import glue
from . import lineconf
from . import pdisc
from . import qform as qf
from . import shortvec
from .exactla import Budget, BudgetExceeded
from .lattice import (
    CharTwoComplementSpec,
    Lattice,
    PolarizedLattice,
    coords_in_basis,
    direct_sum,
    make_pencil_lattice,
)

DEFAULT_BUDGET = 10 ** 8

CHAR3_COUNT_LIST = set(range(11, 35)) | {36, 37, 40, 43, 46, 49, 52, 31, 58, 112}
CHAR2_COUNT_LIST = set(range(5, 19)) | {20, 22, 24, 28, 32, 40}


@dataclass
class ScenarioReport:
    scenario: str
    cases: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    wall_time: float = 0.0
    budget_used: int = 0
    budget_exceeded: bool = False

    def check(self, name, passed, details=""):
        self.assertions.append(
            {"name": name, "passed": bool(passed), "details": str(details)}
        )
        return passed

    def flag(self, name, ok, details=""):
        """Non-failing observation (conjecture-level lists)."""
        self.flags.append({"name": name, "ok": bool(ok), "details": str(details)})

    @property
    def ok(self):
        return all(a["passed"] for a in self.assertions)

    def payload(self):
        return {
            "scenario": self.scenario,
            "cases": self.cases,
            "assertions": self.assertions,
            "flags": self.flags,
            "ok": self.ok,
            "budget_exceeded": self.budget_exceeded,
        }

    def to_json(self, full=False):
        data = self.payload()
        if full:
            data = dict(data)
            data["meta"] = {
                "wall_time_s": round(self.wall_time, 3),
                "budget_used": self.budget_used,
            }
        return json.dumps(data, sort_keys=True, indent=2, default=str)

    def summary(self):
        lines = [f"scenario {self.scenario}:"]
        for a in self.assertions:
            mark = "PASS" if a["passed"] else "FAIL"
            det = f"  [{a['details']}]" if a["details"] and not a["passed"] else ""
            lines.append(f"  [{mark}] {a['name']}{det}")
        for f in self.flags:
            mark = "ok" if f["ok"] else "FLAG"
            lines.append(f"  ({mark}) {f['name']} {f['details']}")
        return "\n".join(lines)


def _timed(fn):
    def wrapper(budget_limit=None, deep=False, threads=1):
        t0 = time.time()
        limit = budget_limit
        if limit is None:
            limit = int(os.environ.get("SSQ_BUDGET", DEFAULT_BUDGET))
        budget = Budget(limit)
        rep = None
        try:
            rep = fn(budget=budget, deep=deep)
        except BudgetExceeded:
            rep = ScenarioReport(scenario=fn.__name__)
            rep.budget_exceeded = True
        rep.wall_time = time.time() - t0
        rep.budget_used = budget.used
        return rep

    wrapper.__name__ = fn.__name__
    return wrapper


# ---------------------------------------------------------------------------
# GQ scenario


@_timed
def scenario_gq(budget=None, deep=False):
    rep = ScenarioReport(scenario="gq")
    expected = {
        "W3": dict(rank=16, discr="<4/3> + U2^2 + V2", lines=40),
        "T2star": dict(rank=19, discr="U2^2 + <7/4>", lines=64),
        "Qminus53": dict(rank=22, discr="<2/3>^2", lines=112),
    }
    pols = {}
    for kind, want in expected.items():
        gq = lineconf.build_gq(kind)
        pol, basis = lineconf.gq_lattice(gq)
        pols[kind] = pol
        form = qf.discr(pol.lattice)
        blocks = qf.block_decompose(form)
        cfg = lineconf.build_config(pol, budget=budget, check_admissible=False)
        case = {
            "gq": kind,
            "points": len(gq.points),
            "blocks": len(gq.blocks),
            "rank": pol.rank,
            "discr": qf.serialize_blocks(blocks),
            "lines": cfg.count,
        }
        rep.check(f"{kind}: rank {want['rank']}", pol.rank == want["rank"],
                  case["rank"])
        rep.check(
            f"{kind}: discr {want['discr']}",
            qf.parse_blocks(case["discr"]) == qf.parse_blocks(want["discr"]),
            case["discr"],
        )
        rep.check(f"{kind}: {want['lines']} lines", cfg.count == want["lines"],
                  cfg.count)
        if kind == "Qminus53":
            ps = lineconf.pencil_structure(cfg)
            case["pencil_structure"] = ps
            rep.check("Q112 pencil structure [[10,0],112]",
                      ps == "[[10,0],112]", ps)
        rep.cases.append(case)

    # Q64: every finite-index extension is inadmissible
    pol64 = pols["T2star"]
    f64 = qf.discr(pol64.lattice)
    subs = qf.isotropic_subgroups(f64)
    nontrivial = [s for s in subs if len(s) > 1]
    all_bad = True
    for sub in nontrivial:
        gens = qf.subgroup_basis(f64, sub)
        vecs = [f64.lift(g) for g in gens]
        try:
            ov = glue.overlattice(pol64.lattice, glue.GluingKernel.from_vectors(vecs))
        except glue.GlueError:
            continue
        h_new = ov.to_new(pol64.h)
        ok, wit = shortvec.is_admissible(
            PolarizedLattice(ov.lattice, h_new), budget=budget)
        if ok:
            all_bad = False
            break
    rep.check("Q64: no admissible finite-index extension",
              all_bad, f"{len(nontrivial)} kernels tested")

    # Q112: no nontrivial isotropic classes at all
    f112 = qf.discr(pols["Qminus53"].lattice)
    iso = qf.isotropic_vectors(f112)
    rep.check("Q112: discr has no isotropic elements", not iso, len(iso))

    # Q40: realizability at p=0 and roots in T' = A2(2) + A1^4
    rep.check("Q40: realizable_primitive at p=0",
              glue.realizable_primitive(pols["W3"].lattice, 0))
    from .lattice import make_A, rescale as resc
    tprime = direct_sum(resc(make_A(2), 2), make_A(1), make_A(1), make_A(1),
                        make_A(1))
    roots = shortvec.enum_norm(tprime, -2, budget=budget)
    rep.check("Q40 complement T' has (-2)-vectors", bool(roots), len(roots))
    return rep


# ---------------------------------------------------------------------------
# char 3: quasi-elliptic census


@_timed
def scenario_char3_quasielliptic(budget=None, deep=False):
    rep = ScenarioReport(scenario="char3-quasielliptic")
    counts, cases = char3.quasielliptic_cases(budget=budget)
    rep.check("code census counts (2,3,2,1)", counts == (2, 3, 2, 1), counts)

    by_dim = {}
    for c in cases:
        case = {
            "case": c["case"],
            "code_dim": c["code_dim"],
            "lines": c["lines"],
            "pencil_structure": c["pencil_structure"],
            "artin": c["artin"],
            "rank_fano": c["rank_fano"],
        }
        rep.cases.append(case)
        by_dim.setdefault(c["code_dim"], []).append(c)

    allowed_counts = {31, 34, 40, 58, 112}
    rep.check(
        "|Fn| in {31, 34, 40, 58, 112}",
        all(c["lines"] in allowed_counts for c in cases),
        sorted({c["lines"] for c in cases}),
    )
    ok_sigma = all(
        c["artin"] == 5 - c["code_dim"] for c in cases if c["code_dim"]
    )
    rep.check("Artin invariant = 5 - r on the census", ok_sigma)
    ok_count = all(
        c["lines"] == 31 + 3 ** c["code_dim"] for c in cases if c["code_dim"]
    )
    rep.check("|Fn| = 31 + 3^r on the census", ok_count)
    rep.check("trivial extension has 31 lines",
              by_dim[None][0]["lines"] == 31)

    fermat = by_dim.get(4, [])
    rep.check(
        "dim 4: Fermat structure [[10,0],112], artin 1",
        len(fermat) == 1
        and fermat[0]["pencil_structure"] == "[[10,0],112]"
        and fermat[0]["artin"] == 1
        and fermat[0]["rank_fano"] == 22,
        [c["pencil_structure"] for c in fermat],
    )
    want58 = {
        "[[10,0],2],[[1,9],54],[[1,0],2]",
        "[[10,0],1],[[4,6],27],[[4,0],12],[[1,9],18]",
    }
    got58 = {c["pencil_structure"] for c in by_dim.get(3, [])}
    rep.check("dim 3: the two 58-line structures", got58 == want58, got58)
    rep.check("dim 3: artin 2 on both",
              all(c["artin"] == 2 for c in by_dim.get(3, [])))
    for c in cases:
        rep.flag(f"count {c['lines']} in conjecture list",
                 c["lines"] in CHAR3_COUNT_LIST,
                 "=1 mod 3" if c["lines"] % 3 == 1 or c["lines"] < 40 else "off")
    return rep


# ---------------------------------------------------------------------------
# type tables (characteristic 0)


TAB_EULER_QMAX = {6: 2, 5: 3, 4: 6, 3: 7, 2: 9, 1: 10, 0: 12}


@_timed
def scenario_type_tables(budget=None, deep=False):
    rep = ScenarioReport(scenario="type-tables")
    grid = [(p, q) for p in range(0, 9) for q in range(0, 13)
            if 3 * p + 2 * q <= 24 and p + q >= 1]
    grid.append((10, 0))
    eliminated = set()
    for (p, q) in grid:
        if glue.eliminate_type(p, q, 0, budget=budget):
            eliminated.add((p, q))
        rep.cases.append({"type": [p, q], "eliminated": (p, q) in eliminated})
    expect_elim = {(7, 0), (7, 1), (8, 0), (6, 3), (5, 4), (10, 0)}
    rep.check("eliminated cells match the characteristic-0 table",
              eliminated == expect_elim,
              f"got {sorted(eliminated)}")
    admitted = {c for c in grid if c not in eliminated}
    table_cells = {(p, q) for p, qm in TAB_EULER_QMAX.items()
                   for q in range(qm + 1) if 3 * p + 2 * q <= 24 and p + q >= 1}
    rep.check("all table cells admitted", table_cells <= admitted,
              sorted(table_cells - admitted))

    # imprimitivity: p = 6, q > 0 and (4,6) admit no primitive realization
    for (p, q) in [(6, 1), (6, 2), (4, 6)]:
        P = make_pencil_lattice(p, q)
        prim_ok = glue.realizable_primitive(P.lattice, 0)
        rep.check(f"({p},{q}) primitive extension fails", not prim_ok)
        exts = glue.enumerate_admitted_extensions(P, 0, budget=budget)
        rep.check(f"({p},{q}) admits an imprimitive extension",
                  any(g3 or g2 for (g3, g2), _ in exts), len(exts))
    # (4,6): surviving kernels are generated by omega
    P46 = make_pencil_lattice(4, 6)
    pd46 = pdisc.PencilDiscr(P46)
    exts46 = glue.enumerate_admitted_extensions(P46, 0, budget=budget)
    omega_like = True
    for (g3, g2), _ in exts46:
        if not g3 and not g2:
            continue
        if g2:
            omega_like = False
        labels = {pd46.label3(el) for el in g3}
        if not labels <= {("O", 1, 0), ("O", -1, 0)}:
            omega_like = False
    rep.check("(4,6) kernels generated by omega-classes", omega_like)

    # p + q >= 11 kernels (prop types 2)
    for (p, q) in [(0, 11), (1, 10)]:
        P = make_pencil_lattice(p, q)
        exts = glue.enumerate_admitted_extensions(P, 0, budget=budget)
        kernels = [g2 for (g3, g2), _ in exts]
        ok = bool(exts) and all(
            sorted(int(m).bit_count() for m in g2) == [8] and not g3
            for (g3, g2), _ in exts
        )
        rep.check(f"({p},{q}): kernels are single weight-8 classes", ok,
                  f"{len(exts)} extensions")
    P012 = make_pencil_lattice(0, 12)
    exts12 = glue.enumerate_admitted_extensions(P012, 0, budget=budget)
    ok12 = bool(exts12)
    for (g3, g2), _ in exts12:
        wts = sorted(int(m).bit_count() for m in g2)
        if wts != [8, 8, 8] or g3:
            ok12 = False
        else:
            masks = sorted(g2)
            inter = min((a & b).bit_count() for a, b in
                        [(masks[0], masks[1]), (masks[0], masks[2]),
                         (masks[1], masks[2])])
            if inter != 4:
                ok12 = False
    rep.check("(0,12): kernel = <3(nu1..8), 3(nu5..12)> shape", ok12,
              f"{len(exts12)} extensions")

    # cor.types.2 witnesses
    rep.check("(0,11) witness e: e^2 = 0, e.h = 2",
              _cor_types2_witness(11), "")
    rep.check("(0,11) witness e - n7 - n8: square -2, e.h = 0",
              _cor_types2_witness(11, variant=True), "")
    return rep


def _cor_types2_witness(q_fibers, variant=False):
    """Witness arithmetic in S = <h, l, n_1..n_q, s>.

    Default: s meets n_1..n_8 and e = -h + l + (n_1+...+n_8)/2 + s has
    e^2 = 0, e.h = 2.  Variant: s meets n_1..n_6, n_9, n_10 and
    e - n_7 - n_8 is an exceptional divisor.
    """
    n = 2 + q_fibers + 1
    g = [[0] * n for _ in range(n)]
    g[0][0] = 4
    for i in range(1, n):
        g[i][i] = -2
        g[0][i] = g[i][0] = 1
    for k in range(q_fibers):
        g[1][2 + k] = g[2 + k][1] = 1  # l meets fibers
    s_idx = n - 1
    meets = [0, 1, 2, 3, 4, 5, 8, 9] if variant else list(range(8))
    for k in meets:
        g[s_idx][2 + k] = g[2 + k][s_idx] = 1
    g[1][s_idx] = g[s_idx][1] = 0
    e = [Fraction(0)] * n
    e[0] = Fraction(-1)
    e[1] = Fraction(1)
    for k in range(8):
        e[2 + k] = Fraction(1, 2)
    e[s_idx] = Fraction(1)
    if variant:
        e[2 + 6] -= 1
        e[2 + 7] -= 1
    h = tuple(1 if i == 0 else 0 for i in range(n))
    sq = xla.dot(g, e, e)
    eh = xla.dot(g, e, h)
    if variant:
        return sq == -2 and eh == 0
    return sq == 0 and eh == 2


# ---------------------------------------------------------------------------
# char 3: (7,0) pencils


@_timed
def scenario_char3_70(budget=None, deep=False):
    rep = ScenarioReport(scenario="char3-70")
    ex = char3.Exotic70()
    reps7 = codes_mod.classify_codes(7, {3, 4, 5, 6, 7}, 4)
    reps7[0] = [np.zeros((0, 7), dtype=np.int8)]

    pows7 = 3 ** np.arange(6, -1, -1, dtype=np.int64)
    all7 = np.array(list(itertools.product(range(3), repeat=7)), dtype=np.int64)
    sect_small = Counter()
    dim5 = []
    for dimc in range(0, 5):
        for gen in reps7[dimc]:
            span7 = codes_mod.span_matrix(gen).astype(np.int64)
            # coset representatives of F_3^7 / C: minimal encoded shift
            seen = set()
            dreps = []
            for vec in all7:
                key = min(int(((vec + row) % 3).dot(pows7)) for row in span7)
                if key in seen:
                    continue
                seen.add(key)
                dreps.append(tuple(int(x) for x in vec))
            for d in dreps:
                for s in range(3):
                    rows = ex.domain_span(gen, d, s)
                    els = ex.span_elements(rows)
                    if not ex.domain_ok(els):
                        continue
                    sect = ex.sect_of(els)
                    dim = dimc + 1
                    if dim <= 4:
                        sect_small[sect] += 1
                    else:
                        dim5.append((gen, d, s, rows, els, sect))
            if budget is not None:
                budget.charge(len(dreps))

    rep.check("dim <= 4 domains: sect <= 27",
              all(s <= 27 for s in sect_small), sorted(sect_small))
    allvals = set(sect_small)

    # dim-5 domains: validity needs an actual anti-isometry
    winners = []
    valid5 = Counter()
    for gen, d, s, rows, els, sect in dim5:
        if budget is not None:
            budget.charge()
        if sect == 36:
            psis = ex.psi_images(rows, els)
            if psis:
                winners.append((rows, els, psis))
                valid5[sect] += 1
        else:
            if ex.psi_images(rows, els, limit=1):
                valid5[sect] += 1
    allvals |= set(valid5)
    rep.cases.append({"sect_values_small": sorted(sect_small.items())})
    rep.cases.append({"sect_values_dim5": sorted(valid5.items())})
    rep.check("sect values in {0..5} or 3Z",
              all(v <= 5 or v % 3 == 0 for v in allvals), sorted(allvals))
    rep.check("dim-5 outputs: sect = 36 or <= 27",
              all(v == 36 or v <= 27 for v in valid5), sorted(valid5))
    rep.check("an exceptional sect-36 domain exists", bool(winners),
              len(winners))

    # build the 58-line quartics, one per psi fingerprint
    triples = {}
    measured = []
    for rows, els, psis in winners:
        base = np.array(rows, dtype=np.int64)
        fps = {}
        for psi in psis:
            fp = _psi_fingerprint(ex, rows, psi)
            fps.setdefault(fp, psi)
        for fp, psi in sorted(fps.items()):
            kern_lbl = _psi_kernel_labels(ex, rows, psi)
            rep.check("kernel of psi is an M_6 class",
                      kern_lbl == {("M", 6)}, kern_lbl)
            meas = _build_70_ns(ex, rows, psi, budget)
            measured.append(meas)
            key = (meas["lines"], meas["pencil_structure"], meas["artin"],
                   meas["rank_fano"])
            triples[key] = triples.get(key, 0) + 1
    rep.cases.append({
        "configs": sorted(
            {k: v for k, v in triples.items()}.keys()
        )
    })
    want = (58, "[[7,0],2],[[4,6],18],[[3,6],36],[[1,9],2]", 2, 21)
    rep.check("unique 58-line configuration", len(triples) == 1,
              sorted(triples))
    rep.check("58-line triple matches", set(triples) == {want},
              sorted(triples))
    return rep


def _psi_fingerprint(ex, rows, psi):
    k = len(rows)
    base = np.array(rows, dtype=np.int64)
    img = np.array(psi, dtype=np.int64)
    items = []
    for coeffs in itertools.product(range(3), repeat=k):
        if not any(coeffs):
            continue
        el = tuple(int(x) % 3 for x in np.array(coeffs).dot(base))
        w = np.array(coeffs).dot(img) % 3
        sval = int(w.dot(ex.ST).dot(w)) % 3
        items.append((ex.pd.label3(el), sval, int((w != 0).any())))
    return tuple(sorted(items))


def _psi_kernel_labels(ex, rows, psi):
    k = len(rows)
    base = np.array(rows, dtype=np.int64)
    img = np.array(psi, dtype=np.int64)
    labels = set()
    for coeffs in itertools.product(range(3), repeat=k):
        if not any(coeffs):
            continue
        w = np.array(coeffs).dot(img) % 3
        if not w.any():
            el = tuple(int(x) % 3 for x in np.array(coeffs).dot(base))
            labels.add(ex.pd.label3(el))
    return labels


def _build_70_ns(ex, rows, psi, budget):
    amb = direct_sum(ex.P.lattice, ex.T)
    nP = ex.P.rank
    vecs = []
    for row, w in zip(rows, psi):
        vp = ex.pd.rational_vector(row)
        vt = ex.formT.lift(w)
        vecs.append(tuple(list(vp) + list(vt)))
    ov = glue.overlattice(amb, glue.GluingKernel.from_vectors(vecs))
    h_new = ov.to_new(tuple(list(ex.P.h) + [0] * ex.T.rank))
    pol = PolarizedLattice(ov.lattice, h_new)
    char3.validate_ns(pol, 3, budget=budget)
    return char3.measure_config(pol, 3, budget=budget)


def run_scenario(name, budget_limit=None, deep=False, threads=1):
    fn = SCENARIOS[name]
    return fn(budget_limit=budget_limit, deep=deep, threads=threads)


SCENARIOS = {
    "gq": scenario_gq,
    "char3-quasielliptic": scenario_char3_quasielliptic,
    "char3-70": scenario_char3_70,
    "type-tables": scenario_type_tables,
}
