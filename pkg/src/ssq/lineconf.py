"""Line-configuration analytics and generalized-quadrangle builders.

A configuration is the graph on Fn(S) = {a : a^2 = -2, a.h = 1}; planes
are K_4 subgraphs (their four lines sum to h), pencils partition the
neighbours of an axis into 3-fibers (complete to a plane with the axis)
and 1-fibers.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exactla as xla
from . import shortvec
from .exactla import Budget
from .lattice import Lattice, LatticeError, PolarizedLattice


class ConfigError(ValueError):
    pass


@dataclass
class LineConfiguration:
    ambient: PolarizedLattice
    lines: list
    adjacency: np.ndarray

    @property
    def count(self):
        return len(self.lines)

    def valency(self, i):
        return int(self.adjacency[i].sum())


def build_config(pol, budget=None, check_admissible=True):
    """Lines and their intersection graph; ambient must be admissible."""
    if check_admissible:
        ok, witness = shortvec.is_admissible(pol, budget=budget)
        if not ok:
            raise ConfigError(f"not-admissible: witness {witness}")
    lines = shortvec.lines(pol, budget=budget)
    gram = np.array(pol.lattice.gram, dtype=np.int64)
    if lines:
        mat = np.array(lines, dtype=np.int64)
        prod = mat @ gram @ mat.T
        adj = (prod == 1).astype(np.int8)
        np.fill_diagonal(adj, 0)
        bad = set(np.unique(prod)) - {-2, 0, 1}
        if bad:
            raise ConfigError(f"line products outside {{0,1}}: {sorted(bad)}")
    else:
        adj = np.zeros((0, 0), dtype=np.int8)
    return LineConfiguration(pol, lines, adj)


def planes(config):
    """All K_4 subsets; verifies the four lines sum to h on each."""
    n = config.count
    adj = config.adjacency
    out = []
    nbrs = [set(np.nonzero(adj[i])[0]) for i in range(n)]
    for i in range(n):
        for j in sorted(nbrs[i]):
            if j <= i:
                continue
            common = sorted(nbrs[i] & nbrs[j])
            for a_idx in range(len(common)):
                k = common[a_idx]
                if k <= j:
                    continue
                for b_idx in range(a_idx + 1, len(common)):
                    l = common[b_idx]
                    if adj[k][l]:
                        quad = (i, j, k, l)
                        s = tuple(
                            sum(config.lines[t][c] for t in quad)
                            for c in range(config.ambient.rank)
                        )
                        if s != tuple(config.ambient.h):
                            raise ConfigError(
                                f"sum-violation: plane {quad} does not sum to h"
                            )
                        out.append(quad)
    return out


@dataclass
class Pencil:
    axis: int
    fibers3: list  # list of triples of line indices
    fibers1: list  # list of single line indices

    @property
    def ptype(self):
        return (len(self.fibers3), len(self.fibers1))


def pencil_of(config, axis):
    """Partition of the neighbours of `axis` into 3- and 1-fibers."""
    adj = config.adjacency
    nbrs = [j for j in range(config.count) if adj[axis][j]]
    nset = set(nbrs)
    assigned = set()
    fibers3 = []
    fibers1 = []
    for a in nbrs:
        if a in assigned:
            continue
        mates = [b for b in nbrs if b != a and adj[a][b] and b not in assigned]
        if mates:
            b = mates[0]
            third = [c for c in nbrs if c not in (a, b) and adj[a][c] and adj[b][c]
                     and c not in assigned]
            if len(third) != 1:
                raise ConfigError("pencil fiber structure broken")
            trio = tuple(sorted((a, b, third[0])))
            fibers3.append(trio)
            assigned.update(trio)
        else:
            fibers1.append(a)
            assigned.add(a)
    # verify each 3-fiber + axis sums to h
    for trio in fibers3:
        s = tuple(
            config.lines[axis][c] + sum(config.lines[t][c] for t in trio)
            for c in range(config.ambient.rank)
        )
        if s != tuple(config.ambient.h):
            raise ConfigError("3-fiber does not complete the axis to a plane")
    return Pencil(axis, fibers3, fibers1)


def pencil_structure(config):
    """Multiset of pencil types in the partition notation string."""
    counts = Counter(pencil_of(config, i).ptype for i in range(config.count))
    return format_pencil_structure(counts)


def format_pencil_structure(counts):
    items = sorted(counts.items(), key=lambda kv: (-kv[0][0], -kv[0][1]))
    return ",".join(f"[[{p},{q}],{m}]" for (p, q), m in items)


def predicates(config):
    """Graph predicates: triangle_free, quadrangle_free, locally_elliptic."""
    adj = config.adjacency
    n = config.count
    a2 = adj.astype(np.int64) @ adj.astype(np.int64)
    triangles = int(np.trace(a2 @ adj.astype(np.int64))) // 6
    triangle_free = triangles == 0
    # 4-cycles: pairs with >= 2 common neighbours
    quad = False
    for i in range(n):
        for j in range(i + 1, n):
            if a2[i][j] >= 2:
                quad = True
                break
        if quad:
            break
    vals = [config.valency(i) for i in range(n)]
    return {
        "triangle_free": triangle_free,
        "quadrangle_free": triangle_free and not quad,
        "locally_elliptic": all(v <= 3 for v in vals),
    }


def segre_count(config, plane):
    """val a1 + ... + val a4 - 8; equals |Fn| for admissible ambients."""
    return sum(config.valency(i) for i in plane) - 8


def verify_relation(config, kind, *line_indices):
    """Check the linear identity attached to a named configuration pattern."""
    L = config.ambient.lattice
    lines = [config.lines[i] for i in line_indices]
    adj = config.adjacency

    def prod(i, j):
        return int(adj[line_indices[i]][line_indices[j]])

    n = len(lines)
    rank = config.ambient.rank
    h = config.ambient.h

    def combo(coeffs, target_mult):
        s = [0] * rank
        for c, v in zip(coeffs, lines):
            for t in range(rank):
                s[t] += c * v[t]
        return tuple(s) == tuple(x * target_mult for x in h)

    if kind == "plane":
        if n != 4 or any(prod(i, j) != 1 for i in range(4) for j in range(i + 1, 4)):
            raise ConfigError("pattern-mismatch: need a K_4")
        return combo([1, 1, 1, 1], 1)
    if kind == "quadric":
        if n != 8:
            raise ConfigError("pattern-mismatch: need K_{4,4} as a1..a4,b1..b4")
        for i in range(4):
            for j in range(4):
                if prod(i, j) != (0 if i != j else 0):
                    raise ConfigError("pattern-mismatch: a-side must be disjoint")
                if prod(4 + i, 4 + j) != 0 and i != j:
                    raise ConfigError("pattern-mismatch: b-side must be disjoint")
        for i in range(4):
            for j in range(4, 8):
                if prod(i, j) != 1:
                    raise ConfigError("pattern-mismatch: a.b must be 1")
        return combo([1] * 8, 2)
    if kind == "K10_2":
        if n != 12:
            raise ConfigError("pattern-mismatch: need a1..a10,b1,b2")
        for i in range(10):
            for j in range(i + 1, 10):
                if prod(i, j):
                    raise ConfigError("pattern-mismatch: a_i disjoint")
        if prod(10, 11):
            raise ConfigError("pattern-mismatch: b_1, b_2 disjoint")
        for i in range(10):
            for j in (10, 11):
                if prod(i, j) != 1:
                    raise ConfigError("pattern-mismatch: a_i . b_j = 1")
        return combo([1] * 10 + [3, 3], 4)
    if kind == "sixfold":
        # lem 3a + a_1+..+a_6 = 3b + b_1+..+b_6 with the stated pattern
        if n != 14:
            raise ConfigError("pattern-mismatch: need a,b,a1..a6,b1..b6")
        a, b = 0, 1
        s = [0] * rank
        for t in range(rank):
            s[t] = (3 * lines[a][t] + sum(lines[2 + i][t] for i in range(6))
                    - 3 * lines[b][t] - sum(lines[8 + i][t] for i in range(6)))
        return all(x == 0 for x in s)
    if kind == "p_q_relation":
        # eq 2a + a_1+..+a_6 = 2b + b_1+..+b_6
        if n != 14:
            raise ConfigError("pattern-mismatch: need a,b,a1..a6,b1..b6")
        s = [0] * rank
        for t in range(rank):
            s[t] = (2 * lines[0][t] + sum(lines[2 + i][t] for i in range(6))
                    - 2 * lines[1][t] - sum(lines[8 + i][t] for i in range(6)))
        return all(x == 0 for x in s)
    raise ConfigError(f"unknown relation kind {kind!r}")


# ---------------------------------------------------------------------------
# generalized quadrangles


@dataclass
class GeneralizedQuadrangle:
    kind: str
    s: int
    t: int
    points: list
    blocks: list  # tuples of point indices, length s+1


def _projective_points(vectors):
    """One representative per projective class, deterministic order."""
    seen = set()
    out = []
    for v in vectors:
        if not any(v):
            continue
        key = None
        for c in (1, 2):
            w = tuple((c * x) % 3 for x in v)
            if key is None or w < key:
                key = w
        if key not in seen:
            seen.add(key)
            out.append(key)
    return sorted(out)


def build_gq(kind):
    """W3 = GQ(3,3), Qminus53 = GQ(3,9), T2star = GQ(3,5); axioms verified."""
    if kind == "W3":
        # GQ(3,3) in the polarity matching the 40-line configuration:
        # points and totally singular lines of the parabolic quadric
        # Q(4,3) (the dual of the symplectic presentation); this is the
        # variant whose lattice has determinant -192
        vecs = list(itertools.product(range(3), repeat=5))

        def quad(x):
            return (x[0] * x[0] + x[1] * x[2] + x[3] * x[4]) % 3

        def bil(x, y):
            return (quad(tuple((a + b) % 3 for a, b in zip(x, y)))
                    - quad(x) - quad(y)) % 3

        pts = [p for p in _projective_points(vecs) if quad(p) == 0]
        index = {p: i for i, p in enumerate(pts)}
        blocks = set()
        for i, p in enumerate(pts):
            for j in range(i + 1, len(pts)):
                r = pts[j]
                if bil(p, r) != 0:
                    continue
                members = _projective_points(
                    [tuple((a * p[k] + b * r[k]) % 3 for k in range(5))
                     for a in range(3) for b in range(3)]
                )
                if all(quad(m) == 0 for m in members):
                    blocks.add(tuple(sorted(index[m] for m in members)))
        gq = GeneralizedQuadrangle("W3", 3, 3, pts, sorted(blocks))
    elif kind == "Qminus53":
        vecs = list(itertools.product(range(3), repeat=6))

        def quad(x):
            return (x[0] * x[1] + x[2] * x[3] + x[4] * x[4] + x[5] * x[5]) % 3

        def bil(x, y):
            return (quad(tuple((a + b) % 3 for a, b in zip(x, y)))
                    - quad(x) - quad(y)) % 3

        pts = [p for p in _projective_points(vecs) if quad(p) == 0]
        index = {p: i for i, p in enumerate(pts)}
        blocks = set()
        for i, p in enumerate(pts):
            for j in range(i + 1, len(pts)):
                r = pts[j]
                if bil(p, r) != 0:
                    continue
                members = _projective_points(
                    [tuple((a * p[k] + b * r[k]) % 3 for k in range(6))
                     for a in range(3) for b in range(3)]
                )
                if all(quad(m) == 0 for m in members):
                    blocks.add(tuple(sorted(index[m] for m in members)))
        gq = GeneralizedQuadrangle("Qminus53", 3, 9, pts, sorted(blocks))
    elif kind == "T2star":
        # AG(3,4) with directions in a fixed hyperoval of PG(2,4):
        # conic (1, t, t^2) plus nucleus (0,1,0); F_4 coded 0,1,w,w+1
        mul = xla.f4_mul
        conic = [(1, t, mul(t, t)) for t in range(4)]
        hyperoval = conic + [(0, 0, 1), (0, 1, 0)]
        pts = list(itertools.product(range(4), repeat=3))
        index = {p: i for i, p in enumerate(pts)}
        blocks = set()
        for d in hyperoval:
            for p in pts:
                members = tuple(sorted(
                    index[tuple(p[k] ^ mul(lam, d[k]) for k in range(3))]
                    for lam in range(4)
                ))
                blocks.add(members)
        gq = GeneralizedQuadrangle("T2star", 3, 5, pts, sorted(blocks))
    else:
        raise ConfigError(f"unknown generalized quadrangle {kind!r}")
    _verify_gq(gq)
    return gq


def _verify_gq(gq):
    n = len(gq.points)
    per_point = Counter()
    for blk in gq.blocks:
        if len(blk) != gq.s + 1:
            raise ConfigError("axiom-violation: block size")
        for p in blk:
            per_point[p] += 1
    if any(per_point[p] != gq.t + 1 for p in range(n)):
        raise ConfigError("axiom-violation: point degree")
    blocks_through = [[] for _ in range(n)]
    for bi, blk in enumerate(gq.blocks):
        for p in blk:
            blocks_through[p].append(bi)
    block_sets = [set(b) for b in gq.blocks]
    # unique-flag axiom, spot-checked exhaustively (cheap at these orders)
    for p in range(n):
        on_p = set(blocks_through[p])
        for bi, blk in enumerate(gq.blocks):
            if bi in on_p:
                continue
            hits = 0
            for b2 in blocks_through[p]:
                if block_sets[b2] & block_sets[bi]:
                    hits += 1
            if hits != 1:
                raise ConfigError("axiom-violation: unique flag fails")


def gq_lattice(gq):
    """Free module on the points with -2/+1 Gram, modulo its radical.

    Returns (PolarizedLattice, quotient basis rows): h is the common
    class of the block sums (verified identical across blocks).
    """
    n = len(gq.points)
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = -2
    for blk in gq.blocks:
        for a, b in itertools.combinations(blk, 2):
            g[a][b] = 1
            g[b][a] = 1
    kernel = xla.nullspace_rational(xla.mat_from_rows(g))
    # adapted basis: rows of V^-1 from the SNF of the kernel rows; the
    # kernel of an integer matrix is saturated, so its SNF diagonal is 1
    # and the first k rows of V^-1 span it; coordinates of x are x.V
    if kernel:
        res = xla.snf(xla.mat_from_rows(kernel))
        assert all(d == 1 for d in res.diagonal()[: len(kernel)])
        vinv = xla.mat_inverse_fraction(res.V)
        basis = [tuple(int(x) for x in vinv[i]) for i in range(len(kernel), n)]
    else:
        basis = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    gram_q = [[xla.dot(g, a, b) for b in basis] for a in basis]
    lat = Lattice(gram_q)

    def project(vec):
        if not kernel:
            return tuple(vec)
        coords = xla.vec_mat(vec, res.V)
        return tuple(int(c) for c in coords[len(kernel):])

    h_classes = set()
    for blk in gq.blocks:
        vec = [0] * n
        for p in blk:
            vec[p] += 1
        h_classes.add(project(tuple(vec)))
        if len(h_classes) > 1:
            raise ConfigError("h-ill-defined: block sums disagree in quotient")
    h = next(iter(h_classes))
    return PolarizedLattice(lat, h), basis


# ---------------------------------------------------------------------------
# quasi-elliptic criterion and type tables


P_ELEMENTARY_AFFINE = {
    2: {("A", 1), ("E", 7), ("E", 8)} | {("D", 2 * k) for k in range(2, 11)},
    3: {("A", 2), ("E", 6), ("E", 8)},
}


def affine_milnor(diagram):
    kind, n = diagram
    return n


def quasi_elliptic_criterion(fiber_diagrams, p):
    """th-quasi: every fiber lattice p-elementary and total Milnor = 20."""
    if p not in (2, 3):
        return False
    allowed = P_ELEMENTARY_AFFINE[p]
    if not all(tuple(d) in allowed for d in fiber_diagrams):
        return False
    return sum(affine_milnor(d) for d in fiber_diagrams) == 20


def type_table(p_char, supersingular):
    """Admissible (p, q) bounds per characteristic, as data."""
    if p_char == 0 or not supersingular or p_char not in (2, 3):
        return {
            "source": "characteristic-zero bounds",
            "q_max": {6: 2, 5: 3, 4: 6, 3: 7, 2: 9, 1: 10, 0: 12},
            "val_max": {6: 20, 5: 18, 4: 18, 3: 16, 2: 15, 1: 13, 0: 12},
            "extra": "p = 6, q > 0 and (4,6) imprimitive",
        }
    if p_char == 3:
        return {
            "source": "exotic pencils, characteristic 3",
            "q_allowed": {10: (0,), 7: (0,), 4: (0, 3, 6), 3: tuple(range(7)),
                          2: tuple(range(9)), 1: tuple(range(10)),
                          0: tuple(range(13))},
        }
    return {
        "source": "characteristic 2",
        "q_max": {5: 1, 4: 2, 3: 5, 2: 6, 1: 7, 0: 8},
        "extra": "p + q != 7",
    }
