"""Classification of small ternary codes up to signed permutations.

Used for the weight-{6,9} length-10 census behind the quasi-elliptic
pencil count and for the minimum-distance-3 length-7 codes entering the
(7,0) analysis.  Codes are handled as generator matrices over F_3; the
equivalence group is the monomial group (coordinate permutations and
per-coordinate sign flips).  Classification is by an exact canonical
form: the lexicographically minimal row-sorted span matrix over the
group, computed by branch and bound on column assignments.
"""
from __future__ import annotations

import itertools
from collections import Counter

import numpy as np


def span_matrix(gen):
    """All 3^k codewords of the row span, as an int8 array."""
    gen = np.atleast_2d(np.asarray(gen, dtype=np.int8)) % 3
    k, n = gen.shape
    if k == 0:
        return np.zeros((1, n), dtype=np.int8)
    coeffs = np.array(list(itertools.product(range(3), repeat=k)), dtype=np.int16)
    return ((coeffs @ gen.astype(np.int16)) % 3).astype(np.int8)


def weights_of(span):
    return np.count_nonzero(span, axis=1)


def weight_enumerator(gen):
    return tuple(sorted(Counter(int(w) for w in weights_of(span_matrix(gen))).items()))


def span_set(gen):
    span = span_matrix(gen)
    n = span.shape[1]
    pows = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return frozenset(int(x) for x in span.astype(np.int64) @ pows)


def _column_profiles(span):
    wts = weights_of(span)
    out = []
    for j in range(span.shape[1]):
        nz = span[:, j] != 0
        out.append(tuple(sorted(Counter(zip(wts.tolist(), nz.tolist())).items())))
    return out


def canonical_form(gen, frontier_cap=20000):
    """Canonical bytes of the code under the monomial group.

    Greedy column-by-column minimization of the sorted row-encoding
    vector; every partial assignment attaining the per-depth minimum is
    kept, so the result is the exact minimum of the depth-sequence
    objective.  The returned final sorted encoding identifies the
    codeword set in canonical coordinates, hence the equivalence class.
    """
    span = span_matrix(gen)
    m, n = span.shape
    # all 2n signed columns, shape (2n, m)
    sc = np.vstack([span.T.astype(np.int64), (2 * span.T.astype(np.int64)) % 3])
    col_of = np.tile(np.arange(n), 2)
    used = np.zeros((1, n), dtype=bool)  # (S, n)
    enc = np.zeros((1, m), dtype=np.int64)  # (S, m)
    for _depth in range(n):
        S = enc.shape[0]
        # candidate encodings for every state x signed column: (S, 2n, m)
        cand = enc[:, None, :] * 3 + sc[None, :, :]
        valid = ~used[:, col_of]  # (S, 2n)
        keys = np.sort(cand, axis=2)
        # lexicographic minimum over all valid (state, column) pairs
        flat = keys.reshape(-1, m)
        vflat = valid.reshape(-1)
        idx = np.nonzero(vflat)[0]
        sub = flat[idx]
        order = np.lexsort(sub.T[::-1])
        best = sub[order[0]]
        hits = idx[np.all(sub == best, axis=1)]
        new_used = []
        new_enc = []
        seen = set()
        for f in hits:
            si, ci = divmod(int(f), 2 * n)
            u = used[si].copy()
            u[col_of[ci]] = True
            e = cand[si, ci]
            key = (u.tobytes(), e.tobytes())
            if key in seen:
                continue
            seen.add(key)
            new_used.append(u)
            new_enc.append(e)
            if len(new_used) > frontier_cap:
                raise RuntimeError("canonical form frontier overflow")
        used = np.array(new_used)
        enc = np.array(new_enc)
    return np.sort(enc[0]).tobytes()


def codes_equivalent(gen_a, gen_b):
    """Monomial equivalence via canonical forms (exact)."""
    sa, sb = span_matrix(gen_a), span_matrix(gen_b)
    if sa.shape != sb.shape:
        return False
    return canonical_form(gen_a) == canonical_form(gen_b)


def classify_codes(length, allowed_weights, max_dim):
    """Representatives of codes with all nonzero weights in allowed_weights.

    Returns {dim: [generator matrices]} for dims 0..max_dim, classified
    up to monomial equivalence.  Deterministic.
    """
    allowed = sorted(set(allowed_weights))
    reps = {0: [np.zeros((0, length), dtype=np.int8)]}
    all_vecs = np.array(
        list(itertools.product((0, 1, 2), repeat=length)), dtype=np.int8
    )
    vec_w = np.count_nonzero(all_vecs, axis=1)
    candidates = all_vecs[np.isin(vec_w, allowed)]
    ok_w = np.array(allowed + [0])

    for dim in range(1, max_dim + 1):
        seen_sets = set()
        canon_seen = {}
        found = []
        for base in reps[dim - 1]:
            span = span_matrix(base).astype(np.int16)
            for start in range(0, len(candidates), 512):
                chunk = candidates[start:start + 512].astype(np.int16)
                ok = np.ones(len(chunk), dtype=bool)
                for mult in (1, 2):
                    sums = (span[None, :, :] + mult * chunk[:, None, :]) % 3
                    w = np.count_nonzero(sums, axis=2)
                    ok &= np.all(np.isin(w, ok_w), axis=1)
                for idx in np.nonzero(ok)[0]:
                    v = chunk[idx].astype(np.int8)
                    gen = np.vstack([base, v[None, :]])
                    sset = span_set(gen)
                    if len(sset) != 3 ** dim:
                        continue  # v was already in the span
                    if sset in seen_sets:
                        continue
                    seen_sets.add(sset)
                    key = canonical_form(gen)
                    if key in canon_seen:
                        continue
                    canon_seen[key] = gen
                    found.append(gen)
        reps[dim] = found
    return reps
