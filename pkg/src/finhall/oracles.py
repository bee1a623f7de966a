"""Brute-force oracles used to cross-check the main algorithms.

They are deliberately naive: exhaustive scans over filtrations, group
elements or extension data, with no shared code paths beyond field tables.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .catalog import Catalog, IsoClass
from .errors import ResourceGuardError
from .field import digits_index, index_digits
from .stability import StabilityModel


def hn_filtrations_exhaustive(model: StabilityModel, G: IsoClass):
    """Every strict chain 0 = G_0 < ... < G_N = G of subobjects whose successive
    quotients are semistable with strictly decreasing slopes.

    Returns a list of (dims chain, quotient ids, slopes).
    """
    cat = model.catalog
    subs = cat.subobjects(G)
    zero = next(s for s in subs if not any(s.dims))
    full = next(s for s in subs if s.dims == G.dims)
    found = []

    def extend(chain, slopes):
        last = chain[-1]
        if last.dims == full.dims:
            found.append(
                (
                    tuple(s.dims for s in chain[1:]),
                    tuple(cat.subquotient(G, a, b).id for a, b in zip(chain, chain[1:])),
                    tuple(slopes),
                )
            )
            return
        for s in subs:
            if s.dims == last.dims or not s.contains(last):
                continue
            mu = model.slope(tuple(x - y for x, y in zip(s.dims, last.dims)))
            if slopes and not mu < slopes[-1]:
                continue
            if not model.subquotient_semistable(G, last, s):
                continue
            extend(chain + [s], slopes + [mu])

    if G.is_zero:
        return [((), (), ())]
    extend([zero], [])
    return found


def _all_invertible(field, n):
    if n == 0:
        return [np.zeros((0, 0), dtype=np.int64)]
    out = []
    for digits in itertools.product(range(field.q), repeat=n * n):
        m = np.array(digits, dtype=np.int64).reshape(n, n)
        if field.rank(m) == n:
            out.append(m)
    return out


def orbit_sizes_by_group_scan(cat: Catalog, d, limit=10**6):
    """Orbit sizes at dimension vector d by applying every element of GL(d).

    Each tuple is labelled by the least index it reaches under the whole
    group, which is its canonical representative by definition.  Returns a
    dict canonical tuple index -> orbit size.
    """
    f = cat.field
    shapes = [(d[v], d[u]) for u, v in cat.arrows]
    # vertices meeting no nonzero matrix block act trivially and are skipped
    active = {w for (u, v), (r, c) in zip(cat.arrows, shapes) if r * c for w in (u, v)}
    n = cat.nentries(d)
    total = f.q**n
    order = math.prod(f.gl_order(d[v]) for v in active)
    if order * total > limit:
        raise ResourceGuardError(f"group scan at {d}", order * total, limit)
    identity = [(np.eye(k, dtype=np.int64),) * 2 for k in d]
    groups = [
        [(g, f.inverse(g)) for g in _all_invertible(f, k)] if v in active else [identity[v]]
        for v, k in enumerate(d)
    ]
    indices = np.arange(total, dtype=np.int64)
    digits = index_digits(indices, f.q, n)
    least = indices.copy()
    for elements in itertools.product(*groups):
        parts, off = [], 0
        for (u, v), (r, c) in zip(cat.arrows, shapes):
            if r * c:
                X = digits[:, off : off + r * c].reshape(-1, r, c)
                X = f.matmul(f.matmul(elements[v][0], X), elements[u][1])
                parts.append(X.reshape(total, r * c))
            off += r * c
        image = digits_index(np.concatenate(parts, axis=1), f.q) if parts else indices
        least = np.minimum(least, image)
    reps, counts = np.unique(least, return_counts=True)
    return {int(k): int(c) for k, c in zip(reps, counts)}


def ext_dim_by_extensions(cat: Catalog, A: IsoClass, B: IsoClass, limit=10**6) -> int:
    """dim Ext^1(A, B) by counting extension data modulo coboundaries.

    Every extension 0 -> B -> E -> A -> 0 has arrow matrices
    [[M^B_a, X_a], [0, M^A_a]]; two choices of X give equivalent extensions
    exactly when they differ by phi_v M^A_a - M^B_a phi_u.  The coboundaries
    are listed by brute force and the quotient size is q^ext.
    """
    f = cat.field
    a, b = A.canonical, B.canonical
    nphi = sum(b.dims[v] * a.dims[v] for v in range(cat.nverts))
    nx = sum(b.dims[v] * a.dims[u] for u, v in cat.arrows)
    if f.q**nphi > limit:
        raise ResourceGuardError("coboundary scan", f.q**nphi, limit)
    images = set()
    for digits in itertools.product(range(f.q), repeat=nphi):
        phi, off = [], 0
        for v in range(cat.nverts):
            size = b.dims[v] * a.dims[v]
            phi.append(np.array(digits[off : off + size], dtype=np.int64).reshape(b.dims[v], a.dims[v]))
            off += size
        parts = []
        for ai, (u, v) in enumerate(cat.arrows):
            x = np.zeros((b.dims[v], a.dims[u]), dtype=np.int64)
            if x.size:
                left = f.matmul(phi[v], a.matrices[ai]) if a.dims[v] else x
                right = f.matmul(b.matrices[ai], phi[u]) if b.dims[u] else x
                x = f.add_table[left, f.neg_table[right]]
            parts.append(x.reshape(-1))
        images.add(tuple(np.concatenate(parts).tolist()) if parts else ())
    ratio = f.q**nx // len(images)
    ext = round(math.log(ratio, f.q)) if ratio > 1 else 0
    assert f.q**ext * len(images) == f.q**nx
    return ext
