"""Isomorphism classes of quiver representations over F_q, and their invariants.

For a dimension vector d the representations are the tuples of arrow
matrices, encoded as integers ``0 .. q^N - 1`` (N matrix entries, arrow order,
row-major, first entry most significant).  ``GL(d)`` orbits are the connected
components of the graph whose edges are the actions of a generating set of
``GL(d)``; the canonical representative of an orbit is its least index, i.e.
the lexicographically smallest matrix tuple.

Everything after enumeration is exact counting over subspace lattices.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InternalConsistencyError, MissingGradeError, ResourceGuardError
from .field import GF, Subspace, digits_index, index_digits
from .quiver import ModelConfig, Rep

log = logging.getLogger(__name__)

MAX_TUPLES = 10**7
END_SCAN_LIMIT = 10**6
_CHUNK = 1 << 15


@dataclass(frozen=True)
class IsoClass:
    id: str
    dims: tuple
    index: int  # canonical tuple index (least in its orbit)
    canonical: Rep
    aut_order: int
    orbit_size: int

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @property
    def is_zero(self) -> bool:
        return self.total_dim == 0

    def __repr__(self):
        return f"IsoClass({self.id}, aut={self.aut_order})"


@dataclass(frozen=True)
class Subobject:
    """An arrow-invariant tuple of subspaces of a catalogued object."""

    spaces: tuple  # one Subspace per vertex
    sub: str  # class id of the subrepresentation
    quot: str  # class id of the quotient

    @property
    def dims(self):
        return tuple(s.dim for s in self.spaces)

    @property
    def key(self):
        return tuple(s.key for s in self.spaces)

    def contains(self, other: "Subobject") -> bool:
        return all(a.contains(b) for a, b in zip(self.spaces, other.spaces))


def class_id(dims, k) -> str:
    return f"{'.'.join(map(str, dims))}:{k}"


def gl_generators(field: GF, n: int):
    """Generators of GL_n(F_q): diag(w, 1, ..., 1) and the adjacent transvections.

    The diagonal element supplies every determinant; conjugating the adjacent
    transvections by its powers and taking commutators yields all elementary
    matrices, which generate SL_n.
    """
    if n == 0:
        return []
    gens = []
    d = np.eye(n, dtype=np.int64)
    d[0, 0] = field.primitive_element
    if field.q > 2:
        gens.append(d)
    for i in range(n - 1):
        for a, b in ((i, i + 1), (i + 1, i)):
            t = np.eye(n, dtype=np.int64)
            t[a, b] = 1
            gens.append(t)
    return gens


class Grade:
    """All isomorphism classes of one dimension vector."""

    def __init__(self, dims, labels, classes, nentries):
        self.dims = dims
        self.labels = labels  # tuple index -> position in ``classes``
        self.classes = classes
        self.nentries = nentries


class Catalog:
    """Enumerated classes for every dimension vector in the model's box."""

    def __init__(
        self, config: ModelConfig, *, max_tuples=MAX_TUPLES, end_scan_limit=END_SCAN_LIMIT, box=None, stored=None
    ):
        self.config = config
        self.field = config.field
        self.q = config.q
        self.arrows = config.arrows
        self.nverts = config.nverts
        self.box = box if box is not None else config.box
        self.max_tuples = max_tuples
        self.end_scan_limit = end_scan_limit
        self._hom_cache = {}
        self._sub_cache = {}
        self._epi_cache = {}
        self.grades = {}
        planned = sum(self.q ** self.nentries(d) for d in self.box.betas())
        if stored is None and planned > self.max_tuples:
            raise ResourceGuardError("enumeration of the box", planned, self.max_tuples)
        for d in self.box.betas():
            if stored is not None:
                self.grades[d] = self._grade_from_store(d, stored[d])
            else:
                self.grades[d] = self._enumerate(d)
        self.classes = {}
        for g in self.grades.values():
            for c in g.classes:
                self.classes[c.id] = c
        self.zero = self.grades[(0,) * self.nverts].classes[0]

    # -- enumeration ------------------------------------------------------------

    def _shapes(self, d):
        return [(d[v], d[u]) for u, v in self.arrows]

    def nentries(self, d) -> int:
        return sum(r * c for r, c in self._shapes(d))

    def gl_order(self, d) -> int:
        out = 1
        for n in d:
            out *= self.field.gl_order(n)
        return out

    def decode(self, d, index: int) -> Rep:
        n = self.nentries(d)
        digits = index_digits(np.array([index]), self.q, n)[0]
        return self._rep_from_digits(d, digits)

    def _rep_from_digits(self, d, digits):
        mats, off = [], 0
        for r, c in self._shapes(d):
            mats.append(np.asarray(digits[off : off + r * c], dtype=np.int64).reshape(r, c))
            off += r * c
        return Rep(tuple(d), tuple(mats))

    def _act(self, d, digits, vertex, g, ginv):
        """Apply the base change ``g`` at ``vertex`` to a batch of digit rows."""
        out = digits.copy()
        off = 0
        for (u, v), (r, c) in zip(self.arrows, self._shapes(d)):
            size = r * c
            if size and (v == vertex or u == vertex):
                X = digits[:, off : off + size].reshape(-1, r, c)
                if v == vertex:
                    X = self.field.matmul(g, X)
                if u == vertex:
                    X = self.field.matmul(X, ginv)
                out[:, off : off + size] = X.reshape(-1, size)
            off += size
        return out

    def _enumerate(self, d) -> Grade:
        n = self.nentries(d)
        total = self.q**n
        if total > self.max_tuples:
            raise ResourceGuardError(f"enumeration of dimension vector {d}", total, self.max_tuples)
        group = self.gl_order(d)
        gens = []
        for v, dv in enumerate(d):
            touches = any(v in a for a, (r, c) in zip(self.arrows, self._shapes(d)) if r * c)
            if touches:
                gens.extend((v, g, self.field.inverse(g)) for g in gl_generators(self.field, dv))
        if not gens:
            comps = np.arange(total, dtype=np.int64)
        else:
            # merge the orbit relation one generator at a time: memory stays O(total)
            comps = np.arange(total, dtype=np.int64)
            ncomp = total
            image = np.empty(total, dtype=np.int64)
            for v, g, ginv in gens:
                for start in range(0, total, _CHUNK):
                    chunk = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
                    digits = index_digits(chunk, self.q, n)
                    image[start : start + len(chunk)] = digits_index(self._act(d, digits, v, g, ginv), self.q)
                graph = csr_matrix(
                    (np.ones(total, dtype=np.int8), (comps, comps[image])), shape=(ncomp, ncomp)
                )
                ncomp, merged = connected_components(graph, directed=True, connection="weak")
                comps = merged[comps]
        ncomp = int(comps.max()) + 1
        mins = np.full(ncomp, total, dtype=np.int64)
        np.minimum.at(mins, comps, np.arange(total, dtype=np.int64))
        sizes = np.bincount(comps, minlength=ncomp)
        order = np.argsort(mins, kind="stable")
        position = np.empty(ncomp, dtype=np.int64)
        position[order] = np.arange(ncomp)
        labels = position[comps]
        labels.setflags(write=False)
        classes = []
        for k, comp in enumerate(order):
            size = int(sizes[comp])
            if group % size:
                raise InternalConsistencyError(f"orbit size {size} does not divide |GL{d}| = {group}")
            classes.append(
                IsoClass(class_id(d, k), tuple(d), int(mins[comp]), self.decode(d, int(mins[comp])), group // size, size)
            )
        if sum(c.orbit_size for c in classes) != total:
            raise InternalConsistencyError(f"orbit checksum failed at {d}")
        return Grade(tuple(d), labels, classes, n)

    def _grade_from_store(self, d, entry) -> Grade:
        labels, records = entry
        n = self.nentries(d)
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (self.q**n,):
            raise InternalConsistencyError(f"stored labels at {d} have the wrong length")
        labels.setflags(write=False)
        group = self.gl_order(d)
        classes = []
        for k, r in enumerate(records):
            rep = Rep(tuple(d), tuple(np.asarray(m, dtype=np.int64).reshape(sh) for m, sh in zip(r["matrices"], self._shapes(d))))
            index = int(digits_index(rep.flat(), self.q)) if n else 0
            if r["id"] != class_id(d, k) or labels[index] != k:
                raise InternalConsistencyError(f"stored class {r['id']} inconsistent with its labels")
            classes.append(IsoClass(r["id"], tuple(d), index, rep, r["aut_order"], group // r["aut_order"]))
        return Grade(tuple(d), labels, classes, n)

    def to_store(self):
        """Per-grade (labels, class records), the inverse of the ``stored`` argument."""
        out = []
        for d, g in self.grades.items():
            recs = [
                {"id": c.id, "dims": list(c.dims), "matrices": [m.tolist() for m in c.canonical.matrices],
                 "aut_order": c.aut_order}
                for c in g.classes
            ]
            out.append({"dims": list(d), "labels": g.labels.tolist(), "classes": recs})
        return out

    # -- lookup -----------------------------------------------------------------

    def __getitem__(self, cid: str) -> IsoClass:
        return self.classes[cid]

    def __iter__(self):
        return iter(self.classes.values())

    def __len__(self):
        return len(self.classes)

    def classes_at(self, d):
        d = tuple(d)
        if d not in self.grades:
            raise MissingGradeError(f"dimension vector {d} outside the catalog box")
        return list(self.grades[d].classes)

    def enumerate_reps(self, d):
        return self.classes_at(d)

    def classify(self, rep: Rep) -> IsoClass:
        g = self.grades.get(rep.dims)
        if g is None:
            raise MissingGradeError(f"dimension vector {rep.dims} outside the catalog box")
        if g.nentries == 0:
            return g.classes[0]
        index = int(digits_index(rep.flat(), self.q))
        return g.classes[int(g.labels[index])]

    def verify_checksums(self):
        """Orbit checksum per grade: sum of |GL(d)| / aut over classes = q^N."""
        out = {}
        for d, g in self.grades.items():
            lhs = sum(self.gl_order(d) // c.aut_order for c in g.classes)
            out[d] = lhs == self.q ** g.nentries
        return out

    # -- linear algebra of representations ------------------------------------------

    def _rep(self, x) -> Rep:
        return x.canonical if isinstance(x, IsoClass) else x

    def _hom_system(self, A: Rep, B: Rep):
        f = self.field
        offsets, nvars = [], 0
        for v in range(self.nverts):
            offsets.append(nvars)
            nvars += B.dims[v] * A.dims[v]
        rows = []
        for ai, (u, v) in enumerate(self.arrows):
            MA, MB = A.matrices[ai], B.matrices[ai]
            for i in range(B.dims[v]):
                for j in range(A.dims[u]):
                    row = np.zeros(nvars, dtype=np.int64)
                    # (MB phi_u)[i, j] = sum_k MB[i, k] phi_u[k, j]
                    for k in range(B.dims[u]):
                        row[offsets[u] + k * A.dims[u] + j] = f.add(row[offsets[u] + k * A.dims[u] + j], MB[i, k])
                    # -(phi_v MA)[i, j] = -sum_k phi_v[i, k] MA[k, j]
                    for k in range(A.dims[v]):
                        pos = offsets[v] + i * A.dims[v] + k
                        row[pos] = f.sub(row[pos], MA[k, j])
                    rows.append(row)
        K = np.array(rows, dtype=np.int64).reshape(len(rows), nvars)
        return K, offsets, nvars

    def hom_basis(self, A, B):
        """Basis of Hom(A, B) as rows over the flattened unknowns (phi_v row-major)."""
        A, B = self._rep(A), self._rep(B)
        K, _, nvars = self._hom_system(A, B)
        if nvars == 0:
            return np.zeros((0, 0), dtype=np.int64)
        if K.shape[0] == 0:
            return np.eye(nvars, dtype=np.int64)
        return self.field.nullspace(K, nvars)

    def unflatten(self, A, B, vec):
        """Split a flattened morphism into its per-vertex matrices ``phi_v: A_v -> B_v``."""
        A, B = self._rep(A), self._rep(B)
        out, off = [], 0
        for v in range(self.nverts):
            size = B.dims[v] * A.dims[v]
            out.append(np.asarray(vec[off : off + size], dtype=np.int64).reshape(B.dims[v], A.dims[v]))
            off += size
        return out

    def hom_dim(self, A, B) -> int:
        key = (A.id, B.id) if isinstance(A, IsoClass) and isinstance(B, IsoClass) else None
        if key is not None and key in self._hom_cache:
            return self._hom_cache[key]
        dim = int(self.hom_basis(A, B).shape[0])
        if key is not None:
            self._hom_cache[key] = dim
        return dim

    def euler_form(self, d, e) -> int:
        return self.config.euler_form(d, e)

    def ext_dim(self, A, B) -> int:
        """dim Ext^1(A, B) = dim Hom(A, B) - <dim A, dim B> (the quiver is hereditary)."""
        A_, B_ = self._rep(A), self._rep(B)
        ext = self.hom_dim(A, B) - self.euler_form(A_.dims, B_.dims)
        if ext < 0:
            raise InternalConsistencyError(f"negative ext dimension {ext} for ({A!r}, {B!r})")
        return ext

    def end_algebra(self, G):
        return self.hom_basis(G, G)

    def aut_order_by_scan(self, G: IsoClass) -> int:
        """Count invertible endomorphisms by scanning all of End(G)."""
        basis = self.end_algebra(G)
        size = self.q ** basis.shape[0]
        if size > self.end_scan_limit:
            raise ResourceGuardError(f"End({G.id}) scan", size, self.end_scan_limit)
        count = 0
        for vec in self.field.combinations(basis) if basis.shape[0] else [np.zeros(0, dtype=np.int64)]:
            mats = self.unflatten(G, G, vec)
            if all(self.field.rank(m) == m.shape[0] for m in mats if m.size):
                count += 1
        return count

    def automorphisms(self, G: IsoClass):
        """All automorphisms of G (per-vertex matrix lists); guarded like the End scan."""
        basis = self.end_algebra(G)
        size = self.q ** basis.shape[0]
        if size > self.end_scan_limit:
            raise ResourceGuardError(f"End({G.id}) scan", size, self.end_scan_limit)
        vecs = self.field.combinations(basis) if basis.shape[0] else np.zeros((1, 0), dtype=np.int64)
        out = []
        for vec in vecs:
            mats = self.unflatten(G, G, vec)
            if all(self.field.rank(m) == m.shape[0] for m in mats if m.size):
                out.append(mats)
        return out

    def aut_order(self, G: IsoClass) -> int:
        return G.aut_order

    # -- subobjects -------------------------------------------------------------

    def sub_rep(self, G: Rep, spaces) -> Rep:
        mats = []
        for ai, (u, v) in enumerate(self.arrows):
            Uu, Uv = spaces[u], spaces[v]
            if Uu.dim == 0 or Uv.dim == 0:
                mats.append(np.zeros((Uv.dim, Uu.dim), dtype=np.int64))
                continue
            images = self.field.matmul(G.matrices[ai], Uu.basis.T).T  # (k_u, d_v)
            mats.append(Uv.coordinates(images).T)
        return Rep(tuple(s.dim for s in spaces), tuple(mats))

    def quotient_rep(self, G: Rep, spaces) -> Rep:
        mats = []
        for ai, (u, v) in enumerate(self.arrows):
            Uu, Uv = spaces[u], spaces[v]
            cu, cv = Uu.complement_columns, Uv.complement_columns
            if not cu or not cv:
                mats.append(np.zeros((len(cv), len(cu)), dtype=np.int64))
                continue
            images = G.matrices[ai][:, list(cu)].T  # (len cu, d_v)
            mats.append(Uv.reduce(images).T)
        return Rep(tuple(s.n - s.dim for s in spaces), tuple(mats))

    def subquotient(self, G, inner: Subobject, outer: Subobject) -> IsoClass:
        """Class of ``outer / inner`` for nested subobjects of G."""
        G = self._rep(G)
        V = self.sub_rep(G, outer.spaces)
        coords = []
        for U, W in zip(inner.spaces, outer.spaces):
            coords.append(Subspace.span(self.field, W.coordinates(U.basis), W.dim))
        return self.classify(self.quotient_rep(V, coords))

    def invariant_subspace_tuples(self, G: Rep):
        f = self.field
        choices = [f.subspaces(n) for n in G.dims]
        # image of each candidate subspace under each arrow
        image = {}
        for ai, (u, v) in enumerate(self.arrows):
            for U in choices[u]:
                if U.dim == 0 or G.dims[v] == 0:
                    image[ai, U.key] = 1  # mask of {0}
                else:
                    vecs = f.matmul(G.matrices[ai], U.basis.T).T
                    image[ai, U.key] = Subspace.span(f, vecs, G.dims[v]).mask
        for combo in itertools.product(*choices):
            if all(image[ai, combo[u].key] & ~combo[v].mask == 0 for ai, (u, v) in enumerate(self.arrows)):
                yield combo

    def subobjects(self, G: IsoClass):
        """All subrepresentations of G with the classes of sub and quotient."""
        if G.id in self._sub_cache:
            return self._sub_cache[G.id]
        rep = G.canonical
        out = []
        for spaces in self.invariant_subspace_tuples(rep):
            sub = self.classify(self.sub_rep(rep, spaces))
            quot = self.classify(self.quotient_rep(rep, spaces))
            out.append(Subobject(tuple(spaces), sub.id, quot.id))
        out = tuple(out)
        self._sub_cache[G.id] = out
        return out

    def subobject_index(self, G: IsoClass):
        cache = self.__dict__.setdefault("_subidx_cache", {})
        if G.id not in cache:
            cache[G.id] = {s.key: s for s in self.subobjects(G)}
        return cache[G.id]

    def hall_table(self, G: IsoClass) -> Counter:
        """Counter (sub class id, quotient class id) -> number of subobjects."""
        cache = self.__dict__.setdefault("_hall_cache", {})
        if G.id not in cache:
            cache[G.id] = Counter((s.sub, s.quot) for s in self.subobjects(G))
        return cache[G.id]

    def hall_number(self, A: IsoClass, B: IsoClass, G: IsoClass):
        """F^G_{A,B}: subobjects of G isomorphic to A with quotient isomorphic to B.

        Returns ``(count, ok)``; ``ok`` is False (and count 0) on a dimension mismatch.
        """
        if tuple(a + b for a, b in zip(A.dims, B.dims)) != G.dims:
            log.warning("hall_number: dim %s + dim %s != dim %s", A.dims, B.dims, G.dims)
            return 0, False
        return self.hall_table(G).get((A.id, B.id), 0), True

    # -- framing ----------------------------------------------------------------

    @cached_property
    def framing(self) -> Rep:
        return self.config.framing_rep()

    def framing_hom_basis(self, G: IsoClass):
        return self.hom_basis(self.framing, G)

    def framing_maps(self, G: IsoClass):
        """Every gamma in Hom(W, G), as per-vertex matrix lists."""
        basis = self.framing_hom_basis(G)
        if basis.shape[0] == 0:
            vecs = np.zeros((1, basis.shape[1] if basis.ndim == 2 else 0), dtype=np.int64)
        else:
            size = self.q ** basis.shape[0]
            if size > self.end_scan_limit:
                raise ResourceGuardError(f"Hom(W, {G.id}) scan", size, self.end_scan_limit)
            vecs = self.field.combinations(basis)
        return [self.unflatten(self.framing, G, vec) for vec in vecs]

    def hom_count_framing(self, G: IsoClass) -> int:
        count = self.q ** self.hom_dim(self.framing, G)
        if self.config.framing.is_projective:
            expected = self.q ** sum(m * d for m, d in zip(self.config.framing.multiplicities, G.dims))
            if expected != count:
                raise InternalConsistencyError(f"|Hom(W, {G.id})| = {count}, projective formula gives {expected}")
        return count

    def image_spaces(self, G: IsoClass, gamma):
        return tuple(
            Subspace.span(self.field, m.T, G.dims[v]) if m.size else Subspace.span(self.field, [], G.dims[v])
            for v, m in enumerate(gamma)
        )

    def epi_count_direct(self, G: IsoClass) -> int:
        count = 0
        for gamma in self.framing_maps(G):
            if all(self.field.rank(m) == m.shape[0] for m in gamma if m.shape[0]):
                count += 1
        return count

    def epi_count_mobius(self, G: IsoClass) -> int:
        """|Epi(W, G)| from |Hom(W, G)| = sum over subobjects A of |Epi(W, A)|."""
        if G.id in self._epi_cache:
            return self._epi_cache[G.id]
        rest = self.hom_count_framing(G)
        for s in self.subobjects(G):
            if s.dims != G.dims:
                rest -= self.epi_count_mobius(self.classes[s.sub])
        self._epi_cache[G.id] = rest
        return rest

    def epi_count_framing(self, G: IsoClass) -> int:
        a, b = self.epi_count_direct(G), self.epi_count_mobius(G)
        if a != b:
            raise InternalConsistencyError(f"#Epi(W, {G.id}): direct scan {a} != inversion {b}")
        return a

    def framing_ext_vanishing(self) -> dict:
        """ext(W, S_v) for each exceptional vertex v (0 is needed by the framed torsion identity)."""
        out = {}
        for v in sorted(self.config.exceptional):
            simple = tuple(1 if u == v else 0 for u in range(self.nverts))
            S = self.classes_at(simple)[0] if simple in self.grades else None
            if S is None:
                continue
            out[self.config.vertices[v]] = self.ext_dim(self.framing, S.canonical)
        return out

    # -- persistence ------------------------------------------------------------------

    def to_records(self):
        return [
            {
                "id": c.id,
                "dims": list(c.dims),
                "matrices": [m.tolist() for m in c.canonical.matrices],
                "aut_order": c.aut_order,
            }
            for c in self.classes.values()
        ]
