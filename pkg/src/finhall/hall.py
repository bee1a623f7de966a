"""The finitary Hall algebra of a catalog.

Elements are rational functions on the catalogued isomorphism classes.  The
product counts actual subobjects,

    (a * b)(G) = sum over subobjects A of G of  a(A) * b(G / A),

so the subobject sits on the left.  Values are plain counts; dividing by
automorphism orders happens only in the integration map (see ``partition``).
Everything is truncated at the catalog box: a class outside the box has no
coefficient and never feeds back into one inside it, because sub and
quotient dimension vectors are bounded by the dimension of G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .catalog import Catalog, IsoClass
from .errors import BoxMismatchError, DomainError, InternalConsistencyError, MissingGradeError, NotInvertibleError
from .reports import Report
from .stability import HALF_INF, AllObjects, SlopeInterval, StabilityModel


class HallElement:
    """A function on iso classes with exact rational values (absent = 0)."""

    __slots__ = ("algebra", "_values")

    def __init__(self, algebra: "HallAlgebra", values=None):
        self.algebra = algebra
        clean = {}
        for cid, v in (values or {}).items():
            v = Fraction(v)
            if v:
                if cid not in algebra.catalog.classes:
                    raise MissingGradeError(f"class {cid!r} is not in the catalog")
                clean[cid] = v
        self._values = clean

    def __getitem__(self, cid) -> Fraction:
        if isinstance(cid, IsoClass):
            cid = cid.id
        return self._values.get(cid, Fraction(0))

    def items(self):
        order = self.algebra.order
        return sorted(self._values.items(), key=lambda kv: order[kv[0]])

    def support(self):
        return [cid for cid, _ in self.items()]

    @property
    def values(self):
        return dict(self._values)

    def is_zero(self) -> bool:
        return not self._values

    def _same(self, other):
        if not isinstance(other, HallElement):
            return False
        if other.algebra is not self.algebra:
            raise BoxMismatchError("Hall elements from different catalogs")
        return True

    def __add__(self, other):
        if not self._same(other):
            return NotImplemented
        out = dict(self._values)
        for k, v in other._values.items():
            out[k] = out.get(k, 0) + v
        return HallElement(self.algebra, out)

    def __neg__(self):
        return HallElement(self.algebra, {k: -v for k, v in self._values.items()})

    def __sub__(self, other):
        if not self._same(other):
            return NotImplemented
        return self + (-other)

    def scale(self, k):
        k = Fraction(k)
        return HallElement(self.algebra, {c: k * v for c, v in self._values.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not self._same(other):
            return NotImplemented
        return self.algebra.mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        return isinstance(other, HallElement) and other.algebra is self.algebra and other._values == self._values

    def __hash__(self):
        return hash(frozenset(self._values.items()))

    def grade(self, d) -> "HallElement":
        """Projection onto one dimension vector."""
        d = tuple(d)
        cat = self.algebra.catalog
        return HallElement(self.algebra, {c: v for c, v in self._values.items() if cat[c].dims == d})

    def at_zero(self) -> Fraction:
        return self[self.algebra.catalog.zero.id]

    def to_records(self):
        cat = self.algebra.catalog
        return [
            {"id": cid, "dims": list(cat[cid].dims), "num": v.numerator, "den": v.denominator}
            for cid, v in self.items()
        ]

    def __repr__(self):
        terms = " + ".join(f"{v}[{c}]" for c, v in self.items()) or "0"
        return f"HallElement({terms})"


@dataclass(frozen=True)
class LimitResult:
    grade: tuple
    threshold: Optional[object]  # SlopeValue from which every lower tested slope gives zero
    residuals: tuple  # (slope, residual element at the grade) for every tested slope

    @property
    def stabilized(self) -> bool:
        return self.threshold is not None

    def vanishes_at_or_below(self, mu) -> bool:
        return all(diff.is_zero() for m, diff in self.residuals if m <= mu)


class HallAlgebra:
    """Hall algebra of a catalog, together with its stability data and framing."""

    def __init__(self, catalog: Catalog, stability: Optional[StabilityModel] = None, aut_scan_limit: int = 4096):
        self.catalog = catalog
        self.stability = stability or StabilityModel(catalog)
        self.order = {cid: i for i, cid in enumerate(catalog.classes)}
        self.max_total = max(G.total_dim for G in catalog)
        self.aut_scan_limit = aut_scan_limit
        self.P, self.Q = self.stability.serre_pair()

    # -- product --------------------------------------------------------------

    def mul(self, a: HallElement, b: HallElement, grades: Optional[Iterable] = None) -> HallElement:
        """Product through subobject tables; ``grades`` limits the target dimension vectors."""
        cat = self.catalog
        targets = cat if grades is None else [G for d in grades for G in cat.classes_at(d)]
        out = {}
        if a.is_zero() or b.is_zero():
            return HallElement(self)
        for G in targets:
            total = Fraction(0)
            for s in cat.subobjects(G):
                x = a._values.get(s.sub)
                if x:
                    y = b._values.get(s.quot)
                    if y:
                        total += x * y
            if total:
                out[G.id] = total
        return HallElement(self, out)

    def mul_by_hall_numbers(self, a: HallElement, b: HallElement) -> HallElement:
        """The same product as a sum over class pairs weighted by Hall numbers."""
        out = {}
        for G in self.catalog:
            total = Fraction(0)
            for A in self.catalog:
                x = a[A.id]
                if not x or any(x_ > g for x_, g in zip(A.dims, G.dims)):
                    continue
                rest = tuple(g - x_ for g, x_ in zip(G.dims, A.dims))
                for B in self.catalog.classes_at(rest):
                    y = b[B.id]
                    if y:
                        count, _ = self.catalog.hall_number(A, B, G)
                        total += count * x * y
            if total:
                out[G.id] = total
        return HallElement(self, out)

    def product(self, *factors: HallElement) -> HallElement:
        out = self.unit()
        for f in factors:
            out = self.mul(out, f)
        return out

    # -- basic elements ---------------------------------------------------------

    def element(self, values) -> HallElement:
        return HallElement(self, values)

    def zero(self) -> HallElement:
        return HallElement(self)

    def delta(self, G) -> HallElement:
        cid = G.id if isinstance(G, IsoClass) else G
        return HallElement(self, {cid: 1})

    def unit(self) -> HallElement:
        return self.delta(self.catalog.zero)

    def indicator(self, spec=AllObjects()) -> HallElement:
        return HallElement(self, {G.id: 1 for G in self.catalog if self.stability.contains(spec, G)})

    def framed(self, spec=AllObjects()) -> HallElement:
        """|Hom(W, G)| on members of ``spec``."""
        return HallElement(
            self,
            {G.id: self.catalog.hom_count_framing(G) for G in self.catalog if self.stability.contains(spec, G)},
        )

    def hilb(self) -> HallElement:
        """#Epi(W, G): quotients of the framing object."""
        return HallElement(self, {G.id: self.catalog.epi_count_framing(G) for G in self.catalog})

    def hilb_exc(self) -> HallElement:
        """#Epi(W, G) restricted to G in P."""
        return HallElement(
            self,
            {G.id: self.catalog.epi_count_framing(G) for G in self.catalog if self.stability.contains(self.P, G)},
        )

    def pi_hilb(self, cross_check: bool = True) -> HallElement:
        """Number of framings gamma: W -> G with G in Q and coker(gamma) in P.

        A framing factors uniquely through its image U, so the count is
        the sum over subobjects U with G/U in P of #Epi(W, U).  With
        ``cross_check`` the value is recomputed by scanning every gamma.
        """
        cat, st = self.catalog, self.stability
        out = {}
        for G in cat:
            if not st.contains(self.Q, G):
                continue
            n = sum(cat.epi_count_mobius(cat[s.sub]) for s in cat.subobjects(G) if st.contains(self.P, cat[s.quot]))
            if cross_check:
                direct = len(self.pi_stable_framings(G))
                if direct != n:
                    raise InternalConsistencyError(f"pi-Hilb at {G.id}: image sum {n} != framing scan {direct}")
            out[G.id] = n
        return HallElement(self, out)

    def cokernel_class(self, G: IsoClass, gamma) -> str:
        spaces = self.catalog.image_spaces(G, gamma)
        key = tuple(s.key for s in spaces)
        return self.catalog.subobject_index(G)[key].quot

    def pi_stable_framings(self, G: IsoClass):
        """Every gamma in Hom(W, G) with coker(gamma) in P (G is assumed to lie in Q)."""
        cat, st = self.catalog, self.stability
        return [g for g in cat.framing_maps(G) if st.contains(self.P, cat[self.cokernel_class(G, g)])]

    # -- inversion, exp, log ----------------------------------------------------------

    def _split_unit(self, a: HallElement):
        a0 = a.at_zero()
        rest = dict(a.values)
        rest.pop(self.catalog.zero.id, None)
        return a0, HallElement(self, rest)

    def invert(self, a: HallElement) -> HallElement:
        a0, rest = self._split_unit(a)
        if a0 == 0:
            raise NotInvertibleError("Hall element vanishes at the zero object")
        nil = rest.scale(-1 / a0)
        total = power = self.unit()
        for _ in range(self.max_total):
            power = self.mul(power, nil)
            if power.is_zero():
                break
            total = total + power
        return total.scale(1 / a0)

    def exp(self, a: HallElement) -> HallElement:
        if a.at_zero() != 0:
            raise DomainError("exp needs an element vanishing at the zero object")
        total = power = self.unit()
        for k in range(1, self.max_total + 1):
            power = self.mul(power, a)
            if power.is_zero():
                break
            total = total + power.scale(Fraction(1, math.factorial(k)))
        return total

    def log(self, a: HallElement) -> HallElement:
        a0, rest = self._split_unit(a)
        if a0 != 1:
            raise DomainError("log needs value exactly 1 at the zero object")
        total, power = self.zero(), self.unit()
        for k in range(1, self.max_total + 1):
            power = self.mul(power, rest)
            if power.is_zero():
                break
            total = total + power.scale(Fraction((-1) ** (k + 1), k))
        return total

    def epsilon(self, mu) -> HallElement:
        """log of the indicator of the semistables of slope exactly ``mu``."""
        return self.log(self.indicator(SlopeInterval.exactly(mu)))

    # -- checks -------------------------------------------------------------------------

    def check_identity(self, name: str, lhs: HallElement, rhs: HallElement, info=None) -> Report:
        rep = Report(name, info=dict(info or {}))
        diff = lhs - rhs
        for G in self.catalog:
            r = diff[G.id]
            rep.add("coefficient", G.id, r == 0, None if r == 0 else {"lhs": lhs[G.id], "rhs": rhs[G.id]})
        return rep

    def ext_vanishing_against_P(self) -> bool:
        """ext(W, T) = 0 for every catalogued T in P."""
        W = self.catalog.framing
        return all(
            self.catalog.ext_dim(W, T.canonical) == 0
            for T in self.catalog
            if not T.is_zero and self.stability.contains(self.P, T)
        )

    def identity_chain(self):
        """Reports for the torsion, framing, Hilbert and torsion-part identities and the
        resulting factorization of the Hilbert element."""
        st = self.stability
        one_C, one_P, one_Q = self.indicator(), self.indicator(self.P), self.indicator(self.Q)
        Ps, Qs = st.slope_pair()
        H, H_exc, H_pi = self.hilb(), self.hilb_exc(), self.pi_hilb()
        fr_C, fr_P, fr_Q = self.framed(), self.framed(self.P), self.framed(self.Q)
        ext_ok = self.ext_vanishing_against_P()
        reports = [
            self.check_identity("torsion-factorization", self.mul(one_P, one_Q), one_C),
            self.check_identity(
                "torsion-factorization-slope", self.mul(self.indicator(Ps), self.indicator(Qs)), one_C
            ),
            self.check_identity("hilbert-factorization", fr_C, self.mul(H, one_C)),
            self.check_identity(
                "framed-torsion-factorization",
                fr_C,
                self.mul(fr_P, fr_Q),
                {"ext_vanishing_against_P": ext_ok, "asserted": ext_ok},
            ),
            self.check_identity("exceptional-hilbert", fr_P, self.mul(H_exc, one_P)),
            self.check_identity("pi-hilbert", fr_Q, self.mul(H_pi, one_Q)),
        ]
        lhs = self.mul(H, one_P)
        rhs = self.product(H_exc, one_P, H_pi)
        reports.append(self.check_identity("hilbert-product-formula", lhs, rhs))
        # the same formula obtained by cancelling 1_Q from H * 1_C = H_exc * 1_P * H_pi * 1_Q
        inv_Q = self.invert(one_Q)
        reports.append(
            self.check_identity(
                "hilbert-product-by-cancellation", self.product(H, one_C, inv_Q), self.product(rhs, one_Q, inv_Q)
            )
        )
        return reports

    def dual_path_report(self, elements) -> Report:
        rep = Report("product-dual-path")
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                ok = self.mul(a, b) == self.mul_by_hall_numbers(a, b)
                rep.add("subobject-sum=hall-number-sum", f"{i}*{j}", ok)
        return rep

    def free_action_report(self) -> Report:
        """No nontrivial automorphism of G fixes a pi-stable framing.

        phi fixes gamma iff (phi - 1) kills the image of gamma, so it suffices
        that Hom(coker gamma, G) = 0.  Where End(G) is small enough the
        stabilizer is also counted explicitly.
        """
        cat, st = self.catalog, self.stability
        f = cat.field
        rep = Report("free-action")
        for G in cat:
            if G.is_zero or not st.contains(self.Q, G):
                continue
            gammas = self.pi_stable_framings(G)
            cokers = sorted({self.cokernel_class(G, g) for g in gammas}, key=self.order.get)
            bad = [c for c in cokers if cat.hom_dim(cat[c], G)]
            rep.add("hom(coker, G)=0", G.id, not bad, {"cokernels": bad} if bad else None)
            if f.q ** cat.end_algebra(G).shape[0] > self.aut_scan_limit:
                continue
            auts = cat.automorphisms(G)
            worst = 0
            for g in gammas:
                fixed = sum(
                    all(np.array_equal(f.matmul(phi[v], g[v]), g[v]) for v in range(cat.nverts) if g[v].size)
                    for phi in auts
                )
                worst = max(worst, fixed)
            rep.add("stabilizer-scan", G.id, worst <= 1, {"framings": len(gammas), "max_stabilizer": worst})
        return rep

    def _limit(self, grade, mus, make_spec, left: HallElement) -> LimitResult:
        residuals = []
        for mu in mus:
            spec = make_spec(mu)
            diff = self.mul(left, self.indicator(spec), grades=[grade]) - self.framed(spec).grade(grade)
            residuals.append((mu, diff))
        threshold = None
        for mu, diff in reversed(residuals):
            if not diff.is_zero():
                break
            threshold = mu
        return LimitResult(tuple(grade), threshold, tuple(residuals))

    def limit_hilb(self, grade, mus, H: Optional[HallElement] = None) -> LimitResult:
        """H * 1_{SS(>= mu)} - 1^O_{SS(>= mu)} at one grade, along a descending list of slopes."""
        return self._limit(grade, mus, SlopeInterval.at_least, H if H is not None else self.hilb())

    def limit_pi_hilb(self, grade, mus, H_pi: Optional[HallElement] = None) -> LimitResult:
        """H^pi * 1_{SS(mu <= . < inf/2)} - 1^O of the same, for mu below inf/2."""
        mus = [m for m in mus if m < HALF_INF]
        return self._limit(
            grade,
            mus,
            lambda mu: SlopeInterval(lower=mu, upper=HALF_INF, upper_closed=False),
            H_pi if H_pi is not None else self.pi_hilb(),
        )

    def limit_lemma_check(self, grades=None, mus=None) -> Report:
        mus = list(mus) if mus is not None else self.stability.realized_slopes()
        grades = list(grades) if grades is not None else list(self.catalog.grades)
        H, H_pi = self.hilb(), self.pi_hilb()
        rep = Report("limit-lemmas", info={"slopes_tested": mus})
        for d in grades:
            for label, res in (("hilb", self.limit_hilb(d, mus, H)), ("pi-hilb", self.limit_pi_hilb(d, mus, H_pi))):
                witness = {"threshold": res.threshold}
                if not res.stabilized:
                    witness["residuals"] = [[mu, diff.to_records()] for mu, diff in res.residuals if not diff.is_zero()]
                rep.add(f"stabilizes-{label}", list(d), res.stabilized, witness)
        return rep

    def slope_factorization_report(self) -> Report:
        mus = self.stability.realized_slopes()
        rep = self.check_identity(
            "slope-factorization",
            self.product(*(self.indicator(SlopeInterval.exactly(mu)) for mu in mus)),
            self.indicator(),
        )
        rep.info["slopes"] = mus
        return rep

    def interval_refinement_report(self) -> Report:
        rep = Report("interval-refinement")
        one_P = self.indicator(self.P)
        for mu in self.stability.realized_slopes():
            if mu > HALF_INF:
                continue
            lhs = self.indicator(SlopeInterval.at_least(mu))
            rhs = self.mul(one_P, self.indicator(SlopeInterval(lower=mu, upper=HALF_INF, upper_closed=False)))
            bad = [G.id for G in self.catalog if lhs[G.id] != rhs[G.id]]
            rep.add("SS(>=mu)=1_P*SS(mu<=.<inf/2)", mu, not bad, {"classes": bad} if bad else None)
        return rep

    def epsilon_report(self) -> Report:
        rep = Report("epsilon-exp-log")
        for mu in self.stability.realized_slopes():
            eps = self.epsilon(mu)
            ind = self.indicator(SlopeInterval.exactly(mu))
            ok = self.exp(eps) == ind and eps.at_zero() == 0
            rep.add("exp(eps)=1_SS(mu)", mu, ok, {"support": len(eps.support())})
        return rep
