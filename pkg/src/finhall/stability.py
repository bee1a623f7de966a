"""Lexicographic bi-slopes, semistability, HN filtrations and torsion pairs.

The slope of a nonzero dimension vector d is the pair

    ( theta(d) / H(d),  theta(d) / L(d) )

compared lexicographically, with ``x / 0 = +inf`` for every x.  ``H`` vanishes
exactly on classes supported on the exceptional vertex set, so those classes
have first coordinate ``+inf``; the threshold ``HALF_INF = (+inf, 0)``
separates them (when theta >= 0 there) from everything else.

All semistability and HN computations run inside the subobject lattice of the
object at hand: a subquotient ``V / U`` has as subobjects exactly the lattice
elements between U and V, and slopes only depend on dimension vectors.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .catalog import Catalog, IsoClass, Subobject
from .errors import DomainError, ModelViolation, TorsionPairViolation
from .reports import Report


class _PlusInfinity:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "+inf"

    def __reduce__(self):
        return (_PlusInfinity, ())


INF = _PlusInfinity()


def _coord_key(x):
    return (1, 0) if x is INF else (0, x)


def _fmt(x):
    return "+inf" if x is INF else str(x)


@functools.total_ordering
@dataclass(frozen=True)
class SlopeValue:
    first: object
    second: object

    def __post_init__(self):
        for name in ("first", "second"):
            x = getattr(self, name)
            if x is not INF:
                object.__setattr__(self, name, Fraction(x))

    def _key(self):
        return (_coord_key(self.first), _coord_key(self.second))

    def __lt__(self, other):
        if not isinstance(other, SlopeValue):
            return NotImplemented
        return self._key() < other._key()

    def __eq__(self, other):
        return isinstance(other, SlopeValue) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"({_fmt(self.first)}, {_fmt(self.second)})"

    def to_json(self):
        return [_fmt(self.first), _fmt(self.second)]


INFINITY = SlopeValue(INF, INF)
HALF_INF = SlopeValue(INF, 0)


def _ratio(num: int, den: int):
    return INF if den == 0 else Fraction(num, den)


@dataclass(frozen=True)
class StabilityData:
    theta: tuple
    h_weights: tuple
    l_weights: tuple

    @classmethod
    def from_config(cls, config) -> "StabilityData":
        return cls(tuple(config.theta), tuple(config.h_weights), tuple(config.l_weights))

    def theta_of(self, d) -> int:
        return sum(t * x for t, x in zip(self.theta, d))

    def slope(self, d) -> SlopeValue:
        if not any(d):
            raise DomainError("slope of the zero dimension vector is undefined")
        chi = self.theta_of(d)
        H = sum(h * x for h, x in zip(self.h_weights, d))
        L = sum(l * x for l, x in zip(self.l_weights, d))
        return SlopeValue(_ratio(chi, H), _ratio(chi, L))


# -- subcategory specifications -----------------------------------------------------


@dataclass(frozen=True)
class AllObjects:
    def __repr__(self):
        return "All"


@dataclass(frozen=True)
class SerreSupport:
    """Objects supported on a vertex subset (indices)."""

    vertices: frozenset

    def __repr__(self):
        return f"Serre({sorted(self.vertices)})"


@dataclass(frozen=True)
class SlopeInterval:
    """Objects whose HN slopes all lie in the interval (zero always included)."""

    lower: Optional[SlopeValue] = None
    lower_closed: bool = True
    upper: Optional[SlopeValue] = None
    upper_closed: bool = True

    @classmethod
    def at_least(cls, t):
        return cls(lower=t)

    @classmethod
    def below(cls, t):
        return cls(upper=t, upper_closed=False)

    @classmethod
    def exactly(cls, mu):
        return cls(lower=mu, upper=mu)

    def __contains__(self, mu: SlopeValue) -> bool:
        if self.lower is not None and (mu < self.lower or (mu == self.lower and not self.lower_closed)):
            return False
        if self.upper is not None and (mu > self.upper or (mu == self.upper and not self.upper_closed)):
            return False
        return True

    def __repr__(self):
        lo = "-inf" if self.lower is None else repr(self.lower)
        hi = "inf" if self.upper is None else repr(self.upper)
        return f"SS{'[' if self.lower_closed else '('}{lo}, {hi}{']' if self.upper_closed else ')'}"


@dataclass(frozen=True)
class Perp:
    """Right Hom-orthogonal: G with Hom(T, G) = 0 for every catalogued T in ``of``."""

    of: object

    def __repr__(self):
        return f"Perp({self.of!r})"


@dataclass(frozen=True)
class ClassSet:
    """An explicit set of class ids (the zero object is added automatically)."""

    ids: frozenset

    def __repr__(self):
        return f"Classes({sorted(self.ids)})"


@dataclass(frozen=True)
class HNFiltration:
    object: str
    steps: tuple  # G_1 ⊂ ... ⊂ G_N = G as Subobjects of the object
    quotients: tuple  # class ids of G_i / G_{i-1}
    slopes: tuple  # SlopeValue per quotient

    @property
    def length(self) -> int:
        return len(self.steps)

    def to_json(self):
        return {
            "object": self.object,
            "dims": [list(s.dims) for s in self.steps],
            "quotients": list(self.quotients),
            "slopes": [s.to_json() for s in self.slopes],
        }


def _diff(a, b):
    return tuple(x - y for x, y in zip(a, b))


class StabilityModel:
    """Stability computations over a catalog.

    ``slope_fn`` overrides the slope of a dimension vector (a hook for negative
    controls); by default it is :meth:`StabilityData.slope`.
    """

    def __init__(self, catalog: Catalog, data: Optional[StabilityData] = None, slope_fn: Optional[Callable] = None):
        self.catalog = catalog
        self.data = data or StabilityData.from_config(catalog.config)
        self._slope_fn = slope_fn or self.data.slope
        self._slope_cache = {}
        self._hn_cache = {}
        self._member_cache = {}
        self.exceptional = frozenset(catalog.config.exceptional)

    # -- slopes -----------------------------------------------------------------

    def slope(self, d) -> SlopeValue:
        d = tuple(d)
        if d not in self._slope_cache:
            self._slope_cache[d] = self._slope_fn(d)
        return self._slope_cache[d]

    def realized_slopes(self):
        """Distinct slopes of nonzero dimension vectors in the box, descending."""
        return sorted({self.slope(d) for d in self.catalog.grades if any(d)}, reverse=True)

    # -- lattice helpers ----------------------------------------------------------

    def _zero_sub(self, G: IsoClass) -> Subobject:
        for s in self.catalog.subobjects(G):
            if not any(s.dims):
                return s
        raise AssertionError("zero subobject missing")  # pragma: no cover

    def _full_sub(self, G: IsoClass) -> Subobject:
        for s in self.catalog.subobjects(G):
            if s.dims == G.dims:
                return s
        raise AssertionError("full subobject missing")  # pragma: no cover

    def _between(self, G, inner: Subobject, outer: Subobject):
        return [s for s in self.catalog.subobjects(G) if outer.contains(s) and s.contains(inner)]

    def subquotient_semistable(self, G, inner: Subobject, outer: Subobject) -> bool:
        """Semistability of ``outer / inner``: every proper nonzero sub has slope <= its quotient."""
        for s in self._between(G, inner, outer):
            if s.dims == inner.dims or s.dims == outer.dims:
                continue
            if self.slope(_diff(s.dims, inner.dims)) > self.slope(_diff(outer.dims, s.dims)):
                return False
        return True

    # -- semistability & HN ---------------------------------------------------------

    def is_semistable(self, G: IsoClass) -> bool:
        if G.is_zero:
            return True
        return self.subquotient_semistable(G, self._zero_sub(G), self._full_sub(G))

    def is_semistable_by_subslope(self, G: IsoClass) -> bool:
        """The second characterisation: slope(A) <= slope(G) for every proper nonzero A."""
        if G.is_zero:
            return True
        mu = self.slope(G.dims)
        return all(
            self.slope(s.dims) <= mu for s in self.catalog.subobjects(G) if any(s.dims) and s.dims != G.dims
        )

    def hn(self, G: IsoClass) -> HNFiltration:
        if G.id in self._hn_cache:
            return self._hn_cache[G.id]
        subs = self.catalog.subobjects(G)
        current = self._zero_sub(G)
        steps = []
        while current.dims != G.dims:
            cands = [s for s in subs if s.contains(current) and s.dims != current.dims]
            best = max(self.slope(_diff(s.dims, current.dims)) for s in cands)
            top = [s for s in cands if self.slope(_diff(s.dims, current.dims)) == best]
            size = max(sum(s.dims) for s in top)
            chosen = [s for s in top if sum(s.dims) == size]
            if len(chosen) != 1:
                raise ModelViolation(
                    f"HN of {G.id}: {len(chosen)} maximal destabilizers of slope {best!r} above {current.dims}"
                )
            steps.append(chosen[0])
            current = chosen[0]
        quotients, slopes = [], []
        prev = self._zero_sub(G)
        for s in steps:
            if not self.subquotient_semistable(G, prev, s):
                raise ModelViolation(f"HN of {G.id}: quotient {s.dims} / {prev.dims} not semistable")
            quotients.append(self.catalog.subquotient(G, prev, s).id)
            slopes.append(self.slope(_diff(s.dims, prev.dims)))
            prev = s
        if any(a <= b for a, b in zip(slopes, slopes[1:])):
            raise ModelViolation(f"HN of {G.id}: slopes {slopes} not strictly decreasing")
        filt = HNFiltration(G.id, tuple(steps), tuple(quotients), tuple(slopes))
        self._hn_cache[G.id] = filt
        return filt

    def hn_slopes(self, G: IsoClass):
        return () if G.is_zero else self.hn(G).slopes

    # -- subcategories ---------------------------------------------------------------

    def contains(self, spec, G: IsoClass) -> bool:
        key = (spec, G.id)
        if key not in self._member_cache:
            self._member_cache[key] = self._contains(spec, G)
        return self._member_cache[key]

    def _contains(self, spec, G: IsoClass) -> bool:
        if G.is_zero:
            return True
        if isinstance(spec, AllObjects):
            return True
        if isinstance(spec, SerreSupport):
            return all(d == 0 or v in spec.vertices for v, d in enumerate(G.dims))
        if isinstance(spec, SlopeInterval):
            return all(mu in spec for mu in self.hn_slopes(G))
        if isinstance(spec, ClassSet):
            return G.id in spec.ids
        if isinstance(spec, Perp):
            for T in self.catalog:
                if not T.is_zero and self.contains(spec.of, T) and self.catalog.hom_dim(T, G):
                    return False
            return True
        raise TypeError(f"unknown subcategory spec {spec!r}")

    def members(self, spec):
        return [G for G in self.catalog if self.contains(spec, G)]

    def serre_pair(self):
        P = SerreSupport(self.exceptional)
        return P, Perp(P)

    @staticmethod
    def slope_pair(t=HALF_INF):
        return SlopeInterval.at_least(t), SlopeInterval.below(t)

    def torsion_candidates(self, G: IsoClass, P, Q):
        return [
            s for s in self.catalog.subobjects(G)
            if self.contains(P, self.catalog[s.sub]) and self.contains(Q, self.catalog[s.quot])
        ]

    def torsion_split(self, G: IsoClass, P, Q):
        """The unique (T, F) with T ⊆ G in P and G/T in Q, as class ids."""
        cands = self.torsion_candidates(G, P, Q)
        if len(cands) != 1:
            raise TorsionPairViolation(f"{G.id} has {len(cands)} splittings for ({P!r}, {Q!r})")
        return cands[0].sub, cands[0].quot

    # -- audits --------------------------------------------------------------------

    def validate_torsion_pair(self, P, Q) -> Report:
        cat = self.catalog
        rep = Report(f"torsion-pair {P!r} | {Q!r}")
        Pm = [G for G in cat if not G.is_zero and self.contains(P, G)]
        Qm = [G for G in cat if not G.is_zero and self.contains(Q, G)]
        for T in Pm:
            for F in Qm:
                h = cat.hom_dim(T, F)
                if h:
                    rep.add("hom-orthogonal", f"{T.id}->{F.id}", False, {"hom_dim": h})
        rep.add("hom-orthogonal", "all", True, {"pairs": len(Pm) * len(Qm)})
        for G in cat:
            n = len(self.torsion_candidates(G, P, Q))
            rep.add("unique-splitting", G.id, n == 1, {"splittings": n})
            subs = cat.subobjects(G)
            inP, inQ = self.contains(P, G), self.contains(Q, G)
            if inP:
                bad = sorted({s.quot for s in subs if not self.contains(P, cat[s.quot])})
                rep.add("P-quotient-closed", G.id, not bad, {"quotients_outside": bad} if bad else None)
            else:
                ext = [s for s in subs if self.contains(P, cat[s.sub]) and self.contains(P, cat[s.quot])]
                rep.add("P-extension-closed", G.id, not ext,
                        {"extension_of": [ext[0].sub, ext[0].quot]} if ext else None)
            if inQ:
                bad = sorted({s.sub for s in subs if not self.contains(Q, cat[s.sub])})
                rep.add("Q-sub-closed", G.id, not bad, {"subs_outside": bad} if bad else None)
            else:
                ext = [s for s in subs if self.contains(Q, cat[s.sub]) and self.contains(Q, cat[s.quot])]
                rep.add("Q-extension-closed", G.id, not ext,
                        {"extension_of": [ext[0].sub, ext[0].quot]} if ext else None)
        return rep

    def seesaw_audit(self) -> Report:
        """Every short exact sequence 0 -> A -> G -> B -> 0 with A, B nonzero satisfies
        slope(A) <= slope(G) <= slope(B) or the reverse chain."""
        rep = Report("weak-seesaw")
        seen = set()
        count = 0
        for G in self.catalog:
            for s in self.catalog.subobjects(G):
                if not any(s.dims) or s.dims == G.dims:
                    continue
                count += 1
                key = (s.dims, G.dims)
                if key in seen:
                    continue
                seen.add(key)
                a, g, b = self.slope(s.dims), self.slope(G.dims), self.slope(_diff(G.dims, s.dims))
                if not (a <= g <= b or a >= g >= b):
                    rep.add("seesaw", G.id, False, {"sub": s.sub, "slopes": [a, g, b]})
        rep.add("seesaw", "all", not rep.failures, {"sequences": count, "dimension_patterns": len(seen)})
        return rep

    def compare_pqss(self) -> Report:
        """Serre-support pair versus the slope-threshold pair at HALF_INF, classwise."""
        rep = Report("pqss")
        P, Q = self.serre_pair()
        Ps, Qs = self.slope_pair()
        for G in self.catalog:
            try:
                ok_p = self.contains(P, G) == self.contains(Ps, G)
                ok_q = self.contains(Q, G) == self.contains(Qs, G)
            except ModelViolation as exc:
                rep.add("pqss", G.id, False, {"error": str(exc)})
                continue
            rep.add("P=SS(>=inf/2)", G.id, ok_p, None if ok_p else {"serre": self.contains(P, G)})
            rep.add("Q=SS(<inf/2)", G.id, ok_q, None if ok_q else {"perp": self.contains(Q, G)})
        return rep

    def hom_slope_check(self) -> Report:
        """Semistable F, G with slope(F) > slope(G) admit no nonzero map F -> G."""
        rep = Report("hom-slope")
        ss = [G for G in self.catalog if not G.is_zero and self.is_semistable(G)]
        pairs = 0
        for F in ss:
            for G in ss:
                if self.slope(F.dims) > self.slope(G.dims):
                    pairs += 1
                    h = self.catalog.hom_dim(F, G)
                    if h:
                        rep.add("hom-vanishes", f"{F.id}->{G.id}", False, {"hom_dim": h})
        rep.add("hom-vanishes", "all", not rep.failures, {"pairs": pairs})
        return rep

    def semistability_criteria_report(self) -> Report:
        rep = Report("semistability-criteria")
        for G in self.catalog:
            a, b = self.is_semistable(G), self.is_semistable_by_subslope(G)
            rep.add("quotient-vs-sub", G.id, a == b, None if a == b else {"by_quotient": a, "by_sub": b})
        return rep

    def endpoint_slopes_report(self) -> Report:
        """slope(Q_1) >= slope(G) >= slope(Q_N) along every HN filtration."""
        rep = Report("hn-endpoints")
        for G in self.catalog:
            if G.is_zero:
                continue
            s = self.hn(G).slopes
            mu = self.slope(G.dims)
            ok = s[0] >= mu >= s[-1]
            rep.add("endpoints", G.id, ok, None if ok else {"first": s[0], "slope": mu, "last": s[-1]})
        return rep

    def interval_closure_report(self, spec) -> Report:
        """Extensions of two members of ``spec`` are members."""
        rep = Report(f"extension-closure {spec!r}")
        cat = self.catalog
        for G in cat:
            if self.contains(spec, G):
                continue
            ext = [s for s in cat.subobjects(G) if self.contains(spec, cat[s.sub]) and self.contains(spec, cat[s.quot])]
            rep.add("closed", G.id, not ext, {"extension_of": [ext[0].sub, ext[0].quot]} if ext else None)
        return rep

    def threshold_pairs_report(self) -> Report:
        """(SS(>= t), SS(< t)) is a torsion pair for every realized slope t."""
        rep = Report("threshold-torsion-pairs")
        for t in self.realized_slopes():
            sub = self.validate_torsion_pair(*self.slope_pair(t))
            rep.add("torsion-pair", t, sub.passed, {"failures": sub.failures[:5]} if not sub.passed else None)
        return rep
