"""Integration map, partition series and the multiplicativity defect.

The integration map sends a Hall element a to

    I(a) = sum_G  a(G) / |Aut G|  *  x^(dim G, theta(dim G))

in the cone-graded series algebra, with beta the dimension vector and n the
theta value.  This is a finitary surrogate with the microlocal weight nu set
identically to 1 (groupoid cardinality only): no symmetric obstruction theory
exists in this model, so no signs are invented.

The partition series are DT = I(H), DT_exc = I(H_exc) and TP = I(H^pi), and the
defect is DT - DT_exc * TP.  The product formula is a diagnostic here, not a
theorem: in the geometric setting its proof ends with a Poisson bracket
vanishing in the semiclassical limit, which has no counterpart at finite q.
The defect must vanish at grade 0 and at single-sided grades (every class
supported on S, or every class supported off S); elsewhere it is reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .hall import HallAlgebra, HallElement
from .reports import Report
from .series import ConeClass, TruncatedSeries, TruncationBox, mul, sign_twist

NU_NOTE = "nu = 1 surrogate: groupoid-weighted counts, no microlocal weight"
DEFECT_NOTE = (
    "product formula reported as a diagnostic only; its vanishing in geometry relies on a Poisson "
    "bracket vanishing argument that is outside this finite-field model"
)


def series_box(algebra: HallAlgebra) -> TruncationBox:
    """Cone box holding (d, theta(d)) for every dimension vector d of the catalog box.

    The n-window slides with |d| at slope ``min(0, min theta_v)`` so that the
    classes outside the box form an ideal; see :mod:`finhall.series`.
    """
    box = algebra.catalog.box
    theta = algebra.stability.data.theta
    n_min = min(0, min(theta))
    n_max = max((algebra.stability.data.theta_of(d) - n_min * sum(d) for d in box.betas()), default=0)
    return TruncationBox(box.beta_max, n_min, n_max, box.total_max)


def integrate(a: HallElement, box: TruncationBox = None) -> TruncatedSeries:
    alg = a.algebra
    box = box or series_box(alg)
    coeffs = {}
    for cid, v in a.items():
        G = alg.catalog[cid]
        if not G.aut_order:
            raise ValueError(f"missing automorphism order for {cid}")
        c = ConeClass(G.dims, alg.stability.data.theta_of(G.dims))
        coeffs[c] = coeffs.get(c, 0) + v / G.aut_order
    return TruncatedSeries(box, coeffs)


def single_sided_grades(algebra: HallAlgebra):
    """Dimension vectors supported inside S or disjoint from S (zero included)."""
    S = algebra.stability.exceptional
    out = []
    for d in algebra.catalog.grades:
        supp = {v for v, x in enumerate(d) if x}
        if supp <= S or not (supp & S):
            out.append(d)
    return out


@dataclass(frozen=True)
class PartitionReport:
    dt: TruncatedSeries
    dt_exc: TruncatedSeries
    tp: TruncatedSeries
    defect: TruncatedSeries
    sign_twisted: bool
    single_sided: tuple

    def recomputed_defect(self) -> TruncatedSeries:
        return self.dt - mul(self.dt_exc, self.tp)

    def defect_at(self, beta) -> dict:
        return self.defect.grade(beta)

    def vanishing_report(self) -> Report:
        rep = Report("partition-defect", info={"nu": NU_NOTE, "note": DEFECT_NOTE, "sign_twisted": self.sign_twisted})
        rep.add("defect-recomputable", "defect", self.defect == self.recomputed_defect())
        for beta in self.single_sided:
            g = self.defect.grade(beta)
            rep.add("defect-vanishes", list(beta), not g, {"defect": g} if g else None)
        others = sorted({c.beta for c in self.defect.support()} - set(self.single_sided))
        rep.info["nonzero_defect_grades"] = [list(b) for b in others]
        return rep

    def series(self):
        return {"dt": self.dt, "dt_exc": self.dt_exc, "tp": self.tp, "defect": self.defect}

    def table(self) -> str:
        """Fixed-width table: one row per cone class with any nonzero entry."""
        named = self.series()
        classes = sorted(set().union(*(s.support() for s in named.values())))
        head = f"{'beta':>12} {'n':>4} {'DT':>12} {'DT_exc':>12} {'TP':>12} {'defect':>12}"
        lines = [f"# {NU_NOTE}", f"# {DEFECT_NOTE}", f"# sign_twisted={self.sign_twisted}", head]
        for c in classes:
            vals = " ".join(f"{str(named[k][c]):>12}" for k in ("dt", "dt_exc", "tp", "defect"))
            lines.append(f"{','.join(map(str, c.beta)):>12} {c.n:>4} {vals}")
        return "\n".join(lines) + "\n"


def partition_report(algebra: HallAlgebra, sign_twisted: bool = False) -> PartitionReport:
    box = series_box(algebra)
    dt = integrate(algebra.hilb(), box)
    dt_exc = integrate(algebra.hilb_exc(), box)
    tp = integrate(algebra.pi_hilb(), box)
    if sign_twisted:
        dt, dt_exc, tp = sign_twist(dt), sign_twist(dt_exc), sign_twist(tp)
    defect = dt - mul(dt_exc, tp)
    return PartitionReport(dt, dt_exc, tp, defect, sign_twisted, tuple(single_sided_grades(algebra)))


def riedtmann_audit(algebra: HallAlgebra) -> Report:
    """sum_G F^G_{A,B} / |Aut G| = q^ext(B,A) / (q^hom(B,A) |Aut A| |Aut B|)
    for every class pair whose dimension vectors add up inside the box."""
    cat = algebra.catalog
    q = cat.q
    rep = Report("riedtmann")
    sums = {}
    for G in cat:
        for (a, b), n in cat.hall_table(G).items():
            sums[a, b] = sums.get((a, b), 0) + Fraction(n, G.aut_order)
    pairs = 0
    for A in cat:
        for B in cat:
            d = tuple(x + y for x, y in zip(A.dims, B.dims))
            if d not in cat.grades:
                continue
            pairs += 1
            lhs = sums.get((A.id, B.id), Fraction(0))
            rhs = Fraction(q ** cat.ext_dim(B, A), q ** cat.hom_dim(B, A) * A.aut_order * B.aut_order)
            if lhs != rhs:
                rep.add("riedtmann", f"{A.id},{B.id}", False, {"lhs": lhs, "rhs": rhs})
    rep.add("riedtmann", "all", not rep.failures, {"pairs": pairs})
    return rep
