"""Exact truncated power series graded by cone classes (beta, n).

A class is a non-negative multi-index ``beta`` (curve-class coordinates) and
an integer ``n``.  Series are finite maps class -> Fraction inside a
:class:`TruncationBox`.  For each beta the admissible n form a window that
slides with the degree ``|beta| = sum(beta)``::

    n_min * |beta|  <=  n  <=  n_min * |beta| + n_max

so n may go negative (down to ``n_min`` per unit of degree) while, for fixed
beta, it is always bounded below.  The window is chosen so that the set of
classes *outside* the box is closed under adding any admissible class:
truncation is then a ring homomorphism and products stay associative.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .errors import BoxMismatchError, ConfigError, DomainError, NotInvertibleError

SCHEMA = "cone-series/1"


@dataclass(frozen=True, order=True)
class ConeClass:
    beta: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))
        object.__setattr__(self, "n", int(self.n))

    def __add__(self, other: "ConeClass") -> "ConeClass":
        if len(self.beta) != len(other.beta):
            raise ValueError("cone classes of different rank")
        return ConeClass(tuple(a + b for a, b in zip(self.beta, other.beta)), self.n + other.n)

    @property
    def degree(self) -> int:
        return sum(self.beta)

    @property
    def is_effective(self) -> bool:
        return all(b >= 0 for b in self.beta)

    @classmethod
    def zero(cls, rank: int) -> "ConeClass":
        return cls((0,) * rank, 0)

    def __repr__(self):
        return f"({','.join(map(str, self.beta))};{self.n})"


@dataclass(frozen=True)
class TruncationBox:
    """Finite window of cone classes; see the module docstring for the n-window."""

    beta_max: tuple
    n_min: int = 0
    n_max: int = 0
    total_max: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "beta_max", tuple(int(b) for b in self.beta_max))
        diags = []
        if any(b < 0 for b in self.beta_max):
            diags.append("beta_max entries must be >= 0")
        if self.n_max < 0:
            diags.append("n_max (width of the n-window) must be >= 0")
        if self.total_max is not None and self.total_max < 0:
            diags.append("total_max must be >= 0")
        if diags:
            raise ConfigError(diags)

    @property
    def rank(self) -> int:
        return len(self.beta_max)

    def contains_beta(self, beta) -> bool:
        if len(beta) != self.rank:
            return False
        if any(b < 0 or b > m for b, m in zip(beta, self.beta_max)):
            return False
        return self.total_max is None or sum(beta) <= self.total_max

    def n_window(self, beta):
        lo = self.n_min * sum(beta)
        return lo, lo + self.n_max

    def __contains__(self, c: ConeClass) -> bool:
        if not self.contains_beta(c.beta):
            return False
        lo, hi = self.n_window(c.beta)
        return lo <= c.n <= hi

    def betas(self):
        """All multi-indices in the box, in lexicographic order."""
        for beta in itertools.product(*(range(m + 1) for m in self.beta_max)):
            if self.total_max is None or sum(beta) <= self.total_max:
                yield beta

    def classes(self):
        for beta in self.betas():
            lo, hi = self.n_window(beta)
            for n in range(lo, hi + 1):
                yield ConeClass(beta, n)

    @property
    def max_degree(self) -> int:
        """Upper bound on ``|beta| + (n - n_min |beta|)`` over the box (nilpotency index)."""
        top = sum(self.beta_max) if self.total_max is None else min(self.total_max, sum(self.beta_max))
        return top + self.n_max

    def with_window(self, n_min: int, n_max: int) -> "TruncationBox":
        return TruncationBox(self.beta_max, n_min, n_max, self.total_max)

    def to_json(self):
        out = {"beta_max": list(self.beta_max)}
        if self.total_max is not None:
            out["total_max"] = self.total_max
        if self.n_min or self.n_max:
            out["n_min"] = self.n_min
            out["n_max"] = self.n_max
        return out

    @classmethod
    def from_json(cls, obj) -> "TruncationBox":
        return cls(tuple(obj["beta_max"]), obj.get("n_min", 0), obj.get("n_max", 0), obj.get("total_max"))


def validate_laurent(support: Iterable[ConeClass]) -> bool:
    """Laurent check for a finite support: each beta has a least n (automatic for
    finite sets) and every beta is effective."""
    return all(c.is_effective for c in support)


class TruncatedSeries:
    """Immutable element of the truncated cone algebra with Fraction coefficients."""

    __slots__ = ("box", "_coeffs")

    def __init__(self, box: TruncationBox, coeffs: Optional[Mapping[ConeClass, object]] = None):
        self.box = box
        clean = {}
        for c, v in (coeffs or {}).items():
            v = Fraction(v)
            if v == 0:
                continue
            if c not in box:
                raise ConfigError(f"class {c!r} outside truncation box {box.to_json()}")
            clean[c] = v
        self._coeffs = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def one(cls, box: TruncationBox) -> "TruncatedSeries":
        return cls(box, {ConeClass.zero(box.rank): 1})

    @classmethod
    def zero(cls, box: TruncationBox) -> "TruncatedSeries":
        return cls(box)

    @classmethod
    def monomial(cls, box: TruncationBox, beta, n, coeff=1) -> "TruncatedSeries":
        c = ConeClass(beta, n)
        return cls(box, {c: coeff} if c in box else {})

    # -- access ---------------------------------------------------------------

    @property
    def coeffs(self):
        return dict(self._coeffs)

    def items(self):
        return sorted(self._coeffs.items())

    def support(self):
        return sorted(self._coeffs)

    def __getitem__(self, c: ConeClass) -> Fraction:
        return self._coeffs.get(c, Fraction(0))

    def coefficient(self, beta, n) -> Fraction:
        return self[ConeClass(beta, n)]

    @property
    def constant_term(self) -> Fraction:
        return self[ConeClass.zero(self.box.rank)]

    def grade(self, beta) -> dict:
        """The n -> coefficient map at a fixed beta."""
        beta = tuple(beta)
        return {c.n: v for c, v in self._coeffs.items() if c.beta == beta}

    def is_zero(self) -> bool:
        return not self._coeffs

    def __eq__(self, other):
        return isinstance(other, TruncatedSeries) and self.box == other.box and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.box, frozenset(self._coeffs.items())))

    def __repr__(self):
        terms = " + ".join(f"{v}*x^{c!r}" for c, v in self.items()) or "0"
        return f"TruncatedSeries({terms})"

    # -- arithmetic -------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if other.box != self.box:
            raise BoxMismatchError(f"box mismatch: {self.box.to_json()} vs {other.box.to_json()}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = dict(self._coeffs)
        for c, v in other._coeffs.items():
            out[c] = out.get(c, 0) + v
        return TruncatedSeries(self.box, out)

    def __neg__(self):
        return TruncatedSeries(self.box, {c: -v for c, v in self._coeffs.items()})

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def scale(self, k) -> "TruncatedSeries":
        k = Fraction(k)
        return TruncatedSeries(self.box, {c: k * v for c, v in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        out = TruncatedSeries.one(self.box)
        for _ in range(k):
            out = mul(out, self)
        return out

    # -- serialization ---------------------------------------------------------

    def to_records(self):
        return [
            {"beta": list(c.beta), "n": c.n, "num": v.numerator, "den": v.denominator}
            for c, v in self.items()
        ]

    @classmethod
    def from_records(cls, box: TruncationBox, records) -> "TruncatedSeries":
        coeffs = {}
        for r in records:
            c = ConeClass(tuple(r["beta"]), r["n"])
            coeffs[c] = coeffs.get(c, 0) + Fraction(r["num"], r["den"])
        return cls(box, coeffs)

    def to_json(self, **header):
        return {"schema": SCHEMA, **header, "box": self.box.to_json(), "terms": self.to_records()}

    @classmethod
    def from_json(cls, obj) -> "TruncatedSeries":
        if obj.get("schema") != SCHEMA:
            raise ConfigError(f"not a {SCHEMA} document")
        return cls.from_records(TruncationBox.from_json(obj["box"]), obj["terms"])

    def dump(self, path, **header):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json(**header), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "TruncatedSeries":
        return cls.from_json(json.loads(Path(path).read_text()))


def mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Convolution product, keeping only classes inside the shared box."""
    if a.box != b.box:
        raise BoxMismatchError(f"box mismatch: {a.box.to_json()} vs {b.box.to_json()}")
    box = a.box
    out = {}
    for ca, va in a._coeffs.items():
        for cb, vb in b._coeffs.items():
            c = ca + cb
            if c in box:
                out[c] = out.get(c, 0) + va * vb
    return TruncatedSeries(box, out)


def invert(a: TruncatedSeries) -> TruncatedSeries:
    """Two-sided inverse via the geometric series in ``1 - a/a_0``."""
    a0 = a.constant_term
    if a0 == 0:
        raise NotInvertibleError("series has zero constant term")
    one = TruncatedSeries.one(a.box)
    nil = one - a.scale(1 / a0)
    total, power = one, one
    for _ in range(a.box.max_degree):
        power = mul(power, nil)
        if power.is_zero():
            break
        total = total + power
    return total.scale(1 / a0)


def exp_series(a: TruncatedSeries) -> TruncatedSeries:
    if a.constant_term != 0:
        raise DomainError("exp needs a series with zero constant term")
    total = power = TruncatedSeries.one(a.box)
    for k in range(1, a.box.max_degree + 1):
        power = mul(power, a)
        if power.is_zero():
            break
        total = total + power.scale(Fraction(1, math.factorial(k)))
    return total


def log_series(a: TruncatedSeries) -> TruncatedSeries:
    if a.constant_term != 1:
        raise DomainError("log needs a series with constant term exactly 1")
    x = a - TruncatedSeries.one(a.box)
    total = TruncatedSeries.zero(a.box)
    power = TruncatedSeries.one(a.box)
    for k in range(1, a.box.max_degree + 1):
        power = mul(power, x)
        if power.is_zero():
            break
        total = total + power.scale(Fraction((-1) ** (k + 1), k))
    return total


def sign_twist(a: TruncatedSeries) -> TruncatedSeries:
    """Multiply the coefficient at (beta, n) by (-1)^n."""
    return TruncatedSeries(a.box, {c: (-v if c.n % 2 else v) for c, v in a._coeffs.items()})
