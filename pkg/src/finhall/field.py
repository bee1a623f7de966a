"""Finite fields F_q given by lookup tables, and dense linear algebra over them.

Elements are the integers ``0 .. q-1``.  For ``q = p**k`` an element encodes the
coefficients of a polynomial of degree < k in base p (constant term is the
least significant digit); the field is F_p[x] modulo a monic irreducible
polynomial.  All arithmetic goes through precomputed ``add``/``mul`` tables so
results are bit-exact on every platform.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

from .errors import ConfigError


def factor_prime_power(q: int):
    """Return ``(p, k)`` with ``q == p**k``, or ``None`` if q is not a prime power."""
    if q < 2:
        return None
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, rest = 0, q
    while rest % p == 0:
        rest //= p
        k += 1
    return (p, k) if rest == 1 else None


def _polymulmod(a, b, p, modulus):
    # a, b: coefficient lists (low -> high) of length k; modulus monic of degree k
    k = len(modulus) - 1
    prod = [0] * (2 * k - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for deg in range(len(prod) - 1, k - 1, -1):
        c = prod[deg]
        if c:
            for i in range(k + 1):
                prod[deg - k + i] = (prod[deg - k + i] - c * modulus[i]) % p
    return prod[:k]


def _is_irreducible(poly, p):
    k = len(poly) - 1
    if k <= 1:
        return True
    for d in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            divisor = list(low) + [1]
            # long division of poly by divisor
            rem = list(poly)
            for deg in range(k, d - 1, -1):
                c = rem[deg]
                if c:
                    for i in range(d + 1):
                        rem[deg - d + i] = (rem[deg - d + i] - c * divisor[i]) % p
            if not any(rem[:d]):
                return False
    return True


def smallest_irreducible(p: int, k: int):
    """Lexicographically smallest monic irreducible polynomial of degree k over F_p.

    Candidates ``x^k + c_{k-1} x^{k-1} + ... + c_0`` are ordered by the integer
    ``sum c_i p^i``; coefficients are returned low -> high, leading 1 included.
    """
    for code in range(p**k):
        low = [(code // p**i) % p for i in range(k)]
        poly = low + [1]
        if _is_irreducible(poly, p):
            return tuple(poly)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class GF:
    """The finite field with q elements."""

    def __init__(self, q: int, poly=None):
        pk = factor_prime_power(q)
        if pk is None:
            raise ConfigError(f"q={q} is not a prime power")
        self.q = q
        self.p, self.k = pk
        if self.k == 1:
            self.poly = (0, 1)
        elif poly is None:
            self.poly = smallest_irreducible(self.p, self.k)
        else:
            poly = tuple(int(c) % self.p for c in poly)
            if len(poly) != self.k + 1 or poly[-1] != 1:
                raise ConfigError(f"field polynomial {list(poly)} must be monic of degree {self.k}")
            if not _is_irreducible(poly, self.p):
                raise ConfigError(f"field polynomial {list(poly)} is reducible over F_{self.p}")
            self.poly = poly
        self._build_tables()

    def _build_tables(self):
        q, p, k = self.q, self.p, self.k
        digits = [[(e // p**i) % p for i in range(k)] for e in range(q)]

        def encode(ds):
            return sum(d * p**i for i, d in enumerate(ds))

        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(q):
                add[a, b] = encode([(x + y) % p for x, y in zip(digits[a], digits[b])])
                if k == 1:
                    mul[a, b] = (a * b) % p
                else:
                    mul[a, b] = encode(_polymulmod(digits[a], digits[b], p, self.poly))
        self.add_table = add
        self.mul_table = mul
        self.neg_table = np.array([int(np.flatnonzero(add[a] == 0)[0]) for a in range(q)], dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.flatnonzero(mul[a] == 1)[0])
        self.inv_table = inv
        for table in (add, mul, self.neg_table, inv):
            table.setflags(write=False)

    def __repr__(self):
        return f"GF({self.q})"

    def __eq__(self, other):
        return isinstance(other, GF) and (self.q, self.poly) == (other.q, other.poly)

    def __hash__(self):
        return hash((self.q, self.poly))

    # -- scalar / elementwise -------------------------------------------------

    def add(self, a, b):
        return self.add_table[a, b]

    def sub(self, a, b):
        return self.add_table[a, self.neg_table[b]]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def neg(self, a):
        return self.neg_table[a]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("inverse of 0 in a finite field")
        return self.inv_table[a]

    @cached_property
    def primitive_element(self) -> int:
        for g in range(1, self.q):
            x, seen = 1, set()
            for _ in range(self.q - 1):
                x = int(self.mul_table[x, g])
                seen.add(x)
            if len(seen) == self.q - 1:
                return g
        raise AssertionError("no primitive element")  # pragma: no cover

    # -- matrices ---------------------------------------------------------------

    def matmul(self, A, B):
        """Matrix product; also broadcasts over leading batch axes of ``B``."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        m, n = A.shape[-2], A.shape[-1]
        out_shape = np.broadcast_shapes(A.shape[:-2], B.shape[:-2]) + (m, B.shape[-1])
        acc = np.zeros(out_shape, dtype=np.int64)
        for j in range(n):
            term = self.mul_table[A[..., :, j, None], B[..., None, j, :]]
            acc = self.add_table[acc, term]
        return acc

    def matvec(self, A, x):
        return self.matmul(A, np.asarray(x, dtype=np.int64)[:, None])[:, 0]

    def rref(self, A):
        """Reduced row echelon form; returns ``(R, pivots)`` with zero rows dropped."""
        R = np.array(A, dtype=np.int64, copy=True)
        if R.ndim != 2:
            raise ValueError("rref expects a 2-d array")
        rows, cols = R.shape
        pivots = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            nz = np.flatnonzero(R[r:, c])
            if nz.size == 0:
                continue
            piv = r + int(nz[0])
            if piv != r:
                R[[r, piv]] = R[[piv, r]]
            R[r] = self.mul_table[self.inv_table[R[r, c]], R[r]]
            for i in range(rows):
                if i != r and R[i, c]:
                    factor = self.neg_table[R[i, c]]
                    R[i] = self.add_table[R[i], self.mul_table[factor, R[r]]]
            pivots.append(c)
            r += 1
        return R[:r], tuple(pivots)

    def rank(self, A) -> int:
        A = np.asarray(A)
        if A.size == 0:
            return 0
        return len(self.rref(A)[1])

    def nullspace(self, A, ncols=None):
        """Basis of ``{x : A x = 0}`` as the rows of the returned array."""
        A = np.asarray(A, dtype=np.int64)
        if ncols is None:
            ncols = A.shape[1]
        if A.size == 0:
            return np.eye(ncols, dtype=np.int64)
        R, pivots = self.rref(A)
        free = [c for c in range(ncols) if c not in pivots]
        basis = np.zeros((len(free), ncols), dtype=np.int64)
        for i, f in enumerate(free):
            basis[i, f] = 1
            for row, pc in enumerate(pivots):
                basis[i, pc] = self.neg_table[R[row, f]]
        return basis

    def inverse(self, A):
        A = np.asarray(A, dtype=np.int64)
        n = A.shape[0]
        R, pivots = self.rref(np.hstack([A, np.eye(n, dtype=np.int64)]))
        if pivots[:n] != tuple(range(n)) or len(pivots) < n:
            raise ZeroDivisionError("singular matrix")
        return R[:n, n:]

    def combinations(self, basis):
        """All F_q-linear combinations of the rows of ``basis`` (shape (q^k, n))."""
        basis = np.asarray(basis, dtype=np.int64)
        k = basis.shape[0]
        coeffs = index_digits(np.arange(self.q**k, dtype=np.int64), self.q, k)
        if k == 0:
            return np.zeros((1, basis.shape[1]), dtype=np.int64)
        return self.matmul(coeffs, basis)

    # -- subspaces --------------------------------------------------------------

    def subspaces(self, n: int):
        """All subspaces of F_q^n, each given by its RREF basis, ordered by (dim, basis)."""
        cache = self.__dict__.setdefault("_subspace_cache", {})
        if n not in cache:
            cache[n] = tuple(self._enumerate_subspaces(n))
        return cache[n]

    def _enumerate_subspaces(self, n):
        for k in range(n + 1):
            for pivots in itertools.combinations(range(n), k):
                slots = [(r, c) for r, pc in enumerate(pivots) for c in range(pc + 1, n) if c not in pivots]
                for values in itertools.product(range(self.q), repeat=len(slots)):
                    R = np.zeros((k, n), dtype=np.int64)
                    for r, pc in enumerate(pivots):
                        R[r, pc] = 1
                    for (r, c), v in zip(slots, values):
                        R[r, c] = v
                    R.setflags(write=False)
                    yield Subspace(self, R, pivots)

    def count_subspaces(self, n: int, k: int) -> int:
        """Gaussian binomial coefficient [n choose k]_q."""
        num = den = 1
        for i in range(k):
            num *= self.q ** (n - i) - 1
            den *= self.q ** (i + 1) - 1
        return num // den

    def gl_order(self, n: int) -> int:
        out = 1
        for i in range(n):
            out *= self.q**n - self.q**i
        return out


def index_digits(indices, q, n):
    """Base-q digits of each index, most significant first (shape (len, n))."""
    indices = np.asarray(indices, dtype=np.int64)
    out = np.zeros(indices.shape + (n,), dtype=np.int64)
    rest = indices.copy()
    for i in range(n - 1, -1, -1):
        out[..., i] = rest % q
        rest //= q
    return out


def digits_index(digits, q):
    """Inverse of :func:`index_digits`."""
    digits = np.asarray(digits, dtype=np.int64)
    n = digits.shape[-1]
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return digits @ powers


class Subspace:
    """A subspace of F_q^n stored as an RREF basis plus a membership bitmask."""

    __slots__ = ("field", "basis", "pivots", "n", "_mask")

    def __init__(self, field: GF, basis, pivots):
        self.field = field
        self.basis = basis
        self.pivots = tuple(pivots)
        self.n = basis.shape[1] if basis.ndim == 2 else 0
        self._mask = None

    @classmethod
    def span(cls, field: GF, vectors, n: int):
        vectors = np.asarray(vectors, dtype=np.int64)
        vectors = vectors.reshape(-1, n) if n else np.zeros((0, 0), dtype=np.int64)
        if vectors.shape[0] == 0:
            R, piv = np.zeros((0, n), dtype=np.int64), ()
        else:
            R, piv = field.rref(vectors)
        R.setflags(write=False)
        return cls(field, R, piv)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    @property
    def key(self):
        return (self.n, self.basis.tobytes(), self.pivots)

    @property
    def mask(self) -> int:
        if self._mask is None:
            codes = digits_index(self.field.combinations(self.basis.reshape(self.dim, self.n)), self.field.q)
            m = 0
            for c in codes.tolist():
                m |= 1 << c
            self._mask = m
        return self._mask

    def contains_vector(self, x) -> bool:
        return bool((self.mask >> int(digits_index(x, self.field.q))) & 1)

    def contains(self, other: "Subspace") -> bool:
        return other.mask & ~self.mask == 0

    def coordinates(self, x):
        """Coordinates of a member vector in the RREF basis (the pivot entries)."""
        x = np.asarray(x, dtype=np.int64)
        return x[..., list(self.pivots)]

    @property
    def complement_columns(self):
        return tuple(c for c in range(self.n) if c not in self.pivots)

    def reduce(self, x):
        """Coordinates of the class of ``x`` in F_q^n / self, w.r.t. the unit vectors
        at the non-pivot columns."""
        f = self.field
        x = np.array(x, dtype=np.int64, copy=True)
        for row, pc in enumerate(self.pivots):
            c = x[..., pc]
            x = f.add_table[x, f.mul_table[f.neg_table[c][..., None], self.basis[row]]]
        return x[..., list(self.complement_columns)]

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, n={self.n}, basis={self.basis.tolist()})"
