"""Finite-precision arithmetic in tamely ramified towers over Q_p.

A tower is W[pi] with W the unramified extension of Z_p of degree f and
pi^e = p.  W is realised as Z_p[x]/(P) with P the integer lift of the least
irreducible polynomial defining GF(p^f), so residue classes of W are exactly
the codes of the corresponding ``FqField``.

An integral ring element is stored as a flat tuple of e*f integers: the
coefficient of x^i pi^j sits at index j*f + i.  A ``TameElement`` is
pi^shift times an integral element of valuation zero, known modulo
pi^(shift + rel).  Valuations and precisions are counted in pi-steps
internally and reported as fractions k/e, so ord(p) = 1.

Every equality here is a congruence at the stated precision.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .exactnum import lcm
from .ffield import FqField, get_field, least_irreducible

DEFAULT_PRECISION = 12


class PrecisionError(ArithmeticError):
    """The requested quantity is not determined at the available precision."""


class TowerMismatchError(ValueError):
    """Operands live in different towers."""


def _vp(c: int, p: int) -> int:
    if c == 0:
        raise ValueError("valuation of zero")
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


class TameTower:
    """The tower Q_p -> unramified of degree f -> pi with pi^e = p."""

    def __init__(self, p: int, f: int = 1, e: int = 1):
        if e < 1 or f < 1:
            raise ValueError("residue degree and ramification index must be positive")
        if e % p == 0:
            raise ValueError(f"ramification index {e} is wild for p = {p}")
        self.p = p
        self.f = f
        self.e = e
        self.residue: FqField = get_field(p, f)
        self.poly = least_irreducible(p, f)
        self.q = p**f
        self._teich_cache: dict[tuple[int, int], tuple[int, ...]] = {}

    # -- identity -----------------------------------------------------------

    def __repr__(self) -> str:
        return f"TameTower(p={self.p}, f={self.f}, e={self.e})"

    def __eq__(self, other) -> bool:
        return isinstance(other, TameTower) and (self.p, self.f, self.e) == (other.p, other.f, other.e)

    def __hash__(self) -> int:
        return hash((self.p, self.f, self.e))

    def to_json(self) -> dict:
        return {"p": self.p, "f": self.f, "e": self.e}

    @classmethod
    def from_json(cls, data: Mapping) -> "TameTower":
        return get_tower(int(data["p"]), int(data.get("f", 1)), int(data.get("e", 1)))

    # -- the unramified ring W mod p^M ----------------------------------------

    def _w_mul(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        f = self.f
        if f == 1:
            return [a[0] * b[0]]
        prod = [0] * (2 * f - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        prod[i + j] += ai * bj
        P = self.poly
        for k in range(2 * f - 2, f - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for i in range(f):
                    prod[k - f + i] -= c * P[i]
        return prod[:f]

    # -- integral ring R = W[pi] ----------------------------------------------

    def _zero_r(self) -> tuple[int, ...]:
        return (0,) * (self.e * self.f)

    def _r_mul(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        e, f, p = self.e, self.f, self.p
        if e == 1 and f == 1:
            return [a[0] * b[0]]
        out = [0] * (e * f)
        for j1 in range(e):
            A = a[j1 * f : (j1 + 1) * f]
            if not any(A):
                continue
            for j2 in range(e):
                B = b[j2 * f : (j2 + 1) * f]
                if not any(B):
                    continue
                prod = self._w_mul(A, B)
                j = j1 + j2
                if j >= e:
                    j -= e
                    prod = [p * c for c in prod]
                base = j * f
                for i in range(f):
                    out[base + i] += prod[i]
        return out

    def _r_reduce(self, a: Sequence[int], K: int) -> tuple[int, ...]:
        """Reduce modulo pi^K."""
        e, f, p = self.e, self.f, self.p
        out = []
        for j in range(e):
            m = -((j - K) // e)  # ceil((K - j) / e)
            mod = p**m if m > 0 else 1
            out.extend(c % mod for c in a[j * f : (j + 1) * f])
        return tuple(out)

    def _r_val(self, a: Sequence[int]) -> int | None:
        e, f, p = self.e, self.f, self.p
        best = None
        for j in range(e):
            for c in a[j * f : (j + 1) * f]:
                if c:
                    v = e * _vp(c, p) + j
                    if best is None or v < best:
                        best = v
        return best

    def _r_div_pi(self, a: Sequence[int]) -> list[int]:
        e, f, p = self.e, self.f, self.p
        head = a[:f]
        if any(c % p for c in head):
            raise ArithmeticError("element is not divisible by the uniformizer")
        return list(a[f:]) + [c // p for c in head]

    def _r_mul_pi(self, a: Sequence[int], k: int = 1) -> list[int]:
        e, f, p = self.e, self.f, self.p
        out = list(a)
        for _ in range(k):
            out = [p * c for c in out[(e - 1) * f :]] + out[: (e - 1) * f]
        return out

    def _r_residue(self, a: Sequence[int]) -> int:
        return self.residue.from_digits([c % self.p for c in a[: self.f]])

    def regular_matrix(self, a: Sequence[int]) -> list[list[int]]:
        """Matrix of multiplication by the integral element ``a`` on the basis x^i pi^j.

        Column b holds the coordinates of a * (basis vector b), so the
        matrix acts on column vectors of coordinates.
        """
        d = self.e * self.f
        cols = []
        for b in range(d):
            unit = [0] * d
            unit[b] = 1
            cols.append(self._r_mul(a, unit))
        return [[cols[b][i] for b in range(d)] for i in range(d)]

    # -- Teichmueller lifts ------------------------------------------------------

    def _teich_w(self, code: int, M: int) -> tuple[int, ...]:
        """Teichmueller lift of a residue code in W mod p^M."""
        key = (code, M)
        hit = self._teich_cache.get(key)
        if hit is not None:
            return hit
        mod = self.p**M
        z = list(self.residue.digits(code))
        if code:
            for _ in range(M):
                base, acc, ex = z, [1] + [0] * (self.f - 1), self.q
                while ex:
                    if ex & 1:
                        acc = [c % mod for c in self._w_mul(acc, base)]
                    base = [c % mod for c in self._w_mul(base, base)]
                    ex >>= 1
                z = acc
        out = tuple(c % mod for c in z)
        self._teich_cache[key] = out
        return out

    def teichmuller(self, code: int, prec: int = DEFAULT_PRECISION) -> "TameElement":
        """The Teichmueller lift of a residue code, to ``prec`` pi-steps."""
        M = -(-prec // self.e) + 1
        w = self._teich_w(code % self.q, M)
        return TameElement.from_integral(self, tuple(w) + (0,) * ((self.e - 1) * self.f), 0, prec)

    # -- constructors --------------------------------------------------------------

    def from_int(self, c: int, prec: int = DEFAULT_PRECISION) -> "TameElement":
        return TameElement.from_integral(self, (int(c),) + (0,) * (self.e * self.f - 1), 0, prec)

    def from_fraction(self, c: Fraction | int, prec: int = DEFAULT_PRECISION) -> "TameElement":
        """A rational number, known to absolute precision ``prec``."""
        c = Fraction(c)
        if c.denominator == 1:
            return self.from_int(c.numerator, prec)
        dv = self.e * _safe_vp(c.denominator, self.p)
        num = self.from_int(c.numerator, prec + dv)
        den = self.from_int(c.denominator, prec + 2 * dv)
        return (num * den.inverse()).with_precision(prec)

    def uniformizer(self, prec: int = DEFAULT_PRECISION) -> "TameElement":
        return TameElement.from_integral(self, self._one_r(), 1, prec)

    def pi_power(self, k: int, prec: int = DEFAULT_PRECISION) -> "TameElement":
        """pi^k with absolute precision ``prec`` (in pi-steps)."""
        return TameElement.from_integral(self, self._one_r(), k, prec)

    def one(self, prec: int = DEFAULT_PRECISION) -> "TameElement":
        return self.pi_power(0, prec)

    def zero(self, prec: int = DEFAULT_PRECISION) -> "TameElement":
        return TameElement(self, self._zero_r(), prec, 0)

    def _one_r(self) -> tuple[int, ...]:
        return (1,) + (0,) * (self.e * self.f - 1)

    def from_digits(self, digits: Mapping[int, int], prec: int) -> "TameElement":
        """sum_k [t_k] pi^k from a map k -> residue code t_k."""
        acc = self.zero(prec)
        for k, code in digits.items():
            if code % self.q and k < prec:
                acc = acc + self.teichmuller(code, prec - k) * self.pi_power(k, prec)
        return acc

    def from_json_digits(self, data: Mapping[str, int], prec: int) -> "TameElement":
        """Parse {"k/e": code} (or {"k": code} for valuation steps)."""
        digits: dict[int, int] = {}
        for key, code in data.items():
            r = Fraction(key)
            k = r * self.e
            if k.denominator != 1:
                raise ValueError(f"digit position {key} is not in (1/{self.e})Z")
            digits[int(k)] = digits.get(int(k), 0) + int(code)
        return self.from_digits(digits, prec)


def _safe_vp(c: int, p: int) -> int:
    return _vp(c, p) if c else 0


@lru_cache(maxsize=None)
def get_tower(p: int, f: int = 1, e: int = 1) -> TameTower:
    return TameTower(p, f, e)


class TameElement:
    """pi^shift * u with u a unit, known modulo pi^(shift + rel).

    The zero-at-precision class has rel = 0 and shift equal to the
    absolute precision.
    """

    __slots__ = ("tower", "u", "shift", "rel")

    def __init__(self, tower: TameTower, u: tuple[int, ...], shift: int, rel: int):
        self.tower = tower
        self.u = u
        self.shift = shift
        self.rel = rel

    @classmethod
    def from_integral(cls, tower: TameTower, a: Sequence[int], shift: int, K: int) -> "TameElement":
        """Normalise pi^shift * a where a is integral and known mod pi^K (K in pi-steps, absolute)."""
        rel = K - shift
        if rel <= 0:
            return cls(tower, tower._zero_r(), K, 0)
        a = tower._r_reduce(a, rel)
        v = tower._r_val(a)
        if v is None or v >= rel:
            return cls(tower, tower._zero_r(), K, 0)
        a = list(a)
        for _ in range(v):
            a = tower._r_div_pi(a)
        return cls(tower, tower._r_reduce(a, rel - v), shift + v, rel - v)

    # -- bookkeeping --------------------------------------------------------------

    @property
    def abs_steps(self) -> int:
        """Absolute precision in pi-steps."""
        return self.shift + self.rel

    @property
    def precision(self) -> Fraction:
        return Fraction(self.abs_steps, self.tower.e)

    def is_zero(self) -> bool:
        return self.rel == 0

    def val_steps(self) -> int | float:
        return math.inf if self.is_zero() else self.shift

    def ord(self) -> Fraction | float:
        """ord with ord(p) = 1; math.inf for zero at precision."""
        return math.inf if self.is_zero() else Fraction(self.shift, self.tower.e)

    def is_unit(self) -> bool:
        return not self.is_zero() and self.shift == 0

    def is_integral(self) -> bool:
        return self.is_zero() or self.shift >= 0

    def with_precision(self, K: int) -> "TameElement":
        """Lower the absolute precision to K pi-steps (never raises it)."""
        if K >= self.abs_steps:
            return self
        return TameElement.from_integral(self.tower, self.u, self.shift, K)

    def _check(self, other: "TameElement") -> None:
        if other.tower != self.tower:
            raise TowerMismatchError(f"{self.tower} vs {other.tower}")

    def _coerce(self, other) -> "TameElement":
        if isinstance(other, TameElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            T = self.tower
            v = 0 if c == 0 else T.e * (_safe_vp(c.numerator, T.p) - _safe_vp(c.denominator, T.p))
            return T.from_fraction(c, max(self.abs_steps, v + self.rel) + T.e)
        return NotImplemented

    # -- arithmetic ---------------------------------------------------------------

    def _integral_at(self, s: int) -> list[int]:
        """The integral element pi^(shift - s) u for s <= shift."""
        return self.tower._r_mul_pi(self.u, self.shift - s)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        K = min(self.abs_steps, other.abs_steps)
        s = min(self.shift, other.shift)
        if s >= K:
            return self.tower.zero(K)
        a = self._integral_at(s) if not self.is_zero() else list(self.tower._zero_r())
        b = other._integral_at(s) if not other.is_zero() else list(self.tower._zero_r())
        return TameElement.from_integral(self.tower, [x + y for x, y in zip(a, b)], s, K)

    __radd__ = __add__

    def __neg__(self) -> "TameElement":
        return TameElement(self.tower, self.tower._r_reduce([-c for c in self.u], self.rel), self.shift, self.rel)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            # x known mod pi^A times y of valuation v is known mod pi^(A + v)
            vx = self.abs_steps if self.is_zero() else self.shift
            vy = other.abs_steps if other.is_zero() else other.shift
            K = min(self.abs_steps + vy, other.abs_steps + vx)
            return self.tower.zero(K)
        rel = min(self.rel, other.rel)
        prod = self.tower._r_mul(self.u, other.u)
        return TameElement.from_integral(self.tower, prod, self.shift + other.shift, self.shift + other.shift + rel)

    __rmul__ = __mul__

    def inverse(self) -> "TameElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of an element that is zero at precision")
        T = self.tower
        r0 = T._r_residue(self.u)
        y = list(T._teich_w(T.residue.inv(r0), 1)) + [0] * ((T.e - 1) * T.f)
        y = list(T._r_reduce(y, 1))
        known = 1
        target = self.rel
        while known < target:
            known = min(2 * known, target)
            uy = T._r_mul(self.u, y)
            two_minus = [-c for c in uy]
            two_minus[0] += 2
            y = list(T._r_reduce(T._r_mul(y, two_minus), known))
        return TameElement(T, tuple(T._r_reduce(y, target)), -self.shift, self.rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int) -> "TameElement":
        if k < 0:
            return self.inverse() ** (-k)
        result = self.tower.one(self.abs_steps if not self.is_zero() else k * self.abs_steps + 1)
        base = self
        first = True
        while k:
            if k & 1:
                result = base if first else result * base
                first = False
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, TameElement):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("TameElement equality is a congruence at precision; not hashable")

    # -- digits -------------------------------------------------------------------

    def residue(self) -> int:
        """Residue code of an integral element (0 if it lies in the maximal ideal)."""
        if self.is_zero() or self.shift > 0:
            return 0
        if self.shift < 0:
            raise ValueError("residue of a non-integral element")
        return self.tower._r_residue(self.u)

    def digits(self) -> dict[int, int]:
        """Teichmueller digits {k: code} with self = sum [t_k] pi^k at precision."""
        T = self.tower
        out: dict[int, int] = {}
        if self.is_zero():
            return out
        a = list(self.u)
        k = self.shift
        K = self.abs_steps
        while k < K:
            t = T._r_residue(a)
            if t:
                out[k] = t
                M = -(-(K - k) // T.e) + 1
                lift = list(T._teich_w(t, M)) + [0] * ((T.e - 1) * T.f)
                a = [x - y for x, y in zip(a, lift)]
            k += 1
            if k < K:
                a = T._r_div_pi(T._r_reduce(a, K - k + 1))
        return out

    def to_json(self) -> dict:
        e = self.tower.e
        return {
            "digits": {_step_key(k, e): code for k, code in sorted(self.digits().items())},
            "precision": _step_key(self.abs_steps, e),
        }

    def __repr__(self) -> str:
        if self.is_zero():
            return f"O(pi^{self.abs_steps})"
        terms = " + ".join(f"[{c}]pi^{k}" for k, c in sorted(self.digits().items()))
        return f"{terms} + O(pi^{self.abs_steps})"


def _step_key(k: int, e: int) -> str:
    r = Fraction(k, e)
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


# ---------------------------------------------------------------------------
# matrices


class PadicMatrix:
    """An n x n matrix of TameElements over a common tower."""

    __slots__ = ("tower", "rows")

    def __init__(self, tower: TameTower, rows: Sequence[Sequence[TameElement]]):
        self.tower = tower
        self.rows = tuple(tuple(r) for r in rows)
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("PadicMatrix must be square")
        for r in self.rows:
            for a in r:
                if a.tower != tower:
                    raise TowerMismatchError("entries from a different tower")

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> TameElement:
        i, j = ij
        return self.rows[i][j]

    @classmethod
    def identity(cls, tower: TameTower, n: int, prec: int = DEFAULT_PRECISION) -> "PadicMatrix":
        one, zero = tower.one(prec), tower.zero(prec)
        return cls(tower, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_ints(cls, tower: TameTower, rows: Sequence[Sequence[int]], prec: int = DEFAULT_PRECISION) -> "PadicMatrix":
        return cls(tower, [[tower.from_int(c, prec) for c in r] for r in rows])

    @classmethod
    def diagonal(cls, tower: TameTower, entries: Sequence[TameElement], prec: int | None = None) -> "PadicMatrix":
        n = len(entries)
        K = prec if prec is not None else min(a.abs_steps for a in entries)
        zero = tower.zero(K)
        return cls(tower, [[entries[i] if i == j else zero for j in range(n)] for i in range(n)])

    def map(self, fn) -> "PadicMatrix":
        return PadicMatrix(self.tower, [[fn(a) for a in r] for r in self.rows])

    def precision_steps(self) -> int:
        return min(a.abs_steps for r in self.rows for a in r)

    def with_precision(self, K: int) -> "PadicMatrix":
        return self.map(lambda a: a.with_precision(K))

    def __add__(self, other: "PadicMatrix") -> "PadicMatrix":
        return PadicMatrix(self.tower, [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other: "PadicMatrix") -> "PadicMatrix":
        return PadicMatrix(self.tower, [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self) -> "PadicMatrix":
        return self.map(lambda a: -a)

    def scale(self, c: TameElement) -> "PadicMatrix":
        return self.map(lambda a: c * a)

    def __matmul__(self, other: "PadicMatrix") -> "PadicMatrix":
        n = self.n
        cols = list(zip(*other.rows))
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = r[0] * c[0]
                for k in range(1, n):
                    acc = acc + r[k] * c[k]
                row.append(acc)
            out.append(row)
        return PadicMatrix(self.tower, out)

    def __pow__(self, k: int) -> "PadicMatrix":
        if k < 0:
            return self.inverse() ** (-k)
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result @ base
            k >>= 1
            if k:
                base = base @ base
        return result if result is not None else PadicMatrix.identity(self.tower, self.n, self.precision_steps())

    def trace(self) -> TameElement:
        acc = self.rows[0][0]
        for i in range(1, self.n):
            acc = acc + self.rows[i][i]
        return acc

    def is_zero(self) -> bool:
        return all(a.is_zero() for r in self.rows for a in r)

    def equals(self, other: "PadicMatrix") -> bool:
        """Entrywise congruence at the common precision."""
        return (self - other).is_zero()

    def is_identity(self) -> bool:
        return self.equals(PadicMatrix.identity(self.tower, self.n, self.precision_steps()))

    def min_val_steps(self) -> int | float:
        return min(a.val_steps() for r in self.rows for a in r)

    def inverse(self) -> "PadicMatrix":
        """Gauss-Jordan elimination with pivots of least valuation."""
        n, T = self.n, self.tower
        K = self.precision_steps()
        A = [list(r) for r in self.rows]
        B = [list(r) for r in PadicMatrix.identity(T, n, K).rows]
        for col in range(n):
            piv = None
            for r in range(col, n):
                if not A[r][col].is_zero() and (piv is None or A[r][col].shift < A[piv][col].shift):
                    piv = r
            if piv is None:
                raise PrecisionError("matrix is singular at precision")
            A[col], A[piv] = A[piv], A[col]
            B[col], B[piv] = B[piv], B[col]
            inv = A[col][col].inverse()
            A[col] = [inv * a for a in A[col]]
            B[col] = [inv * b for b in B[col]]
            for r in range(n):
                if r != col and not A[r][col].is_zero():
                    c = A[r][col]
                    A[r] = [a - c * b for a, b in zip(A[r], A[col])]
                    B[r] = [a - c * b for a, b in zip(B[r], B[col])]
        return PadicMatrix(T, B)

    def det(self) -> TameElement:
        return _leibniz_det([list(r) for r in self.rows])

    def charpoly(self) -> list[TameElement]:
        """Coefficients c_0..c_n (low to high, monic) of det(t - A), division free."""
        n = self.n
        T = self.tower
        K = self.precision_steps()
        coeffs = [T.zero(K) for _ in range(n)] + [T.one(K)]
        for k in range(1, n + 1):
            acc = T.zero(K)
            for idx in itertools.combinations(range(n), k):
                acc = acc + _leibniz_det([[self.rows[i][j] for j in idx] for i in idx])
            coeffs[n - k] = acc if k % 2 == 0 else -acc
        return coeffs

    def to_json(self) -> list[list[dict]]:
        return [[a.to_json() for a in r] for r in self.rows]

    @classmethod
    def from_json(cls, tower: TameTower, data: Sequence[Sequence], prec: int) -> "PadicMatrix":
        def parse(entry):
            if isinstance(entry, int):
                return tower.from_int(entry, prec)
            if isinstance(entry, Mapping) and "digits" in entry:
                return tower.from_json_digits(entry["digits"], prec)
            return tower.from_json_digits(entry, prec)

        return cls(tower, [[parse(a) for a in r] for r in data])

    def __repr__(self) -> str:
        return "PadicMatrix(" + "; ".join(", ".join(repr(a) for a in r) for r in self.rows) + ")"


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def _leibniz_det(M: list[list[TameElement]]) -> TameElement:
    n = len(M)
    acc = None
    for perm in itertools.permutations(range(n)):
        term = M[0][perm[0]]
        for i in range(1, n):
            term = term * M[i][perm[i]]
        if _perm_sign(perm) < 0:
            term = -term
        acc = term if acc is None else acc + term
    return acc


# ---------------------------------------------------------------------------
# polynomials over a tower (coefficient lists, low to high)


def poly_mulmod(a: Sequence[TameElement], b: Sequence[TameElement], chi: Sequence[TameElement]) -> list[TameElement]:
    """a * b modulo the monic polynomial chi."""
    n = len(chi) - 1
    prod: list[TameElement | None] = [None] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            t = ai * bj
            prod[i + j] = t if prod[i + j] is None else prod[i + j] + t
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c is None or c.is_zero():
            continue
        for i in range(n):
            prod[k - n + i] = prod[k - n + i] - c * chi[i]
        prod[k] = None
    out = [c for c in prod[:n]]
    zero = chi[0].tower.zero(min(c.abs_steps for c in chi))
    return [c if c is not None else zero for c in out] + [zero] * (n - len(out))


def poly_powmod(a: Sequence[TameElement], k: int, chi: Sequence[TameElement]) -> list[TameElement]:
    n = len(chi) - 1
    T = chi[0].tower
    K = min(c.abs_steps for c in chi)
    result = [T.one(K)] + [T.zero(K)] * (n - 1)
    base = list(a)
    while k:
        if k & 1:
            result = poly_mulmod(result, base, chi)
        k >>= 1
        if k:
            base = poly_mulmod(base, base, chi)
    return result


def poly_eval_matrix(h: Sequence[TameElement], A: PadicMatrix) -> PadicMatrix:
    """Horner evaluation of h at the matrix A."""
    n = A.n
    K = A.precision_steps()
    acc = PadicMatrix.identity(A.tower, n, K).scale(h[-1])
    for c in reversed(h[:-1]):
        acc = acc @ A + PadicMatrix.identity(A.tower, n, K).scale(c)
    return acc


def root_valuations_min(chi: Sequence[TameElement]) -> tuple[Fraction | float, bool]:
    """Least valuation (in pi-steps) of a root of the monic polynomial chi.

    This is min_j v(c_j)/(n - j) over j < n.  Coefficients that are zero
    at precision only give lower bounds, so the result is (value, exact):
    ``value`` is always a certified lower bound on every root valuation,
    and ``exact`` says that it is attained.
    """
    n = len(chi) - 1
    best: Fraction | float = math.inf
    bound: Fraction | float = math.inf
    for j in range(n):
        c = chi[j]
        if c.is_zero():
            bound = min(bound, Fraction(c.abs_steps, n - j))
        else:
            best = min(best, Fraction(c.shift, n - j))
    if best < bound:
        return best, True
    return bound, False


# ---------------------------------------------------------------------------
# residue-field factorisation (small degree)


def residue_poly(chi: Sequence[TameElement]) -> list[int]:
    return [c.residue() for c in chi]


def _fpoly_eval(F: FqField, f: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = F.add(F.mul(acc, x), c)
    return acc


def _fpoly_divexact(F: FqField, f: Sequence[int], g: Sequence[int]) -> list[int] | None:
    from .ffield import poly_divmod

    q, r = poly_divmod(F, list(f), list(g))
    return q if not any(r) else None


def factor_residue(F: FqField, f: Sequence[int]) -> list[tuple[tuple[int, ...], int]]:
    """Distinct monic irreducible factors of f over F with multiplicities.

    Roots are found by search; a root-free cofactor of degree <= 3 is
    irreducible, and degree 4 or 5 cofactors are split by searching monic
    quadratics.
    """
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    lead = f[-1]
    f = [F.div(c, lead) for c in f]
    found: dict[tuple[int, ...], int] = {}

    def take(g: tuple[int, ...]) -> None:
        nonlocal f
        while True:
            quo = _fpoly_divexact(F, f, g)
            if quo is None:
                return
            f = quo
            found[g] = found.get(g, 0) + 1

    for x in F.elements():
        if len(f) > 1 and _fpoly_eval(F, f, x) == 0:
            take((F.neg(x), 1))
    while len(f) - 1 >= 4:
        hit = False
        for a in F.elements():
            for b in F.elements():
                g = (b, a, 1)
                if _fpoly_divexact(F, f, g) is not None:
                    take(g)
                    hit = True
                    break
            if hit:
                break
        if not hit:
            break
    if len(f) - 1 >= 1:
        if len(f) - 1 > 5:
            raise NotImplementedError("residue factorisation beyond degree 5")
        found[tuple(f)] = found.get(tuple(f), 0) + 1
    return sorted(found.items())


def splitting_degree(F: FqField, f: Sequence[int]) -> int:
    """Degree over F of the splitting field of f."""
    return lcm(*[len(g) - 1 for g, _ in factor_residue(F, f)]) if len(f) > 1 else 1


def as_matrix_rows(A: PadicMatrix) -> list[list[TameElement]]:
    return [list(r) for r in A.rows]


def iter_entries(A: PadicMatrix) -> Iterable[tuple[int, int, TameElement]]:
    for i, r in enumerate(A.rows):
        for j, a in enumerate(r):
            yield i, j, a
