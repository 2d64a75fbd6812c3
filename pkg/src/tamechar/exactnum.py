"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are stored in the power basis 1, z, ..., z^(phi(N)-1) of
Q(zeta_N) = Q[z]/(Phi_N).  All coefficients are ``fractions.Fraction``;
nothing in the value domain is ever a float.  The only floating point
that appears here is ``to_complex`` (for display) and the sign decision
in ``QPowerSqrt.equals_cyc``, which is documented there.

Magnitudes such as q^(k/2) are never embedded into a cyclotomic field.
They are carried symbolically by ``QPowerSqrt``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

Rational = Union[int, Fraction]


class ConductorMismatchError(ValueError):
    """Raised when two cyclotomic numbers live in incompatible fields."""


# ---------------------------------------------------------------------------
# integer helpers


def euler_phi(n: int) -> int:
    result = n
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            while m % d == 0:
                m //= d
            result -= result // d
        d += 1
    if m > 1:
        result -= result // m
    return result


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, a) with q = p^a, or raise if q is not a prime power."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    ps = prime_factors(q)
    if len(ps) != 1:
        raise ValueError(f"{q} is not a prime power")
    p = ps[0]
    a = 0
    while q % p == 0:
        q //= p
        a += 1
    return p, a


def lcm(*ns: int) -> int:
    out = 1
    for n in ns:
        out = out * n // math.gcd(out, n)
    return out


def _poly_divmod_int(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Divide integer polynomials (low-to-high), den monic."""
    num = list(num)
    dq = len(den) - 1
    if len(num) - 1 < dq:
        return [0], num
    quot = [0] * (len(num) - dq)
    for i in range(len(num) - 1, dq - 1, -1):
        c = num[i]
        if c:
            quot[i - dq] = c
            for j in range(dq + 1):
                num[i - dq + j] -= c * den[j]
    rem = num[:dq] or [0]
    return quot, rem


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Phi_n as a tuple of integer coefficients, low-to-high."""
    # x^n - 1 = prod_{d | n} Phi_d
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num, rem = _poly_divmod_int(num, list(cyclotomic_polynomial(d)))
            assert all(c == 0 for c in rem)
    return tuple(num)


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Row k holds the reduction of z^k mod Phi_n, for 0 <= k < n."""
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    rows = []
    cur = [1] + [0] * (deg - 1)
    for _ in range(n):
        rows.append(tuple(cur))
        # multiply by z and reduce
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for j in range(deg):
                cur[j] -= top * phi[j]
    return tuple(rows)


def _frac(x: Rational) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------------------
# CycNumber


@dataclass(frozen=True)
class CycNumber:
    """An element of Q(zeta_N) in the reduced power basis."""

    N: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coeffs) != euler_phi(self.N):
            raise ValueError(
                f"coefficient vector of length {len(self.coeffs)} does not match "
                f"phi({self.N}) = {euler_phi(self.N)}"
            )

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_exponent_counts(cls, N: int, counts: Mapping[int, Rational] | Sequence[Rational]) -> "CycNumber":
        """Build sum_k counts[k] * zeta_N^k (exponents taken mod N)."""
        table = _power_table(N)
        deg = euler_phi(N)
        acc = [0] * deg
        denom_free = True
        items = counts.items() if isinstance(counts, Mapping) else enumerate(counts)
        fr_acc = None
        for k, c in items:
            if not c:
                continue
            row = table[k % N]
            if denom_free and isinstance(c, int):
                for j, t in enumerate(row):
                    if t:
                        acc[j] += c * t
            else:
                if fr_acc is None:
                    fr_acc = [Fraction(a) for a in acc]
                    denom_free = False
                c = _frac(c)
                for j, t in enumerate(row):
                    if t:
                        fr_acc[j] += c * t
        vals = acc if fr_acc is None else fr_acc
        return cls(N, tuple(_frac(v) for v in vals))

    @classmethod
    def rational(cls, N: int, value: Rational) -> "CycNumber":
        deg = euler_phi(N)
        return cls(N, (_frac(value),) + (Fraction(0),) * (deg - 1))

    @classmethod
    def root_of_unity(cls, N: int, k: int) -> "CycNumber":
        return cls.from_exponent_counts(N, {k % N: 1})

    # -- basic predicates -------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        return self.coeffs[0]

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "CycNumber") -> None:
        if self.N != other.N:
            raise ConductorMismatchError(
                f"cannot combine elements of Q(zeta_{self.N}) and Q(zeta_{other.N}); "
                "lift both with lift_to() first"
            )

    def _coerce(self, other) -> "CycNumber":
        if isinstance(other, CycNumber):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return CycNumber.rational(self.N, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CycNumber(self.N, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycNumber(self.N, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CycNumber(self.N, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycNumber(self.N, tuple(a * other for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        deg = len(self.coeffs)
        prod = {}
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    k = i + j
                    prod[k] = prod.get(k, 0) + a * b
        table = _power_table(self.N)
        acc = [Fraction(0)] * deg
        for k, c in prod.items():
            if k < deg:
                acc[k] += c
            else:
                for j, t in enumerate(table[k % self.N]):
                    if t:
                        acc[j] += c * t
        return CycNumber(self.N, tuple(acc))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = CycNumber.rational(self.N, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return CycNumber(self.N, tuple(a / other for a in self.coeffs))
        other = self._coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return CycNumber.rational(self.N, other) * self.inverse()

    def multiplication_matrix(self) -> list[list[Fraction]]:
        """Matrix of t -> self*t in the power basis (columns are images)."""
        deg = len(self.coeffs)
        cols = []
        for j in range(deg):
            basis = CycNumber(self.N, tuple(Fraction(int(i == j)) for i in range(deg)))
            cols.append((self * basis).coeffs)
        return [[cols[j][i] for j in range(deg)] for i in range(deg)]

    def inverse(self) -> "CycNumber":
        """Exact inverse by solving the multiplication-matrix system."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational():
            return CycNumber.rational(self.N, 1 / self.coeffs[0])
        m = self.multiplication_matrix()
        deg = len(m)
        rhs = [Fraction(int(i == 0)) for i in range(deg)]
        aug = [row[:] + [rhs[i]] for i, row in enumerate(m)]
        for col in range(deg):
            piv = next(r for r in range(col, deg) if aug[r][col] != 0)
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [v * inv for v in aug[col]]
            for r in range(deg):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
        return CycNumber(self.N, tuple(aug[i][deg] for i in range(deg)))

    # -- Galois structure -------------------------------------------------

    def galois(self, a: int) -> "CycNumber":
        """Apply zeta_N -> zeta_N^a (a must be a unit mod N)."""
        if math.gcd(a, self.N) != 1:
            raise ValueError(f"{a} is not a unit modulo {self.N}")
        counts: dict[int, Fraction] = {}
        for i, c in enumerate(self.coeffs):
            if c:
                k = (i * a) % self.N
                counts[k] = counts.get(k, 0) + c
        return CycNumber.from_exponent_counts(self.N, counts)

    def conjugate(self) -> "CycNumber":
        """Complex conjugation zeta_N -> zeta_N^(N-1)."""
        return self.galois(self.N - 1)

    def lift_to(self, M: int) -> "CycNumber":
        """Embed into Q(zeta_M) for N | M via zeta_N = zeta_M^(M/N)."""
        if M % self.N:
            raise ConductorMismatchError(f"{self.N} does not divide {M}")
        if M == self.N:
            return self
        step = M // self.N
        return CycNumber.from_exponent_counts(M, {i * step: c for i, c in enumerate(self.coeffs) if c})

    # -- numeric rendering (display only) --------------------------------

    def to_complex(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.N)
        return sum(float(c) * z**i for i, c in enumerate(self.coeffs))

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {"N": self.N, "coeffs": [[c.numerator, c.denominator] for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: Mapping) -> "CycNumber":
        return cls(int(data["N"]), tuple(Fraction(int(n), int(d)) for n, d in data["coeffs"]))

    def __repr__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "1" if i == 0 else (f"z{self.N}" if i == 1 else f"z{self.N}^{i}")
            terms.append(f"{c}*{mono}" if mono != "1" else f"{c}")
        return "CycNumber(" + (" + ".join(terms) or "0") + ")"


def cyc_equal(a: CycNumber, b: CycNumber) -> bool:
    """Exact equality, lifting both operands to the lcm conductor if needed."""
    if a.N == b.N:
        return a.coeffs == b.coeffs
    M = lcm(a.N, b.N)
    return a.lift_to(M).coeffs == b.lift_to(M).coeffs


@dataclass(frozen=True)
class CycContext:
    """A fixed cyclotomic field Q(zeta_N) used for one computation."""

    N: int

    @classmethod
    def for_prime(cls, p: int, *extra: int) -> "CycContext":
        """The usual context lcm(4, p, extra...) so that sqrt(-1) = zeta_4 exists."""
        return cls(lcm(4, p, *extra))

    def embed(self, m: int, k: int) -> CycNumber:
        """zeta_m^k inside Q(zeta_N)."""
        if m <= 0 or self.N % m:
            raise ConductorMismatchError(f"zeta_{m} does not lie in Q(zeta_{self.N})")
        return CycNumber.root_of_unity(self.N, (k % m) * (self.N // m))

    @property
    def zeta(self) -> CycNumber:
        return CycNumber.root_of_unity(self.N, 1)

    @property
    def one(self) -> CycNumber:
        return CycNumber.rational(self.N, 1)

    @property
    def zero(self) -> CycNumber:
        return CycNumber.rational(self.N, 0)

    @property
    def sqrt_minus_one(self) -> CycNumber:
        """The fixed convention sqrt(-1) := zeta_4."""
        return self.embed(4, 1)

    def rational(self, value: Rational) -> CycNumber:
        return CycNumber.rational(self.N, value)

    def from_counts(self, p: int, counts: Iterable[int] | Mapping[int, int]) -> CycNumber:
        """sum_t counts[t] * zeta_p^t inside Q(zeta_N)."""
        if self.N % p:
            raise ConductorMismatchError(f"zeta_{p} does not lie in Q(zeta_{self.N})")
        step = self.N // p
        items = counts.items() if isinstance(counts, Mapping) else enumerate(counts)
        return CycNumber.from_exponent_counts(self.N, {int(t) * step: int(c) for t, c in items if c})


def cyc_embed(m: int, k: int, N: int | None = None) -> CycNumber:
    """zeta_m^k inside Q(zeta_N); N defaults to m."""
    return CycContext(m if N is None else N).embed(m, k)


# ---------------------------------------------------------------------------
# q-power square roots


@dataclass(frozen=True)
class QPowerSqrt:
    """The value ``scalar * base^(exponent/2)`` with the square root kept formal.

    The base is canonicalised to a prime (q = p^a becomes p with exponent
    multiplied by a).  A base of 1 means a purely cyclotomic value.
    """

    base: int
    exponent: int
    scalar: CycNumber

    def __post_init__(self):
        if self.base == 1:
            if self.exponent != 0:
                object.__setattr__(self, "exponent", 0)
            return
        p, a = prime_power(self.base)
        if a != 1:
            object.__setattr__(self, "base", p)
            object.__setattr__(self, "exponent", self.exponent * a)

    @classmethod
    def of(cls, base: int, exponent: int, N: int = 4) -> "QPowerSqrt":
        return cls(base, exponent, CycNumber.rational(N, 1))

    @classmethod
    def one(cls, N: int = 4) -> "QPowerSqrt":
        return cls(1, 0, CycNumber.rational(N, 1))

    def normalized(self) -> tuple[int, int, CycNumber]:
        """(base, exponent mod 2, scalar * base^(exponent div 2))."""
        if self.base == 1:
            return 1, 0, self.scalar
        half, odd = divmod(self.exponent, 2)
        factor = Fraction(self.base) ** half
        return self.base, odd, self.scalar * factor

    def _common_base(self, other: "QPowerSqrt") -> int:
        if self.base == 1:
            return other.base
        if other.base == 1 or other.base == self.base:
            return self.base
        raise ValueError(f"cannot combine square roots of {self.base} and {other.base}")

    def __mul__(self, other):
        if isinstance(other, CycNumber):
            return QPowerSqrt(self.base, self.exponent, self.scalar * other)
        if isinstance(other, (int, Fraction)):
            return QPowerSqrt(self.base, self.exponent, self.scalar * other)
        base = self._common_base(other)
        return QPowerSqrt(base, self.exponent + other.exponent, self.scalar * other.scalar)

    __rmul__ = __mul__

    def inverse(self) -> "QPowerSqrt":
        return QPowerSqrt(self.base, -self.exponent, self.scalar.inverse())

    def __truediv__(self, other):
        if isinstance(other, QPowerSqrt):
            return self * other.inverse()
        return QPowerSqrt(self.base, self.exponent, self.scalar / other)

    def squared(self) -> CycNumber:
        """(scalar * base^(k/2))^2 = scalar^2 * base^k, exactly."""
        return self.scalar * self.scalar * (Fraction(self.base) ** self.exponent)

    def magnitude_exponent(self) -> Fraction:
        return Fraction(self.exponent, 2)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QPowerSqrt):
            return NotImplemented
        a = self.normalized()
        b = other.normalized()
        if a[2].is_zero() and b[2].is_zero():
            return True
        if a[1] != b[1]:
            return False
        if a[1] and a[0] != b[0]:
            return False
        return cyc_equal(a[2], b[2])

    def __hash__(self):
        return hash((self.base, self.exponent))

    def equals_cyc(self, value: CycNumber) -> bool:
        """Decide whether ``value`` (a raw cyclotomic number) equals this quantity.

        For an even total exponent this is exact equality.  For an odd one,
        write x = value / (scalar * base^(k div 2)); we need x = +sqrt(base).
        x^2 = base is checked exactly.  That pins x down to +-sqrt(base), both
        real, and |x| = sqrt(base) >= 1, so the sign is read off from a
        floating evaluation under zeta_N -> exp(2 pi i / N) with an enormous
        safety margin.
        """
        base, odd, scal = self.normalized()
        if not odd:
            return cyc_equal(scal, value)
        if scal.is_zero():
            return value.is_zero()
        M = lcm(scal.N, value.N)
        x = value.lift_to(M) / scal.lift_to(M)
        if not cyc_equal(x * x, CycNumber.rational(M, base)):
            return False
        approx = x.to_complex()
        return approx.real > 0

    def to_json(self) -> dict:
        return {"base": self.base, "exponent": self.exponent, "scalar": self.scalar.to_json()}

    @classmethod
    def from_json(cls, data: Mapping) -> "QPowerSqrt":
        return cls(int(data["base"]), int(data["exponent"]), CycNumber.from_json(data["scalar"]))

    def to_complex(self) -> complex:
        return self.scalar.to_complex() * math.sqrt(self.base) ** self.exponent

    def __repr__(self) -> str:
        if self.base == 1 or self.exponent == 0:
            return f"QPowerSqrt({self.scalar!r})"
        return f"QPowerSqrt({self.scalar!r} * {self.base}^({self.exponent}/2))"
