"""Finite fields GF(p^n) with Galois action, quadratic character and Lambda.

Elements are represented internally as integer codes: the polynomial
c_0 + c_1 x + ... + c_{n-1} x^{n-1} modulo the defining polynomial is the
integer sum c_i p^i.  The prime field therefore consists of the codes
0..p-1, and the code of the integer c is just c mod p.

Multiplication goes through discrete-log / exponential tables built from a
designated generator, which is fine at desk scale (q up to a few 10^5).
``FqElement`` wraps a code together with its field for the public API;
the hot loops elsewhere in the package work on bare codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

from .exactnum import CycContext, CycNumber, prime_factors


class FieldDomainError(ValueError):
    """Raised for inputs outside an operation's domain (e.g. sgn(0))."""


# ---------------------------------------------------------------------------
# polynomials over the prime field, low-to-high integer lists


def _trim(f: list[int]) -> list[int]:
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def _pmod(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    f = [c % p for c in f]
    g = _trim([c % p for c in g])
    dg = len(g) - 1
    inv_lead = pow(g[-1], p - 2, p)
    while len(f) - 1 >= dg and any(f):
        _trim(f)
        if len(f) - 1 < dg:
            break
        c = f[-1] * inv_lead % p
        shift = len(f) - 1 - dg
        for i, gi in enumerate(g):
            f[shift + i] = (f[shift + i] - c * gi) % p
        _trim(f)
        if len(f) == 1 and dg == 0:
            f = [0]
            break
    return _trim(f) if f else [0]


def _pmul(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return _trim(out)


def _pgcd(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    a, b = _trim([c % p for c in f]), _trim([c % p for c in g])
    while any(b):
        a, b = b, _pmod(a, b, p)
    if any(a):
        inv = pow(a[-1], p - 2, p)
        a = [c * inv % p for c in a]
    return a


def _ppowmod(base: Sequence[int], e: int, mod: Sequence[int], p: int) -> list[int]:
    result = [1]
    b = _pmod(base, mod, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, b, p), mod, p)
        b = _pmod(_pmul(b, b, p), mod, p)
        e >>= 1
    return result


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Rabin's irreducibility test for a monic polynomial over GF(p)."""
    poly = _trim([c % p for c in poly])
    n = len(poly) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    if _psub(_ppowmod(x, p**n, poly, p), x, p) != [0]:
        return False
    for ell in prime_factors(n):
        h = _psub(_ppowmod(x, p ** (n // ell), poly, p), x, p)
        if len(_pgcd(poly, h, p)) != 1:
            return False
    return True


def _psub(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    m = max(len(f), len(g))
    out = [((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p for i in range(m)]
    return _trim(out)


def least_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of degree n over GF(p).

    Candidates are ordered by the coefficient tuple (c_{n-1}, ..., c_0).
    """
    if n == 1:
        return (0, 1)
    for idx in range(p**n):
        hi_to_lo = []
        v = idx
        for _ in range(n):
            hi_to_lo.append(v % p)
            v //= p
        hi_to_lo.reverse()  # hi_to_lo[0] is c_{n-1}
        low = list(reversed(hi_to_lo)) + [1]
        if low[0] == 0:
            continue
        if is_irreducible(low, p):
            return tuple(low)
    raise RuntimeError("no irreducible polynomial found")  # unreachable


def _is_prime(p: int) -> bool:
    return p >= 2 and prime_factors(p) == [p]


# ---------------------------------------------------------------------------
# the field


class FqField:
    """GF(p^n) built from the least irreducible polynomial (or a given one)."""

    MAX_ORDER = 400_000

    def __init__(self, p: int, n: int = 1, poly: Sequence[int] | None = None):
        if not _is_prime(p) or p == 2:
            raise ValueError(f"characteristic must be an odd prime, got {p}")
        if n < 1:
            raise ValueError("degree must be positive")
        q = p**n
        if q > self.MAX_ORDER:
            raise ValueError(f"GF({p}^{n}) exceeds the desk-scale bound {self.MAX_ORDER}")
        self.p = p
        self.n = n
        self.q = q
        if poly is None:
            poly = least_irreducible(p, n)
        poly = tuple(int(c) % p for c in poly)
        if len(poly) != n + 1 or poly[-1] != 1:
            raise ValueError("defining polynomial must be monic of degree n")
        if not is_irreducible(list(poly), p):
            raise ValueError(f"{poly} is not irreducible over GF({p})")
        self.poly = poly
        self._pw = [p**i for i in range(n)]
        self._build_tables()

    # -- construction -----------------------------------------------------

    def _mul_codes_slow(self, a: int, b: int) -> int:
        return self.from_digits(_pmod(_pmul(self.digits(a), self.digits(b), self.p), self.poly, self.p))

    def _build_tables(self) -> None:
        q = self.q
        order = q - 1
        primes = prime_factors(order) if order > 1 else []
        gen = None
        for g in range(1, q):
            if q == 2:
                gen = 1
                break
            ok = True
            for ell in primes:
                if self._pow_slow(g, order // ell) == 1:
                    ok = False
                    break
            if ok:
                gen = g
                break
        self.generator = gen
        exp = [0] * order
        log = [-1] * q
        cur = 1
        for k in range(order):
            exp[k] = cur
            log[cur] = k
            cur = self._mul_codes_slow(cur, gen)
        self._exp = exp
        self._log = log
        # Zech logarithms: g^z[k] = 1 + g^k (z[k] = -1 when 1 + g^k = 0)
        zech = [-1] * order
        if self.n > 1:
            for k in range(order):
                s = self._add_digits(1, exp[k])
                zech[k] = log[s] if s else -1
        self._zech = zech
        self._neg_shift = order // 2

    def _pow_slow(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_codes_slow(result, a)
            a = self._mul_codes_slow(a, a)
            e >>= 1
        return result

    # -- coding -----------------------------------------------------------

    def digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.n):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def from_digits(self, ds: Sequence[int]) -> int:
        code = 0
        for i, d in enumerate(ds):
            if i >= self.n:
                if d % self.p:
                    raise ValueError("digit vector longer than field degree")
                continue
            code += (int(d) % self.p) * self._pw[i]
        return code

    def from_int(self, c: int) -> int:
        return c % self.p

    # -- arithmetic on codes ---------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.n == 1:
            return (a + b) % self.p
        if a == 0:
            return b
        if b == 0:
            return a
        la = self._log[a]
        order = self.q - 1
        z = self._zech[(self._log[b] - la) % order]
        if z < 0:
            return 0
        return self._exp[(la + z) % order]

    def _add_digits(self, a: int, b: int) -> int:
        p = self.p
        code = 0
        w = 1
        for _ in range(self.n):
            a, ra = divmod(a, p)
            b, rb = divmod(b, p)
            code += ((ra + rb) % p) * w
            w *= p
        return code

    def neg(self, a: int) -> int:
        if self.n == 1:
            return (-a) % self.p
        if a == 0:
            return 0
        return self._exp[(self._log[a] + self._neg_shift) % (self.q - 1)]

    def _neg_digits(self, a: int) -> int:
        p = self.p
        code = 0
        w = 1
        for _ in range(self.n):
            a, ra = divmod(a, p)
            code += ((-ra) % p) * w
            w *= p
        return code

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def scale(self, c: int, a: int) -> int:
        """Multiply by the prime-field integer c."""
        return self.mul(c % self.p, a)

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 1 if e == 0 else 0
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def log(self, a: int) -> int:
        if a == 0:
            raise FieldDomainError("discrete log of zero")
        return self._log[a]

    def exp(self, k: int) -> int:
        return self._exp[k % (self.q - 1)]

    def sum(self, codes) -> int:
        acc = 0
        for c in codes:
            acc = self.add(acc, c)
        return acc

    def elements(self) -> range:
        return range(self.q)

    def order(self, a: int) -> int:
        if a == 0:
            raise FieldDomainError("zero has no multiplicative order")
        k = self._log[a]
        from math import gcd

        return (self.q - 1) // gcd(self.q - 1, k)

    # -- Galois structure --------------------------------------------------

    def frobenius_power(self, a: int, k: int = 1) -> int:
        """a^(p^k); k may be negative or exceed n."""
        if a == 0:
            return 0
        k %= self.n
        return self._exp[(self._log[a] * pow(self.p, k)) % (self.q - 1)]

    def _check_subdegree(self, m: int) -> None:
        if m < 1 or self.n % m:
            raise ValueError(f"subfield degree {m} does not divide {self.n}")

    def in_subfield(self, a: int, m: int) -> bool:
        self._check_subdegree(m)
        return self.frobenius_power(a, m) == a

    def subfield_elements(self, m: int) -> list[int]:
        self._check_subdegree(m)
        return [a for a in range(self.q) if self.frobenius_power(a, m) == a]

    def trace(self, a: int, m: int = 1) -> int:
        """Relative trace down to GF(p^m), as a code of this field."""
        self._check_subdegree(m)
        acc = 0
        for i in range(self.n // m):
            acc = self.add(acc, self.frobenius_power(a, m * i))
        return acc

    def norm(self, a: int, m: int = 1) -> int:
        """Relative norm down to GF(p^m), as a code of this field."""
        self._check_subdegree(m)
        if a == 0:
            return 0
        e = (self.q - 1) // (self.p**m - 1)
        return self.pow(a, e)

    def trace_norm(self, a: int, m: int) -> tuple[int, int]:
        return self.trace(a, m), self.norm(a, m)

    def absolute_trace(self, a: int) -> int:
        """Tr to GF(p), returned as an integer in 0..p-1."""
        t = self.trace(a, 1)
        assert t < self.p
        return t

    # -- characters ---------------------------------------------------------

    def sgn(self, a: int, zero_ok: bool = False, m: int | None = None) -> int:
        """Quadratic character of GF(p^m) (default m = n) evaluated at a.

        With ``zero_ok`` the convention sgn(0) = +1 is used; otherwise zero is
        a domain error.
        """
        if a == 0:
            if zero_ok:
                return 1
            raise FieldDomainError("sgn(0) is undefined here")
        if m is None or m == self.n:
            return 1 if self._log[a] % 2 == 0 else -1
        self._check_subdegree(m)
        if not self.in_subfield(a, m):
            raise FieldDomainError(f"element {a} does not lie in GF({self.p}^{m})")
        c = (self.q - 1) // (self.p**m - 1)
        k = self._log[a] // c
        return 1 if k % 2 == 0 else -1

    def lambda_char(self, a: int, ctx: CycContext | None = None) -> CycNumber:
        """Lambda(a) = zeta_p^(Tr a)."""
        ctx = ctx or CycContext.for_prime(self.p)
        return ctx.embed(self.p, self.absolute_trace(a))

    # -- dense tables for vectorised kernels ---------------------------------

    TABLE_LIMIT = 2500

    def tables(self):
        """numpy tables (add, mul, neg, abs_trace, frob) for q <= TABLE_LIMIT."""
        cached = getattr(self, "_tables", None)
        if cached is not None:
            return cached
        import numpy as np

        if self.q > self.TABLE_LIMIT:
            raise ValueError(f"{self} is too large for dense tables")
        q = self.q
        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(q):
                add[a, b] = self.add(a, b)
                mul[a, b] = self.mul(a, b)
        neg = np.array([self.neg(a) for a in range(q)], dtype=np.int64)
        tr = np.array([self.absolute_trace(a) for a in range(q)], dtype=np.int64)
        frob = np.array([self.frobenius_power(a, 1) for a in range(q)], dtype=np.int64)
        self._tables = (add, mul, neg, tr, frob)
        return self._tables

    # -- misc ---------------------------------------------------------------

    def element(self, a: int | Sequence[int]) -> "FqElement":
        if isinstance(a, int):
            return FqElement(self, a % self.q if a >= 0 else self.from_int(a))
        return FqElement(self, self.from_digits(a))

    def x(self) -> int:
        """The class of the polynomial variable."""
        return self.from_digits([0, 1]) if self.n > 1 else 0

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "poly": list(self.poly)}

    @classmethod
    def from_json(cls, data: Mapping) -> "FqField":
        poly = data.get("poly")
        return get_field(int(data["p"]), int(data.get("n", 1)), tuple(poly) if poly else None)

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.n})" if self.n > 1 else f"GF({self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FqField) and (self.p, self.n, self.poly) == (other.p, other.n, other.poly)

    def __hash__(self) -> int:
        return hash((self.p, self.n, self.poly))


@lru_cache(maxsize=None)
def get_field(p: int, n: int = 1, poly: tuple[int, ...] | None = None) -> FqField:
    """Cached field constructor."""
    return FqField(p, n, poly)


def GF(q: int) -> FqField:
    from .exactnum import prime_power

    p, n = prime_power(q)
    return get_field(p, n)


@dataclass(frozen=True)
class FqElement:
    """A field element bundled with its field."""

    field: FqField
    code: int

    def _other(self, other) -> int:
        if isinstance(other, FqElement):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other.code
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return FqElement(self.field, self.field.add(self.code, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return FqElement(self.field, self.field.sub(self.code, o))

    def __rsub__(self, other):
        o = self._other(other)
        return FqElement(self.field, self.field.sub(o, self.code))

    def __neg__(self):
        return FqElement(self.field, self.field.neg(self.code))

    def __mul__(self, other):
        o = self._other(other)
        return FqElement(self.field, self.field.mul(self.code, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return FqElement(self.field, self.field.div(self.code, o))

    def __pow__(self, e: int):
        return FqElement(self.field, self.field.pow(self.code, e))

    def is_zero(self) -> bool:
        return self.code == 0

    @property
    def coeffs(self) -> list[int]:
        return self.field.digits(self.code)

    def sgn(self, zero_ok: bool = False) -> int:
        return self.field.sgn(self.code, zero_ok=zero_ok)

    def lambda_char(self, ctx: CycContext | None = None) -> CycNumber:
        return self.field.lambda_char(self.code, ctx)

    def trace(self, m: int = 1) -> "FqElement":
        return FqElement(self.field, self.field.trace(self.code, m))

    def norm(self, m: int = 1) -> "FqElement":
        return FqElement(self.field, self.field.norm(self.code, m))

    def frobenius(self, k: int = 1) -> "FqElement":
        return FqElement(self.field, self.field.frobenius_power(self.code, k))

    def to_json(self) -> list[int]:
        return self.coeffs

    def __repr__(self) -> str:
        return f"{self.field!r}{self.coeffs}"


# module-level spellings of the field operations


def sgn(t: FqElement, zero_ok: bool = False) -> int:
    return t.sgn(zero_ok=zero_ok)


def lambda_char(t: FqElement, ctx: CycContext | None = None) -> CycNumber:
    return t.lambda_char(ctx)


def trace_norm(t: FqElement, subfield_degree: int) -> tuple[FqElement, FqElement]:
    tr, nm = t.field.trace_norm(t.code, subfield_degree)
    return FqElement(t.field, tr), FqElement(t.field, nm)


def frobenius_power(t: FqElement, k: int) -> FqElement:
    return t.frobenius(k)


def embedding(small: FqField, big: FqField) -> list[int]:
    """Table mapping codes of ``small`` to codes of ``big`` (a field embedding).

    The image of the variable is the least-code root of small's defining
    polynomial in ``big``.
    """
    if small.p != big.p or big.n % small.n:
        raise ValueError(f"{small} does not embed in {big}")
    if small.n == 1:
        return list(range(small.q))
    root = None
    for r in range(big.q):
        acc = 0
        pw = 1
        for c in small.poly:
            acc = big.add(acc, big.mul(big.from_int(c), pw))
            pw = big.mul(pw, r)
        if acc == 0:
            root = r
            break
    assert root is not None
    powers = [1]
    for _ in range(small.n - 1):
        powers.append(big.mul(powers[-1], root))
    table = []
    for a in range(small.q):
        acc = 0
        for d, pw in zip(small.digits(a), powers):
            if d:
                acc = big.add(acc, big.mul(d, pw))
        table.append(acc)
    return table


# ---------------------------------------------------------------------------
# linear algebra over a finite field on code matrices (lists of lists)

Matrix = list[list[int]]


def mat_identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(F: FqField, A: Matrix, B: Matrix) -> Matrix:
    n, m, k = len(A), len(B), len(B[0]) if B else 0
    out = [[0] * k for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        row = out[i]
        for t in range(m):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(k):
                    if Bt[j]:
                        row[j] = F.add(row[j], F.mul(a, Bt[j]))
    return out


def mat_vec(F: FqField, A: Matrix, v: Sequence[int]) -> list[int]:
    out = []
    for row in A:
        acc = 0
        for a, b in zip(row, v):
            if a and b:
                acc = F.add(acc, F.mul(a, b))
        out.append(acc)
    return out


def mat_transpose(A: Matrix) -> Matrix:
    return [list(r) for r in zip(*A)] if A else []


def mat_apply(f, A: Matrix) -> Matrix:
    return [[f(a) for a in row] for row in A]


def rref(F: FqField, A: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = [list(r) for r in A]
    rows = len(M)
    cols = len(M[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = F.inv(M[r][c])
        M[r] = [F.mul(inv, v) for v in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [F.sub(a, F.mul(f, b)) for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def rank(F: FqField, A: Matrix) -> int:
    if not A:
        return 0
    return len(rref(F, A)[1])


def nullspace(F: FqField, A: Matrix, ncols: int | None = None) -> Matrix:
    """Basis (as row vectors) of {v : A v = 0}."""
    if not A:
        n = ncols or 0
        return mat_identity(n)
    R, pivots = rref(F, A)
    n = len(A[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * n
        v[fc] = 1
        for i, pc in enumerate(pivots):
            if R[i][fc]:
                v[pc] = F.neg(R[i][fc])
        basis.append(v)
    return basis


def det(F: FqField, A: Matrix) -> int:
    M = [list(r) for r in A]
    n = len(M)
    d = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            d = F.neg(d)
        d = F.mul(d, M[c][c])
        inv = F.inv(M[c][c])
        for i in range(c + 1, n):
            if M[i][c]:
                f = F.mul(M[i][c], inv)
                M[i] = [F.sub(a, F.mul(f, b)) for a, b in zip(M[i], M[c])]
    return d


def mat_inverse(F: FqField, A: Matrix) -> Matrix:
    n = len(A)
    aug = [list(A[i]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    R, piv = rref(F, aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R]


def solve(F: FqField, A: Matrix, b: Sequence[int]) -> list[int] | None:
    """One solution of A v = b, or None."""
    n = len(A[0])
    aug = [list(A[i]) + [b[i]] for i in range(len(A))]
    R, piv = rref(F, aug)
    if n in piv:
        return None
    v = [0] * n
    for i, c in enumerate(piv):
        v[c] = R[i][n]
    return v


def span_contains(F: FqField, basis: Matrix, v: Sequence[int]) -> bool:
    if not basis:
        return not any(v)
    return rank(F, basis + [list(v)]) == rank(F, basis)


def all_vectors(F: FqField, d: int) -> Iterator[list[int]]:
    """Every vector of GF(q)^d, in code order (first coordinate fastest)."""
    q = F.q
    for idx in range(q**d):
        v = []
        for _ in range(d):
            idx, r = divmod(idx, q)
            v.append(r)
        yield v


def projective_points(F: FqField, d: int) -> Iterator[list[int]]:
    """Representatives of the lines of GF(q)^d: last nonzero coordinate is 1."""
    q = F.q
    for lead in range(d):
        for idx in range(q**lead):
            v = []
            for _ in range(lead):
                idx, r = divmod(idx, q)
                v.append(r)
            yield v + [1] + [0] * (d - lead - 1)


# ---------------------------------------------------------------------------
# polynomials over GF(q) (low-to-high code lists)


def poly_trim(f: list[int]) -> list[int]:
    f = list(f)
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def poly_mul(F: FqField, f: Sequence[int], g: Sequence[int]) -> list[int]:
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                if b:
                    out[i + j] = F.add(out[i + j], F.mul(a, b))
    return poly_trim(out)


def poly_sub(F: FqField, f: Sequence[int], g: Sequence[int]) -> list[int]:
    m = max(len(f), len(g))
    return poly_trim([F.sub(f[i] if i < len(f) else 0, g[i] if i < len(g) else 0) for i in range(m)])


def poly_divmod(F: FqField, f: Sequence[int], g: Sequence[int]) -> tuple[list[int], list[int]]:
    f = poly_trim(list(f))
    g = poly_trim(list(g))
    if g == [0]:
        raise ZeroDivisionError("polynomial division by zero")
    dg = len(g) - 1
    if len(f) - 1 < dg:
        return [0], f
    inv = F.inv(g[-1])
    quot = [0] * (len(f) - dg)
    for i in range(len(f) - 1, dg - 1, -1):
        c = F.mul(f[i], inv)
        if c:
            quot[i - dg] = c
            for j in range(dg + 1):
                f[i - dg + j] = F.sub(f[i - dg + j], F.mul(c, g[j]))
    return poly_trim(quot), poly_trim(f[:dg] or [0])


def poly_gcd(F: FqField, f: Sequence[int], g: Sequence[int]) -> list[int]:
    a, b = poly_trim(list(f)), poly_trim(list(g))
    while b != [0]:
        a, b = b, poly_divmod(F, a, b)[1]
    if a != [0]:
        inv = F.inv(a[-1])
        a = [F.mul(inv, c) for c in a]
    return a


def poly_derivative(F: FqField, f: Sequence[int]) -> list[int]:
    if len(f) <= 1:
        return [0]
    return poly_trim([F.scale(i, f[i]) for i in range(1, len(f))])


def poly_eval_matrix(F: FqField, f: Sequence[int], A: Matrix) -> Matrix:
    n = len(A)
    out = [[0] * n for _ in range(n)]
    for c in reversed(list(f)):
        out = mat_mul(F, out, A)
        if c:
            for i in range(n):
                out[i][i] = F.add(out[i][i], c)
    return out


def charpoly(F: FqField, A: Matrix) -> list[int]:
    """Characteristic polynomial det(t - A) via the Faddeev-free Hessenberg-less route.

    Uses interpolation-free Berkowitz-style recursion on leading principal
    minors (division-free).
    """
    n = len(A)
    if n == 0:
        return [1]
    # Berkowitz algorithm
    vect = [1, F.neg(A[0][0])]  # high-to-low for 1x1
    for r in range(1, n):
        R = [A[r][j] for j in range(r)]  # row
        C = [A[i][r] for i in range(r)]  # column
        Aprev = [A[i][:r] for i in range(r)]
        a = A[r][r]
        # Toeplitz column: [1, -a, -R C, -R A C, ...]
        col = [1, F.neg(a)]
        v = C
        for _ in range(r):
            s = 0
            for x, y in zip(R, v):
                if x and y:
                    s = F.add(s, F.mul(x, y))
            col.append(F.neg(s))
            v = mat_vec(F, Aprev, v)
        # multiply Toeplitz (r+2) x (r+1) by vect
        new = []
        for i in range(r + 2):
            s = 0
            for j in range(r + 1):
                k = i - j
                if 0 <= k < len(col) and vect[j]:
                    s = F.add(s, F.mul(col[k], vect[j]))
            new.append(s)
        vect = new
    return list(reversed(vect))  # low-to-high


def minimal_polynomial(F: FqField, A: Matrix) -> list[int]:
    """Monic minimal polynomial of A (low-to-high) by Krylov dependence on powers."""
    n = len(A)
    powers = [mat_identity(n)]
    while True:
        flat = [[M[i][j] for M in powers] for i in range(n) for j in range(n)]
        nxt = mat_mul(F, powers[-1], A)
        target = [nxt[i][j] for i in range(n) for j in range(n)]
        sol = solve(F, flat, target)
        if sol is not None:
            return [F.neg(c) for c in sol] + [1]
        powers.append(nxt)


def is_semisimple(F: FqField, A: Matrix) -> bool:
    """A is semisimple iff its minimal polynomial is squarefree (finite fields are perfect)."""
    m = minimal_polynomial(F, A)
    return len(poly_gcd(F, m, poly_derivative(F, m))) == 1
