"""Bilinear and (eps, tau)-Hermitian forms over finite fields.

A form is stored by its Gram matrix G (field codes) and is evaluated as
B(v, w) = v^T G tau(w), so it is linear in the first variable and
tau-semilinear in the second.  The Hermitian condition
eps * B(v, w) = tau(B(w, v)) becomes eps * G = tau(G)^T.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .ffield import (
    FieldDomainError,
    FqField,
    Matrix,
    det,
    embedding,
    get_field,
    mat_transpose,
    nullspace,
    projective_points,
    rank,
)


class DegenerateFormError(ValueError):
    """The Gram matrix is singular where a non-degenerate form is required."""


class HermitianConditionError(ValueError):
    """The Gram matrix does not satisfy eps * G = tau(G)^T."""


@dataclass(frozen=True)
class SesquiForm:
    """An (eps, tau)-Hermitian form with tau = (absolute Frobenius)^tau_k."""

    field: FqField
    gram: tuple[tuple[int, ...], ...]
    tau_k: int = 0
    eps: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gram", tuple(tuple(int(a) for a in row) for row in self.gram))
        n = self.field.n
        object.__setattr__(self, "tau_k", self.tau_k % n)
        if (2 * self.tau_k) % n:
            raise ValueError(f"tau = Frob^{self.tau_k} is not an involution of {self.field}")
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")
        d = len(self.gram)
        if any(len(row) != d for row in self.gram):
            raise ValueError("Gram matrix must be square")
        if any(not 0 <= a < self.field.q for row in self.gram for a in row):
            raise ValueError("Gram entries must be field codes")
        F = self.field
        for i in range(d):
            for j in range(d):
                lhs = self.gram[i][j] if self.eps == 1 else F.neg(self.gram[i][j])
                if lhs != self.tau(self.gram[j][i]):
                    raise HermitianConditionError(
                        f"entry ({i},{j}) violates eps*G = tau(G)^T for eps={self.eps}, tau_k={self.tau_k}"
                    )

    # -- basic evaluation ---------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.gram)

    @property
    def tau_trivial(self) -> bool:
        return self.tau_k == 0

    def tau(self, a: int) -> int:
        return self.field.frobenius_power(a, self.tau_k) if self.tau_k else a

    def B(self, v: Sequence[int], w: Sequence[int]) -> int:
        F = self.field
        tw = [self.tau(x) for x in w]
        acc = 0
        for i, vi in enumerate(v):
            if not vi:
                continue
            row = self.gram[i]
            s = 0
            for j, wj in enumerate(tw):
                if wj and row[j]:
                    s = F.add(s, F.mul(row[j], wj))
            if s:
                acc = F.add(acc, F.mul(vi, s))
        return acc

    def Q(self, v: Sequence[int]) -> int:
        """The associated quadratic (Hermitian) form v -> B(v, v)."""
        return self.B(v, v)

    def gram_det(self) -> int:
        return det(self.field, [list(r) for r in self.gram])

    def is_nondegenerate(self) -> bool:
        return self.dim == 0 or self.gram_det() != 0

    def require_nondegenerate(self) -> None:
        if not self.is_nondegenerate():
            raise DegenerateFormError("the form is degenerate")

    def restrict(self, basis: Sequence[Sequence[int]]) -> "SesquiForm":
        """Gram matrix of the form on the span of ``basis``."""
        gram = [[self.B(u, v) for v in basis] for u in basis]
        return SesquiForm(self.field, gram, self.tau_k, self.eps)

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "gram": [[self.field.digits(a) for a in row] for row in self.gram],
            "tau_k": self.tau_k,
            "eps": self.eps,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SesquiForm":
        F = FqField.from_json(data["field"])

        def code(x):
            if isinstance(x, int):
                return F.from_int(x) if F.n == 1 else x
            return F.from_digits(x)

        gram = [[code(x) for x in row] for row in data["gram"]]
        return cls(F, gram, int(data.get("tau_k", 0)), int(data.get("eps", 1)))


# ---------------------------------------------------------------------------
# determinant square class


def det_square_class(B: SesquiForm) -> int:
    """sgn of det(Gram), over the tau-fixed field when tau is non-trivial.

    Changing basis by P multiplies det by det(P) tau(det P), a square of the
    fixed field, so the class is basis independent.
    """
    B.require_nondegenerate()
    F = B.field
    d = B.gram_det()
    if B.tau_trivial:
        return F.sgn(d)
    m = B.tau_k
    if not F.in_subfield(d, m):
        raise FieldDomainError("det is not fixed by tau; its square class over the fixed field is undefined")
    return F.sgn(d, m=m)


# ---------------------------------------------------------------------------
# Witt decomposition


@dataclass
class WittDecomposition:
    """V = V_+ + V_0 + V_-, with plus[i] and minus[i] a hyperbolic pair."""

    plus: list[list[int]] = field(default_factory=list)
    minus: list[list[int]] = field(default_factory=list)
    anisotropic: list[list[int]] = field(default_factory=list)

    @property
    def witt_index(self) -> int:
        return len(self.plus)

    def check(self, B: SesquiForm) -> None:
        """Raise AssertionError unless every structural invariant holds."""
        F = B.field
        k = len(self.plus)
        assert len(self.minus) == k
        basis = self.plus + self.minus + self.anisotropic
        assert len(basis) == B.dim and rank(F, basis) == B.dim, "not a basis"
        for i in range(k):
            for j in range(k):
                assert B.B(self.plus[i], self.plus[j]) == 0
                assert B.B(self.minus[i], self.minus[j]) == 0
                assert B.B(self.plus[i], self.minus[j]) == (1 if i == j else 0)
        for u in self.anisotropic:
            for v in self.plus + self.minus:
                assert B.B(u, v) == 0 and B.B(v, u) == 0
        # V_0 is anisotropic
        if self.anisotropic:
            for c in projective_points(F, len(self.anisotropic)):
                v = _combine(F, c, self.anisotropic)
                assert B.Q(v) != 0, "V_0 contains an isotropic vector"

    def to_json(self) -> dict:
        return {
            "witt_index": self.witt_index,
            "plus": self.plus,
            "minus": self.minus,
            "anisotropic": self.anisotropic,
        }


def _combine(F: FqField, coeffs: Sequence[int], basis: Sequence[Sequence[int]]) -> list[int]:
    d = len(basis[0]) if basis else 0
    out = [0] * d
    for c, b in zip(coeffs, basis):
        if c:
            for i, x in enumerate(b):
                if x:
                    out[i] = F.add(out[i], F.mul(c, x))
    return out


def _find_isotropic(B: SesquiForm, W: Matrix) -> list[int] | None:
    for c in projective_points(B.field, len(W)):
        v = _combine(B.field, c, W)
        if B.Q(v) == 0:
            return v
    return None


def witt_index_formula(B: SesquiForm) -> int:
    """floor(d/2) except for split-failing even-dimensional symmetric forms."""
    d = B.dim
    if d % 2 == 0 and B.tau_trivial and B.eps == 1:
        target = B.field.sgn(B.field.from_int((-1) ** (d // 2)))
        if det_square_class(B) != target:
            return d // 2 - 1
    return d // 2


def witt_decompose(B: SesquiForm) -> WittDecomposition:
    """Split off hyperbolic pairs until the remaining space is anisotropic."""
    B.require_nondegenerate()
    F = B.field
    out = WittDecomposition()
    W: Matrix = [[1 if i == j else 0 for j in range(B.dim)] for i in range(B.dim)]
    while W:
        v = _find_isotropic(B, W)
        if v is None:
            break
        # some basis vector of W pairs non-trivially with v (non-degeneracy on W)
        b = next(u for u in W if B.B(v, u) != 0)
        # B(v, lam b) = tau(lam) B(v, b); tau is an involution
        lam = B.tau(F.inv(B.B(v, b)))
        w = [F.mul(lam, x) for x in b]
        assert B.B(v, w) == 1
        if B.Q(w) != 0:
            for c in range(F.q):
                w2 = [F.add(x, F.mul(c, y)) for x, y in zip(w, v)]
                if B.Q(w2) == 0:
                    w = w2
                    break
            else:  # pragma: no cover - excluded by the hyperbolic-plane argument
                raise AssertionError("could not make the dual vector isotropic")
        out.plus.append(v)
        out.minus.append(w)
        # W <- {u in W : B(u, v) = B(u, w) = 0}; both conditions are linear in u
        cond = [[B.B(u, v) for u in W], [B.B(u, w) for u in W]]
        coeffs = nullspace(F, cond, len(W))
        W = [_combine(F, c, W) for c in coeffs]
    out.anisotropic = W
    expected = witt_index_formula(B)
    if out.witt_index != expected:
        raise AssertionError(f"constructed Witt index {out.witt_index} differs from closed form {expected}")
    return out


def max_isotropic_dim_bruteforce(B: SesquiForm) -> int:
    """Largest dimension of a subspace on which B vanishes identically.

    Depth-first search over lines, stopping early once floor(d/2) is reached.
    For alternating forms every vector is Q-isotropic, so total isotropy is
    tested through B itself.
    """
    F = B.field
    d = B.dim
    bound = d // 2
    best = 0
    # isotropic lines are materialised lazily and reused across branches
    cache: list[list[int]] = []
    gen = None

    def iso_points():
        nonlocal gen
        i = 0
        while True:
            if i < len(cache):
                yield i, cache[i]
            else:
                if gen is None:
                    gen = (v for v in projective_points(F, d) if B.Q(v) == 0)
                try:
                    cache.append(next(gen))
                except StopIteration:
                    return
                yield i, cache[i]
            i += 1

    def dfs(chosen: list[list[int]], start: int) -> bool:
        nonlocal best
        best = max(best, len(chosen))
        if best >= bound:
            return True
        for i, v in iso_points():
            if i < start:
                continue
            if any(B.B(v, s) for s in chosen):
                continue
            if chosen and rank(F, chosen + [v]) == len(chosen):
                continue
            if dfs(chosen + [v], i + 1):
                return True
        return False

    dfs([], 0)
    return best


# ---------------------------------------------------------------------------
# random and exhaustive form generation (used by tests and the CLI check)


def _diag_values(F: FqField, tau_k: int, eps: int) -> list[int]:
    """Codes d with eps * d = tau(d), the allowed diagonal Gram entries."""
    out = []
    for a in range(F.q):
        lhs = a if eps == 1 else F.neg(a)
        t = F.frobenius_power(a, tau_k) if tau_k else a
        if lhs == t:
            out.append(a)
    return out


def _fill(F: FqField, d: int, tau_k: int, eps: int, diag: Sequence[int], upper: Sequence[int]) -> list[list[int]]:
    G = [[0] * d for _ in range(d)]
    it = iter(upper)
    for i in range(d):
        G[i][i] = diag[i]
        for j in range(i + 1, d):
            a = next(it)
            G[i][j] = a
            t = F.frobenius_power(a, tau_k) if tau_k else a
            G[j][i] = t if eps == 1 else F.neg(t)
    return G


def hermitian_space_size(F: FqField, d: int, tau_k: int, eps: int) -> int:
    return len(_diag_values(F, tau_k, eps)) ** d * F.q ** (d * (d - 1) // 2)


def all_forms(F: FqField, d: int, tau_k: int = 0, eps: int = 1, nondegenerate: bool = True) -> Iterator[SesquiForm]:
    """Every (eps, tau)-Hermitian Gram matrix of size d."""
    from itertools import product

    dv = _diag_values(F, tau_k, eps)
    nup = d * (d - 1) // 2
    for diag in product(dv, repeat=d):
        for upper in product(range(F.q), repeat=nup):
            B = SesquiForm(F, _fill(F, d, tau_k, eps, diag, upper), tau_k, eps)
            if not nondegenerate or B.is_nondegenerate():
                yield B


def random_form(F: FqField, d: int, tau_k: int = 0, eps: int = 1, rng: random.Random | None = None) -> SesquiForm:
    """A uniformly random non-degenerate (eps, tau)-Hermitian form."""
    rng = rng or random.Random()
    dv = _diag_values(F, tau_k, eps)
    nup = d * (d - 1) // 2
    for _ in range(10000):
        diag = [rng.choice(dv) for _ in range(d)]
        upper = [rng.randrange(F.q) for _ in range(nup)]
        B = SesquiForm(F, _fill(F, d, tau_k, eps, diag, upper), tau_k, eps)
        if B.is_nondegenerate():
            return B
    raise ValueError(f"no non-degenerate form found for d={d}, tau_k={tau_k}, eps={eps} over {F}")


def hyperbolic_plane(F: FqField, eps: int = 1, tau_k: int = 0) -> SesquiForm:
    minus_one = F.neg(1)
    return SesquiForm(F, [[0, 1], [1 if eps == 1 else minus_one, 0]], tau_k, eps)


def diagonal_form(F: FqField, entries: Sequence[int]) -> SesquiForm:
    d = len(entries)
    return SesquiForm(F, [[F.from_int(entries[i]) if i == j else 0 for j in range(d)] for i in range(d)])


# ---------------------------------------------------------------------------
# the trace form on an extension


def _galois_sign(n: int, j: int) -> int:
    """Quadratic character of the cyclic group Z/n at j (trivial when n is odd)."""
    if n % 2:
        return 1
    return -1 if j % 2 else 1


def trace_form_gram(n: int, tau_k: int, F: FqField) -> tuple[FqField, Matrix]:
    """Gram matrix over F of (t1, t2) -> Tr_{E/F}(t1 tau(t2)) on E = GF(|F|^n)."""
    p, m = F.p, F.n
    E = get_field(p, m * n)
    emb = embedding(F, E)
    back = {c: a for a, c in enumerate(emb)}
    # an F-basis of E: greedily add elements whose F-span grows the GF(p)-rank
    fbasis = [emb[F.from_digits([1 if i == k else 0 for i in range(m)])] for k in range(m)]
    Fp = get_field(p, 1)
    basis: list[int] = []
    span_rows: list[list[int]] = []
    for c in range(1, E.q):
        rows = [E.digits(E.mul(f, c)) for f in fbasis]
        if rank(Fp, span_rows + rows) == len(span_rows) + m:
            span_rows += rows
            basis.append(c)
            if len(basis) == n:
                break
    gram = []
    for b1 in basis:
        row = []
        for b2 in basis:
            t = E.trace(E.mul(b1, E.frobenius_power(b2, tau_k)), m)
            row.append(back[t])
        gram.append(row)
    return E, gram


def trace_form_det(n: int, tau_k: int, F: FqField, verify: bool = True) -> int:
    """sgn_F of the determinant of the trace form twisted by tau.

    The closed form is (-sgn_F(sgn_Gal(tau)))^(n+1); with ``verify`` the
    Gram determinant is also computed directly and compared.
    """
    m = F.n
    if n < 1:
        raise ValueError("extension degree must be positive")
    if tau_k % m:
        raise ValueError("tau must fix the base field F")
    j = (tau_k // m) % n
    if (2 * j) % n:
        raise ValueError("tau^2 != 1 on E over F")
    s = _galois_sign(n, j)
    value = (-F.sgn(F.from_int(s))) ** (n + 1)
    if verify:
        _, gram = trace_form_gram(n, tau_k, F)
        brute = F.sgn(det(F, gram))
        if brute != value:
            raise AssertionError(f"trace-form determinant class {brute} differs from closed form {value}")
    return value
