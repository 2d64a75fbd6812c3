"""Moy-Prasad filtrations, the mock exponential and normal approximations for GL_n.

Points of the standard apartment are rational vectors x = (x_1, ..., x_n);
the lattice g_{x,r} consists of matrices with ord(X_ij) + x_j - x_i >= r and
G_{x,r} = 1 + g_{x,r} for r > 0.

``normal_approx`` follows the leading-term recipe: the depth-zero term is
the Teichmueller projection lim gamma^(Q^m); the term at depth d > 0 is
1 + pi^k Y_0 where Y = (gamma_{>d} - 1) / pi^k and Y_0 = lim Y^(Q^m) keeps
the Teichmueller digit of every eigenvalue.  Both limits are polynomials in
the matrix, computed in the ring tower[t]/(charpoly).

``FiltrationGroupSpec`` describes products of filtration subgroups of
nested centralizers (the groups [[gamma; x, r]] and their truncations) in
standard coordinates.  ``dc_group_order`` counts affine-root lattices and
``coset_enumeration`` is an independent brute-force oracle over Z_p.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence

import numpy as np

from .ffield import FqField, get_field, poly_divmod, poly_mul, poly_sub
from .padic import (
    PadicMatrix,
    PrecisionError,
    TameElement,
    TameTower,
    factor_residue,
    get_tower,
    poly_eval_matrix,
    poly_mulmod,
    poly_powmod,
    residue_poly,
    root_valuations_min,
    splitting_degree,
)


class OutsideParahoricError(ValueError):
    """The element does not lie in G_{x,0} (or the lattice g_{x,t})."""


class NotCompactError(ValueError):
    """Some eigenvalue has non-zero valuation."""


class NotTameError(ValueError):
    """Eigenvalues need more ramification than the tower provides."""


class WildError(NotTameError):
    """The needed ramification index is divisible by p."""


class InadmissibleSpecError(ValueError):
    """A filtration-group description violates nesting or depth constraints."""


class EnumerationTooLargeError(ValueError):
    """Direct coset enumeration would exceed the desk-scale bound."""


# ---------------------------------------------------------------------------
# depths in R~ = R u {r+}


@total_ordering
@dataclass(frozen=True)
class Depth:
    """A real depth r or r+ ("just above r")."""

    value: Fraction
    plus: bool = False

    @classmethod
    def of(cls, r) -> "Depth":
        if isinstance(r, Depth):
            return r
        if isinstance(r, str):
            s = r.strip()
            if s.endswith("+"):
                return cls(Fraction(s[:-1]), True)
            return cls(Fraction(s))
        return cls(Fraction(r))

    def __lt__(self, other) -> bool:
        other = Depth.of(other)
        return (self.value, self.plus) < (other.value, other.plus)

    def __add__(self, other) -> "Depth":
        if isinstance(other, Depth):
            return Depth(self.value + other.value, self.plus or other.plus)
        return Depth(self.value + Fraction(other), self.plus)

    def __sub__(self, c) -> "Depth":
        return Depth(self.value - Fraction(c), self.plus)

    def half(self) -> "Depth":
        return Depth(self.value / 2, self.plus)

    def first_step(self, e: int) -> int:
        """Least integer m with m/e >= r (or > r for r+)."""
        v = self.value * e
        m = math.ceil(v)
        if self.plus and m == v:
            m += 1
        return m

    def __str__(self) -> str:
        return f"{self.value}{'+' if self.plus else ''}"

    def to_json(self) -> str:
        return str(self)


def _steps(lo: Depth, hi: Depth, e: int) -> int:
    """#{v in (1/e)Z : v >= lo, v < hi} with the r+ conventions."""
    return max(0, hi.first_step(e) - lo.first_step(e))


# ---------------------------------------------------------------------------
# filtrations at standard apartment points


def _point(x: Sequence, n: int) -> tuple[Fraction, ...]:
    if x is None:
        return (Fraction(0),) * n
    if len(x) != n:
        raise ValueError(f"point has {len(x)} coordinates, matrix size is {n}")
    return tuple(Fraction(c) for c in x)


def vertex(n: int) -> tuple[Fraction, ...]:
    return (Fraction(0),) * n


def barycenter(n: int) -> tuple[Fraction, ...]:
    """Barycenter of the standard alcove: (0, 1/n, ..., (n-1)/n)."""
    return tuple(Fraction(i, n) for i in range(n))


def _entry_bounds(X: PadicMatrix, x: Sequence[Fraction]) -> tuple[Fraction | float, Fraction | float]:
    """(least affine value of a nonzero entry, least bound from entries zero at precision)."""
    e = X.tower.e
    best: Fraction | float = math.inf
    bound: Fraction | float = math.inf
    for i, row in enumerate(X.rows):
        for j, a in enumerate(row):
            shift = x[j] - x[i]
            if a.is_zero():
                bound = min(bound, Fraction(a.abs_steps, e) + shift)
            else:
                best = min(best, a.ord() + shift)
    return best, bound


def lattice_depth(X: PadicMatrix, x: Sequence | None = None) -> Fraction | float:
    """depth_x of a Lie-algebra element: min ord(X_ij) + x_j - x_i.

    Returns math.inf when X is zero at precision; raises PrecisionError
    when an entry that is zero at precision could lower the minimum.
    """
    xs = _point(x, X.n)
    best, bound = _entry_bounds(X, xs)
    if best == math.inf:
        return math.inf
    if bound < best:
        raise PrecisionError("depth is not determined at precision")
    return best


def in_lattice(X: PadicMatrix, x: Sequence | None, r) -> bool:
    """Is X in g_{x,r} (r may be a Depth)?  Decided at precision or raises."""
    r = Depth.of(r)
    xs = _point(x, X.n)
    best, bound = _entry_bounds(X, xs)

    def ok(v) -> bool:
        return v > r.value if r.plus else v >= r.value

    if not ok(best):
        return False
    if bound != math.inf and not ok(bound):
        raise PrecisionError(f"membership in the depth-{r} lattice is not determined at precision")
    return True


def in_parahoric(g: PadicMatrix, x: Sequence | None = None) -> bool:
    return in_lattice(g, x, Depth(Fraction(0)))


def mp_depth(g: PadicMatrix, x: Sequence | None = None, lie: bool = False) -> Fraction | float:
    """depth_x(g) = min over entries of ord((g - 1)_ij) + x_j - x_i.

    With ``lie=True`` the argument is a Lie-algebra element and no 1 is
    subtracted.  Group elements must lie in G_{x,0}.
    """
    if lie:
        return lattice_depth(g, x)
    if not in_parahoric(g, x):
        raise OutsideParahoricError("element is not in the parahoric G_{x,0}")
    K = g.precision_steps()
    return lattice_depth(g - PadicMatrix.identity(g.tower, g.n, K), x)


def mock_exp(X: PadicMatrix, x: Sequence | None, t, u) -> PadicMatrix:
    """The mock exponential 1 + X on g_{x,t}, for 0 < t <= u <= 2t."""
    t, u = Depth.of(t), Depth.of(u)
    if not (Depth(Fraction(0)) < t <= u <= Depth(2 * t.value, t.plus)):
        raise ValueError(f"need 0 < t <= u <= 2t, got t={t}, u={u}")
    if not in_lattice(X, x, t):
        raise OutsideParahoricError(f"X is not in the depth-{t} lattice")
    return PadicMatrix.identity(X.tower, X.n, X.precision_steps()) + X


def mock_log(g: PadicMatrix) -> PadicMatrix:
    """Inverse of the mock exponential: g - 1."""
    return g - PadicMatrix.identity(g.tower, g.n, g.precision_steps())


def congruent(A: PadicMatrix, B: PadicMatrix, x: Sequence | None, r) -> bool:
    """A = B modulo the lattice g_{x,r}."""
    return in_lattice(A - B, x, r)


def random_lattice_element(
    tower: TameTower, n: int, x: Sequence | None, t, rng: random.Random, prec: int
) -> PadicMatrix:
    """A random element of g_{x,t} with entries known to ``prec`` pi-steps."""
    t = Depth.of(t)
    xs = _point(x, n)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            m = (t - (xs[j] - xs[i])).first_step(tower.e)
            digits = {k: rng.randrange(tower.q) for k in range(m, prec)}
            row.append(tower.from_digits(digits, prec))
        rows.append(row)
    return PadicMatrix(tower, rows)


# ---------------------------------------------------------------------------
# Teichmueller projections and spectral idempotents


def _check_integral_charpoly(chi: Sequence[TameElement]) -> None:
    for c in chi:
        if not c.is_integral():
            raise NotCompactError("characteristic polynomial is not integral: some eigenvalue is not integral")


def residue_splitting_degree(M: PadicMatrix) -> int:
    chi = M.charpoly()
    _check_integral_charpoly(chi)
    return splitting_degree(M.tower.residue, residue_poly(chi))


def teichmuller_projection(M: PadicMatrix, Q: int | None = None, max_iter: int | None = None) -> PadicMatrix:
    """lim M^(Q^m), computed as h(M) with h = lim t^(Q^m) mod charpoly(M).

    Each eigenvalue is replaced by its Teichmueller digit (0 for
    eigenvalues in the maximal ideal).  Q must be the order of a residue
    field containing the residue classes of all eigenvalues.
    """
    T = M.tower
    chi = M.charpoly()
    _check_integral_charpoly(chi)
    if Q is None:
        Q = T.p ** (T.f * splitting_degree(T.residue, residue_poly(chi)))
    K = M.precision_steps()
    h = poly_mulmod([T.one(K)], [T.zero(K), T.one(K)], chi)
    limit = max_iter or (K + 8)
    for _ in range(limit):
        h_next = poly_powmod(h, Q, chi)
        if all((a - b).is_zero() for a, b in zip(h_next, h)):
            h = h_next
            break
        h = h_next
    else:
        raise PrecisionError("Teichmueller projection did not stabilise")
    return poly_eval_matrix(h, M)


def _fpoly_trim(f: list[int]) -> list[int]:
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def _fpoly_inverse_mod(F: FqField, a: Sequence[int], m: Sequence[int]) -> list[int]:
    """a^-1 modulo m over F (a and m coprime)."""
    r0, r1 = _fpoly_trim(list(m)), _fpoly_trim(list(a))
    s0, s1 = [0], [1]
    while any(r1):
        quo, rem = poly_divmod(F, r0, r1)
        r0, r1 = r1, _fpoly_trim(list(rem)) if rem else [0]
        s0, s1 = s1, _fpoly_trim(poly_sub(F, s0, poly_mul(F, quo, s1)) or [0])
    if len(r0) != 1 or r0[0] == 0:
        raise ValueError("polynomials are not coprime")
    c = F.inv(r0[0])
    return [F.mul(c, v) for v in s0]


def spectral_projectors(M: PadicMatrix) -> list[tuple[tuple[int, ...], PadicMatrix]]:
    """Projectors onto the joint generalized eigenspaces of a semisimple M
    with Teichmueller-type eigenvalues, one per monic irreducible residue
    factor of the characteristic polynomial."""
    T = M.tower
    F = T.residue
    K = M.precision_steps()
    chi = M.charpoly()
    _check_integral_charpoly(chi)
    factors = factor_residue(F, residue_poly(chi))
    ident = PadicMatrix.identity(T, M.n, K)
    if len(factors) == 1:
        return [(factors[0][0], ident)]
    powers = []
    for g, mult in factors:
        gp = [1]
        for _ in range(mult):
            gp = poly_mul(F, gp, list(g))
        powers.append(gp)
    out = []
    for idx, (g, _mult) in enumerate(factors):
        others = [1]
        for jdx, gp in enumerate(powers):
            if jdx != idx:
                others = poly_mul(F, others, gp)
        inv = _fpoly_inverse_mod(F, poly_divmod(F, others, powers[idx])[1] or [0], powers[idx])
        E = poly_divmod(F, poly_mul(F, others, inv), poly_mul(F, others, powers[idx]))[1]
        coeffs = [T.teichmuller(c, K) for c in E] or [T.zero(K)]
        P = poly_eval_matrix(coeffs, M)
        for _ in range(4 * K.bit_length() + 8):
            P2 = P @ P
            nxt = P2.scale(T.from_int(3, K)) - (P2 @ P).scale(T.from_int(2, K))
            if nxt.equals(P):
                break
            P = nxt
        else:
            raise PrecisionError("idempotent lifting did not stabilise")
        out.append((g, P))
    return out


def _integer_trace(P: PadicMatrix) -> int:
    t = P.trace()
    for r in range(P.n + 1):
        if (t - r).is_zero():
            return r
    raise PrecisionError("projector trace is not an integer at precision")


# ---------------------------------------------------------------------------
# normal approximations


@dataclass(frozen=True)
class ApproxTerm:
    element: PadicMatrix
    depth: Fraction
    steps: int  # depth in pi-steps
    digit_matrix: PadicMatrix  # gamma_0 itself at depth 0, Y_0 at positive depth


@dataclass(frozen=True)
class ChainBlock:
    signature: tuple[tuple[int, ...], ...]
    rank: int
    projector: PadicMatrix

    def residue_degree(self) -> int:
        """Degree of the residue field of the block's eigenvalue field."""
        return math.lcm(*[len(g) - 1 for g in self.signature]) if self.signature else 1


@dataclass(frozen=True)
class ChainLevel:
    """C^(r)(gamma) for lower < r <= upper (None meaning unbounded)."""

    lower: Fraction | None
    upper: Fraction | None
    blocks: tuple[ChainBlock, ...]

    def contains(self, r) -> bool:
        r = Depth.of(r)
        above = self.lower is None or r > Depth(self.lower)
        below = self.upper is None or r <= Depth(self.upper)
        return above and below

    def block_sizes(self) -> list[int]:
        return sorted(b.rank for b in self.blocks)


@dataclass
class NormalApproximation:
    gamma: PadicMatrix
    terms: list[ApproxTerm]
    tail: PadicMatrix
    valid_to: Fraction | float
    x: tuple[Fraction, ...] | None = None
    chain: list[ChainLevel] = field(default_factory=list)

    @property
    def depths(self) -> list[Fraction]:
        return [t.depth for t in self.terms]

    def product(self) -> PadicMatrix:
        K = self.gamma.precision_steps()
        acc = PadicMatrix.identity(self.gamma.tower, self.gamma.n, K)
        for t in self.terms:
            acc = acc @ t.element
        return acc

    def reconstructs(self) -> bool:
        return (self.product() @ self.tail).equals(self.gamma)

    def head_tail(self, t) -> tuple[PadicMatrix, PadicMatrix]:
        return head_tail(self, t)

    def centralizer(self, r) -> ChainLevel:
        for level in self.chain:
            if level.contains(r):
                return level
        raise ValueError(f"no chain level contains {r}")

    def to_json(self) -> dict:
        return {
            "terms": [{"depth": str(t.depth), "element": t.element.to_json()} for t in self.terms],
            "tail": self.tail.to_json(),
            "valid_to": str(self.valid_to),
            "chain": [
                {
                    "lower": None if lv.lower is None else str(lv.lower),
                    "upper": None if lv.upper is None else str(lv.upper),
                    "blocks": [{"signature": [list(g) for g in b.signature], "rank": b.rank} for b in lv.blocks],
                }
                for lv in self.chain
            ],
        }


def _check_compact(chi: Sequence[TameElement]) -> None:
    _check_integral_charpoly(chi)
    if not chi[0].is_unit():
        raise NotCompactError("determinant is not a unit: gamma is not compact")


def _depth_steps(Z: PadicMatrix) -> tuple[Fraction | float, bool]:
    return root_valuations_min(Z.charpoly())


def normal_approx(gamma: PadicMatrix, x: Sequence | None = None, up_to=None) -> NormalApproximation:
    """Run the leading-term recipe until the tail is 1 at precision.

    With ``up_to = r`` the recipe stops once every eigenvalue of the tail
    is within depth r of 1, giving a normal r-approximation; eigenvalue
    data deeper than r (which may need a larger tower) is never examined.
    """
    T = gamma.tower
    n = gamma.n
    K = gamma.precision_steps()
    chi = gamma.charpoly()
    _check_compact(chi)
    ident = PadicMatrix.identity(T, n, K)
    terms: list[ApproxTerm] = []
    rest = gamma

    g0 = teichmuller_projection(gamma)
    if not g0.equals(ident):
        terms.append(ApproxTerm(g0, Fraction(0), 0, g0))
        rest = g0.inverse() @ gamma

    valid_to: Fraction | float = math.inf
    while True:
        Z = rest - ident
        if Z.is_zero():
            valid_to = Fraction(Z.precision_steps(), T.e)
            break
        m, exact = _depth_steps(Z)
        if up_to is not None and m >= Fraction(up_to) * T.e:
            valid_to = Fraction(up_to)
            break
        if not exact:
            # every remaining eigenvalue has depth >= m / e; nothing finer is certified
            valid_to = m / T.e if m != math.inf else math.inf
            break
        if m.denominator != 1:
            need = T.e * m.denominator
            if need % T.p == 0:
                raise WildError(f"eigenvalues need ramification {need}, divisible by p")
            raise NotTameError(f"eigenvalues need ramification index {need}; extend the tower")
        k = int(m)
        if terms and k <= terms[-1].steps:
            raise AssertionError("depths failed to increase")
        Y = Z.scale(T.pi_power(-k, Z.precision_steps()))
        Y0 = teichmuller_projection(Y)
        term = ident + Y0.scale(T.pi_power(k, K))
        terms.append(ApproxTerm(term, Fraction(k, T.e), k, Y0))
        rest = term.inverse() @ rest

    approx = NormalApproximation(gamma, terms, rest, valid_to, _point(x, n) if x is not None else None)
    approx.chain = centralizer_chain(approx)
    return approx


def is_good(term: ApproxTerm) -> bool:
    """Goodness of an approximation term, decided from its digit matrix.

    At depth 0 the term must have finite order prime to p; at depth d > 0
    the digit matrix Y_0 = (term - 1)/pi^k must satisfy Y_0^Q = Y_0.  In
    both cases distinct eigenvalues differ by units (after removing the
    common depth), which is the goodness condition.
    """
    M = term.digit_matrix
    T = M.tower
    deg = residue_splitting_degree(M)
    Q = T.p ** (T.f * deg)
    K = M.precision_steps()
    if term.steps == 0:
        return (M ** (Q - 1)).equals(PadicMatrix.identity(T, M.n, K)) and term.element.equals(M)
    ident = PadicMatrix.identity(T, M.n, term.element.precision_steps())
    rebuilt = ident + M.scale(T.pi_power(term.steps, ident.precision_steps()))
    return (M**Q).equals(M) and not teichmuller_projection(M, Q).is_zero() and rebuilt.equals(term.element)


def centralizer_chain(approx: NormalApproximation) -> list[ChainLevel]:
    """C^(r)(gamma) for every r, as joint spectral blocks of the terms."""
    gamma = approx.gamma
    T, n = gamma.tower, gamma.n
    K = gamma.precision_steps()
    ident = PadicMatrix.identity(T, n, K)
    blocks: list[ChainBlock] = [ChainBlock((), n, ident)]
    levels: list[ChainLevel] = []
    lower: Fraction | None = None
    for term in approx.terms:
        levels.append(ChainLevel(lower, term.depth, tuple(blocks)))
        projs = spectral_projectors(term.digit_matrix)
        refined: list[ChainBlock] = []
        for b in blocks:
            for g, P in projs:
                Pb = b.projector @ P
                if Pb.is_zero():
                    continue
                r = _integer_trace(Pb)
                if r:
                    refined.append(ChainBlock(b.signature + (g,), r, Pb))
        if sum(b.rank for b in refined) != n:
            raise PrecisionError("joint eigenspace ranks do not add up at precision")
        blocks = refined
        lower = term.depth
    levels.append(ChainLevel(lower, None, tuple(blocks)))
    return levels


def head_tail(approx: NormalApproximation, t) -> tuple[PadicMatrix, PadicMatrix]:
    """The head gamma_{<t} and tail gamma_{>=t} = gamma_{<t}^-1 gamma."""
    t = Depth.of(t)
    if approx.valid_to != math.inf and t > Depth(Fraction(approx.valid_to)):
        raise PrecisionError(f"depth {t} is beyond the approximation's precision {approx.valid_to}")
    g = approx.gamma
    head = PadicMatrix.identity(g.tower, g.n, g.precision_steps())
    for term in approx.terms:
        if Depth(term.depth) < t:
            head = head @ term.element
    return head, head.inverse() @ g


def eigen_partition(eigs: Sequence[TameElement], r) -> list[list[int]]:
    """Partition indices by ord(lambda_i/lambda_j - 1) >= r (r may be r+)."""
    r = Depth.of(r)
    blocks: list[list[int]] = []
    for i, lam in enumerate(eigs):
        for b in blocks:
            o = (lam / eigs[b[0]] - 1).ord()
            if (o > r.value) if r.plus else (o >= r.value):
                b.append(i)
                break
        else:
            blocks.append([i])
    return blocks


# ---------------------------------------------------------------------------
# filtration groups in standard coordinates


@dataclass(frozen=True)
class FieldBlock:
    """A tame field E = W[pi] (W unramified of degree f, pi^e = p) on e*f coordinates.

    E acts by its regular representation on the basis x^i pi^j, and
    ``indices[j*f + i]`` is the coordinate of x^i pi^j.  The point must
    satisfy x[indices[j*f + i]] = x[indices[0]] - j/e, which makes the
    filtration of E at x the valuation filtration of E.
    """

    f: int
    e: int
    indices: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.e * self.f

    def tower(self, p: int) -> TameTower:
        return get_tower(p, self.f, self.e)

    def validate(self, p: int, x: Sequence[Fraction]) -> None:
        if self.e < 1 or self.f < 1 or self.e % p == 0:
            raise InadmissibleSpecError(f"field block (f={self.f}, e={self.e}) is not a tame field over Q_{p}")
        if len(self.indices) != self.dim:
            raise InadmissibleSpecError("a field block needs e*f coordinates")
        x0 = x[self.indices[0]]
        for j in range(self.e):
            for i in range(self.f):
                if x[self.indices[j * self.f + i]] != x0 - Fraction(j, self.e):
                    raise InadmissibleSpecError("point coordinates do not match the field's lattice chain")

    def element_matrix(self, p: int, a: Sequence[int]) -> list[list[int]]:
        """Integer matrix of the integral element with flat coefficients ``a``."""
        return self.tower(p).regular_matrix(a)

    def to_json(self) -> dict:
        return {"f": self.f, "e": self.e, "indices": list(self.indices)}

    @classmethod
    def from_json(cls, data) -> "FieldBlock":
        return cls(int(data["f"]), int(data["e"]), tuple(int(i) for i in data["indices"]))

    def projection(self, p: int, X: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
        """The trace-form projection onto E of a matrix supported on this block.

        ``X`` is the dim x dim sub-block; the result y in E satisfies
        tr(X z) = tr(y z) for every z in E.
        """
        T = self.tower(p)
        d = self.dim
        basis = []
        for b in range(d):
            unit = [0] * d
            unit[b] = 1
            basis.append([[Fraction(c) for c in row] for row in T.regular_matrix(unit)])

        def tr_prod(A, B):
            return sum(A[i][k] * B[k][i] for i in range(d) for k in range(d))

        gram = [[tr_prod(basis[a], basis[b]) for b in range(d)] for a in range(d)]
        rhs = [tr_prod(X, basis[a]) for a in range(d)]
        coeffs = _solve_fractions(gram, rhs)
        out = [[Fraction(0)] * d for _ in range(d)]
        for c, B in zip(coeffs, basis):
            for i in range(d):
                for k in range(d):
                    out[i][k] += c * B[i][k]
        return out


def _solve_fractions(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(A, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                c = M[r][col]
                M[r] = [a - c * bb for a, bb in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


@dataclass(frozen=True)
class Subalgebra:
    """A product of GL(block) factors and embedded tame fields."""

    n: int
    blocks: tuple[tuple[int, ...], ...] = ()
    fields: tuple[FieldBlock, ...] = ()

    def __post_init__(self):
        seen: list[int] = []
        for b in self.blocks:
            seen.extend(b)
        for fb in self.fields:
            seen.extend(fb.indices)
        if len(seen) != len(set(seen)) or any(not 0 <= i < self.n for i in seen):
            raise InadmissibleSpecError("blocks must be disjoint index sets inside range(n)")

    @classmethod
    def full(cls, n: int) -> "Subalgebra":
        return cls(n, (tuple(range(n)),))

    @classmethod
    def torus(cls, n: int) -> "Subalgebra":
        return cls(n, tuple((i,) for i in range(n)))

    @classmethod
    def from_partition(cls, n: int, parts: Iterable[Iterable[int]], fields: Iterable[FieldBlock] = ()) -> "Subalgebra":
        return cls(n, tuple(tuple(sorted(b)) for b in sorted((list(b) for b in parts), key=min)), tuple(fields))

    def split_positions(self) -> set[tuple[int, int]]:
        return {(i, j) for b in self.blocks for i in b for j in b}

    def positions(self) -> set[tuple[int, int]]:
        out = self.split_positions()
        for fb in self.fields:
            out |= {(i, j) for i in fb.indices for j in fb.indices}
        return out

    def contains(self, other: "Subalgebra") -> bool:
        """Is ``other`` a subalgebra of this one (as standard-coordinate data)?"""
        mine = self.split_positions()
        if not other.split_positions() <= mine:
            return False
        for fb in other.fields:
            if fb in self.fields:
                continue
            if not {(i, j) for i in fb.indices for j in fb.indices} <= mine:
                return False
        return True

    def intersect(self, other: "Subalgebra") -> "Subalgebra":
        if self.contains(other):
            return other
        if other.contains(self):
            return self
        fields = []
        for A, B in ((self, other), (other, self)):
            for fb in A.fields:
                if fb in fields:
                    continue
                if fb in B.fields or any(set(fb.indices) <= set(b) for b in B.blocks):
                    fields.append(fb)
                else:
                    raise InadmissibleSpecError("intersection of overlapping field blocks is not supported")
        parts = []
        for a in self.blocks:
            for b in other.blocks:
                c = tuple(sorted(set(a) & set(b)))
                if c:
                    parts.append(c)
        return Subalgebra.from_partition(self.n, parts, fields)

    def lattice_steps(self, x: Sequence[Fraction], s: Depth, k: Depth, e: int) -> int:
        """log_q |A_{x,s} / A_{x,k}| over a base with ramification e."""
        total = 0
        for b in self.blocks:
            for i in b:
                for j in b:
                    c = x[j] - x[i]
                    total += _steps(s - c, k - c, e)
        for fb in self.fields:
            total += fb.f * _steps(s, k, e * fb.e)
        return total

    def to_json(self) -> dict:
        return {"n": self.n, "blocks": [list(b) for b in self.blocks], "fields": [fb.to_json() for fb in self.fields]}

    @classmethod
    def from_json(cls, data) -> "Subalgebra":
        return cls(
            int(data["n"]),
            tuple(tuple(int(i) for i in b) for b in data.get("blocks", [])),
            tuple(FieldBlock.from_json(fd) for fd in data.get("fields", [])),
        )


CONVENTIONS = ("product", "yu")


@dataclass(frozen=True)
class FiltrationGroupSpec:
    """A filtration group attached to nested subalgebras A_0 c A_1 c ... with depths s_l.

    Levels are listed from the innermost centralizer outwards.  Under the
    ``product`` convention the group is the product of the (A_l)_{x, s_l},
    so a root space of A_l gets depth min_{l' >= l} s_l'.  Under the ``yu``
    convention a root space gets the depth of the least level containing
    it, as in (G', G)_{x, (r, s)} = G'_{x,r} together with the roots of G
    outside G' at depth s; this requires s_c <= s_a + s_b whenever
    c <= max(a, b), which is what makes the lattice multiplicatively closed.
    The two conventions agree when depths increase outwards.
    """

    p: int
    x: tuple[Fraction, ...]
    levels: tuple[tuple[Subalgebra, Depth], ...]
    e: int = 1
    f: int = 1
    label: str = ""
    convention: str = "product"

    def __post_init__(self):
        n = len(self.x)
        if self.convention not in CONVENTIONS:
            raise InadmissibleSpecError(f"unknown convention {self.convention!r}")
        for A, s in self.levels:
            if A.n != n:
                raise InadmissibleSpecError("level size differs from the point dimension")
            if not s > Depth(Fraction(0)):
                raise InadmissibleSpecError("filtration depths must be positive (0+ allowed) so that orders are q-powers")
            for fb in A.fields:
                fb.validate(self.p, self.x)
        for (A, _), (B, _) in zip(self.levels, self.levels[1:]):
            if not B.contains(A):
                raise InadmissibleSpecError("levels must be nested from the inside out")
        if self.convention == "yu":
            depths = [s for _, s in self.levels]
            for b in range(len(depths)):
                top = max(depths[: b + 1])
                for a in range(b + 1):
                    if depths[a] + depths[b] < top:
                        raise InadmissibleSpecError("yu depths violate s_c <= s_a + s_b, so the lattice is not a group")

    @property
    def n(self) -> int:
        return len(self.x)

    def effective_depths(self) -> list[Depth]:
        if self.convention == "yu":
            return [s for _, s in self.levels]
        out = []
        for idx in range(len(self.levels)):
            out.append(min(s for _, s in self.levels[idx:]))
        return out

    def max_depth(self) -> Depth:
        return max(s for _, s in self.levels)

    def inside(self, outer: Subalgebra, depth, label: str = "") -> "FiltrationGroupSpec":
        """This group multiplied by outer_{x, depth} (product convention)."""
        if self.convention != "product" and any(s > Depth.of(depth) for _, s in self.levels):
            raise InadmissibleSpecError("only product-convention groups can be multiplied this way")
        return FiltrationGroupSpec(
            self.p, self.x, self.levels + ((outer, Depth.of(depth)),), self.e, self.f, label or self.label
        )

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "e": self.e,
            "f": self.f,
            "x": [str(c) for c in self.x],
            "levels": [{"subalgebra": A.to_json(), "depth": str(s)} for A, s in self.levels],
            "label": self.label,
            "convention": self.convention,
        }

    @classmethod
    def from_json(cls, data) -> "FiltrationGroupSpec":
        return cls(
            int(data["p"]),
            tuple(Fraction(c) for c in data["x"]),
            tuple((Subalgebra.from_json(lv["subalgebra"]), Depth.of(lv["depth"])) for lv in data["levels"]),
            int(data.get("e", 1)),
            int(data.get("f", 1)),
            data.get("label", ""),
            data.get("convention", "product"),
        )


def dc_group_order(spec: FiltrationGroupSpec, modulus) -> int:
    """|H G_{x,k} / G_{x,k}| by counting affine-root lattice steps."""
    return (spec.p**spec.f) ** dc_group_exponent(spec, modulus)


def dc_group_exponent(spec: FiltrationGroupSpec, modulus) -> int:
    k = Depth.of(modulus)
    total = 0
    prev: Subalgebra | None = None
    for (A, _), t in zip(spec.levels, spec.effective_depths()):
        total += A.lattice_steps(spec.x, t, k, spec.e)
        if prev is not None:
            total -= prev.lattice_steps(spec.x, t, k, spec.e)
        prev = A
    return total


def dc_quotient_exponent(num: FiltrationGroupSpec, den: FiltrationGroupSpec, modulus=None) -> int:
    """log_q [num : den] for den contained in num.

    Both groups are taken modulo G_{x,k}; the default k lies beyond every
    depth involved, where the index is exact.
    """
    if modulus is None:
        modulus = max(num.max_depth(), den.max_depth()) + 1
    d = dc_group_exponent(num, modulus) - dc_group_exponent(den, modulus)
    if d < 0:
        raise InadmissibleSpecError("the denominator group is larger than the numerator group")
    return d


def double_bracket(
    chain: Sequence[tuple[Fraction | None, Fraction | None, Subalgebra]],
    p: int,
    x: Sequence,
    t,
    j=None,
    ambient: Subalgebra | None = None,
    e: int = 1,
    f: int = 1,
) -> FiltrationGroupSpec:
    """[[gamma; x, t]] (optionally truncated at j, optionally inside an ambient Levi).

    ``chain`` lists (lower, upper, C) meaning C^(r) = C for lower < r <= upper,
    ordered from the full group (lower None) to the innermost centralizer
    (upper None).  Factor C^(t - i) appears with depth i/2 for 0 < i <= t;
    the truncation keeps only factors with i < 2j.
    """
    t = Depth.of(t)
    jd = None if j is None else Depth.of(j)
    xs = tuple(Fraction(c) for c in x)
    zero_plus = Depth(Fraction(0), True)
    levels: list[tuple[Subalgebra, Depth]] = []
    for lower, upper, C in chain:
        if ambient is not None:
            C = ambient.intersect(C)
        # i ranges over t - upper <= i < t - lower, intersected with (0, t]
        if lower is not None and not (t - lower > Depth(Fraction(0))):
            continue
        if upper is None:
            start = zero_plus
        else:
            lo = t - upper
            start = lo if lo > Depth(Fraction(0)) else zero_plus
        depth = start.half() if start != zero_plus else zero_plus
        if lower is not None and not (start < t - lower):
            continue
        if jd is not None and not (depth < jd):
            continue
        levels.append((C, depth))
    levels.reverse()
    return FiltrationGroupSpec(p, xs, tuple(levels), e, f)


# ---------------------------------------------------------------------------
# direct coset enumeration over Z_p


def _entry_moduli(x: Sequence[Fraction], k: Depth, p: int) -> np.ndarray:
    n = len(x)
    mods = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            c = (k - (x[j] - x[i])).first_step(1)
            mods[i, j] = p ** max(c, 0)
    return mods


def _to_int_mod(c: Fraction, mod: int) -> int:
    if math.gcd(c.denominator, mod) != 1:
        raise InadmissibleSpecError("a generator is not integral at the requested depth")
    return c.numerator * pow(c.denominator, -1, mod) % mod


def _complement(X: list[list[Fraction]], A: Subalgebra, p: int) -> list[list[Fraction]]:
    """X minus its trace-form projection onto A."""
    n = len(X)
    keep = A.split_positions()
    proj = [[X[i][j] if (i, j) in keep else Fraction(0) for j in range(n)] for i in range(n)]
    for fb in A.fields:
        idx = fb.indices
        sub = [[X[i][j] for j in idx] for i in idx]
        y = fb.projection(p, sub)
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                proj[i][j] = y[a][b]
    return [[X[i][j] - proj[i][j] for j in range(n)] for i in range(n)]


def coset_generators(spec: FiltrationGroupSpec, modulus) -> list[np.ndarray]:
    """Integer matrices generating H modulo G_{x,k}, with k = ``modulus``."""
    if spec.e != 1 or spec.f != 1:
        raise ValueError("coset enumeration is implemented over Z_p only")
    p, x, n = spec.p, spec.x, spec.n
    if any(abs(a - b) >= 1 for a in x for b in x):
        raise ValueError("coset enumeration needs point coordinates within distance < 1")
    k = Depth.of(modulus)
    mods = _entry_moduli(x, k, p)
    gens: list[np.ndarray] = []

    def push(X: list[list[Fraction]]) -> None:
        g = np.eye(n, dtype=np.int64)
        for i in range(n):
            for j in range(n):
                if X[i][j]:
                    g[i, j] = (g[i, j] + _to_int_mod(X[i][j], int(mods[i, j]))) % mods[i, j]
        gens.append(g)

    prev: Subalgebra | None = None
    for A, s in spec.levels:
        strip = spec.convention == "yu" and prev is not None
        for b in A.blocks:
            for i in b:
                for j in b:
                    # every step from the depth of s up to the modulus, so that
                    # the deeper graded pieces need not arise from commutators
                    lo = max((s - (x[j] - x[i])).first_step(1), 0)
                    hi = max((k - (x[j] - x[i])).first_step(1), 0)
                    for v in range(lo, max(hi, lo + 1)):
                        X = [[Fraction(0)] * n for _ in range(n)]
                        X[i][j] = Fraction(p**v)
                        if strip:
                            X = _complement(X, prev, p)
                        push(X)
        for fb in A.fields:
            if strip and fb in prev.fields:
                continue
            d = fb.dim
            # 1 + pi^l x^i for every step l from the depth of s up to the modulus
            for l in range(s.first_step(fb.e), k.first_step(fb.e) + 1):
                q, jj = divmod(l, fb.e)
                for i in range(fb.f):
                    a = [0] * d
                    a[jj * fb.f + i] = p**q
                    M = fb.element_matrix(p, a)
                    X = [[Fraction(0)] * n for _ in range(n)]
                    for r_, ir in enumerate(fb.indices):
                        for c_, ic in enumerate(fb.indices):
                            X[ir][ic] = Fraction(M[r_][c_])
                    if strip:
                        X = _complement(X, prev, p)
                    push(X)
        prev = A
    return gens


def coset_enumeration(spec: FiltrationGroupSpec, modulus, limit: int = 100_000, keep: bool = False):
    """|H G_{x,k} / G_{x,k}| by breadth-first closure of explicit generators.

    With ``keep`` the reduced representatives are returned as well.
    """
    k = Depth.of(modulus)
    n = spec.n
    mods = _entry_moduli(spec.x, k, spec.p)
    gens = [g % mods for g in coset_generators(spec, k)]
    start = np.eye(n, dtype=np.int64) % mods
    seen = {start.tobytes(): start}
    frontier = start[None, :, :]
    while len(frontier):
        new = []
        for g in gens:
            prod = np.matmul(frontier, g) % mods
            for mat in prod:
                key = mat.tobytes()
                if key not in seen:
                    seen[key] = mat
                    new.append(mat)
                    if len(seen) > limit:
                        raise EnumerationTooLargeError(f"more than {limit} cosets")
        frontier = np.array(new, dtype=np.int64).reshape(-1, n, n)
    if keep:
        return len(seen), list(seen.values())
    return len(seen)


def coset_exponent(spec: FiltrationGroupSpec, modulus, limit: int = 100_000) -> int:
    count = coset_enumeration(spec, modulus, limit)
    q = spec.p**spec.f
    e = round(math.log(count, q)) if count > 1 else 0
    if q**e != count:
        raise AssertionError(f"coset count {count} is not a power of {q}")
    return e


# ---------------------------------------------------------------------------
# chains from approximations


def chain_subalgebras(approx: NormalApproximation) -> list[tuple[Fraction | None, Fraction | None, Subalgebra]]:
    """Standard-coordinate centralizer chain, when every projector is diagonal 0/1."""
    out = []
    n = approx.gamma.n
    for level in approx.chain:
        parts = []
        for b in level.blocks:
            idx = []
            for i in range(n):
                for j in range(n):
                    a = b.projector[i, j]
                    if i != j and not a.is_zero():
                        raise ValueError("centralizer blocks are not in standard coordinates")
                if not b.projector[i, i].is_zero():
                    if not (b.projector[i, i] - 1).is_zero():
                        raise ValueError("centralizer blocks are not in standard coordinates")
                    idx.append(i)
            parts.append(idx)
        out.append((level.lower, level.upper, Subalgebra.from_partition(n, parts)))
    return out
