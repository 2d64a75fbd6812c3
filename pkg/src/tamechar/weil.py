"""Weil representations of finite symplectic groups and their characters.

The explicit model is the Schroedinger model on functions of x in F^n for
the standard form J = [[0, I], [-I, 0]] on column vectors (a; b).  With
psi = Lambda (composed with the absolute trace):

* m(A) = diag(A, A^-T) acts by f(x) -> sgn(det A) f(A^-1 x),
* l(S) = [[I, 0], [S, I]] acts by multiplication by psi(-x^T S x / 2),
* the partial Weyl element w_r acts by c^r times the Fourier transform in
  the first r coordinates, f(x) -> sum_y psi(x'.y') f(y', x'').

The scalar c satisfies c^2 = sgn(-1)/q, so c = kappa * G/q with G the raw
one-dimensional Gauss sum and kappa = +-1 fixed by the relation
(J l(1))^3 = -1 in SL_2.  Every element has a Bruhat factorisation
g = m(X^-1) l(S) m(A3) w_r l(-T) m(Y^T); the operator is therefore
"monomial * partial Fourier * monomial", whose matrix entries and trace can
be read off in O(q^n) work.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .exactnum import CycContext, CycNumber, QPowerSqrt, cyc_equal
from .ffield import (
    FqField,
    Matrix,
    all_vectors,
    det,
    get_field,
    is_semisimple,
    mat_identity,
    mat_inverse,
    mat_mul,
    mat_transpose,
    mat_vec,
    nullspace,
    rank,
    rref,
    solve,
    span_contains,
)

MODEL_LIMIT = 5000


class NotSymplecticError(ValueError):
    """The matrix does not preserve the symplectic form."""


class WeilCaseError(ValueError):
    """The element fits none of the cases of the character formula."""


# ---------------------------------------------------------------------------
# matrix helpers


def _mat_add(F: FqField, A: Matrix, B: Matrix) -> Matrix:
    return [[F.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _mat_sub(F: FqField, A: Matrix, B: Matrix) -> Matrix:
    return [[F.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _mat_neg(F: FqField, A: Matrix) -> Matrix:
    return [[F.neg(a) for a in r] for r in A]


def _block(M: Matrix, r0: int, r1: int, c0: int, c1: int) -> Matrix:
    return [row[c0:c1] for row in M[r0:r1]]


def _from_blocks(A: Matrix, B: Matrix, C: Matrix, D: Matrix) -> Matrix:
    return [ra + rb for ra, rb in zip(A, B)] + [rc + rd for rc, rd in zip(C, D)]


def _zeros(n: int, m: int | None = None) -> Matrix:
    return [[0] * (n if m is None else m) for _ in range(n)]


def _combine(F: FqField, coeffs: Sequence[int], basis: Sequence[Sequence[int]], d: int) -> list[int]:
    out = [0] * d
    for c, b in zip(coeffs, basis):
        if c:
            for i, x in enumerate(b):
                if x:
                    out[i] = F.add(out[i], F.mul(c, x))
    return out


def _coords(F: FqField, basis: Matrix, v: Sequence[int]) -> list[int]:
    """Coordinates of v in the (column) basis given as a list of vectors."""
    A = mat_transpose(basis)
    sol = solve(F, A, v)
    if sol is None:
        raise ValueError("vector outside the span")
    return sol


def _restrict_map(F: FqField, g: Matrix, basis: Matrix) -> Matrix:
    """Matrix of g on an invariant subspace, in the given basis (columns)."""
    cols = [_coords(F, basis, mat_vec(F, g, b)) for b in basis]
    return mat_transpose(cols)


# ---------------------------------------------------------------------------
# symplectic spaces


@dataclass(frozen=True)
class SymplecticSpace:
    """F^(2n) with the alternating form <v, w> = v^T G w."""

    field: FqField
    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "gram", tuple(tuple(int(a) for a in r) for r in self.gram))
        F = self.field
        d = len(self.gram)
        if d % 2:
            raise ValueError("a symplectic space has even dimension")
        for i in range(d):
            if self.gram[i][i] != 0:
                raise ValueError("Gram matrix is not alternating")
            for j in range(d):
                if self.gram[i][j] != F.neg(self.gram[j][i]):
                    raise ValueError("Gram matrix is not antisymmetric")
        if d and det(F, [list(r) for r in self.gram]) == 0:
            raise ValueError("Gram matrix is degenerate")

    @classmethod
    def standard(cls, F: FqField, n: int) -> "SymplecticSpace":
        G = _zeros(2 * n)
        for i in range(n):
            G[i][n + i] = 1
            G[n + i][i] = F.neg(1)
        return cls(F, G)

    @property
    def dim(self) -> int:
        return len(self.gram)

    @property
    def half_dim(self) -> int:
        return self.dim // 2

    @property
    def G(self) -> Matrix:
        return [list(r) for r in self.gram]

    def form(self, v: Sequence[int], w: Sequence[int]) -> int:
        F = self.field
        acc = 0
        for i, vi in enumerate(v):
            if vi:
                row = self.gram[i]
                for j, wj in enumerate(w):
                    if wj and row[j]:
                        acc = F.add(acc, F.mul(vi, F.mul(row[j], wj)))
        return acc

    def is_symplectic(self, g: Matrix) -> bool:
        F = self.field
        gt = mat_transpose(g)
        return mat_mul(F, mat_mul(F, gt, self.G), g) == self.G

    def require_symplectic(self, g: Matrix) -> None:
        if len(g) != self.dim or any(len(r) != self.dim for r in g) or not self.is_symplectic(g):
            raise NotSymplecticError("matrix is not in Sp(V)")

    def perp(self, vectors: Matrix) -> Matrix:
        """Basis of {u : <v, u> = 0 for all v in vectors}."""
        if not vectors:
            return mat_identity(self.dim)
        rows = [mat_vec(self.field, mat_transpose(self.G), v) for v in vectors]
        return nullspace(self.field, rows, self.dim)

    def symplectic_basis(self) -> Matrix:
        """P (columns e_1..e_n, f_1..f_n) with P^T G P = J standard."""
        F = self.field
        es: list[list[int]] = []
        fs: list[list[int]] = []
        W = mat_identity(self.dim)
        while W:
            e = W[0]
            f = next(u for u in W if self.form(e, u) != 0)
            c = F.inv(self.form(e, f))
            f = [F.mul(c, x) for x in f]
            es.append(e)
            fs.append(f)
            cond = [[self.form(u, e) for u in W], [self.form(u, f) for u in W]]
            W = [_combine(F, co, W, self.dim) for co in nullspace(F, cond, len(W))]
        return mat_transpose(es + fs)

    def restrict(self, basis: Matrix) -> "SymplecticSpace":
        return SymplecticSpace(self.field, [[self.form(u, v) for v in basis] for u in basis])

    def to_json(self) -> dict:
        return {"field": self.field.to_json(), "gram": [list(r) for r in self.gram]}


def orthogonal_sum(spaces: Sequence[SymplecticSpace], maps: Sequence[Matrix]) -> tuple[SymplecticSpace, Matrix]:
    """Block-diagonal symplectic space and element."""
    F = spaces[0].field
    d = sum(s.dim for s in spaces)
    G = _zeros(d)
    g = _zeros(d)
    off = 0
    for s, m in zip(spaces, maps):
        for i in range(s.dim):
            for j in range(s.dim):
                G[off + i][off + j] = s.gram[i][j]
                g[off + i][off + j] = m[i][j]
        off += s.dim
    return SymplecticSpace(F, G), g


# ---------------------------------------------------------------------------
# Bruhat factorisation in Sp(2n) for the standard form


def m_elt(F: FqField, A: Matrix) -> Matrix:
    n = len(A)
    return _from_blocks(A, _zeros(n), _zeros(n), mat_transpose(mat_inverse(F, A)))


def l_elt(F: FqField, S: Matrix) -> Matrix:
    n = len(S)
    return _from_blocks(mat_identity(n), _zeros(n), S, mat_identity(n))


def w_elt(F: FqField, n: int, r: int) -> Matrix:
    E = [[1 if (i == j and i < r) else 0 for j in range(n)] for i in range(n)]
    IE = [[1 if (i == j and i >= r) else 0 for j in range(n)] for i in range(n)]
    return _from_blocks(IE, E, _mat_neg(F, E), IE)


@dataclass
class Bruhat:
    """g = m(Xinv) l(S) m(A3) w_r l(-T) m(Yt)."""

    Xinv: Matrix
    S: Matrix
    A3: Matrix
    r: int
    T: Matrix
    Yt: Matrix

    def product(self, F: FqField) -> Matrix:
        n = len(self.S)
        parts = [
            m_elt(F, self.Xinv),
            l_elt(F, self.S),
            m_elt(F, self.A3),
            w_elt(F, n, self.r),
            l_elt(F, _mat_neg(F, self.T)),
            m_elt(F, self.Yt),
        ]
        out = mat_identity(2 * n)
        for p in parts:
            out = mat_mul(F, out, p)
        return out


def _rank_normal_form(F: FqField, B: Matrix) -> tuple[Matrix, Matrix, int]:
    """Invertible X, Y with X B Y = E_r."""
    n = len(B)
    aug = [list(B[i]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    R, piv = rref(F, aug)
    pivB = [c for c in piv if c < n]
    r = len(pivB)
    X = [row[n:] for row in R]
    rows = [row[:n] for row in R[:r]]
    for c in range(n):
        if c not in pivB:
            rows.append([1 if j == c else 0 for j in range(n)])
    Y = mat_inverse(F, rows)
    return X, Y, r


def bruhat_decompose(F: FqField, g: Matrix) -> Bruhat:
    n = len(g) // 2
    B = _block(g, 0, n, n, 2 * n)
    X, Y, r = _rank_normal_form(F, B)
    g1 = mat_mul(F, mat_mul(F, m_elt(F, X), g), m_elt(F, mat_transpose(mat_inverse(F, Y))))
    A1 = _block(g1, 0, n, 0, n)
    T = _zeros(n)
    for i in range(r):
        for j in range(r):
            T[i][j] = F.neg(A1[i][j])
    g2 = mat_mul(F, g1, l_elt(F, T))
    g3 = mat_mul(F, g2, mat_inverse(F, w_elt(F, n, r)))
    assert all(x == 0 for row in _block(g3, 0, n, n, 2 * n) for x in row)
    A3 = _block(g3, 0, n, 0, n)
    C3 = _block(g3, n, 2 * n, 0, n)
    S = mat_mul(F, C3, mat_inverse(F, A3))
    return Bruhat(mat_inverse(F, X), S, A3, r, T, mat_transpose(Y))


# ---------------------------------------------------------------------------
# group-ring matrices: entries sum_k a_k zeta_p^k with an exact scalar


@dataclass
class GRMatrix:
    """scalar * M with M[i, j] = sum_k data[i, j, k] zeta_p^k."""

    p: int
    scalar: CycNumber
    data: np.ndarray

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def __matmul__(self, other: "GRMatrix") -> "GRMatrix":
        p = self.p
        out = np.zeros_like(self.data)
        for a in range(p):
            Aa = self.data[:, :, a]
            if not Aa.any():
                continue
            for b in range(p):
                Bb = other.data[:, :, b]
                if Bb.any():
                    out[:, :, (a + b) % p] += Aa @ Bb
        return GRMatrix(p, self.scalar * other.scalar, out)

    def entry(self, i: int, j: int) -> CycNumber:
        ctx = CycContext(self.scalar.N)
        return self.scalar * ctx.from_counts(self.p, [int(c) for c in self.data[i, j]])

    def trace(self) -> CycNumber:
        ctx = CycContext(self.scalar.N)
        counts = np.einsum("iik->k", self.data)
        return self.scalar * ctx.from_counts(self.p, [int(c) for c in counts])

    def equals(self, other: "GRMatrix") -> bool:
        # entries are compared after normalising away the relation sum zeta^k = 0
        for i in range(self.size):
            for j in range(self.size):
                a = self.data[i, j]
                b = other.data[i, j]
                if not (a.any() or b.any()):
                    continue
                if not cyc_equal(self.entry(i, j), other.entry(i, j)):
                    return False
        return True


# ---------------------------------------------------------------------------
# monomial operators (Lf)(x) = sign(x) zeta^phase(x) f(perm(x))


@dataclass
class Monomial:
    phase: np.ndarray
    sign: np.ndarray
    perm: np.ndarray

    def then(self, other: "Monomial", p: int) -> "Monomial":
        """The operator product self * other."""
        return Monomial(
            (self.phase + other.phase[self.perm]) % p,
            self.sign * other.sign[self.perm],
            other.perm[self.perm],
        )


class WeilModel:
    """The Schroedinger model of the Weil representation of Sp(V)."""

    def __init__(self, space: SymplecticSpace):
        F = space.field
        n = space.half_dim
        N = F.q**n
        if N > MODEL_LIMIT:
            raise ValueError(f"model dimension {F.q}^{n} exceeds {MODEL_LIMIT}")
        self.space = space
        self.field = F
        self.n = n
        self.N = N
        self.p = F.p
        self.ctx = CycContext.for_prime(F.p)
        self._add, self._mul, self._neg, self._tr, _ = F.tables()
        idx = np.arange(N, dtype=np.int64)
        cols = []
        for _ in range(n):
            cols.append(idx % F.q)
            idx = idx // F.q
        self.vectors = np.stack(cols, axis=1) if n else np.zeros((1, 0), dtype=np.int64)
        self._weights = np.array([F.q**i for i in range(n)], dtype=np.int64)
        self.basis_change = space.symplectic_basis()
        self.basis_change_inv = mat_inverse(F, self.basis_change)
        self.half = F.inv(F.from_int(2))

    # -- vectorised helpers ---------------------------------------------

    def _index(self, vecs: np.ndarray) -> np.ndarray:
        if self.n == 0:
            return np.zeros(vecs.shape[0], dtype=np.int64)
        return vecs @ self._weights

    def _apply_matrix(self, A: Matrix) -> np.ndarray:
        V = self.vectors
        out = np.zeros_like(V)
        for i in range(self.n):
            acc = np.zeros(V.shape[0], dtype=np.int64)
            for j in range(self.n):
                if A[i][j]:
                    acc = self._add[acc, self._mul[A[i][j], V[:, j]]]
            out[:, i] = acc
        return out

    def _quad_trace(self, S: Matrix, scale: int) -> np.ndarray:
        """Tr(scale * x^T S x) for every x."""
        V = self.vectors
        acc = np.zeros(V.shape[0], dtype=np.int64)
        for i in range(self.n):
            for j in range(self.n):
                if S[i][j]:
                    acc = self._add[acc, self._mul[self._mul[S[i][j], V[:, i]], V[:, j]]]
        return self._tr[self._mul[scale, acc]]

    # -- generators ----------------------------------------------------

    def op_m(self, A: Matrix) -> Monomial:
        F = self.field
        s = F.sgn(det(F, A))
        perm = self._index(self._apply_matrix(mat_inverse(F, A)))
        N = self.N
        return Monomial(np.zeros(N, dtype=np.int64), np.full(N, s, dtype=np.int64), perm)

    def op_l(self, S: Matrix) -> Monomial:
        F = self.field
        phase = self._quad_trace(S, F.neg(self.half))
        N = self.N
        return Monomial(phase % self.p, np.ones(N, dtype=np.int64), np.arange(N, dtype=np.int64))

    @cached_property
    def gauss_raw(self) -> CycNumber:
        F = self.field
        counts = [0] * self.p
        for t in range(F.q):
            counts[F.absolute_trace(F.mul(t, t))] += 1
        return CycContext(self.p).from_counts(self.p, counts)

    @cached_property
    def weyl_scalar(self) -> CycNumber:
        """c with c^2 = sgn(-1)/q and (c F M)^3 = W(-1) in the rank-one model."""
        F = self.field
        sub = WeilModel(SymplecticSpace.standard(F, 1))
        sub.__dict__["weyl_scalar"] = CycNumber.rational(self.p, 1)
        # with a unit scalar, W(J) is the bare Fourier transform
        FM = sub.matrix(w_elt(F, 1, 1), standard=True) @ sub.matrix(l_elt(F, [[1]]), standard=True)
        cube = FM @ FM @ FM
        minus = sub.matrix(_mat_neg(F, mat_identity(2)), standard=True)
        for kappa in (1, -1):
            c = self.gauss_raw * kappa / F.q
            if GRMatrix(cube.p, cube.scalar * c**3, cube.data).equals(minus):
                return c
        raise AssertionError("no normalisation of the Weyl element satisfies (J l)^3 = -1")

    # -- elements ----------------------------------------------------------

    def to_standard(self, g: Matrix) -> Matrix:
        F = self.field
        return mat_mul(F, mat_mul(F, self.basis_change_inv, g), self.basis_change)

    def factor(self, g: Matrix, standard: bool = False) -> tuple[Monomial, int, Monomial]:
        F = self.field
        if not standard:
            self.space.require_symplectic(g)
            g = self.to_standard(g)
        b = bruhat_decompose(F, g)
        L = self.op_m(b.Xinv).then(self.op_l(b.S), self.p).then(self.op_m(b.A3), self.p)
        R = self.op_l(_mat_neg(F, b.T)).then(self.op_m(b.Yt), self.p)
        return L, b.r, R

    def _fourier_phase(self, X: np.ndarray, Y: np.ndarray, r: int) -> np.ndarray:
        acc = np.zeros(X.shape[0], dtype=np.int64)
        for i in range(r):
            acc = self._add[acc, self._mul[X[:, i], Y[:, i]]]
        return self._tr[acc]

    def matrix(self, g: Matrix, standard: bool = False) -> GRMatrix:
        """The full operator W(g) as a group-ring matrix."""
        L, r, R = self.factor(g, standard)
        N, p, q = self.N, self.p, self.field.q
        data = np.zeros((N, N, p), dtype=np.int64)
        V = self.vectors
        sx = V[L.perm]  # sigma_L(x) as vectors
        for yidx in range(q**r):
            yp = []
            t = yidx
            for _ in range(r):
                t, d = divmod(t, q)
                yp.append(d)
            u = sx.copy()
            for i, d in enumerate(yp):
                u[:, i] = d
            uidx = self._index(u)
            phase = (L.phase + self._fourier_phase(sx, u, r) + R.phase[uidx]) % p
            sign = L.sign * R.sign[uidx]
            cols = R.perm[uidx]
            np.add.at(data, (np.arange(N), cols, phase), sign)
        scalar = self.weyl_scalar**r if r else CycNumber.rational(self.p, 1)
        return GRMatrix(p, scalar, data)

    def trace(self, g: Matrix, standard: bool = False) -> CycNumber:
        """Tr W(g) exactly, in O(q^n) work."""
        L, r, R = self.factor(g, standard)
        p = self.p
        V = self.vectors
        inv = np.empty_like(R.perm)
        inv[R.perm] = np.arange(self.N)
        x = np.arange(self.N)
        u = inv  # u with sigma_R(u) = x
        sx = V[L.perm]
        uv = V[u]
        ok = np.all(uv[:, r:] == sx[:, r:], axis=1) if r < self.n else np.ones(self.N, dtype=bool)
        phase = (L.phase + self._fourier_phase(sx, uv, r) + R.phase[u]) % p
        sign = L.sign * R.sign[u]
        counts = np.zeros(p, dtype=np.int64)
        np.add.at(counts, phase[ok], sign[ok])
        value = CycContext(p).from_counts(p, [int(c) for c in counts])
        if r:
            value = value * self.weyl_scalar**r
        return value.lift_to(self.ctx.N)


def weil_build(space: SymplecticSpace) -> WeilModel:
    return WeilModel(space)


def weil_char_bruteforce(model: WeilModel, g: Matrix) -> CycNumber:
    """Trace of W(g) in the explicit model."""
    return model.trace(g)


# ---------------------------------------------------------------------------
# the closed-form character


def _is_totally_isotropic(space: SymplecticSpace, vecs: Matrix) -> bool:
    return all(space.form(a, b) == 0 for a in vecs for b in vecs)


def _cyclic_span(F: FqField, g: Matrix, v: Sequence[int]) -> Matrix:
    out: Matrix = []
    cur = list(v)
    while any(cur) and not span_contains(F, out, cur):
        out.append(cur)
        cur = mat_vec(F, g, cur)
    return out


def maximal_invariant_isotropic(space: SymplecticSpace, g: Matrix) -> Matrix:
    """A maximal g-invariant totally isotropic subspace, by greedy extension.

    W is extended by cyclic subspaces F[g]v; once no vector extends W, no
    larger invariant isotropic subspace contains it.
    """
    F = space.field
    W: Matrix = []
    while True:
        P = space.perp(W)
        for coeffs in all_vectors(F, len(P)):
            v = _combine(F, coeffs, P, space.dim)
            if not any(v) or span_contains(F, W, v):
                continue
            basis = _independent(F, W + _cyclic_span(F, g, v))
            if _is_totally_isotropic(space, basis):
                W = basis
                break
        else:
            return W


def _independent(F: FqField, vecs: Matrix) -> Matrix:
    out: Matrix = []
    for v in vecs:
        if not span_contains(F, out, v):
            out.append(list(v))
    return out


def _complete_basis(F: FqField, sub: Matrix, whole: Matrix) -> Matrix:
    """Vectors of ``whole`` extending ``sub`` to a basis of span(whole)."""
    out: Matrix = []
    cur = [list(v) for v in sub]
    for v in whole:
        if not span_contains(F, cur, v):
            cur.append(list(v))
            out.append(list(v))
    return out


def _quotient_map(F: FqField, g: Matrix, sub: Matrix, ext: Matrix) -> Matrix:
    """Matrix of g on span(sub + ext)/span(sub), in the basis ext."""
    basis = sub + ext
    k = len(sub)
    cols = []
    for v in ext:
        c = _coords(F, basis, mat_vec(F, g, v))
        cols.append(c[k:])
    return mat_transpose(cols) if cols else []


@dataclass
class WeilFormulaResult:
    value: CycNumber
    case: str
    detail: dict = field(default_factory=dict)


def _fixed_space(F: FqField, g: Matrix) -> Matrix:
    d = len(g)
    return nullspace(F, _mat_sub(F, g, mat_identity(d)), d)


def _image(F: FqField, A: Matrix) -> Matrix:
    cols = mat_transpose(A)
    return _independent(F, cols)


def weil_char_formula(space: SymplecticSpace, g: Matrix, _check: bool = True) -> WeilFormulaResult:
    """The character value by the closed-form case analysis."""
    F = space.field
    ctx = CycContext.for_prime(F.p)
    if _check:
        space.require_symplectic(g)
        if space.dim and not is_semisimple(F, g):
            raise WeilCaseError("the closed form is applied to semisimple elements only")
    d = space.dim
    if d == 0:
        return WeilFormulaResult(ctx.one, "empty")
    fixed = _fixed_space(F, g)
    if not fixed:
        Vp = maximal_invariant_isotropic(space, g)
        perp = space.perp(Vp)
        ext = _complete_basis(F, Vp, perp)
        g0 = _quotient_map(F, g, Vp, ext)
        dim0 = len(ext)
        gp = _restrict_map(F, g, Vp) if Vp else []
        det_plus = det(F, gp) if Vp else 1
        det_0 = det(F, _mat_sub(F, g0, mat_identity(dim0))) if dim0 else 1
        val = F.mul(F.from_int((-1) ** (dim0 // 2)), F.mul(det_plus, det_0))
        s = F.sgn(val)
        return WeilFormulaResult(ctx.rational(s), "a", {"dim_plus": len(Vp), "dim_0": dim0})
    # choose a fixed vector outside im(g - 1) when possible
    gm1 = _mat_sub(F, g, mat_identity(d))
    img = _image(F, gm1)
    e = next((v for v in fixed if not span_contains(F, img, v)), None)
    if e is None:
        e = fixed[0]
        eperp = space.perp([e])
        ext = _complete_basis(F, [e], eperp)
        sub_space = SymplecticSpace(F, [[space.form(a, b) for b in ext] for a in ext])
        g0 = _quotient_map(F, g, [e], ext)
        inner = weil_char_formula(sub_space, g0, _check=False)
        return WeilFormulaResult(inner.value, "b", {"inner": inner.case})
    eperp = space.perp([e])
    # g-invariant complement of F e in e^perp: (fixed part without e) + image part
    g_e = _restrict_map(F, g, eperp)
    k = len(eperp)
    A = _mat_sub(F, g_e, mat_identity(k))
    Ak = A
    for _ in range(k):
        Ak = mat_mul(F, Ak, A)
    im_coords = _image(F, Ak)
    im_vecs = [_combine(F, c, eperp, d) for c in im_coords]
    fixed_e = [v for v in _independent(F, [_combine(F, c, eperp, d) for c in nullspace(F, A, k)])]
    # a functional-kernel complement of e inside the fixed part of e^perp
    fext = _complete_basis(F, [e], fixed_e)
    V0 = fext + im_vecs
    assert len(V0) + 1 == k
    sub_space = SymplecticSpace(F, [[space.form(a, b) for b in V0] for a in V0])
    g0 = _restrict_map(F, g, V0) if V0 else []
    inner = weil_char_formula(sub_space, g0, _check=False) if V0 else WeilFormulaResult(ctx.one, "empty")
    V0perp = space.perp(V0) if V0 else mat_identity(d)
    f = next(v for v in V0perp if not span_contains(F, [e], v))
    gf = mat_vec(F, g, f)
    c = space.form(gf, f)
    counts = [0] * F.p
    for t in range(F.q):
        counts[F.absolute_trace(F.mul(F.mul(t, t), c))] += 1
    gsum = ctx.from_counts(F.p, counts)
    return WeilFormulaResult(inner.value * gsum, "c", {"inner": inner.case})


# ---------------------------------------------------------------------------
# enumerating elements


def symplectic_group_elements(F: FqField, n: int) -> list[Matrix]:
    """Every element of Sp(2n, F) for tiny cases (used for class enumeration)."""
    space = SymplecticSpace.standard(F, n)
    out = []
    d = 2 * n
    for entries in itertools.product(range(F.q), repeat=d * d):
        g = [list(entries[i * d : (i + 1) * d]) for i in range(d)]
        if space.is_symplectic(g):
            out.append(g)
    return out


def random_symplectic(F: FqField, n: int, rng: random.Random, length: int = 8) -> Matrix:
    """A random word in the generators m(A), l(S), u(S) and w_r."""
    g = mat_identity(2 * n)
    for _ in range(length):
        k = rng.randrange(3)
        if k == 0:
            while True:
                A = [[rng.randrange(F.q) for _ in range(n)] for _ in range(n)]
                if det(F, A):
                    break
            h = m_elt(F, A)
        elif k == 1:
            S = _zeros(n)
            for i in range(n):
                for j in range(i, n):
                    S[i][j] = S[j][i] = rng.randrange(F.q)
            h = l_elt(F, S)
        else:
            h = w_elt(F, n, rng.randrange(1, n + 1))
        g = mat_mul(F, g, h)
    return g


def sl2_semisimple_class_reps(F: FqField) -> list[Matrix]:
    """One element from each semisimple conjugacy class of SL_2(F) = Sp(2, F).

    Classes are found by brute force: all elements, grouped by conjugation
    orbits, keeping semisimple ones.
    """
    elems = symplectic_group_elements(F, 1)
    key = lambda g: tuple(tuple(r) for r in g)
    remaining = {key(g): g for g in elems}
    reps = []
    while remaining:
        k0, g0 = next(iter(remaining.items()))
        orbit = set()
        for h in elems:
            hi = mat_inverse(F, h)
            orbit.add(key(mat_mul(F, mat_mul(F, h, g0), hi)))
        for k in orbit:
            remaining.pop(k, None)
        if is_semisimple(F, g0):
            reps.append(g0)
    return reps


# ---------------------------------------------------------------------------
# Xi data and the epsilon sign


XI_CLASSES = ("xi_1", "symm_minus_one", "symm_inverse", "non_symm")


@dataclass(frozen=True)
class XiOrbit:
    """One Gamma-orbit representative.

    ``kind`` is one of
      * ``symm_minus_one`` (symmetric, alpha(gamma_0) = -1),
      * ``symm_inverse`` (symmetric, alpha(gamma_0) != +-1),
      * ``non_symm`` (a +-pair of non-symmetric orbits, alpha(gamma_0) != 1).
    ``field`` is the residue field f_alpha and ``value`` the code of
    alpha(gamma_0) in it.
    """

    kind: str
    field: FqField
    value: int | None = None

    @property
    def f(self) -> int:
        return self.field.n

    def validate(self) -> None:
        F = self.field
        if self.kind == "symm_minus_one":
            if self.value is not None and self.value != F.neg(1):
                raise ValueError("symm_minus_one orbit needs alpha(gamma_0) = -1")
            if self.f % 2:
                raise ValueError("symm_minus_one orbit needs even residue degree")
        elif self.kind == "symm_inverse":
            if self.value in (None, 0, 1, F.neg(1)):
                raise ValueError("symm_inverse orbit needs alpha(gamma_0) outside {0, +-1}")
            if self.f % 2:
                raise ValueError("symm_inverse orbit needs even residue degree")
            Q = F.p ** (self.f // 2)
            if F.pow(self.value, Q + 1) != 1:
                raise ValueError("symm_inverse orbit needs alpha(gamma_0) of norm one to the half field")
        elif self.kind == "non_symm":
            if self.value in (None, 0, 1):
                raise ValueError("non_symm orbit needs alpha(gamma_0) outside {0, 1}")
        else:
            raise ValueError(f"unknown orbit kind {self.kind!r}")


@dataclass(frozen=True)
class XiData:
    """Orbit records plus the F_p-dimension of the gamma-fixed block."""

    base: FqField
    orbits: tuple[XiOrbit, ...] = ()
    fixed_dim: int = 0

    def validate(self) -> None:
        if self.fixed_dim % 2:
            raise ValueError("the fixed block is symplectic, so has even dimension")
        for o in self.orbits:
            if o.field.p != self.base.p or o.field.n % self.base.n:
                raise ValueError("orbit residue fields must extend the base residue field")
            o.validate()

    @property
    def total_dim(self) -> int:
        """F_p-dimension of the whole module."""
        d = self.fixed_dim
        for o in self.orbits:
            d += 2 * o.f if o.kind == "non_symm" else o.f
        return d


def epsilon_sign(xi: XiData) -> int:
    """The sign eps(phi, gamma) from the orbit data."""
    xi.validate()
    base = xi.base
    # residue degrees f_alpha are taken relative to the base residue field
    deg = sum(o.f // base.n for o in xi.orbits if o.kind in ("symm_minus_one", "symm_inverse"))
    if deg % 2:
        raise ValueError("f(symm) must be even")
    s = base.sgn(base.neg(1)) ** (deg // 2)
    for o in xi.orbits:
        if o.kind == "non_symm":
            s *= o.field.sgn(o.value)
        elif o.kind == "symm_inverse":
            s *= o.field.sgn(o.field.sub(1, o.value))
    return s


def epsilon_cardinality(xi: XiData) -> QPowerSqrt:
    """p^(dim of the fixed block / 2), kept symbolic."""
    return QPowerSqrt.of(xi.base.p, xi.fixed_dim * xi.base.n, CycContext.for_prime(xi.base.p).N)


# -- synthesis of a symplectic gamma-module from Xi data -----------------


def _mult_matrix(K: FqField, basis: Sequence[int], a: int, Fp: FqField) -> Matrix:
    """Matrix over GF(p) of t -> a t on K in the GF(p)-basis ``basis``."""
    cols = []
    for b in basis:
        cols.append(K.digits(K.mul(a, b)))
    return mat_transpose(cols)


def _trace_pairing(K: FqField, basis: Sequence[int], fn) -> Matrix:
    return [[K.absolute_trace(fn(b1, b2)) for b2 in basis] for b1 in basis]


def synthesize_module(xi: XiData) -> tuple[SymplecticSpace, Matrix]:
    """An explicit symplectic F_p-space with gamma realising the Xi data.

    Only a prime base residue field is supported here.
    """
    xi.validate()
    if xi.base.n != 1:
        raise ValueError("module synthesis is implemented for a prime base residue field")
    p = xi.base.p
    Fp = get_field(p, 1)
    spaces: list[SymplecticSpace] = []
    maps: list[Matrix] = []
    if xi.fixed_dim:
        spaces.append(SymplecticSpace.standard(Fp, xi.fixed_dim // 2))
        maps.append(mat_identity(xi.fixed_dim))
    for o in xi.orbits:
        K = o.field
        f = o.f
        basis = [p**i for i in range(f)]  # the codes of 1, x, ..., x^(f-1)
        if o.kind == "non_symm":
            a = o.value
            ainv = K.inv(a)
            P = _trace_pairing(K, basis, K.mul)
            G = _from_blocks(_zeros(f), P, _mat_neg(Fp, mat_transpose(P)), _zeros(f))
            A = _mult_matrix(K, basis, a, Fp)
            Ai = _mult_matrix(K, basis, ainv, Fp)
            g = _from_blocks(A, _zeros(f), _zeros(f), Ai)
        else:
            half = f // 2
            # c with sigma(c) = -c for sigma = Frob^(f/2)
            c = next(t for t in range(1, K.q) if K.frobenius_power(t, half) == K.neg(t))
            G = _trace_pairing(K, basis, lambda t1, t2: K.mul(c, K.mul(t1, K.frobenius_power(t2, half))))
            a = K.neg(1) if o.kind == "symm_minus_one" else o.value
            g = _mult_matrix(K, basis, a, Fp)
        spaces.append(SymplecticSpace(Fp, G))
        maps.append(g)
    if not spaces:
        return SymplecticSpace.standard(Fp, 0), []
    return orthogonal_sum(spaces, maps)


def epsilon_check(xi: XiData) -> tuple[QPowerSqrt, CycNumber, bool]:
    """Compare eps * card^(1/2) with the model trace of the synthesised gamma."""
    space, g = synthesize_module(xi)
    predicted = epsilon_cardinality(xi) * epsilon_sign(xi)
    if space.dim == 0:
        trace = CycContext.for_prime(xi.base.p).one
    else:
        space.require_symplectic(g)
        trace = WeilModel(space).trace(g)
    return predicted, trace, predicted.equals_cyc(trace)
