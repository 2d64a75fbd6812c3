"""Root orbits, Gauss-sum signs and magnitudes for elements of tame tori.

A ``TameTorus`` is the centralizer of a regular elliptic-style element:
a product of tame field factors E_k = W_k[pi_k], embedded block-diagonally
in GL_n(Q_p) by their regular representations.  Its roots are pairs of
embeddings of the factors into a common splitting field L, and the Galois
group of L acts on them by an explicit combinatorial rule.  From that
action we read off

* the orbit invariants e_alpha, f_alpha, symmetry and (un)ramifiedness,
* the root sets Xi (Weil stage) and Upsilon (Gauss-sum stage),
* the sign of the normalised Gauss sum and its magnitude as a
  ratio of filtration-group indices,

and we provide a brute-force oracle that sums phi-hat([gamma^-1, g]) over
explicit cosets in GL_n(Z_p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .exactnum import CycContext, CycNumber, QPowerSqrt, lcm
from .ffield import FqField, embedding, get_field
from .gauss import g_lambda
from .padic import PrecisionError, TameElement, TameTower, get_tower
from .tame import (
    Depth,
    EnumerationTooLargeError,
    FieldBlock,
    FiltrationGroupSpec,
    InadmissibleSpecError,
    Subalgebra,
    coset_enumeration,
    coset_generators,
    dc_quotient_exponent,
    double_bracket,
)
from .weil import XiData, XiOrbit

ROOT_CLASSES = ("xi_1", "symm_minus_one", "symm_inverse", "non_symm")
UPSILON_CLASSES = ("symm_unram", "symm_ram", "non_symm")


class UnsupportedLeviError(ValueError):
    """The twisted Levi subgroup is not a product of blocks and factor fields."""


class ParityError(ValueError):
    """No w_alpha of the required valuation exists for a ramified symmetric root."""


def _ord_mod(p: int, m: int) -> int:
    """Multiplicative order of p modulo m (1 when m = 1)."""
    if m == 1:
        return 1
    k, acc = 1, p % m
    while acc != 1:
        acc = acc * p % m
        k += 1
    return k


# ---------------------------------------------------------------------------
# tori and their splitting fields


@dataclass(frozen=True)
class TameTorus:
    """prod_k E_k^x inside GL_n(Q_p), with E_k of residue degree f_k and ramification e_k.

    Factor k occupies consecutive coordinates in the order x^i pi^j
    (index j*f_k + i), and the point of the building has coordinate
    offsets[k] - j/e_k there.
    """

    p: int
    factors: tuple[tuple[int, int], ...]
    offsets: tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple((int(f), int(e)) for f, e in self.factors))
        offs = tuple(Fraction(o) for o in self.offsets) or (Fraction(0),) * len(self.factors)
        if len(offs) != len(self.factors):
            raise ValueError("one offset per factor is required")
        object.__setattr__(self, "offsets", offs)
        for f, e in self.factors:
            if f < 1 or e < 1 or e % self.p == 0:
                raise ValueError(f"factor (f={f}, e={e}) is not a tame field over Q_{self.p}")

    # -- coordinates ---------------------------------------------------------

    @cached_property
    def towers(self) -> tuple[TameTower, ...]:
        return tuple(get_tower(self.p, f, e) for f, e in self.factors)

    @cached_property
    def starts(self) -> tuple[int, ...]:
        out, pos = [], 0
        for f, e in self.factors:
            out.append(pos)
            pos += f * e
        return tuple(out)

    @property
    def n(self) -> int:
        return sum(f * e for f, e in self.factors)

    @cached_property
    def field_blocks(self) -> tuple[FieldBlock, ...]:
        return tuple(
            FieldBlock(f, e, tuple(range(s, s + f * e))) for (f, e), s in zip(self.factors, self.starts)
        )

    @cached_property
    def x(self) -> tuple[Fraction, ...]:
        out = []
        for (f, e), o in zip(self.factors, self.offsets):
            for j in range(e):
                out.extend([o - Fraction(j, e)] * f)
        return tuple(out)

    def subalgebra(self) -> Subalgebra:
        """The torus itself as a subalgebra (split factors as singleton blocks)."""
        blocks, fields = [], []
        for fb in self.field_blocks:
            if fb.dim == 1:
                blocks.append(fb.indices)
            else:
                fields.append(fb)
        return Subalgebra.from_partition(self.n, blocks, fields)

    # -- splitting field and embeddings ----------------------------------------

    @cached_property
    def E(self) -> int:
        return lcm(*(e for _, e in self.factors))

    @cached_property
    def N(self) -> int:
        return lcm(*(f for f, _ in self.factors), _ord_mod(self.p, self.E))

    @cached_property
    def splitting(self) -> TameTower:
        """L = W_N[pi_L] with pi_L^E = p, which contains every factor."""
        return get_tower(self.p, self.N, self.E)

    @cached_property
    def zeta_code(self) -> int:
        """Residue of the primitive E-th root of unity zeta_E used for tau."""
        F = self.splitting.residue
        return F.exp((F.q - 1) // self.E)

    @cached_property
    def embeddings(self) -> tuple[tuple[int, int, int], ...]:
        """(factor k, Frobenius twist a mod f_k, inertia twist b mod e_k)."""
        return tuple((k, a, b) for k, (f, e) in enumerate(self.factors) for a in range(f) for b in range(e))

    @cached_property
    def _embedding_index(self) -> dict[tuple[int, int, int], int]:
        return {emb: i for i, emb in enumerate(self.embeddings)}

    @cached_property
    def galois(self) -> tuple[tuple[int, int], ...]:
        """Gal(L/Q_p) as pairs (u, c) meaning phi^u tau^c."""
        return tuple((u, c) for u in range(self.N) for c in range(self.E))

    def act(self, g: tuple[int, int], idx: int) -> int:
        """Index of g o iota_idx, using phi o iota_{a,b} = iota_{a+1,pb} and tau o iota_{a,b} = iota_{a,b+1}."""
        u, c = g
        k, a, b = self.embeddings[idx]
        f, e = self.factors[k]
        return self._embedding_index[(k, (a + u) % f, (pow(self.p, u, e) * (b + c)) % e)]

    def is_inertia(self, g: tuple[int, int]) -> bool:
        return g[0] == 0

    @cached_property
    def _residue_roots(self) -> tuple[int, ...]:
        """For each factor, the least-code root of its residue polynomial in GF(p^N)."""
        F = self.splitting.residue
        out = []
        for T in self.towers:
            table = embedding(T.residue, F)
            out.append(table[T.residue.x()] if T.f > 1 else 0)
        return tuple(out)

    def _xi(self, k: int, a: int, prec: int) -> TameElement:
        """The root of factor k's polynomial in W_N with residue rho_k^(p^a), to ``prec`` steps."""
        L = self.splitting
        T = self.towers[k]
        if T.f == 1:
            return L.zero(prec)
        F = L.residue
        rho = F.pow(self._residue_roots[k], self.p**a)
        y = L.teichmuller(rho, prec)
        P = T.poly
        for _ in range(64):
            val = L.zero(prec)
            der = L.zero(prec)
            for deg in range(len(P) - 1, -1, -1):
                der = der * y + val
                val = val * y + L.from_int(P[deg], prec)
            if val.is_zero():
                return y
            y = (y - val / der).with_precision(prec)
        raise PrecisionError("Hensel lifting did not converge")

    def _pi_image(self, k: int, b: int, prec: int) -> TameElement:
        """iota(pi_k) = zeta_E^(b E/e_k) pi_L^(E/e_k)."""
        L = self.splitting
        ratio = self.E // self.factors[k][1]
        z = L.residue.pow(self.zeta_code, b * ratio)
        return (L.teichmuller(z, prec) * L.pi_power(ratio, prec + ratio)).with_precision(prec + ratio)

    def embed(self, idx: int, y: TameElement) -> TameElement:
        """iota_idx(y) in L for y in factor k's tower."""
        k, a, b = self.embeddings[idx]
        T = self.towers[k]
        if y.tower != T:
            raise ValueError(f"element lives in {y.tower}, factor {k} is {T}")
        L = self.splitting
        ratio = self.E // T.e
        if y.is_zero():
            return L.zero(y.abs_steps * ratio)
        R = y.rel * ratio
        xi = self._xi(k, a, R)
        pi = self._pi_image(k, b, R)
        acc = L.zero(R)
        pj = L.one(R)
        for j in range(T.e):
            xp = L.one(R)
            for i in range(T.f):
                c = y.u[j * T.f + i]
                if c:
                    acc = acc + L.from_int(c, R) * xp * pj
                xp = xp * xi
            pj = (pj * pi).with_precision(R)
        acc = acc.with_precision(R)
        if y.shift:
            pi_full = self._pi_image(k, b, R + abs(y.shift) * ratio + 1)
            acc = acc * pi_full**y.shift
        return acc.with_precision(y.abs_steps * ratio)

    def embed_all(self, elems: Sequence[TameElement]) -> list[TameElement]:
        """Images of a torus element (one entry per factor) under every embedding."""
        self._check_element(elems)
        return [self.embed(i, elems[k]) for i, (k, _, _) in enumerate(self.embeddings)]

    def _check_element(self, elems: Sequence[TameElement]) -> None:
        if len(elems) != len(self.factors):
            raise ValueError("a torus element has one entry per factor")

    # -- integer matrices ----------------------------------------------------

    def element_matrix(self, elems: Sequence[TameElement], scale_steps: int = 0) -> np.ndarray:
        """Block-diagonal integer matrix of p^scale_steps times a torus element.

        The element (after scaling) must be integral; entries are exact
        integer representatives of the known digits.
        """
        self._check_element(elems)
        out = np.zeros((self.n, self.n), dtype=object)
        for k, (y, T, s) in enumerate(zip(elems, self.towers, self.starts)):
            shift = y.shift + T.e * scale_steps
            if y.is_zero():
                continue
            if shift < 0:
                raise ValueError("scaled element is not integral")
            flat = T._r_mul_pi(y.u, shift)
            M = T.regular_matrix(flat)
            d = T.e * T.f
            for i in range(d):
                for j in range(d):
                    out[s + i, s + j] = M[i][j]
        return out

    def inverse(self, elems: Sequence[TameElement]) -> list[TameElement]:
        return [y.inverse() for y in elems]

    def to_json(self) -> dict:
        return {"p": self.p, "factors": [list(fe) for fe in self.factors], "offsets": [str(o) for o in self.offsets]}

    @classmethod
    def from_json(cls, data) -> "TameTorus":
        return cls(int(data["p"]), tuple(tuple(fe) for fe in data["factors"]), tuple(Fraction(o) for o in data.get("offsets", [])))


# ---------------------------------------------------------------------------
# subalgebras from clusters of embeddings


def clusters_to_subalgebra(torus: TameTorus, clusters: Sequence[Sequence[int]]) -> Subalgebra:
    """The centralizer attached to a Galois-stable partition of the embeddings.

    Supported shapes: a cluster is a union of whole factors (a GL block over
    their coordinates), or every embedding of a factor is alone in its
    cluster (the factor field itself).
    """
    owner = [k for k, _, _ in torus.embeddings]
    blocks: list[tuple[int, ...]] = []
    fields: list[FieldBlock] = []
    field_factors: set[int] = set()
    for cl in clusters:
        ks = sorted({owner[i] for i in cl})
        whole = all(sum(1 for i in cl if owner[i] == k) == torus.factors[k][0] * torus.factors[k][1] for k in ks)
        if whole:
            idx = []
            for k in ks:
                fb = torus.field_blocks[k]
                idx.extend(fb.indices)
            if len(ks) == 1 and torus.field_blocks[ks[0]].dim > 1 and len(cl) == 1:
                field_factors.add(ks[0])
            else:
                blocks.append(tuple(sorted(idx)))
        elif len(cl) == 1:
            field_factors.add(ks[0])
        else:
            raise UnsupportedLeviError("a cluster contains part of a factor's embeddings together with others")
    for k in sorted(field_factors):
        k_emb = [i for i, o in enumerate(owner) if o == k]
        if not all(any(cl == [i] or tuple(cl) == (i,) for cl in clusters) for i in k_emb):
            raise UnsupportedLeviError("a factor's embeddings are split between singleton and larger clusters")
        fb = torus.field_blocks[k]
        if fb.dim == 1:
            blocks.append(fb.indices)
        else:
            fields.append(fb)
    return Subalgebra.from_partition(torus.n, blocks, fields)


def _clusters(m: int, linked) -> list[list[int]]:
    """Connected components of the relation ``linked(i, j)`` on range(m)."""
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if linked(i, j):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=min)


# ---------------------------------------------------------------------------
# root data of an element


@dataclass(frozen=True)
class RootOrbit:
    """A Gamma-orbit of roots alpha = (i, j) (eigenvalue ratio iota_i / iota_j)."""

    rep: tuple[int, int]
    members: tuple[tuple[int, int], ...]
    e_alpha: int
    f_alpha: int
    symmetric: bool
    e_pm: int | None
    f_pm: int | None
    depth: Fraction | float
    residue: int
    stabilizer: tuple[tuple[int, int], ...] = field(repr=False, default=())
    pm_stabilizer: tuple[tuple[int, int], ...] = field(repr=False, default=())

    @property
    def unramified(self) -> bool | None:
        """For symmetric orbits: is F_alpha / F_{+-alpha} unramified?"""
        if not self.symmetric:
            return None
        return self.e_alpha == self.e_pm

    def to_json(self) -> dict:
        return {
            "rep": list(self.rep),
            "size": len(self.members),
            "e_alpha": self.e_alpha,
            "f_alpha": self.f_alpha,
            "symmetric": self.symmetric,
            "e_pm": self.e_pm,
            "f_pm": self.f_pm,
            "depth": str(self.depth),
            "residue": self.residue,
        }


@dataclass
class ElementRoots:
    """The torus, an element gamma in it, and the Galois-orbit data of its roots."""

    torus: TameTorus
    gamma: list[TameElement]
    images: list[TameElement]
    values: dict[tuple[int, int], TameElement]
    depths: dict[tuple[int, int], Fraction | float]
    orbits: list[RootOrbit]

    def orbit_of(self, root: tuple[int, int]) -> RootOrbit:
        for o in self.orbits:
            if root in o.members:
                return o
        raise KeyError(root)

    def centralizer_roots(self, t) -> set[tuple[int, int]]:
        """Roots of C^(t)(gamma): ord(alpha(gamma) - 1) >= t."""
        t = Depth.of(t)
        out = set()
        for a, d in self.depths.items():
            if d == math.inf or (d > t.value if t.plus else d >= t.value):
                out.add(a)
        return out

    def centralizer(self, t) -> Subalgebra:
        roots = self.centralizer_roots(t)
        m = len(self.torus.embeddings)
        return clusters_to_subalgebra(self.torus, _clusters(m, lambda i, j: (i, j) in roots))

    def chain(self) -> list[tuple[Fraction | None, Fraction | None, Subalgebra]]:
        """(lower, upper, C) with C^(t) = C for lower < t <= upper, from G inwards."""
        finite = sorted({d for d in self.depths.values() if d != math.inf and d > 0})
        n = self.torus.n
        out: list[tuple[Fraction | None, Fraction | None, Subalgebra]] = []
        bounds = [None, Fraction(0)] + finite + [None]
        for lo, hi in zip(bounds, bounds[1:]):
            if lo is None:
                C = Subalgebra.full(n)
            else:
                C = self.centralizer(Depth(Fraction(lo), True))
            if out and out[-1][2] == C:
                out[-1] = (out[-1][0], hi, C)
            else:
                out.append((lo, hi, C))
        return out


def _stabilizer(torus: TameTorus, pred) -> tuple[tuple[int, int], ...]:
    return tuple(g for g in torus.galois if pred(g))


def _ef(torus: TameTorus, stab: Sequence[tuple[int, int]]) -> tuple[int, int]:
    inertia = sum(1 for g in stab if torus.is_inertia(g))
    return torus.E // inertia, torus.N // (len(stab) // inertia)


def element_roots(
    torus: TameTorus, gamma: Sequence[TameElement], min_precision=None, reverse: bool = False
) -> ElementRoots:
    """Embed gamma, compute alpha(gamma) and ord(alpha(gamma) - 1) for every root, and the orbits.

    ``min_precision`` is the depth up to which vanishing of alpha(gamma) - 1
    must be decided; a root whose value is 1 at lower precision raises.
    Orbit representatives are the least roots in lexicographic order, or
    the greatest ones with ``reverse``.
    """
    torus._check_element(gamma)
    for y in gamma:
        if not y.is_unit():
            raise ValueError("torus elements must be units (gamma in the compact torus)")
    images = torus.embed_all(gamma)
    m = len(images)
    values: dict[tuple[int, int], TameElement] = {}
    depths: dict[tuple[int, int], Fraction | float] = {}
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            v = images[i] / images[j]
            values[(i, j)] = v
            d = (v - 1).ord()
            if d == math.inf and min_precision is not None and (v - 1).precision <= Fraction(min_precision):
                raise PrecisionError(f"alpha(gamma) - 1 for root {(i, j)} is zero only to precision {(v - 1).precision}")
            depths[(i, j)] = d
    seen: set[tuple[int, int]] = set()
    orbits: list[RootOrbit] = []
    for a in sorted(values, reverse=reverse):
        if a in seen:
            continue
        i, j = a
        members = tuple(sorted({(torus.act(g, i), torus.act(g, j)) for g in torus.galois}))
        seen.update(members)
        stab = _stabilizer(torus, lambda g: torus.act(g, i) == i and torus.act(g, j) == j)
        e_a, f_a = _ef(torus, stab)
        symmetric = (j, i) in members
        if symmetric:
            pm = _stabilizer(torus, lambda g: {torus.act(g, i), torus.act(g, j)} == {i, j})
            e_pm, f_pm = _ef(torus, pm)
        else:
            pm, e_pm, f_pm = (), None, None
        v = values[a]
        orbits.append(
            RootOrbit(a, members, e_a, f_a, symmetric, e_pm, f_pm, depths[a], v.residue() if v.is_unit() else 0, stab, pm)
        )
    return ElementRoots(torus, list(gamma), images, values, depths, orbits)


# ---------------------------------------------------------------------------
# generic characters


@dataclass
class GenericCharacterData:
    """A generic element X* of depth -r in the torus Lie algebra.

    ``xstar`` has one entry per factor.  The twisted Levi G' is the
    centralizer of X* modulo depth (-r)+: embeddings i, j are linked when
    ord(iota_i X* - iota_j X*) > -r.
    """

    torus: TameTorus
    r: Fraction
    xstar: list[TameElement]

    def __post_init__(self):
        self.r = Fraction(self.r)
        self.torus._check_element(self.xstar)
        for y in self.xstar:
            if not y.is_zero() and y.ord() < -self.r:
                raise ValueError("X* must have depth at least -r")

    @cached_property
    def images(self) -> list[TameElement]:
        return self.torus.embed_all(self.xstar)

    def dalpha(self, root: tuple[int, int]) -> TameElement:
        i, j = root
        return self.images[i] - self.images[j]

    @cached_property
    def clusters(self) -> list[list[int]]:
        m = len(self.images)
        r = self.r

        def linked(i, j):
            d = self.dalpha((i, j))
            if d.is_zero() and d.precision <= -r:
                raise PrecisionError("X* is not known well enough to decide its centralizer")
            return d.ord() > -r

        return _clusters(m, linked)

    def in_levi(self, root: tuple[int, int]) -> bool:
        return any(root[0] in c and root[1] in c for c in self.clusters)

    def levi(self) -> Subalgebra:
        return clusters_to_subalgebra(self.torus, self.clusters)

    def check_generic(self) -> None:
        """Every root outside G' has ord d alpha(X*) = -r exactly."""
        m = len(self.images)
        for i in range(m):
            for j in range(m):
                if i != j and not self.in_levi((i, j)) and self.dalpha((i, j)).ord() != -self.r:
                    raise ValueError(f"X* is not generic of depth -{self.r} at root {(i, j)}")

    def trace_form_matrix(self) -> tuple[np.ndarray, int]:
        """(M, R) with M the integer matrix of p^R X*, R the least such shift."""
        R = 0
        for y, T in zip(self.xstar, self.torus.towers):
            if not y.is_zero():
                R = max(R, -(-(-y.shift) // T.e))
        return self.torus.element_matrix(self.xstar, R), R


# ---------------------------------------------------------------------------
# classification


def _weight_nonzero(torus: TameTorus, root: tuple[int, int], e_alpha: int, level: Fraction) -> bool:
    """Is the Gamma_alpha-fixed weight space at affine level ``level`` nonzero?

    This happens exactly when level - (o_j - o_i) lies in (1/e_alpha) Z.
    """
    ki = torus.embeddings[root[0]][0]
    kj = torus.embeddings[root[1]][0]
    c = (level - (torus.offsets[kj] - torus.offsets[ki])) * e_alpha
    return c.denominator == 1


def _subfield_code(big: FqField, code: int, m: int) -> int:
    """The code in GF(p^m) of an element of the degree-m subfield of ``big``."""
    small = get_field(big.p, m)
    table = embedding(small, big)
    try:
        return table.index(code)
    except ValueError:
        raise ValueError(f"residue {code} does not lie in GF({big.p}^{m})") from None


@dataclass
class RootClassification:
    """Xi classes (Weil stage) and Upsilon classes (Gauss-sum stage) of a root system."""

    roots: ElementRoots
    char: GenericCharacterData
    xi: dict[str, list[RootOrbit]]
    upsilon: dict[str, list[RootOrbit]]
    xi_data: XiData

    def to_json(self) -> dict:
        return {
            "xi": {k: [o.to_json() for o in v] for k, v in self.xi.items()},
            "upsilon": {k: [o.to_json() for o in v] for k, v in self.upsilon.items()},
            "xi_fixed_dim": self.xi_data.fixed_dim,
        }


def _pm_representatives(orbits: Sequence[RootOrbit]) -> list[RootOrbit]:
    """One orbit from each {orbit, -orbit} pair of non-symmetric orbits."""
    out, taken = [], set()
    for o in orbits:
        if o.rep in taken:
            continue
        out.append(o)
        taken.update(o.members)
        taken.update((b, a) for a, b in o.members)
    return out


def classify_roots(
    torus: TameTorus, gamma: Sequence[TameElement], char: GenericCharacterData, reverse: bool = False
) -> RootClassification:
    """Sort the roots of T into the Xi and Upsilon classes for (gamma, X*).

    The leading terms of alpha(gamma_{<r}) agree with those of alpha(gamma)
    for every root that the classes consider, so gamma itself is used.
    """
    r = char.r
    s = r / 2
    roots = element_roots(torus, gamma, min_precision=r, reverse=reverse)
    F = torus.splitting.residue
    base = get_field(torus.p, 1)
    xi: dict[str, list[RootOrbit]] = {k: [] for k in ROOT_CLASSES}
    ups: dict[str, list[RootOrbit]] = {k: [] for k in UPSILON_CLASSES}
    for o in roots.orbits:
        if char.in_levi(o.rep):
            continue
        if _weight_nonzero(torus, o.rep, o.e_alpha, s):
            res = o.residue
            if res == 1:
                xi["xi_1"].append(o)
            elif o.symmetric:
                xi["symm_minus_one" if res == F.neg(1) else "symm_inverse"].append(o)
            else:
                xi["non_symm"].append(o)
        d = o.depth
        if 0 < d < r and _weight_nonzero(torus, o.rep, o.e_alpha, (r - d) / 2):
            if o.symmetric:
                ups["symm_unram" if o.unramified else "symm_ram"].append(o)
            else:
                ups["non_symm"].append(o)
    xi["non_symm"] = _pm_representatives(xi["non_symm"])
    ups["non_symm"] = _pm_representatives(ups["non_symm"])
    records = []
    for kind in ("symm_minus_one", "symm_inverse", "non_symm"):
        for o in xi[kind]:
            records.append(XiOrbit(kind, get_field(torus.p, o.f_alpha), _subfield_code(F, o.residue, o.f_alpha)))
    fixed = sum(o.f_alpha for o in xi["xi_1"])
    return RootClassification(roots, char, xi, ups, XiData(base, tuple(records), fixed))


# ---------------------------------------------------------------------------
# the sign of the normalised Gauss sum


def _find_w(torus: TameTorus, o: RootOrbit, m: int) -> int:
    """Residue t of a w_alpha = [t] pi_L^m fixed by Gamma_alpha with w^2 fixed by Gamma_{+-alpha}."""
    F = torus.splitting.residue
    z = torus.zeta_code

    def image(g, t, k):
        u, c = g
        return F.mul(F.pow(z, c * m * k * pow(torus.p, u)), F.pow(t, k * pow(torus.p, u)))

    for t in range(1, F.q):
        if all(image(g, t, 1) == t for g in o.stabilizer) and all(
            image(g, t, 2) == F.pow(t, 2) for g in o.pm_stabilizer
        ):
            return t
    raise ParityError(f"no w_alpha of valuation {m}/{torus.E} for root {o.rep}")


def ramified_factor(cls: RootClassification, o: RootOrbit) -> int:
    """sgn of (1/2) e_alpha N(w_alpha) d alpha^vee(X*) (alpha(gamma) - 1) in f_alpha."""
    torus = cls.roots.torus
    L = torus.splitting
    F = L.residue
    r = cls.char.r
    d = o.depth
    m = (r - d) / 2 * torus.E
    if m.denominator != 1:
        raise ParityError(f"(r - i)/2 is not a valuation of L for root {o.rep}")
    m = int(m)
    t = _find_w(torus, o, m)
    sigma = next(g for g in o.pm_stabilizer if g not in o.stabilizer)
    u, c = sigma
    norm_unit = F.mul(F.pow(t, 1 + torus.p**u), F.pow(torus.zeta_code, c * m * torus.p**u))
    rest = L.pi_power(2 * m, 4 * torus.E * (abs(m) + 4)) * cls.char.dalpha(o.rep) * (cls.roots.values[o.rep] - 1)
    if not rest.is_unit():
        raise PrecisionError("the ramified sign argument is not a unit at precision")
    half_e = F.mul(F.from_int(o.e_alpha), F.inv(F.from_int(2)))
    arg = F.mul(F.mul(half_e, norm_unit), rest.residue())
    # the sign of G_{+-alpha} is +1 for general linear groups
    return F.sgn(arg, m=o.f_alpha)


def gauss_sum_sign(cls: RootClassification) -> CycNumber:
    """The normalised Gauss sum: a fourth root of unity."""
    p = cls.roots.torus.p
    ctx = CycContext.for_prime(p)
    symm = cls.upsilon["symm_unram"] + cls.upsilon["symm_ram"]
    value = ctx.rational((-1) ** len(symm))
    ram = cls.upsilon["symm_ram"]
    f_ram = sum(o.f_alpha for o in ram)
    if f_ram:
        value = value * (-g_lambda(get_field(p, 1)).value) ** f_ram
    for o in ram:
        value = value * ramified_factor(cls, o)
    return value


# ---------------------------------------------------------------------------
# the magnitude as filtration-group indices


def gauss_magnitude_specs(roots: ElementRoots, levi: Subalgebra, r) -> dict[str, FiltrationGroupSpec]:
    """The six groups whose indices give |G-tilde(phi, gamma)|^2."""
    torus = roots.torus
    r = Fraction(r)
    s = r / 2
    p, x, n = torus.p, torus.x, torus.n
    chain = roots.chain()
    full = Subalgebra.full(n)
    c0 = roots.centralizer(Depth(Fraction(0), True))
    c0p = levi.intersect(c0)
    rp = Depth(r, True)
    sp = Depth(s, True)
    return {
        "dc_r": double_bracket(chain, p, x, r),
        "dc_r_levi": double_bracket(chain, p, x, r, ambient=levi).inside(full, s),
        "dc_r+": double_bracket(chain, p, x, rp),
        "dc_r+_levi": double_bracket(chain, p, x, rp, ambient=levi).inside(full, sp),
        "pair": FiltrationGroupSpec(p, x, ((c0p, Depth(r)), (c0, Depth(s))), convention="yu"),
        "pair+": FiltrationGroupSpec(p, x, ((c0p, Depth(r)), (c0, sp)), convention="yu"),
    }


def gauss_magnitude_exponent(specs: dict[str, FiltrationGroupSpec]) -> int:
    """e with |G-tilde| = p^(e/2)."""
    a = dc_quotient_exponent(specs["dc_r"], specs["dc_r_levi"])
    b = dc_quotient_exponent(specs["dc_r+"], specs["dc_r+_levi"])
    c = dc_quotient_exponent(specs["pair"], specs["pair+"])
    return a + b - c


def gauss_sum_magnitude(roots: ElementRoots, levi: Subalgebra, r) -> QPowerSqrt:
    specs = gauss_magnitude_specs(roots, levi, r)
    return QPowerSqrt.of(roots.torus.p, gauss_magnitude_exponent(specs), CycContext.for_prime(roots.torus.p).N)


def gauss_sum_closed(cls: RootClassification) -> QPowerSqrt:
    """The unnormalised sum G-tilde = |G-tilde| times the sign."""
    mag = gauss_sum_magnitude(cls.roots, cls.char.levi(), cls.char.r)
    return QPowerSqrt(mag.base, mag.exponent, gauss_sum_sign(cls))


def c_constant(roots: ElementRoots, levels: Sequence[tuple[Subalgebra, Subalgebra, Fraction]]) -> QPowerSqrt:
    """prod over (G^i, G^{i+1}, r_i) of the two index square roots.

    [[gamma; x, r_i]]_{G^{i+1}} : [[gamma; x, r_i]]_{G^i} G^{i+1}_{x, s_i},
    and the same with r_i+ and s_i+.
    """
    torus = roots.torus
    chain = roots.chain()
    total = 0
    for inner, outer, r in levels:
        r = Fraction(r)
        for t, s in ((Depth(r), Depth(r / 2)), (Depth(r, True), Depth(r / 2, True))):
            num = double_bracket(chain, torus.p, torus.x, t, ambient=outer)
            den = double_bracket(chain, torus.p, torus.x, t, ambient=inner).inside(outer, s)
            total += dc_quotient_exponent(num, den)
    return QPowerSqrt.of(torus.p, total, CycContext.for_prime(torus.p).N)


# ---------------------------------------------------------------------------
# brute force over explicit cosets


@dataclass
class GaussBruteForce:
    value: CycNumber
    cosets: int
    normaliser: int
    h_cosets: int

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "cosets": self.cosets, "normaliser": self.normaliser, "h_cosets": self.h_cosets}


def _inv_mod(M: np.ndarray, mod: int) -> np.ndarray:
    """Inverse of an integer matrix with unit determinant modulo ``mod``."""
    n = M.shape[0]
    A = [[int(M[i, j]) % mod for j in range(n)] + [int(i == j) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if math.gcd(A[r][col], mod) == 1)
        A[col], A[piv] = A[piv], A[col]
        inv = pow(A[col][col], -1, mod)
        A[col] = [v * inv % mod for v in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                c = A[r][col]
                A[r] = [(a - c * b) % mod for a, b in zip(A[r], A[col])]
    return np.array([row[n:] for row in A], dtype=object)


def _lattice_keys(x: Sequence[Fraction], depth: Depth, p: int) -> np.ndarray:
    n = len(x)
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = p ** max((depth - (x[j] - x[i])).first_step(1), 0)
    return out


def _in_lattice_int(Y: np.ndarray, x: Sequence[Fraction], depth: Depth, p: int) -> bool:
    mods = _lattice_keys(x, depth, p)
    return all(int(Y[i, j]) % int(mods[i, j]) == 0 for i in range(Y.shape[0]) for j in range(Y.shape[1]))


def gauss_sum_bruteforce(cls: RootClassification, limit: int = 200_000) -> GaussBruteForce:
    """sum over K \\ H of phi-hat([gamma^-1, g]), by explicit cosets in GL_n(Z_p).

    H = [[gamma; x, r]]^(s) and K = [[gamma; x, r]]^(s)_{G'} C^(0+)_{x,s}.
    Representatives of H modulo C^(0+)_{x,s} are kept exactly modulo
    p^B with B beyond r, so that commutators are right to depth r+.
    """
    roots, char = cls.roots, cls.char
    torus = roots.torus
    p, x, n = torus.p, torus.x, torus.n
    r = char.r
    s = r / 2
    chain = roots.chain()
    levi = char.levi()
    c0 = roots.centralizer(Depth(Fraction(0), True))
    H = double_bracket(chain, p, x, r, j=s)
    K = double_bracket(chain, p, x, r, j=s, ambient=levi).inside(c0, s)
    X, R = char.trace_form_matrix()
    B = math.ceil(r) + 2
    mod = p**B
    big = Depth(Fraction(B - 1))
    gam = torus.element_matrix([y.with_precision(y.abs_steps) for y in roots.gamma]) % mod
    gam_inv = _inv_mod(gam, mod)
    keys = _lattice_keys(x, Depth(s), p)
    top = p ** (R + 1)
    N = lcm(4, top)

    def commutator_exponent(g: np.ndarray) -> int:
        comm = gam_inv.dot(g).dot(gam).dot(_inv_mod(g, mod)) % mod
        Y = (comm - np.eye(n, dtype=object)) % mod
        if not _in_lattice_int(Y, x, Depth(s, True), p):
            raise InadmissibleSpecError("commutator is not in G_{x,s+}")
        return int(sum(int(v) for v in np.diag(X.dot(Y)))) % top

    gens = [np.array(g, dtype=object) % mod for g in coset_generators(H, big)]
    start = np.eye(n, dtype=object)

    def key(g):
        return tuple(int(v) for v in (g % keys).flat)

    seen = {key(start): start}
    frontier = [start]
    while frontier:
        new = []
        for g in frontier:
            for h in gens:
                prod = g.dot(h) % mod
                kk = key(prod)
                if kk not in seen:
                    seen[kk] = prod
                    new.append(prod)
                    if len(seen) > limit:
                        raise EnumerationTooLargeError(f"more than {limit} cosets")
        frontier = new
    counts: dict[int, int] = {}
    for g in seen.values():
        k = commutator_exponent(g)
        counts[k] = counts.get(k, 0) + 1
    k_gens = [np.array(g, dtype=object) % mod for g in coset_generators(K, big)]
    for g in seen.values():
        base = commutator_exponent(g)
        for kg in k_gens:
            if commutator_exponent(kg.dot(g) % mod) != base:
                raise AssertionError("the summand is not left K-invariant")
    norm = coset_enumeration(K, Depth(s), limit)
    raw = CycNumber.from_exponent_counts(N, {k * (N // top): c for k, c in counts.items()})
    value = raw * CycNumber.rational(N, Fraction(1, norm))
    return GaussBruteForce(value, len(seen) // norm, norm, len(seen))
