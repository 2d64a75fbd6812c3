"""Cuspidal data, truncation classes and the assembled character formula.

A ``CuspidalDatum`` describes a tame twisted Levi sequence for GL_n built
from one tame field E (the torus T = E^x is G^0) and the full group, with
depths, generic elements X_i^* and the characters phi_i.  Given a compact
element gamma, ``enumerate_classes`` lists the truncation classes that
contribute to the character at gamma, and ``assemble_full_char`` returns
the formula tree

    phi_d(gamma) * sum over classes of
        c * prod_i (G_i eps_i) * prod_i phi_i(head_i) * Theta_0(label) * prod_i mu-hat_i

with every finite factor evaluated exactly and the orbital-integral and
depth-zero factors kept as labelled symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .exactnum import CycNumber, QPowerSqrt, lcm
from .padic import PadicMatrix, PrecisionError, TameElement, TameTower, _leibniz_det, get_tower
from .rootsets import (
    _subfield_code,
    GenericCharacterData,
    TameTorus,
    c_constant,
    classify_roots,
    element_roots,
    gauss_sum_sign,
)
from .tame import (
    Depth,
    FiltrationGroupSpec,
    InadmissibleSpecError,
    NormalApproximation,
    Subalgebra,
    dc_quotient_exponent,
    mp_depth,
    normal_approx,
)
from .weil import epsilon_sign

LEVEL_KINDS = ("torus", "full")
MODES = ("tau", "pi")


class IndeterminateError(PrecisionError):
    """The available precision does not decide a boundary case."""


class UnsupportedInputError(ValueError):
    """The input is well formed but outside the supported class of elements."""


# ---------------------------------------------------------------------------
# small p-adic helpers


def _teich_part(y: TameElement) -> TameElement:
    return y.tower.teichmuller(y.residue(), y.abs_steps)


def _log_one_unit(v: TameElement) -> TameElement:
    """log(v) for v = 1 + z with z in the maximal ideal; precision losses are tracked by the arithmetic."""
    T = v.tower
    z = v - 1
    K = v.abs_steps
    if z.is_zero():
        return T.zero(K)
    if z.shift <= 0:
        raise ValueError("log is only taken on principal units")
    acc = T.zero(K)
    power = z
    m = 1
    while m < T.e or m * z.shift - T.e * math.log(m, T.p) < K + 1:
        vm = T.e * _vp(m, T.p)
        acc = acc + power * T.from_fraction(Fraction((-1) ** (m + 1), m), K + vm)
        m += 1
        power = power * z
    return acc


def _vp(m: int, p: int) -> int:
    k = 0
    while m % p == 0:
        m //= p
        k += 1
    return k


def _trace_integer(torus: TameTorus, z: TameElement) -> tuple[int, int]:
    """(t, R) with Tr_{E/Q_p}(z) = t / p^R, t known modulo p^(R + 1)."""
    if z.precision < 1:
        raise IndeterminateError(f"trace argument known only to precision {z.precision}")
    if z.is_zero():
        return 0, 0
    e = z.tower.e
    R = -(z.shift // e) if z.shift < 0 else 0
    M = torus.element_matrix([z], R)
    return int(sum(M[i, i] for i in range(torus.n))), R


def _lambda_rational(c: Fraction, p: int) -> CycNumber:
    """Lambda(c) = exp(2 pi i {c/p}) for a rational c."""
    num, den = c.numerator, c.denominator
    R = _vp(den, p)
    M = p ** (R + 1)
    unit = den // p**R
    return CycNumber.root_of_unity(M, num * pow(unit, -1, M) % M)


def _lambda_of(torus: TameTorus, z: TameElement) -> CycNumber:
    """Lambda(Tr z) with Lambda(a) = exp(2 pi i {a/p}); trivial on pZ_p."""
    t, R = _trace_integer(torus, z)
    M = torus.p ** (R + 1)
    return CycNumber.root_of_unity(M, t % M)


def _lift(a: CycNumber, M: int) -> CycNumber:
    return a if a.N == M else a.lift_to(M)


def _cyc_mul(a: CycNumber, b: CycNumber) -> CycNumber:
    M = lcm(a.N, b.N)
    return _lift(a, M) * _lift(b, M)


# ---------------------------------------------------------------------------
# the datum


@dataclass
class LevelCharacter:
    """phi_i on the level group G^i, represented through its values on units of E.

    For a torus level phi_i(u) = zeta_(q_E - 1)^(a log u-bar) Lambda(Tr(X* log(u/[u-bar]))).
    For a full level phi_i = chi o det with chi(z) = zeta_(p-1)^(a log z-bar)
    Lambda(X* log(z/[z-bar])), X* being central (a scalar) there.  ``xstar``
    may be None for a trivial last character.
    """

    kind: str
    xstar: TameElement | None
    teich_exponent: int = 0

    def _tame_part(self, code: int, F) -> CycNumber:
        q1 = F.q - 1
        M = lcm(4, q1)
        return CycNumber.root_of_unity(M, (self.teich_exponent * F.log(code)) % q1 * (M // q1))

    def on_torus(self, torus: TameTorus, u: TameElement) -> CycNumber:
        """phi_i(u) for a unit u of E."""
        T = torus.towers[0]
        F = T.residue
        ubar = u.residue()
        if self.kind == "torus":
            tame = self._tame_part(ubar, F)
        else:
            # the residue of N_{E/Q_p}(u) is N_{k_E/F_p}(u-bar)^e
            nbar = F.pow(F.pow(ubar, T.e), (F.q - 1) // (F.p - 1))
            tame = self._tame_part(_subfield_code(F, nbar, 1), get_tower(torus.p).residue)
        if self.xstar is None:
            return tame
        wild = _lambda_of(torus, self.xstar * _log_one_unit(u / _teich_part(u)))
        return _cyc_mul(tame, wild)

    def on_scalar(self, torus: TameTorus, z: TameElement) -> CycNumber:
        """chi(z) for z in Z_p^x (full levels only)."""
        if self.kind != "full":
            raise ValueError("only full levels are characters of the determinant")
        tame = self._tame_part(z.residue(), get_tower(torus.p).residue)
        if self.xstar is None:
            return tame
        w = _log_one_unit(z / _teich_part(z))
        a = _central_scalar(self.xstar)
        if w.precision + _ord_rational(a, torus.p) < 1:
            raise IndeterminateError("log(det gamma) is not known well enough")
        return _cyc_mul(tame, _lambda_rational(a * _qp_integer(w), torus.p))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "teich_exponent": self.teich_exponent,
            "xstar": None if self.xstar is None else self.xstar.to_json(),
        }


def _qp_integer(z: TameElement) -> int:
    """An integer representative of an element of Z_p (tower Q_p)."""
    if z.is_zero():
        return 0
    if z.shift < 0:
        raise ValueError("element is not integral")
    return int(z.u[0]) * z.tower.p**z.shift


def _ord_rational(c: Fraction, p: int) -> int:
    return _vp(c.numerator, p) - _vp(c.denominator, p) if c else 0


def _central_scalar(y: TameElement) -> Fraction:
    """The rational number a with y = a in E (y must lie in Q_p)."""
    T = y.tower
    if y.is_zero():
        return Fraction(0)
    if y.shift % T.e or any(y.u[1:]):
        raise InadmissibleSpecError("a central X* must lie in Q_p")
    return Fraction(int(y.u[0])) * Fraction(T.p) ** (y.shift // T.e)


@dataclass
class CuspidalDatum:
    """G^0 = E^x (or GL_n) inside ... inside G^d = GL_n with depths and characters.

    ``kinds[i]`` is "torus" (G^i = E^x) or "full" (G^i = GL_n); the
    sequence is non-decreasing and ends with "full".  ``depths`` holds
    r_0, ..., r_d and ``characters`` holds phi_0, ..., phi_d.  The
    depth-zero datum is the opaque label ``rho0_label`` with an optional
    table from depth-zero class labels to exact values.
    """

    torus: TameTorus
    kinds: tuple[str, ...]
    depths: tuple[Fraction, ...]
    characters: tuple[LevelCharacter, ...]
    rho0_label: str = "rho0"
    theta0_table: dict[str, CycNumber] = field(default_factory=dict)

    def __post_init__(self):
        self.kinds = tuple(self.kinds)
        self.depths = tuple(Fraction(r) for r in self.depths)
        self.characters = tuple(self.characters)

    @property
    def d(self) -> int:
        return len(self.kinds) - 1

    @property
    def p(self) -> int:
        return self.torus.p

    @property
    def x(self) -> tuple[Fraction, ...]:
        return self.torus.x

    def level(self, i: int) -> Subalgebra:
        return self.torus.subalgebra() if self.kinds[i] == "torus" else Subalgebra.full(self.torus.n)

    def s(self, i: int) -> Fraction:
        return self.depths[i] / 2

    def generic_data(self, i: int) -> GenericCharacterData:
        return GenericCharacterData(self.torus, self.depths[i], [self.characters[i].xstar])

    def validate(self) -> None:
        if len(self.torus.factors) != 1:
            raise InadmissibleSpecError("G^0 must be the unit group of a single field (anisotropic modulo the centre)")
        d = self.d
        if d < 1:
            raise InadmissibleSpecError("a datum needs at least one positive-depth level")
        if len(self.depths) != d + 1 or len(self.characters) != d + 1:
            raise InadmissibleSpecError("one depth and one character per level are required")
        if any(k not in LEVEL_KINDS for k in self.kinds):
            raise InadmissibleSpecError(f"level kinds must be among {LEVEL_KINDS}")
        if self.kinds[-1] != "full":
            raise InadmissibleSpecError("the last level is the full group")
        order = [LEVEL_KINDS.index(k) for k in self.kinds]
        if order != sorted(order):
            raise InadmissibleSpecError("levels must increase")
        r = self.depths
        if not r[0] > 0:
            raise InadmissibleSpecError("r_0 must be positive")
        if any(not r[i] < r[i + 1] for i in range(d - 1)) or not r[d - 1] <= r[d]:
            raise InadmissibleSpecError("depths must satisfy r_0 < ... < r_{d-1} <= r_d")
        for i, (kind, ch) in enumerate(zip(self.kinds, self.characters)):
            if ch.kind != kind:
                raise InadmissibleSpecError(f"character {i} is attached to a {ch.kind} level, expected {kind}")
            if ch.xstar is None:
                if i < d:
                    raise InadmissibleSpecError(f"X_{i}^* is required below the top level")
                continue
            if ch.xstar.ord() != -r[i]:
                raise InadmissibleSpecError(f"X_{i}^* must have valuation -r_{i} = {-r[i]}")
            data = self.generic_data(i)
            if kind == "full":
                if data.levi() != Subalgebra.full(self.torus.n):
                    raise InadmissibleSpecError(f"X_{i}^* must be central on a full level")
            elif i < d and self.kinds[i + 1] == "full":
                if data.levi() != self.torus.subalgebra():
                    raise InadmissibleSpecError(f"the centralizer of X_{i}^* is not G^{i}")
                data.check_generic()

    def to_json(self) -> dict:
        return {
            "torus": self.torus.to_json(),
            "kinds": list(self.kinds),
            "depths": [str(r) for r in self.depths],
            "characters": [c.to_json() for c in self.characters],
            "rho0": {"label": self.rho0_label, "table": {k: v.to_json() for k, v in self.theta0_table.items()}},
        }

    @classmethod
    def from_json(cls, data, precision: int = 24) -> "CuspidalDatum":
        torus = TameTorus.from_json(data["torus"])
        T = torus.towers[0]
        chars = []
        for kind, c in zip(data["kinds"], data["characters"]):
            xs = c.get("xstar")
            y = None
            if xs is not None:
                digits = xs["digits"] if "digits" in xs else xs
                y = T.from_json_digits(digits, precision)
            chars.append(LevelCharacter(kind, y, int(c.get("teich_exponent", 0))))
        rho = data.get("rho0", {})
        table = {k: CycNumber.from_json(v) for k, v in rho.get("table", {}).items()}
        return cls(torus, tuple(data["kinds"]), tuple(Fraction(r) for r in data["depths"]), tuple(chars), rho.get("label", "rho0"), table)


def yu_subgroup_specs(datum: CuspidalDatum) -> dict[str, FiltrationGroupSpec]:
    """J^i, J^i_+ (i = 1..d) and the pro-p radical K^i_+ of K^i at the point of the datum.

    J^i = (G^(i-1), G^i)_{x, (r_(i-1), s_(i-1))} and J^i_+ uses s_(i-1)+;
    K^i_+ = G^0_{x,0+} J^1 ... J^i.  K^0 = stab_{G^0}([x]) itself is not a
    filtration group and is not listed.
    """
    datum.validate()
    p, x = datum.p, datum.x
    out: dict[str, FiltrationGroupSpec] = {}
    for i in range(1, datum.d + 1):
        inner, outer = datum.level(i - 1), datum.level(i)
        r, s = datum.depths[i - 1], datum.s(i - 1)
        out[f"J^{i}"] = FiltrationGroupSpec(p, x, ((inner, Depth(r)), (outer, Depth(s))), label=f"J^{i}", convention="yu")
        out[f"J^{i}_+"] = FiltrationGroupSpec(
            p, x, ((inner, Depth(r)), (outer, Depth(s, True))), label=f"J^{i}_+", convention="yu"
        )
        levels = [(datum.level(0), Depth(Fraction(0), True))]
        for j in range(1, i + 1):
            levels.append((datum.level(j), Depth(datum.s(j - 1))))
        out[f"K^{i}_+"] = FiltrationGroupSpec(p, x, tuple(levels), label=f"K^{i}_+")
    return out


def j_quotient_exponent(datum: CuspidalDatum, i: int) -> int:
    """log_p |J^i / J^i_+|."""
    specs = yu_subgroup_specs(datum)
    return dc_quotient_exponent(specs[f"J^{i}"], specs[f"J^{i}_+"])


# ---------------------------------------------------------------------------
# approximations in torus coordinates


@dataclass
class TorusApproximation:
    """gamma = prod of terms [gamma-bar], 1 + [t] pi^k, ... inside E."""

    gamma: TameElement
    terms: list[tuple[Fraction, TameElement]]
    valid_to: Fraction

    def head(self, t) -> TameElement:
        t = Depth.of(t)
        if t > Depth(self.valid_to):
            raise IndeterminateError(f"depth {t} is beyond the approximation's precision {self.valid_to}")
        T = self.gamma.tower
        acc = T.one(self.gamma.abs_steps)
        for depth, term in self.terms:
            if Depth(depth) < t:
                acc = acc * term
        return acc

    def tail(self, t) -> TameElement:
        return self.gamma / self.head(t)


def torus_approximation(y: TameElement) -> TorusApproximation:
    """The normal approximation of a unit of E, term by term."""
    if not y.is_unit():
        raise ValueError("only units of E have normal approximations here")
    T = y.tower
    K = y.abs_steps
    terms: list[tuple[Fraction, TameElement]] = []
    g0 = T.teichmuller(y.residue(), K)
    if not (g0 - 1).is_zero():
        terms.append((Fraction(0), g0))
    rest = y / g0
    while True:
        z = rest - 1
        if z.is_zero():
            return TorusApproximation(y, terms, z.precision)
        k = z.shift
        t = z.digits()[k]
        term = T.one(K) + T.teichmuller(t, K) * T.pi_power(k, K)
        terms.append((Fraction(k, T.e), term))
        rest = rest / term


def field_automorphisms(torus: TameTorus) -> list[tuple[int, int]]:
    """Aut(E/Q_p) as pairs (a, z): Frobenius^a on W and pi -> [z] pi with z^e = 1."""
    T = torus.towers[0]
    F = T.residue
    g = math.gcd(T.e, F.q - 1)
    zs = sorted(F.exp(j * (F.q - 1) // g) for j in range(g))
    return [(a, z) for a in range(T.f) for z in zs]


def apply_automorphism(y: TameElement, aut: tuple[int, int]) -> TameElement:
    """sigma(y) on Teichmueller digits: [t] pi^k -> [t^(p^a) z^k] pi^k."""
    a, z = aut
    T = y.tower
    F = T.residue
    if y.is_zero():
        return y
    digits = {k: F.mul(F.pow(t, T.p**a), F.pow(z, k % (F.q - 1))) for k, t in y.digits().items()}
    return T.from_digits(digits, y.abs_steps)


# ---------------------------------------------------------------------------
# truncation classes


@dataclass
class TruncationClass:
    """A representative gamma' with its heads gamma'_{<r_i} and tails gamma'_(i).

    ``coords`` is gamma' in torus coordinates when gamma' lies in T;
    ``heads`` are always torus coordinates (central heads are scalars).
    ``tails[i]`` is the matrix gamma'_(i) = (gamma'_{<r_(i+1)})_{>= r_i}, with
    gamma'_(d-1) = gamma'_{>= r_(d-1)}.
    """

    label: str
    matrix: PadicMatrix
    coords: TameElement | None
    approx: Union[TorusApproximation, NormalApproximation]
    heads: list[TameElement]
    tails: list[PadicMatrix]
    central_heads: list[bool]
    certificates: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "coords": None if self.coords is None else self.coords.to_json(),
            "heads": [h.to_json() for h in self.heads],
            "central_heads": self.central_heads,
            "certificates": self.certificates,
        }


def _qp_matrix(torus: TameTorus, y: TameElement, prec_steps: int | None = None) -> PadicMatrix:
    """The regular representation of an integral torus element over Q_p."""
    Qp = get_tower(torus.p)
    K = prec_steps if prec_steps is not None else max(1, y.abs_steps // y.tower.e)
    M = torus.element_matrix([y])
    return PadicMatrix(Qp, [[Qp.from_int(int(M[i, j]), K) for j in range(torus.n)] for i in range(torus.n)])


def torus_coordinates(torus: TameTorus, gamma: PadicMatrix) -> TameElement | None:
    """y with gamma equal to the regular matrix of y, if gamma lies in T."""
    if gamma.tower != get_tower(torus.p) or gamma.n != torus.n:
        return None
    T = torus.towers[0]
    K = gamma.precision_steps() * T.e
    acc = T.zero(K)
    for idx in range(torus.n):
        entry = gamma[idx, 0]
        if entry.is_zero():
            continue
        flat = [0] * torus.n
        flat[idx] = 1
        basis = TameElement.from_integral(T, tuple(flat), 0, K)
        acc = acc + T.from_int(_qp_integer(entry), K) * basis
    try:
        rebuilt = _qp_matrix(torus, acc, gamma.precision_steps())
    except ValueError:
        return None
    if not rebuilt.equals(gamma):
        return None
    return acc


def _scalar_of(M: PadicMatrix) -> TameElement | None:
    """c if M = c * 1 at precision."""
    c = M[0, 0]
    for i in range(M.n):
        for j in range(M.n):
            want = c if i == j else 0
            if not (M[i, j] - want).is_zero():
                return None
    return c


def _class_from_coords(datum: CuspidalDatum, y: TameElement, label: str) -> TruncationClass:
    torus, d, r = datum.torus, datum.d, datum.depths
    approx = torus_approximation(y)
    heads = [approx.head(r[i]) for i in range(d)]
    K = max(1, y.abs_steps // y.tower.e)
    tails = []
    for i in range(d):
        upper = approx.head(r[i + 1]) if i < d - 1 else y
        tails.append(_qp_matrix(torus, upper / heads[i], K))
    central = [_is_central(torus, h) for h in heads]
    return TruncationClass(label, _qp_matrix(torus, y, K), y, approx, heads, tails, central)


def _is_central(torus: TameTorus, h: TameElement) -> bool:
    return all(v == math.inf for v in element_roots(torus, [h]).depths.values())


def _enumerate_torus(datum: CuspidalDatum, y: TameElement) -> list[TruncationClass]:
    torus_kinds = [i for i in range(datum.d) if datum.kinds[i] == "torus"]
    out: list[TruncationClass] = []
    for aut in field_automorphisms(datum.torus):
        cand = _class_from_coords(datum, apply_automorphism(y, aut), f"sigma(a={aut[0]}, z={aut[1]})")
        if any(all((cand.heads[i] - c.heads[i]).is_zero() for i in torus_kinds) for c in out):
            continue
        out.append(cand)
    return out


def _block_compatible(datum: CuspidalDatum, approx: NormalApproximation, i: int) -> tuple[bool, str]:
    """Can gamma_{<r_i} be conjugated into G^i?  Decided from its spectral blocks."""
    if datum.kinds[i] == "full":
        return True, f"level {i}: G^{i} is the full group"
    T = datum.torus.towers[0]
    level = approx.centralizer(Depth(datum.depths[i]))
    if len(level.blocks) != 1:
        return False, f"level {i}: head has {len(level.blocks)} spectral blocks, E^x needs one"
    b = level.blocks[0]
    f_h = b.residue_degree()
    e_h = lcm(1, *(t.depth.denominator for t in approx.terms if t.depth < datum.depths[i]))
    if T.f % f_h or T.e % e_h:
        return False, f"level {i}: head eigenvalue field (f={f_h}, e>={e_h}) does not embed in E (f={T.f}, e={T.e})"
    return True, f"level {i}: head eigenvalue data compatible with E"


def enumerate_classes(gamma: Union[PadicMatrix, TameElement], datum: CuspidalDatum) -> list[TruncationClass]:
    """The ~_0-classes of conjugates of gamma in the truncation set, in a fixed order.

    gamma may be given in torus coordinates or as a matrix over Q_p.  A
    matrix of an element of T is recognised; otherwise the heads must be
    central (for instance gamma close to 1), or be incompatible with G^0,
    in which case no class contributes.
    """
    datum.validate()
    torus, d, r = datum.torus, datum.d, datum.depths
    if isinstance(gamma, TameElement):
        return _enumerate_torus(datum, gamma)
    y = torus_coordinates(torus, gamma)
    if y is not None:
        return _enumerate_torus(datum, y)
    if gamma.tower != get_tower(torus.p):
        raise UnsupportedInputError("matrices must have entries in Q_p")
    approx = normal_approx(gamma, datum.x, up_to=r[d - 1])
    if approx.valid_to != math.inf and Depth(Fraction(approx.valid_to)) < Depth(r[d - 1]):
        raise IndeterminateError(f"normal approximation only valid to {approx.valid_to} < r_(d-1) = {r[d - 1]}")
    notes = []
    for i in range(d):
        ok, why = _block_compatible(datum, approx, i)
        notes.append(why)
        if not ok:
            return []
    heads_m = [approx.head_tail(Depth(r[i]))[0] for i in range(d)]
    scalars = [_scalar_of(h) for h in heads_m]
    if any(c is None for c in scalars):
        raise UnsupportedInputError("non-central heads must be supplied in torus coordinates")
    T = torus.towers[0]
    K = gamma.precision_steps() * T.e
    heads = [T.from_int(_qp_integer(c), K) for c in scalars]
    tails = []
    for i in range(d):
        upper = approx.head_tail(Depth(r[i + 1]))[0] if i < d - 1 else gamma
        tails.append(heads_m[i].inverse() @ upper)
    cls = TruncationClass("gamma", gamma, None, approx, heads, tails, [True] * d, notes)
    return [cls]


@dataclass
class SupportResult:
    ok: bool
    reasons: list[str]

    def __bool__(self) -> bool:
        return self.ok


def support_test(cls: TruncationClass, datum: CuspidalDatum) -> SupportResult:
    """Heads in the levels (up to conjugacy) and x in B_(r_(d-1))(gamma')."""
    reasons: list[str] = []
    d, r = datum.d, datum.depths
    ok = True
    for i in range(d):
        if cls.central_heads[i]:
            reasons.append(f"level {i}: head is central")
        elif datum.kinds[i] == "full" or cls.coords is not None:
            reasons.append(f"level {i}: head lies in G^{i}")
        elif isinstance(cls.approx, NormalApproximation):
            good, why = _block_compatible(datum, cls.approx, i)
            reasons.append(why)
            ok = ok and good
    tail = cls.tails[d - 1]
    depth = mp_depth(tail, datum.x)
    prec = Fraction(tail.precision_steps(), tail.tower.e)
    if depth == math.inf and prec <= r[d - 1]:
        raise IndeterminateError("the tail is 1 only to a precision below r_(d-1)")
    if not depth >= r[d - 1]:
        ok = False
        reasons.append(f"tail depth {depth} < r_(d-1) = {r[d - 1]}: x is not in B_r")
    else:
        reasons.append(f"tail depth {depth} >= r_(d-1) = {r[d - 1]}")
    return SupportResult(ok, reasons)


# ---------------------------------------------------------------------------
# per-level factors


@dataclass
class LevelFactor:
    index: QPowerSqrt
    gauss: CycNumber
    epsilon: int
    classification: dict | None = None


def induction_factor(i: int, cls: TruncationClass, datum: CuspidalDatum, reverse: bool = False) -> LevelFactor:
    """(index square root, normalised Gauss sum, epsilon sign) contributed by level i."""
    torus = datum.torus
    ctx_one = CycNumber.rational(lcm(4, torus.p), 1)
    inner, outer = datum.level(i), datum.level(i + 1)
    r = datum.depths[i]
    head = cls.heads[i]
    roots = element_roots(torus, [head], min_precision=r, reverse=reverse)
    index = c_constant(roots, [(inner, outer, r)])
    if inner == outer or cls.central_heads[i]:
        return LevelFactor(index, ctx_one, 1)
    rc = classify_roots(torus, [head], datum.generic_data(i), reverse=reverse)
    return LevelFactor(index, gauss_sum_sign(rc), epsilon_sign(rc.xi_data), rc.to_json())


# ---------------------------------------------------------------------------
# the formula tree


@dataclass
class Leaf:
    """One factor of a class term.  Exact leaves carry a value, symbolic ones only a label."""

    name: str
    label: str
    value: CycNumber | QPowerSqrt | int | None = None
    data: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.value is not None

    def render(self) -> str:
        if self.value is None:
            return self.label
        return f"{self.label}={_render_value(self.value)}"

    def to_json(self) -> dict:
        out = {"name": self.name, "label": self.label, "exact": self.exact}
        if isinstance(self.value, int):
            out["value"] = self.value
        elif self.value is not None:
            out["value"] = self.value.to_json()
        if self.data:
            out["data"] = self.data
        return out


@dataclass
class LeafSum:
    """coefficient * (sum of leaves), produced by the disconnected-group rewrite."""

    name: str
    coefficient: Fraction
    terms: list[Leaf]

    exact = False

    def render(self) -> str:
        inner = " + ".join(t.render() for t in self.terms)
        coeff = "" if self.coefficient == 1 else f"{self.coefficient}*"
        return f"{coeff}({inner})"

    def to_json(self) -> dict:
        return {"name": self.name, "coefficient": str(self.coefficient), "terms": [t.to_json() for t in self.terms]}


def _render_value(v) -> str:
    if isinstance(v, int):
        return str(v)
    if isinstance(v, QPowerSqrt):
        base, odd, scalar = v.normalized()
        s = _render_cyc(scalar)
        return s if base == 1 or not odd else f"{s}*sqrt({base})"
    return _render_cyc(v)


def _render_cyc(c: CycNumber) -> str:
    if c.is_rational():
        return str(c.rational_value())
    for k in range(c.N):
        if c == CycNumber.root_of_unity(c.N, k):
            g = math.gcd(k, c.N)
            return f"zeta_{c.N // g}^{k // g}"
    return repr(c)


@dataclass
class ClassTerm:
    label: str
    c: Leaf
    gauss: list[Leaf]
    epsilon: list[Leaf]
    phi_heads: list[Leaf]
    theta0: Leaf
    mu_leaves: list[Leaf | LeafSum]
    support: list[str] = field(default_factory=list)

    def leaves(self) -> list[Leaf | LeafSum]:
        return [self.c, *self.gauss, *self.epsilon, *self.phi_heads, self.theta0, *self.mu_leaves]

    def exact_value(self) -> QPowerSqrt:
        """The product of every exact leaf of this term."""
        acc = QPowerSqrt.one(4)
        for leaf in self.leaves():
            if isinstance(leaf, Leaf) and leaf.exact:
                acc = _qmul(acc, leaf.value)
        return acc

    def render(self) -> str:
        return " * ".join(leaf.render() for leaf in self.leaves())

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "c": self.c.to_json(),
            "gauss": [g.to_json() for g in self.gauss],
            "epsilon": [e.to_json() for e in self.epsilon],
            "phi_heads": [f.to_json() for f in self.phi_heads],
            "theta0_label": self.theta0.label,
            "theta0": self.theta0.to_json(),
            "mu_leaves": [m.to_json() for m in self.mu_leaves],
            "exact_value": _render_value(self.exact_value()),
            "support": self.support,
        }


def _qmul(acc: QPowerSqrt, v) -> QPowerSqrt:
    if isinstance(v, int):
        return acc * v
    if isinstance(v, CycNumber):
        M = lcm(acc.scalar.N, v.N)
        return QPowerSqrt(acc.base, acc.exponent, _lift(acc.scalar, M) * _lift(v, M))
    M = lcm(acc.scalar.N, v.scalar.N)
    a = QPowerSqrt(acc.base, acc.exponent, _lift(acc.scalar, M))
    b = QPowerSqrt(v.base, v.exponent, _lift(v.scalar, M))
    return a * b


@dataclass
class CharFormula:
    """phi_d(gamma) times a sum of class terms; an empty sum is the zero formula."""

    mode: str
    phi_d: Leaf | None
    classes: list[ClassTerm]

    def is_zero(self) -> bool:
        return not self.classes

    def symbolic_leaf_count(self) -> int:
        count = 0
        for c in self.classes:
            for leaf in c.leaves():
                if isinstance(leaf, LeafSum):
                    count += len(leaf.terms)
                elif not leaf.exact:
                    count += 1
        return count

    def value(self) -> QPowerSqrt | None:
        """The exact value when no symbolic leaf remains (zero for the empty sum)."""
        if self.is_zero():
            return QPowerSqrt(1, 0, CycNumber.rational(4, 0))
        if self.symbolic_leaf_count():
            return None
        total: CycNumber | None = None
        for c in self.classes:
            v = c.exact_value()
            base, odd, scalar = v.normalized()
            if odd:
                return None
            total = scalar if total is None else _cyc_add(total, scalar)
        out = QPowerSqrt(1, 0, total)
        return _qmul(out, self.phi_d.value) if self.phi_d is not None else out

    def render(self) -> str:
        pd = self.phi_d.render() if self.phi_d is not None else "1"
        if not self.classes:
            return f"{pd} * (empty sum) = 0"
        body = "\n  + ".join(f"[{c.label}] " + c.render() for c in self.classes)
        return f"{pd} * (\n    {body}\n)"

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "phi_d": None if self.phi_d is None else self.phi_d.to_json(),
            "classes": [c.to_json() for c in self.classes],
            "zero": self.is_zero(),
            "rendering": self.render(),
        }


def _cyc_add(a: CycNumber, b: CycNumber) -> CycNumber:
    M = lcm(a.N, b.N)
    return _lift(a, M) + _lift(b, M)


def _depth_zero_label(datum: CuspidalDatum, cls: TruncationClass) -> str:
    """(residue eigenvalue data, field factor) of the depth-zero head gamma'_0."""
    f, e = datum.torus.factors[0]
    if cls.coords is not None:
        return f"{datum.rho0_label}[E(f={f},e={e}); residue={cls.coords.residue()}]"
    chi = cls.matrix.charpoly()
    res = [c.residue() if c.is_integral() else None for c in chi]
    return f"{datum.rho0_label}[GL_{datum.torus.n}; residue charpoly={res}]"


def _centralizer_label(datum: CuspidalDatum, cls: TruncationClass, i: int) -> tuple[str, dict]:
    outer = datum.level(i + 1)
    if cls.central_heads[i]:
        return f"G^{i + 1}", {"subalgebra": outer.to_json()}
    roots = element_roots(datum.torus, [cls.heads[i]])
    H = outer.intersect(roots.centralizer(Depth(Fraction(datum.depths[i]))))
    return f"C_G^{i + 1}(gamma'_<r{i})", {"subalgebra": H.to_json()}


def _determinant(datum: CuspidalDatum, gamma: Union[PadicMatrix, TameElement]) -> TameElement:
    if isinstance(gamma, TameElement):
        gamma = _qp_matrix(datum.torus, gamma)
    return gamma.det()


def _is_regular_semisimple(gamma: PadicMatrix) -> bool:
    """Is the discriminant of the characteristic polynomial nonzero at precision?"""
    chi = gamma.charpoly()
    n = gamma.n
    d = [chi[k] * k for k in range(1, n + 1)]
    T = gamma.tower
    K = gamma.precision_steps()
    size = 2 * n - 1
    zero = T.zero(K)
    rows = []
    for i in range(n - 1):
        row = [zero] * size
        for k, c in enumerate(reversed(chi)):
            row[i + k] = c
        rows.append(row)
    for i in range(n):
        row = [zero] * size
        for k, c in enumerate(reversed(d)):
            row[i + k] = c
        rows.append(row)
    return not _leibniz_det(rows).is_zero()


def assemble_full_char(
    gamma: Union[PadicMatrix, TameElement], datum: CuspidalDatum, mode: str = "tau", reverse: bool = False
) -> CharFormula:
    """The character formula at gamma as an expression tree.

    Mode "tau" gives the character of the inducing representation of the
    compact-mod-centre subgroup; mode "pi" gives the character of the
    supercuspidal representation and needs G^(d-1)/Z(G) anisotropic and
    gamma regular semisimple.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    datum.validate()
    d = datum.d
    torus = datum.torus
    if mode == "pi":
        if datum.kinds[d - 1] != "torus" and torus.n > 1:
            raise UnsupportedInputError("mode pi needs G^(d-1) anisotropic modulo the centre; use mode tau")
        if isinstance(gamma, TameElement):
            if any(v == math.inf for v in element_roots(torus, [gamma]).depths.values()):
                raise UnsupportedInputError("mode pi needs gamma regular semisimple")
        elif not _is_regular_semisimple(gamma):
            raise UnsupportedInputError("mode pi needs gamma regular semisimple")
    classes = enumerate_classes(gamma, datum)
    phi_top = datum.characters[d]
    det = _determinant(datum, gamma)
    phi_d = Leaf("phi_d", "phi_d(gamma)", phi_top.on_scalar(torus, det))
    terms = [_class_term(datum, cls, i_mode=mode, reverse=reverse) for cls in classes]
    return CharFormula(mode, phi_d, terms)


def _mu_label(group: str, i: int, twist: str | None = None) -> str:
    x = f"X_{i}*" if twist is None else f"{twist}.X_{i}*"
    return f"muhat^{{{group}}}_{{{x}}}(Y_{i})"


def _class_term(datum: CuspidalDatum, cls: TruncationClass, i_mode: str, reverse: bool) -> ClassTerm:
    d = datum.d
    support = support_test(cls, datum)
    if not support:
        raise AssertionError(f"enumerated class {cls.label} fails the support test: {support.reasons}")
    index = QPowerSqrt.one(4)
    gauss, eps, phis, mus = [], [], [], []
    for i in range(d):
        lf = induction_factor(i, cls, datum, reverse=reverse)
        index = _qmul(index, lf.index)
        gauss.append(Leaf("gauss", f"G(phi_{i}, gamma'_<r{i})", lf.gauss, {"classification": lf.classification} if lf.classification else {}))
        eps.append(Leaf("epsilon", f"eps(phi_{i}, gamma'_<r{i})", lf.epsilon))
        ch = datum.characters[i]
        phis.append(Leaf("phi", f"phi_{i}(gamma'_<r{i})", ch.on_torus(datum.torus, cls.heads[i])))
        group, gdata = _centralizer_label(datum, cls, i)
        if i_mode == "tau":
            group = f"stab_{group}([x])"
        arg = cls.tails[i] - PadicMatrix.identity(cls.tails[i].tower, cls.tails[i].n, cls.tails[i].precision_steps())
        mus.append(
            Leaf(
                "mu_hat",
                _mu_label(group, i),
                None,
                {
                    "level": i,
                    "group": group,
                    "centralizer": gdata,
                    "xstar": ch.xstar.to_json() if ch.xstar is not None else None,
                    "argument": arg.to_json(),
                    "haar": f"meas(K_sigma_{i + 1} ∩ H^{i}'/Z(G)) = 1",
                    "components": ["1"],
                    "component_index": 1,
                },
            )
        )
    label = _depth_zero_label(datum, cls)
    theta = datum.theta0_table.get(label)
    name = "Theta0" if i_mode == "pi" else "theta0"
    theta0 = Leaf(name, label, theta)
    c = Leaf("c", "c(phi, gamma'_<r)", index)
    return ClassTerm(cls.label, c, gauss, eps, phis, theta0, mus, support.reasons)


# ---------------------------------------------------------------------------
# disconnected centralizers


def normalizer_components(torus: TameTorus, head: TameElement, xstar: TameElement | None = None) -> tuple[list[tuple[int, int]], int]:
    """Components of the normalizer-type centralizer N_G(T) cap C_G(head), modulo T.

    In the eigenvalue-permutation model these are the automorphisms of E
    fixing the head.  Returns (components, index) with index the number of
    components that also fix X*, i.e. [C_H(X*) : C_(H deg)(X*)].
    """
    comps = [a for a in field_automorphisms(torus) if (apply_automorphism(head, a) - head).is_zero()]
    if xstar is None:
        return comps, len(comps)
    fixing = [a for a in comps if (apply_automorphism(xstar, a) - xstar).is_zero()]
    return comps, len(fixing)


def with_components(leaf: Leaf, components: Sequence[str], index: int) -> Leaf:
    """A copy of a mu-hat leaf over a group with the given component labels."""
    data = dict(leaf.data)
    data["components"] = list(components)
    data["component_index"] = index
    return Leaf(leaf.name, leaf.label, leaf.value, data)


def rewrite_disconnected(formula: CharFormula) -> CharFormula:
    """Replace mu-hat over H by [C_H(X*) : C_(H deg)(X*)]^-1 times the sum over H/H deg of mu-hat over H deg."""
    new_classes = []
    for c in formula.classes:
        mus: list[Leaf | LeafSum] = []
        for leaf in c.mu_leaves:
            comps = leaf.data.get("components", ["1"]) if isinstance(leaf, Leaf) else None
            if comps is None or len(comps) <= 1:
                mus.append(leaf)
                continue
            index = int(leaf.data.get("component_index", 1))
            parts = []
            for g in comps:
                data = dict(leaf.data)
                data["components"] = ["1"]
                data["component_index"] = 1
                data["twist"] = g
                group = data.get("group", "H")
                data["group"] = f"{group}°"
                parts.append(Leaf(leaf.name, _mu_label(data["group"], data["level"], g), None, data))
            mus.append(LeafSum(leaf.name, Fraction(1, index), parts))
        new_classes.append(
            ClassTerm(c.label, c.c, c.gauss, c.epsilon, c.phi_heads, c.theta0, mus, c.support)
        )
    return CharFormula(formula.mode, formula.phi_d, new_classes)
