"""Quadratic Gauss sums over finite fields.

``g_lambda`` is the normalised one-dimensional Gauss sum constant G_Lambda
from its closed case formula, ``gauss_closed`` is sgn(det B) G_Lambda^dim,
and ``gauss_bruteforce`` sums Lambda(B(v, v)) over every vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exactnum import CycContext, CycNumber, QPowerSqrt, cyc_equal
from .ffield import FqField, get_field
from .forms import SesquiForm, det_square_class
from .kernels import trace_histogram

BRUTEFORCE_LIMIT = 1_000_000


class GaussSizeError(ValueError):
    """The brute-force sum would exceed the desk-scale bound."""


@dataclass(frozen=True)
class GaussValue:
    """A Gauss-sum value.

    Closed forms store a 4th root of unity in ``value``.  Raw sums store the
    unnormalised sum in ``value`` and the normaliser |V|^(1/2) in
    ``magnitude``, so that value = magnitude * (normalised Gauss sum).
    ``flipped`` records whether the orientation calibration replaced
    sqrt(-1) by -sqrt(-1).
    """

    value: CycNumber
    magnitude: QPowerSqrt | None = None
    flipped: bool | None = None

    def normalised_equals(self, closed: "GaussValue") -> bool:
        """Does this raw sum equal magnitude * closed.value exactly?"""
        if self.magnitude is None:
            return cyc_equal(self.value, closed.value)
        target = self.magnitude * closed.value
        return target.equals_cyc(self.value)

    def to_json(self) -> dict:
        out = {"value": self.value.to_json()}
        if self.magnitude is not None:
            out["magnitude"] = self.magnitude.to_json()
        if self.flipped is not None:
            out["flipped"] = self.flipped
        return out


def g_lambda_formula(F: FqField, sqrt_minus_one: CycNumber | None = None) -> CycNumber:
    """The case formula for G_Lambda with a given choice of sqrt(-1)."""
    ctx = CycContext.for_prime(F.p)
    s = F.n
    if F.p % 4 == 1:
        return ctx.rational(-((-1) ** s))
    i = sqrt_minus_one if sqrt_minus_one is not None else ctx.sqrt_minus_one
    return (-i) ** s


def _raw_one_dim(p: int) -> CycNumber:
    """sum_{t in GF(p)} zeta_p^(t^2), the unnormalised one-dimensional sum."""
    ctx = CycContext.for_prime(p)
    counts = [0] * p
    for t in range(p):
        counts[(t * t) % p] += 1
    return ctx.from_counts(p, counts)


@lru_cache(maxsize=None)
def orientation_flip(p: int) -> bool:
    """Calibrate sqrt(-1) against the brute-force sum over GF(p).

    Returns True when the formula only matches after sqrt(-1) -> -sqrt(-1).
    For p = 1 mod 4 the formula does not involve sqrt(-1) and no flip occurs.
    """
    if p % 4 == 1:
        return False
    F = get_field(p, 1)
    ctx = CycContext.for_prime(p)
    raw = _raw_one_dim(p)
    if QPowerSqrt(p, 1, g_lambda_formula(F, ctx.sqrt_minus_one)).equals_cyc(raw):
        return False
    if QPowerSqrt(p, 1, g_lambda_formula(F, -ctx.sqrt_minus_one)).equals_cyc(raw):
        return True
    raise AssertionError(f"neither orientation of sqrt(-1) matches the Gauss sum over GF({p})")


def calibrated_sqrt_minus_one(p: int) -> CycNumber:
    i = CycContext.for_prime(p).sqrt_minus_one
    return -i if orientation_flip(p) else i


def g_lambda(F: FqField) -> GaussValue:
    """G_Lambda(F) by the case formula, with the calibrated sqrt(-1)."""
    flip = orientation_flip(F.p)
    return GaussValue(g_lambda_formula(F, calibrated_sqrt_minus_one(F.p)), None, flip)


def gauss_closed(B: SesquiForm) -> GaussValue:
    """sgn(det B) * G_Lambda^dim for a non-degenerate symmetric form."""
    if not (B.tau_trivial and B.eps == 1):
        raise ValueError("the closed form applies to symmetric bilinear forms (tau = 1, eps = +1)")
    g = g_lambda(B.field)
    if B.dim == 0:
        return GaussValue(CycContext.for_prime(B.field.p).one, None, g.flipped)
    s = det_square_class(B)
    return GaussValue(g.value**B.dim * s, None, g.flipped)


def histogram(B: SesquiForm, backend: str = "auto") -> np.ndarray:
    """counts[t] = #{v : Tr B(v, v) = t}, over all v in V."""
    F = B.field
    d = B.dim
    if F.q**d > BRUTEFORCE_LIMIT:
        raise GaussSizeError(f"{F.q}^{d} summands exceed {BRUTEFORCE_LIMIT}; restrict the dimension or field")
    add, mul, _neg, tr, _frob = F.tables()
    tau = np.array([B.tau(a) for a in range(F.q)], dtype=np.int64)
    gram = np.array(B.gram, dtype=np.int64).reshape(d, d)
    return trace_histogram(gram, add, mul, tau, tr, F.q, F.p, d, backend=backend)


def gauss_bruteforce(B: SesquiForm, backend: str = "auto") -> GaussValue:
    """sum_v Lambda(B(v, v)) exactly, with |V|^(1/2) carried symbolically."""
    F = B.field
    ctx = CycContext.for_prime(F.p)
    counts = histogram(B, backend)
    raw = ctx.from_counts(F.p, [int(c) for c in counts])
    return GaussValue(raw, QPowerSqrt.of(F.q, B.dim, ctx.N))


def gauss_agree(B: SesquiForm) -> tuple[GaussValue, GaussValue, bool]:
    closed = gauss_closed(B)
    brute = gauss_bruteforce(B)
    return closed, brute, brute.normalised_equals(closed)
