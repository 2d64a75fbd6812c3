"""A quick oracle suite: every closed form against its brute-force counterpart on small inputs."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .ffield import get_field
from .forms import random_form
from .gauss import gauss_agree
from .padic import PadicMatrix, get_tower
from .rootsets import (
    GenericCharacterData,
    TameTorus,
    classify_roots,
    gauss_sum_bruteforce,
    gauss_sum_closed,
)
from .tame import (
    Depth,
    FieldBlock,
    FiltrationGroupSpec,
    Subalgebra,
    coset_exponent,
    dc_group_exponent,
    normal_approx,
    vertex,
)
from .weil import (
    SymplecticSpace,
    WeilCaseError,
    WeilModel,
    XiData,
    XiOrbit,
    epsilon_check,
    random_symplectic,
    sl2_semisimple_class_reps,
    weil_char_formula,
)


@dataclass
class CheckResult:
    name: str
    passed: int
    total: int
    seconds: float

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.passed}/{self.total} ({self.seconds:.2f}s)"


def _timed(name: str, fn: Callable[[], tuple[int, int]]) -> CheckResult:
    t = time.perf_counter()
    passed, total = fn()
    return CheckResult(name, passed, total, time.perf_counter() - t)


def _gauss() -> tuple[int, int]:
    rng = random.Random(1)
    ok = total = 0
    for p in (3, 5, 7):
        F = get_field(p, 1)
        for d in (1, 2, 3):
            for _ in range(3):
                _, _, agree = gauss_agree(random_form(F, d, rng=rng))
                ok += agree
                total += 1
    return ok, total


def _weil() -> tuple[int, int]:
    rng = random.Random(2)
    ok = total = 0
    for p in (3, 5):
        F = get_field(p, 1)
        space = SymplecticSpace.standard(F, 1)
        model = WeilModel(space)
        for g in sl2_semisimple_class_reps(F):
            ok += weil_char_formula(space, g).value == model.trace(g)
            total += 1
    F = get_field(3, 1)
    space = SymplecticSpace.standard(F, 2)
    model = WeilModel(space)
    tried = 0
    while tried < 4:
        g = random_symplectic(F, 2, rng)
        try:
            value = weil_char_formula(space, g).value
        except WeilCaseError:
            continue
        ok += value == model.trace(g)
        total += 1
        tried += 1
    return ok, total


def _epsilon() -> tuple[int, int]:
    ok = total = 0
    for p in (3, 5):
        base = get_field(p, 1)
        K = get_field(p, 2)
        cases = [
            XiData(base, (), 2),
            XiData(base, (XiOrbit("symm_minus_one", K, K.neg(1)),), 0),
            XiData(base, (XiOrbit("non_symm", base, 2),), 0),
        ]
        for xi in cases:
            ok += epsilon_check(xi)[2]
            total += 1
    return ok, total


def _approx() -> tuple[int, int]:
    rng = random.Random(3)
    ok = total = 0
    for p in (3, 5):
        T = get_tower(p)
        for _ in range(4):
            rows = [[rng.randrange(p**6) for _ in range(2)] for _ in range(2)]
            rows[0][0] = rows[0][0] * p + 1
            rows[1][1] = rows[1][1] * p + 1
            rows[0][1] *= p
            rows[1][0] *= p
            g = PadicMatrix.from_ints(T, rows, 8)
            ok += normal_approx(g).reconstructs()
            total += 1
    return ok, total


def _counts() -> tuple[int, int]:
    ok = total = 0
    G2 = Subalgebra.full(2)
    for p in (3, 5):
        E = Subalgebra(2, (), (FieldBlock(2, 1, (0, 1)),))
        for r, s in ((Fraction(2), Depth(Fraction(1))), (Fraction(2), Depth(Fraction(1), True))):
            spec = FiltrationGroupSpec(p, vertex(2), ((E, Depth(r)), (G2, s)), convention="yu")
            ok += dc_group_exponent(spec, Depth(Fraction(3))) == coset_exponent(spec, Depth(Fraction(3)))
            total += 1
    return ok, total


def _gsum() -> tuple[int, int]:
    ok = total = 0
    for p in (3, 5):
        torus = TameTorus(p, ((2, 1),))
        E = torus.towers[0]
        x = E.teichmuller(E.residue.x(), 20)
        gamma = [E.one(20) + E.pi_power(1, 20) * x]
        char = GenericCharacterData(torus, Fraction(3), [E.pi_power(-3, 20) * x])
        cls = classify_roots(torus, gamma, char)
        ok += gauss_sum_closed(cls).equals_cyc(gauss_sum_bruteforce(cls).value)
        total += 1
        torus = TameTorus(p, ((1, 2),), (Fraction(1, 2),))
        E = torus.towers[0]
        char = GenericCharacterData(torus, Fraction(3, 2), [E.pi_power(-3, 20)])
        cls = classify_roots(torus, [E.one(20) + E.pi_power(1, 20)], char)
        ok += gauss_sum_closed(cls).equals_cyc(gauss_sum_bruteforce(cls).value)
        total += 1
    return ok, total


SUITE: dict[str, Callable[[], tuple[int, int]]] = {
    "gauss closed form vs brute force": _gauss,
    "weil character formula vs explicit model": _weil,
    "epsilon sign vs synthesised module trace": _epsilon,
    "normal approximation reconstructs gamma": _approx,
    "filtration index vs coset enumeration": _counts,
    "gauss-sum sign and magnitude vs brute force": _gsum,
}


def run_checks() -> list[CheckResult]:
    return [_timed(name, fn) for name, fn in SUITE.items()]
