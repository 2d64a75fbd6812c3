"""Timings of the brute-force oracles and the main closed forms.

Run with ``python benchmarks/bench.py``; prints one line per measurement.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

from tamechar.ffield import GF
from tamechar.forms import random_form
from tamechar.gauss import gauss_bruteforce, gauss_closed
from tamechar.kernels import HAVE_COMPILED
from tamechar.padic import get_tower
from tamechar.tame import Depth, FieldBlock, FiltrationGroupSpec, Subalgebra, coset_exponent, dc_group_exponent, vertex
from tamechar.tame import mock_exp, random_lattice_element
from tamechar.weil import SymplecticSpace, WeilModel, random_symplectic


def timed(label: str, fn, repeat: int = 1) -> None:
    t = time.perf_counter()
    for _ in range(repeat):
        fn()
    print(f"{label:<48} {(time.perf_counter() - t) / repeat * 1000:9.2f} ms")


def main() -> None:
    rng = random.Random(0)
    for q, d in ((13, 3), (27, 2), (5, 5)):
        B = random_form(GF(q), d, rng=rng)
        backends = ["numpy"] + (["compiled"] if HAVE_COMPILED else [])
        for backend in backends:
            timed(f"gauss brute force q={q} d={d} [{backend}]", lambda: gauss_bruteforce(B, backend=backend))
        timed(f"gauss closed form q={q} d={d}", lambda: gauss_closed(B), repeat=20)

    space = SymplecticSpace.standard(GF(3), 2)
    model = WeilModel(space)
    g = random_symplectic(space.field, 2, rng)
    timed("Weil model trace, Sp(4, F_3)", lambda: model.trace(g), repeat=5)

    G2 = Subalgebra.full(2)
    E = Subalgebra(2, (), (FieldBlock(2, 1, (0, 1)),))
    spec = FiltrationGroupSpec(3, vertex(2), ((E, Depth(Fraction(2))), (G2, Depth(Fraction(1)))), convention="yu")
    k = Depth(Fraction(3))
    timed("affine-root count, GL_2 p=3", lambda: dc_group_exponent(spec, k), repeat=20)
    timed("coset enumeration, GL_2 p=3 mod p^3", lambda: coset_exponent(spec, k))

    T = get_tower(5)

    def mock_pairs():
        for _ in range(100):
            X = random_lattice_element(T, 3, None, 1, rng, 8)
            Y = random_lattice_element(T, 3, None, 1, rng, 8)
            mock_exp(X, None, 1, 2) @ mock_exp(Y, None, 1, 2)

    timed("100 mock-exponential products, GL_3 p=5", mock_pairs)


if __name__ == "__main__":
    main()
