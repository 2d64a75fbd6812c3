"""Filtration-group specifications for the counting oracle, with their moduli."""

from __future__ import annotations

from fractions import Fraction as Fr

from tamechar.padic import PadicMatrix, get_tower
from tamechar.tame import (
    Depth,
    FieldBlock,
    FiltrationGroupSpec,
    Subalgebra,
    barycenter,
    chain_subalgebras,
    double_bracket,
    normal_approx,
    vertex,
)


def _labelled(spec: FiltrationGroupSpec, label: str) -> FiltrationGroupSpec:
    return FiltrationGroupSpec(spec.p, spec.x, spec.levels, spec.e, spec.f, label, spec.convention)


def spec_corpus(p: int) -> list[tuple[FiltrationGroupSpec, Depth]]:
    out: list[tuple[FiltrationGroupSpec, Depth]] = []
    G2, T2 = Subalgebra.full(2), Subalgebra.torus(2)
    G3, T3 = Subalgebra.full(3), Subalgebra.torus(3)
    L21 = Subalgebra.from_partition(3, [[0, 1], [2]])
    E = Subalgebra(2, (), (FieldBlock(2, 1, (0, 1)),))
    Er = Subalgebra(2, (), (FieldBlock(1, 2, (1, 0)),))
    zp = Depth(Fr(0), True)

    out.append((FiltrationGroupSpec(p, vertex(2), ((G2, zp),), label="G_x,0+ vertex"), Depth(Fr(2))))
    out.append((FiltrationGroupSpec(p, barycenter(2), ((G2, zp),), label="I_0+"), Depth(Fr(2))))
    out.append((FiltrationGroupSpec(p, barycenter(3), ((G3, Depth(Fr(2))),), label="G3_bary,2"), Depth(Fr(7, 3))))
    out.append((FiltrationGroupSpec(p, barycenter(3), ((T3, zp), (G3, Depth(Fr(1, 3)))), label="T0+ G1/3 bary"), Depth(Fr(1))))
    out.append((FiltrationGroupSpec(p, barycenter(3), ((G3, zp),), label="I3_0+"), Depth(Fr(1))))
    out.append((FiltrationGroupSpec(p, vertex(2), ((T2, zp), (G2, Depth(Fr(1)))), label="T0+ G1"), Depth(Fr(2))))
    out.append((FiltrationGroupSpec(p, vertex(2), ((E, zp), (G2, Depth(Fr(1)))), label="E0+ G1"), Depth(Fr(2))))
    out.append((FiltrationGroupSpec(p, barycenter(2), ((Er, zp), (G2, Depth(Fr(1, 2)))), label="Er0+ G1/2"), Depth(Fr(3, 2))))
    out.append((FiltrationGroupSpec(p, barycenter(2), ((Er, zp), (G2, Depth(Fr(1)))), label="Er0+ G1"), Depth(Fr(2))))
    for r, s in [(Fr(2), Depth(Fr(1))), (Fr(2), Depth(Fr(1), True)), (Fr(3), Depth(Fr(3, 2))), (Fr(3), Depth(Fr(3, 2), True))]:
        for A, name in ((E, "E"), (T2, "T")):
            spec = FiltrationGroupSpec(p, vertex(2), ((A, Depth(r)), (G2, s)), label=f"({name},G)_({r},{s})", convention="yu")
            out.append((spec, Depth(Fr(3))))
    for r, s in [(Fr(3, 2), Depth(Fr(3, 4))), (Fr(3, 2), Depth(Fr(3, 4), True)), (Fr(1), Depth(Fr(1, 2)))]:
        spec = FiltrationGroupSpec(p, barycenter(2), ((Er, Depth(r)), (G2, s)), label=f"(Er,G)_({r},{s})", convention="yu")
        out.append((spec, Depth(Fr(2))))

    # [[gamma; x, t]] and truncations for the GL_3 chain G > GL_2 x GL_1 > T;
    # at the vertex the p = 5 coset counts are too large to enumerate, so the
    # barycenter (finer steps) carries those cases
    chain = [(None, Fr(0), G3), (Fr(0), Fr(1), L21), (Fr(1), None, T3)]
    for t, j in [(Fr(2), None), (Fr(3), None), (Fr(3), Fr(1)), (Depth(Fr(2), True), None), (Fr(2), Fr(1, 2))]:
        if p == 3 or t != Fr(2) or j is not None:
            spec = double_bracket(chain, p, vertex(3), t, j)
            out.append((_labelled(spec, f"[[gamma; 0, {t}]]^({j})"), Depth(Fr(2))))
        spec = double_bracket(chain, p, barycenter(3), t, j)
        out.append((_labelled(spec, f"[[gamma; bary, {t}]]^({j})"), Depth(Fr(4, 3))))

    # the same shape read off an actual normal approximation
    T = get_tower(p)
    P = 12
    eps = T.teichmuller(2, P)
    gamma = PadicMatrix.diagonal(T, [eps * T.from_int(1 + p, P), eps * T.from_int(1 + p + 2 * p * p, P), eps * T.from_int(1 + 2 * p, P)])
    chain2 = chain_subalgebras(normal_approx(gamma))
    for t in (Fr(2), Fr(3)):
        out.append((_labelled(double_bracket(chain2, p, barycenter(3), t), f"[[diag gamma; bary, {t}]]"), Depth(Fr(4, 3))))
        if p == 3:
            out.append((_labelled(double_bracket(chain2, p, vertex(3), t), f"[[diag gamma; 0, {t}]]"), Depth(Fr(2))))
    return out
