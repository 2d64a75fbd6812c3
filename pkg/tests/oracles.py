"""Independent brute-force oracles shared by several test modules."""

from __future__ import annotations

from tamechar.ffield import det, embedding, get_field


def independent_trace_form_sgn(p: int, n: int, tau_steps: int) -> int:
    """sgn det of (b1, b2) -> Tr_{E/F_p}(b1 tau(b2)) on E = GF(p^n), power basis of a generator."""
    F = get_field(p, 1)
    E = get_field(p, n)
    g = E.generator
    basis = [E.pow(g, i) for i in range(n)]
    back = {c: a for a, c in enumerate(embedding(F, E))}
    gram = []
    for b1 in basis:
        row = []
        for b2 in basis:
            t = E.mul(b1, E.frobenius_power(b2, tau_steps))
            acc = 0
            for i in range(n):
                acc = E.add(acc, E.frobenius_power(t, i))
            row.append(back[acc])
        gram.append(row)
    return F.sgn(det(F, gram))
