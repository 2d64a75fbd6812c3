"""Random tame semisimple compact elements with independently known eigenvalues.

``split`` cases are M diag(eigs) M^-1 over a tower.  ``elliptic`` cases
are conjugates of the regular representation of y in E over Q_p, whose
eigenvalues are the Galois conjugates of y, obtained from its
Teichmueller digits: Frobenius raises digits to the p-th power, and for
E = Q_p(p^(1/2)) the non-trivial automorphism negates odd digits.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from tamechar.padic import PadicMatrix, TameElement, TameTower, get_tower
from tamechar.rootsets import TameTorus

SPLIT_TOWERS = [(3, 1, 1), (5, 1, 1), (3, 2, 1), (5, 1, 2), (3, 1, 2), (3, 2, 2), (5, 2, 1), (3, 1, 4)]
PREC = 20


@dataclass
class Case:
    """gamma with eigenvalues ``eigs``; ``galois`` permutes eig indices (identity when they are rational)."""

    gamma: PadicMatrix
    eigs: list[TameElement]
    label: str
    galois: tuple[int, ...] | None = None


def _rand_unit_matrix(T: TameTower, n: int, rng: random.Random) -> PadicMatrix:
    while True:
        M = PadicMatrix(T, [[T.from_digits({k: rng.randrange(T.q) for k in range(3)}, PREC) for _ in range(n)] for _ in range(n)])
        if M.det().is_unit():
            return M


def _rand_eigs(T: TameTower, n: int, rng: random.Random) -> list[TameElement]:
    t0 = rng.randrange(1, T.q)
    eigs: list[TameElement] = []
    for _ in range(n):
        if eigs and rng.random() < 0.5:
            # agree with an earlier eigenvalue to a random depth
            src = rng.choice(eigs)
            cut = rng.randrange(0, 5)
            dig = {k: c for k, c in src.digits().items() if k < cut}
            for k in range(cut, cut + 3):
                dig[k] = rng.randrange(T.q)
            if not dig.get(0):
                dig[0] = t0
        else:
            dig = {0: rng.randrange(1, T.q)}
            for k in range(1, 4):
                dig[k] = rng.randrange(T.q)
        eigs.append(T.from_digits(dig, PREC))
    return eigs


def split_cases(rng: random.Random, per: int = 5) -> list[Case]:
    out = []
    for p, f, e in SPLIT_TOWERS:
        T = get_tower(p, f, e)
        for n in (2, 3):
            for _ in range(per):
                eigs = _rand_eigs(T, n, rng)
                M = _rand_unit_matrix(T, n, rng)
                out.append(Case(M @ PadicMatrix.diagonal(T, eigs) @ M.inverse(), eigs, f"split p={p} f={f} e={e} n={n}"))
    return out


def _conjugates(y: TameElement, f: int, e: int) -> list[TameElement]:
    T = y.tower
    F = T.residue
    out = []
    digits = y.digits()
    if e == 1:
        for a in range(f):
            out.append(T.from_digits({k: F.frobenius_power(c, a) for k, c in digits.items()}, y.abs_steps))
    else:
        minus = F.neg(1)
        out.append(y)
        out.append(T.from_digits({k: (F.mul(c, minus) if k % 2 else c) for k, c in digits.items()}, y.abs_steps))
    return out


def elliptic_cases(rng: random.Random, per: int = 4) -> list[Case]:
    out = []
    for p in (3, 5):
        for f, e in ((2, 1), (3, 1), (1, 2)):
            torus = TameTorus(p, ((f, e),))
            E = torus.towers[0]
            Qp = get_tower(p)
            n = f * e
            for _ in range(per):
                while True:
                    dig = {k: rng.randrange(E.q) for k in range(0, 4)}
                    dig[0] = dig[0] or 1
                    y = E.from_digits(dig, PREC)
                    conj = _conjugates(y, f, e)
                    if not all((c - y).is_zero() for c in conj[1:]):
                        break
                R = [[int(v) for v in row] for row in torus.element_matrix([y])]
                if e == 1:
                    # over Q_p: Frobenius cycles the conjugates
                    G = PadicMatrix.from_ints(Qp, R, PREC)
                    M = _rand_unit_matrix(Qp, n, rng)
                    perm = tuple((a + 1) % f for a in range(f))
                    out.append(Case(M @ G @ M.inverse(), conj, f"elliptic p={p} f={f}", perm))
                else:
                    # the eigenvalues need e = 2, so work over E itself, where they are rational
                    G = PadicMatrix.from_ints(E, R, PREC)
                    M = PadicMatrix.from_ints(E, [[1, 2], [p, 1]], PREC)
                    out.append(Case(M @ G @ M.inverse(), conj, f"ramified p={p} over E"))
    return out


def rational_blocks(case: Case, r) -> list[int]:
    """Block sizes of C^(r)(gamma): eigenvalue clusters at depth r, merged along Galois orbits."""
    from tamechar.tame import eigen_partition

    clusters = eigen_partition(case.eigs, r)
    where = {i: k for k, b in enumerate(clusters) for i in b}
    parent = list(range(len(clusters)))

    def find(k: int) -> int:
        while parent[k] != k:
            k = parent[k]
        return k

    if case.galois is not None:
        for i, j in enumerate(case.galois):
            a, b = find(where[i]), find(where[j])
            if a != b:
                parent[a] = b
    sizes: dict[int, int] = {}
    for k, b in enumerate(clusters):
        sizes[find(k)] = sizes.get(find(k), 0) + len(b)
    return sorted(sizes.values())


def corpus(seed: int = 1) -> list[Case]:
    rng = random.Random(seed)
    return split_cases(rng) + elliptic_cases(rng)
