from __future__ import annotations

from fractions import Fraction as Fr

import pytest

from tamechar.exactnum import CycNumber, cyc_equal
from tamechar.rootsets import (
    GenericCharacterData,
    TameTorus,
    classify_roots,
    gauss_sum_bruteforce,
    gauss_sum_closed,
    gauss_sum_sign,
)
from tamechar.tame import coset_exponent, dc_quotient_exponent, double_bracket

K = 20


def unramified(p: int, r: int):
    torus = TameTorus(p, ((2, 1),))
    E = torus.towers[0]
    x = E.teichmuller(E.residue.x(), K)
    gamma = [E.one(K) + E.pi_power(1, K) * x]
    return torus, gamma, GenericCharacterData(torus, Fr(r), [E.pi_power(-r, K) * x])


def ramified(p: int, r: Fr):
    torus = TameTorus(p, ((1, 2),), (Fr(1, 2),))
    E = torus.towers[0]
    gamma = [E.one(K) + E.pi_power(1, K)]
    return torus, gamma, GenericCharacterData(torus, r, [E.pi_power(int(-2 * r), K)])


@pytest.mark.parametrize("p", [3, 5, 7])
def test_unramified_depth_three(p):
    torus, gamma, char = unramified(p, 3)
    char.check_generic()
    cls = classify_roots(torus, gamma, char)
    assert [len(v) for v in cls.upsilon.values()] == [1, 0, 0]
    assert cyc_equal(gauss_sum_sign(cls), CycNumber.rational(4, -1))
    closed = gauss_sum_closed(cls)
    assert closed.magnitude_exponent() == 1
    assert closed.equals_cyc(CycNumber.rational(4, -p))
    if p < 7:
        brute = gauss_sum_bruteforce(cls)
        assert brute.cosets == p**2
        assert closed.equals_cyc(brute.value)


@pytest.mark.parametrize("p", [3, 5])
def test_ramified_depth_three_halves(p):
    torus, gamma, char = ramified(p, Fr(3, 2))
    cls = classify_roots(torus, gamma, char)
    closed = gauss_sum_closed(cls)
    brute = gauss_sum_bruteforce(cls)
    assert closed.equals_cyc(brute.value)
    assert cyc_equal(gauss_sum_sign(cls) ** 4, CycNumber.rational(4, 1))


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("r", [1, 2])
def test_shallow_depths_are_trivial(p, r):
    for torus, gamma, char in (unramified(p, r), ramified(p, Fr(r))):
        cls = classify_roots(torus, gamma, char)
        assert all(not v for v in cls.upsilon.values())
        closed = gauss_sum_closed(cls)
        assert closed.equals_cyc(CycNumber.rational(4, 1))
        assert closed.equals_cyc(gauss_sum_bruteforce(cls).value)


@pytest.mark.parametrize("p", [3, 5])
def test_reverse_representative(p):
    for torus, gamma, char in (unramified(p, 3), ramified(p, Fr(3, 2))):
        a = classify_roots(torus, gamma, char)
        b = classify_roots(torus, gamma, char, reverse=True)
        assert gauss_sum_closed(a) == gauss_sum_closed(b)
        assert {k: len(v) for k, v in a.xi.items()} == {k: len(v) for k, v in b.xi.items()}


@pytest.mark.parametrize("p", [3, 5])
def test_upsilon_count_matches_lattice_index(p):
    # the magnitude exponent equals twice the log_q index of the two lattices
    torus, gamma, char = unramified(p, 3)
    cls = classify_roots(torus, gamma, char)
    roots = cls.roots
    chain = roots.chain()
    s = char.r / 2
    H = double_bracket(chain, p, torus.x, char.r, j=s)
    Kg = double_bracket(chain, p, torus.x, char.r, j=s, ambient=char.levi()).inside(
        roots.centralizer("0+"), s
    )
    e = dc_quotient_exponent(H, Kg)
    assert 2 * gauss_sum_closed(cls).magnitude_exponent() == e


def test_xi_classes_partition_nonlevi_roots():
    torus, gamma, char = unramified(5, 3)
    cls = classify_roots(torus, gamma, char)
    seen = [o.rep for v in cls.xi.values() for o in v]
    assert len(seen) == len(set(seen))
    assert cls.to_json()["xi_fixed_dim"] == cls.xi_data.fixed_dim


def test_non_generic_character_rejected():
    torus = TameTorus(5, ((2, 1),))
    E = torus.towers[0]
    x = E.teichmuller(E.residue.x(), K)
    with pytest.raises(ValueError):
        GenericCharacterData(torus, Fr(3), [E.pi_power(-4, K) * x])
    # a central X* puts every root in the twisted Levi, which is allowed
    GenericCharacterData(torus, Fr(3), [E.pi_power(-3, K)]).check_generic()


def test_torus_json_round_trip():
    torus = TameTorus(3, ((1, 2),), (Fr(1, 2),))
    assert TameTorus.from_json(torus.to_json()) == torus
