from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamechar.padic import PadicMatrix, PrecisionError, TowerMismatchError, get_tower

TOWERS = [(3, 1, 1), (5, 1, 1), (3, 2, 1), (5, 1, 2), (3, 1, 2), (3, 2, 2), (5, 2, 1), (3, 1, 4)]
P = 12


@st.composite
def elements(draw, tower):
    digits = {k: draw(st.integers(0, tower.q - 1)) for k in range(draw(st.integers(0, 3)), 8)}
    return tower.from_digits(digits, P)


@st.composite
def tower_pairs(draw):
    T = get_tower(*draw(st.sampled_from(TOWERS)))
    return T, draw(elements(T)), draw(elements(T)), draw(elements(T))


@given(st.sampled_from([3, 5, 7]), st.integers(-(10**8), 10**8), st.integers(-(10**8), 10**8))
def test_qp_matches_integers(p, a, b):
    T = get_tower(p)
    K = 10
    mod = p**K
    x, y = T.from_int(a, K), T.from_int(b, K)
    assert x + y == T.from_int((a + b) % mod, K)
    assert x * y == T.from_int((a * b) % mod, K)
    assert x - y == T.from_int((a - b) % mod, K)


@given(st.sampled_from([3, 5]), st.integers(1, 10**6).filter(lambda a: a % 15), st.integers(-(10**6), 10**6))
def test_qp_unit_inverse(p, a, b):
    if a % p == 0:
        return
    T = get_tower(p)
    K = 10
    inv = pow(a, -1, p**K)
    assert T.from_int(a, K).inverse() == T.from_int(inv, K)


@given(tower_pairs())
def test_ring_identities(t):
    T, a, b, c = t
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)


@given(tower_pairs())
def test_inverse_of_nonzero(t):
    T, a, _, _ = t
    if a.is_zero():
        return
    one = a * a.inverse()
    assert (one - T.one(P)).ord() >= one.precision


@pytest.mark.parametrize("p,f,e", TOWERS)
def test_teichmuller_lifts(p, f, e):
    T = get_tower(p, f, e)
    F = T.residue
    for a in range(1, T.q):
        ta = T.teichmuller(a, P)
        assert ta.residue() == a
        assert ta ** T.q == ta
        b = (a * 7 + 3) % T.q or 1
        assert ta * T.teichmuller(b, P) == T.teichmuller(F.mul(a, b), P)


@pytest.mark.parametrize("p,f,e", TOWERS)
def test_uniformizer(p, f, e):
    T = get_tower(p, f, e)
    w = T.uniformizer(P)
    assert w.ord() == Fraction(1, e)
    assert w**e == T.from_int(p, P)


@given(tower_pairs())
def test_digits_round_trip(t):
    T, a, _, _ = t
    assert T.from_digits(a.digits(), a.abs_steps) == a
    assert T.from_json_digits(a.to_json()["digits"], a.abs_steps) == a


def test_valuation_and_precision():
    T = get_tower(5, 1, 2)
    x = T.pi_power(3, 10)
    assert x.ord() == Fraction(3, 2) and x.precision == 5
    z = T.zero(6)
    assert z.is_zero() and z.ord() == math.inf


def test_fraction_constructor():
    T = get_tower(3)
    x = T.from_fraction(Fraction(1, 3), 8)
    assert x * T.from_int(3, 9) == T.one(8)


def test_tower_checks():
    with pytest.raises(ValueError):
        get_tower(3, 1, 3)
    with pytest.raises(TowerMismatchError):
        get_tower(3).one() + get_tower(5).one()


def test_matrix_inverse_and_det():
    T = get_tower(5)
    M = PadicMatrix.from_ints(T, [[1, 5], [7, 2]], 10)
    I = M @ M.inverse()
    assert I.is_identity()
    assert M.det() == T.from_int(2 - 35, 10)
    chi = M.charpoly()
    assert chi[0] == M.det() and chi[1] == -M.trace()


def test_singular_matrix_inverse_fails():
    T = get_tower(3)
    M = PadicMatrix.from_ints(T, [[1, 1], [1, 1]], 8)
    with pytest.raises((PrecisionError, ZeroDivisionError, ValueError)):
        M.inverse()


def test_matrix_json_round_trip():
    T = get_tower(3, 2, 1)
    M = PadicMatrix.from_ints(T, [[1, 3], [9, 4]], 8)
    assert PadicMatrix.from_json(T, M.to_json(), 8).equals(M)
