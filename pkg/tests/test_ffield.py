from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamechar.exactnum import CycContext
from tamechar.ffield import (
    GF,
    FieldDomainError,
    charpoly,
    det,
    embedding,
    get_field,
    is_irreducible,
    is_semisimple,
    mat_inverse,
    mat_mul,
    minimal_polynomial,
    nullspace,
    rank,
)

FIELDS = [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (3, 3), (7, 2), (13, 1)]


def schoolbook_mul(a: list[int], b: list[int], poly: tuple[int, ...], p: int) -> list[int]:
    """Independent polynomial multiplication modulo the defining polynomial."""
    n = len(poly) - 1
    prod = [0] * (2 * n)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for j in range(n + 1):
                prod[k - n + j] = (prod[k - n + j] - c * poly[j]) % p
    return prod[:n]


@pytest.mark.parametrize("p,n", FIELDS)
def test_multiplication_matches_schoolbook(p, n):
    F = get_field(p, n)
    step = max(1, F.q // 40)
    for a in range(0, F.q, step):
        for b in range(0, F.q, step):
            assert F.digits(F.mul(a, b)) == schoolbook_mul(F.digits(a), F.digits(b), F.poly, p)


@pytest.mark.parametrize("p,n", FIELDS)
def test_field_axioms(p, n):
    F = get_field(p, n)
    for a in range(1, F.q):
        assert F.mul(a, F.inv(a)) == 1
        assert F.add(a, F.neg(a)) == 0
    assert is_irreducible(list(F.poly), p)


@pytest.mark.parametrize("p,n", FIELDS)
def test_sgn_is_euler_criterion(p, n):
    F = get_field(p, n)
    for a in range(1, F.q):
        euler = F.pow(a, (F.q - 1) // 2)
        assert F.sgn(a) == (1 if euler == 1 else -1)
    with pytest.raises(FieldDomainError):
        F.sgn(0)
    assert F.sgn(0, zero_ok=True) == 1


@pytest.mark.parametrize("p,n", FIELDS)
def test_sgn_is_multiplicative(p, n):
    F = get_field(p, n)
    for a, b in itertools.islice(itertools.product(range(1, F.q), repeat=2), 2000):
        assert F.sgn(F.mul(a, b)) == F.sgn(a) * F.sgn(b)


def test_sgn_examples():
    F = GF(5)
    assert [F.sgn(a) for a in range(1, 5)] == [1, -1, -1, 1]
    F9 = GF(9)
    # every element of GF(3) is a square in GF(9)
    assert F9.sgn(F9.from_int(-1)) == 1
    assert GF(3).sgn(2) == -1


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (3, 3), (3, 4), (7, 2)])
def test_trace_and_norm_by_frobenius(p, n):
    F = get_field(p, n)
    for m in [d for d in range(1, n + 1) if n % d == 0]:
        for a in range(F.q):
            conj = [F.frobenius_power(a, m * i) for i in range(n // m)]
            tr = 0
            nm = 1
            for c in conj:
                tr = F.add(tr, c)
                nm = F.mul(nm, c)
            t, nn = F.trace_norm(a, m)
            assert t == tr and (nn == nm if a else nn == 0)
            assert F.in_subfield(t, m) and F.in_subfield(nn, m)


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (3, 3)])
def test_subfield_sgn_relative(p, n):
    F = get_field(p, n)
    small = get_field(p, 1)
    emb = embedding(small, F)
    for a in range(1, p):
        assert F.sgn(emb[a], m=1) == small.sgn(a)


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 1), (5, 2)])
def test_lambda_is_additive_character(p, n):
    F = get_field(p, n)
    ctx = CycContext.for_prime(p)
    for a in range(0, F.q, max(1, F.q // 10)):
        for b in range(0, F.q, max(1, F.q // 10)):
            assert F.lambda_char(F.add(a, b), ctx) == F.lambda_char(a, ctx) * F.lambda_char(b, ctx)
    total = ctx.zero
    for a in range(F.q):
        total = total + F.lambda_char(a, ctx)
    assert total.is_zero()


@pytest.mark.parametrize("small,big", [((3, 1), (3, 2)), ((3, 2), (3, 4)), ((5, 1), (5, 2)), ((3, 1), (3, 3))])
def test_embedding_is_homomorphism(small, big):
    S, B = get_field(*small), get_field(*big)
    emb = embedding(S, B)
    for a in range(S.q):
        for b in range(S.q):
            assert emb[S.add(a, b)] == B.add(emb[a], emb[b])
            assert emb[S.mul(a, b)] == B.mul(emb[a], emb[b])


def test_frobenius_has_order_n():
    F = GF(27)
    a = F.x()
    assert F.frobenius_power(a, 3) == a and F.frobenius_power(a, 1) != a


def test_degree_domain():
    F = GF(9)
    with pytest.raises(ValueError):
        F.trace(1, 3)
    with pytest.raises(ValueError):
        get_field(2, 1)


@st.composite
def matrices(draw, p=5, n=3):
    return [[draw(st.integers(0, p - 1)) for _ in range(n)] for _ in range(n)]


@given(matrices(), matrices())
def test_det_multiplicative(A, B):
    F = GF(5)
    assert det(F, mat_mul(F, A, B)) == F.mul(det(F, A), det(F, B))


@given(matrices())
def test_inverse_and_rank(A):
    F = GF(5)
    r = rank(F, A)
    assert r + len(nullspace(F, A)) == 3
    if det(F, A):
        I = mat_mul(F, A, mat_inverse(F, A))
        assert I == [[int(i == j) for j in range(3)] for i in range(3)]
        assert r == 3


@given(matrices())
def test_cayley_hamilton_and_minpoly(A):
    F = GF(5)
    chi = charpoly(F, A)
    assert len(chi) == 4 and chi[-1] == 1
    mu = minimal_polynomial(F, A)
    # mu divides chi
    from tamechar.ffield import poly_divmod

    _, rem = poly_divmod(F, chi, mu)
    assert not any(rem)
    assert isinstance(is_semisimple(F, A), bool)


def test_element_wrapper_round_trip():
    F = GF(25)
    e = F.element([2, 3])
    assert e.coeffs == [2, 3]
    assert e.frobenius(2) == e
    assert F.from_json(F.to_json()) == F
