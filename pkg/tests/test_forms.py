from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamechar.ffield import GF, FieldDomainError, det, get_field
from tamechar.forms import (
    DegenerateFormError,
    HermitianConditionError,
    SesquiForm,
    all_forms,
    det_square_class,
    diagonal_form,
    hyperbolic_plane,
    max_isotropic_dim_bruteforce,
    random_form,
    trace_form_det,
    witt_decompose,
    witt_index_formula,
)

from oracles import independent_trace_form_sgn


def test_hermitian_condition_enforced():
    F = GF(9)
    with pytest.raises(HermitianConditionError):
        SesquiForm(F, [[0, 1], [2, 0]])
    # alternating form over GF(3): eps = -1
    SesquiForm(GF(3), [[0, 1], [2, 0]], eps=-1)


def test_degenerate_rejected():
    B = SesquiForm(GF(5), [[1, 1], [1, 1]])
    assert not B.is_nondegenerate()
    with pytest.raises(DegenerateFormError):
        witt_decompose(B)


def test_witt_examples():
    # hyperbolic plane: index 1; x^2 + y^2 over GF(3): anisotropic (-1 is a non-square)
    assert witt_decompose(hyperbolic_plane(GF(3))).witt_index == 1
    assert witt_decompose(diagonal_form(GF(3), [1, 1])).witt_index == 0
    assert witt_decompose(diagonal_form(GF(5), [1, 1])).witt_index == 1
    assert witt_index_formula(diagonal_form(GF(5), [1, 1, 1])) == 1


@pytest.mark.parametrize(
    "q,tau_k,eps,d",
    [(3, 0, 1, 2), (3, 0, 1, 3), (5, 0, 1, 2), (3, 0, -1, 2), (3, 0, -1, 4), (9, 1, 1, 2), (9, 1, -1, 2), (9, 1, 1, 3)],
)
def test_decomposition_invariants_exhaustive(q, tau_k, eps, d):
    F = GF(q)
    for B in all_forms(F, d, tau_k, eps):
        W = witt_decompose(B)
        W.check(B)
        assert W.witt_index == max_isotropic_dim_bruteforce(B) == witt_index_formula(B)


@given(st.sampled_from([(5, 0, 1), (7, 0, 1), (9, 1, 1), (9, 1, -1), (25, 1, 1), (5, 0, -1)]), st.integers(1, 4), st.integers(0, 10**6))
def test_decomposition_random(cfg, d, seed):
    q, tau_k, eps = cfg
    if eps == -1 and tau_k == 0 and d % 2:
        return
    B = random_form(GF(q), d, tau_k, eps, rng=random.Random(seed))
    W = witt_decompose(B)
    W.check(B)
    assert W.witt_index == witt_index_formula(B)


@given(st.sampled_from([3, 5, 7]), st.integers(1, 3), st.integers(0, 10**6))
def test_det_class_is_congruence_invariant(q, d, seed):
    rng = random.Random(seed)
    F = GF(q)
    B = random_form(F, d, rng=rng)
    while True:
        P = [[rng.randrange(q) for _ in range(d)] for _ in range(d)]
        if det(F, P):
            break
    G = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            s = 0
            for k in range(d):
                for l in range(d):
                    s = F.add(s, F.mul(F.mul(P[k][i], B.gram[k][l]), P[l][j]))
            G[i][j] = s
    assert det_square_class(SesquiForm(F, G)) == det_square_class(B)


def test_det_class_hermitian_uses_fixed_field():
    F = GF(9)
    B = SesquiForm(F, [[1, 0], [0, F.from_int(2)]], tau_k=1)
    assert det_square_class(B) == -1
    with pytest.raises(FieldDomainError):
        F.sgn(F.x(), m=1)


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_trace_form_det_independent(p, n):
    F = get_field(p, 1)
    taus = [0] + ([n // 2] if n % 2 == 0 else [])
    for j in taus:
        assert trace_form_det(n, j, F, verify=False) == independent_trace_form_sgn(p, n, j)


def test_trace_form_det_known_values():
    # trace form on GF(9)/GF(3): det class -1 for tau = 1, +1 for the Frobenius twist
    assert trace_form_det(2, 0, GF(3)) == -1
    assert trace_form_det(2, 1, GF(3)) == 1
    assert trace_form_det(1, 0, GF(7)) == 1


def test_trace_form_det_rejects_bad_tau():
    with pytest.raises(ValueError):
        trace_form_det(3, 1, GF(3))


def test_json_round_trip():
    B = random_form(GF(9), 3, 1, 1, rng=random.Random(4))
    assert SesquiForm.from_json(B.to_json()) == B
