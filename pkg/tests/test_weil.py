from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamechar.exactnum import CycContext, QPowerSqrt
from tamechar.ffield import GF, is_semisimple, mat_identity, mat_inverse, mat_mul
from tamechar.weil import (
    NotSymplecticError,
    SymplecticSpace,
    WeilCaseError,
    WeilModel,
    XiData,
    XiOrbit,
    bruhat_decompose,
    epsilon_cardinality,
    epsilon_check,
    epsilon_sign,
    random_symplectic,
    sl2_semisimple_class_reps,
    synthesize_module,
    weil_char_formula,
)

from xi_corpus import xi_corpus


@pytest.fixture(scope="module")
def models():
    out = {}
    for q, n in [(3, 1), (5, 1), (7, 1), (3, 2)]:
        space = SymplecticSpace.standard(GF(q), n)
        out[(q, n)] = (space, WeilModel(space))
    return out


@pytest.mark.parametrize("q,n", [(3, 1), (5, 1), (7, 1), (3, 2)])
def test_identity_trace_is_dimension(models, q, n):
    space, model = models[(q, n)]
    ctx = CycContext.for_prime(q)
    assert model.trace(mat_identity(2 * n)) == ctx.rational(q**n)


@pytest.mark.parametrize("q", [3, 5])
def test_model_is_a_homomorphism(models, q):
    space, model = models[(q, 1)]
    rng = random.Random(q)
    for _ in range(6):
        g = random_symplectic(space.field, 1, rng)
        h = random_symplectic(space.field, 1, rng)
        gh = mat_mul(space.field, g, h)
        assert (model.matrix(g) @ model.matrix(h)).equals(model.matrix(gh))


def test_model_is_a_homomorphism_sp4(models):
    space, model = models[(3, 2)]
    rng = random.Random(7)
    for _ in range(3):
        g = random_symplectic(space.field, 2, rng)
        h = random_symplectic(space.field, 2, rng)
        assert (model.matrix(g) @ model.matrix(h)).equals(model.matrix(mat_mul(space.field, g, h)))


@pytest.mark.parametrize("q", [3, 5])
def test_bruhat_factorisation_reconstructs(q):
    F = GF(q)
    rng = random.Random(11)
    for n in (1, 2):
        for _ in range(5):
            g = random_symplectic(F, n, rng)
            assert bruhat_decompose(F, g).product(F) == g


@pytest.mark.parametrize("q", [3, 5, 7])
def test_formula_on_sl2_classes(models, q):
    space, model = models[(q, 1)]
    reps = sl2_semisimple_class_reps(space.field)
    # q semisimple classes: +-1, (q-3)/2 split, (q-1)/2 elliptic
    assert len(reps) == 2 + (q - 3) // 2 + (q - 1) // 2
    for g in reps:
        assert weil_char_formula(space, g).value == model.trace(g)


def test_formula_on_sp4_samples(models):
    space, model = models[(3, 2)]
    rng = random.Random(5)
    hits = 0
    while hits < 8:
        g = random_symplectic(space.field, 2, rng)
        if not is_semisimple(space.field, g):
            continue
        assert weil_char_formula(space, g).value == model.trace(g)
        hits += 1


def test_class_function(models):
    space, model = models[(5, 1)]
    F = space.field
    rng = random.Random(1)
    g = random_symplectic(F, 1, rng)
    h = random_symplectic(F, 1, rng)
    conj = mat_mul(F, mat_mul(F, h, g), mat_inverse(F, h))
    assert model.trace(conj) == model.trace(g)


def test_minus_identity_sl2():
    # trace of -1 is sgn(-1) * (normalised Gauss sum) ... determined by the model
    F = GF(5)
    space = SymplecticSpace.standard(F, 1)
    g = [[4, 0], [0, 4]]
    assert weil_char_formula(space, g).value == WeilModel(space).trace(g)


def test_not_symplectic_rejected():
    space = SymplecticSpace.standard(GF(3), 1)
    with pytest.raises(NotSymplecticError):
        space.require_symplectic([[1, 1], [0, 2]])


def test_non_semisimple_rejected():
    space = SymplecticSpace.standard(GF(3), 1)
    with pytest.raises(WeilCaseError):
        weil_char_formula(space, [[1, 1], [0, 1]])


@pytest.mark.parametrize("p", [3, 5])
def test_epsilon_small_cases(p):
    base = GF(p)
    K = GF(p * p)
    # a lone -1 eigenvalue orbit of degree 2: sign sgn(-1)
    xi = XiData(base, (XiOrbit("symm_minus_one", K, K.neg(1)),), 0)
    assert epsilon_sign(xi) == base.sgn(base.neg(1))
    assert epsilon_check(xi)[2]
    # a non-symmetric pair with value a: sign sgn(a)
    for a in range(2, p):
        xi = XiData(base, (XiOrbit("non_symm", base, a),), 0)
        assert epsilon_sign(xi) == base.sgn(a)
        assert epsilon_check(xi)[2]


def test_epsilon_cardinality():
    xi = XiData(GF(3), (), 4)
    assert epsilon_cardinality(xi) == QPowerSqrt.of(3, 4)


@pytest.mark.parametrize("p", [3, 5])
def test_epsilon_corpus_dim6(p):
    n = 0
    for xi in xi_corpus(p, max_dim=6, per_kind=1):
        assert epsilon_check(xi)[2], xi
        n += 1
    assert n > 10


def test_synthesized_module_is_symplectic():
    base = GF(3)
    K = GF(81)
    Q = 9
    a = next(t for t in range(2, K.q) if t != K.neg(1) and K.pow(t, Q + 1) == 1)
    xi = XiData(base, (XiOrbit("symm_inverse", K, a),), 2)
    space, g = synthesize_module(xi)
    assert space.dim == 6 and space.is_symplectic(g)


def test_orbit_validation():
    K = GF(9)
    with pytest.raises(ValueError):
        XiOrbit("symm_minus_one", GF(3), 2).validate()
    with pytest.raises(ValueError):
        XiOrbit("symm_inverse", K, 1).validate()
    with pytest.raises(ValueError):
        XiData(GF(3), (), 3).validate()
