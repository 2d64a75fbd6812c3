from __future__ import annotations

import math
import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamechar.padic import PadicMatrix, PrecisionError, get_tower
from tamechar.rootsets import TameTorus
from tamechar.tame import (
    Depth,
    FieldBlock,
    FiltrationGroupSpec,
    InadmissibleSpecError,
    NotCompactError,
    NotTameError,
    OutsideParahoricError,
    Subalgebra,
    barycenter,
    congruent,
    coset_exponent,
    dc_group_exponent,
    dc_quotient_exponent,
    double_bracket,
    head_tail,
    in_lattice,
    is_good,
    mock_exp,
    mp_depth,
    normal_approx,
    random_lattice_element,
    vertex,
)

from approx_corpus import corpus, rational_blocks
from spec_corpus import spec_corpus


# -- depths and filtrations ----------------------------------------------------


def test_depth_order_and_steps():
    assert Depth(Fr(1)) < Depth(Fr(1), True) < Depth(Fr(3, 2))
    assert Depth.of("1/2+") == Depth(Fr(1, 2), True)
    assert Depth(Fr(1, 2)).first_step(2) == 1 and Depth(Fr(1, 2), True).first_step(2) == 2


def test_mp_depth_examples():
    T = get_tower(5)
    assert mp_depth(PadicMatrix.diagonal(T, [T.from_int(6, 10), T.one(10)])) == 1
    assert mp_depth(PadicMatrix.identity(T, 2, 10)) == math.inf
    T2 = get_tower(5, 1, 2)
    w = T2.uniformizer(10)
    g = PadicMatrix(T2, [[T2.one(10), w], [T2.zero(10), T2.one(10)]])
    assert mp_depth(g, [0, Fr(1, 2)]) == 1


def test_mp_depth_outside_parahoric():
    T = get_tower(3)
    g = PadicMatrix(T, [[T.one(8), T.pi_power(-1, 8)], [T.zero(8), T.one(8)]])
    with pytest.raises(OutsideParahoricError):
        mp_depth(g)


def test_lattice_membership_at_precision():
    T = get_tower(3)
    X = PadicMatrix(T, [[T.zero(2), T.zero(8)], [T.zero(8), T.zero(8)]])
    with pytest.raises(PrecisionError):
        in_lattice(X, None, 3)


# -- mock exponential ------------------------------------------------------------


def test_mock_exp_examples():
    T = get_tower(5)
    Z = PadicMatrix.from_ints(T, [[0, 0], [0, 0]], 10)
    assert mock_exp(Z, None, 1, 1).is_identity()
    X1 = PadicMatrix.from_ints(T, [[0, 5], [0, 0]], 10)
    X2 = PadicMatrix.from_ints(T, [[0, 0], [5, 0]], 10)
    assert mock_exp(X1, None, 1, 2).equals(PadicMatrix.from_ints(T, [[1, 5], [0, 1]], 10))
    e1, e2 = mock_exp(X1, None, 1, 2), mock_exp(X2, None, 1, 2)
    comm = e1 @ e2 @ e1.inverse() @ e2.inverse()
    assert congruent(comm, PadicMatrix.from_ints(T, [[26, 0], [0, -24]], 10), None, Depth(Fr(2), True))


def test_mock_exp_preconditions():
    T = get_tower(3)
    X = PadicMatrix.from_ints(T, [[1, 0], [0, 0]], 8)
    with pytest.raises(OutsideParahoricError):
        mock_exp(X, None, 1, 1)
    with pytest.raises(ValueError):
        mock_exp(PadicMatrix.from_ints(T, [[3, 0], [0, 0]], 8), None, 1, 3)


@given(st.sampled_from([2, 3]), st.sampled_from([3, 5]), st.booleans(), st.integers(0, 10**6))
def test_mock_exp_homomorphism_mod_2t(n, p, bary, seed):
    T = get_tower(p)
    x = barycenter(n) if bary else vertex(n)
    t = Fr(1, n) if bary else Fr(1)
    rng = random.Random(seed)
    X = random_lattice_element(T, n, x, t, rng, 8)
    Y = random_lattice_element(T, n, x, t, rng, 8)
    prod = mock_exp(X, x, t, 2 * t) @ mock_exp(Y, x, t, 2 * t)
    assert congruent(prod, mock_exp(X + Y, x, t, 2 * t), x, 2 * t)


def test_mock_exp_homomorphism_is_sharp():
    # the congruence genuinely fails one step deeper for generic samples
    T = get_tower(3)
    rng = random.Random(0)
    fails = 0
    for _ in range(50):
        X = random_lattice_element(T, 2, None, 1, rng, 8)
        Y = random_lattice_element(T, 2, None, 1, rng, 8)
        prod = mock_exp(X, None, 1, 2) @ mock_exp(Y, None, 1, 2)
        fails += not congruent(prod, mock_exp(X + Y, None, 1, 2), None, Depth(Fr(2), True))
    assert fails > 25


# -- normal approximations -------------------------------------------------------


def test_identity_has_empty_approximation():
    T = get_tower(5)
    A = normal_approx(PadicMatrix.identity(T, 2, 10))
    assert A.terms == [] and A.tail.is_identity()


def test_diag_example():
    p = 5
    T = get_tower(p)
    P = 16
    eps = T.teichmuller(2, P)
    g = PadicMatrix.diagonal(T, [eps, eps * T.from_int(1 + p, P)])
    A = normal_approx(g)
    assert A.depths == [0, 1]
    assert A.terms[0].element.equals(PadicMatrix.diagonal(T, [eps, eps]))
    assert A.terms[1].element.equals(PadicMatrix.diagonal(T, [T.one(P), T.from_int(1 + p, P)]))
    assert all(is_good(t) for t in A.terms) and A.reconstructs()
    assert A.centralizer(Depth(Fr(1), True)).block_sizes() == [1, 1]
    assert A.centralizer(Fr(1)).block_sizes() == [2]
    head, tail = head_tail(A, 1)
    assert head.equals(PadicMatrix.diagonal(T, [eps, eps]))
    assert tail.equals(head.inverse() @ g)


def test_elliptic_teichmuller_example():
    p = 5
    torus = TameTorus(p, ((2, 1),))
    E = torus.towers[0]
    gen = E.residue.generator
    y = E.teichmuller(gen, 16)
    M = PadicMatrix.from_ints(get_tower(p), [[int(v) for v in row] for row in torus.element_matrix([y])], 16)
    A = normal_approx(M)
    assert A.depths == [0] and A.tail.is_identity()
    assert A.centralizer(Depth(Fr(0), True)).block_sizes() == [2]


def test_not_compact():
    T = get_tower(3)
    with pytest.raises(NotCompactError):
        normal_approx(PadicMatrix.from_ints(T, [[3, 0], [0, 1]], 8))


def test_truncated_approximation_skips_deep_ramification():
    T = get_tower(5)
    # Y = 125 [[5, 1], [1, 1]] has eigenvalues 125 (3 +- sqrt 5): separating them needs a ramified tower
    g = PadicMatrix.identity(T, 2, 20) + PadicMatrix.from_ints(T, [[625, 125], [125, 125]], 20)
    with pytest.raises(NotTameError):
        normal_approx(g)
    A = normal_approx(g, up_to=2)
    assert A.terms == [] and A.valid_to == 2
    with pytest.raises(PrecisionError):
        head_tail(A, 3)


def test_head_tail_beyond_last_term():
    T = get_tower(3)
    g = PadicMatrix.diagonal(T, [T.from_int(4, 12), T.one(12)])
    A = normal_approx(g)
    head, tail = head_tail(A, 5)
    assert tail.is_identity() and head.equals(g)


@pytest.fixture(scope="module")
def approx_cases():
    return corpus(seed=7)[::6]


def test_corpus_subset_invariants(approx_cases):
    for case in approx_cases:
        A = normal_approx(case.gamma)
        assert A.reconstructs(), case.label
        assert all(is_good(t) for t in A.terms), case.label
        assert all(a < b for a, b in zip(A.depths, A.depths[1:]))
        sizes = [lv.block_sizes() for lv in A.chain]
        for lv in A.chain:
            r = Depth(lv.upper) if lv.upper is not None else Depth(Fr(10**6))
            assert rational_blocks(case, r) == lv.block_sizes(), case.label
        # coarsening as the threshold decreases: block counts never grow
        assert all(len(a) <= len(b) for a, b in zip(sizes, sizes[1:]))


# -- filtration-group orders -----------------------------------------------------


def test_full_congruence_count():
    G2 = Subalgebra.full(2)
    spec = FiltrationGroupSpec(3, vertex(2), ((G2, Depth(Fr(0), True)),))
    assert dc_group_exponent(spec, 3) == 8


def test_unramified_elliptic_index():
    G2 = Subalgebra.full(2)
    E = Subalgebra(2, (), (FieldBlock(2, 1, (0, 1)),))
    chain = [(None, Fr(0), G2), (Fr(0), None, E)]
    num = double_bracket(chain, 3, vertex(2), Fr(2))
    inner = double_bracket(chain, 3, vertex(2), Fr(2), ambient=E)
    assert dc_quotient_exponent(num, inner.inside(G2, Fr(1))) == 0
    assert dc_quotient_exponent(num, inner.inside(G2, Depth(Fr(1), True))) == 2
    k = Depth(Fr(3))
    assert coset_exponent(num, k) - coset_exponent(inner.inside(G2, Depth(Fr(1), True)), k) == 2


def test_elliptic_block_contributes_off_diagonal_roots_only():
    G2 = Subalgebra.full(2)
    E = Subalgebra(2, (), (FieldBlock(2, 1, (0, 1)),))
    a = FiltrationGroupSpec(3, vertex(2), ((E, Depth(Fr(1))), (G2, Depth(Fr(1)))))
    b = FiltrationGroupSpec(3, vertex(2), ((E, Depth(Fr(1))), (G2, Depth(Fr(2)))))
    assert dc_quotient_exponent(a, b) == 2


def test_inadmissible_specs():
    G2 = Subalgebra.full(2)
    T2 = Subalgebra.torus(2)
    with pytest.raises(InadmissibleSpecError):
        FiltrationGroupSpec(3, vertex(2), ((G2, Depth(Fr(0))),))
    with pytest.raises(InadmissibleSpecError):
        FiltrationGroupSpec(3, vertex(2), ((G2, Depth(Fr(1))), (T2, Depth(Fr(1)))))
    with pytest.raises(InadmissibleSpecError):
        FiltrationGroupSpec(3, vertex(2), ((T2, Depth(Fr(3))), (G2, Depth(Fr(1)))), convention="yu")


@pytest.mark.parametrize("p", [3, 5])
def test_counts_match_cosets_small(p):
    specs = spec_corpus(p)[:12]
    for spec, k in specs:
        assert dc_group_exponent(spec, k) == coset_exponent(spec, k, limit=500_000), spec.label


def test_subalgebra_intersection():
    E = Subalgebra(2, (), (FieldBlock(2, 1, (0, 1)),))
    G2 = Subalgebra.full(2)
    assert G2.intersect(E) == E and E.intersect(G2) == E
    assert G2.contains(Subalgebra.torus(2)) and not Subalgebra.torus(2).contains(G2)


def test_spec_json_round_trip():
    spec, _ = spec_corpus(3)[10]
    assert FiltrationGroupSpec.from_json(spec.to_json()) == spec
