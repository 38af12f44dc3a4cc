import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liftchar import _linalg as la
from liftchar import random_instances as ri
from liftchar.exceptions import DimensionMismatchError, MalformedLiftingError, NotContractiveError
from liftchar.lifting import (
    Lifting,
    exists_subisometric,
    gamma_from_lifting,
    is_coisometric_lifting,
    is_reduced,
    is_resolving,
    is_subisometric,
    isometries_equivalent,
    lifting_from_gamma,
    reduce_lifting,
    unobservable_subspace,
)
from liftchar.oracles import resolving_bruteforce
from liftchar.rowcon import RowContraction, validate_row_contraction


def s(*vals):
    return [np.array([[v]], dtype=complex) for v in vals]


@pytest.fixture
def sphere_lifting():
    """C = (1, 0), A = (0, 0), gamma = 1: E_1 = [[1,0],[0,0]], E_2 = [[0,0],[1,0]]."""
    return lifting_from_gamma(s(1.0, 0.0), s(0.0, 0.0), np.eye(1))


def test_trivial_lifting(rng):
    C = ri.random_row_contraction(2, 2, rng)
    L = Lifting.trivial(C)
    assert L.q == 0 and all(b.shape == (0, 2) for b in L.B)
    assert all(np.array_equal(e, c) for e, c in zip(L.E, C))
    L2 = lifting_from_gamma(C, RowContraction.zeros(2, 0), np.zeros((C.defects.rank, 0)))
    assert L2.q == 0


def test_sphere_lifting_blocks(sphere_lifting):
    E1, E2 = sphere_lifting.E
    # the defect basis of C has a phase gauge; B_2 has modulus 1
    assert np.allclose(E1, [[1, 0], [0, 0]])
    assert np.allclose(np.abs(E2), [[0, 0], [1, 0]])
    assert np.allclose(E1 @ la.dagger(E1) + E2 @ la.dagger(E2), np.eye(2))


def test_sphere_lifting_classification(sphere_lifting):
    L = sphere_lifting
    g = gamma_from_lifting(L)
    assert g.is_isometry and np.isclose(abs(g.gamma[0, 0]), 1)
    rep = is_coisometric_lifting(L)
    assert rep.ok and rep.cross_norm < 1e-15 and rep.row_defect < 1e-15
    assert is_subisometric(L).ok
    assert is_reduced(L)


def test_sphere_with_radius():
    a = np.sqrt(0.5)
    L = Lifting(s(1.0, 0.0), s(a, 0.0), [np.array([[0.0]]), np.array([[np.sqrt(0.5)]])])
    assert is_coisometric_lifting(L, 1e-12).ok


def test_gamma_rejections(rng):
    C = ri.random_row_contraction(2, 2, rng)
    A = ri.random_row_contraction(2, 1, rng)
    g = ri.random_gamma(C, A, rng, norm=1.0)
    with pytest.raises(NotContractiveError):
        lifting_from_gamma(C, A, 1.01 * g)
    with pytest.raises(DimensionMismatchError):
        lifting_from_gamma(C, A, np.zeros((1, 1)))


def test_zero_b_gives_zero_gamma(rng):
    C = ri.random_row_contraction(2, 2, rng)
    A = ri.random_row_contraction(2, 2, rng)
    L = Lifting(C, A, [np.zeros((2, 2))] * 2)
    g = gamma_from_lifting(L)
    assert g.norm == 0 and g.residual == 0


def test_malformed_blocks():
    E = [np.array([[0.5, 0.1], [0.0, 0.5]])]
    with pytest.raises(MalformedLiftingError):
        Lifting.from_blocks(E, 1)


def test_b_incompatible_with_gamma_rejected():
    # C coisometric scalar d=1: D_C = 0, so only B = 0 is allowed
    L = Lifting(s(1.0), s(0.0), [np.array([[0.0]])])
    assert gamma_from_lifting(L).residual == 0
    L = Lifting(s(1 / np.sqrt(2)), s(0.0), [np.array([[0.5]])])
    assert gamma_from_lifting(L).residual < 1e-12
    # B pointing outside the range of D_{*,A}: A coisometric so D_{*,A} = 0
    Cc = s(0.5, 0.0)
    bad = Lifting(Cc, s(0.5, np.sqrt(0.75)), [np.array([[0.3]]), np.array([[0.0]])], check=False)
    with pytest.raises(MalformedLiftingError):
        gamma_from_lifting(bad)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 31))
def test_gamma_round_trip(d, p, q, seed):
    rng = np.random.default_rng(seed)
    C = ri.random_row_contraction(d, p, rng)
    A = ri.random_row_contraction(d, q, rng)
    g = ri.random_gamma(C, A, rng)
    L = lifting_from_gamma(C, A, g)
    assert validate_row_contraction(L.E, 1e-10).ok
    back = gamma_from_lifting(L)
    assert la.opnorm(back.gamma - g) <= 1e-9
    assert back.residual <= 1e-10


def test_coisometric_lifting_conditions(rng):
    C = ri.random_coisometry(2, 2, rng)
    A = ri.random_row_contraction(2, 1, rng, 0.6)
    assert not is_coisometric_lifting(Lifting(C, A, [np.zeros((1, 2))] * 2)).ok
    L = lifting_from_gamma(C, A, ri.random_gamma(C, A, rng, "isometry"))
    assert is_coisometric_lifting(L).ok


def test_subisometric_examples(rng):
    # A = 1 (d=1) is never *-stable
    C = s(0.5)
    L = lifting_from_gamma(C, s(1.0), np.zeros((1, 0)))
    assert is_subisometric(L).ok is False
    C = ri.random_row_contraction(2, 2, rng)
    A = ri.random_row_contraction(2, 1, rng, 0.5)
    g = ri.random_gamma(C, A, rng, "isometry")
    assert is_subisometric(lifting_from_gamma(C, A, g)).ok
    assert is_subisometric(lifting_from_gamma(C, A, 0.5 * g)).ok is False


def test_prop_coisometric_subisometric(rng):
    from liftchar.rowcon import is_star_stable

    for _ in range(10):
        L = ri.random_coisometric_lifting(3, 1, 2, rng, stable=bool(rng.integers(2)))
        lhs = is_subisometric(L).ok
        rhs = is_coisometric_lifting(L).ok and bool(is_star_stable(L.A).stable)
        assert lhs == rhs


def test_resolving_examples(rng):
    A = ri.random_row_contraction(2, 2, rng)
    g = la.random_unitary(A.defects.rank_star, rng)
    assert is_resolving(g, A).ok
    A = RowContraction([np.diag([1.0, 0.5])])
    rep = is_resolving(np.zeros((1, 1)), A)
    assert not rep.ok and rep.s_star.shape[1] == 2
    assert rep.offending.shape[1] == 1 and np.isclose(abs(rep.offending[1, 0]), 1)
    A0 = RowContraction([np.zeros((2, 2))])
    rep = is_resolving(np.zeros((1, 2)), A0)
    assert not rep.ok and rep.s_star.shape[1] == 2


def test_reduced_examples(rng):
    L = ri.random_subisometric_lifting(2, 1, 2, rng, a_norm=0.7)
    assert is_reduced(L)
    L = ri.random_coisometric_lifting(3, 1, 2, rng)
    assert is_reduced(L)
    C = ri.random_row_contraction(2, 1, rng)
    A = ri.random_row_contraction(2, 2, rng)
    assert not is_reduced(lifting_from_gamma(C, A, np.zeros((C.defects.rank, A.defects.rank_star))))


def test_reduced_equals_cnc_and_resolving(rng):
    from liftchar.rowcon import is_cnc

    for k in range(20):
        C = ri.random_row_contraction(2, 1, rng)
        A = ri.non_stable(2, 1, 1, rng) if k % 2 else ri.random_row_contraction(2, 2, rng)
        g = ri.random_gamma(C, A, rng)
        if k % 3 == 0 and g.shape[1]:
            g[:, 0] = 0  # drop one defect direction
        L = lifting_from_gamma(C, A, g)
        assert is_reduced(L) == (is_cnc(L.A) and is_resolving(g, A).ok)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_resolving_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    A = ri.block_diagonal(ri.random_row_contraction(d, 1, rng), ri.random_row_contraction(d, 2, rng))
    C = ri.random_row_contraction(d, 1, rng)
    g = ri.random_gamma(C, A, rng)
    if rng.random() < 0.5:
        g[:, int(rng.integers(g.shape[1]))] = 0
    assert is_resolving(g, A).ok == resolving_bruteforce(g, A)


def test_reduce_lifting_removes_unobservable(rng):
    C = ri.random_row_contraction(2, 1, rng)
    A = ri.block_diagonal(ri.random_row_contraction(2, 1, rng), ri.random_row_contraction(2, 1, rng))
    da = A.defects
    P1 = np.diag([1.0, 0.0])
    Q = la.dagger(da.iota_star) @ P1 @ da.iota_star
    g = ri.random_contraction(C.defects.rank, da.rank_star, rng) @ Q
    L = lifting_from_gamma(C, A, g)
    s_, _, _ = unobservable_subspace(g, A)
    assert s_.shape[1] == 1
    R, k = reduce_lifting(L)
    assert k == 1 and R.q == 1 and is_reduced(R)


def test_existence_examples(rng):
    assert exists_subisometric(s(1.0, 0.0), s(0.0, 0.0)).ok
    U = RowContraction([la.random_unitary(2, rng)])
    assert not exists_subisometric(U, ri.random_row_contraction(1, 2, rng)).ok
    assert exists_subisometric(U, ri.random_coisometry(2, 2, rng)).ok


def test_isometries_equivalent(rng):
    g = la.random_isometry(3, 2, rng)
    u = la.random_unitary(2, rng)
    assert isometries_equivalent(g, g @ u)
    assert not isometries_equivalent(g, la.random_isometry(3, 2, rng))


def test_conjugation_preserves_structure(rng):
    L = ri.random_lifting(2, 2, 2, rng)
    u = la.random_unitary(2, rng)
    Lc = L.conjugate(u)
    assert np.isclose(gamma_from_lifting(Lc).norm, gamma_from_lifting(L).norm)
