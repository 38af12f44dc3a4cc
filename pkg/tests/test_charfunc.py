import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liftchar import _linalg as la
from liftchar import random_instances as ri
from liftchar.charfunc import (
    MultiAnalyticSymbol,
    char_symbol,
    char_symbol_compact,
    compose_symbols,
    exact_domain_depth,
    functional_model,
    inner_defect,
    invariant_subspace,
    is_inner,
    lifting_from_symbol,
    multi_analytic_defect,
    popescu_char_fn,
    same_invariant_subspace,
    symbols_equivalent,
)
from liftchar.exceptions import (
    DimensionMismatchError,
    InvalidConfigurationError,
    NotReducedError,
)
from liftchar.fock import TruncatedFockIndex, creation_matrix
from liftchar.lifting import Lifting, gamma_from_lifting, is_reduced, lifting_from_gamma
from liftchar.oracles import scalar_disc_coefficients, symbol_via_embedding
from liftchar.rowcon import RowContraction


def shift_symbol(N):
    return MultiAnalyticSymbol(1, N, {(1,): np.eye(1)}, 1, 1)


def unit_scalar_c():
    # C = 0 on C^1 with d = 1: D_C = 1, rank 1
    return RowContraction([np.zeros((1, 1))])


# ---------------------------------------------------------------------------
# symbol container


def test_block_operator_layout():
    th = {(): np.array([[1.0]]), (1,): np.array([[2.0]]), (2,): np.array([[3.0]])}
    M = MultiAnalyticSymbol(2, 1, th, 1, 1)
    # levels: (), (1,), (2,); the domain vacuum spreads over all words
    assert np.allclose(M.block_operator(), [[1, 0, 0], [2, 1, 0], [3, 0, 1]])


def test_profile_falls_back_to_stored_coefficients():
    M = shift_symbol(3)
    assert M.profile() == (1.0, 0.0, 0.0, 0.0)
    assert exact_domain_depth(M) == 2


def test_coefficient_shape_checked():
    with pytest.raises(DimensionMismatchError):
        MultiAnalyticSymbol(1, 2, {(): np.eye(2)}, 1, 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.integers(1, 3), st.integers(0, 100))
def test_block_operator_is_multi_analytic(d, N, seed):
    rng = np.random.default_rng(seed)
    M = ri.random_symbol(d, N, 2, 3, rng, depth=N)
    assert multi_analytic_defect(M) < 1e-14
    assert la.opnorm(M.block_operator()) <= 0.9 + 1e-12


# ---------------------------------------------------------------------------
# characteristic function of a lifting


def test_trivial_lifting_gives_identity(rng):
    C = ri.random_row_contraction(2, 2, rng)
    S = char_symbol(Lifting.trivial(C), 3)
    r = C.defects.rank
    assert np.allclose(S[()], np.eye(r), atol=1e-12)
    assert all(np.allclose(S[w], 0) for w in S.idx.words[1:])
    assert S.leakage_bound == 0


def test_non_reduced_rejected():
    # A = 0 with gamma = 0: H_A is invisible from the defects
    C = RowContraction([np.array([[0.5]])])
    L = lifting_from_gamma(C, RowContraction([np.zeros((1, 1))]), np.zeros((1, 1)))
    assert not is_reduced(L)
    with pytest.raises(NotReducedError):
        char_symbol(L, 2)


def test_a_slot_coefficients_are_gamma_times_popescu(rng):
    # input D_E x with x supported on the H_A slots; both sides computed independently
    for _ in range(5):
        d, p, q = 2, 2, 2
        L = ri.random_lifting(d, p, q, rng, a_norm=0.6, g_norm=0.8)
        N = 3
        S = char_symbol(L, N)
        P = popescu_char_fn(L.A, N)
        g = gamma_from_lifting(L).gamma
        n = p + q
        y = ri._gauss(rng, d * q, 1)
        x = np.zeros((d * n, 1), complex)
        for i in range(d):
            x[i * n + p:(i + 1) * n] = y[i * q:(i + 1) * q]
        de, da = L.E.defects, L.A.defects
        u = la.dagger(de.iota) @ de.D @ x
        ua = la.dagger(da.iota) @ da.D @ y
        for w in S.idx.words:
            assert np.allclose(S[w] @ u, g @ P[w] @ ua, atol=1e-12), w


def test_compact_route_agrees(rng):
    for _ in range(5):
        L = ri.random_lifting(2, 2, 2, rng, a_norm=0.7)
        S, T = char_symbol(L, 3), char_symbol_compact(L, 3)
        for w in S.idx.words:
            assert np.allclose(S[w], T[w], atol=1e-12)


def test_embedding_oracle_agrees(rng):
    for _ in range(5):
        L = ri.random_lifting(2, 1, 2, rng, a_norm=0.2)
        N = 6
        assert la.opnorm(L.A.phi_power_identity(N + 1)) <= 1e-8
        S = char_symbol(L, N)
        ref = symbol_via_embedding(L, N)
        err = max(la.opnorm(S[w] - ref[w]) for w in S.idx.words)
        assert err <= 1e-6


def test_char_symbol_is_contractive_and_multi_analytic(rng):
    L = ri.random_lifting(2, 2, 2, rng)
    S = char_symbol(L, 3)
    assert la.opnorm(S.block_operator()) <= 1 + 1e-12
    assert multi_analytic_defect(S) < 1e-13


# ---------------------------------------------------------------------------
# the characteristic function of a row contraction


def test_popescu_zero_is_shift():
    P = popescu_char_fn([np.zeros((1, 1))], 4)
    assert np.allclose(P[()], 0)
    assert np.isclose(abs(P[(1,)][0, 0]), 1)
    assert all(np.allclose(P[(1,) * k], 0) for k in range(2, 5))


def test_popescu_scalar_disc_function():
    a = 0.6
    N = 8
    P = popescu_char_fn([np.array([[a]])], N)
    ref = scalar_disc_coefficients(a, N)
    R = MultiAnalyticSymbol(1, N, {(1,) * k: np.array([[ref[k]]]) for k in range(N + 1)}, 1, 1)
    # the defect coordinates carry a phase gauge
    assert symbols_equivalent(P, R, 1e-12)
    assert np.allclose([P[(1,) * k][0, 0] for k in range(3)], [-0.6, 0.64, 0.384])


def test_popescu_complex_scalar():
    a = 0.3 + 0.4j
    P = popescu_char_fn([np.array([[a]])], 6)
    ref = scalar_disc_coefficients(a, 6)
    R = MultiAnalyticSymbol(1, 6, {(1,) * k: np.array([[ref[k]]]) for k in range(7)}, 1, 1)
    assert symbols_equivalent(P, R, 1e-12)


def test_popescu_stable_is_inner(rng):
    A = ri.random_row_contraction(2, 2, rng, norm=0.5)
    P = popescu_char_fn(A, 6)
    rep = is_inner(P)
    assert rep and rep.defect <= P.leakage_bound + 1e-8


def test_popescu_rejects_non_cnc():
    with pytest.raises(NotReducedError):
        popescu_char_fn([np.eye(1)], 3)


# ---------------------------------------------------------------------------
# composition and equivalence


def test_compose_with_identity_and_zero(rng):
    M = ri.random_symbol(2, 3, 2, 3, rng, depth=2)
    I = MultiAnalyticSymbol.identity(2, 3, 2)
    Z = MultiAnalyticSymbol.zero(2, 3, 1, 2)
    left = compose_symbols(MultiAnalyticSymbol.identity(2, 3, 3), M)
    right = compose_symbols(M, I)
    for w in M.idx.words:
        assert np.array_equal(left[w], M[w]) and np.array_equal(right[w], M[w])
    MZ = compose_symbols(M, Z)
    assert all(not MZ[w].any() for w in MZ.idx.words)


def test_compose_dimension_mismatch(rng):
    M = ri.random_symbol(1, 2, 2, 3, rng)
    with pytest.raises(DimensionMismatchError):
        compose_symbols(M, M)


def test_compose_matches_block_product(rng):
    M = ri.random_symbol(2, 3, 2, 2, rng, depth=3)
    Mp = ri.random_symbol(2, 3, 1, 2, rng, depth=3)
    P = compose_symbols(M, Mp)
    assert np.allclose(P.block_operator(), M.block_operator() @ Mp.block_operator(), atol=1e-14)


def test_two_step_factorisation(rng):
    for _ in range(5):
        L1, L2, Lt = ri.random_two_step(2, 1, 1, 1, rng)
        N = 3
        S = compose_symbols(char_symbol(L1, N), char_symbol(L2, N))
        T = char_symbol(Lt, N)
        # the defect coordinates of E are shared by both factors, so no unitary is needed
        assert max(la.opnorm(S[w] - T[w]) for w in T.idx.words) <= 1e-8


def test_equivalence_self_and_unitary(rng):
    L = ri.random_lifting(2, 2, 2, rng)
    S = char_symbol(L, 3)
    rep = symbols_equivalent(S, S)
    assert rep and rep.residual < 1e-14 and np.allclose(rep.v, np.eye(S.dom_dim))
    u = la.random_unitary(S.dom_dim, rng)
    rep = symbols_equivalent(S.right_multiply(u), S, 1e-10)
    assert rep and rep.residual <= 1e-10 and np.allclose(rep.v, u, atol=1e-10)


def test_equivalence_separates_gamma_scaling(rng):
    C = ri.random_row_contraction(2, 2, rng)
    A = ri.random_row_contraction(2, 2, rng, norm=0.6)
    g = ri.random_gamma(C, A, rng, norm=0.8)
    S = char_symbol(lifting_from_gamma(C, A, g), 4)
    T = char_symbol(lifting_from_gamma(C, A, 0.9 * g), 4)
    rep = symbols_equivalent(S, T, 1e-8)
    assert not rep and rep.v is None and rep.residual > 1e-3


def test_equivalence_shape_mismatch(rng):
    rep = symbols_equivalent(ri.random_symbol(1, 2, 1, 2, rng), ri.random_symbol(1, 2, 2, 2, rng))
    assert not rep and rep.residual == np.inf


# ---------------------------------------------------------------------------
# innerness and invariant subspaces


def test_identity_is_inner():
    rep = is_inner(MultiAnalyticSymbol.identity(2, 3, 2))
    assert rep and rep.defect == 0


def test_subisometric_symbol_is_inner(rng):
    L = ri.random_subisometric_lifting(2, 2, 2, rng, a_norm=0.4)
    S = char_symbol(L, 5)
    rep = is_inner(S)
    assert rep and rep.defect <= S.leakage_bound + 1e-8


def test_strict_gamma_symbol_not_inner(rng):
    C = ri.random_row_contraction(2, 2, rng)
    A = ri.random_row_contraction(2, 2, rng, norm=0.4)
    L = lifting_from_gamma(C, A, ri.random_gamma(C, A, rng, norm=0.5))
    S = char_symbol(L, 5)
    assert not is_inner(S)
    assert inner_defect(S) > 0.1


def test_invariant_subspace_identity_and_shift():
    I = MultiAnalyticSymbol.identity(2, 2, 1)
    assert invariant_subspace(I).shape == (7, 7)
    B = invariant_subspace(shift_symbol(4))
    # levels 1..4 of the one-letter Fock space
    assert B.shape == (5, 4)
    assert np.allclose(B[0], 0)
    assert np.allclose(B @ la.dagger(B), np.diag([0, 1, 1, 1, 1]))


def test_invariant_subspace_rejects_non_inner():
    with pytest.raises(InvalidConfigurationError):
        invariant_subspace(MultiAnalyticSymbol.zero(1, 2, 1, 1))


def test_invariant_subspace_complement_tracks_model(rng):
    for d, p, q in [(1, 2, 2), (2, 1, 2), (2, 2, 3)]:
        L = ri.random_subisometric_lifting(d, p, q, rng, a_norm=0.4)
        N = 4
        S = char_symbol(L, N)
        B = invariant_subspace(S)
        total = S.block_operator().shape[0]
        assert total - B.shape[1] == q
        # invariance below the boundary: subspace vectors without a top-level
        # component are mapped back into the subspace by every L_i
        top = ~TruncatedFockIndex(d, N, S.cod_dim).levels_mask(0, N - 1)
        v = B @ la.null_space(B[top], 1e-9).basis
        assert v.shape[1] > 0
        P = B @ la.dagger(B)
        dst = TruncatedFockIndex(d, N, S.cod_dim)
        for i in range(1, d + 1):
            assert la.opnorm((np.eye(total) - P) @ creation_matrix(i, dst) @ v) < 1e-10


def test_polynomial_inner_symbol_subspace():
    # theta_(1) = a, theta_(2) = b with |a|^2 + |b|^2 = 1 is inner and homogeneous
    a, b = 0.6, 0.8j
    M = MultiAnalyticSymbol(2, 3, {(1,): np.array([[a]]), (2,): np.array([[b]])}, 1, 1)
    assert is_inner(M)
    B = invariant_subspace(M)
    assert B.shape[1] == 7  # M(Gamma_2) inside Gamma_3: 1 + 2 + 4 vectors
    C = unit_scalar_c()
    fm = functional_model(C, M)
    assert fm.K == 2 and fm.exact_domain
    assert la.opnorm(fm.Delta) < 1e-12
    # the model is the orthogonal complement of the invariant subspace
    P = B @ la.dagger(B)
    Q = fm.model_basis[: P.shape[0]]
    assert np.allclose(Q @ la.dagger(Q), np.eye(P.shape[0]) - P, atol=1e-12)
    assert fm.dim == 15 - 7


# ---------------------------------------------------------------------------
# functional model


def test_functional_model_shift():
    fm = functional_model(unit_scalar_c(), shift_symbol(4))
    assert fm.K == 3 and fm.exact_domain
    assert la.opnorm(fm.Delta) < 1e-14
    assert fm.dim == 1 and np.isclose(abs(fm.model_basis[0, 0]), 1)
    assert fm.effective_dim == 1 and fm.stabilized_at == 0


def test_functional_model_zero():
    M = MultiAnalyticSymbol.zero(1, 3, 1, 1)
    fm = functional_model(unit_scalar_c(), M)
    assert np.allclose(fm.Delta, np.eye(4))
    assert fm.dim == 4
    # every model vector lives in the Fock part: {0 (+) x} is removed
    assert np.allclose(fm.model_basis[4:], 0)
    assert fm.dims["range_delta"] == 4


def test_functional_model_invariants(rng):
    C = ri.random_row_contraction(2, 1, rng)
    M = ri.random_symbol(2, 2, 2, C.defects.rank, rng, norm=0.7, depth=2)
    fm = functional_model(C, M)
    src = TruncatedFockIndex(2, 2, 2)
    Mb = M.block_operator()[:, src.levels_mask(0, fm.K)]
    assert np.allclose(fm.Delta @ fm.Delta + la.dagger(Mb) @ Mb, np.eye(Mb.shape[1]), atol=1e-12)
    graph = np.vstack([Mb, fm.Delta])
    assert la.opnorm(la.dagger(fm.model_basis) @ graph) < 1e-10
    assert np.allclose(la.dagger(fm.model_basis) @ fm.model_basis, np.eye(fm.dim), atol=1e-10)


def test_functional_model_dimension_tracks_lifting(rng):
    L = ri.random_lifting(1, 2, 2, rng, a_norm=0.4, g_norm=0.8)
    for N in range(2, 8):
        fm = functional_model(L.C, char_symbol(L, N))
        assert fm.effective_dim == 2 and fm.stabilized_at is not None


def test_functional_model_trace_converges_for_inner(rng):
    L = ri.random_subisometric_lifting(1, 2, 2, rng, a_norm=0.4)
    traces = []
    for N in range(2, 9):
        fm = functional_model(L.C, char_symbol(L, N))
        assert fm.effective_dim == 2
        traces.append(fm.defect_trace)
    assert np.all(np.diff(traces) >= -1e-12)
    leak = char_symbol(L, 8).leakage_bound
    assert abs(traces[-1] - 2) <= 2 * leak ** 2 + 1e-10


def test_functional_model_checks_codomain(rng):
    C = ri.random_row_contraction(2, 1, rng)
    M = ri.random_symbol(2, 2, 1, C.defects.rank + 1, rng)
    with pytest.raises(DimensionMismatchError):
        functional_model(C, M)


# ---------------------------------------------------------------------------
# lifting associated to a symbol


def test_lifting_from_identity_symbol(rng):
    C = ri.random_row_contraction(2, 2, rng)
    M = MultiAnalyticSymbol.identity(2, 3, C.defects.rank)
    L, rep = lifting_from_symbol(C, M, report=True)
    assert L.q == 0 and rep.exact and rep.model_dim == 0
    assert all(np.array_equal(e, c) for e, c in zip(L.E, C))


def test_lifting_from_constant_unitary_symbol(rng):
    C = ri.random_row_contraction(2, 2, rng)
    M = ri.random_constant_symbol(2, 4, C.defects.rank, rng, norm=0.5)
    L, rep = lifting_from_symbol(C, M, report=True)
    assert is_reduced(L) and rep.removed_dim == 0
    assert all(la.opnorm(e - c) < 1e-12 for e, c in zip(L.C, C))


def test_lifting_round_trip(rng):
    for _ in range(5):
        L0 = ri.random_lifting(1, 1, 2, rng, a_norm=0.5, g_norm=0.7)
        S0 = char_symbol(L0, 6)
        L, rep = lifting_from_symbol(L0.C, S0, report=True)
        assert rep.exact and L.q == L0.q
        S = char_symbol(L, 6)
        assert symbols_equivalent(S, S0, 1e-8)


def test_lifting_from_random_symbol_is_reduced(rng):
    C = ri.random_row_contraction(2, 1, rng)
    M = ri.random_symbol(2, 3, 2, C.defects.rank, rng, norm=0.8)
    L, rep = lifting_from_symbol(C, M, report=True)
    assert is_reduced(L)
    assert rep.model_dim >= L.q


def test_same_invariant_subspace(rng):
    L = ri.random_subisometric_lifting(2, 2, 2, rng, a_norm=0.3)
    S = char_symbol(L, 4)
    u = la.random_unitary(S.dom_dim, rng)
    rep = same_invariant_subspace(S, S.right_multiply(u))
    assert rep and rep.distance < 1e-8 and np.all(rep.angles < 1e-6)
    I = MultiAnalyticSymbol.identity(2, 4, S.cod_dim)
    rep = same_invariant_subspace(S, I)
    assert not rep and np.isclose(rep.distance, 1.0)
