"""Independent reference computations used by the test suites and the self-test.

Nothing here shares code with the formulas it checks: the symbol oracle goes
through the dilation of ``C`` and the Poisson embedding of ``A``; the resolving
oracle stacks every word explicitly instead of iterating subspaces.
"""
from __future__ import annotations

import numpy as np

from . import _linalg as la
from .fock import TruncatedFockIndex, enumerate_words
from .lifting import Lifting, gamma_from_lifting
from .rowcon import RowContraction, poisson_kernel, schaeffer_mid


def symbol_via_embedding(L: Lifting, N: int) -> dict:
    """Coefficients of ``P_{Gamma (x) D_C} W`` on the vacuum of the defect space of ``E``.

    ``W`` embeds ``H_C (+) H_A`` into the dilation space of ``C`` as the identity on
    ``H_C`` and the gamma-weighted Poisson kernel on ``H_A`` (needs *-stable ``A``).
    ``V_i W - W E_i`` lives in ``Gamma (x) D_C`` and, precomposed with the inverse
    defect coordinates of ``E``, gives the coefficients for ``|alpha| <= N``.  The
    error is of the order of ``||Phi_A^{N+1}(1)||^{1/2}``.
    """
    C, A = L.C, L.A
    p, d = L.p, L.d
    g = gamma_from_lifting(L, strict=False).gamma
    mid = schaeffer_mid(C, N + 1)
    K = poisson_kernel(A, N + 1, g)
    n = p + L.q
    J = np.zeros((mid.dim, n), complex)
    J[:p, :p] = np.eye(p)
    J[p:, p:] = K
    tot = np.zeros((mid.dim - p, d * n), complex)
    for i in range(d):
        tot[:, i * n:(i + 1) * n] = (mid.V[i] @ J - J @ L.E[i])[p:]
    X = tot @ L.E.defects.D_pinv_coords()
    idx = TruncatedFockIndex(d, N + 1, C.defects.rank)
    return {w: X[idx.block(w)] for w in enumerate_words(d, N)}


def unobservable_bruteforce(gamma, A, rank_tol: float = 1e-9) -> np.ndarray:
    """Kernel of the stacked ``gamma D_{*,A} A*_alpha`` over all ``|alpha| <= dim H_A``."""
    A = A if isinstance(A, RowContraction) else RowContraction(A)
    q = A.h
    op = np.asarray(gamma) @ A.defects.Dstar_coords
    rows = [op @ A.adjoint_word(w) for w in enumerate_words(A.d, q)]
    stacked = np.vstack(rows) if rows else np.zeros((0, q))
    return la.null_space(stacked, rank_tol).basis


def h1_bruteforce(A, rank_tol: float = 1e-9) -> np.ndarray:
    """``{h : D_{*,A} A*_alpha h = 0 for all alpha}``, words up to ``dim H_A``."""
    A = A if isinstance(A, RowContraction) else RowContraction(A)
    return unobservable_bruteforce(np.eye(A.defects.rank_star), A, rank_tol)


def resolving_bruteforce(gamma, A, rank_tol: float = 1e-9) -> bool:
    """Unobservable directions all lie in ``H^1``: ``S*`` included in ``H^1``."""
    s = unobservable_bruteforce(gamma, A, rank_tol)
    h1 = h1_bruteforce(A, rank_tol)
    return la.subspace_contained(s, h1, 1e-7)


def scalar_disc_coefficients(a: complex, n: int) -> np.ndarray:
    """Taylor coefficients of ``(-a + z) / (1 - conj(a) z)`` up to ``z^n``."""
    ab = np.conj(a)
    out = np.zeros(n + 1, complex)
    out[0] = -a
    for k in range(1, n + 1):
        # z ab^{k-1} - a ab^k  expanded from the geometric series
        out[k] = ab ** (k - 1) - a * ab ** k
    return out
