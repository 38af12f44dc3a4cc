"""Random instances for the property suites.  All functions take a numpy Generator."""
from __future__ import annotations

import numpy as np

from . import _linalg as la
from .charfunc import MultiAnalyticSymbol
from .lifting import Lifting, lifting_from_gamma
from .rowcon import RowContraction


def _gauss(rng, *shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_contraction(rows: int, cols: int, rng, norm=None) -> np.ndarray:
    """Random matrix scaled to operator norm ``norm`` (uniform in (0.2, 0.95) by default)."""
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), complex)
    g = _gauss(rng, rows, cols)
    norm = rng.uniform(0.2, 0.95) if norm is None else norm
    return g * (norm / la.opnorm(g))


def random_row_contraction(d: int, h: int, rng, norm=None) -> RowContraction:
    """Tuple whose row operator has norm ``norm``; ``norm < 1`` makes it *-stable."""
    if h == 0:
        return RowContraction.zeros(d, 0)
    row = random_contraction(h, d * h, rng, norm)
    return RowContraction([row[:, i * h:(i + 1) * h] for i in range(d)])


def random_coisometry(d: int, h: int, rng) -> RowContraction:
    """Row coisometry: the row operator is the adjoint of a random isometry."""
    if d * h < h:
        raise ValueError("a row coisometry needs d >= 1")
    row = la.dagger(la.random_isometry(d * h, h, rng))
    return RowContraction([row[:, i * h:(i + 1) * h] for i in range(d)])


def non_stable(d: int, q_unitary: int, q_strict: int, rng, norm=None) -> RowContraction:
    """Block diagonal of a row coisometry and a strict contraction (not *-stable)."""
    U = random_coisometry(d, q_unitary, rng)
    S = random_row_contraction(d, q_strict, rng, norm)
    q = q_unitary + q_strict
    out = []
    for u, s in zip(U, S):
        m = np.zeros((q, q), complex)
        m[:q_unitary, :q_unitary] = u
        m[q_unitary:, q_unitary:] = s
        out.append(m)
    return RowContraction(out)


def block_diagonal(*tuples) -> RowContraction:
    """Direct sum of tuples with the same ``d`` (non-ergodic when two are unital)."""
    d = tuples[0].d
    n = sum(t.h for t in tuples)
    out = [np.zeros((n, n), complex) for _ in range(d)]
    k = 0
    for t in tuples:
        for i in range(d):
            out[i][k:k + t.h, k:k + t.h] = t[i]
        k += t.h
    return RowContraction(out)


def random_gamma(C: RowContraction, A: RowContraction, rng, kind: str = "contraction",
                 norm=None) -> np.ndarray:
    """``gamma : D_{*,A} -> D_C`` in defect coordinates.

    ``kind`` is ``"contraction"`` (norm ``norm``) or ``"isometry"`` (needs
    ``rank D_{*,A} <= rank D_C``).
    """
    rc, rs = C.defects.rank, A.defects.rank_star
    if kind == "isometry":
        return la.random_isometry(rc, rs, rng)
    return random_contraction(rc, rs, rng, norm)


def random_lifting(d: int, p: int, q: int, rng, c_norm=None, a_norm=None, g_norm=None) -> Lifting:
    C = random_row_contraction(d, p, rng, c_norm)
    A = random_row_contraction(d, q, rng, a_norm)
    return lifting_from_gamma(C, A, random_gamma(C, A, rng, norm=g_norm))


def random_subisometric_lifting(d: int, p: int, q: int, rng, c_norm=None, a_norm=None) -> Lifting:
    """*-stable ``A`` and isometric ``gamma``; requires ``rank D_{*,A} <= rank D_C``,
    which holds for generic strict contractions when ``q <= d p``."""
    C = random_row_contraction(d, p, rng, c_norm)
    A = random_row_contraction(d, q, rng, a_norm)
    return lifting_from_gamma(C, A, random_gamma(C, A, rng, "isometry"))


def random_coisometric_lifting(d: int, p: int, q: int, rng, stable: bool = True,
                               q_unitary: int = 1, a_norm=None) -> Lifting:
    """Coisometric ``C`` with an isometric ``gamma``.

    Then ``sum B_i B_i* = 1 - sum A_i A_i*`` and ``B C* = 0``, so ``E`` is coisometric.
    With ``stable=False`` the tuple ``A`` carries a coisometric block of size
    ``q_unitary``.  ``gamma`` can only be isometric when
    ``rank D_{*,A} <= (d - 1) p``.
    """
    C = random_coisometry(d, p, rng)
    if stable:
        A = random_row_contraction(d, q, rng, a_norm)
    else:
        A = non_stable(d, min(q_unitary, q), q - min(q_unitary, q), rng, a_norm)
    return lifting_from_gamma(C, A, random_gamma(C, A, rng, "isometry"))


def random_block_lower(d: int, p: int, q: int, rng, norm=None) -> list:
    """Random block-lower-triangular row contraction on ``C^p (+) C^q``."""
    n = p + q
    row = _gauss(rng, n, d * n)
    for i in range(d):
        row[:p, i * n + p:(i + 1) * n] = 0.0
    norm = rng.uniform(0.3, 1.0) if norm is None else norm
    row *= norm / la.opnorm(row)
    return [row[:, i * n:(i + 1) * n] for i in range(d)]


def random_two_step(d: int, p: int, q1: int, q2: int, rng, a_norm=0.7, g_norm=0.8):
    """``E`` lifts ``C`` by ``A``; ``E~`` lifts ``E`` by ``A'``.  Returns
    ``(L_CE, L_EE~, L_CE~)``, the last one seen as a lifting of ``C``."""
    L1 = random_lifting(d, p, q1, rng, a_norm=a_norm, g_norm=g_norm)
    A2 = random_row_contraction(d, q2, rng, a_norm)
    L2 = lifting_from_gamma(L1.E, A2, random_gamma(L1.E, A2, rng, norm=g_norm))
    Lt = Lifting.from_blocks(L2.E.T, p)
    return L1, L2, Lt


def random_symbol(d: int, N: int, dom_dim: int, cod_dim: int, rng, norm=0.9,
                  depth=None) -> MultiAnalyticSymbol:
    """Random polynomial symbol of degree ``depth`` (default 1), scaled so that the
    stacked column ``sum_alpha |theta_alpha| <= norm``; by the triangle inequality
    over shifts the multi-analytic operator then has norm ``<= norm``."""
    depth = 1 if depth is None else depth
    from .fock import enumerate_words

    words = enumerate_words(d, min(depth, N))
    mats = {w: _gauss(rng, cod_dim, dom_dim) for w in words}
    total = sum(la.opnorm(m) for m in mats.values())
    scale = norm / total if total else 0.0
    # coefficients above N do not exist: no leakage, and the tail profile is
    # computed from the stored coefficients
    return MultiAnalyticSymbol(d, N, {w: m * scale for w, m in mats.items()}, dom_dim, cod_dim, 0.0)


def random_constant_symbol(d: int, N: int, dim: int, rng, norm=0.5) -> MultiAnalyticSymbol:
    """``theta_empty = norm * unitary``."""
    u = la.random_unitary(dim, rng)
    return MultiAnalyticSymbol(d, N, {(): norm * u}, dim, dim, 0.0, [0.0] * (N + 1))
