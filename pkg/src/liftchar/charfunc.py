"""Multi-analytic symbols and the characteristic function of a reduced lifting.

A symbol is the family ``theta_alpha`` (``|alpha| <= N``) of a multi-analytic
operator ``M``; ``M (e_beta (x) u) = sum_alpha e_{beta alpha} (x) theta_alpha u``.
Dense block matrices are only built on request (norm tests, model spaces).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import orthogonal_procrustes

from . import _linalg as la
from .exceptions import (
    DimensionMismatchError,
    InvalidConfigurationError,
    NotReducedError,
)
from .fock import TruncatedFockIndex, check_word, enumerate_words
from .lifting import Lifting, gamma_from_lifting, is_reduced
from .rowcon import DEFAULT_TOL, RowContraction, is_cnc


class MultiAnalyticSymbol:
    """Word-indexed coefficients ``theta_alpha : C^dom_dim -> C^cod_dim``.

    Parameters
    ----------
    d, N : int
        Alphabet size and truncation length.
    coeffs : dict
        ``{word: (cod_dim, dom_dim) matrix}``; missing words are zero.
    dom_dim, cod_dim : int
    leakage_bound : float
        Bound on ``||sum_{|alpha|>N} e_alpha (x) theta_alpha u||`` for unit ``u``.
    tail_profile : sequence of float, optional
        ``tail_profile[k]`` bounds the coefficients beyond level ``k`` in the same
        sense, for ``k = 0..N``.  Used to propagate leakage through composition.
    """

    def __init__(self, d: int, N: int, coeffs: dict, dom_dim: int, cod_dim: int,
                 leakage_bound: float = 0.0, tail_profile=None):
        self.idx = TruncatedFockIndex(d, N)
        self.dom_dim = int(dom_dim)
        self.cod_dim = int(cod_dim)
        out = {}
        for w, m in coeffs.items():
            w = check_word(w, d)
            if len(w) > N:
                continue
            m = la.as_matrix(m) if np.size(m) else np.zeros((cod_dim, dom_dim), complex)
            if m.shape != (self.cod_dim, self.dom_dim):
                raise DimensionMismatchError(
                    f"coefficient at {w} has shape {m.shape}, expected {(cod_dim, dom_dim)}"
                )
            m.setflags(write=False)
            out[w] = m
        self._coeffs = out
        self.leakage_bound = float(leakage_bound)
        if tail_profile is not None:
            tail_profile = tuple(float(t) for t in tail_profile)
            if len(tail_profile) != N + 1:
                raise InvalidConfigurationError("tail_profile needs one entry per level 0..N")
        self.tail_profile = tail_profile

    @property
    def d(self) -> int:
        return self.idx.d

    @property
    def N(self) -> int:
        return self.idx.N

    def __getitem__(self, word) -> np.ndarray:
        w = tuple(word)
        if w in self._coeffs:
            return self._coeffs[w]
        check_word(w, self.d)
        return np.zeros((self.cod_dim, self.dom_dim), complex)

    @property
    def coeffs(self) -> dict:
        return {w: self[w] for w in self.idx.words}

    def __repr__(self):
        return (f"MultiAnalyticSymbol(d={self.d}, N={self.N}, {self.dom_dim}->{self.cod_dim}, "
                f"leakage={self.leakage_bound:.2e})")

    # constructors
    @classmethod
    def identity(cls, d: int, N: int, dim: int) -> "MultiAnalyticSymbol":
        return cls(d, N, {(): np.eye(dim)}, dim, dim, 0.0, [0.0] * (N + 1))

    @classmethod
    def zero(cls, d: int, N: int, dom_dim: int, cod_dim: int) -> "MultiAnalyticSymbol":
        return cls(d, N, {}, dom_dim, cod_dim, 0.0, [0.0] * (N + 1))

    def profile(self) -> tuple:
        """Level-wise tail bounds; without a stored profile only level N is known,
        and lower levels fall back to ``leakage + ||coefficients above k||``."""
        if self.tail_profile is not None:
            return self.tail_profile
        out = []
        for k in range(self.N + 1):
            extra = [self[w] for w in self.idx.words if len(w) > k]
            s = la.opnorm(np.vstack(extra)) if extra else 0.0
            out.append(self.leakage_bound + s)
        return tuple(out)

    def truncate(self, N: int) -> "MultiAnalyticSymbol":
        if N > self.N:
            raise InvalidConfigurationError(f"cannot extend a depth-{self.N} symbol to {N}")
        prof = self.profile()
        return MultiAnalyticSymbol(self.d, N, self._coeffs, self.dom_dim, self.cod_dim,
                                   prof[N], prof[: N + 1])

    def stacked(self, N: Optional[int] = None) -> np.ndarray:
        """All coefficients with ``|alpha| <= N`` stacked vertically in word order."""
        N = self.N if N is None else N
        ws = enumerate_words(self.d, N)
        if not ws:
            return np.zeros((0, self.dom_dim), complex)
        return np.vstack([self[w] for w in ws])

    def level_column_norms(self) -> np.ndarray:
        """``||(theta_alpha)_{|alpha|=n}||`` stacked per level ``n``."""
        out = np.zeros(self.N + 1)
        for n in range(self.N + 1):
            ws = [w for w in self.idx.words if len(w) == n]
            out[n] = la.opnorm(np.vstack([self[w] for w in ws]))
        return out

    def block_operator(self, N: Optional[int] = None) -> np.ndarray:
        """Compression of ``M`` to ``Gamma_N (x) C^dom -> Gamma_N (x) C^cod``.

        Block row ``beta alpha``, block column ``beta`` holds ``theta_alpha``.
        """
        N = self.N if N is None else N
        src = TruncatedFockIndex(self.d, N, self.dom_dim)
        dst = TruncatedFockIndex(self.d, N, self.cod_dim)
        M = np.zeros((dst.dim, src.dim), dtype=complex)
        for beta in src.words:
            for alpha in src.words:
                if len(beta) + len(alpha) > N:
                    continue
                M[dst.block(beta + alpha), src.block(beta)] = self[alpha]
        return M

    def vacuum_column(self) -> np.ndarray:
        """``u -> sum_alpha e_alpha (x) theta_alpha u`` truncated at level N."""
        return self.stacked()

    def right_multiply(self, v: np.ndarray) -> "MultiAnalyticSymbol":
        """Symbol of ``M (1 (x) v)``."""
        v = la.as_matrix(v)
        nrm = la.opnorm(v)
        return MultiAnalyticSymbol(
            self.d, self.N, {w: m @ v for w, m in self._coeffs.items()}, v.shape[1], self.cod_dim,
            self.leakage_bound * nrm,
            None if self.tail_profile is None else [t * nrm for t in self.tail_profile],
        )

    def left_multiply(self, u: np.ndarray) -> "MultiAnalyticSymbol":
        """Symbol of ``(1 (x) u) M``."""
        u = la.as_matrix(u)
        nrm = la.opnorm(u)
        return MultiAnalyticSymbol(
            self.d, self.N, {w: u @ m for w, m in self._coeffs.items()}, self.dom_dim, u.shape[0],
            self.leakage_bound * nrm,
            None if self.tail_profile is None else [t * nrm for t in self.tail_profile],
        )


# ---------------------------------------------------------------------------
# characteristic functions


def _adjoint_words(A: RowContraction, N: int) -> dict:
    return A.adjoint_words(TruncatedFockIndex(A.d, N))


def char_symbol(L: Lifting, N: int, check_reduced: bool = True,
                rank_tol: float = la.DEFAULT_RANK_TOL) -> MultiAnalyticSymbol:
    """Characteristic function of a reduced lifting, coefficients up to length ``N``.

    The domain ``D_E`` is used in the coordinates of ``defects(E)``: coordinate
    vector ``u`` stands for ``D_E x`` with ``x = iota_E diag(1/sigma_E) u``.
    Writing ``G_alpha = gamma D_{*,A} A*_alpha``, slot ``i`` of ``x`` contributes

    * from ``h in H_C``: ``(D_C)_i h - G_0 B_i h`` at the vacuum and
      ``-G_alpha B_i h`` at ``alpha != ()``;
    * from ``h in H_A``: ``-G_0 A_i h`` at the vacuum and
      ``G_alpha (delta_ji - A_j* A_i) h`` at ``j alpha``.

    The coefficients beyond level ``k`` are bounded by
    ``||gamma|| ||Phi_A^k(1)||^{1/2}``, which gives ``tail_profile`` and
    ``leakage_bound`` (``k = N``).
    """
    if N < 0:
        raise InvalidConfigurationError("depth must be >= 0")
    if check_reduced and not is_reduced(L, rank_tol):
        raise NotReducedError("the characteristic function needs a reduced lifting")
    C, A, d, p, q = L.C, L.A, L.d, L.p, L.q
    dc = C.defects
    de = L.E.defects
    gd = gamma_from_lifting(L, strict=False)
    g = gd.gamma
    ga = g @ A.defects.Dstar_coords  # r_C x q
    adj = _adjoint_words(A, N)
    G = {w: ga @ m for w, m in adj.items()}
    n = p + q
    r_c = dc.rank
    # map from coordinates of D_E to an ambient preimage in (+)^d H_E
    pre = de.D_pinv_coords()
    adjA = [la.dagger(a) for a in A]

    F = {}
    F0 = np.zeros((r_c, d * n), complex)
    for i in range(d):
        cs = slice(i * n, i * n + p)
        as_ = slice(i * n + p, (i + 1) * n)
        F0[:, cs] = dc.D_column(i + 1) - G[()] @ L.B[i]
        F0[:, as_] = -G[()] @ A[i]
    F[()] = F0
    for w in TruncatedFockIndex(d, N).words[1:]:
        Fw = np.zeros((r_c, d * n), complex)
        j, rest = w[0], w[1:]
        for i in range(d):
            cs = slice(i * n, i * n + p)
            as_ = slice(i * n + p, (i + 1) * n)
            Fw[:, cs] = -G[w] @ L.B[i]
            blk = -G[rest] @ adjA[j - 1] @ A[i]
            if j == i + 1:
                blk = blk + G[rest]
            Fw[:, as_] = blk
        F[w] = Fw
    coeffs = {w: f @ pre for w, f in F.items()}

    gn = la.opnorm(g)
    prof = [gn * np.sqrt(la.opnorm(A.phi_power_identity(k))) for k in range(N + 1)]
    return MultiAnalyticSymbol(d, N, coeffs, de.rank, r_c, prof[N], prof)


def char_symbol_compact(L: Lifting, N: int) -> MultiAnalyticSymbol:
    """Same symbol via ``theta_{j alpha} u = gamma D_{*,A} A*_alpha P_A P_j D_E u``.

    Only the coefficients of words of length ``>= 1`` use this route; the vacuum
    coefficient is shared with :func:`char_symbol`.  Kept as an internal
    cross-check: the two routes scale the ``D_E`` coordinates in opposite ways.
    """
    C, A, d, p, q = L.C, L.A, L.d, L.p, L.q
    de = L.E.defects
    g = gamma_from_lifting(L, strict=False).gamma
    ga = g @ A.defects.Dstar_coords
    adj = _adjoint_words(A, N)
    n = p + q
    DEu = de.iota * de.sigma[None, :] if de.rank else de.iota  # D_E iota_E
    full = char_symbol(L, 0, check_reduced=False)
    coeffs = {(): full[()]}
    for w in TruncatedFockIndex(d, N).words[1:]:
        j, rest = w[0], w[1:]
        slot = DEu[(j - 1) * n + p:j * n, :]
        coeffs[w] = ga @ adj[rest] @ slot
    return MultiAnalyticSymbol(d, N, coeffs, de.rank, C.defects.rank)


def popescu_char_fn(A, N: int, tol: float = DEFAULT_TOL, max_iter: int = 10000,
                    check_cnc: bool = True) -> MultiAnalyticSymbol:
    """Characteristic function of a c.n.c. row contraction, ``D_A -> D_{*,A}``.

    ``theta_0 = -A|_{D_A}``, ``theta_{j alpha} = D_{*,A} A*_alpha P_j D_A``.
    """
    A = A if isinstance(A, RowContraction) else RowContraction(A, tol)
    if check_cnc and not is_cnc(A, tol, max_iter):
        raise NotReducedError("the characteristic function of a row contraction needs c.n.c. input")
    da = A.defects
    d, q = A.d, A.h
    adj = _adjoint_words(A, N)
    DAu = da.D @ da.iota
    coeffs = {(): -la.dagger(da.iota_star) @ A.row @ da.iota if q else np.zeros((da.rank_star, da.rank))}
    for w in TruncatedFockIndex(d, N).words[1:]:
        j, rest = w[0], w[1:]
        coeffs[w] = da.Dstar_coords @ adj[rest] @ DAu[(j - 1) * q:j * q, :]
    prof = [np.sqrt(la.opnorm(A.phi_power_identity(k))) for k in range(N + 1)]
    return MultiAnalyticSymbol(d, N, coeffs, da.rank, da.rank_star, prof[N], prof)


# ---------------------------------------------------------------------------
# algebra on symbols


def compose_symbols(M: MultiAnalyticSymbol, Mp: MultiAnalyticSymbol,
                    N: Optional[int] = None) -> MultiAnalyticSymbol:
    """Symbol of the product ``M M'``: ``theta''_w = sum_{w = beta alpha} theta_alpha theta'_beta``.

    The tail of the product beyond level ``k`` is bounded by
    ``t'_k + sum_{n<=k} t_{k-n} ||level n of theta'||``, with ``t, t'`` the level
    profiles of the factors (``M`` is assumed contractive).
    """
    if M.d != Mp.d:
        raise DimensionMismatchError("symbols over different alphabets")
    if M.dom_dim != Mp.cod_dim:
        raise DimensionMismatchError(
            f"inner dimensions differ: {M.dom_dim} vs {Mp.cod_dim}"
        )
    N = min(M.N, Mp.N) if N is None else N
    if N > min(M.N, Mp.N):
        raise InvalidConfigurationError("composition depth exceeds the factors' depth")
    d = M.d
    coeffs = {}
    for w in enumerate_words(d, N):
        acc = np.zeros((M.cod_dim, Mp.dom_dim), complex)
        for k in range(len(w) + 1):
            acc += M[w[k:]] @ Mp[w[:k]]
        coeffs[w] = acc
    t, tp = M.profile(), Mp.profile()
    cols = Mp.level_column_norms()
    prof = [tp[k] + sum(t[k - n] * cols[n] for n in range(k + 1)) for k in range(N + 1)]
    return MultiAnalyticSymbol(d, N, coeffs, Mp.dom_dim, M.cod_dim, prof[N], prof)


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    """Outcome of the unitary fit ``Theta ~ Theta' v``.

    ``residual`` is ``||S - S' v|| / ||S||`` (0 when both are zero) and
    ``v`` is set iff the fit is within tolerance.
    """

    equivalent: bool
    v: Optional[np.ndarray]
    residual: float
    absolute_residual: float
    depth: int
    rank_deficient: bool

    def __bool__(self):
        return self.equivalent


def symbols_equivalent(S1: MultiAnalyticSymbol, S2: MultiAnalyticSymbol,
                       tol: float = 1e-8, N: Optional[int] = None) -> EquivalenceReport:
    """Is there a unitary ``v`` on the domain with ``theta_alpha = theta'_alpha v`` for all ``alpha``?

    Coefficients up to the common depth are stacked into ``S``, ``S'`` and ``v`` is
    the orthogonal Procrustes solution of ``min ||S' v - S||``.  When ``S'`` is rank
    deficient the fit is still a unitary (arbitrary on the degenerate directions).
    """
    if S1.d != S2.d or S1.cod_dim != S2.cod_dim or S1.dom_dim != S2.dom_dim:
        return EquivalenceReport(False, None, np.inf, np.inf, 0, False)
    N = min(S1.N, S2.N) if N is None else N
    S, Sp = S1.stacked(N), S2.stacked(N)
    if S1.dom_dim == 0:
        return EquivalenceReport(True, np.zeros((0, 0), complex), 0.0, 0.0, N, False)
    v, _ = orthogonal_procrustes(Sp, S)
    absres = la.opnorm(S - Sp @ v)
    scale = la.opnorm(S)
    rel = absres / scale if scale > 0 else (0.0 if absres == 0 else np.inf)
    sv = np.linalg.svd(Sp, compute_uv=False)
    deficient = bool(sv.size < Sp.shape[1] or (sv.size and sv[-1] <= 1e-9 * max(1.0, sv[0])))
    ok = rel <= tol
    return EquivalenceReport(ok, v if ok else None, rel, absres, N, deficient)


@dataclass(frozen=True)
class InnerReport:
    inner: bool
    defect: float
    threshold: float

    def __bool__(self):
        return self.inner


def inner_defect(M: MultiAnalyticSymbol) -> float:
    """``||(M_N* M_N - 1) restricted to e_0 (x) C^dom||`` on the truncated space.

    By multi-analyticity ``M* M = 1`` holds iff it holds on the vacuum column, and
    that column is exact up to the leakage of ``M``.
    """
    col = M.vacuum_column()  # (count*cod) x dom
    big = M.block_operator()
    g = la.dagger(big) @ col
    g[: M.dom_dim, :] -= np.eye(M.dom_dim)
    return la.opnorm(g)


def is_inner(M: MultiAnalyticSymbol, tol: float = 1e-8) -> InnerReport:
    """Innerness up to ``tol`` plus the symbol's leakage bound."""
    defect = inner_defect(M)
    thr = tol + M.leakage_bound
    return InnerReport(defect <= thr, defect, thr)


def invariant_subspace(M: MultiAnalyticSymbol, tol: float = 1e-8,
                       rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the part of ``Gamma_N (x) C^cod`` inside the range of an inner ``M``.

    Since ``M`` raises levels, ``M_N M_N*`` is the exact compression of the range
    projection ``M M*``; a truncated vector lies in the range iff it is fixed by
    that compression.  The span of the columns of ``M_N`` itself is useless here:
    vectors near the top level are mapped almost to zero, so numerically it is
    the whole truncated space.  The complement has dimension
    ``rank(1 - M_N M_N*)``.
    """
    rep = is_inner(M, tol)
    if not rep.inner:
        raise InvalidConfigurationError(
            f"symbol is not inner (defect {rep.defect:.3e} > {rep.threshold:.3e})"
        )
    Mb = M.block_operator()
    G = la.hermitian_part(np.eye(Mb.shape[0]) - Mb @ la.dagger(Mb))
    w, v = np.linalg.eigh(G)
    return v[:, w <= rank_tol * max(1.0, float(w[-1]) if w.size else 1.0)]


@dataclass(frozen=True, eq=False)
class SubspaceComparison:
    """``distance`` is ``||P_1 - P_2||``; ``angles`` are the principal angles (diagnostic)."""

    equal: bool
    distance: float
    angles: np.ndarray

    def __bool__(self):
        return self.equal


def same_invariant_subspace(M1: MultiAnalyticSymbol, M2: MultiAnalyticSymbol,
                            tol: float = 1e-8) -> SubspaceComparison:
    """Compare the truncated invariant subspaces of two inner symbols by projection distance."""
    from scipy.linalg import subspace_angles

    B1, B2 = invariant_subspace(M1, tol), invariant_subspace(M2, tol)
    if B1.shape[0] != B2.shape[0]:
        raise DimensionMismatchError("symbols act on different truncated spaces")
    dist = la.opnorm(B1 @ la.dagger(B1) - B2 @ la.dagger(B2))
    angles = subspace_angles(B1, B2) if B1.shape[1] and B2.shape[1] else np.zeros(0)
    thr = tol + M1.leakage_bound + M2.leakage_bound
    return SubspaceComparison(bool(dist <= thr), float(dist), angles)


def multi_analytic_defect(M: MultiAnalyticSymbol) -> float:
    """``||(L_i (x) 1) M_N - M_N (L_i (x) 1)||`` on domain levels ``0..N-1``, maximised over ``i``."""
    from .fock import creation_matrix

    big = M.block_operator()
    src = TruncatedFockIndex(M.d, M.N, M.dom_dim)
    dst = TruncatedFockIndex(M.d, M.N, M.cod_dim)
    mask = src.levels_mask(0, M.N - 1) if M.N >= 1 else np.zeros(src.dim, bool)
    worst = 0.0
    for i in range(1, M.d + 1):
        diff = creation_matrix(i, dst) @ big - big @ creation_matrix(i, src)
        worst = max(worst, la.opnorm(diff[:, mask]))
    return worst


# ---------------------------------------------------------------------------
# functional model and the lifting associated to a symbol


def _rank(w: np.ndarray, rank_tol: float) -> int:
    if w.size == 0:
        return 0
    return int(np.sum(w > rank_tol * max(1.0, float(w[-1]))))


def exact_domain_depth(M: MultiAnalyticSymbol, N: Optional[int] = None,
                       tol: float = 1e-8) -> Optional[int]:
    """Largest ``K <= N`` such that ``M`` maps ``Gamma_K (x) C^dom`` into ``Gamma_N`` up to ``tol``.

    A vector on level ``K`` drops the coefficients beyond level ``N - K``, which
    the tail profile bounds.  ``None`` when even the vacuum loses more than ``tol``.
    """
    N = M.N if N is None else N
    prof = M.truncate(N).profile()
    return next((k for k in range(N, -1, -1) if prof[N - k] <= tol), None)


@dataclass(frozen=True, eq=False)
class FunctionalModel:
    """Truncated model data of a contractive symbol ``M : Gamma (x) D -> Gamma (x) D_C``.

    Attributes
    ----------
    Delta : ndarray
        ``(1 - M_K* M_K)^{1/2}`` on the domain ``Gamma_K (x) D``, where ``M_K`` is
        ``M`` restricted to ``Gamma_K (x) D`` with values in ``Gamma_N (x) D_C``.
    model_basis : ndarray
        Orthonormal basis, in ``(Gamma_N (x) D_C) (+) (Gamma_K (x) D)`` coordinates, of
        ``[(Gamma_N (x) D_C) (+) range(Delta)] (-) {M_K x (+) Delta x}``.
    defect_gram : ndarray
        ``1 - M_N M_N*`` on ``Gamma_N (x) D_C``.  Because ``M`` only maps a level into
        higher levels, this is the exact compression of ``1 - M M*``.
    rank_profile : tuple
        ``rank_profile[k]`` is the rank of ``defect_gram`` on levels ``0..k``, i.e. the
        dimension of the part of the model seen from those levels.
    stabilized_at : int or None
        First ``k`` with ``rank_profile[k] == rank_profile[k+1]``; from there on the
        model space is finite-dimensional and fully captured.
    N, K : int
        Codomain and domain depths.
    exact_domain : bool
        ``K`` is an exact domain depth (see :func:`exact_domain_depth`).  Otherwise
        ``K = N`` and ``Delta`` carries truncation artefacts on the top levels.
    """

    Delta: np.ndarray
    model_basis: np.ndarray
    defect_gram: np.ndarray
    rank_profile: tuple
    stabilized_at: Optional[int]
    N: int
    K: int
    exact_domain: bool

    @property
    def dim(self) -> int:
        return self.model_basis.shape[1]

    @property
    def effective_dim(self) -> int:
        if self.stabilized_at is not None:
            return self.rank_profile[self.stabilized_at]
        return self.rank_profile[-1]

    @property
    def defect_trace(self) -> float:
        """``trace(1 - M_N M_N*)``, non-decreasing in ``N``; for inner ``M`` the
        limit is the dimension of the model space."""
        return float(np.trace(self.defect_gram).real)

    @property
    def dims(self) -> dict:
        return {
            "fock_codomain": self.defect_gram.shape[0],
            "fock_domain": self.Delta.shape[0],
            "range_delta": _rank(np.linalg.eigvalsh(self.Delta @ self.Delta), 1e-9),
            "model": self.dim,
            "effective": self.effective_dim,
            "domain_depth": self.K,
        }


def functional_model(C, M: MultiAnalyticSymbol, N: Optional[int] = None,
                     tol: float = 1e-8, rank_tol: float = 1e-10,
                     domain_depth: Optional[int] = None) -> FunctionalModel:
    """Truncated functional model of ``M`` over ``C``.

    ``M`` must map into the defect coordinates of ``C`` and be contractive on the
    truncated space (up to ``tol``).  The domain depth defaults to the exact one
    when it exists and to ``N`` otherwise.
    """
    C = C if isinstance(C, RowContraction) else RowContraction(C)
    if M.cod_dim != C.defects.rank:
        raise DimensionMismatchError(
            f"symbol codomain has dimension {M.cod_dim}, rank D_C = {C.defects.rank}"
        )
    N = M.N if N is None else N
    if N > M.N:
        raise InvalidConfigurationError(f"model depth {N} exceeds symbol depth {M.N}")
    exact_K = exact_domain_depth(M, N, tol)
    if domain_depth is None:
        K = N if exact_K is None else exact_K
    else:
        K = int(domain_depth)
        if not 0 <= K <= N:
            raise InvalidConfigurationError(f"domain depth {K} outside 0..{N}")
    full = M.block_operator(N)
    src = TruncatedFockIndex(M.d, N, M.dom_dim)
    Mb = full[:, src.levels_mask(0, K)]
    nC, nD = Mb.shape
    root = la.psd_sqrt(np.eye(nD) - la.dagger(Mb) @ Mb, tol, "1 - M* M")
    Delta = root.root
    iota, _ = la.range_factor(root, 1e-9)
    # (a, t) with a in Gamma_N (x) D_C and iota t in range(Delta), orthogonal to all M x (+) Delta x
    cons = np.hstack([la.dagger(Mb), Delta @ iota])
    ker = la.null_space(cons, 1e-9).basis
    basis = np.vstack([ker[:nC], iota @ ker[nC:]])
    G = la.hermitian_part(np.eye(nC) - full @ la.dagger(full))
    dst = TruncatedFockIndex(M.d, N, M.cod_dim)
    ranks = []
    for k in range(N + 1):
        mk = dst.levels_mask(0, k)
        ranks.append(_rank(np.linalg.eigvalsh(G[np.ix_(mk, mk)]), rank_tol))
    stab = next((k for k in range(N) if ranks[k] == ranks[k + 1]), None)
    return FunctionalModel(Delta, basis, G, tuple(ranks), stab, N, K,
                           exact_K is not None and K <= exact_K)


@dataclass(frozen=True)
class SymbolLiftingReport:
    """Diagnostics of :func:`lifting_from_symbol`.

    ``exact`` means the observed part of the model stabilised below the truncation
    level, so the lifting is the associated lifting itself rather than a finite
    section of it.  ``removed_dim`` counts unobservable directions discarded by the
    final reduction step (0 for every exact run).
    """

    exact: bool
    model_level: int
    rank_profile: tuple
    model_dim: int
    removed_dim: int


def lifting_from_symbol(C, M: MultiAnalyticSymbol, N: Optional[int] = None,
                        tol: float = 1e-8, rank_tol: float = 1e-10, report: bool = False):
    """The contractive lifting of ``C`` associated to a contractive symbol ``M``.

    The model space ``H_A`` is realised through the vectors ``P_A z`` with ``z`` in
    levels ``0..m`` of ``Gamma (x) D_C``.  Their Gram matrix is ``1 - M M*`` and
    ``<A_i* P_A z, P_A z'> = <z, (1 - M M*) (L_i (x) 1) z'>`` while ``gamma D_{*,A} P_A z``
    is the vacuum block of ``(1 - M M*) z``.  All of these only involve levels
    ``<= m + 1`` and are exact for ``m <= N - 1``.

    If the rank of the Gram matrix stabilises at some level the construction is
    exact.  Otherwise the model on levels ``0..N-1`` is a compression of the
    (infinite-dimensional) associated lifting, which is still a contractive lifting
    of ``C``; any unobservable directions created by the compression are removed.
    """
    from .fock import creation_matrix
    from .lifting import reduce_lifting

    C = C if isinstance(C, RowContraction) else RowContraction(C)
    model = functional_model(C, M, N, tol, rank_tol)
    N = model.N
    if N < 1:
        raise InvalidConfigurationError("the associated lifting needs depth >= 1")
    d, p = C.d, C.h
    dst = TruncatedFockIndex(d, N, M.cod_dim)
    G = model.defect_gram
    exact = model.stabilized_at is not None
    m = model.stabilized_at if exact else N - 1
    mk = dst.levels_mask(0, m)
    w, v = np.linalg.eigh(G[np.ix_(mk, mk)])
    keep = w > rank_tol * max(1.0, float(w[-1])) if w.size else np.zeros(0, bool)
    R = v[:, keep] / np.sqrt(w[keep])  # coefficient vectors of an orthonormal basis
    A = []
    for i in range(1, d + 1):
        Gi = G[mk, :] @ creation_matrix(i, dst)[:, mk]
        A.append(la.dagger(R) @ Gi @ R)
    vac = dst.block(())
    c = G[vac][:, mk] @ R
    dc = C.defects
    bs = dc.D @ dc.iota @ c
    q = R.shape[1]
    B = [la.dagger(bs[i * p:(i + 1) * p]) for i in range(d)] if p else [np.zeros((q, 0))] * d
    L = Lifting(C, A, B, tol=max(tol, 1e-8))
    L, removed = reduce_lifting(L)
    if report:
        return L, SymbolLiftingReport(exact, m, model.rank_profile, q, removed)
    return L
