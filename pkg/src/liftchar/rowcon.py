"""Row contractions ``T = (T_1, ..., T_d)`` on a finite-dimensional space.

Conventions
-----------
* ``T_alpha = T_{a1} T_{a2} ... T_{an}`` and ``T*_alpha = (T_alpha)*``.
* ``Phi_T(X) = sum_i T_i X T_i*``; ``Phi_T^n(1) = sum_{|alpha|=n} T_alpha T_alpha*``.
* Defect coordinates: ``D_*`` and ``D`` are PSD roots; their numerical ranges are
  represented by isometric factors ``iota_star`` (h x r_*) and ``iota`` (dh x r).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import _linalg as la
from .exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    NotContractiveError,
)
from .fock import TruncatedFockIndex, creation_matrix

DEFAULT_TOL = 1e-9
H1_TOL = 1e-8


def _as_tuple(T) -> tuple:
    if isinstance(T, RowContraction):
        return T.T
    mats = tuple(la.as_matrix(t) for t in T)
    if not mats:
        raise DimensionMismatchError("a row contraction needs at least one matrix")
    h = mats[0].shape[0]
    for t in mats:
        if t.shape != (h, h):
            raise DimensionMismatchError(
                f"all entries must be square of size {h}, got {t.shape}"
            )
    return mats


@dataclass(frozen=True)
class ContractionReport:
    ok: bool
    lambda_max: float

    def __bool__(self):
        return self.ok


def validate_row_contraction(T, tol: float = DEFAULT_TOL) -> ContractionReport:
    """Check ``lambda_max(sum T_i T_i*) <= 1 + tol``."""
    mats = _as_tuple(T)
    s = sum(t @ la.dagger(t) for t in mats)
    lam = float(np.linalg.eigvalsh(la.hermitian_part(s))[-1]) if s.shape[0] else 0.0
    return ContractionReport(lam <= 1.0 + tol, lam)


class RowContraction:
    """An immutable d-tuple of square matrices satisfying ``sum T_i T_i* <= 1``.

    Parameters
    ----------
    T : sequence of (h, h) array_like
    tol : float
        Slack allowed in the contraction test.
    check : bool
        Skip validation when False (used internally for assembled tuples that
        are validated elsewhere).
    """

    def __init__(self, T, tol: float = DEFAULT_TOL, check: bool = True):
        mats = _as_tuple(T)
        for t in mats:
            t.setflags(write=False)
        self._T = mats
        self.tol = tol
        if check:
            rep = validate_row_contraction(mats, tol)
            if not rep.ok:
                raise NotContractiveError(
                    f"not a row contraction: lambda_max = {rep.lambda_max:.6g}",
                    lambda_max=rep.lambda_max,
                )

    @classmethod
    def zeros(cls, d: int, h: int) -> "RowContraction":
        return cls([np.zeros((h, h)) for _ in range(d)])

    @property
    def T(self) -> tuple:
        return self._T

    @property
    def d(self) -> int:
        return len(self._T)

    @property
    def h(self) -> int:
        return self._T[0].shape[0]

    def __len__(self):
        return self.d

    def __getitem__(self, i):
        return self._T[i]

    def __iter__(self):
        return iter(self._T)

    def __repr__(self):
        return f"RowContraction(d={self.d}, h={self.h})"

    @cached_property
    def row(self) -> np.ndarray:
        """The row operator ``[T_1 ... T_d]`` from ``(+)^d H`` to ``H``."""
        if self.h == 0:
            return np.zeros((0, 0), complex)
        return np.hstack(self._T)

    def word(self, alpha) -> np.ndarray:
        out = np.eye(self.h, dtype=complex)
        for a in alpha:
            out = out @ self._T[a - 1]
        return out

    def adjoint_word(self, alpha) -> np.ndarray:
        """``T*_alpha = (T_alpha)*``."""
        return la.dagger(self.word(alpha))

    def phi(self, X) -> np.ndarray:
        return sum(t @ X @ la.dagger(t) for t in self._T)

    def phi_power_identity(self, n: int) -> np.ndarray:
        X = np.eye(self.h, dtype=complex)
        for _ in range(n):
            X = self.phi(X)
        return X

    def adjoint_words(self, idx: TruncatedFockIndex) -> dict:
        """``{alpha: T*_alpha}`` for all words of the index, built level by level."""
        out = {(): np.eye(self.h, dtype=complex)}
        adj = [la.dagger(t) for t in self._T]
        for w in idx.words[1:]:
            # (T_{a1..an})* = T*_{a2..an} ... with T*_{a alpha} = T*_alpha T*_a
            out[w] = out[w[1:]] @ adj[w[0] - 1]
        return out

    @cached_property
    def defects(self) -> "DefectData":
        return defects(self, self.tol)


@dataclass(frozen=True, eq=False)
class DefectData:
    """Defect operators and isometric coordinates of their ranges."""

    Dstar: np.ndarray
    D: np.ndarray
    iota_star: np.ndarray
    sigma_star: np.ndarray
    iota: np.ndarray
    sigma: np.ndarray
    d: int
    h: int

    @property
    def rank_star(self) -> int:
        return self.iota_star.shape[1]

    @property
    def rank(self) -> int:
        return self.iota.shape[1]

    @cached_property
    def Dstar_coords(self) -> np.ndarray:
        """``iota_star* D_*`` : ``H -> C^{rank_star}``."""
        return la.dagger(self.iota_star) @ self.Dstar

    @cached_property
    def D_coords(self) -> np.ndarray:
        """``iota* D`` : ``(+)^d H -> C^{rank}``."""
        return la.dagger(self.iota) @ self.D

    def D_column(self, i: int) -> np.ndarray:
        """``D_i`` in defect coordinates: ``h -> iota* D (0,..,h,..,0)`` (letter ``i``)."""
        return self.D_coords[:, (i - 1) * self.h: i * self.h]

    def D_pinv_coords(self) -> np.ndarray:
        """Ambient preimage of defect coordinates: ``u -> x`` with ``D x = iota u``."""
        return self.iota / self.sigma if self.sigma.size else self.iota


def defects(T, tol: float = DEFAULT_TOL, rank_tol: float = la.DEFAULT_RANK_TOL) -> DefectData:
    """PSD defect roots ``D_* = (1 - T T*)^{1/2}`` and ``D = (1 - T* T)^{1/2}``.

    Raises :class:`NotContractiveError` when an eigenvalue of ``1 - T T*`` or
    ``1 - T* T`` falls below ``-tol``.
    """
    if not isinstance(T, RowContraction):
        T = RowContraction(T, tol)
    h, d = T.h, T.d
    row = T.row
    rs = la.psd_sqrt(np.eye(h) - row @ la.dagger(row), tol, "1 - T T*")
    r = la.psd_sqrt(np.eye(d * h) - la.dagger(row) @ row, tol, "1 - T* T")
    iota_s, sig_s = la.range_factor(rs, rank_tol)
    iota, sig = la.range_factor(r, rank_tol)
    return DefectData(rs.root, r.root, iota_s, sig_s, iota, sig, d, h)


def is_coisometric(T, tol: float = DEFAULT_TOL) -> bool:
    """``|| sum T_i T_i* - 1 || <= tol``."""
    mats = _as_tuple(T)
    s = sum(t @ la.dagger(t) for t in mats)
    return la.opnorm(s - np.eye(s.shape[0])) <= tol


def spectral_radius_phi(T) -> float:
    """Spectral radius of ``X -> sum T_i X T_i*`` as a linear map on matrices."""
    mats = _as_tuple(T)
    if mats[0].shape[0] == 0:
        return 0.0
    S = sum(np.kron(t, t.conj()) for t in mats)
    return float(np.max(np.abs(np.linalg.eigvals(S))))


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the *-stability test.

    ``stable`` is True/False, or None when the run was inconclusive.
    ``norms[n]`` is ``||Phi^n(1)||`` for ``n = 0, 1, ...``.
    """

    stable: Optional[bool]
    norms: tuple
    iterations: int
    spectral_radius: float

    def __bool__(self):
        return bool(self.stable)

    @property
    def inconclusive(self) -> bool:
        return self.stable is None


def is_star_stable(T, tol: float = DEFAULT_TOL, max_iter: int = 10000) -> StabilityReport:
    """Decide whether ``Phi_T^n(1) -> 0``.

    The verdict True comes from the defining sequence reaching ``||Phi^n(1)|| <= tol``.
    False is returned when the sequence has stabilised (successive difference
    ``<= tol``) and the spectral radius of ``Phi_T`` confirms a nonzero limit.
    Otherwise the result is inconclusive (``stable is None``).
    """
    T = T if isinstance(T, RowContraction) else RowContraction(T, tol)
    rho = spectral_radius_phi(T)
    X = np.eye(T.h, dtype=complex)
    norms = [la.opnorm(X)]
    if norms[0] <= tol:
        return StabilityReport(True, tuple(norms), 0, rho)
    for n in range(1, max_iter + 1):
        Y = T.phi(X)
        nrm = la.opnorm(Y)
        norms.append(nrm)
        if nrm <= tol:
            return StabilityReport(True, tuple(norms), n, rho)
        if la.opnorm(Y - X) <= tol and rho >= 1.0 - 1e-12:
            return StabilityReport(False, tuple(norms), n, rho)
        X = Y
    return StabilityReport(None, tuple(norms), max_iter, rho)


@dataclass(frozen=True, eq=False)
class WoldData:
    """Residual data: ``Q = lim Phi^n(1)`` and ``H^1 = {h : Q h = h}``."""

    Q: np.ndarray
    H1_basis: np.ndarray
    converged_at: int
    last_difference: float

    @property
    def h1_dim(self) -> int:
        return self.H1_basis.shape[1]


def wold_data(T, tol: float = DEFAULT_TOL, max_iter: int = 10000, h1_tol: float = H1_TOL) -> WoldData:
    """Limit of the decreasing sequence ``Phi_T^n(1)`` and its eigenvalue-1 space.

    The sequence is checked to be decreasing in PSD order at every step.
    Raises :class:`ConvergenceError` when the successive difference is still
    above ``tol`` after ``max_iter`` steps.
    """
    T = T if isinstance(T, RowContraction) else RowContraction(T, tol)
    h = T.h
    X = np.eye(h, dtype=complex)
    diff = np.inf
    for n in range(1, max_iter + 1):
        Y = T.phi(X)
        step = X - Y
        if h:
            lo = float(np.linalg.eigvalsh(la.hermitian_part(step))[0])
            if lo < -10 * tol:
                raise NotContractiveError(
                    f"Phi^n(1) not decreasing at n={n} (min eigenvalue {lo:.3e})", lambda_max=lo
                )
        diff = la.opnorm(step)
        X = Y
        if diff <= tol:
            break
    else:
        raise ConvergenceError(
            f"Phi^n(1) did not settle in {max_iter} steps (last difference {diff:.3e})",
            last_difference=diff,
            iterations=max_iter,
        )
    Q = la.hermitian_part(X)
    if h:
        w, v = np.linalg.eigh(Q)
        H1 = v[:, w >= 1.0 - h1_tol]
    else:
        H1 = np.zeros((0, 0), complex)
    return WoldData(Q, H1, n, diff)


def is_cnc(T, tol: float = DEFAULT_TOL, max_iter: int = 10000) -> bool:
    """Completely non-coisometric: the eigenvalue-1 space of ``Q`` is trivial."""
    return wold_data(T, tol, max_iter).h1_dim == 0


def h1_exact(T, rank_tol: float = la.DEFAULT_RANK_TOL) -> np.ndarray:
    """``H^1`` by subspace iteration: largest ``T*``-invariant subspace of ``ker D_*``.

    Independent of the Wold iteration; used as a cross-check.
    """
    T = T if isinstance(T, RowContraction) else RowContraction(T)
    dd = T.defects
    # rank-revealed coordinates: thresholding the root itself would see rounding of size sqrt(eps)
    basis, _, _ = la.invariant_kernel(dd.Dstar_coords, [la.dagger(t) for t in T], rank_tol)
    return basis


def poisson_kernel(T, N: int, gamma: Optional[np.ndarray] = None) -> np.ndarray:
    """Truncated Poisson kernel ``h -> sum_{|alpha|<=N} e_alpha (x) iota_*^* D_* T*_alpha h``.

    With ``gamma`` (``r x rank_star``) the defect vector is pushed through it,
    giving the embedding ``h -> sum e_alpha (x) gamma D_* T*_alpha h``.

    The columnwise norm deficit is exactly ``<h, Phi^{N+1}(1) h>``.
    """
    T = T if isinstance(T, RowContraction) else RowContraction(T)
    dd = T.defects
    coef = dd.Dstar_coords if gamma is None else np.asarray(gamma) @ dd.Dstar_coords
    m = coef.shape[0]
    idx = TruncatedFockIndex(T.d, N, m)
    adj = T.adjoint_words(idx)
    K = np.zeros((idx.dim, T.h), dtype=complex)
    for w in idx.words:
        K[idx.block(w)] = coef @ adj[w]
    return K


@dataclass(frozen=True, eq=False)
class MinimalDilation:
    """Truncated Schaeffer dilation on ``H (+) Gamma_N (x) D``.

    ``V[i]`` is exactly isometric on vectors whose Fock part lives on levels
    ``0..exact_level``; ``leakage`` is ``||Phi^{N+1}(1)||``, the squared norm
    bound of what a Poisson-type embedding loses at this depth.
    """

    V: tuple
    h: int
    fock: TruncatedFockIndex
    exact_level: int
    leakage: float

    @property
    def dim(self) -> int:
        return self.h + self.fock.dim

    def subboundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.dim, dtype=bool)
        mask[: self.h] = True
        mask[self.h:] = self.fock.levels_mask(0, self.exact_level)
        return mask


def schaeffer_mid(T, N: int) -> MinimalDilation:
    """``V_i (h (+) xi) = T_i h (+) [e_0 (x) D_i h + e_i (x) xi]`` on the truncated space."""
    T = T if isinstance(T, RowContraction) else RowContraction(T)
    dd = T.defects
    h, r = T.h, dd.rank
    idx = TruncatedFockIndex(T.d, N, r)
    n = h + idx.dim
    V = []
    vac = idx.block(())
    for i in range(1, T.d + 1):
        Vi = np.zeros((n, n), dtype=complex)
        Vi[:h, :h] = T[i - 1]
        Vi[h + vac.start: h + vac.stop, :h] = dd.D_column(i)
        Vi[h:, h:] = creation_matrix(i, idx)
        Vi.setflags(write=False)
        V.append(Vi)
    leak = la.opnorm(T.phi_power_identity(N + 1))
    return MinimalDilation(tuple(V), h, idx, N - 1, leak)


def minimality_defect(mid: MinimalDilation, rank_tol: float = 1e-9):
    """Compare span{V_alpha H : |alpha| <= N} with ``H (+)`` levels ``0..N-1``.

    Returns ``(rank_of_span, expected_dim)``.
    """
    h = mid.h
    vecs = [np.eye(mid.dim, dtype=complex)[:, :h]]
    frontier = [vecs[0]]
    for _ in range(mid.fock.N):
        frontier = [Vi @ f for f in frontier for Vi in mid.V]
        vecs.extend(frontier)
    span = np.hstack(vecs)
    expected = h + mid.fock.level_start(mid.fock.N) * mid.fock.m
    return la.orth(span, rank_tol).shape[1], expected


def warn_inconclusive(report: StabilityReport, what: str = "*-stability"):
    if report.inconclusive:
        warnings.warn(f"{what} inconclusive after {report.iterations} iterations", RuntimeWarning)
