"""Contractive liftings ``E_i = [[C_i, 0], [B_i, A_i]]`` of ``C`` by ``A``.

A lifting is parametrised by a contraction ``gamma`` from the defect-star space of
``A`` to the defect space of ``C`` through ``B* = D_C gamma D_{*,A}``.  Both defect
spaces are handled in the orthonormal coordinates of :class:`~liftchar.rowcon.DefectData`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import _linalg as la
from .exceptions import (
    DimensionMismatchError,
    MalformedLiftingError,
    NotContractiveError,
)
from .rowcon import (
    DEFAULT_TOL,
    RowContraction,
    StabilityReport,
    is_coisometric,
    is_star_stable,
    validate_row_contraction,
    wold_data,
)


def _rc(T, tol=DEFAULT_TOL) -> RowContraction:
    return T if isinstance(T, RowContraction) else RowContraction(T, tol)


class Lifting:
    """A contractive lifting of ``C`` (on ``C^p``) by ``A`` (on ``C^q``).

    Parameters
    ----------
    C, A : RowContraction or sequence of square matrices
    B : sequence of (q, p) matrices
    tol : float
        Tolerance for the row-contraction test of the assembled ``E``.
    """

    def __init__(self, C, A, B, tol: float = DEFAULT_TOL, check: bool = True):
        self.C = _rc(C, tol)
        self.A = _rc(A, tol)
        if self.C.d != self.A.d:
            raise DimensionMismatchError(f"C has d={self.C.d} but A has d={self.A.d}")
        p, q = self.C.h, self.A.h
        B = tuple(la.as_matrix(b) if np.size(b) else np.zeros((q, p), complex) for b in B)
        if len(B) != self.d:
            raise DimensionMismatchError(f"expected {self.d} B blocks, got {len(B)}")
        for b in B:
            if b.shape != (q, p):
                raise DimensionMismatchError(f"B blocks must be {q}x{p}, got {b.shape}")
            b.setflags(write=False)
        self.B = B
        self.tol = tol
        if check:
            rep = validate_row_contraction(self.E, tol)
            if not rep.ok:
                raise NotContractiveError(
                    f"assembled E is not a row contraction: lambda_max = {rep.lambda_max:.6g}",
                    lambda_max=rep.lambda_max,
                )

    @classmethod
    def from_blocks(cls, E, p: int, tol: float = DEFAULT_TOL, zero_tol: float = 0.0) -> "Lifting":
        """Split a block-lower-triangular tuple with ``H_C = C^p`` in front."""
        E = [la.as_matrix(e) for e in E]
        n = E[0].shape[0]
        if not 0 <= p <= n:
            raise DimensionMismatchError(f"corner size {p} outside 0..{n}")
        for i, e in enumerate(E):
            if e.shape != (n, n):
                raise DimensionMismatchError("E entries must share one square shape")
            upper = e[:p, p:]
            if upper.size and np.max(np.abs(upper)) > zero_tol:
                raise MalformedLiftingError(
                    f"E_{i + 1} has a nonzero upper-right block (max {np.max(np.abs(upper)):.3e})"
                )
        C = [e[:p, :p] for e in E]
        A = [e[p:, p:] for e in E]
        B = [e[p:, :p] for e in E]
        return cls(C, A, B, tol)

    @classmethod
    def trivial(cls, C) -> "Lifting":
        C = _rc(C)
        return cls(C, RowContraction.zeros(C.d, 0), [np.zeros((0, C.h))] * C.d)

    @property
    def d(self) -> int:
        return self.C.d

    @property
    def p(self) -> int:
        return self.C.h

    @property
    def q(self) -> int:
        return self.A.h

    @cached_property
    def E(self) -> RowContraction:
        p, q = self.p, self.q
        out = []
        for c, a, b in zip(self.C, self.A, self.B):
            e = np.zeros((p + q, p + q), dtype=complex)
            e[:p, :p] = c
            e[p:, :p] = b
            e[p:, p:] = a
            out.append(e)
        return RowContraction(out, self.tol, check=False)

    @cached_property
    def B_star_stack(self) -> np.ndarray:
        """``B*`` as a map ``H_A -> (+)^d H_C`` (blocks ``B_i*`` stacked)."""
        if self.p == 0:
            return np.zeros((0, self.q), complex)
        return np.vstack([la.dagger(b) for b in self.B])

    def conjugate(self, u: np.ndarray) -> "Lifting":
        """Unitarily equivalent lifting ``(1 (+) u) E (1 (+) u)*`` (``H_C`` fixed)."""
        u = la.as_matrix(u)
        A = [u @ a @ la.dagger(u) for a in self.A]
        B = [u @ b for b in self.B]
        return Lifting(self.C, A, B, self.tol)

    def __repr__(self):
        return f"Lifting(d={self.d}, p={self.p}, q={self.q})"


@dataclass(frozen=True, eq=False)
class GammaData:
    """A contraction between defect coordinates with diagnostic norms.

    ``gamma`` maps ``rank_star(A)`` coordinates to ``rank(C)`` coordinates.
    ``residual`` is the reconstruction error of ``B*`` when it was extracted from a
    lifting (0 when built directly).
    """

    gamma: np.ndarray
    norm: float
    isometry_defect: float
    residual: float
    tol: float

    @property
    def is_contraction(self) -> bool:
        return self.norm <= 1.0 + self.tol

    @property
    def is_isometry(self) -> bool:
        return self.isometry_defect <= self.tol

    @classmethod
    def of(cls, gamma, tol: float = DEFAULT_TOL, residual: float = 0.0) -> "GammaData":
        g = np.asarray(gamma, dtype=complex)
        if g.ndim != 2:
            raise DimensionMismatchError("gamma must be a matrix")
        defect = la.opnorm(la.dagger(g) @ g - np.eye(g.shape[1]))
        return cls(g, la.opnorm(g), defect, residual, tol)


def _gamma_matrix(gamma) -> np.ndarray:
    if isinstance(gamma, GammaData):
        return gamma.gamma
    return np.asarray(gamma, dtype=complex)


def b_star_from_gamma(C: RowContraction, A: RowContraction, gamma) -> np.ndarray:
    """``B* = D_C iota_C gamma iota_{*,A}^* D_{*,A}`` as a ``dp x q`` matrix."""
    dc, da = C.defects, A.defects
    g = _gamma_matrix(gamma)
    if g.shape != (dc.rank, da.rank_star):
        raise DimensionMismatchError(
            f"gamma must be {dc.rank}x{da.rank_star} (rank D_C x rank D_*A), got {g.shape}"
        )
    return dc.D @ dc.iota @ g @ da.Dstar_coords


def lifting_from_gamma(C, A, gamma, tol: float = DEFAULT_TOL) -> Lifting:
    """Assemble the contractive lifting with ``B* = D_C gamma D_{*,A}``.

    Raises
    ------
    NotContractiveError
        If ``||gamma|| > 1 + tol``.
    DimensionMismatchError
        If ``gamma`` does not match the defect ranks.
    """
    C, A = _rc(C, tol), _rc(A, tol)
    g = _gamma_matrix(gamma)
    nrm = la.opnorm(g)
    if nrm > 1.0 + tol:
        raise NotContractiveError(f"||gamma|| = {nrm:.6g} exceeds 1", lambda_max=nrm)
    bs = b_star_from_gamma(C, A, g)
    p, q = C.h, A.h
    B = [la.dagger(bs[i * p:(i + 1) * p, :]) for i in range(C.d)] if p else [np.zeros((q, 0))] * C.d
    return Lifting(C, A, B, tol)


def gamma_from_lifting(L: Lifting, tol: float = 1e-8, strict: bool = True) -> GammaData:
    """Solve ``B* = D_C gamma D_{*,A}`` for ``gamma`` in defect coordinates.

    Since ``D_C iota_C = iota_C diag(sigma_C)`` the least-squares solution is a
    diagonal rescaling of ``iota_C* B* iota_{*,A}``.  The reconstruction residual is
    reported; above ``tol`` (and with ``strict``) the lifting is malformed.
    """
    C, A = L.C, L.A
    dc, da = C.defects, A.defects
    bs = L.B_star_stack
    core = la.dagger(dc.iota) @ bs @ da.iota_star
    g = core / dc.sigma[:, None] / da.sigma_star[None, :] if core.size else core
    resid = la.opnorm(bs - b_star_from_gamma(C, A, g)) if bs.size else 0.0
    if strict and resid > tol:
        raise MalformedLiftingError(
            f"B* is not of the form D_C gamma D_*A (residual {resid:.3e})"
        )
    return GammaData.of(g, tol, resid)


@dataclass(frozen=True)
class CoisometryReport:
    ok: bool
    c_coisometric: bool
    cross_norm: float  # ||sum B_i C_i*||
    row_defect: float  # ||sum A_i A_i* + B_i B_i* - 1||

    def __bool__(self):
        return self.ok


def is_coisometric_lifting(L: Lifting, tol: float = DEFAULT_TOL) -> CoisometryReport:
    """Both block conditions for ``E E* = 1`` together with ``C C* = 1``."""
    q = L.q
    cross = sum(b @ la.dagger(c) for b, c in zip(L.B, L.C))
    row = sum(a @ la.dagger(a) + b @ la.dagger(b) for a, b in zip(L.A, L.B)) - np.eye(q)
    cn, rn = la.opnorm(cross), la.opnorm(row)
    cc = is_coisometric(L.C, tol)
    return CoisometryReport(cc and cn <= tol and rn <= tol, cc, cn, rn)


@dataclass(frozen=True)
class SubisometryReport:
    ok: Optional[bool]
    stability: StabilityReport
    isometry_defect: float

    def __bool__(self):
        return bool(self.ok)


def is_subisometric(L: Lifting, tol: float = DEFAULT_TOL, max_iter: int = 10000) -> SubisometryReport:
    """``A`` is *-stable and ``gamma`` is an isometry.

    ``ok`` is None when the stability run is inconclusive and ``gamma`` is isometric.
    """
    st = is_star_stable(L.A, tol, max_iter)
    g = gamma_from_lifting(L, max(tol, 1e-8), strict=False)
    iso = g.isometry_defect <= max(tol, 1e-8)
    if not iso:
        ok = False
    elif st.stable is None:
        ok = None
    else:
        ok = st.stable
    return SubisometryReport(ok, st, g.isometry_defect)


@dataclass(frozen=True, eq=False)
class ResolvingReport:
    """``S*`` is the largest ``A*``-invariant subspace of ``ker(gamma D_{*,A})``."""

    ok: bool
    s_star: np.ndarray
    h1: np.ndarray
    offending: np.ndarray
    steps: int
    borderline: int

    def __bool__(self):
        return self.ok


def unobservable_subspace(gamma, A, rank_tol: float = la.DEFAULT_RANK_TOL):
    """Largest subspace of ``ker(gamma D_{*,A})`` invariant under every ``A_i*``."""
    A = _rc(A)
    g = _gamma_matrix(gamma)
    da = A.defects
    if g.shape[1] != da.rank_star:
        raise DimensionMismatchError(
            f"gamma has {g.shape[1]} columns but rank D_*A = {da.rank_star}"
        )
    op = g @ da.Dstar_coords
    adj = [la.dagger(a) for a in A]
    return la.invariant_kernel(op, adj, rank_tol)


def is_resolving(gamma, A, tol: float = DEFAULT_TOL, max_iter: int = 10000,
                 rank_tol: float = la.DEFAULT_RANK_TOL) -> ResolvingReport:
    """``gamma`` is resolving iff ``S*`` lies inside ``H^1_A``.

    ``offending`` is an orthonormal basis of ``S* (-) H^1_A``; it is nonempty exactly
    when the test fails.
    """
    A = _rc(A)
    s, steps, border = unobservable_subspace(gamma, A, rank_tol)
    h1 = wold_data(A, tol, max_iter).H1_basis
    q = A.h
    if s.shape[1] == 0:
        off = np.zeros((q, 0), complex)
    else:
        comp = np.eye(q) - la.projector(h1) if h1.shape[1] else np.eye(q)
        off = la.orth(comp @ s, 1e-8)
    return ResolvingReport(off.shape[1] == 0, s, h1, off, steps, border)


def is_reduced(L: Lifting, rank_tol: float = la.DEFAULT_RANK_TOL) -> bool:
    """Reduced iff no nonzero ``h`` has ``gamma D_{*,A} A*_alpha h = 0`` for all words."""
    g = gamma_from_lifting(L, strict=False)
    s, _, _ = unobservable_subspace(g, L.A, rank_tol)
    return s.shape[1] == 0


@dataclass(frozen=True)
class ExistenceReport:
    ok: bool
    rank_star_A: int
    rank_C: int
    a_star_stable: Optional[bool]

    def __bool__(self):
        return self.ok


def exists_subisometric(C, A, tol: float = DEFAULT_TOL, max_iter: int = 10000) -> ExistenceReport:
    """Compare the defect ranks ``rank D_{*,A} <= rank D_C``.

    The flag ``a_star_stable`` records whether the subisometric reading applies;
    for non-*-stable ``A`` the same rank test answers the coisometric question.
    """
    C, A = _rc(C, tol), _rc(A, tol)
    rs, rc = A.defects.rank_star, C.defects.rank
    st = is_star_stable(A, tol, max_iter).stable
    return ExistenceReport(rs <= rc, rs, rc, st)


def isometries_equivalent(g1, g2, tol: float = 1e-8) -> bool:
    """Isometries with the same range: compare ``gamma gamma*`` in operator norm."""
    a, b = _gamma_matrix(g1), _gamma_matrix(g2)
    if a.shape[0] != b.shape[0]:
        return False
    return la.opnorm(a @ la.dagger(a) - b @ la.dagger(b)) <= tol


def reduce_lifting(L: Lifting, rank_tol: float = la.DEFAULT_RANK_TOL):
    """Remove the unobservable part ``S*`` of ``H_A``.

    ``S*`` is invariant under every ``E_i*`` and killed by ``B*``, so ``H_C (+) S*^perp``
    is ``E``-invariant and the restriction is again a lifting of ``C``; its own
    unobservable subspace is trivial.  Returns ``(lifting, removed_dimension)``.
    """
    s, _, _ = unobservable_subspace(gamma_from_lifting(L, strict=False), L.A, rank_tol)
    k = s.shape[1]
    if k == 0:
        return L, 0
    keep = la.null_space(la.dagger(s), rank_tol).basis  # orthonormal basis of S*^perp
    A = [la.dagger(keep) @ a @ keep for a in L.A]
    B = [la.dagger(keep) @ b for b in L.B]
    return Lifting(L.C, A, B, L.tol), k
