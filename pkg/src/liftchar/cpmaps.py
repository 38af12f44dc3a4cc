"""Completely positive maps ``Phi_T(X) = sum T_i X T_i*`` and liftings of them.

Matrices are vectorised row-major, so ``vec(A X B) = kron(A, B.T) vec(X)`` and the
superoperator of ``Phi_T`` is ``sum kron(T_i, conj(T_i))``.  Corners are described
either by an integer ``p`` (first ``p`` coordinates, the layout of :class:`Lifting`)
or by an orthogonal projection matrix.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import _linalg as la
from .exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    InvalidConfigurationError,
    LiftCharError,
    MalformedLiftingError,
    NotFixedError,
)
from .fock import enumerate_words
from .lifting import Lifting, is_subisometric
from .rowcon import DEFAULT_TOL, RowContraction, is_coisometric, is_star_stable

FIXED_TOL = 1e-8


class CPMap:
    """The CP map of a Kraus tuple, together with its trace dual.

    Parameters
    ----------
    kraus : RowContraction or sequence of square matrices
    tol : float
        Tolerance for the contraction and unitality tests.
    """

    def __init__(self, kraus, tol: float = DEFAULT_TOL):
        self.kraus = kraus if isinstance(kraus, RowContraction) else RowContraction(kraus, tol)
        self.tol = tol

    @property
    def dim(self) -> int:
        return self.kraus.h

    @cached_property
    def unital(self) -> bool:
        return is_coisometric(self.kraus, self.tol)

    def __call__(self, X) -> np.ndarray:
        return cp_apply(self, X)

    def adjoint(self, rho) -> np.ndarray:
        """Trace dual ``rho -> sum T_i* rho T_i``."""
        rho = _square(rho, self.dim)
        return sum(la.dagger(t) @ rho @ t for t in self.kraus)

    def power(self, X, n: int) -> np.ndarray:
        X = _square(X, self.dim)
        for _ in range(n):
            X = self.kraus.phi(X)
        return X

    @cached_property
    def superoperator(self) -> np.ndarray:
        n = self.dim
        S = np.zeros((n * n, n * n), complex)
        for t in self.kraus:
            S += np.kron(t, t.conj())
        return S

    def choi(self) -> np.ndarray:
        """``sum_ij e_ij (x) Phi(e_ij)``; PSD exactly when the map is CP."""
        n = self.dim
        J = np.zeros((n * n, n * n), complex)
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n), complex)
                e[i, j] = 1.0
                J[i * n:(i + 1) * n, j * n:(j + 1) * n] = self.kraus.phi(e)
        return J

    def __repr__(self):
        return f"CPMap(dim={self.dim}, kraus={self.kraus.d}, unital={self.unital})"


def _cp(phi) -> CPMap:
    if isinstance(phi, CPMap):
        return phi
    if isinstance(phi, Lifting):
        return CPMap(phi.E)
    return CPMap(phi)


def _square(X, n: int) -> np.ndarray:
    X = la.as_matrix(X)
    if X.shape != (n, n):
        raise DimensionMismatchError(f"expected a {n}x{n} matrix, got {X.shape}")
    return X


def cp_apply(phi, X) -> np.ndarray:
    """``sum_i T_i X T_i*``."""
    phi = _cp(phi)
    return phi.kraus.phi(_square(X, phi.dim))


def _corner_basis(p_C, n: int, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of the corner ``p_C``."""
    if isinstance(p_C, (int, np.integer)):
        if not 0 <= p_C <= n:
            raise DimensionMismatchError(f"corner size {p_C} outside 0..{n}")
        return np.eye(n, dtype=complex)[:, :p_C]
    P = _square(p_C, n)
    if la.opnorm(P @ P - P) > tol or la.opnorm(P - la.dagger(P)) > tol:
        raise InvalidConfigurationError("p_C is not an orthogonal projection")
    w, v = np.linalg.eigh(la.hermitian_part(P))
    return v[:, w > 0.5][:, ::-1]


def _complement(U: np.ndarray) -> np.ndarray:
    n = U.shape[0]
    if U.shape[1] == 0:
        return np.eye(n, dtype=complex)
    return la.null_space(la.dagger(U)).basis


# ---------------------------------------------------------------------------
# lifting structure


@dataclass(frozen=True, eq=False)
class CPLiftingReport:
    """``ok`` iff every Kraus operator kills ``p_A -> p_C``; then ``Phi_E`` lifts
    ``Phi_C`` (compression) by ``Phi_A`` (restriction)."""

    ok: bool
    upper_norm: float
    corner_leak: float  # ||p_C Phi_E(p_A) p_C||
    C: Optional[RowContraction]
    A: Optional[RowContraction]
    basis_C: np.ndarray
    basis_A: np.ndarray

    def __bool__(self):
        return self.ok


def is_cp_lifting(phiE, p_C, tol: float = DEFAULT_TOL) -> CPLiftingReport:
    """Decide whether ``Phi_E`` is a lifting with respect to the corner ``p_C``.

    ``p_C Phi_E(p_A) p_C = sum (p_C E_i p_A)(p_C E_i p_A)*`` vanishes iff all upper-right
    Kraus blocks vanish, so the two tests are reported side by side.
    """
    phiE = _cp(phiE)
    n = phiE.dim
    Uc = _corner_basis(p_C, n)
    Ua = _complement(Uc)
    upper = max((la.opnorm(la.dagger(Uc) @ e @ Ua) for e in phiE.kraus), default=0.0)
    leak = la.opnorm(la.dagger(Uc) @ phiE.kraus.phi(Ua @ la.dagger(Ua)) @ Uc)
    ok = upper <= tol and leak <= tol
    C = A = None
    if ok:
        C = RowContraction([la.dagger(Uc) @ e @ Uc for e in phiE.kraus], phiE.tol, check=False)
        A = RowContraction([la.dagger(Ua) @ e @ Ua for e in phiE.kraus], phiE.tol, check=False)
    return CPLiftingReport(ok, upper, leak, C, A, Uc, Ua)


# ---------------------------------------------------------------------------
# fixed points


@dataclass(frozen=True, eq=False)
class FixedPointSet:
    """Fixed points ``{X : Phi(X) = X}``.

    ``basis`` holds Hilbert-Schmidt orthonormal matrices spanning the set; the
    selfadjoint basis spans the same complex space with Hermitian elements
    (orthonormal over the reals).
    """

    basis: tuple
    selfadjoint_basis: tuple
    residual: float  # max ||Phi(X) - X|| over the basis
    adjoint_residual: float  # distance of X* from the span, max over the basis
    borderline: int
    multiplicative_defect: float  # diagnostic only; fixed points need not form an algebra

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def project(self, X) -> np.ndarray:
        """Hilbert-Schmidt coordinates of ``X`` in ``basis``."""
        X = np.asarray(X, complex)
        return np.array([np.vdot(B, X) for B in self.basis])

    def contains(self, X, tol: float = FIXED_TOL) -> bool:
        X = np.asarray(X, complex)
        rest = X - sum((c * B for c, B in zip(self.project(X), self.basis)), np.zeros_like(X))
        return np.linalg.norm(rest) <= tol * max(1.0, np.linalg.norm(X))


def _hermitian_basis(mats: list, n: int, rank_tol: float) -> tuple:
    if not mats:
        return ()
    herm = []
    for X in mats:
        herm.append(la.hermitian_part(X))
        herm.append(la.hermitian_part(-1j * X))
    # Hermitian matrices as real vectors
    R = np.array([np.concatenate([h.real.ravel(), h.imag.ravel()]) for h in herm]).T
    u, s, _ = np.linalg.svd(R, full_matrices=False)
    r = len(mats)
    out = []
    for k in range(r):
        v = u[:, k]
        h = la.hermitian_part((v[: n * n] + 1j * v[n * n:]).reshape(n, n))
        # fix the sign: positive trace, else positive largest diagonal entry
        t = np.trace(h).real
        ref = t if abs(t) > 1e-12 else h.diagonal().real[np.argmax(np.abs(h.diagonal()))]
        out.append(-h if ref < 0 else h)
    return tuple(out)


def fixed_points(phi, tol: float = FIXED_TOL) -> FixedPointSet:
    """Kernel of ``S - 1`` on the ``dim^2``-dimensional matrix space.

    The singular-value threshold is ``tol`` relative to ``max(1, s_max)``.  Values
    within a factor 100 of it are counted as borderline and trigger a warning.
    """
    phi = _cp(phi)
    n = phi.dim
    if n == 0:
        return FixedPointSet((), (), 0.0, 0.0, 0, 0.0)
    ns = la.null_space(phi.superoperator - np.eye(n * n), tol)
    if ns.borderline:
        warnings.warn(
            f"fixed-point solve: {ns.borderline} singular value(s) near the threshold {tol:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    basis = tuple(ns.basis[:, k].reshape(n, n) for k in range(ns.basis.shape[1]))
    res = max((la.opnorm(phi.kraus.phi(X) - X) for X in basis), default=0.0)
    V = ns.basis
    adj = 0.0
    mult = 0.0
    for X in basis:
        y = la.dagger(X).reshape(-1)
        adj = max(adj, float(np.linalg.norm(y - V @ (la.dagger(V) @ y))))
        for Y in basis:
            z = (X @ Y).reshape(-1)
            mult = max(mult, float(np.linalg.norm(z - V @ (la.dagger(V) @ z))))
    sa = _hermitian_basis(list(basis), n, tol)
    return FixedPointSet(basis, sa, res, adj, ns.borderline, mult)


def is_ergodic(phi, tol: float = FIXED_TOL) -> bool:
    """A unital CP map is ergodic iff its fixed points are the scalars."""
    phi = _cp(phi)
    if not phi.unital:
        raise InvalidConfigurationError("ergodicity is tested for unital maps only")
    return fixed_points(phi, tol).dimension == 1


# ---------------------------------------------------------------------------
# the compression correspondence


def kappa(X, phiE, p_C, tol: float = FIXED_TOL) -> np.ndarray:
    """Compress a fixed point of ``Phi_E`` to the corner ``p_C``.

    Raises :class:`NotFixedError` if ``X`` is not fixed, and
    :class:`MalformedLiftingError` if the compression is not fixed by ``Phi_C``
    (which happens only when ``p_C`` does not carry a lifting structure).
    """
    phiE = _cp(phiE)
    X = _square(X, phiE.dim)
    scale = max(1.0, la.opnorm(X))
    r = la.opnorm(phiE.kraus.phi(X) - X)
    if r > tol * scale:
        raise NotFixedError(f"input is not a fixed point (residual {r:.3e})", residual=r)
    Uc = _corner_basis(p_C, phiE.dim)
    y = la.dagger(Uc) @ X @ Uc
    C = [la.dagger(Uc) @ e @ Uc for e in phiE.kraus]
    rc = la.opnorm(sum(c @ y @ la.dagger(c) for c in C) - y) if C else 0.0
    if rc > 10 * tol * scale:
        raise MalformedLiftingError(f"corner of a fixed point is not fixed by Phi_C (residual {rc:.3e})")
    return y


@dataclass(frozen=True, eq=False)
class KappaInverse:
    X: np.ndarray
    iterations: int
    last_difference: float
    corner_residual: float  # ||kappa(X) - x||


def kappa_inverse(x, phiE, p_C, tol: float = 1e-12, max_iter: int = 10000,
                  fixed_tol: float = FIXED_TOL) -> KappaInverse:
    """Norm limit of ``Phi_E^n(x (+) 0)`` for a fixed point ``x`` of ``Phi_C``.

    Iterates until successive differences fall to ``tol``; raises
    :class:`ConvergenceError` otherwise.  The corner residual of the limit is
    reported: it vanishes for subisometric coisometric liftings and may not in
    general.
    """
    phiE = _cp(phiE)
    Uc = _corner_basis(p_C, phiE.dim)
    x = _square(x, Uc.shape[1])
    C = [la.dagger(Uc) @ e @ Uc for e in phiE.kraus]
    rc = la.opnorm(sum(c @ x @ la.dagger(c) for c in C) - x) if C else 0.0
    if rc > fixed_tol * max(1.0, la.opnorm(x)):
        raise NotFixedError(f"x is not fixed by Phi_C (residual {rc:.3e})", residual=rc)
    X = Uc @ x @ la.dagger(Uc)
    diff = np.inf
    for n in range(1, max_iter + 1):
        Y = phiE.kraus.phi(X)
        diff = la.opnorm(Y - X)
        X = Y
        if diff <= tol:
            break
    else:
        raise ConvergenceError(
            f"Phi_E^n(x) did not settle in {max_iter} steps (last difference {diff:.3e})",
            last_difference=diff,
            iterations=max_iter,
        )
    return KappaInverse(X, n, diff, la.opnorm(la.dagger(Uc) @ X @ Uc - x))


@dataclass(frozen=True, eq=False)
class EquivalenceFlags:
    """The four conditions for a coisometric lifting.

    (a) subisometric, (b) ``A`` *-stable, (c) ``Phi_E^n(p_C) -> 1``,
    (d) ``kappa`` is a bijection between the fixed-point sets.  A flag is None when
    its computation was inconclusive.
    """

    a: Optional[bool]
    b: Optional[bool]
    c: Optional[bool]
    d: bool
    c_iterations: int
    c_distance: float
    dim_fixed_E: int
    dim_fixed_C: int
    kappa_rank: int

    @property
    def flags(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def inconclusive(self) -> bool:
        return any(f is None for f in self.flags)

    @property
    def agree(self) -> bool:
        return not self.inconclusive and len(set(self.flags)) == 1


def _corner_limit(phiE: CPMap, p: int, tol: float, max_iter: int):
    """Run ``Phi_E^n(p_C)`` (increasing for coisometric liftings) toward 1.

    True once within ``tol`` of 1; False once the sequence has settled
    (difference ``<= tol``) at distance above ``1e3 tol``; None otherwise.
    """
    n_tot = phiE.dim
    X = np.zeros((n_tot, n_tot), complex)
    X[:p, :p] = np.eye(p)
    eye = np.eye(n_tot)
    dist = la.opnorm(eye - X)
    if dist <= tol:
        return True, 0, dist
    for n in range(1, max_iter + 1):
        Y = phiE.kraus.phi(X)
        dist = la.opnorm(eye - Y)
        if dist <= tol:
            return True, n, dist
        if la.opnorm(Y - X) <= tol and dist > 1e3 * tol:
            return False, n, dist
        X = Y
    return None, max_iter, dist


def subisometric_equivalences(L: Lifting, tol: float = DEFAULT_TOL, max_iter: int = 10000,
                              fixed_tol: float = FIXED_TOL) -> EquivalenceFlags:
    """Evaluate the four conditions independently on a coisometric lifting."""
    from .lifting import is_coisometric_lifting

    if not is_coisometric_lifting(L, max(tol, 1e-8)):
        raise InvalidConfigurationError("the four-way test needs a coisometric lifting")
    a = is_subisometric(L, tol, max_iter).ok
    b = is_star_stable(L.A, tol, max_iter).stable
    phiE = CPMap(L.E)
    c, it, dist = _corner_limit(phiE, L.p, tol, max_iter)
    fE = fixed_points(phiE, fixed_tol)
    fC = fixed_points(CPMap(L.C), fixed_tol)
    p = L.p
    if fE.dimension:
        K = np.array([X[:p, :p].reshape(-1) for X in fE.basis]).T
        rank = la.orth(K, 1e-8).shape[1]
    else:
        rank = 0
    d = fE.dimension == fC.dimension == rank
    return EquivalenceFlags(a, b, c, d, it, dist, fE.dimension, fC.dimension, rank)


# ---------------------------------------------------------------------------
# invariant states


@dataclass(frozen=True, eq=False)
class SupportCompression:
    p_C: np.ndarray
    basis: np.ndarray
    C: RowContraction
    psi_C: np.ndarray
    invariance_residual: float
    coinvariance_residual: float


def support_compression(phiE, psi, tol: float = 1e-9, rank_tol: float = la.DEFAULT_RANK_TOL
                        ) -> SupportCompression:
    """Compress a unital CP map to the support of an invariant density matrix.

    Invariance ``psi o Phi_E = psi`` is checked as ``Phi_E^dual(psi) = psi``.  On the
    support ``p_C`` the tuple is co-invariant, ``p_C E_i* p_C = E_i* p_C``, so ``E`` is a
    lifting of ``C = p_C E p_C`` and ``psi_C`` is faithful.
    """
    phiE = _cp(phiE)
    if not phiE.unital:
        raise InvalidConfigurationError("support compression needs a unital map")
    psi = _square(psi, phiE.dim)
    if la.opnorm(psi - la.dagger(psi)) > tol:
        raise InvalidConfigurationError("state is not Hermitian")
    psi = la.hermitian_part(psi)
    w, v = np.linalg.eigh(psi)
    if w.size and w[0] < -tol:
        raise InvalidConfigurationError(f"state has eigenvalue {w[0]:.3e} < 0")
    if abs(np.trace(psi).real - 1.0) > tol:
        raise InvalidConfigurationError(f"state has trace {np.trace(psi).real:.12g}")
    inv = la.opnorm(phiE.adjoint(psi) - psi)
    if inv > tol:
        raise NotFixedError(f"state is not invariant (residual {inv:.3e})", residual=inv)
    keep = w > rank_tol * max(1.0, float(w[-1]))
    U = v[:, keep][:, ::-1]
    P = U @ la.dagger(U)
    co = max((la.opnorm((np.eye(phiE.dim) - P) @ la.dagger(e) @ P) for e in phiE.kraus), default=0.0)
    if co > max(tol, 1e-8) ** 0.5:
        raise LiftCharError(f"support of an invariant state is not co-invariant (residual {co:.3e})")
    C = RowContraction([la.dagger(U) @ e @ U for e in phiE.kraus], phiE.tol, check=False)
    return SupportCompression(P, U, C, la.dagger(U) @ psi @ U, inv, co)


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    matrix: np.ndarray
    words: tuple
    min_eigenvalue: float
    level_residual: float  # max_n ||sum_{|alpha|=n} R_alpha D R_alpha* - D||


def moment_matrix(D, R, k: int, tol: float = FIXED_TOL) -> MomentMatrix:
    """Block matrix ``[R_alpha D R_beta*]`` over words of length at most ``k``.

    ``D`` must be a fixed point of ``Phi_R`` with ``0 <= D <= 1``.
    """
    R = R if isinstance(R, RowContraction) else RowContraction(R)
    D = _square(D, R.h)
    if la.opnorm(D - la.dagger(D)) > tol:
        raise InvalidConfigurationError("D is not selfadjoint")
    w = np.linalg.eigvalsh(la.hermitian_part(D)) if R.h else np.zeros(0)
    if w.size and (w[0] < -tol or w[-1] > 1 + tol):
        raise InvalidConfigurationError(f"D has spectrum [{w[0]:.3e}, {w[-1]:.3e}] outside [0, 1]")
    r = la.opnorm(R.phi(D) - D)
    if r > tol:
        raise NotFixedError(f"D is not fixed by Phi_R (residual {r:.3e})", residual=r)
    words = tuple(enumerate_words(R.d, k))
    ops = {a: R.word(a) for a in words}
    h = R.h
    M = np.zeros((len(words) * h, len(words) * h), complex)
    for i, a in enumerate(words):
        left = ops[a] @ D
        for j, b in enumerate(words):
            M[i * h:(i + 1) * h, j * h:(j + 1) * h] = left @ la.dagger(ops[b])
    lev = 0.0
    for n in range(k + 1):
        s = sum((ops[a] @ D @ la.dagger(ops[a]) for a in words if len(a) == n), np.zeros((h, h)))
        lev = max(lev, la.opnorm(s - D))
    mn = float(np.linalg.eigvalsh(la.hermitian_part(M))[0]) if M.size else 0.0
    return MomentMatrix(M, words, mn, lev)
