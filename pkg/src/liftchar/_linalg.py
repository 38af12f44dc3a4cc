"""Small dense linear-algebra helpers used across the package.

Everything here works on complex ``numpy`` arrays and treats empty (0-dimensional)
spaces as first-class citizens, because trivial liftings have ``H_A = {0}``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .exceptions import NotContractiveError

DEFAULT_RANK_TOL = 1e-9


def as_matrix(a, shape=None) -> np.ndarray:
    out = np.array(a, dtype=complex)
    if out.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {out.shape}")
    if shape is not None and out.shape != tuple(shape):
        raise ValueError(f"expected shape {tuple(shape)}, got {out.shape}")
    return out


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def opnorm(a: np.ndarray) -> float:
    """Spectral norm, zero for empty matrices."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


class PsdRoot(NamedTuple):
    root: np.ndarray
    eigenvalues: np.ndarray  # of the squared operator, clipped, ascending
    eigenvectors: np.ndarray


def psd_sqrt(m: np.ndarray, tol: float = 1e-9, what: str = "matrix") -> PsdRoot:
    """Square root of a Hermitian PSD matrix by eigendecomposition.

    Eigenvalues in ``[-tol, 0)`` are treated as rounding and clipped to zero;
    anything below ``-tol`` raises :class:`NotContractiveError`.
    """
    m = hermitian_part(np.asarray(m, dtype=complex))
    n = m.shape[0]
    if n == 0:
        return PsdRoot(np.zeros((0, 0), complex), np.zeros(0), np.zeros((0, 0), complex))
    w, v = np.linalg.eigh(m)
    if w[0] < -tol:
        raise NotContractiveError(
            f"{what} has eigenvalue {w[0]:.3e} below -{tol:g}", lambda_max=float(w[0])
        )
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ dagger(v)
    return PsdRoot(root, w, v)


def range_factor(root: PsdRoot, rank_tol: float = DEFAULT_RANK_TOL):
    """Isometric factor onto the numerical range of a PSD root.

    The threshold is applied to the eigenvalues of the *squared* operator,
    relative to ``max(1, largest eigenvalue)``.  Returns ``(iota, sigma)`` with
    ``root @ iota == iota * sigma`` (columns scaled by the positive singular values).
    """
    w, v = root.eigenvalues, root.eigenvectors
    n = v.shape[0]
    if n == 0:
        return np.zeros((0, 0), complex), np.zeros(0)
    scale = max(1.0, float(w[-1]))
    keep = w > rank_tol * scale
    # descending order keeps the dominant directions first
    idx = np.nonzero(keep)[0][::-1]
    return v[:, idx].copy(), np.sqrt(w[idx])


def orth(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space; threshold relative to ``max(1, s_max)``."""
    n = a.shape[0]
    if a.size == 0:
        return np.zeros((n, 0), complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    r = int(np.sum(s > rank_tol * scale))
    return u[:, :r]


class NullSpace(NamedTuple):
    basis: np.ndarray
    borderline: int


def null_space(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL, relative: bool = True) -> NullSpace:
    """Orthonormal basis of the numerical kernel of ``a``.

    Singular values within a factor 100 of the threshold are counted as
    borderline.  They are resolved toward the *larger* kernel.
    """
    n = a.shape[1]
    if n == 0:
        return NullSpace(np.zeros((0, 0), complex), 0)
    if a.shape[0] == 0:
        return NullSpace(np.eye(n, dtype=complex), 0)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    full = np.zeros(n)
    full[: s.size] = s
    scale = max(1.0, float(s[0])) if (relative and s.size) else 1.0
    thr = rank_tol * scale
    kernel = full <= thr
    borderline = int(np.sum((full > thr / 100) & (full < thr * 100)))
    return NullSpace(dagger(vh)[:, kernel], borderline)


def projector(basis: np.ndarray) -> np.ndarray:
    return basis @ dagger(basis)


def invariant_kernel(g: np.ndarray, ops, rank_tol: float = DEFAULT_RANK_TOL, max_steps=None):
    """Largest subspace of ``ker g`` invariant under every matrix in ``ops``.

    Subspace iteration ``S_{k+1} = {x in S_k : op x in S_k for all op}``; it is
    exact in the sense that it stops after at most ``dim`` strict decreases.
    Returns ``(basis, steps, borderline)``.
    """
    n = g.shape[1]
    ns = null_space(g, rank_tol)
    basis, borderline = ns.basis, ns.borderline
    steps = 0
    limit = n + 1 if max_steps is None else max_steps
    while basis.shape[1] > 0 and steps < limit:
        comp = np.eye(n) - projector(basis)
        stacked = np.vstack([comp @ op @ basis for op in ops]) if ops else np.zeros((0, basis.shape[1]))
        inner = null_space(stacked, rank_tol)
        borderline += inner.borderline
        steps += 1
        if inner.basis.shape[1] == basis.shape[1]:
            break
        basis = basis @ inner.basis
        # re-orthonormalise against drift
        basis = orth(basis, rank_tol) if basis.shape[1] else basis
    return basis, steps, borderline


def subspace_contained(small: np.ndarray, big: np.ndarray, tol: float = 1e-8) -> bool:
    """True iff span(small) is inside span(big), both given by orthonormal columns."""
    if small.shape[1] == 0:
        return True
    if big.shape[1] == 0:
        return False
    resid = small - big @ (dagger(big) @ small)
    return opnorm(resid) <= tol


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    ph = np.diag(r)
    ph = np.where(np.abs(ph) > 0, ph / np.abs(ph), 1.0)
    return q * ph


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    if cols > rows:
        raise ValueError("an isometry needs rows >= cols")
    if cols == 0:
        return np.zeros((rows, 0), complex)
    return random_unitary(rows, rng)[:, :cols]
