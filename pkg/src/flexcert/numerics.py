"""Dense symmetric eigendecomposition and Cholesky factorization.

Matrices are plain 2-D float64 numpy arrays. Both routines are pure: inputs
are copied, never modified.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import NoConvergence, NotPSD, NotSymmetric

SYMMETRY_TOL = 1e-9
MAX_SWEEPS = 100
PSD_TOL = 1e-8


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues in descending order; ``vectors[:, k]`` pairs with ``values[k]``."""

    values: np.ndarray
    vectors: np.ndarray


def _as_square(S):
    S = np.array(S, dtype=float, copy=True)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NotSymmetric("matrix has non-finite entries")
    return S


def sym_eigen(S, max_sweeps=MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Each eigenvector is signed so that its largest-magnitude component is
    positive; equal eigenvalues keep their original diagonal order.
    """
    a = _as_square(S)
    n = a.shape[0]
    if n and np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise NotSymmetric("asymmetry exceeds %g" % SYMMETRY_TOL)
    a = np.ascontiguousarray(0.5 * (a + a.T))
    v = np.eye(n)
    tol = 1e-15 * np.linalg.norm(a) + 1e-300
    if kernels.jacobi_eigen(a, v, max_sweeps, tol) < 0:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    lam = np.diag(a).copy()
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    v = v[:, order]
    for k in range(n):
        i = int(np.argmax(np.abs(v[:, k])))
        if v[i, k] < 0:
            v[:, k] = -v[:, k]
    return EigenResult(lam, v)


def cholesky(S):
    """Lower-triangular ``L`` with ``L @ L.T == S`` for symmetric PSD ``S``.

    Rank-deficient input is accepted: a pivot within rounding of zero whose
    column is also negligible is clamped, leaving that column of ``L`` zero.
    """
    a = _as_square(S)
    n = a.shape[0]
    if n and np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise NotSymmetric("asymmetry exceeds %g" % SYMMETRY_TOL)
    scale = 1.0 + (np.max(np.abs(a)) if n else 0.0)
    L = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - L[j, :j] @ L[j, :j]
        if d < -PSD_TOL * scale:
            raise NotPSD(f"negative pivot {d:.3g} at column {j}")
        col = a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]
        if d <= 1e-12 * scale:
            if np.max(np.abs(col), initial=0.0) <= 1e-12 * scale:
                continue        # null direction: leave the column at zero
            if d <= 0.0:
                raise NotPSD(f"zero pivot with coupling at column {j}")
        L[j, j] = np.sqrt(d)
        L[j + 1:, j] = col / L[j, j]
    if n and np.max(np.abs(L @ L.T - a)) > PSD_TOL * scale:
        raise NotPSD("matrix is not positive semidefinite")
    return L
