"""Numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures, same pivoting and tie-breaking rules; results can differ from
the compiled path only in the last bits of floating point rounding.
"""

import numpy as np

TIE_REL = 1e-12


def pivot(T, r, c):
    T[r] /= T[r, c]
    T[r, c] = 1.0
    col = T[:, c].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        T[nz] -= np.outer(col[nz], T[r])
        T[nz, c] = 0.0


def simplex_run(T, basis, allowed, max_iter, opt_tol, piv_tol, bland_after):
    m = T.shape[0] - 1
    n = T.shape[1] - 1
    allowed = np.asarray(allowed, dtype=bool)
    it = 0
    degenerate = 0
    while it < max_iter:
        rc = np.where(allowed, T[m, :n], np.inf)
        cand = np.flatnonzero(rc < -opt_tol)
        if cand.size == 0:
            return 0, it
        if degenerate >= bland_after:
            col = cand[0]
        else:
            col = cand[np.argmin(rc[cand])]
        a = T[:m, col]
        rows = np.flatnonzero(a > piv_tol)
        if rows.size == 0:
            return 1, it
        ratios = np.maximum(T[rows, n], 0.0) / a[rows]
        k = np.argmin(ratios)
        best = ratios[k]
        tied = rows[ratios <= best + TIE_REL * (1.0 + best)]
        row = tied[np.argmin(basis[tied])]
        if best <= TIE_REL:
            degenerate += 1
        pivot(T, row, col)
        basis[row] = col
        it += 1
    return 2, it


def jacobi_eigen(a, v, max_sweeps, tol):
    n = a.shape[0]
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps + 1):
        if np.sqrt(np.sum(a[iu] ** 2)) <= tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return -1
