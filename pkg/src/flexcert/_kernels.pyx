# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# Compiled hot loops. Must stay behaviour-identical to _kernels_py.py.
from libc.math cimport fabs, sqrt

cdef double TIE_REL = 1e-12


cdef void _pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t c) noexcept nogil:
    cdef Py_ssize_t m1 = T.shape[0], n1 = T.shape[1], i, j
    cdef double p = T[r, c], f
    for j in range(n1):
        T[r, j] /= p
    T[r, c] = 1.0
    for i in range(m1):
        if i == r:
            continue
        f = T[i, c]
        if f != 0.0:
            for j in range(n1):
                T[i, j] -= f * T[r, j]
            T[i, c] = 0.0


def pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t c):
    _pivot(T, r, c)


def simplex_run(double[:, ::1] T, Py_ssize_t[::1] basis,
                const unsigned char[::1] allowed, long max_iter,
                double opt_tol, double piv_tol, long bland_after):
    """Primal simplex on a tableau whose last row holds reduced costs and -z.

    Returns (status, iterations): 0 optimal, 1 unbounded, 2 iteration cap.
    """
    cdef long it = 0
    cdef int status
    with nogil:
        status = _simplex(T, basis, allowed, max_iter, opt_tol, piv_tol,
                          bland_after, &it)
    return status, it


cdef int _simplex(double[:, ::1] T, Py_ssize_t[::1] basis,
                  const unsigned char[::1] allowed, long max_iter,
                  double opt_tol, double piv_tol, long bland_after,
                  long* it_out) noexcept nogil:
    cdef Py_ssize_t m = T.shape[0] - 1, n = T.shape[1] - 1
    cdef Py_ssize_t i, j, col, row
    cdef long it = 0, degenerate = 0
    cdef double best_rc, ratio, best, a, lim
    while it < max_iter:
        col = -1
        best_rc = -opt_tol
        if degenerate >= bland_after:
            for j in range(n):
                if allowed[j] and T[m, j] < -opt_tol:
                    col = j
                    break
        else:
            for j in range(n):
                if allowed[j] and T[m, j] < best_rc:
                    best_rc = T[m, j]
                    col = j
        if col < 0:
            it_out[0] = it
            return 0
        row = -1
        best = 0.0
        for i in range(m):
            a = T[i, col]
            if a > piv_tol:
                ratio = T[i, n]
                if ratio < 0.0:
                    ratio = 0.0
                ratio = ratio / a
                if row < 0 or ratio < best:
                    best = ratio
                    row = i
        if row < 0:
            it_out[0] = it
            return 1
        lim = best + TIE_REL * (1.0 + best)
        for i in range(m):
            a = T[i, col]
            if a > piv_tol:
                ratio = T[i, n]
                if ratio < 0.0:
                    ratio = 0.0
                if ratio / a <= lim and basis[i] < basis[row]:
                    row = i
        if best <= TIE_REL:
            degenerate += 1
        _pivot(T, row, col)
        basis[row] = col
        it += 1
    it_out[0] = it
    return 2


def jacobi_eigen(double[:, ::1] a, double[:, ::1] v, long max_sweeps, double tol):
    """Cyclic Jacobi on symmetric ``a`` in place; rotations accumulate into ``v``.

    Returns the number of sweeps used, or -1 when the cap was hit.
    """
    cdef long r
    with nogil:
        r = _jacobi(a, v, max_sweeps, tol)
    return r


cdef long _jacobi(double[:, ::1] a, double[:, ::1] v, long max_sweeps,
                  double tol) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0], p, q, k
    cdef long sweep
    cdef double off, theta, t, c, s, akp, akq
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if sqrt(off) <= tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n):
            for q in range(p + 1, n):
                if fabs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    akp = v[k, p]
                    akq = v[k, q]
                    v[k, p] = c * akp - s * akq
                    v[k, q] = s * akp + c * akq
    return -1
