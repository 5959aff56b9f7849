# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels (cyclic-order Jacobi, QSP sweeps).

Signatures and return conventions match ``_pykernels`` exactly.
"""
import numpy as np

from libc.math cimport sqrt, fabs, cos, sin

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex conj(double complex)
    double creal(double complex)

cdef double _EPS = np.finfo(float).eps


cdef inline void _rot(double a, double d, double complex b, double mag,
                      double *c, double *s, double complex *ph) noexcept nogil:
    cdef double theta = (d - a) / (2.0 * mag)
    cdef double t
    if theta >= 0:
        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
    else:
        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
    c[0] = 1.0 / sqrt(t * t + 1.0)
    s[0] = t * c[0]
    ph[0] = conj(b) / mag


def jacobi_eigh(a, double tol, int max_sweeps):
    cdef double complex[:, ::1] A = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    # rows of Vt are the columns of V
    Vt_arr = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] Vt = Vt_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef bint rotated = False
    cdef double app, aqq, mag, c, s, floor
    cdef double complex ph, cph, x, y, apq
    if n < 2:
        return np.real(np.diag(np.asarray(A))).copy(), Vt_arr, 0
    floor = _EPS * max(float(np.linalg.norm(np.asarray(A))), 1e-300) * 1e-2
    with nogil:
        for sweep in range(1, max_sweeps + 1):
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    mag = cabs(apq)
                    app = creal(A[p, p])
                    aqq = creal(A[q, q])
                    if mag <= floor or mag <= tol * sqrt(fabs(app * aqq)):
                        continue
                    rotated = True
                    _rot(app, aqq, apq, mag, &c, &s, &ph)
                    cph = conj(ph)
                    # rows p, q of J^dagger A; the 2x2 block is set explicitly below
                    for k in range(n):
                        x = A[p, k]
                        y = A[q, k]
                        A[p, k] = c * x - s * cph * y
                        A[q, k] = s * x + c * cph * y
                    # off-block columns follow from hermiticity of J^dagger A J
                    for k in range(n):
                        A[k, p] = conj(A[p, k])
                        A[k, q] = conj(A[q, k])
                    A[p, p] = app - s / c * mag
                    A[q, q] = aqq + s / c * mag
                    A[p, q] = 0
                    A[q, p] = 0
                    for k in range(n):
                        x = Vt[p, k]
                        y = Vt[q, k]
                        Vt[p, k] = c * x - s * cph * y
                        Vt[q, k] = s * x + c * cph * y
            if not rotated:
                break
    if rotated:
        return None, None, max_sweeps
    return np.real(np.diag(np.asarray(A))).copy(), np.ascontiguousarray(Vt_arr.T.conj()), sweep


def jacobi_svd(m, double tol, int max_sweeps):
    # work on the transpose so that columns of M are contiguous rows
    cdef double complex[:, ::1] G = np.array(np.asarray(m).T, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t ncol = G.shape[0]
    cdef Py_ssize_t nrow = G.shape[1]
    Vt_arr = np.eye(ncol, dtype=np.complex128)
    cdef double complex[:, ::1] Vt = Vt_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef bint rotated = False
    cdef double alpha, beta, mag, c, s, floor
    cdef double complex gamma, ph, x, y
    if ncol < 2:
        return np.asarray(G).T.copy(), Vt_arr.T.copy(), 0
    floor = (_EPS * max(float(np.linalg.norm(np.asarray(G))), 1e-300)) ** 2 * 1e-2
    with nogil:
        for sweep in range(1, max_sweeps + 1):
            rotated = False
            for p in range(ncol - 1):
                for q in range(p + 1, ncol):
                    alpha = 0
                    beta = 0
                    gamma = 0
                    for k in range(nrow):
                        x = G[p, k]
                        y = G[q, k]
                        alpha = alpha + creal(conj(x) * x)
                        beta = beta + creal(conj(y) * y)
                        gamma = gamma + conj(x) * y
                    mag = cabs(gamma)
                    if mag <= floor or mag <= tol * sqrt(alpha * beta):
                        continue
                    rotated = True
                    _rot(alpha, beta, gamma, mag, &c, &s, &ph)
                    for k in range(nrow):
                        x = G[p, k]
                        y = G[q, k]
                        G[p, k] = c * x - s * ph * y
                        G[q, k] = s * x + c * ph * y
                    for k in range(ncol):
                        x = Vt[p, k]
                        y = Vt[q, k]
                        Vt[p, k] = c * x - s * ph * y
                        Vt[q, k] = s * x + c * ph * y
            if not rotated:
                break
    if rotated:
        return None, None, max_sweeps
    return np.ascontiguousarray(np.asarray(G).T), np.ascontiguousarray(Vt_arr.T), sweep


def qsp_response(phases, x):
    cdef double[::1] ph = np.ascontiguousarray(phases, dtype=np.float64)
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t M = xs.shape[0]
    cdef Py_ssize_t d = ph.shape[0] - 1
    out_arr = np.empty(M, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double complex[::1] e = np.exp(1j * np.asarray(ph))
    cdef Py_ssize_t i, j
    cdef double complex l0, l1, a, b
    cdef double cth, sth
    with nogil:
        for i in range(M):
            cth = xs[i]
            sth = sqrt(max(1.0 - cth * cth, 0.0))
            l0 = 1
            l1 = 0
            for j in range(d):
                a = l0 * e[j]
                b = l1 * conj(e[j])
                l0 = a * cth + b * 1j * sth
                l1 = a * 1j * sth + b * cth
            out[i] = l0 * e[d]
    return out_arr


def qsp_gradient(phases, x):
    cdef double[::1] ph = np.ascontiguousarray(phases, dtype=np.float64)
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t M = xs.shape[0]
    cdef Py_ssize_t d = ph.shape[0] - 1
    P_arr = np.empty(M, dtype=np.complex128)
    D_arr = np.empty((M, d + 1), dtype=np.float64)
    left_arr = np.empty((d + 1, 2), dtype=np.complex128)
    e_arr = np.exp(1j * np.asarray(ph))
    cdef double complex[::1] P = P_arr
    cdef double[:, ::1] D = D_arr
    cdef double complex[:, ::1] left = left_arr
    cdef double complex[::1] e = e_arr
    cdef Py_ssize_t i, j
    cdef double complex l0, l1, r0, r1, a, b, ce
    cdef double cth, sth
    with nogil:
        for i in range(M):
            cth = xs[i]
            sth = sqrt(max(1.0 - cth * cth, 0.0))
            l0 = 1
            l1 = 0
            for j in range(d + 1):
                left[j, 0] = l0
                left[j, 1] = l1
                if j < d:
                    a = l0 * e[j]
                    b = l1 * conj(e[j])
                    l0 = a * cth + b * 1j * sth
                    l1 = a * 1j * sth + b * cth
            P[i] = l0 * e[d]
            r0 = 1
            r1 = 0
            for j in range(d, -1, -1):
                ce = conj(e[j])
                D[i, j] = creal(1j * (left[j, 0] * e[j] * r0 - left[j, 1] * ce * r1))
                if j > 0:
                    a = e[j] * r0
                    b = ce * r1
                    r0 = cth * a + 1j * sth * b
                    r1 = 1j * sth * a + cth * b
    return P_arr, D_arr
