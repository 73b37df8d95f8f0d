# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled eigensolver backend: cyclic Jacobi for Hermitian matrices.

Algorithmically identical to the pure-numpy twin in ``_kernel_py``; the batch
loop and the rotation updates run in C.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def jacobi_eigh(a_in, int max_sweeps=100, double tol=1e-14, bint want_vectors=True):
    """Batched cyclic-Jacobi diagonalization; see _kernel_py.jacobi_eigh."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] a = np.array(
        a_in, dtype=np.complex128, copy=True, order="C")
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("expected a (batch, n, n) array")
    cdef Py_ssize_t nb = a.shape[0], n = a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w = np.empty((nb, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] u = np.zeros((nb, n, n), dtype=np.complex128)

    cdef Py_ssize_t k, p, q, i, sweep, jmax
    cdef double fro2, off2, thresh, absb, app, aqq, tau, t, c, sig, tb, wmax
    cdef double complex apq, phase, s, sc, xp, xq
    cdef bint ok = True, converged

    for k in range(nb):
        for i in range(n):
            u[k, i, i] = 1.0
        fro2 = 0.0
        for p in range(n):
            for q in range(n):
                apq = a[k, p, q]
                fro2 += apq.real * apq.real + apq.imag * apq.imag
        thresh = tol * sqrt(fro2)
        converged = False
        for sweep in range(max_sweeps):
            off2 = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        apq = a[k, p, q]
                        off2 += apq.real * apq.real + apq.imag * apq.imag
            if sqrt(off2) <= thresh:
                converged = True
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[k, p, q]
                    absb = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                    if absb < 1e-300:
                        continue
                    app = a[k, p, p].real
                    aqq = a[k, q, q].real
                    tau = (aqq - app) / (2.0 * absb)
                    if tau >= 0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    phase = apq / absb
                    s = (t * c) * phase
                    sc = s.conjugate()
                    for i in range(n):
                        xp = a[k, i, p]
                        xq = a[k, i, q]
                        a[k, i, p] = xp * c - xq * sc
                        a[k, i, q] = xp * s + xq * c
                    for i in range(n):
                        xp = a[k, p, i]
                        xq = a[k, q, i]
                        a[k, p, i] = xp * c - xq * s
                        a[k, q, i] = xp * sc + xq * c
                    tb = t * absb
                    a[k, p, p] = app - tb
                    a[k, q, q] = aqq + tb
                    a[k, p, q] = 0.0
                    a[k, q, p] = 0.0
                    if want_vectors:
                        for i in range(n):
                            xp = u[k, i, p]
                            xq = u[k, i, q]
                            u[k, i, p] = xp * c - xq * sc
                            u[k, i, q] = xp * s + xq * c
        if not converged:
            ok = False
        for i in range(n):
            w[k, i] = a[k, i, i].real
        # selection sort, descending, carrying eigenvector columns along
        for p in range(n - 1):
            jmax = p
            wmax = w[k, p]
            for q in range(p + 1, n):
                if w[k, q] > wmax:
                    wmax = w[k, q]
                    jmax = q
            if jmax != p:
                w[k, jmax] = w[k, p]
                w[k, p] = wmax
                for i in range(n):
                    xp = u[k, i, p]
                    u[k, i, p] = u[k, i, jmax]
                    u[k, i, jmax] = xp
    return w, u, ok
