# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled periodic stencils on an N^4 lattice.

Same contracts as ``_kernels_py``; summation order is fixed per node so
results are deterministic.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _neighbours(Py_ssize_t n, Py_ssize_t[:] up, Py_ssize_t[:] dn) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(n):
        up[i] = i + 1 if i + 1 < n else 0
        dn[i] = i - 1 if i > 0 else n - 1


def laplacian(const double[:, :, :, ::1] phi, double h):
    """Positive flat Laplacian ``-sum_a D_a^+ D_a^- phi`` with periodic wrap."""
    cdef Py_ssize_t n = phi.shape[0]
    cdef Py_ssize_t i, j, k, l
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double c, acc
    out_arr = np.empty((n, n, n, n), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    up_arr = np.empty(n, dtype=np.intp)
    dn_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[:] up = up_arr
    cdef Py_ssize_t[:] dn = dn_arr
    _neighbours(n, up, dn)
    with nogil:
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        c = phi[i, j, k, l]
                        acc = 8.0 * c
                        acc = acc - phi[up[i], j, k, l] - phi[dn[i], j, k, l]
                        acc = acc - phi[i, up[j], k, l] - phi[i, dn[j], k, l]
                        acc = acc - phi[i, j, up[k], l] - phi[i, j, dn[k], l]
                        acc = acc - phi[i, j, k, up[l]] - phi[i, j, k, dn[l]]
                        out[i, j, k, l] = acc * inv_h2
    return out_arr


cdef inline double _flux(double c0, double c1, double p0, double p1) noexcept nogil:
    return 0.5 * (c0 + c1) * (p1 - p0)


def div_grad(const double[:, :, :, ::1] phi, const double[:, :, :, ::1] coef, double h):
    """Conservative ``-div(coef grad phi)`` with arithmetic face averages of ``coef``."""
    cdef Py_ssize_t n = phi.shape[0]
    cdef Py_ssize_t i, j, k, l
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double c, p, acc
    out_arr = np.empty((n, n, n, n), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    up_arr = np.empty(n, dtype=np.intp)
    dn_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[:] up = up_arr
    cdef Py_ssize_t[:] dn = dn_arr
    _neighbours(n, up, dn)
    with nogil:
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        c = coef[i, j, k, l]
                        p = phi[i, j, k, l]
                        acc = 0.0
                        acc = acc - _flux(c, coef[up[i], j, k, l], p, phi[up[i], j, k, l]) \
                                  + _flux(coef[dn[i], j, k, l], c, phi[dn[i], j, k, l], p)
                        acc = acc - _flux(c, coef[i, up[j], k, l], p, phi[i, up[j], k, l]) \
                                  + _flux(coef[i, dn[j], k, l], c, phi[i, dn[j], k, l], p)
                        acc = acc - _flux(c, coef[i, j, up[k], l], p, phi[i, j, up[k], l]) \
                                  + _flux(coef[i, j, dn[k], l], c, phi[i, j, dn[k], l], p)
                        acc = acc - _flux(c, coef[i, j, k, up[l]], p, phi[i, j, k, up[l]]) \
                                  + _flux(coef[i, j, k, dn[l]], c, phi[i, j, k, dn[l]], p)
                        out[i, j, k, l] = acc * inv_h2
    return out_arr
