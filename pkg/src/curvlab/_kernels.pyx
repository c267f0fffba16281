# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: triple-sum form assembly and the finite-difference ratio sweep."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def assemble_forms(int n, const long[::1] indptr, const long[::1] indices,
                   const double[::1] qv, const double[::1] pi, const double[::1] rho,
                   const double[::1] p1, const double[::1] rh, const double[::1] lrho):
    cdef cnp.ndarray[double, ndim=2] A = np.zeros((n, n))
    cdef cnp.ndarray[double, ndim=2] B = np.zeros((n, n))
    cdef cnp.ndarray[double, ndim=2] D = np.zeros((n, n))
    cdef double[:, ::1] Av = A
    cdef double[:, ::1] Bv = B
    cdef double[:, ::1] Dv = D
    cdef Py_ssize_t y, a, b, x, z
    cdef double w, s, k, qyx, qyz, py, ry
    for x in range(n):
        for a in range(indptr[x], indptr[x + 1]):
            y = indices[a]
            w = qv[a] * pi[x]
            # energy form
            Av[x, x] += w * rh[a]
            Av[x, y] -= w * rh[a]
            # Laplacian-of-rho part: weight 0.5 pi_x Lrho_x p1 Q on (f_y - f_x)^2
            s = 0.5 * pi[x] * lrho[x] * p1[a] * qv[a]
            Bv[x, x] += s
            Bv[y, y] += s
            Bv[x, y] -= s
            Bv[y, x] -= s
    for y in range(n):
        py = pi[y]
        ry = rho[y]
        for a in range(indptr[y], indptr[y + 1]):
            x = indices[a]
            qyx = qv[a]
            for b in range(indptr[y], indptr[y + 1]):
                z = indices[b]
                qyz = qv[b]
                # mixed energy: 0.5 q_xyz (rh_xy + rh_zy) (e_y - e_x)(e_y - e_z)^T
                k = 0.5 * py * qyx * qyz * (rh[a] + rh[b])
                Bv[y, y] += k
                Bv[y, z] -= k
                Bv[x, y] -= k
                Bv[x, z] += k
                k = py * ry * qyx * qyz
                Dv[y, y] += k
                Dv[y, z] -= k
                Dv[x, y] -= k
                Dv[x, z] += k
    return A, 0.5 * (B + B.T), 0.5 * (D + D.T)


def ratio_fd(int n, const long[::1] indptr, const long[::1] indices,
             const double[::1] qv, const double[::1] pi, const double[::1] rho,
             const double[::1] f, const double[::1] p1m, const double[::1] p10,
             const double[::1] p1p, double h, double invN):
    cdef cnp.ndarray[double, ndim=1] out_p = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] out_m = np.empty(n)
    cdef double[::1] lf = np.zeros(n)
    cdef double[::1] g1 = np.empty(indices.shape[0])
    cdef double[::1] g2 = np.empty(indices.shape[0])
    cdef double[::1] r = np.empty(n)
    cdef double[::1] lr = np.empty(n)
    cdef Py_ssize_t x, y, a, k, sgn
    cdef double fac, A, B, D, p, gr, acc
    for x in range(n):
        acc = 0.0
        for a in range(indptr[x], indptr[x + 1]):
            acc += qv[a] * (f[indices[a]] - f[x])
        lf[x] = acc
    for x in range(n):
        for a in range(indptr[x], indptr[x + 1]):
            y = indices[a]
            gr = f[y] - f[x]
            g1[a] = qv[a] * gr * gr
            g2[a] = qv[a] * gr * (lf[y] - lf[x])
    for sgn in range(2):
        fac = exp(h) if sgn == 0 else exp(-h)
        for k in range(n):
            for x in range(n):
                r[x] = rho[x]
            r[k] = rho[k] * fac
            for x in range(n):
                acc = 0.0
                for a in range(indptr[x], indptr[x + 1]):
                    acc += qv[a] * (r[indices[a]] - r[x])
                lr[x] = acc
            A = 0.0
            B = 0.0
            D = 0.0
            for x in range(n):
                D += r[x] * pi[x] * lf[x] * lf[x]
                for a in range(indptr[x], indptr[x + 1]):
                    y = indices[a]
                    p = p10[a]
                    if x == k:
                        p = p1m[a] if sgn == 0 else p1p[a]
                    elif y == k:
                        p = p1p[a] if sgn == 0 else p1m[a]
                    A += pi[x] * r[x] * p * g1[a]
                    B += pi[x] * p * (0.5 * lr[x] * g1[a] - r[x] * g2[a])
            if sgn == 0:
                out_p[k] = (B - invN * D) / A
            else:
                out_m[k] = (B - invN * D) / A
    return out_p, out_m
