# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: batched polytope membership, Dykstra projection
onto halfspace intersections, and ellipsoid nearest-point projection.

Mirrors corrineq._kernels.pure; selected at import by corrineq._kernels.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()


def polytope_contains(double[:, ::1] normals not None,
                      double[::1] offsets not None,
                      double[:, ::1] pts not None):
    cdef Py_ssize_t n = pts.shape[0], d = pts.shape[1], m = normals.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double dot
    out = np.ones(n, dtype=bool)
    cdef cnp.uint8_t[::1] ov = out.view(np.uint8)
    with nogil:
        for i in range(n):
            for j in range(m):
                dot = 0.0
                for k in range(d):
                    dot += normals[j, k] * pts[i, k]
                if dot > offsets[j]:
                    ov[i] = 0
                    break
    return out


def polytope_project(double[:, ::1] normals not None,
                     double[::1] offsets not None,
                     pts_in, double tol, long max_sweeps):
    pts = np.ascontiguousarray(np.atleast_2d(pts_in), dtype=np.float64)
    cdef double[:, ::1] p = pts
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1], m = normals.shape[0]
    proj = pts.copy()
    converged = np.ones(n, dtype=bool)
    sweeps = np.zeros(n, dtype=np.int64)
    cdef double[:, ::1] x = proj
    cdef cnp.uint8_t[::1] conv = converged.view(np.uint8)
    cdef long[::1] sw = sweeps
    cdef double[::1] nrm2 = np.einsum("ij,ij->i", normals, normals)
    cdef Py_ssize_t i, j, k, s
    cdef double dot, viol, change, diff, xk, maxviol, feas_tol
    cdef bint inside
    cdef double *corr
    cdef double *xprev
    # stopping needs feasibility too: the sweep change can plateau near
    # zero while the iterate is still far outside the polytope
    feas_tol = 0.0
    for j in range(m):
        if offsets[j] > feas_tol:
            feas_tol = offsets[j]
        elif -offsets[j] > feas_tol:
            feas_tol = -offsets[j]
    feas_tol = 1e3 * tol * (1.0 + feas_tol)
    with nogil:
        corr = <double *> malloc(m * d * sizeof(double))
        xprev = <double *> malloc(d * sizeof(double))
        if corr == NULL or xprev == NULL:
            with gil:
                raise MemoryError()
        for i in range(n):
            inside = True
            for j in range(m):
                dot = 0.0
                for k in range(d):
                    dot += normals[j, k] * x[i, k]
                if dot > offsets[j]:
                    inside = False
                    break
            if inside:
                continue
            for j in range(m * d):
                corr[j] = 0.0
            conv[i] = 0
            for s in range(max_sweeps):
                for k in range(d):
                    xprev[k] = x[i, k]
                for j in range(m):
                    dot = 0.0
                    for k in range(d):
                        xk = x[i, k] + corr[j * d + k]
                        x[i, k] = xk
                        dot += normals[j, k] * xk
                    viol = (dot - offsets[j]) / nrm2[j]
                    if viol < 0.0:
                        viol = 0.0
                    for k in range(d):
                        corr[j * d + k] = viol * normals[j, k]
                        x[i, k] -= corr[j * d + k]
                change = 0.0
                for k in range(d):
                    diff = x[i, k] - xprev[k]
                    change += diff * diff
                sw[i] = s + 1
                if sqrt(change) < tol:
                    maxviol = 0.0
                    for j in range(m):
                        dot = 0.0
                        for k in range(d):
                            dot += normals[j, k] * x[i, k]
                        if dot - offsets[j] > maxviol:
                            maxviol = dot - offsets[j]
                    if maxviol <= feas_tol:
                        conv[i] = 1
                        break
        free(corr)
        free(xprev)
    return proj, converged, sweeps


def ellipsoid_contains(double[::1] semi_axes not None, double[:, ::1] pts not None):
    cdef Py_ssize_t n = pts.shape[0], d = pts.shape[1]
    cdef Py_ssize_t i, k
    cdef double q, z
    out = np.empty(n, dtype=bool)
    cdef cnp.uint8_t[::1] ov = out.view(np.uint8)
    with nogil:
        for i in range(n):
            q = 0.0
            for k in range(d):
                z = pts[i, k] / semi_axes[k]
                q += z * z
            ov[i] = q <= 1.0
    return out


def ellipsoid_project(double[::1] semi_axes not None, pts_in, double tol):
    pts = np.ascontiguousarray(np.atleast_2d(pts_in), dtype=np.float64)
    cdef double[:, ::1] p = pts
    cdef Py_ssize_t n = p.shape[0], d = p.shape[1]
    proj = pts.copy()
    cdef double[:, ::1] x = proj
    cdef double[::1] a = semi_axes
    cdef Py_ssize_t i, k, it
    cdef double q, z, lo, hi, mid, g
    with nogil:
        for i in range(n):
            q = 0.0
            for k in range(d):
                z = x[i, k] / a[k]
                q += z * z
            if q <= 1.0:
                continue
            lo = 0.0
            hi = 0.0
            for k in range(d):
                hi += a[k] * a[k] * x[i, k] * x[i, k]
            hi = sqrt(hi)
            for it in range(200):
                mid = 0.5 * (lo + hi)
                g = -1.0
                for k in range(d):
                    z = a[k] * x[i, k] / (a[k] * a[k] + mid)
                    g += z * z
                if g > 0.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= tol * (1.0 + lo):
                    break
            mid = 0.5 * (lo + hi)
            for k in range(d):
                x[i, k] = a[k] * a[k] * x[i, k] / (a[k] * a[k] + mid)
    return proj
