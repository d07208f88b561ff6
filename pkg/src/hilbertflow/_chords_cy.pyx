# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled chord-exit kernel: exponential march + bisection on half-space
membership. Hot loop behind every Hilbert distance / Finsler norm / transport
evaluation on polytope domains."""
import numpy as np

BACKEND = "compiled"


cdef inline bint _inside(const double[:, ::1] normals, const double[::1] offsets,
                         const double[::1] nx, const double[::1] nv, double t) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(offsets.shape[0]):
        if nx[i] + t * nv[i] > offsets[i]:
            return 0
    return 1


cdef double _ray_exit_core(const double[:, ::1] normals, const double[::1] offsets,
                           const double[::1] nx, const double[::1] nv,
                           double step0, double tol) noexcept nogil:
    cdef double lo = 0.0
    cdef double hi = step0
    cdef double mid
    cdef int it = 0
    if not _inside(normals, offsets, nx, nv, 0.0):
        return -1.0
    while _inside(normals, offsets, nx, nv, hi):
        lo = hi
        hi *= 2.0
        it += 1
        if it > 200:
            return -2.0
    it = 0
    while hi - lo > tol and it < 200:
        mid = 0.5 * (lo + hi)
        if _inside(normals, offsets, nx, nv, mid):
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi)


def ray_exit(normals, offsets, x, v, double step0, double tol,
             int max_double=200, int max_bisect=200):
    cdef const double[:, ::1] N = np.ascontiguousarray(normals, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(offsets, dtype=np.float64)
    nx_arr = np.ascontiguousarray(normals @ x, dtype=np.float64)
    nv_arr = np.ascontiguousarray(normals @ v, dtype=np.float64)
    cdef const double[::1] nx = nx_arr
    cdef const double[::1] nv = nv_arr
    return _ray_exit_core(N, c, nx, nv, step0, tol)


def ray_exit_batch(normals, offsets, xs, vs, double step0, double tol):
    cdef const double[:, ::1] N = np.ascontiguousarray(normals, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(offsets, dtype=np.float64)
    NX = np.ascontiguousarray(np.asarray(xs) @ np.asarray(normals).T, dtype=np.float64)
    NV = np.ascontiguousarray(np.asarray(vs) @ np.asarray(normals).T, dtype=np.float64)
    cdef const double[:, ::1] nxs = NX
    cdef const double[:, ::1] nvs = NV
    out_arr = np.empty(NX.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(nxs.shape[0]):
            out[i] = _ray_exit_core(N, c, nxs[i], nvs[i], step0, tol)
    return out_arr
