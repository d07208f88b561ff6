"""Pure-numpy fallback for the chord-exit kernel.

Same contract as the compiled version in ``_chords_cy.pyx``: given a convex
region {p : N p <= c}, find the exit parameter of the ray x + t v (t > 0) by
an exponential march to bracket the boundary followed by bisection on
membership, to absolute tolerance ``tol`` in t.
"""
import numpy as np

BACKEND = "python"


def ray_exit(normals, offsets, x, v, step0, tol, max_double=200, max_bisect=200):
    nx = normals @ x
    nv = normals @ v
    if np.any(nx > offsets):
        return -1.0  # x not inside
    lo = 0.0
    hi = float(step0)
    it = 0
    while np.all(nx + hi * nv <= offsets):
        lo = hi
        hi *= 2.0
        it += 1
        if it > max_double:
            return -2.0  # unbounded in this direction
    for _ in range(max_bisect):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if np.all(nx + mid * nv <= offsets):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ray_exit_batch(normals, offsets, xs, vs, step0, tol):
    out = np.empty(len(xs))
    for i in range(len(xs)):
        out[i] = ray_exit(normals, offsets, xs[i], vs[i], step0, tol)
    return out
