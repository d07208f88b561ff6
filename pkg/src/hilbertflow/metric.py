"""Hilbert metric, Finsler norm, explicit geodesic flow, and the numeric
parallel-transport norm on a convex domain.

All distances below are Euclidean lengths in the domain's chart; the Hilbert
quantities are projective invariants of the four collinear points involved.
"""
from __future__ import annotations

import numpy as np

from hilbertflow.domains import ConvexDomain, LineSection, boundary_points
from hilbertflow.projlin import (GeometryError, GroupElement,
                                 projective_action, projective_tangent)


def hilbert_distance(dom: ConvexDomain, a, b) -> float:
    """Half the log cross-ratio of (a, b) against the chord endpoints."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.array_equal(a, b):
        return 0.0
    sec = boundary_points(dom, a, b - a)
    a_minus, b_plus = sec.x_minus, sec.x_plus
    num = np.linalg.norm(b_plus - a) * np.linalg.norm(b - a_minus)
    den = np.linalg.norm(b_plus - b) * np.linalg.norm(a - a_minus)
    return 0.5 * float(np.log(num / den))


def finsler_norm(dom: ConvexDomain, x, v) -> float:
    """Infinitesimal Hilbert norm: half the sum of inverse distances to the
    two boundary points of the chord through x in direction v, times |v|."""
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    sec = boundary_points(dom, x, v)
    return 0.5 * (1.0 / sec.dist_plus + 1.0 / sec.dist_minus) * float(nv)


def m_value(dom: ConvexDomain, x, v) -> float:
    """Time-change factor between the Hilbert and Euclidean generators:
    2 |x+ - x| |x - x-| / |x+ - x-|."""
    sec = boundary_points(dom, x, v)
    return 2.0 * sec.dist_plus * sec.dist_minus / sec.length


def geodesic_at_time(sec: LineSection, t: float) -> np.ndarray:
    """Point at Hilbert time t from sec.x toward sec.x_plus (t may be < 0)."""
    A = sec.dist_minus
    B = sec.dist_plus
    e = np.exp(-2.0 * t)
    s = A * B * (1.0 - e) / (A + B * e)
    return sec.at_parameter(s)


def f_factor(sec: LineSection, t: float) -> float:
    """Norm factor of the transport cocycle along the chord:
    (1/2) |x- - x+| / (|x- - x| e^t + |x - x+| e^{-t})."""
    return 0.5 * sec.length / (sec.dist_minus * np.exp(t)
                               + sec.dist_plus * np.exp(-t))


def transport_norm_along_orbit(dom: ConvexDomain, sec: LineSection, z0, t,
                               fold: GroupElement | None = None) -> float:
    """Transport norm after Hilbert time t of the vector with chart value z0
    at sec.x, held Euclidean-constant along the chord:
    f(sec, t) * F(x_t, z0).

    When ``fold`` is supplied (a group element mapping the time-t point back
    into a reference region, typically g^{-1} over one period of its axis),
    the norm is evaluated in translated form F(fold.x_t, d(fold) z0), which
    agrees with the plain form on an invariant domain.
    """
    z0 = np.asarray(z0, dtype=float)
    x_t = geodesic_at_time(sec, t)
    if fold is None:
        return f_factor(sec, t) * finsler_norm(dom, x_t, z0)
    y = projective_action(fold, x_t, dom.chart)
    zy = projective_tangent(fold, x_t, z0, dom.chart)
    return f_factor(sec, t) * finsler_norm(dom, y, zy)


def transport_log_norms_periodic(dom: ConvexDomain, sec: LineSection,
                                 g: GroupElement, z0, periods: int,
                                 period: float) -> np.ndarray:
    """log N(k*T) for k = 0..periods along the closed orbit of g through
    sec.x, evaluated stably by folding the transported vector back with
    g^{-1} after each period (the translated form of the transport norm).

    Requires sec to be the axis section of g (x_plus its attracting point)
    and the domain to be (approximately) g-invariant.
    """
    ginv = g.inverse()
    z = np.asarray(z0, dtype=float)
    x_T = geodesic_at_time(sec, period)
    log_f = np.log(f_factor(sec, period))
    out = [np.log(0.5 * finsler_norm(dom, sec.x, z))]
    acc = 0.0
    for _ in range(periods):
        end = log_f + np.log(finsler_norm(dom, x_T, z))
        acc += end - np.log(0.5 * finsler_norm(dom, sec.x, z))
        out.append(out[0] + acc)
        z_next = projective_tangent(ginv, x_T, z, dom.chart)
        nz = np.linalg.norm(z_next)
        if nz == 0 or not np.isfinite(nz):
            raise GeometryError("transport fold degenerated")
        z = z_next / nz
    return np.array(out)
