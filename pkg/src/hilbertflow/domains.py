"""Properly convex domains in an affine chart: membership, chords, I/O.

Three representations are supported: ellipsoid (center + positive quadratic
form), half-space list, and polygon vertex loop (n = 2 only). Line-boundary
intersection is closed form for ellipsoids and march+bisection on membership
for the polytope kinds (the compiled kernel, when built).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from hilbertflow import kernels
from hilbertflow.projlin import AffineChart, GeometryError, standard_chart

_BISECT_RTOL = 1e-12


@dataclass(frozen=True)
class ConvexDomain:
    """Bounded convex body in a fixed affine chart.

    kind      "ellipsoid" | "halfspaces" | "polygon"
    center/form        ellipsoid data ((x-c)^T Q (x-c) < 1)
    normals/offsets    half-space data (N x <= c), also derived for polygons
    vertices           polygon vertex loop (counterclockwise), n = 2 only
    base_point         declared interior point
    """

    kind: str
    dim: int
    chart: AffineChart
    base_point: np.ndarray
    center: np.ndarray | None = None
    form: np.ndarray | None = None
    normals: np.ndarray | None = None
    offsets: np.ndarray | None = None
    vertices: np.ndarray | None = None

    def __post_init__(self):
        for name in ("base_point", "center", "form", "normals", "offsets", "vertices"):
            a = getattr(self, name)
            if a is not None:
                a = np.asarray(a, dtype=float).copy()
                a.setflags(write=False)
                object.__setattr__(self, name, a)

    @property
    def diameter(self) -> float:
        if self.kind == "ellipsoid":
            w = np.linalg.eigvalsh(self.form)
            return float(2.0 / np.sqrt(w.min()))
        return float(np.ptp(self.vertices, axis=0).max()) if self.kind == "polygon" \
            else float(self._halfspace_diameter())

    def _halfspace_diameter(self):
        # crude but robust: max chord length over coordinate directions
        total = 0.0
        for i in range(self.dim):
            v = np.zeros(self.dim)
            v[i] = 1.0
            sec = boundary_points(self, self.base_point, v)
            total = max(total, float(np.linalg.norm(sec.x_plus - sec.x_minus)))
        return total


def ellipsoid(center, form, chart: AffineChart | None = None,
              base_point=None) -> ConvexDomain:
    center = np.asarray(center, dtype=float)
    form = np.asarray(form, dtype=float)
    n = center.shape[0]
    w = np.linalg.eigvalsh(0.5 * (form + form.T))
    if w.min() <= 0:
        raise GeometryError("ellipsoid form must be positive definite")
    return ConvexDomain(
        kind="ellipsoid", dim=n, chart=chart or standard_chart(n),
        base_point=center if base_point is None else np.asarray(base_point, float),
        center=center, form=0.5 * (form + form.T),
    )


def from_halfspaces(normals, offsets, base_point, chart=None,
                    check=True) -> ConvexDomain:
    normals = np.asarray(normals, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    base = np.asarray(base_point, dtype=float)
    n = normals.shape[1]
    dom = ConvexDomain(kind="halfspaces", dim=n, chart=chart or standard_chart(n),
                       base_point=base, normals=normals, offsets=offsets)
    if check:
        _validate_polytope(dom)
    return dom


def from_polygon(vertices, chart=None, base_point=None, check=True) -> ConvexDomain:
    """Convex polygon from a counterclockwise vertex loop (n = 2)."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise GeometryError("polygon vertices must be an (m, 2) array")
    if _signed_area(v) < 0:
        v = v[::-1]
    e = np.roll(v, -1, axis=0) - v
    normals = np.stack([e[:, 1], -e[:, 0]], axis=1)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = np.sum(normals * v, axis=1)
    base = v.mean(axis=0) if base_point is None else np.asarray(base_point, float)
    dom = ConvexDomain(kind="polygon", dim=2, chart=chart or standard_chart(2),
                       base_point=base, vertices=v, normals=normals, offsets=offsets)
    if check:
        _validate_polytope(dom)
    return dom


def _signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def _validate_polytope(dom, n_probe=16, seed=0):
    if not contains(dom, dom.base_point, tol=-1e-12):
        raise GeometryError("base point is not interior")
    rng = np.random.default_rng(seed)
    # boundedness: random rays must exit
    for _ in range(n_probe):
        v = rng.standard_normal(dom.dim)
        t = kernels.ray_exit(dom.normals, dom.offsets, dom.base_point,
                             v / np.linalg.norm(v), 1.0, 1e-9)
        if t == -2.0:
            raise GeometryError("domain is unbounded in the chart")
    # convexity probe (midpoints of member pairs are members) is automatic
    # for half-space intersections; probe flat chords instead
    _flatness_probe(dom, rng)


def _flatness_probe(dom, rng, n_probe=8):
    scale = max(np.abs(dom.offsets).max(), 1.0)
    for _ in range(n_probe):
        v = rng.standard_normal(dom.dim)
        v /= np.linalg.norm(v)
        off = rng.standard_normal(dom.dim)
        off -= v * (off @ v)
        off *= 1e-6 * scale / max(np.linalg.norm(off), 1e-300)
        try:
            s1 = boundary_points(dom, dom.base_point, v)
            s2 = boundary_points(dom, dom.base_point + off, v)
        except GeometryError:
            continue
        if np.linalg.norm(s1.x_plus - s2.x_plus) < 1e-9 * scale or \
                np.linalg.norm(s1.x_minus - s2.x_minus) < 1e-9 * scale:
            warnings.warn(
                "boundary appears flat along a chord direction; Hilbert "
                "quantities may degenerate there", stacklevel=3)
            return


# ---------------------------------------------------------------------------
# membership and boundary


def contains(dom: ConvexDomain, p, tol: float = 0.0) -> bool:
    """Membership with signed slack: tol > 0 accepts a shell around the body."""
    p = np.asarray(p, dtype=float)
    if dom.kind == "ellipsoid":
        d = p - dom.center
        return bool(d @ dom.form @ d <= 1.0 + tol)
    return bool(np.all(dom.normals @ p <= dom.offsets + tol))


def boundary_distance(dom: ConvexDomain, p) -> float:
    """Euclidean distance to the boundary, positive inside, negative outside."""
    p = np.asarray(p, dtype=float)
    if dom.kind == "ellipsoid":
        d = p - dom.center
        r = np.sqrt(d @ dom.form @ d)
        if r < 1e-14:
            w = np.linalg.eigvalsh(dom.form)
            return float(1.0 / np.sqrt(w.max()))
        # distance along the ray through p (exact on the ray, a good proxy)
        return float((1.0 - r) * np.linalg.norm(d) / r) if r > 0 else 0.0
    slack = (dom.offsets - dom.normals @ p) / np.linalg.norm(dom.normals, axis=1)
    return float(slack.min())


@dataclass(frozen=True)
class LineSection:
    """Oriented chord data: boundary endpoints and an interior point on it."""

    x_minus: np.ndarray
    x: np.ndarray
    x_plus: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        for name in ("x_minus", "x", "x_plus", "direction"):
            a = np.asarray(getattr(self, name), dtype=float).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def dist_minus(self) -> float:
        return float(np.linalg.norm(self.x - self.x_minus))

    @property
    def dist_plus(self) -> float:
        return float(np.linalg.norm(self.x_plus - self.x))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.x_plus - self.x_minus))

    def at_parameter(self, s: float) -> np.ndarray:
        """Point at signed Euclidean arclength s from x toward x_plus."""
        return self.x + s * self.direction


def boundary_points(dom: ConvexDomain, x, v) -> LineSection:
    """Intersections of the line x + t v with the boundary, ordered so x_minus
    is hit for t < 0. Closed form on ellipsoids, bisection otherwise."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0.0 or not np.isfinite(nv):
        raise GeometryError("direction must be a nonzero vector")
    u = v / nv
    if not contains(dom, x, tol=-1e-14):
        raise GeometryError("point must be strictly interior")
    if dom.kind == "ellipsoid":
        d = x - dom.center
        a = u @ dom.form @ u
        b = 2.0 * (d @ dom.form @ u)
        c = d @ dom.form @ d - 1.0
        disc = b * b - 4.0 * a * c
        if disc <= 0:
            raise GeometryError("point must be strictly interior")
        r = np.sqrt(disc)
        t_minus = (-b - r) / (2.0 * a)
        t_plus = (-b + r) / (2.0 * a)
    else:
        scale = max(np.abs(dom.offsets).max(), 1.0)
        tol = _BISECT_RTOL * scale
        t_plus = kernels.ray_exit(dom.normals, dom.offsets, x, u, scale, tol)
        t_minus = -kernels.ray_exit(dom.normals, dom.offsets, x, -u, scale, tol)
        if t_plus <= 0 or t_minus >= 0:
            raise GeometryError("point must be strictly interior")
    return LineSection(x_minus=x + t_minus * u, x=x, x_plus=x + t_plus * u,
                       direction=u)


def section_through(dom: ConvexDomain, a, b) -> LineSection:
    """Section of the chord through two distinct interior points, oriented
    from a toward b; the stored interior point is a."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return boundary_points(dom, a, b - a)


# ---------------------------------------------------------------------------
# projective re-expression


def reexpress(dom: ConvexDomain, new_chart: AffineChart) -> ConvexDomain:
    """The same projective body, represented in another affine chart.

    Ellipsoids map through the homogeneous quadric; polytopes map their
    vertices (polygon) or facet covectors (halfspaces). Raises if the body
    meets the new chart's hyperplane at infinity.
    """
    old = dom.chart
    base_hom = old.from_chart(dom.base_point)
    new_base = new_chart.to_chart(base_hom)
    if dom.kind == "ellipsoid":
        n = dom.dim
        Mq = np.zeros((n + 1, n + 1))
        Mq[:n, :n] = dom.form
        Mq[:n, n] = -dom.form @ dom.center
        Mq[n, :n] = -dom.form @ dom.center
        Mq[n, n] = dom.center @ dom.form @ dom.center - 1.0
        # affine (x, 1) coordinates relate to chart frames by (x, 1) ~ R T p
        # with R the cyclic permutation moving the normalizer last
        R = np.zeros((n + 1, n + 1))
        R[:n, 1:] = np.eye(n)
        R[n, 0] = 1.0
        S_old = R @ old.T
        S_new = R @ new_chart.T
        Mh = S_old.T @ Mq @ S_old
        S_new_inv = np.linalg.inv(S_new)
        Mq2 = S_new_inv.T @ Mh @ S_new_inv
        hb = np.append(new_base, 1.0)
        if hb @ Mq2 @ hb > 0:
            Mq2 = -Mq2
        Q = Mq2[:n, :n]
        bvec = Mq2[:n, n]
        cen = -np.linalg.solve(Q, bvec)
        r = cen @ Q @ cen - Mq2[n, n]
        if r <= 0 or np.linalg.eigvalsh(Q / r).min() <= 0:
            raise GeometryError("body is unbounded in the target chart")
        return ellipsoid(cen, Q / r, chart=new_chart, base_point=new_base)
    if dom.kind == "polygon":
        hv = old.from_chart(dom.vertices)
        return from_polygon(new_chart.to_chart(hv), chart=new_chart,
                            base_point=new_base, check=False)
    # halfspaces: covector (n, -c) in lift coords transforms by the inverse
    hv_pts = _halfspace_probe_points(dom)
    hom = old.from_chart(hv_pts)
    pts = new_chart.to_chart(hom)
    from scipy.spatial import ConvexHull

    hull = ConvexHull(pts)
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    return from_halfspaces(normals, offsets, new_base, chart=new_chart, check=False)


def _halfspace_probe_points(dom, m=None):
    """Vertices of a halfspace body via ray shooting (exact for polytopes when
    facets are in generic position; adequate for re-expression)."""
    from scipy.spatial import HalfspaceIntersection

    hs = np.column_stack([dom.normals, -dom.offsets])
    inter = HalfspaceIntersection(hs, dom.base_point)
    return inter.intersections


def sample_boundary(dom: ConvexDomain, m: int, rng) -> np.ndarray:
    """m boundary points by ray shooting from the base point."""
    out = np.empty((m, dom.dim))
    for i in range(m):
        v = rng.standard_normal(dom.dim)
        sec = boundary_points(dom, dom.base_point, v)
        out[i] = sec.x_plus
    return out


# ---------------------------------------------------------------------------
# JSON I/O (geometry in chart coordinates, row-major, 64-bit floats)


def domain_to_json(dom: ConvexDomain) -> dict:
    doc = {"kind": dom.kind, "dim": dom.dim,
           "base_point": dom.base_point.tolist()}
    if dom.kind == "ellipsoid":
        doc["center"] = dom.center.tolist()
        doc["form"] = dom.form.tolist()
    elif dom.kind == "polygon":
        doc["vertices"] = dom.vertices.tolist()
    else:
        doc["normals"] = dom.normals.tolist()
        doc["offsets"] = dom.offsets.tolist()
    return doc


def domain_from_json(doc: dict) -> ConvexDomain:
    kind = doc.get("kind")
    if kind == "ellipsoid":
        return ellipsoid(doc["center"], doc["form"])
    if kind == "polygon":
        return from_polygon(doc["vertices"],
                            base_point=doc.get("base_point"))
    if kind == "halfspaces":
        return from_halfspaces(doc["normals"], doc["offsets"], doc["base_point"])
    raise GeometryError(f"unknown domain kind {kind!r}")


def save_domain(dom: ConvexDomain, path):
    with open(path, "w") as fh:
        json.dump(domain_to_json(dom), fh, indent=1, sort_keys=True)


def load_domain(path) -> ConvexDomain:
    with open(path) as fh:
        return domain_from_json(json.load(fh))
