"""Boundary-regularity exponents by log-log fits of the boundary graph near
attracting fixed points, compared against the spectral prediction.

Fits follow the symmetrized limit slope of log((f(h) + f(-h))/2) against
log |h| in an adapted chart where the axis is the first coordinate axis and
the tangent hyperplanes at its endpoints are orthogonal to it.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from hilbertflow import domains, spectra
from hilbertflow.domainbuild import LimitSetSample, limit_set_sample, refine_limit_set
from hilbertflow.domains import ConvexDomain
from hilbertflow.groups import MatrixGroup, word_label
from hilbertflow.projlin import AffineChart, GeometryError, eigen_split


class FitWindowError(GeometryError):
    """Not enough matched data across the requested window."""


# ---------------------------------------------------------------------------
# adapted charts


def adapted_chart(dom: ConvexDomain, x_plus, x_minus,
                  boundary_data: LimitSetSample | None = None,
                  min_neighbors: int = 4) -> AffineChart:
    """Chart adapted to the chord (x_minus, x_plus) of the domain: the axis
    becomes the first coordinate axis and the supporting tangent hyperplanes
    at both endpoints become orthogonal to it.

    Tangents come from the domain representation (exact for ellipsoids,
    supporting facet for polytopes) or, when ``boundary_data`` is given, from
    a least-squares fit through nearby samples (>= min_neighbors required).
    """
    x_plus = np.asarray(x_plus, dtype=float)
    x_minus = np.asarray(x_minus, dtype=float)
    if boundary_data is not None:
        t_plus = _tangent_from_samples(boundary_data.points, x_plus, min_neighbors)
        t_minus = _tangent_from_samples(boundary_data.points, x_minus, min_neighbors)
    else:
        t_plus = _tangent_from_representation(dom, x_plus)
        t_minus = _tangent_from_representation(dom, x_minus)
    return _chart_from_axis(dom.chart, x_plus, x_minus, t_plus, t_minus,
                            dom.base_point)


def _tangent_from_representation(dom: ConvexDomain, p) -> np.ndarray:
    """Outward normal covector of the supporting hyperplane at boundary
    point p, in chart coordinates."""
    p = np.asarray(p, dtype=float)
    if dom.kind == "ellipsoid":
        return 2.0 * dom.form @ (p - dom.center)
    slack = dom.offsets - dom.normals @ p
    i = int(np.argmin(np.abs(slack) / np.linalg.norm(dom.normals, axis=1)))
    return dom.normals[i]


def _tangent_from_samples(points, p, min_neighbors,
                          radius_fraction: float = 0.15) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    d = np.linalg.norm(points - p, axis=1)
    radius = radius_fraction * np.ptp(points, axis=0).max()
    near = points[(d > 1e-12) & (d <= radius)]
    if len(near) < min_neighbors:
        raise FitWindowError(
            f"tangent estimation needs >= {min_neighbors} nearby boundary "
            f"samples, found {len(near)}")
    diffs = near - p
    _, _, vt = np.linalg.svd(diffs - diffs.mean(axis=0, keepdims=True))
    return vt[-1]


def _chart_from_axis(chart: AffineChart, x_plus, x_minus, n_plus, n_minus,
                     interior_point) -> AffineChart:
    """Adapted chart from endpoint positions and supporting normals.

    The homogeneous frame uses the endpoint lifts scaled so their tangent
    covectors agree on the axis, making the tangent planes parallel in the
    new chart; interior directions come from the tangent plane intersection.
    """
    hp = chart.from_chart(np.asarray(x_plus, dtype=float))
    hm = chart.from_chart(np.asarray(x_minus, dtype=float))
    n1 = len(hp)
    # homogeneous covectors of the two tangent hyperplanes
    cp = _covector(chart, x_plus, n_plus)
    cm = _covector(chart, x_minus, n_minus)
    # scale the covectors so each evaluates to 1 on the opposite endpoint
    cp = cp / (cp @ hm)
    cm = cm / (cm @ hp)
    # frame: b0 = lift of x_plus with cm(b0) = 1, b_last = lift of x_minus
    # with cp(b_last) = 1, interior columns spanning ker cp ^ ker cm
    b0 = hp / (cm @ hp)
    bn = hm / (cp @ hm)
    A = np.stack([cp, cm], axis=0)
    _, _, vt = np.linalg.svd(A)
    inter = vt[2:].T
    B = np.concatenate([b0[:, None], inter, bn[:, None]], axis=1)
    if abs(np.linalg.det(B)) < 1e-14:
        raise GeometryError("degenerate adapted frame")
    Binv = np.linalg.inv(B)
    rows = [Binv[0] + Binv[-1], Binv[0]]
    rows.extend(Binv[1:-1])
    out = AffineChart(np.stack(rows, axis=0))
    # orient so the interior point has positive axis coordinates
    hc = chart.from_chart(np.asarray(interior_point, dtype=float))
    q = out.T @ hc
    if q[0] < 0:
        q = -q
    if not (0 < q[1] / q[0] < 1):
        raise GeometryError("interior point does not project between the "
                            "axis endpoints")
    return out


def _covector(chart: AffineChart, p, normal) -> np.ndarray:
    """Homogeneous covector of the affine hyperplane through chart point p
    with chart normal ``normal``."""
    normal = np.asarray(normal, dtype=float)
    c = float(normal @ np.asarray(p, dtype=float))
    # affine covector (normal, -c) in (x, 1) coordinates; move to homogeneous
    n1 = chart.T.shape[0]
    aff = np.concatenate([normal, [-c]])
    R = np.zeros((n1, n1))
    R[:n1 - 1, 1:] = np.eye(n1 - 1)
    R[n1 - 1, 0] = 1.0
    return aff @ R @ chart.T


def adapted_chart_for_element(g, interior_hom) -> AffineChart:
    """Eigen-adapted chart of a biproximal element (exact tangent data)."""
    e = eigen_split(g) if not hasattr(g, "clusters") else g
    return spectra.adapted_section_chart(e, orient_toward=interior_hom)


# ---------------------------------------------------------------------------
# graph samples


@dataclass(frozen=True)
class GraphSamples:
    """Boundary graph data near a fixed point, in the adapted chart.

    h/f_plus/f_minus hold the matched symmetric pairs along one tangent
    direction; raw_u/raw_f keep every windowed sample for export.
    """

    direction: np.ndarray
    h: np.ndarray
    f_plus: np.ndarray
    f_minus: np.ndarray
    raw_u: np.ndarray
    raw_f: np.ndarray
    one_sided: bool = False

    @property
    def f_sym(self) -> np.ndarray:
        if self.one_sided:
            return self.f_plus
        return 0.5 * (self.f_plus + self.f_minus)


def local_graph_samples(boundary_data, point, chart: AffineChart,
                        window: tuple[float, float],
                        directions=None,
                        match_rtol: float = 0.10,
                        cone_cos: float = 0.95,
                        min_samples: int = 10,
                        f_max: float = 0.5) -> list[GraphSamples]:
    """Boundary samples near ``point`` as graph data (u, f(u)) in the adapted
    chart, with symmetric pairs (u, -u) matched by nearest sample within
    ``match_rtol`` of |u|.

    ``boundary_data`` is a LimitSetSample or a ConvexDomain (analytic
    boundary; sampled by chords). The fixed point must map to (1, 0, ...) in
    the chart (the attracting end of the axis); samples with f = 1 - u above
    ``f_max`` belong to the far half of the boundary and are dropped.
    """
    lo, hi = window
    if not 0 < lo < hi:
        raise FitWindowError("window must satisfy 0 < h_min < h_max")
    if point is not None:
        # the fixed point (given in the data's chart) must be the attracting
        # end of the adapted chart's axis
        target = np.zeros(chart.dim)
        target[0] = 1.0
        hom = boundary_data.chart.from_chart(np.asarray(point, dtype=float))
        if np.abs(chart.to_chart(hom) - target).max() > 1e-6:
            raise GeometryError("point is not the attracting axis end of "
                                "the chart")
    n = chart.dim
    if directions is None:
        directions = [np.eye(n - 1)[i] if n > 2 else np.array([1.0])
                      for i in range(n - 1)]
    if isinstance(boundary_data, ConvexDomain):
        u, y = _domain_graph_points(boundary_data, chart, lo, hi)
    else:
        hom = boundary_data.chart.from_chart(boundary_data.points)
        q = hom @ chart.T.T
        keep = np.abs(q[:, 0]) > 1e-14 * np.linalg.norm(hom, axis=1)
        q = q[keep] / q[keep, 0:1]
        u = q[:, 1]
        y = q[:, 2:]
    f = 1.0 - u
    out = []
    for d in directions:
        d = np.asarray(d, dtype=float)
        d = d / np.linalg.norm(d)
        comp = y @ d
        mag = np.linalg.norm(y, axis=1)
        in_cone = np.abs(comp) >= cone_cos * mag
        good = in_cone & (f > 0) & (f < f_max) \
            & (np.abs(comp) >= lo) & (np.abs(comp) <= hi)
        uu = comp[good]
        ff = f[good]
        if len(uu) < min_samples:
            raise FitWindowError(
                f"only {len(uu)} samples in window [{lo:g}, {hi:g}]")
        out.append(_match_pairs(uu, ff, match_rtol, d))
    return out


def _domain_graph_points(dom: ConvexDomain, chart: AffineChart, lo, hi,
                         n_per_decade: int = 60):
    """Sample an analytic boundary near the attracting end by chords of the
    re-expressed domain."""
    adom = domains.reexpress(dom, chart)
    n = adom.dim
    hs = np.geomspace(lo, hi, max(int(np.log10(hi / lo) * n_per_decade), 20))
    us = []
    ys = []
    axis = np.zeros(n)
    axis[0] = 1.0
    for h in hs:
        for sgn in (1.0, -1.0):
            p0 = np.zeros(n)
            p0[0] = 0.5
            p0[1:] = 0.0
            probe = p0.copy()
            probe[1] = sgn * h
            try:
                sec = domains.boundary_points(adom, probe, axis)
            except GeometryError:
                continue
            us.append(sec.x_plus[0])
            ys.append(sec.x_plus[1:])
    return np.array(us), np.array(ys)


def _match_pairs(u, f, rtol, direction) -> GraphSamples:
    pos = u > 0
    hp, fp = u[pos], f[pos]
    hn, fn = -u[~pos], f[~pos]
    order = np.argsort(hn)
    hn, fn = hn[order], fn[order]
    hh, fpl, fmi = [], [], []
    for hv, fv in zip(hp, fp):
        if len(hn) == 0:
            break
        i = int(np.searchsorted(hn, hv))
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(hn) and abs(hn[j] - hv) <= rtol * hv:
                dj = abs(hn[j] - hv)
                if best is None or dj < best[0]:
                    best = (dj, j)
        if best is not None:
            j = best[1]
            hh.append(0.5 * (hv + hn[j]))
            fpl.append(fv)
            fmi.append(fn[j])
    return GraphSamples(direction=direction, h=np.array(hh),
                        f_plus=np.array(fpl), f_minus=np.array(fmi),
                        raw_u=u.copy(), raw_f=f.copy())


# ---------------------------------------------------------------------------
# fits


@dataclass(frozen=True)
class DirectionFit:
    direction: np.ndarray
    alpha: float
    stderr: float
    r2: float
    n_pairs: int
    decades: float
    window: tuple[float, float]
    one_sided: bool = False

    def to_json(self) -> dict:
        return {
            "direction": self.direction.tolist(),
            "alpha": self.alpha,
            "stderr": self.stderr,
            "r2": self.r2,
            "n_pairs": self.n_pairs,
            "decades": self.decades,
            "window": list(self.window),
            "one_sided": self.one_sided,
        }


def alpha_fit(samples: GraphSamples, window: tuple[float, float],
              min_pairs: int = 10, min_decades: float = 1.5,
              allow_one_sided: bool = False) -> DirectionFit:
    """Least-squares slope of log((f(h)+f(-h))/2) against log h over the
    window. Requires >= min_pairs matched pairs spanning >= min_decades."""
    lo, hi = window
    one_sided = False
    h = samples.h
    if len(h) < min_pairs:
        if not allow_one_sided:
            raise FitWindowError(
                f"only {len(h)} matched symmetric pairs (need {min_pairs})")
        one_sided = True
        h = np.abs(samples.raw_u)
        fsym = samples.raw_f
    else:
        fsym = samples.f_sym
    keep = (h >= lo) & (h <= hi) & (fsym > 0)
    h, fsym = h[keep], fsym[keep]
    if len(h) < min_pairs:
        raise FitWindowError(
            f"only {len(h)} pairs inside window [{lo:g}, {hi:g}]")
    decades = float(np.log10(h.max() / h.min()))
    if decades < min_decades:
        raise FitWindowError(
            f"window too narrow: {decades:.2f} decades < {min_decades}")
    lx = np.log(h)
    ly = np.log(fsym)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    sxx = float(((lx - lx.mean()) ** 2).sum())
    stderr = float(np.sqrt(ss_res / max(len(lx) - 2, 1) / sxx))
    return DirectionFit(direction=samples.direction, alpha=float(coef[0]),
                        stderr=stderr, r2=r2, n_pairs=len(h),
                        decades=decades, window=(lo, hi),
                        one_sided=one_sided)


@dataclass(frozen=True)
class AlphaFitReport:
    """Fitted vs predicted boundary exponents at a fixed point."""

    word: tuple[int, ...]
    point: np.ndarray
    fits: tuple[DirectionFit, ...]
    alpha_predicted: np.ndarray
    rel_error: np.ndarray
    samples: tuple[GraphSamples, ...] = field(repr=False, default=())

    @property
    def alpha_fitted(self) -> np.ndarray:
        return np.array([f.alpha for f in self.fits])

    def to_json(self) -> dict:
        return {
            "word": list(self.word),
            "point": self.point.tolist(),
            "fits": [f.to_json() for f in self.fits],
            "alpha_predicted": self.alpha_predicted.tolist(),
            "alpha_fitted": self.alpha_fitted.tolist(),
            "rel_error": self.rel_error.tolist(),
        }


def alpha_compare(group: MatrixGroup, boundary_data, word,
                  window: tuple[float, float] = (1e-5, 1e-2),
                  refine_powers: int = 25,
                  min_pairs: int = 10, min_decades: float = 1.5,
                  tol: float = 1e-8) -> AlphaFitReport:
    """Fit boundary exponents at the attracting point of ``word`` and join
    them with the spectral prediction.

    ``boundary_data`` is a LimitSetSample (refined along powers of the word
    to populate the window) or a ConvexDomain with analytic boundary.
    """
    g = group.element(word)
    e = eigen_split(g, tol)
    spectrum = spectra.orbit_spectrum(e)
    if isinstance(boundary_data, LimitSetSample):
        data = refine_limit_set(group, boundary_data, tuple(word),
                                refine_powers) if refine_powers else boundary_data
        interior_hom = data.chart.from_chart(data.points.mean(axis=0))
        chart = spectra.adapted_section_chart(e, orient_toward=interior_hom)
    else:
        data = boundary_data
        interior_hom = data.chart.from_chart(data.base_point)
        chart = spectra.adapted_section_chart(e, orient_toward=interior_hom)
    n = chart.dim
    directions = _eigen_directions(e, chart) if n > 2 else None
    sample_sets = local_graph_samples(data, None, chart, window,
                                      directions=directions,
                                      min_samples=min_pairs)
    fits = tuple(alpha_fit(s, window, min_pairs=min_pairs,
                           min_decades=min_decades) for s in sample_sets)
    pred = spectrum.alpha
    fitted = np.array([f.alpha for f in fits])
    if len(pred) != len(fitted):
        pred = np.full_like(fitted, np.nan)
    rel = np.abs(fitted - pred) / np.abs(pred)
    xplus = np.zeros(n)
    xplus[0] = 1.0
    return AlphaFitReport(word=tuple(word), point=xplus, fits=fits,
                          alpha_predicted=pred, rel_error=rel,
                          samples=tuple(sample_sets))


def _eigen_directions(e, chart: AffineChart):
    """Interior eigen-directions mapped to the adapted chart's tangent
    coordinates at the attracting point (the fit directions for n >= 3)."""
    dirs = []
    xplus_hom = e.attracting_line
    for ci in range(1, len(e.clusters) - 1):
        for col in e.subspaces[ci].T:
            z = chart.tangent_to_chart(xplus_hom, col)
            d = z[1:]
            nd = np.linalg.norm(d)
            if nd > 1e-12:
                dirs.append(d / nd)
    return dirs


def report_to_json_file(report: AlphaFitReport, path, extra=None):
    doc = report.to_json()
    doc.update(extra or {})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)


def samples_to_csv(report: AlphaFitReport, path, header_extra=None):
    with open(path, "w", newline="") as fh:
        for key, val in (header_extra or {}).items():
            fh.write(f"# {key}={val}\n")
        writer = csv.writer(fh)
        writer.writerow(["direction_id", "h", "f"])
        for i, s in enumerate(report.samples):
            for u, f in zip(s.raw_u, s.raw_f):
                writer.writerow([i, repr(float(u)), repr(float(f))])
