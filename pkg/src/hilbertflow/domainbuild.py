"""Candidate invariant domains from group data: ellipsoids, limit-set
samples, orbit hulls, and invariance diagnostics."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from hilbertflow import domains
from hilbertflow.domains import ConvexDomain
from hilbertflow.groups import MatrixGroup, words_matrices
from hilbertflow.projlin import AffineChart, GeometryError, standard_chart


class EmptySampleError(GeometryError):
    """No usable (biproximal) words were found."""


def ellipsoid_domain(n: int) -> ConvexDomain:
    """Unit ball in the standard chart: the Riemannian reference domain."""
    if n < 1:
        raise GeometryError("dimension must be at least 1")
    return domains.ellipsoid(np.zeros(n), np.eye(n))


@dataclass(frozen=True)
class LimitSetSample:
    """Attracting fixed points of biproximal words, in chart coordinates."""

    points: np.ndarray
    source_words: tuple[tuple[int, ...], ...]
    max_word_length: int
    chart: AffineChart

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).copy()
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    def __len__(self):
        return len(self.points)


def batched_proximal_data(mats: np.ndarray, tol: float = 1e-8):
    """Vectorized eigen screening of stacked matrices.

    Returns (biproximal mask, moduli descending, attracting lines,
    repelling lines); the eigenvector columns are unit homogeneous vectors.
    """
    ev, evec = np.linalg.eig(mats)
    mod = np.abs(ev)
    order = np.argsort(-mod, axis=1, kind="stable")
    lam = np.take_along_axis(mod, order, axis=1)
    ev_sorted = np.take_along_axis(ev, order, axis=1)
    top_simple = lam[:, 0] > lam[:, 1] * (1.0 + tol)
    bot_simple = lam[:, -1] < lam[:, -2] * (1.0 - tol)
    real_top = np.abs(ev_sorted[:, 0].imag) <= 1e-12 * lam[:, 0]
    real_bot = np.abs(ev_sorted[:, -1].imag) <= 1e-12 * lam[:, -1]
    bip = top_simple & bot_simple & real_top & real_bot
    vp = np.take_along_axis(evec, order[:, None, :1], axis=2)[:, :, 0].real
    vm = np.take_along_axis(evec, order[:, None, -1:], axis=2)[:, :, 0].real
    vp = vp / np.linalg.norm(vp, axis=1, keepdims=True)
    vm = vm / np.linalg.norm(vm, axis=1, keepdims=True)
    return bip, lam, vp, vm


def limit_set_sample(group: MatrixGroup, max_len: int,
                     chart: AffineChart | None = None,
                     dedup_tol: float = 1e-10,
                     include_repelling: bool = True) -> LimitSetSample:
    """Attracting (and, by default, repelling) fixed points of all biproximal
    reduced words up to max_len, deduplicated to ``dedup_tol``."""
    if max_len < 1:
        raise GeometryError("max word length must be >= 1")
    chart = chart or standard_chart(group.dim - 1)
    words, mats = words_matrices(group, max_len)
    bip, _, vp, vm = batched_proximal_data(mats)
    if not bip.any():
        raise EmptySampleError(
            f"no proximal elements up to length {max_len}")
    pts = []
    src = []
    idx = np.nonzero(bip)[0]
    for i in idx:
        cand = [(vp[i], words[i])]
        if include_repelling:
            cand.append((vm[i], tuple(-l for l in reversed(words[i]))))
        for hom, word in cand:
            try:
                pts.append(chart.to_chart(hom))
                src.append(word)
            except GeometryError:
                continue
    pts = np.asarray(pts)
    keep = _dedup_indices(pts, dedup_tol)
    return LimitSetSample(points=pts[keep],
                          source_words=tuple(src[i] for i in keep),
                          max_word_length=max_len, chart=chart)


def _dedup_indices(pts: np.ndarray, tol: float) -> list[int]:
    if len(pts) == 0:
        return []
    tree = cKDTree(pts)
    pairs = tree.query_pairs(tol)
    drop = set()
    for i, j in sorted(pairs):
        if i not in drop:
            drop.add(j)
    return [i for i in range(len(pts)) if i not in drop]


def refine_limit_set(group: MatrixGroup, sample: LimitSetSample,
                     word: tuple[int, ...], max_power: int) -> LimitSetSample:
    """Push the sample toward the attracting point of ``word`` by applying its
    powers; the images are fixed points of the conjugated source words, so
    they remain genuine limit-set points."""
    g = group.element(word)
    hom = sample.chart.from_chart(sample.points)
    pts = [sample.points]
    srcs = list(sample.source_words)
    cur = hom.copy()
    winv = tuple(-l for l in reversed(word))
    for k in range(1, max_power + 1):
        cur = cur @ g.matrix.T
        cur = cur / np.abs(cur).max(axis=1, keepdims=True)
        pts.append(sample.chart.to_chart(cur))
        srcs.extend(word * k + w + winv * k for w in sample.source_words)
    allpts = np.concatenate(pts, axis=0)
    return LimitSetSample(points=allpts, source_words=tuple(srcs),
                          max_word_length=sample.max_word_length
                          + 2 * max_power * len(word),
                          chart=sample.chart)


def orbit_hull_domain(group: MatrixGroup, seed, max_len: int,
                      sample: LimitSetSample | None = None) -> ConvexDomain:
    """Convex hull of the limit-set sample: polygon for n = 2, half-space
    list for n >= 3. The hull must contain the seed point."""
    sample = sample or limit_set_sample(group, max_len)
    pts = sample.points
    n = pts.shape[1]
    if len(pts) < n + 1:
        raise GeometryError("degenerate hull: too few limit points")
    try:
        hull = ConvexHull(pts)
    except Exception as exc:  # qhull raises its own error type
        raise GeometryError(f"degenerate hull: {exc}") from exc
    seed = np.asarray(seed, dtype=float)
    if n == 2:
        dom = domains.from_polygon(pts[hull.vertices], chart=sample.chart,
                                   base_point=seed)
    else:
        normals = hull.equations[:, :-1]
        offsets = -hull.equations[:, -1]
        dom = domains.from_halfspaces(normals, offsets, seed,
                                      chart=sample.chart)
    if not domains.contains(dom, seed, tol=-1e-12):
        raise GeometryError("seed point is not interior to the hull")
    return dom


def invariance_defect(dom: ConvexDomain, group: MatrixGroup,
                      n_samples: int = 200, seed: int = 0) -> float:
    """Max over generators and sampled boundary points of the distance from
    the translated point to the boundary, normalized by the diameter."""
    from hilbertflow.projlin import projective_action

    rng = np.random.default_rng(seed)
    bpts = domains.sample_boundary(dom, n_samples, rng)
    if dom.kind in ("polygon",) and dom.vertices is not None:
        bpts = np.concatenate([bpts, dom.vertices], axis=0)
    diam = dom.diameter
    worst = 0.0
    for gen in group.generators:
        for q in (gen, gen.inverse()):
            try:
                img = projective_action(q, bpts, dom.chart)
            except GeometryError:
                return float("inf")
            d = np.array([abs(domains.boundary_distance(dom, p)) for p in img])
            worst = max(worst, float(d.max()) / diam)
    return worst


def limit_set_to_csv(sample: LimitSetSample, path, group: MatrixGroup,
                     header_extra: dict | None = None):
    from hilbertflow.groups import word_label

    with open(path, "w", newline="") as fh:
        for key, val in (header_extra or {}).items():
            fh.write(f"# {key}={val}\n")
        writer = csv.writer(fh)
        writer.writerow(["word"] + [f"x{i}" for i in range(sample.points.shape[1])])
        for word, p in zip(sample.source_words, sample.points):
            writer.writerow([word_label(group, word)] + [repr(float(c)) for c in p])
