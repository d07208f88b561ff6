"""Exact periodic-orbit quantities: Hilbert length, parallel/flow/cocycle
Lyapunov exponents, predicted boundary exponents, exact transport, and the
numeric-vs-exact transport cross-check.

Conventions: eigenvalue moduli lambda_0 >= ... >= lambda_n (descending);
parallel exponents eta are stored ascending, which coincides with indexing
interior moduli by descending lambda_i. Cocycle exponents ell are stored
ascending as log(mu)/T over ascending moduli mu.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from hilbertflow import domains, metric
from hilbertflow.domains import ConvexDomain
from hilbertflow.groups import MatrixGroup, group_hash, word_label, words_matrices
from hilbertflow.projlin import (AffineChart, EigenData, GeometryError,
                                 GroupElement, eigen_split, is_loxodromic)


class NotBiproximalError(GeometryError):
    """The element has no closed geodesic (top/bottom modulus not simple)."""


def _eigen(g, tol=1e-8) -> EigenData:
    if isinstance(g, EigenData):
        return g
    return eigen_split(g, tol)


def _require_biproximal(e: EigenData):
    if e.attracting_line is None or e.repelling_line is None:
        raise NotBiproximalError("no closed geodesic: element is not biproximal")


def hilbert_length(g) -> float:
    """Period of the closed orbit: (1/2) log(lambda_0 / lambda_n)."""
    e = _eigen(g)
    _require_biproximal(e)
    return 0.5 * float(np.log(e.moduli[0] / e.moduli[-1]))


def parallel_exponents(g, with_multiplicity: bool = True):
    """Parallel-transport exponents eta_i = -1 + 2 log(lambda_0/lambda_i) /
    log(lambda_0/lambda_n), one per interior modulus (ascending eta), with
    cluster labels.

    Returns (eta array, labels) where labels[k] is the index of the modulus
    cluster the k-th exponent belongs to.
    """
    e = _eigen(g)
    _require_biproximal(e)
    lam0, lamn = e.moduli[0], e.moduli[-1]
    log_gap = np.log(lam0 / lamn)
    etas = []
    labels = []
    for ci, cluster in enumerate(e.clusters[1:-1], start=1):
        lam_i = e.moduli[cluster[0]]
        form_a = 1.0 + 2.0 * np.log(lamn / lam_i) / log_gap
        form_b = -1.0 + 2.0 * np.log(lam0 / lam_i) / log_gap
        if abs(form_a - form_b) > 1e-12 * max(1.0, abs(form_b)):
            raise GeometryError("parallel exponent forms disagree")
        reps = len(cluster) if with_multiplicity else 1
        etas.extend([form_b] * reps)
        labels.extend([ci] * reps)
    return np.array(etas), tuple(labels)


def cocycle_exponents_periodic(g) -> np.ndarray:
    """Holonomy-cocycle exponents over one period: log(mu_i)/T for the
    eigenvalue moduli mu sorted ascending."""
    e = _eigen(g)
    _require_biproximal(e)
    T = hilbert_length(e)
    return np.log(e.moduli[::-1]) / T


def link_parallel_from_cocycle(ell) -> np.ndarray:
    """Parallel exponents from cocycle exponents (ascending input):
    eta_i = -1 + 2 (ell_{n-i} - ell_n) / (ell_0 - ell_n), i = 1..n-1,
    returned ascending. Degenerate input (ell_0 = ell_n) is rejected."""
    ell = np.asarray(ell, dtype=float)
    n = len(ell) - 1
    if abs(ell[0] - ell[-1]) < 1e-15:
        raise GeometryError("degenerate cocycle exponents: ell_0 = ell_n")
    i = np.arange(1, n)
    return -1.0 + 2.0 * (ell[n - i] - ell[n]) / (ell[0] - ell[n])


def flow_exponents(eta) -> tuple[np.ndarray, np.ndarray]:
    """Unstable/stable flow exponents from parallel exponents:
    chi_u = 1 + eta (listed descending), chi_s = -1 + eta (descending)."""
    eta = np.sort(np.asarray(eta, dtype=float))
    chi_u = (1.0 + eta)[::-1]
    chi_s = (-1.0 + eta)[::-1]
    return chi_u, chi_s


def boundary_alpha_predicted(eta) -> np.ndarray:
    """Predicted boundary exponents alpha_i = 2 / chi_i^u, ascending; equals
    log(lambda_0/lambda_n)/log(lambda_0/lambda_i) on periodic data."""
    chi_u, _ = flow_exponents(eta)
    if np.any(chi_u <= 0):
        raise GeometryError("unstable exponent must be positive")
    return 2.0 / chi_u


@dataclass(frozen=True)
class OrbitSpectrum:
    """Per-element spectral record for the closed orbit of a word."""

    word: tuple[int, ...] | None
    length: float
    moduli: np.ndarray
    eta: np.ndarray
    eta_labels: tuple[int, ...]
    chi_unstable: np.ndarray
    chi_stable: np.ndarray
    ell: np.ndarray
    alpha: np.ndarray
    simple: bool
    loxodromic: bool
    diagonalizable: bool

    def to_json(self) -> dict:
        return {
            "word": list(self.word) if self.word is not None else None,
            "length": self.length,
            "moduli": self.moduli.tolist(),
            "eta": self.eta.tolist(),
            "eta_labels": list(self.eta_labels),
            "chi_unstable": self.chi_unstable.tolist(),
            "chi_stable": self.chi_stable.tolist(),
            "ell": self.ell.tolist(),
            "alpha": self.alpha.tolist(),
            "simple": self.simple,
            "loxodromic": self.loxodromic,
            "diagonalizable": self.diagonalizable,
        }


def orbit_spectrum(g, tol: float = 1e-8) -> OrbitSpectrum:
    e = _eigen(g, tol)
    _require_biproximal(e)
    T = hilbert_length(e)
    eta, labels = parallel_exponents(e)
    if not np.all((eta > -1.0) & (eta < 1.0)):
        raise GeometryError("parallel exponent out of (-1, 1)")
    chi_u, chi_s = flow_exponents(eta)
    simple = bool(len(eta) <= 1 or np.min(np.diff(np.sort(eta))) > 0)
    return OrbitSpectrum(
        word=e.element.word,
        length=T,
        moduli=e.moduli.copy(),
        eta=eta,
        eta_labels=labels,
        chi_unstable=chi_u,
        chi_stable=chi_s,
        ell=cocycle_exponents_periodic(e),
        alpha=boundary_alpha_predicted(eta),
        simple=simple,
        loxodromic=is_loxodromic(e),
        diagonalizable=e.diagonalizable,
    )


# ---------------------------------------------------------------------------
# exact parallel transport


@dataclass(frozen=True)
class TransportMap:
    """Exact Hilbert parallel transport over one period, block by block.

    The full map acts on the sum of interior eigen-subspaces as
    sqrt(lambda_0 lambda_n) times the inverse of the cone representative of g
    restricted there; block i scales by sqrt(lambda_0 lambda_n)/lambda_i
    composed with the inverse orthogonal part.
    """

    basis: np.ndarray           # columns: interior subspace basis, blockwise
    matrix: np.ndarray          # transport in that basis
    block_slices: tuple[tuple[int, int], ...]
    block_scales: tuple[float, ...]
    orthogonal_parts: tuple[np.ndarray, ...]
    period: float
    eta: np.ndarray


def transport_matrix_closed_form(g, tol: float = 1e-8) -> TransportMap:
    """Exact transport over one period of a diagonalizable biproximal element.

    Raises GeometryError for non-diagonalizable input (use the numeric
    transport there).
    """
    e = _eigen(g, tol)
    _require_biproximal(e)
    if not e.diagonalizable:
        raise GeometryError("exact transport undefined; use numeric transport")
    lam0, lamn = e.moduli[0], e.moduli[-1]
    scale0 = np.sqrt(lam0 * lamn)
    cols = []
    slices = []
    scales = []
    parts = []
    pos = 0
    T = hilbert_length(e)
    eta, _ = parallel_exponents(e)
    for ci, cluster in enumerate(e.clusters[1:-1], start=1):
        B = e.subspaces[ci]
        lam_i = e.moduli[cluster[0]]
        U = e.orthogonal_parts[ci]
        cols.append(B)
        d = B.shape[1]
        slices.append((pos, pos + d))
        pos += d
        scales.append(float(scale0 / lam_i))
        parts.append(U)
    basis = np.concatenate(cols, axis=1) if cols else np.zeros((e.dim, 0))
    blocks = np.zeros((pos, pos))
    for (a, b), s, U in zip(slices, scales, parts):
        blocks[a:b, a:b] = s * np.linalg.inv(U)
    return TransportMap(basis=basis, matrix=blocks,
                        block_slices=tuple(slices),
                        block_scales=tuple(scales),
                        orthogonal_parts=tuple(parts),
                        period=T, eta=eta)


def adapted_section_chart(e: EigenData, orient_toward=None) -> AffineChart:
    """Affine chart adapted to the axis of a biproximal element: the axis is
    the first coordinate axis from x- = 0 to x+ = (1, 0, ..., 0) and the
    invariant tangent hyperplanes at the endpoints are orthogonal to it.

    ``orient_toward`` (a homogeneous interior point) fixes the sign of the
    endpoint eigenvectors so the surrounded domain gets positive coordinates.
    """
    _require_biproximal(e)
    n1 = e.dim
    vp = e.attracting_line.copy()
    vm = e.repelling_line.copy()
    interior = np.concatenate([e.subspaces[ci] for ci in
                               range(1, len(e.clusters) - 1)], axis=1) \
        if len(e.clusters) > 2 else np.zeros((n1, 0))
    B = np.concatenate([vp[:, None], interior, vm[:, None]], axis=1)
    if B.shape[1] != n1:
        raise GeometryError("eigen basis does not span")
    if orient_toward is not None:
        q = np.linalg.solve(B, np.asarray(orient_toward, dtype=float))
        if q[0] < 0:
            B[:, 0] *= -1.0
        if q[-1] < 0:
            B[:, -1] *= -1.0
    Binv = np.linalg.inv(B)
    rows = [Binv[0] + Binv[-1], Binv[0]]
    rows.extend(Binv[1:-1])
    return AffineChart(np.stack(rows, axis=0))


def axis_section(dom: ConvexDomain, length: float) -> domains.LineSection:
    """Axis chord in an adapted chart: from (0,..) to (1,0,..) with the base
    point at the chart midpoint."""
    n = dom.dim
    xm = np.zeros(n)
    xp = np.zeros(n)
    xp[0] = 1.0
    x = 0.5 * (xm + xp)
    return domains.LineSection(x_minus=xm, x=x, x_plus=xp,
                               direction=(xp - xm))


def numeric_vs_exact_transport(dom: ConvexDomain, g, n_samples: int = 10,
                               seed: int = 0, periods: int = 1) -> float:
    """Max relative discrepancy between the numeric transport norm (flow
    formula with the g^{-1} translation) and the exact one-period transport,
    over random tangent vectors in the interior eigen-subspaces at the axis
    midpoint of g.

    The domain is first re-expressed in the eigen-adapted chart of g, where
    the chart-level transport formula is exact. Returns inf when the flow
    leaves the domain (non-invariant input), which is the detection signal
    for wrong domains.
    """
    e = _eigen(g)
    _require_biproximal(e)
    tmap = transport_matrix_closed_form(e)
    base_hom = dom.chart.from_chart(dom.base_point)
    chart = adapted_section_chart(e, orient_toward=base_hom)
    try:
        adom = domains.reexpress(dom, chart)
    except GeometryError:
        return float("inf")
    T = tmap.period
    sec = axis_section(adom, T)
    if not (domains.contains(adom, sec.x, tol=-1e-12)):
        return float("inf")
    rng = np.random.default_rng(seed)
    ginv = e.element.inverse()
    x_hom = chart.from_chart(sec.x)
    k = tmap.basis.shape[1]
    worst = 0.0
    exact_power = np.linalg.matrix_power(tmap.matrix, periods)
    for _ in range(n_samples):
        coeff = rng.standard_normal(k)
        w = tmap.basis @ coeff
        z = chart.tangent_to_chart(x_hom, w)
        w_out = tmap.basis @ (exact_power @ coeff)
        z_out = chart.tangent_to_chart(x_hom, w_out)
        try:
            if periods == 1:
                # plain flow value reads the domain geometry at x_T; the
                # g^{-1}-translated value equals it exactly when the domain
                # is invariant, so both are held against the exact map
                vals = [metric.transport_norm_along_orbit(adom, sec, z, T),
                        metric.transport_norm_along_orbit(adom, sec, z, T,
                                                          fold=ginv)]
            else:
                logs = metric.transport_log_norms_periodic(
                    adom, sec, e.element, z, periods, T)
                vals = [float(np.exp(logs[-1]))]
            val_ex = 0.5 * metric.finsler_norm(adom, sec.x, z_out)
        except GeometryError:
            return float("inf")
        for val_num in vals:
            if not np.isfinite(val_num):
                return float("inf")
            worst = max(worst, abs(val_num - val_ex) / max(abs(val_ex), 1e-300))
    return worst


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SimplicityReport:
    """Statistics of parallel spectra over all biproximal words up to a
    length bound.

    min_gap is the smallest gap between exponents within one word (n >= 3
    only); min/max_abs_eta and fraction_eta_nonzero describe the
    non-Riemannian signature (all periodic eta vanish exactly when the
    domain is an ellipsoid, but individual words conjugate to their inverse
    have eta = 0 in every group).
    """

    max_word_length: int
    n_words: int
    n_biproximal: int
    n_loxodromic: int
    fraction_simple: float
    min_gap: float | None
    min_abs_eta: float | None
    max_abs_eta: float | None
    fraction_eta_nonzero: float
    eta_tol: float
    eta_values: np.ndarray
    spectra: tuple[OrbitSpectrum, ...] = field(repr=False)

    def to_json(self) -> dict:
        return {
            "max_word_length": self.max_word_length,
            "n_words": self.n_words,
            "n_biproximal": self.n_biproximal,
            "n_loxodromic": self.n_loxodromic,
            "fraction_simple": self.fraction_simple,
            "min_gap": self.min_gap,
            "min_abs_eta": self.min_abs_eta,
            "max_abs_eta": self.max_abs_eta,
            "fraction_eta_nonzero": self.fraction_eta_nonzero,
            "eta_tol": self.eta_tol,
        }


def simplicity_report(group: MatrixGroup, max_len: int, tol: float = 1e-8,
                      eta_tol: float = 1e-6) -> SimplicityReport:
    """Sweep all biproximal reduced words up to max_len and report how often
    the parallel spectrum is simple, the minimal within-word gap, and the
    spread of |eta| (the non-Riemannian signature)."""
    from hilbertflow.domainbuild import EmptySampleError, batched_proximal_data
    from hilbertflow.projlin import normalize_unimodular

    words, mats = words_matrices(group, max_len)
    bip, _, _, _ = batched_proximal_data(mats, tol)
    if not bip.any():
        raise EmptySampleError(f"no biproximal words up to length {max_len}")
    specs = []
    gaps = []
    n_simple = 0
    n_loxo = 0
    n_nonzero = 0
    for i in np.nonzero(bip)[0]:
        g = normalize_unimodular(mats[i], words[i])
        spec = orbit_spectrum(g, tol)
        specs.append(spec)
        n_simple += spec.simple
        n_loxo += spec.loxodromic
        if len(spec.eta) >= 2:
            gaps.append(float(np.min(np.diff(np.sort(spec.eta)))))
        if np.any(np.abs(spec.eta) > eta_tol):
            n_nonzero += 1
    all_eta = np.array(sorted(x for s in specs for x in s.eta))
    return SimplicityReport(
        max_word_length=max_len,
        n_words=len(words),
        n_biproximal=int(bip.sum()),
        n_loxodromic=n_loxo,
        fraction_simple=n_simple / max(len(specs), 1),
        min_gap=min(gaps) if gaps else None,
        min_abs_eta=float(np.abs(all_eta).min()) if len(all_eta) else None,
        max_abs_eta=float(np.abs(all_eta).max()) if len(all_eta) else None,
        fraction_eta_nonzero=n_nonzero / max(len(specs), 1),
        eta_tol=eta_tol,
        eta_values=all_eta,
        spectra=tuple(specs),
    )


def spectra_to_csv(report: SimplicityReport, group: MatrixGroup, path,
                   header_extra: dict | None = None):
    with open(path, "w", newline="") as fh:
        for key, val in (header_extra or {}).items():
            fh.write(f"# {key}={val}\n")
        writer = csv.writer(fh)
        writer.writerow(["word", "length", "moduli", "eta", "chi_unstable",
                         "chi_stable", "alpha", "simple"])
        for s in report.spectra:
            writer.writerow([
                word_label(group, s.word or ()),
                repr(float(s.length)),
                " ".join(repr(float(x)) for x in s.moduli),
                " ".join(repr(float(x)) for x in s.eta),
                " ".join(repr(float(x)) for x in s.chi_unstable),
                " ".join(repr(float(x)) for x in s.chi_stable),
                " ".join(repr(float(x)) for x in s.alpha),
                int(s.simple),
            ])


def report_to_json_file(report: SimplicityReport, group: MatrixGroup, path,
                        extra: dict | None = None):
    doc = report.to_json()
    doc["group_hash"] = group_hash(group)
    doc.update(extra or {})
    doc["eta_values"] = [float(x) for x in report.eta_values]
    doc["spectra"] = [s.to_json() for s in report.spectra]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
