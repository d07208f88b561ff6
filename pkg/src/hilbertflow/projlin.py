"""Projective linear algebra over RP^n in numerical coordinates.

Group elements are unimodular matrices with eigen-splittings cached by
modulus; affine charts are invertible frames with a distinguished
normalizing row. Everything here is pure and immutable, so objects can be
shared freely across workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


class GeometryError(ValueError):
    """Numerical data does not describe the requested geometric object."""


# ---------------------------------------------------------------------------
# group elements


@dataclass(frozen=True)
class GroupElement:
    """Unimodular (n+1)x(n+1) matrix, optionally carrying a word in generators.

    ``word`` is a tuple of signed 1-based generator indices (+i for the i-th
    generator, -i for its inverse); ``det_sign`` records the determinant sign,
    which cannot always be normalized away in even dimensions.
    """

    matrix: np.ndarray
    word: tuple[int, ...] | None = None
    det_sign: int = 1

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GeometryError(f"expected a square matrix, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise GeometryError("matrix entries must be finite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        d = np.linalg.det(m)
        if abs(abs(d) - 1.0) > 1e-9:
            raise GeometryError(f"matrix is not unimodular (|det| = {abs(d):.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def inverse(self) -> "GroupElement":
        w = word_inverse(self.word) if self.word is not None else None
        return GroupElement(np.linalg.inv(self.matrix), w, self.det_sign)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        w = None
        if self.word is not None and other.word is not None:
            w = reduce_word(self.word + other.word)
        return GroupElement(self.matrix @ other.matrix, w,
                            self.det_sign * other.det_sign)


def word_inverse(word: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-l for l in reversed(word))


def reduce_word(word) -> tuple[int, ...]:
    """Cancel adjacent inverse pairs (free reduction only)."""
    out: list[int] = []
    for l in word:
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def normalize_unimodular(matrix, word=None) -> GroupElement:
    """Rescale a matrix to |det| = 1; fix det = +1 when the dimension is odd.

    Raises GeometryError("singular matrix") on singular input.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise GeometryError(f"expected a square matrix, got shape {m.shape}")
    d = np.linalg.det(m)
    if not np.isfinite(d) or d == 0.0:
        raise GeometryError("singular matrix")
    m = m / abs(d) ** (1.0 / m.shape[0])
    sign = 1 if d > 0 else -1
    if sign < 0 and m.shape[0] % 2 == 1:
        m = -m
        sign = 1
    return GroupElement(m, word, sign)


# ---------------------------------------------------------------------------
# eigen-splitting by modulus


@dataclass(frozen=True)
class EigenData:
    """Eigen-splitting of a group element, clustered by eigenvalue modulus.

    moduli            sorted descending, one entry per eigenvalue (with
                      multiplicity)
    clusters          partition of eigenvalue indices into equal-modulus
                      groups, descending
    subspaces         real invariant subspace per cluster, as (n+1, d) column
                      blocks
    orthogonal_parts  per cluster, action of the cone representative divided
                      by the cluster modulus (orthogonal iff diagonalizable)
    attracting_line / repelling_line
                      homogeneous top/bottom eigenvectors when those clusters
                      are simple and real, else None
    """

    element: GroupElement
    moduli: np.ndarray
    clusters: tuple[tuple[int, ...], ...]
    subspaces: tuple[np.ndarray, ...]
    orthogonal_parts: tuple[np.ndarray, ...]
    cluster_signed: tuple[complex, ...]
    attracting_line: np.ndarray | None
    repelling_line: np.ndarray | None
    diagonalizable: bool

    @property
    def dim(self) -> int:
        return self.element.dim

    def cluster_modulus(self, c: int) -> float:
        return float(self.moduli[self.clusters[c][0]])


def _real_basis_for_cluster(eigvals, eigvecs, idx):
    """Real column basis from the eigenpairs of one modulus cluster.

    Complex pairs contribute their raw (Re, Im) columns under one common
    scale: in that basis the action is modulus times a plane rotation, which
    is what the orthogonal part records.
    """
    cols = []
    used = set()
    for i in idx:
        if i in used:
            continue
        lam = eigvals[i]
        v = eigvecs[:, i]
        if abs(lam.imag) <= 1e-12 * max(abs(lam), 1e-300):
            # align the phase so the vector is real
            j = int(np.argmax(np.abs(v)))
            v = v * np.exp(-1j * np.angle(v[j]))
            cols.append(v.real / np.linalg.norm(v.real))
            used.add(i)
        else:
            # complex pair: find the conjugate partner inside the cluster
            partner = None
            for k in idx:
                if k not in used and k != i and abs(eigvals[k] - lam.conjugate()) \
                        <= 1e-8 * max(abs(lam), 1e-300):
                    partner = k
                    break
            scale = max(np.linalg.norm(v.real), np.linalg.norm(v.imag))
            cols.append(v.real / scale)
            cols.append(v.imag / scale)
            used.add(i)
            if partner is not None:
                used.add(partner)
    return np.stack(cols, axis=1)


def eigen_split(g: GroupElement, tol: float = 1e-8) -> EigenData:
    """Split R^{n+1} into real invariant subspaces of g, one per eigenvalue
    modulus, clustering moduli that agree to relative ``tol``.
    """
    ev, evec = np.linalg.eig(g.matrix)
    order = np.argsort(-np.abs(ev), kind="stable")
    ev = ev[order]
    evec = evec[:, order]
    mod = np.abs(ev)

    clusters: list[tuple[int, ...]] = []
    start = 0
    for i in range(1, len(ev) + 1):
        if i == len(ev) or (mod[start] - mod[i]) > tol * mod[start]:
            clusters.append(tuple(range(start, i)))
            start = i

    # cone representative: top eigenvalue made positive when it is real
    top = ev[0]
    cone_sign = -1.0 if (abs(top.imag) <= 1e-12 * abs(top) and top.real < 0) else 1.0
    gc = cone_sign * g.matrix

    subspaces = []
    parts = []
    signed = []
    diag = True
    for idx in clusters:
        lam = mod[idx[0]]
        basis = _real_basis_for_cluster(ev, evec, idx)
        if basis.shape[1] != len(idx):
            # defective cluster: fall back to the full generalized eigenspace
            basis = _generalized_subspace(gc, ev[idx[0]] * cone_sign, len(idx))
            diag = False
        coeffs, res, *_ = np.linalg.lstsq(basis, gc @ basis, rcond=None)
        U = coeffs / lam
        if np.abs(U.T @ U - np.eye(U.shape[0])).max() > 1e-6 or \
                np.abs(gc @ basis - basis @ coeffs).max() > 1e-6 * lam:
            diag = False
        subspaces.append(basis)
        parts.append(U)
        signed.append(complex(ev[idx[0]]))

    att = rep = None
    if len(clusters[0]) == 1 and abs(ev[0].imag) <= 1e-12 * mod[0]:
        att = subspaces[0][:, 0]
    if len(clusters[-1]) == 1 and abs(ev[-1].imag) <= 1e-12 * mod[-1]:
        rep = subspaces[-1][:, 0]

    return EigenData(
        element=g,
        moduli=mod,
        clusters=tuple(clusters),
        subspaces=tuple(subspaces),
        orthogonal_parts=tuple(parts),
        cluster_signed=tuple(signed),
        attracting_line=att,
        repelling_line=rep,
        diagonalizable=diag,
    )


def _generalized_subspace(m, lam, dim):
    n = m.shape[0]
    a = np.linalg.matrix_power(m - lam.real * np.eye(n), n)
    _, s, vt = np.linalg.svd(a)
    return vt[n - dim:].T.copy()


def _as_eigen(g, tol=1e-8) -> EigenData:
    return g if isinstance(g, EigenData) else eigen_split(g, tol)


def is_biproximal(g, tol: float = 1e-8) -> bool:
    """True iff the top and bottom modulus clusters are simple and real."""
    e = _as_eigen(g, tol)
    return e.attracting_line is not None and e.repelling_line is not None


def is_proximal(g, tol: float = 1e-8) -> bool:
    e = _as_eigen(g, tol)
    return e.attracting_line is not None


def is_loxodromic(g, tol: float = 1e-8) -> bool:
    """True iff all n+1 eigenvalue moduli are pairwise distinct."""
    e = _as_eigen(g, tol)
    return all(len(c) == 1 for c in e.clusters)


# ---------------------------------------------------------------------------
# affine charts


class AffineChart:
    """Affine chart of P(R^{n+1}) defined by an invertible matrix T.

    A projective point [p] maps to (q_1/q_0, ..., q_n/q_0) with q = T p; the
    hyperplane at infinity is the kernel of the first row of T.
    """

    def __init__(self, T):
        T = np.asarray(T, dtype=float)
        n1 = T.shape[0]
        if T.shape != (n1, n1):
            raise GeometryError("chart matrix must be square")
        self.T = T.copy()
        self.T.setflags(write=False)
        try:
            self.T_inv = np.linalg.inv(T)
        except np.linalg.LinAlgError as exc:
            raise GeometryError("chart frame is not invertible") from exc
        self.T_inv.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.T.shape[0] - 1

    @property
    def infinity_covector(self) -> np.ndarray:
        return self.T[0]

    def to_chart(self, p):
        """Chart coordinates of homogeneous vectors (last axis = R^{n+1})."""
        q = np.asarray(p, dtype=float) @ self.T.T
        den = q[..., 0]
        if np.any(np.abs(den) < 1e-300):
            raise GeometryError("point lies on the chart's hyperplane at infinity")
        return q[..., 1:] / den[..., None]

    def from_chart(self, x):
        """Homogeneous lift of chart points, normalized so the covector is 1."""
        x = np.asarray(x, dtype=float)
        one = np.ones(x.shape[:-1] + (1,))
        return np.concatenate([one, x], axis=-1) @ self.T_inv.T

    def tangent_to_chart(self, p_hom, w):
        """Differential of the chart map at [p_hom] applied to the linear
        direction w (both in R^{n+1})."""
        q = self.T @ np.asarray(p_hom, dtype=float)
        dq = self.T @ np.asarray(w, dtype=float)
        return (dq[1:] * q[0] - q[1:] * dq[0]) / q[0] ** 2

    def tangent_lift(self, x_chart, z):
        """Linear direction in R^{n+1} representing the chart tangent z at x."""
        z = np.asarray(z, dtype=float)
        zero = np.zeros(z.shape[:-1] + (1,))
        return np.concatenate([zero, z], axis=-1) @ self.T_inv.T


def standard_chart(n: int) -> AffineChart:
    """Chart normalizing by the last homogeneous coordinate: lift x -> (x, 1)."""
    T = np.zeros((n + 1, n + 1))
    T[0, n] = 1.0
    T[1:, :n] = np.eye(n)
    return AffineChart(T)


def projective_action(g: GroupElement, p, chart: AffineChart):
    """Chart coordinates of g.[p] for chart points p.

    Raises GeometryError("leaves chart") when the image hits the chart's
    hyperplane at infinity.
    """
    hom = chart.from_chart(p)
    img = hom @ g.matrix.T
    q0 = (img @ chart.T.T)[..., 0]
    if np.any(np.abs(q0) < 1e-14 * np.linalg.norm(img, axis=-1)):
        raise GeometryError("leaves chart")
    return chart.to_chart(img)


def projective_tangent(g: GroupElement, p, z, chart: AffineChart):
    """Tangent map of the projective action of g at chart point p applied to
    the chart vector z."""
    hom = chart.from_chart(p)
    w = chart.tangent_lift(p, z)
    return chart.tangent_to_chart(g.matrix @ hom, g.matrix @ w)


# ---------------------------------------------------------------------------
# exterior powers


def _ksubsets(n: int, k: int):
    return list(combinations(range(n), k))


def wedge_power(g, k: int) -> np.ndarray:
    """Matrix of the action induced on Lambda^k R^{n+1}, in the lexicographic
    elementary-wedge basis (the k-th compound matrix; multiplicative by
    Cauchy-Binet)."""
    m = g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    n = m.shape[0]
    if not 1 <= k <= n - 1 and k != n:
        raise GeometryError(f"wedge power k={k} out of range 1..{n}")
    if k == 1:
        return m.copy()
    subsets = _ksubsets(n, k)
    out = np.empty((len(subsets), len(subsets)))
    for j, cols in enumerate(subsets):
        sub = m[:, cols]
        for i, rows in enumerate(subsets):
            out[i, j] = np.linalg.det(sub[rows, :])
    return out


def wedge_coordinates(vectors, k: int | None = None) -> np.ndarray:
    """Coordinates of v_1 ^ ... ^ v_k in the lexicographic wedge basis,
    for an (n+1, k) column matrix."""
    v = np.asarray(vectors, dtype=float)
    n, kk = v.shape
    if k is not None and k != kk:
        raise GeometryError("column count does not match k")
    subsets = _ksubsets(n, kk)
    return np.array([np.linalg.det(v[rows, :]) for rows in subsets])
