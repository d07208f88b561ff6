"""Constructive typicality certificates: a loxodromic word plus a connecting
word whose action is transverse to every pair of complementary invariant
subspaces, across all exterior powers."""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from hilbertflow.groups import MatrixGroup, group_hash, reduced_words
from hilbertflow.projlin import (EigenData, GeometryError, GroupElement,
                                 eigen_split, is_loxodromic, wedge_coordinates,
                                 wedge_power)


class SearchExhausted(GeometryError):
    """No candidate satisfied the requirement within the length bound."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def find_loxodromic(group: MatrixGroup, max_len: int,
                    tol: float = 1e-8) -> GroupElement:
    """Shortest reduced word (breadth-first, lexicographic ties) whose matrix
    is loxodromic; deterministic given the generator order."""
    if max_len < 1:
        raise GeometryError("max word length must be >= 1")
    n_biproximal_only = 0
    from hilbertflow.projlin import is_biproximal, normalize_unimodular

    for word, m in reduced_words(group, max_len):
        g = normalize_unimodular(m, word)
        e = eigen_split(g, tol)
        if is_loxodromic(e):
            return g
        if is_biproximal(e):
            n_biproximal_only += 1
    raise SearchExhausted(
        f"no loxodromic word up to length {max_len} "
        f"({n_biproximal_only} biproximal-but-not-loxodromic words seen)")


def _eigen_basis(theta_eigen: EigenData) -> np.ndarray:
    """Unit eigenvector columns of a loxodromic element, by descending
    modulus."""
    if not all(len(c) == 1 for c in theta_eigen.clusters):
        raise GeometryError("transversality margins need a loxodromic element")
    cols = [theta_eigen.subspaces[i][:, 0] for i in range(len(theta_eigen.clusters))]
    return np.stack(cols, axis=1)


def margin_pairs(z_matrix, theta_eigen: EigenData, k: int) -> dict:
    """Column-normalized |det| margins for every pair (F, G) of
    theta-invariant subspaces with dim F = k, dim G = n+1-k, F pushed through
    z. Keys are (F index set, G index set)."""
    B = _eigen_basis(theta_eigen)
    n1 = B.shape[0]
    if not 1 <= k <= n1 - 1:
        raise GeometryError(f"level k={k} out of range 1..{n1 - 1}")
    z = np.asarray(z_matrix, dtype=float)
    zB = z @ B
    zB = zB / np.linalg.norm(zB, axis=0, keepdims=True)
    out = {}
    for S in combinations(range(n1), k):
        left = zB[:, S]
        for G in combinations(range(n1), n1 - k):
            m = np.concatenate([left, B[:, G]], axis=1)
            out[(S, G)] = abs(float(np.linalg.det(m)))
    return out


def transversality_margin(z_matrix, theta_eigen: EigenData, k: int) -> float:
    """Minimum margin over all complementary-dimension pairs at level k."""
    return min(margin_pairs(z_matrix, theta_eigen, k).values())


def margin_via_wedge(z_matrix, theta_eigen: EigenData, k: int,
                     pair: tuple[tuple, tuple]) -> float:
    """Same margin as margin_pairs for one pair, computed through exterior
    powers: z . (wedge of F) via wedge_power (Cauchy-Binet), contracted with
    the wedge of G by generalized Laplace expansion along the first k
    columns."""
    B = _eigen_basis(theta_eigen)
    n1 = B.shape[0]
    S, G = pair
    z = np.asarray(z_matrix, dtype=float)
    norm_prod = float(np.prod(np.linalg.norm(z @ B[:, S], axis=0)))
    w_left = wedge_power(z, k) @ wedge_coordinates(B[:, S]) / norm_prod
    w_right = wedge_coordinates(B[:, G])
    ksubsets = list(combinations(range(n1), k))
    comp_pos = {c: i for i, c in enumerate(combinations(range(n1), n1 - k))}
    base = k * (k + 1) // 2
    total = 0.0
    for si, rows in enumerate(ksubsets):
        comp = tuple(i for i in range(n1) if i not in rows)
        sign = -1.0 if (sum(rows) + k + base) % 2 else 1.0
        total += sign * w_left[si] * w_right[comp_pos[comp]]
    return abs(total)


def _margins_all_levels(z_matrix, theta_eigen: EigenData) -> dict[int, float]:
    n1 = theta_eigen.dim
    return {k: transversality_margin(z_matrix, theta_eigen, k)
            for k in range(1, n1)}


@dataclass(frozen=True)
class TypicalityCertificate:
    theta: tuple[int, ...]
    z: tuple[int, ...]
    margins: dict
    min_margin: float
    threshold: float
    group_hash: str
    words_examined: int
    max_length_reached: int

    def to_json(self) -> dict:
        return {
            "theta": list(self.theta),
            "z": list(self.z),
            "margins": {str(k): v for k, v in self.margins.items()},
            "min_margin": self.min_margin,
            "threshold": self.threshold,
            "group_hash": self.group_hash,
            "words_examined": self.words_examined,
            "max_length_reached": self.max_length_reached,
        }


def certificate_from_json(doc: dict) -> TypicalityCertificate:
    return TypicalityCertificate(
        theta=tuple(int(x) for x in doc["theta"]),
        z=tuple(int(x) for x in doc["z"]),
        margins={int(k): float(v) for k, v in doc["margins"].items()},
        min_margin=float(doc["min_margin"]),
        threshold=float(doc["threshold"]),
        group_hash=str(doc["group_hash"]),
        words_examined=int(doc["words_examined"]),
        max_length_reached=int(doc["max_length_reached"]),
    )


def save_certificate(cert: TypicalityCertificate, path):
    with open(path, "w") as fh:
        json.dump(cert.to_json(), fh, indent=1, sort_keys=True)


def load_certificate(path) -> TypicalityCertificate:
    with open(path) as fh:
        return certificate_from_json(json.load(fh))


def ams_search(group: MatrixGroup, theta: GroupElement, max_len: int,
               threshold: float = 1e-8) -> TypicalityCertificate:
    """First reduced word z (breadth-first) whose margins clear the threshold
    at every exterior-power level simultaneously.

    The underlying transversality is guaranteed to be achievable for
    Zariski-dense groups; the search treats success as empirical and raises
    SearchExhausted (carrying the best candidate) if the bound is hit.
    """
    e = eigen_split(theta)
    if not is_loxodromic(e):
        raise GeometryError("theta must be loxodromic")
    best = None
    examined = 0
    candidates = [((), np.eye(group.dim))]

    def consider(word, m):
        nonlocal best
        margins = _margins_all_levels(m, e)
        mm = min(margins.values())
        if best is None or mm > best[1]:
            best = (word, mm)
        return margins, mm

    for word, m in candidates:
        examined += 1
        margins, mm = consider(word, m)
        if mm >= threshold:
            return TypicalityCertificate(
                theta=theta.word or (), z=word, margins=margins,
                min_margin=mm, threshold=threshold,
                group_hash=group_hash(group), words_examined=examined,
                max_length_reached=0)
    for word, m in reduced_words(group, max_len):
        examined += 1
        margins, mm = consider(word, m)
        if mm >= threshold:
            return TypicalityCertificate(
                theta=theta.word or (), z=word, margins=margins,
                min_margin=mm, threshold=threshold,
                group_hash=group_hash(group), words_examined=examined,
                max_length_reached=len(word))
    raise SearchExhausted(
        f"no connecting word up to length {max_len} reached margin "
        f"{threshold:g}; best {best[1]:.3e} at word {best[0]!r}", best=best)


def verify_certificate(group: MatrixGroup, cert: TypicalityCertificate,
                       margin_tol: float = 1e-12) -> bool:
    """Recompute loxodromy and all margins from the stored words alone."""
    try:
        theta = group.element(cert.theta)
    except (IndexError, GeometryError):
        raise GeometryError("certificate words are not composable from the "
                            "group generators")
    e = eigen_split(theta)
    if not is_loxodromic(e):
        return False
    if group_hash(group) != cert.group_hash:
        return False
    z = group.element(cert.z)
    margins = _margins_all_levels(z.matrix, e)
    for k, v in margins.items():
        stored = cert.margins.get(k)
        if stored is None or abs(stored - v) > margin_tol * max(1.0, abs(v)):
            return False
    return min(margins.values()) >= cert.threshold
