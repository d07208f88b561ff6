"""Matrix groups given by generators: file format, hashing, reduced words.

Group files are JSON documents {"dim": n+1, "generators": [row-major
matrices], "labels": [...]}; matrices are validated and normalized to
|det| = 1 on load. Words are tuples of signed 1-based generator indices;
generators that square to the identity are detected and enumerated without a
separate inverse letter (free product of Z/2 factors).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from hilbertflow.projlin import (GeometryError, GroupElement,
                                 normalize_unimodular, reduce_word)


class GroupFileError(GeometryError):
    """Malformed group file."""


@dataclass(frozen=True)
class MatrixGroup:
    generators: tuple[GroupElement, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        dims = {g.dim for g in self.generators}
        if len(dims) != 1:
            raise GroupFileError("generators must share one dimension")
        if len(self.labels) != len(self.generators):
            raise GroupFileError("labels must match generators")

    @property
    def dim(self) -> int:
        return self.generators[0].dim

    @property
    def involutions(self) -> tuple[bool, ...]:
        eye = np.eye(self.dim)
        return tuple(np.abs(g.matrix @ g.matrix - eye).max() < 1e-9
                     for g in self.generators)

    def generator(self, letter: int) -> GroupElement:
        """Generator (or inverse) for a signed 1-based letter."""
        g = self.generators[abs(letter) - 1]
        return g if letter > 0 else g.inverse()

    def element(self, word) -> GroupElement:
        """Product of generators along the word, left to right."""
        m = np.eye(self.dim)
        sign = 1
        for letter in word:
            gen = self.generator(int(letter))
            m = m @ gen.matrix
            sign *= gen.det_sign
        return GroupElement(m, tuple(int(l) for l in word), sign)


def group_to_json(group: MatrixGroup) -> dict:
    return {
        "dim": group.dim,
        "generators": [g.matrix.tolist() for g in group.generators],
        "labels": list(group.labels),
    }


def group_from_json(doc: dict) -> MatrixGroup:
    try:
        dim = int(doc["dim"])
        mats = doc["generators"]
        labels = doc.get("labels") or [chr(ord("a") + i) for i in range(len(mats))]
    except (KeyError, TypeError, ValueError) as exc:
        raise GroupFileError(f"malformed group document: {exc}") from exc
    gens = []
    for m in mats:
        arr = np.asarray(m, dtype=float)
        if arr.shape != (dim, dim):
            raise GroupFileError(
                f"generator shape {arr.shape} does not match dim {dim}")
        try:
            gens.append(normalize_unimodular(arr))
        except GeometryError as exc:
            raise GroupFileError(str(exc)) from exc
    if not gens:
        raise GroupFileError("group has no generators")
    return MatrixGroup(tuple(gens), tuple(str(l) for l in labels))


def load_group(path) -> MatrixGroup:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise GroupFileError(f"cannot read group file {path}: {exc}") from exc
    return group_from_json(doc)


def save_group(group: MatrixGroup, path):
    with open(path, "w") as fh:
        json.dump(group_to_json(group), fh, indent=1, sort_keys=True)


def group_hash(group: MatrixGroup) -> str:
    doc = json.dumps(group_to_json(group), sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# reduced-word enumeration


def letters(group: MatrixGroup) -> list[int]:
    """Signed letters in deterministic order: +1, -1, +2, ... (no -i for
    involutive generators)."""
    out = []
    for i, inv in enumerate(group.involutions, start=1):
        out.append(i)
        if not inv:
            out.append(-i)
    return out


def _blocked(last: int, nxt: int, involutions) -> bool:
    if involutions[abs(nxt) - 1]:
        return last == nxt
    return last == -nxt


def reduced_words(group: MatrixGroup, max_len: int):
    """Breadth-first reduced words up to max_len with their matrices,
    in deterministic (length, lexicographic) order. Yields (word, matrix)."""
    alphabet = letters(group)
    inv = group.involutions
    mats = {l: group.generator(l).matrix for l in alphabet}
    level = [((), np.eye(group.dim))]
    for _ in range(max_len):
        nxt = []
        for word, m in level:
            for l in alphabet:
                if word and _blocked(word[-1], l, inv):
                    continue
                nxt.append((word + (l,), m @ mats[l]))
        yield from nxt
        level = nxt


def words_matrices(group: MatrixGroup, max_len: int):
    """All reduced words up to max_len, as (list of words, stacked matrices)."""
    words = []
    mats = []
    for w, m in reduced_words(group, max_len):
        words.append(w)
        mats.append(m)
    return words, np.array(mats)


def word_label(group: MatrixGroup, word) -> str:
    """Render a word with generator labels; inverses get a prime suffix."""
    parts = []
    for l in word:
        lab = group.labels[abs(l) - 1]
        parts.append(lab if l > 0 else lab + "'")
    return "".join(parts) if parts else "e"


def parse_word(group: MatrixGroup, text: str) -> tuple[int, ...]:
    """Inverse of word_label for single-character labels."""
    lab_to_idx = {lab: i + 1 for i, lab in enumerate(group.labels)}
    out: list[int] = []
    i = 0
    text = text.strip()
    if text in ("", "e"):
        return ()
    while i < len(text):
        ch = text[i]
        if ch not in lab_to_idx:
            raise GroupFileError(f"unknown generator label {ch!r}")
        idx = lab_to_idx[ch]
        if i + 1 < len(text) and text[i + 1] == "'":
            out.append(-idx)
            i += 2
        else:
            out.append(idx)
            i += 1
    return tuple(out)


# ---------------------------------------------------------------------------
# shipped example groups


def triangle_group(m12: int, m13: int, m23: int, s: float = 1.0,
                   to_unit_disc: bool = False) -> MatrixGroup:
    """Linear reflection group of a (m12, m13, m23) triangle in SL(3, R).

    The Cartan matrix has diagonal 2 and off-diagonal products fixed at
    4 cos^2(pi/m_ij); ``s`` skews the 12/21 pair, which is the one-parameter
    deformation of the symmetric (hyperbolic-geometry) case s = 1. With
    ``to_unit_disc`` (s = 1 only) the representation is conjugated so the
    invariant quadratic form is exactly diag(1, 1, -1), making the invariant
    domain the unit disc.
    """
    c12 = 2.0 * np.cos(np.pi / m12)
    c13 = 2.0 * np.cos(np.pi / m13)
    c23 = 2.0 * np.cos(np.pi / m23)
    A = np.array([
        [2.0, -s * c12, -c13],
        [-c12 / s, 2.0, -c23],
        [-c13, -c23, 2.0],
    ])
    refl = [np.eye(3) - np.outer(np.eye(3)[i], A[i]) for i in range(3)]
    if to_unit_disc:
        if abs(s - 1.0) > 1e-12:
            raise GeometryError("unit-disc form requires the symmetric case s = 1")
        w, V = np.linalg.eigh(A)
        order = np.argsort(-w)
        w, V = w[order], V[:, order]
        if not (w[0] > 0 and w[1] > 0 and w[2] < 0):
            raise GeometryError("Cartan matrix is not of signature (2,1)")
        P = np.diag(np.sqrt(np.abs(w))) @ V.T
        Pinv = np.linalg.inv(P)
        refl = [P @ S @ Pinv for S in refl]
    gens = tuple(normalize_unimodular(S) for S in refl)
    return MatrixGroup(gens, ("a", "b", "c"))


def coxeter_simplex_group(diagram: tuple[int, ...] = (4, 3, 5)) -> MatrixGroup:
    """Reflection group of a compact hyperbolic Coxeter simplex in H^3 with
    linear diagram labels (m01, m12, m23), conjugated so the invariant form
    is diag(1, 1, 1, -1) and the invariant domain is the unit ball."""
    m = np.full((4, 4), 2, dtype=float)
    np.fill_diagonal(m, 1.0)
    for i, lab in enumerate(diagram):
        m[i, i + 1] = m[i + 1, i] = lab
    G = -np.cos(np.pi / m)
    np.fill_diagonal(G, 1.0)
    w, V = np.linalg.eigh(G)
    order = np.argsort(-w)
    w, V = w[order], V[:, order]
    if not (w[2] > 0 > w[3]):
        raise GeometryError("Gram matrix is not of signature (3,1)")
    P = np.diag(np.sqrt(np.abs(w))) @ V.T
    Pinv = np.linalg.inv(P)
    gens = []
    for i in range(4):
        S = np.eye(4) - 2.0 * np.outer(np.eye(4)[i], G[i])
        gens.append(normalize_unimodular(P @ S @ Pinv))
    return MatrixGroup(tuple(gens), ("a", "b", "c", "d"))


EXAMPLE_BUILDERS = {
    "so21_triangle": lambda: triangle_group(3, 3, 4, s=1.0, to_unit_disc=True),
    "deformed_triangle": lambda: triangle_group(3, 3, 4, s=1.8),
    "so31_simplex": lambda: coxeter_simplex_group((4, 3, 5)),
}


def example_group(name: str) -> MatrixGroup:
    """One of the shipped example groups, built deterministically in code."""
    try:
        return EXAMPLE_BUILDERS[name]()
    except KeyError:
        raise GroupFileError(
            f"unknown example {name!r}; choices: {sorted(EXAMPLE_BUILDERS)}"
        ) from None
