import numpy as np
import pytest

from hilbertflow import domainbuild
from hilbertflow.groups import example_group


@pytest.fixture(scope="session")
def riemannian_group():
    return example_group("so21_triangle")


@pytest.fixture(scope="session")
def deformed_group():
    return example_group("deformed_triangle")


@pytest.fixture(scope="session")
def simplex_group():
    return example_group("so31_simplex")


@pytest.fixture(scope="session")
def disc():
    return domainbuild.ellipsoid_domain(2)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def klein_distance(a, b):
    """Hyperbolic distance in the Klein ball model (independent oracle)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    num = 1.0 - a @ b
    den = np.sqrt((1.0 - a @ a) * (1.0 - b @ b))
    return np.arccosh(num / den)


def biproximal_elements(group, max_len, limit=None):
    """Normalized biproximal elements of reduced words up to max_len."""
    from hilbertflow.groups import words_matrices
    from hilbertflow.projlin import is_biproximal, normalize_unimodular

    out = []
    words, mats = words_matrices(group, max_len)
    for w, m in zip(words, mats):
        g = normalize_unimodular(m, w)
        if is_biproximal(g):
            out.append(g)
            if limit and len(out) >= limit:
                break
    return out
