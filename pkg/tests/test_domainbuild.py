import numpy as np
import pytest

from hilbertflow import domainbuild, domains
from hilbertflow.domainbuild import (EmptySampleError, ellipsoid_domain,
                                     invariance_defect, limit_set_sample,
                                     orbit_hull_domain, refine_limit_set)
from hilbertflow.groups import MatrixGroup
from hilbertflow.projlin import (GeometryError, is_biproximal,
                                 normalize_unimodular, projective_action,
                                 standard_chart)


def conic_residual(points):
    """Algebraic residual of the best-fit conic through normalized points."""
    p = np.asarray(points, dtype=float)
    p = (p - p.mean(axis=0)) / p.std(axis=0).mean()
    x, y = p[:, 0], p[:, 1]
    design = np.stack([x * x, x * y, y * y, x, y, np.ones_like(x)], axis=1)
    _, _, vt = np.linalg.svd(design, full_matrices=False)
    return float(np.abs(design @ vt[-1]).mean())


def rotation_group():
    c, s = np.cos(0.7), np.sin(0.7)
    r = normalize_unimodular(np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]]))
    return MatrixGroup((r,), ("r",))


class TestEllipsoidDomain:
    def test_unit_disc(self):
        dom = ellipsoid_domain(2)
        assert domains.contains(dom, np.zeros(2))
        assert not domains.contains(dom, np.array([2.0, 0.0]))

    def test_bad_dimension(self):
        with pytest.raises(GeometryError):
            ellipsoid_domain(0)


class TestLimitSet:
    def test_riemannian_on_circle(self, riemannian_group):
        sample = limit_set_sample(riemannian_group, 8)
        r = np.abs(np.linalg.norm(sample.points, axis=1) - 1.0)
        assert r.max() < 1e-8
        assert len(sample) > 50

    def test_elliptic_only_errors(self):
        with pytest.raises(EmptySampleError, match="no proximal"):
            limit_set_sample(rotation_group(), 1)

    def test_words_are_fixed_points(self, deformed_group):
        sample = limit_set_sample(deformed_group, 5)
        chart = sample.chart
        for word, p in zip(sample.source_words[:40], sample.points[:40]):
            g = deformed_group.element(word)
            assert np.abs(projective_action(g, p, chart) - p).max() < 1e-8

    def test_conjugacy_covariance(self, deformed_group):
        chart = standard_chart(2)
        w = (1, 2, 3)
        h = deformed_group.element((2, 3))
        g = deformed_group.element(w)
        conj = normalize_unimodular(
            h.matrix @ g.matrix @ np.linalg.inv(h.matrix))
        from hilbertflow.projlin import eigen_split

        p_g = chart.to_chart(eigen_split(g).attracting_line)
        p_c = chart.to_chart(eigen_split(conj).attracting_line)
        assert np.abs(projective_action(h, p_g, chart) - p_c).max() < 1e-9

    def test_dedup(self, riemannian_group):
        sample = limit_set_sample(riemannian_group, 6)
        from scipy.spatial import cKDTree

        assert len(cKDTree(sample.points).query_pairs(1e-10)) == 0

    def test_refinement_stays_on_limit_set(self, riemannian_group):
        sample = limit_set_sample(riemannian_group, 6)
        refined = refine_limit_set(riemannian_group, sample, (1, 2, 3), 10)
        r = np.abs(np.linalg.norm(refined.points, axis=1) - 1.0)
        # points escaping the repelling end amplify base noise; the bulk
        # stays at eigenvector precision
        assert np.median(r) < 1e-10
        assert r.max() < 1e-4
        assert len(refined) > 5 * len(sample)


class TestOrbitHull:
    def test_riemannian_hull_vertices_on_circle(self, riemannian_group):
        dom = orbit_hull_domain(riemannian_group, np.zeros(2), 8)
        assert dom.kind == "polygon"
        r = np.abs(np.linalg.norm(dom.vertices, axis=1) - 1.0)
        assert r.max() < 1e-8
        assert conic_residual(dom.vertices) < 1e-8

    def test_degenerate_hull(self):
        boost = normalize_unimodular(np.diag([2.0, 1.0, 0.5]))
        grp = MatrixGroup((boost,), ("a",))
        with pytest.raises(GeometryError, match="degenerate|[Qq]hull"):
            orbit_hull_domain(grp, np.array([0.0, 0.0]), 3)

    def test_deformed_hull_not_conic(self, deformed_group):
        sample = limit_set_sample(deformed_group, 10)
        seed = sample.points.mean(axis=0)
        dom = orbit_hull_domain(deformed_group, seed, 10, sample=sample)
        assert len(dom.vertices) >= 100
        assert conic_residual(dom.vertices) > 1e-3

    def test_hull_monotone(self, deformed_group):
        seeds = {}
        for L in (6, 8):
            sample = limit_set_sample(deformed_group, L)
            seeds[L] = orbit_hull_domain(
                deformed_group, sample.points.mean(axis=0), L, sample=sample)
        for v in seeds[6].vertices:
            assert domains.contains(seeds[8], v, tol=1e-10)

    def test_axis_endpoints_on_hull(self, deformed_group):
        sample = limit_set_sample(deformed_group, 9)
        dom = orbit_hull_domain(deformed_group, sample.points.mean(axis=0), 9,
                                sample=sample)
        from hilbertflow.projlin import eigen_split

        g = deformed_group.element((1, 2, 3))
        e = eigen_split(g)
        for line in (e.attracting_line, e.repelling_line):
            p = dom.chart.to_chart(line)
            assert abs(domains.boundary_distance(dom, p)) < 1e-6


class TestInvarianceDefect:
    def test_riemannian_exact(self, riemannian_group, disc):
        assert invariance_defect(disc, riemannian_group) < 1e-9

    def test_hull_defect_decreases(self, deformed_group):
        defects = []
        for L in (6, 8, 10):
            sample = limit_set_sample(deformed_group, L)
            dom = orbit_hull_domain(deformed_group,
                                    sample.points.mean(axis=0), L,
                                    sample=sample)
            defects.append(invariance_defect(dom, deformed_group,
                                             n_samples=100))
        assert defects[2] < defects[0]
        assert defects[2] < 1e-3

    def test_negative_control(self, disc, rng):
        bad = MatrixGroup(
            (normalize_unimodular(rng.standard_normal((3, 3)) + 2 * np.eye(3)),),
            ("x",))
        assert invariance_defect(disc, bad) > 0.01


class TestCSV:
    def test_export(self, riemannian_group, tmp_path):
        sample = limit_set_sample(riemannian_group, 5)
        path = tmp_path / "ls.csv"
        domainbuild.limit_set_to_csv(sample, path, riemannian_group,
                                     {"group_hash": "abc"})
        text = path.read_text()
        assert text.startswith("# group_hash=abc")
        assert len(text.splitlines()) == len(sample) + 2
