import numpy as np
import pytest

from hilbertflow import domainbuild, domains, spectra
from hilbertflow.domainbuild import EmptySampleError
from hilbertflow.groups import MatrixGroup
from hilbertflow.projlin import (AffineChart, GeometryError,
                                 normalize_unimodular)
from hilbertflow.spectra import (NotBiproximalError, boundary_alpha_predicted,
                                 cocycle_exponents_periodic, flow_exponents,
                                 hilbert_length, link_parallel_from_cocycle,
                                 numeric_vs_exact_transport, orbit_spectrum,
                                 parallel_exponents, simplicity_report,
                                 transport_matrix_closed_form)
from tests.conftest import biproximal_elements

DIAG8 = normalize_unimodular(np.diag([8.0, 2.0, 1.0 / 16.0]))
DIAG4 = normalize_unimodular(np.diag([4.0, 1.0, 0.25]))
LN2 = np.log(2.0)


def rotation3(theta):
    c, s = np.cos(theta), np.sin(theta)
    return normalize_unimodular(
        np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))


class TestHilbertLength:
    def test_diag8(self):
        assert abs(hilbert_length(DIAG8) - 3.5 * LN2) < 1e-14

    def test_diag4(self):
        assert abs(hilbert_length(DIAG4) - np.log(4.0)) < 1e-14

    def test_square_doubles(self, deformed_group):
        g = deformed_group.element((1, 2, 3))
        g2 = normalize_unimodular(g.matrix @ g.matrix)
        assert abs(hilbert_length(g2) - 2.0 * hilbert_length(g)) < 1e-12

    def test_non_biproximal(self):
        with pytest.raises(NotBiproximalError, match="no closed geodesic"):
            hilbert_length(rotation3(0.5))


class TestParallelExponents:
    def test_symmetric_middle_zero(self):
        eta, _ = parallel_exponents(DIAG4)
        assert np.allclose(eta, [0.0], atol=1e-14)

    def test_diag8(self):
        eta, labels = parallel_exponents(DIAG8)
        assert np.allclose(eta, [-3.0 / 7.0], atol=1e-14)
        assert labels == (1,)

    def test_riemannian_zero(self, riemannian_group):
        for g in biproximal_elements(riemannian_group, 4, limit=20):
            eta, _ = parallel_exponents(g)
            assert np.abs(eta).max() < 1e-12

    def test_in_open_interval(self, deformed_group):
        for g in biproximal_elements(deformed_group, 6, limit=100):
            eta, _ = parallel_exponents(g)
            assert np.all(eta > -1.0) and np.all(eta < 1.0)

    def test_multiplicity(self, simplex_group):
        g = simplex_group.element((1, 2, 3, 4))
        eta, labels = parallel_exponents(g)
        assert len(eta) == 2 and labels == (1, 1)
        assert np.abs(eta).max() < 1e-12


class TestCocycleLink:
    def test_diag8_ell(self):
        ell = cocycle_exponents_periodic(DIAG8)
        assert np.allclose(ell, [-8.0 / 7.0, 2.0 / 7.0, 6.0 / 7.0], atol=1e-14)

    def test_sum_zero(self, deformed_group):
        for g in biproximal_elements(deformed_group, 5, limit=50):
            assert abs(cocycle_exponents_periodic(g).sum()) < 1e-10

    def test_so21_unit_exponents(self, riemannian_group):
        g = riemannian_group.element((1, 2, 3))
        assert np.allclose(cocycle_exponents_periodic(g), [-1.0, 0.0, 1.0],
                           atol=1e-12)

    def test_link_worked_example(self):
        eta = link_parallel_from_cocycle([-8.0 / 7.0, 2.0 / 7.0, 6.0 / 7.0])
        assert np.allclose(eta, [-3.0 / 7.0], atol=1e-14)

    def test_link_riemannian(self):
        assert np.allclose(link_parallel_from_cocycle([-1.0, 0.0, 1.0]), [0.0])

    def test_link_degenerate(self):
        with pytest.raises(GeometryError, match="degenerate"):
            link_parallel_from_cocycle([0.3, 0.3, 0.3])

    @pytest.mark.parametrize("group_name", ["riemannian_group",
                                            "deformed_group",
                                            "simplex_group"])
    def test_link_composes_to_parallel(self, group_name, request):
        group = request.getfixturevalue(group_name)
        max_len = 4 if group.dim == 4 else 6
        for g in biproximal_elements(group, max_len, limit=60):
            eta, _ = parallel_exponents(g)
            linked = link_parallel_from_cocycle(cocycle_exponents_periodic(g))
            assert np.abs(np.sort(eta) - np.sort(linked)).max() < 1e-10


class TestFlowAndAlpha:
    def test_riemannian(self):
        chi_u, chi_s = flow_exponents([0.0])
        assert np.allclose(chi_u, [1.0]) and np.allclose(chi_s, [-1.0])
        assert np.allclose(boundary_alpha_predicted([0.0]), [2.0])

    def test_diag8(self):
        chi_u, chi_s = flow_exponents([-3.0 / 7.0])
        assert np.allclose(chi_u, [4.0 / 7.0]) and np.allclose(chi_s, [-10.0 / 7.0])
        alpha = boundary_alpha_predicted([-3.0 / 7.0])
        assert np.allclose(alpha, [3.5], atol=1e-14)
        assert abs(alpha[0] - np.log(128.0) / np.log(4.0)) < 1e-12

    def test_sum_identity(self, deformed_group):
        for g in biproximal_elements(deformed_group, 5, limit=30):
            eta, _ = parallel_exponents(g)
            chi_u, _ = flow_exponents(eta)
            n = g.dim - 1
            assert abs(chi_u.sum() - ((n - 1) + eta.sum())) < 1e-12

    def test_alpha_ascending_when_simple(self, rng):
        g = normalize_unimodular(np.diag([9.0, 2.5, 0.8, 1.0 / 18.0]))
        alpha = boundary_alpha_predicted(parallel_exponents(g)[0])
        assert np.all(np.diff(alpha) > 0)
        assert np.all(alpha > 1.0)


class TestOrbitSpectrum:
    def test_fields(self, deformed_group):
        g = deformed_group.element((1, 2, 3))
        s = orbit_spectrum(g)
        assert s.word == (1, 2, 3)
        assert s.simple and s.loxodromic and s.diagonalizable
        assert -1 < s.eta[0] < 1
        assert s.length > 0

    def test_reversal_invariant(self, deformed_group):
        for g in biproximal_elements(deformed_group, 5, limit=50):
            eta, _ = parallel_exponents(g)
            eta_inv, _ = parallel_exponents(g.inverse())
            assert np.abs(eta_inv - (-eta[::-1])).max() < 1e-12

    def test_conjugation_invariant(self, deformed_group, rng):
        h = normalize_unimodular(rng.standard_normal((3, 3)) + 3 * np.eye(3))
        for g in biproximal_elements(deformed_group, 4, limit=20):
            conj = normalize_unimodular(
                h.matrix @ g.matrix @ np.linalg.inv(h.matrix))
            assert abs(hilbert_length(conj) - hilbert_length(g)) < 1e-10
            assert np.abs(parallel_exponents(conj)[0]
                          - parallel_exponents(g)[0]).max() < 1e-10

    def test_power_invariant(self, deformed_group):
        for g in biproximal_elements(deformed_group, 4, limit=10):
            g3 = normalize_unimodular(np.linalg.matrix_power(g.matrix, 3))
            assert abs(hilbert_length(g3) - 3 * hilbert_length(g)) < 1e-10
            assert np.abs(parallel_exponents(g3)[0]
                          - parallel_exponents(g)[0]).max() < 1e-10


class TestExactTransport:
    def test_diag8_block_scale(self):
        t = transport_matrix_closed_form(DIAG8)
        assert abs(t.block_scales[0] - np.sqrt(0.5) / 2.0) < 1e-14

    def test_riemannian_orthogonal_block(self, riemannian_group):
        for g in biproximal_elements(riemannian_group, 4, limit=10):
            t = transport_matrix_closed_form(g)
            assert abs(t.block_scales[0] - 1.0) < 1e-10
            U = t.orthogonal_parts[0]
            assert np.abs(U.T @ U - np.eye(U.shape[0])).max() < 1e-8

    def test_block_norm_gives_eta(self, deformed_group):
        for g in biproximal_elements(deformed_group, 4, limit=10):
            t = transport_matrix_closed_form(g)
            for (a, b), eta_i in zip(t.block_slices, t.eta):
                block = t.matrix[a:b, a:b]
                rate = np.log(np.linalg.norm(block, 2)) / t.period
                assert abs(rate - eta_i) < 1e-12

    def test_non_diagonalizable_refused(self):
        m = np.zeros((4, 4))
        m[0, 0] = 8.0
        m[1:3, 1:3] = [[1.0, 1.0], [0.0, 1.0]]
        m[3, 3] = 1.0 / 8.0
        g = normalize_unimodular(m)
        eta, _ = parallel_exponents(g)
        assert np.allclose(eta, [0.0, 0.0], atol=1e-14)
        with pytest.raises(GeometryError, match="numeric transport"):
            transport_matrix_closed_form(g)


def adapted_invariant_domain(lam_signed, c=1.0):
    """Exactly invariant ellipse for a Riemannian-type diagonal element, in
    its adapted chart (requires |lam_1| = sqrt(lam_0 lam_2))."""
    g = normalize_unimodular(np.diag(lam_signed))
    T = np.array([[1.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    dom = domains.ellipsoid(np.array([0.5, 0.0]), np.diag([4.0, 4.0 * c]),
                            chart=AffineChart(T))
    return g, dom


class TestNumericVsExact:
    def test_disc_so21(self, riemannian_group, disc):
        for g in biproximal_elements(riemannian_group, 4, limit=10):
            assert numeric_vs_exact_transport(disc, g, n_samples=5) < 1e-8

    def test_ball_so31(self, simplex_group):
        ball = domainbuild.ellipsoid_domain(3)
        g = simplex_group.element((1, 2, 3, 4))
        assert numeric_vs_exact_transport(ball, g, n_samples=5) < 1e-8

    @pytest.mark.parametrize("lam,c", [
        ((3.0, 1.0, 1.0 / 3.0), 1.0),
        ((5.0, 1.0, 0.2), 4.0),
        ((-4.0, 1.0, -0.25), 0.5),
    ])
    def test_adapted_invariant_ellipse(self, lam, c):
        g, dom = adapted_invariant_domain(np.array(lam), c)
        assert numeric_vs_exact_transport(dom, g, n_samples=8) < 1e-10

    def test_multi_period(self):
        g, dom = adapted_invariant_domain(np.array([3.0, 1.0, 1.0 / 3.0]))
        assert numeric_vs_exact_transport(dom, g, n_samples=4,
                                          periods=3) < 1e-9

    def test_wrong_domain_detected(self, disc):
        # biproximal element whose axis crosses the disc but which does not
        # preserve it
        V = np.array([[0.5, 0.0, -0.5], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
        bad = normalize_unimodular(
            V @ np.diag([3.0, 1.0, 1.0 / 3.0]) @ np.linalg.inv(V))
        from hilbertflow.projlin import is_biproximal

        assert is_biproximal(bad)
        assert numeric_vs_exact_transport(disc, bad, n_samples=4) > 0.01

    def test_self_similar_invariant_domain(self):
        # non-Riemannian invariant model domain: |y| < (u (1-u)^k)^(1/(1+k))
        # is exactly invariant under diag(l0, l1, l2) with
        # k = log(l0/l1)/log(l1/l2); polygonal approximation limits accuracy
        lam = np.array([4.0, 1.4, 1.0 / 5.6])
        kappa = np.log(lam[0] / lam[1]) / np.log(lam[1] / lam[2])
        g = normalize_unimodular(np.diag(lam))
        T = np.array([[1.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        u = 0.5 * (1.0 - np.cos(np.linspace(1e-4, np.pi - 1e-4, 2500)))
        y = (u * (1.0 - u) ** kappa) ** (1.0 / (1.0 + kappa))
        verts = np.concatenate([
            np.stack([u, y], axis=1),
            np.stack([u[::-1], -y[::-1]], axis=1)])
        dom = domains.from_polygon(verts, chart=AffineChart(T),
                                   base_point=np.array([0.5, 0.0]))
        eta, _ = spectra.parallel_exponents(g)
        assert abs(eta[0]) > 0.05  # genuinely non-Riemannian
        assert numeric_vs_exact_transport(dom, g, n_samples=6) < 1e-4

    def test_hull_domain_consistency(self, deformed_group):
        sample = domainbuild.limit_set_sample(deformed_group, 10)
        dom = domainbuild.orbit_hull_domain(
            deformed_group, sample.points.mean(axis=0), 10, sample=sample)
        g = deformed_group.element((1, 2, 3))
        assert numeric_vs_exact_transport(dom, g, n_samples=4) < 5e-2


class TestSimplicityReport:
    def test_riemannian(self, riemannian_group):
        rep = simplicity_report(riemannian_group, 6)
        assert rep.min_gap is None
        assert rep.min_abs_eta < 1e-10
        assert rep.fraction_simple == 1.0

    def test_deformed_signature(self, deformed_group):
        rep = simplicity_report(deformed_group, 6)
        # words conjugate to their inverse (two-involution products) have
        # eta = 0 exactly, so the signature is max|eta|, not min
        assert rep.max_abs_eta > 0.1
        assert rep.fraction_eta_nonzero > 1.0 / 3.0
        assert rep.n_loxodromic == rep.n_biproximal
        assert rep.fraction_simple == 1.0

    def test_riemannian_all_eta_vanish(self, riemannian_group):
        rep = simplicity_report(riemannian_group, 6)
        assert rep.max_abs_eta < 1e-10

    def test_simplex_multiplicity(self, simplex_group):
        rep = simplicity_report(simplex_group, 4)
        assert rep.fraction_simple == 0.0
        assert rep.min_gap == 0.0

    def test_empty_sample(self):
        c, s = np.cos(0.9), np.sin(0.9)
        rot = normalize_unimodular(
            np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]]))
        grp = MatrixGroup((rot,), ("r",))
        with pytest.raises(EmptySampleError):
            simplicity_report(grp, 2)

    def test_exports(self, riemannian_group, tmp_path):
        rep = simplicity_report(riemannian_group, 4)
        spectra.spectra_to_csv(rep, riemannian_group, tmp_path / "s.csv",
                               {"x": 1})
        spectra.report_to_json_file(rep, riemannian_group, tmp_path / "s.json")
        assert (tmp_path / "s.csv").read_text().startswith("# x=1")
        import json

        doc = json.loads((tmp_path / "s.json").read_text())
        assert doc["n_biproximal"] == rep.n_biproximal
        assert len(doc["spectra"]) == rep.n_biproximal
