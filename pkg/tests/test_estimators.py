import numpy as np
import pytest

from depthlab.estimators import (
    ESTIMATOR_IDS,
    mcd,
    mdepth_estimator,
    mm,
    mve,
    rho_rocke,
    rho_shr,
    rocke,
    rocke_gamma,
    run_estimator,
    s_bisquare,
    scov,
    shr_mid_polynomial,
    stahel_donoho,
    weight_rocke,
    weight_shr,
    _mahal_sq,
)
from depthlab.maxbias import BETA, scatter_eigen_bounds
from depthlab.numerics import RngStream


def bias_b(result):
    vals = np.linalg.eigvalsh(result.scatter)
    return max(vals[-1], 1.0 / vals[0])


class TestScov:
    def test_two_points(self):
        res = scov(np.array([[0.0, 0.0], [2.0, 0.0]]))
        assert np.allclose(res.location, [1.0, 0.0])
        assert np.allclose(res.scatter, np.diag([1.0, 0.0]))
        assert res.singular

    def test_shift_invariance(self):
        gen = np.random.default_rng(0)
        x = gen.standard_normal((50, 3))
        a = scov(x).scatter
        b = scov(x + np.array([5.0, -2.0, 9.0])).scatter
        assert np.allclose(a, b, atol=1e-12)

    def test_gaussian_consistency(self):
        gen = np.random.default_rng(1)
        x = gen.standard_normal((10_000, 2))
        res = scov(x)
        assert np.linalg.norm(res.scatter - np.eye(2), ord=2) <= 0.1


class TestMve:
    def test_scale_and_shape_recovery(self):
        # Elliptically shaped Gaussian data: the minimum half-mass ellipsoid
        # is uniquely the Mahalanobis ball, so the covering volume is
        # recovered within 10 percent.  The shape itself carries the
        # n^{-1/3} noise of the volume criterion, so it only gets a loose
        # bound.  (Data exactly on a ring are not identifiable: half the
        # ring fits in an arbitrarily thin sliver.)
        a = np.array([[3.0, 0.0], [0.0, 1.0]])
        target = a @ a.T / np.linalg.det(a @ a.T) ** 0.5
        for seed in range(4):
            gen = np.random.default_rng(100 + seed)
            x = gen.standard_normal((2000, 2)) @ a.T
            res = mve(x, subsets=500, rng=RngStream(seed))
            vol_ratio = (np.linalg.det(res.scatter) / np.linalg.det(a @ a.T)) ** 0.5
            assert 0.9 <= vol_ratio <= 1.1
            shape = res.scatter / np.linalg.det(res.scatter) ** 0.5
            err = np.linalg.norm(shape - target, ord=2) / np.linalg.norm(
                target, ord=2)
            assert err <= 0.4

    def test_h_coverage(self):
        from scipy import stats

        gen = np.random.default_rng(4)
        x = gen.standard_normal((60, 2))
        res = mve(x, rng=RngStream(5))
        d = _mahal_sq(x, res.location, res.scatter)
        c2 = stats.chi2.ppf(res.extras["h"] / 60, 2)
        assert np.sum(d <= c2 * (1 + 1e-9)) >= res.extras["h"]

    def test_translation_equivariance_matched_seed(self):
        gen = np.random.default_rng(6)
        x = gen.standard_normal((40, 2))
        shift = np.array([100.0, -50.0])
        r1 = mve(x, rng=RngStream(7))
        r2 = mve(x + shift, rng=RngStream(7))
        assert np.allclose(r1.location + shift, r2.location, atol=1e-8)
        assert np.allclose(r1.scatter, r2.scatter, atol=1e-8)


class TestMcd:
    def test_determinant_non_increasing(self):
        gen = np.random.default_rng(8)
        x = gen.standard_normal((80, 3))
        res = mcd(x, rng=RngStream(9))
        trace = res.extras["logdet_trace"]
        assert len(trace) >= 1
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))

    def test_clean_consistency(self):
        gen = np.random.default_rng(10)
        x = gen.standard_normal((1000, 2))
        res = mcd(x, rng=RngStream(11))
        assert np.linalg.norm(res.scatter - np.eye(2), ord=2) <= 0.25

    def test_ignores_far_cluster(self):
        gen = np.random.default_rng(12)
        x = gen.standard_normal((100, 2))
        x[:20] = 25.0
        res = mcd(x, rng=RngStream(13))
        assert np.linalg.eigvalsh(res.scatter)[-1] <= 2.0


class TestSBisquare:
    def test_scale_non_increasing(self):
        gen = np.random.default_rng(14)
        x = gen.standard_normal((120, 3))
        res = s_bisquare(x, rng=RngStream(15))
        trace = res.extras["scale_trace"]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(trace, trace[1:]))

    def test_clean_model_improves_on_start(self):
        gen = np.random.default_rng(16)
        x = gen.standard_normal((200, 5))
        start = mve(x, rng=RngStream(17).child(1))
        res = s_bisquare(x, rng=RngStream(17))
        d_start = np.linalg.norm(start.scatter - np.eye(5), ord=2)
        d_s = np.linalg.norm(res.scatter - np.eye(5), ord=2)
        assert d_s < d_start

    def test_bounded_under_heavy_replacement(self):
        # 45 percent replacement at n = 100 stays bounded (delta = 1/2).
        gen = np.random.default_rng(18)
        x = gen.standard_normal((100, 2))
        x[:45] = 1000.0
        res = s_bisquare(x, rng=RngStream(19))
        b = bias_b(res)
        assert np.isfinite(b) and b < 100.0


class TestRocke:
    def test_gamma_formula(self):
        # chi2_{10, 0.9} = 15.9872 from standard tables.
        assert rocke_gamma(10, 0.1) == pytest.approx(15.9872 / 10 - 1, abs=5e-4)

    def test_weight_support(self):
        gamma = 0.6
        t = np.array([0.39, 0.41, 1.0, 1.59, 1.61])
        w = weight_rocke(t, gamma)
        assert w[0] == 0.0 and w[-1] == 0.0
        assert np.all(w[1:4] > 0)
        assert w[2] == pytest.approx(1.0)

    def test_rho_anchored_at_median(self):
        for gamma in (0.3, 0.6, 1.0):
            assert rho_rocke(1.0, gamma) == pytest.approx(0.5, abs=1e-12)
            assert rho_rocke(0.0, gamma) == 0.0
            assert rho_rocke(5.0, gamma) == 1.0

    def test_high_dimension_beats_bisquare_under_contamination(self):
        gen = np.random.default_rng(20)
        n, p = 200, 10
        bias_r, bias_s = [], []
        for rep in range(3):
            x = gen.standard_normal((n, p))
            x[: int(0.2 * n)] = 8.0
            bias_r.append(bias_b(rocke(x, rng=RngStream(21 + rep))))
            bias_s.append(bias_b(s_bisquare(x, rng=RngStream(21 + rep))))
        assert np.median(bias_r) < np.median(bias_s)


class TestMm:
    def test_shr_transcription(self):
        # Frozen values of the published quartic bridge; the rho is only
        # approximately continuous (3.950 vs 4 at d=4, 6.450 vs 6.494 at 9).
        assert shr_mid_polynomial(4.0) == pytest.approx(3.950, abs=1e-12)
        assert shr_mid_polynomial(9.0) == pytest.approx(6.450, abs=1e-12)
        assert abs(shr_mid_polynomial(4.0) - 4.0) <= 0.06
        assert abs(shr_mid_polynomial(9.0) - 6.494) <= 0.06

    def test_shr_weight_continuity(self):
        # The derivative is exactly continuous: s'(4) = 1, s'(9) = 0.
        assert weight_shr(4.0 - 1e-12) == pytest.approx(weight_shr(4.0 + 1e-12),
                                                        abs=1e-9)
        assert weight_shr(9.0) == pytest.approx(0.0, abs=1e-12)
        assert rho_shr(20.0) == 1.0

    def test_objective_non_increasing(self):
        gen = np.random.default_rng(22)
        x = gen.standard_normal((150, 2))
        res = mm(x, rng=RngStream(23))
        trace = res.extras["objective_trace"]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(trace, trace[1:]))

    def test_clean_model_efficiency(self):
        # Quick version of the benchmark efficiency at p=2, n=50.
        gen = np.random.default_rng(24)
        logs_scov, logs_mm = [], []
        for rep in range(40):
            x = gen.standard_normal((50, 2))
            vals = np.linalg.eigvalsh(scov(x).scatter)
            logs_scov.append(np.log(vals[-1] / vals[0]))
            vals = np.linalg.eigvalsh(mm(x, rng=RngStream(600 + rep)).scatter)
            logs_mm.append(np.log(vals[-1] / vals[0]))
        eff = np.mean(logs_scov) / np.mean(logs_mm)
        assert eff >= 0.85


class TestStahelDonoho:
    def test_gross_outlier_weight(self):
        gen = np.random.default_rng(25)
        x = gen.standard_normal((50, 2))
        x[0] = [1e6, 1e6]
        res = stahel_donoho(x, rng=RngStream(26))
        assert res.extras["weights"][0] <= 1e-6

    def test_clean_close_to_scov(self):
        gen = np.random.default_rng(27)
        x = gen.standard_normal((1000, 2))
        res = stahel_donoho(x, rng=RngStream(28))
        assert np.all(res.extras["weights"] <= 1.0)
        assert np.all(res.extras["weights"] > 0.0)
        assert np.linalg.norm(res.scatter - scov(x).scatter, ord=2) <= 0.2

    def test_outlyingness_monotone_in_directions(self):
        gen = np.random.default_rng(29)
        x = gen.standard_normal((120, 3))
        t_small = stahel_donoho(x, dirs=100, rng=RngStream(30)).extras[
            "outlyingness"]
        t_large = stahel_donoho(x, dirs=3000, rng=RngStream(30)).extras[
            "outlyingness"]
        # The larger pool contains the smaller one's seeded prefix.
        assert np.all(t_large >= t_small - 1e-12)


class TestMdepth:
    def test_clean_consistency(self):
        gen = np.random.default_rng(31)
        x = gen.standard_normal((1200, 2))
        res = mdepth_estimator(x, rng=RngStream(32))
        assert np.linalg.norm(res.scatter - np.eye(2), ord=2) <= 0.25
        assert res.extras["normalization"] == pytest.approx(BETA)

    def test_contaminated_explosion_within_envelope(self):
        eps = 0.2
        gen = np.random.default_rng(33)
        n = 500
        x = gen.standard_normal((n, 2))
        x[: int(eps * n)] = 25.0
        res = mdepth_estimator(x, rng=RngStream(34))
        lam1 = np.linalg.eigvalsh(res.scatter)[-1]
        bound = scatter_eigen_bounds(eps).l1 / BETA
        assert lam1 <= bound + 0.5


class TestSuiteProperties:
    def test_translation_equivariance_all(self):
        gen = np.random.default_rng(35)
        x = gen.standard_normal((80, 2))
        shift = np.array([40.0, -15.0])
        for eid in ESTIMATOR_IDS:
            r1 = run_estimator(eid, x, RngStream(36))
            r2 = run_estimator(eid, x + shift, RngStream(36))
            assert np.allclose(r1.location + shift, r2.location,
                               atol=1e-7), eid
            assert np.allclose(r1.scatter, r2.scatter, atol=1e-7), eid

    def test_determinism(self):
        gen = np.random.default_rng(37)
        x = gen.standard_normal((60, 2))
        for eid in ESTIMATOR_IDS:
            r1 = run_estimator(eid, x, RngStream(38).child(7))
            r2 = run_estimator(eid, x, RngStream(38).child(7))
            assert np.array_equal(r1.scatter, r2.scatter), eid
            assert np.array_equal(r1.location, r2.location), eid

    def test_robust_separation_from_scov(self):
        # 20 percent point mass at (25, 25), p=2, n=80: every robust
        # estimator's log bias sits at least 3 below the sample covariance.
        gen = np.random.default_rng(39)
        logs = {eid: [] for eid in ESTIMATOR_IDS}
        for rep in range(3):
            x = gen.standard_normal((80, 2))
            mask = gen.random(80) < 0.2
            x[mask] = 25.0
            for eid in ESTIMATOR_IDS:
                res = run_estimator(eid, x, RngStream(40 + rep).child(1))
                logs[eid].append(np.log(bias_b(res)))
        scov_log = np.median(logs["SCOV"])
        for eid in ESTIMATOR_IDS[1:]:
            assert np.median(logs[eid]) <= scov_log - 3.0, eid
