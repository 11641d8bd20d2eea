import numpy as np
import pytest

from cellshot.data import RegressionData
from cellshot.errors import DegenerateResponseError
from cellshot.shooting import mad
from cellshot.simbench import (SimDesign, and_metric, contaminate_cellwise,
                               contaminate_rowwise, contaminate_vertical,
                               gen_clean, n_mse, real_data_contaminate,
                               real_data_resample, round_half_away, run_table)


class TestDesign:
    def test_beta_spacing(self):
        d = SimDesign()
        np.testing.assert_allclose(d.beta_true,
                                   np.arange(1, 16) / 15.0)
        assert d.beta_true[-1] == 1.0

    def test_covariances(self):
        d = SimDesign(correlated=True)
        assert d.cov[0, 0] == 1.0
        assert d.cov[0, 1] == 0.5
        assert d.cov[0, 2] == 0.25
        np.testing.assert_allclose(d.cov, d.cov.T)
        assert np.all(np.linalg.eigvalsh(d.cov) > 0)

    def test_signal_to_noise_matches_between_designs(self):
        snr_u = SimDesign(correlated=False).signal_to_noise
        snr_c = SimDesign(correlated=True).signal_to_noise
        assert snr_c == pytest.approx(snr_u, rel=0.01)


class TestGenClean:
    def test_deterministic(self):
        d = SimDesign()
        a = gen_clean(d, 5)
        b = gen_clean(d, 5)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)

    def test_noiseless_design_is_exact(self):
        d = SimDesign(sigma_err=0.0)
        data = gen_clean(d, 1)
        np.testing.assert_allclose(data.y, data.X @ d.beta_true, atol=1e-12)

    def test_sample_moments_match_covariance(self):
        # moment-check oracle at large n
        d = SimDesign(correlated=True, n=100000, p=6)
        data = gen_clean(d, 7)
        sample_cov = np.cov(data.X.T)
        np.testing.assert_allclose(sample_cov, d.cov, atol=0.03)


class TestContamination:
    def setup_method(self):
        self.design = SimDesign()
        self.data = gen_clean(self.design, 3)

    def test_eps_zero_identity(self):
        out = contaminate_cellwise(self.data, 0.0, "dense", 1)
        np.testing.assert_array_equal(out.X, self.data.X)
        out = contaminate_rowwise(self.data, 0.0, "dense", self.design.cov, 1)
        np.testing.assert_array_equal(out.X, self.data.X)
        out = contaminate_vertical(self.design, self.data, 0.0, 1)
        np.testing.assert_array_equal(out.y, self.data.y)

    def test_cellwise_exact_count_and_rest_untouched(self):
        out = contaminate_cellwise(self.data, 0.02, "dense", 9)
        changed = out.X != self.data.X
        assert changed.sum() == round_half_away(0.02 * 100 * 15) == 30
        np.testing.assert_array_equal(out.y, self.data.y)

    def test_cellwise_dense_distribution(self):
        vals = []
        for seed in range(40):
            out = contaminate_cellwise(self.data, 0.10, "dense", seed)
            vals.extend(out.X[out.X != self.data.X].ravel())
        vals = np.asarray(vals)
        assert abs(vals.mean() - 50.0) < 0.2
        assert abs(vals.std() - 1.0) < 0.1

    def test_contaminated_row_count_formula(self):
        # expected contaminated rows: n(1 - (1-eps)^p) = 26.14 for eps=0.02
        expected = 100 * (1 - (1 - 0.02) ** 15)
        assert expected == pytest.approx(26.143, abs=0.01)
        counts = []
        for seed in range(300):
            out = contaminate_cellwise(self.data, 0.02, "dense", seed)
            counts.append(np.any(out.X != self.data.X, axis=1).sum())
        assert np.mean(counts) == pytest.approx(expected, rel=0.05)

    def test_rowwise_replaces_whole_rows(self):
        out = contaminate_rowwise(self.data, 0.10, "dense", self.design.cov,
                                  11)
        row_changed = np.any(out.X != self.data.X, axis=1)
        assert row_changed.sum() == 10
        # non-replaced rows bitwise identical
        np.testing.assert_array_equal(out.X[~row_changed],
                                      self.data.X[~row_changed])
        assert np.all(np.abs(out.X[row_changed].mean(axis=1) - 50.0) < 5.0)

    def test_rowwise_dense_mean_vector(self):
        rows = []
        for seed in range(60):
            out = contaminate_rowwise(self.data, 0.10, "dense",
                                      self.design.cov, seed)
            changed = np.any(out.X != self.data.X, axis=1)
            rows.append(out.X[changed])
        rows = np.vstack(rows)
        np.testing.assert_allclose(rows.mean(axis=0), np.full(15, 50.0),
                                   atol=0.2)

    def test_vertical_leaves_design_untouched(self):
        out = contaminate_vertical(self.design, self.data, 0.10, 13)
        np.testing.assert_array_equal(out.X, self.data.X)
        changed = out.y != self.data.y
        assert changed.sum() == 10
        res = out.y[changed] - out.X[changed] @ self.design.beta_true
        assert abs(res.mean() - 50.0) < 1.0


class TestMetrics:
    def test_nmse_zero_at_truth(self):
        beta = np.arange(1, 4) / 3.0
        assert n_mse([beta.copy(), beta.copy()], beta, 100) == 0.0

    def test_nmse_single_offset(self):
        beta = np.zeros(5)
        est = beta.copy()
        est[2] = 0.3
        assert n_mse([est], beta, 50) == pytest.approx(50 * 0.3 ** 2 / 5)

    def test_nmse_matches_plain_reimplementation(self):
        rng = np.random.default_rng(0)
        beta = rng.standard_normal(7)
        ests = [rng.standard_normal(7) for _ in range(9)]
        total = 0.0
        for j in range(7):
            acc = 0.0
            for e in ests:
                acc += (e[j] - beta[j]) ** 2
            total += acc / 9
        expected = 100 * total / 7
        assert n_mse(ests, beta, 100) == pytest.approx(expected, rel=1e-12)

    def test_nmse_empty_rejected(self):
        with pytest.raises(ValueError):
            n_mse([], np.zeros(3), 100)

    def test_and_zero_when_equal(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((30, 4))
        y = rng.standard_normal(30)
        beta = rng.standard_normal(4)
        assert and_metric([beta.copy()], beta, X, y) == 0.0

    def test_and_formula_reduction(self):
        rng = np.random.default_rng(2)
        X = np.tile(rng.standard_normal(30)[:, None], (1, 3))
        y = X[:, 0].copy()  # MAD(x_j) == MAD(y) for every column
        beta = np.zeros(3)
        est = beta.copy()
        est[1] = 0.6
        assert and_metric([est], beta, X, y) == \
            pytest.approx(np.sqrt(0.6 ** 2 / 3))

    def test_and_matches_plain_reimplementation(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((40, 5)) * rng.uniform(0.5, 4, 5)
        y = rng.standard_normal(40) * 2.2
        full = rng.standard_normal(5)
        ests = [rng.standard_normal(5) for _ in range(6)]
        mad_x = [mad(X[:, j]) for j in range(5)]
        mad_y = mad(y)
        acc = 0.0
        for e in ests:
            inner = 0.0
            for j in range(5):
                inner += (e[j] - full[j]) ** 2 * mad_x[j] ** 2 / mad_y ** 2
            acc += np.sqrt(inner / 5)
        expected = acc / 6
        assert and_metric(ests, full, X, y) == pytest.approx(expected,
                                                             rel=1e-12)

    def test_and_zero_mad_rejected(self):
        X = np.ones((20, 2))
        X[:, 1] = np.arange(20.0)
        y = np.arange(20.0)
        with pytest.raises(ValueError):
            and_metric([np.zeros(2)], np.zeros(2), X, y)
        with pytest.raises(DegenerateResponseError):
            and_metric([np.zeros(2)], np.zeros(2),
                       np.random.default_rng(0).standard_normal((20, 2)),
                       np.ones(20))


class TestRunTable:
    def test_deterministic_rerun(self):
        kw = dict(estimators=["ls", "shooting-bi"], eps_grid=[0.0, 0.02],
                  R=2, seed=42, schemes=["dense"])
        r1 = run_table("cell_uncorr", **kw)
        r2 = run_table("cell_uncorr", **kw)
        assert r1.to_json() == r2.to_json()
        assert r1.to_wide_csv() == r2.to_wide_csv()

    def test_report_shape(self):
        rep = run_table("cell_uncorr", ["ls"], [0.0, 0.05], R=2, seed=1,
                        schemes=["dense", "wide"])
        assert rep.schemes == ["dense", "wide"]
        assert rep.columns == ["eps=0", "eps=0.05"]
        assert len(rep.values["dense"]["ls"]) == 2
        assert rep.failures["dense"]["ls"] == [0, 0]

    def test_vertical_single_scheme(self):
        rep = run_table("vertical_corr", ["ls"], [0.05], R=2, seed=2)
        assert rep.schemes == ["vertical"]

    def test_unknown_table(self):
        with pytest.raises(ValueError):
            run_table("nope", ["ls"], [0.0], R=1, seed=0)

    def test_ls_breaks_down_vertical(self):
        rep = run_table("vertical_corr", ["ls"], [0.10], R=5, seed=3)
        assert rep.values["vertical"]["ls"][0] > 100


def small_real_dataset(seed=0, n=60, p=4):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p)) * np.array([1.0, 2.0, 0.5, 3.0])
    beta = np.array([1.0, -0.5, 2.0, 0.3])
    y = 1.0 + X @ beta + 0.5 * rng.standard_normal(n)
    return RegressionData(y, X)


class TestRealData:
    def test_resample_full_fraction_gives_zero_and(self):
        data = small_real_dataset()
        rep = real_data_resample(data, R=1, frac=1.0,
                                 estimators=["ls", "s", "mm"], seed=5)
        for est in ["ls", "s", "mm"]:
            assert rep.values["observed"][est][0] == 0.0

    def test_resample_replicate_records(self):
        data = small_real_dataset()
        rep = real_data_resample(data, R=4, frac=0.8, estimators=["ls"],
                                 seed=6)
        assert rep.replicates == 4
        assert rep.failures["observed"]["ls"] == [0]
        assert rep.values["observed"]["ls"][0] > 0

    def test_contaminate_eps_zero_gives_zero_and(self):
        data = small_real_dataset()
        rep = real_data_contaminate(data, eps=0.0, R=2,
                                    estimators=["ls", "mm"], seed=7)
        assert rep.values["contaminated"]["ls"][0] == 0.0
        assert rep.values["contaminated"]["mm"][0] == 0.0

    def test_contaminated_cells_are_far_out(self):
        data = small_real_dataset()
        rng = np.random.default_rng(1)
        from cellshot.simbench import _contaminate_replicate, _subseed
        mu = np.median(data.X, axis=0)
        sigma = np.array([mad(data.X[:, j]) for j in range(data.p)])
        out = _contaminate_replicate((data, [], {}, 3, 0, 0.05, 10.0, mu,
                                      sigma))
        # worker returns fits; rebuild the contaminated matrix to inspect
        rng = np.random.default_rng(_subseed(3, 0, 3))
        X = data.X.copy()
        m = round_half_away(0.05 * data.n * data.p)
        cells = rng.choice(data.n * data.p, size=m, replace=False)
        cols = cells % data.p
        vals = rng.normal(mu[cols] + 10.0 * sigma[cols], sigma[cols])
        assert np.all(vals > mu[cols] + 5.0 * sigma[cols])

    def test_contaminate_ls_worst(self):
        data = small_real_dataset(n=80)
        rep = real_data_contaminate(data, eps=0.05, R=4,
                                    estimators=["ls", "shooting-bi"], seed=8)
        vals = rep.values["contaminated"]
        assert vals["ls"][0] > vals["shooting-bi"][0]
