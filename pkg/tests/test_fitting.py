"""ML fitting: closed forms, the damped-least-squares path, invariants."""

import numpy as np
import pytest

import dosefit as df
from dosefit.fitting import fit_groups

NINE = df.Design(tuple(range(9)), (17,) * 9)


def make_data(model, theta, design, sd, seed):
    rng = np.random.default_rng(seed)
    mu = df.predict(model, theta, np.asarray(design.doses))
    return df.Dataset(design, tuple(
        mu[i] + sd * rng.standard_normal(n) for i, n in enumerate(design.group_sizes)
    ))


class TestContainers:
    def test_design_validation(self):
        with pytest.raises(ValueError):
            df.Design((0, 2, 1), (5, 5, 5))
        with pytest.raises(ValueError):
            df.Design((0, 1), (5,))
        with pytest.raises(ValueError):
            df.Design((-1, 1), (5, 5))
        with pytest.raises(ValueError):
            df.Design((0, 1), (5, 0))
        d = df.Design((0, 4), (3, 4))
        assert d.n_total == 7 and d.k == 2 and d.max_dose == 4.0

    def test_dataset_validation(self):
        design = df.Design((0, 1), (2, 3))
        with pytest.raises(ValueError, match="lengths"):
            df.Dataset(design, (np.ones(2), np.ones(2)))
        with pytest.raises(ValueError, match="finite"):
            df.Dataset(design, (np.array([1.0, np.inf]), np.ones(3)))

    def test_from_observations_groups_and_sorts(self):
        data = df.Dataset.from_observations([4, 0, 4, 0, 2], [1., 2., 3., 4., 5.])
        assert data.design.doses == (0.0, 2.0, 4.0)
        assert data.design.group_sizes == (2, 1, 2)
        np.testing.assert_allclose(data.group_means(), [3.0, 5.0, 2.0])

    def test_from_observations_empty(self):
        with pytest.raises(ValueError, match="no observations"):
            df.Dataset.from_observations([], [])

    def test_summary_matches_dataset_statistics(self):
        data = make_data(df.emax(), (0, -1.81, 0.79), NINE, 0.8, 3)
        sds = np.sqrt(data.within_group_ss() / (np.array(NINE.group_sizes) - 1))
        summ = df.GroupSummary.from_moments(NINE.doses, NINE.group_sizes,
                                            data.group_means(), sds)
        np.testing.assert_allclose(summ.ss_within, data.within_group_ss())


class TestClosedForms:
    def test_anova_fit_is_group_means(self, emax_dataset):
        f = df.fit(df.anova(emax_dataset.design.doses), emax_dataset)
        np.testing.assert_array_equal(f.theta, emax_dataset.group_means())
        assert f.rss == pytest.approx(emax_dataset.within_group_ss().sum(), rel=1e-14)
        assert f.converged

    def test_linear_matches_polyfit(self, emax_dataset):
        f = df.fit(df.linear(), emax_dataset)
        dose_col = np.repeat(emax_dataset.design.doses, emax_dataset.design.group_sizes)
        y_col = np.concatenate(emax_dataset.responses)
        slope, intercept = np.polyfit(dose_col, y_col, 1)
        np.testing.assert_allclose(f.theta, [intercept, slope], rtol=1e-10)

    def test_quadratic_matches_polyfit(self, emax_dataset):
        f = df.fit(df.quadratic(), emax_dataset)
        dose_col = np.repeat(emax_dataset.design.doses, emax_dataset.design.group_sizes)
        y_col = np.concatenate(emax_dataset.responses)
        c2, c1, c0 = np.polyfit(dose_col, y_col, 2)
        np.testing.assert_allclose(f.theta, [c0, c1, c2], rtol=1e-8)

    def test_anova_grid_mismatch(self, emax_dataset):
        with pytest.raises(ValueError, match="grid"):
            df.fit(df.anova((0, 1, 2)), emax_dataset)


class TestNonlinearFit:
    def test_noise_free_emax_recovery(self):
        data = make_data(df.emax(), (0, -1.81, 0.79), NINE, 0.0, 1)
        f = df.fit(df.emax(), data)
        np.testing.assert_allclose(f.theta, [0, -1.81, 0.79], atol=1e-6)
        assert f.sigma2 < 1e-10
        assert f.converged

    def test_noise_free_sigemax_recovery(self):
        data = make_data(df.sig_emax(), (0, -1.7, 4, 5), NINE, 0.0, 2)
        f = df.fit(df.sig_emax(), data)
        np.testing.assert_allclose(f.theta, [0, -1.7, 4, 5], atol=1e-4)
        assert f.sigma2 < 1e-10

    def test_nested_loglik_dominance(self):
        """The sigemax optimum can never be worse than the emax optimum."""
        rng = np.random.default_rng(11)
        for seed in rng.integers(0, 10_000, size=50):
            data = make_data(df.emax(), (0, -1.81, 0.79), NINE, 2.0, int(seed))
            fe = df.fit(df.emax(), data)
            fs = df.fit(df.sig_emax(), data)
            assert fs.loglik >= fe.loglik - 1e-6

    def test_refit_idempotence(self, emax_dataset):
        f = df.fit(df.emax(), emax_dataset)
        again = df.fit(df.emax(), emax_dataset, df.FitOptions(starts=(tuple(f.theta),)))
        np.testing.assert_allclose(again.theta, f.theta, rtol=1e-6, atol=1e-9)

    def test_multistart_dominance(self):
        """Best-of-grid beats every grid start optimized on its own."""
        rng = np.random.default_rng(13)
        ed50s = np.geomspace(0.001 * 8, 1.5 * 8, 7)
        hills = np.geomspace(0.5, 10.0, 5)
        for seed in rng.integers(0, 10_000, size=50):
            data = make_data(df.quadratic(), (0, -0.55, 0.0458), NINE, 2.0, int(seed))
            multi = df.fit(df.sig_emax(), data)
            for e in ed50s[::3]:
                for h in hills[::2]:
                    single = df.fit(df.sig_emax(), data,
                                    df.FitOptions(starts=((0.0, 0.0, e ** h, h),)))
                    assert multi.loglik >= single.loglik - 1e-6

    def test_scale_equivariance_linear_exact(self, emax_dataset):
        c = 3.7
        scaled = df.Dataset(emax_dataset.design,
                            tuple(c * r for r in emax_dataset.responses))
        f1 = df.fit(df.linear(), emax_dataset)
        f2 = df.fit(df.linear(), scaled)
        np.testing.assert_allclose(f2.theta, c * f1.theta, rtol=1e-12)
        assert f2.sigma2 == pytest.approx(c * c * f1.sigma2, rel=1e-12)
        N = emax_dataset.design.n_total
        assert f2.loglik == pytest.approx(f1.loglik - N * np.log(c), rel=1e-12)

    def test_scale_equivariance_emax(self, emax_dataset):
        c = 2.5
        scaled = df.Dataset(emax_dataset.design,
                            tuple(c * r for r in emax_dataset.responses))
        f1 = df.fit(df.emax(), emax_dataset)
        f2 = df.fit(df.emax(), scaled)
        np.testing.assert_allclose(f2.theta[:2], c * f1.theta[:2], rtol=1e-5)
        assert f2.theta[2] == pytest.approx(f1.theta[2], rel=1e-5)
        N = emax_dataset.design.n_total
        assert f2.loglik == pytest.approx(f1.loglik - N * np.log(c), rel=1e-9)

    def test_box_constraints_respected(self):
        rng = np.random.default_rng(4)
        design = df.Design((0, 2, 4, 6, 8), (12,) * 5)
        for seed in range(20):
            data = make_data(df.linear(), (0, -0.02), design, 3.0, seed)
            f = df.fit(df.sig_emax(), data)
            ed50 = df.sigemax_ed50(f.theta)
            assert 0.001 * 8 - 1e-9 <= ed50 <= 1.5 * 8 + 1e-9
            assert 0.5 - 1e-12 <= f.theta[3] <= 10.0 + 1e-12

    def test_single_dose_level_not_identifiable(self):
        data = df.Dataset(df.Design((2.0,), (5,)),
                          (np.array([1.0, 2.0, 3.0, 2.0, 1.0]),))
        f = df.fit(df.emax(), data)
        assert not f.converged

    def test_sigma2_floor_on_constant_data(self):
        design = df.Design((0, 1, 2), (4, 4, 4))
        data = df.Dataset(design, tuple(np.full(4, 5.0) for _ in range(3)))
        f = df.fit(df.linear(), data)
        assert f.sigma2 > 0
        assert np.isfinite(f.loglik)

    def test_summary_fit_equals_dataset_fit(self, emax_dataset):
        design = emax_dataset.design
        sds = np.sqrt(emax_dataset.within_group_ss() / (np.array(design.group_sizes) - 1))
        summ = df.GroupSummary.from_moments(design.doses, design.group_sizes,
                                            emax_dataset.group_means(), sds)
        f1 = df.fit(df.emax(), emax_dataset)
        f2 = df.fit(df.emax(), summ)
        np.testing.assert_allclose(f1.theta, f2.theta, rtol=1e-9)
        assert f1.loglik == pytest.approx(f2.loglik, rel=1e-12)

    def test_batch_fit_matches_single_fits(self):
        """Batched optimization is row-independent: results equal one-by-one fits."""
        design = df.Design((0, 2, 4, 6, 8), (10,) * 5)
        datasets = [make_data(df.emax(), (0, -1.81, 0.79), design, 1.5, s)
                    for s in range(8)]
        means = np.stack([d.group_means() for d in datasets])
        ssw = np.array([d.within_group_ss().sum() for d in datasets])
        batch = fit_groups(df.sig_emax(), design, means, ssw)
        for i, data in enumerate(datasets):
            single = df.fit(df.sig_emax(), data)
            np.testing.assert_array_equal(batch.theta[i], single.theta)
            assert batch.loglik[i] == single.loglik


class TestLogLikelihood:
    def test_single_observation(self):
        data = df.Dataset(df.Design((0.0,), (1,)), (np.array([2.0]),))
        ll = df.log_likelihood(df.anova((0.0,)), data, (2.0,), 1.0)
        assert ll == pytest.approx(-0.5 * np.log(2 * np.pi))

    def test_all_observations_at_mean(self):
        design = df.Design((0, 1), (3, 3))
        data = df.Dataset(design, (np.full(3, 1.0), np.full(3, 2.0)))
        s2 = 0.7
        ll = df.log_likelihood(df.anova((0, 1)), data, (1.0, 2.0), s2)
        assert ll == pytest.approx(-3.0 * np.log(2 * np.pi * s2))

    def test_matches_naive_sum(self, emax_dataset):
        theta = (0.1, -1.5, 1.2)
        s2 = 2.3
        ll = df.log_likelihood(df.emax(), emax_dataset, theta, s2)
        naive = 0.0
        for d, resp in zip(emax_dataset.design.doses, emax_dataset.responses):
            for y in resp:
                m = df.predict(df.emax(), theta, d)
                naive += -0.5 * np.log(2 * np.pi * s2) - (y - m) ** 2 / (2 * s2)
        assert ll == pytest.approx(naive, rel=1e-12)

    def test_consistent_with_fit_loglik(self, emax_dataset):
        f = df.fit(df.emax(), emax_dataset)
        ll = df.log_likelihood(df.emax(), emax_dataset, f.theta, f.sigma2)
        assert ll == pytest.approx(f.loglik, rel=1e-10)

    def test_rejects_nonpositive_variance(self, emax_dataset):
        with pytest.raises(ValueError):
            df.log_likelihood(df.emax(), emax_dataset, (0, -1.8, 0.8), 0.0)
