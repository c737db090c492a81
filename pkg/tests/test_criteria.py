"""Information criteria, TIC matrices, and selection."""

import numpy as np
import pytest

import dosefit as df
from dosefit.criteria import (
    CriterionScore,
    fixed_penalty,
    select_batch,
    tic_penalty_batch,
)
from dosefit.fitting import fit_groups

CASE_STUDY_MODELS = lambda: [df.linear(), df.quadratic(), df.emax(), df.sig_emax(),
                         df.anova((0, 12.5, 25, 50, 100))]
CASE_STUDY_AIC = (52.17, 53.50, 53.84, 51.85, 50.14)
CASE_STUDY_BIC = (41.48, 39.24, 39.58, 34.03, 28.75)


def scores_from_values(criterion, values, models=None):
    models = models or CASE_STUDY_MODELS()
    return [CriterionScore(m, criterion, v, 0.0, m.param_dim)
            for m, v in zip(models, values)]


def linear_true_data(seed, design=None, theta=(1.0, -0.2), sd=1.0):
    design = design or df.Design((0, 2, 4, 6, 8), (30,) * 5)
    rng = np.random.default_rng(seed)
    mu = df.predict(df.linear(), theta, np.asarray(design.doses))
    return df.Dataset(design, tuple(
        mu[i] + sd * rng.standard_normal(n) for i, n in enumerate(design.group_sizes)
    ))


class TestPenalties:
    def test_aic_is_dimension(self, emax_dataset):
        f = df.fit(df.emax(), emax_dataset)
        assert df.penalty("aic", f, emax_dataset) == 3.0

    def test_fixed_values(self):
        assert fixed_penalty("aicc", 3, 150) == pytest.approx(450 / 146)
        assert fixed_penalty("bic", 3, 150) == pytest.approx(1.5 * np.log(150))
        assert fixed_penalty("bic2", 3, 150) == pytest.approx(
            1.5 * np.log(150) - 1.5 * np.log(2 * np.pi))
        assert fixed_penalty("bic", 3, 150) == pytest.approx(7.5160, abs=1e-4)
        assert fixed_penalty("bic2", 3, 150) == pytest.approx(4.7592, abs=1e-4)

    def test_aicc_needs_enough_observations(self):
        with pytest.raises(ValueError, match="N > d"):
            fixed_penalty("aicc", 3, 4)

    def test_count_variance_flag(self, emax_dataset):
        f = df.fit(df.emax(), emax_dataset)
        assert df.penalty("aic", f, emax_dataset, count_variance=True) == 4.0

    def test_penalty_increasing_in_dimension(self):
        for crit in ("aic", "aicc", "bic", "bic2"):
            pens = [fixed_penalty(crit, d, 150) for d in (2, 3, 4, 9)]
            assert all(a < b for a, b in zip(pens, pens[1:]))

    def test_unknown_criterion(self):
        with pytest.raises(ValueError, match="unknown criterion"):
            fixed_penalty("dic", 3, 100)


class TestScore:
    def test_value_identity(self, emax_dataset):
        f = df.fit(df.emax(), emax_dataset)
        s = df.score("bic", f, emax_dataset)
        assert s.value == pytest.approx(2 * f.loglik - 2 * s.penalty)
        assert s.dim == 3

    def test_shift_in_loglik_shifts_value_by_double(self, emax_dataset):
        f = df.fit(df.emax(), emax_dataset)
        s = df.score("aic", f, emax_dataset)
        shifted = df.FitResult(f.model, f.theta, f.sigma2, f.loglik + 5.0, f.rss,
                               f.converged, f.n_starts, f.best_start)
        s2 = df.score("aic", shifted, emax_dataset)
        assert s2.value == pytest.approx(s.value + 10.0)


class TestSelect:
    def test_case_study_aic_selects_emax(self):
        assert df.select(scores_from_values("aic", CASE_STUDY_AIC)).kind == "emax"

    def test_case_study_bic_selects_linear(self):
        assert df.select(scores_from_values("bic", CASE_STUDY_BIC)).kind == "linear"

    def test_tie_prefers_fewer_parameters(self):
        models = [df.emax(), df.linear()]
        scores = [CriterionScore(m, "aic", 10.0, 0.0, m.param_dim) for m in models]
        assert df.select(scores).kind == "linear"

    def test_tie_then_list_order(self):
        models = [df.quadratic(), df.emax()]  # both 3 parameters
        scores = [CriterionScore(m, "aic", 10.0, 0.0, 3) for m in models]
        assert df.select(scores).kind == "quadratic"

    def test_empty_and_mixed(self):
        with pytest.raises(ValueError, match="empty"):
            df.select([])
        mixed = scores_from_values("aic", CASE_STUDY_AIC)
        mixed[1] = CriterionScore(mixed[1].model, "bic", 1.0, 0.0, 3)
        with pytest.raises(ValueError, match="mix"):
            df.select(mixed)

    def test_select_batch_matches_select(self):
        models = CASE_STUDY_MODELS()
        values = np.array([CASE_STUDY_AIC, CASE_STUDY_BIC])
        sel = select_batch(values, models)
        assert models[sel[0]].kind == "emax"
        assert models[sel[1]].kind == "linear"

    def test_select_batch_ignores_nan(self):
        models = [df.linear(), df.emax()]
        values = np.array([[np.nan, 1.0], [5.0, np.nan]])
        sel = select_batch(values, models)
        assert list(sel) == [1, 0]


class TestTicMatrices:
    def test_linear_j_is_moment_matrix(self):
        data = linear_true_data(3)
        f = df.fit(df.linear(), data)
        K, J = df.tic_matrices(f, data)
        x = np.stack([np.ones(5), np.asarray(data.design.doses)], axis=1)
        expected = (30 * x.T @ x) / (data.design.n_total * f.sigma2)
        np.testing.assert_allclose(J, expected, rtol=1e-12)

    def test_duplicated_dataset_invariance(self):
        data = linear_true_data(4)
        doubled = df.Dataset(
            df.Design(data.design.doses, tuple(2 * n for n in data.design.group_sizes)),
            tuple(np.concatenate([r, r]) for r in data.responses),
        )
        f1 = df.fit(df.linear(), data)
        f2 = df.fit(df.linear(), doubled)
        assert df.tic_penalty(f2, doubled) == pytest.approx(
            df.tic_penalty(f1, data), abs=1e-10)

    def test_trace_near_dimension_when_true(self):
        """Small Monte Carlo check; the acceptance suite runs the full version."""
        rng = np.random.default_rng(9)
        design = df.Design((0, 2, 4, 6, 8), (80,) * 5)
        traces = []
        for seed in rng.integers(0, 100_000, size=200):
            data = linear_true_data(int(seed), design=design)
            f = df.fit(df.linear(), data)
            traces.append(df.tic_penalty(f, data))
        assert np.mean(traces) == pytest.approx(2.0, abs=0.2)

    def test_matrices_work_from_summary(self):
        data = linear_true_data(5)
        sds = np.sqrt(data.within_group_ss() / (np.asarray(data.design.group_sizes) - 1))
        summ = df.GroupSummary.from_moments(data.design.doses, data.design.group_sizes,
                                            data.group_means(), sds)
        f = df.fit(df.linear(), data)
        K1, J1 = df.tic_matrices(f, data)
        K2, J2 = df.tic_matrices(f, summ)
        np.testing.assert_allclose(K1, K2, rtol=1e-10)
        np.testing.assert_allclose(J1, J2, rtol=1e-10)

    def test_singular_information_raises(self):
        """Two doses cannot identify three emax parameters: J is singular."""
        rng = np.random.default_rng(2)
        design = df.Design((0, 4), (6, 6))
        data = df.Dataset(design, tuple(rng.standard_normal(6) for _ in range(2)))
        f = df.fit(df.emax(), data)
        with pytest.raises(df.SingularInformationError):
            df.tic_penalty(f, data)

    def test_joint_variant_needs_dataset_and_adds_one(self):
        data = linear_true_data(6, design=df.Design((0, 2, 4, 6, 8), (200,) * 5))
        f = df.fit(df.linear(), data)
        K, J = df.tic_matrices(f, data, include_variance=True)
        assert K.shape == (3, 3)
        tr = np.trace(np.linalg.solve(J, K))
        assert tr == pytest.approx(3.0, abs=0.8)
        sds = np.sqrt(data.within_group_ss() / (np.asarray(data.design.group_sizes) - 1))
        summ = df.GroupSummary.from_moments(data.design.doses, data.design.group_sizes,
                                            data.group_means(), sds)
        with pytest.raises(TypeError):
            df.tic_matrices(f, summ, include_variance=True)

    def test_batch_matches_scalar(self):
        design = df.Design((0, 2, 4, 6, 8), (30,) * 5)
        datasets = [linear_true_data(s, design=design) for s in range(6)]
        means = np.stack([d.group_means() for d in datasets])
        ssw = np.stack([d.within_group_ss() for d in datasets])
        batch = fit_groups(df.linear(), design, means, ssw.sum(axis=1))
        traces = tic_penalty_batch(df.linear(), batch.theta, design.doses,
                                   design.group_sizes, means, ssw, batch.sigma2)
        for i, data in enumerate(datasets):
            f = df.fit(df.linear(), data)
            assert traces[i] == pytest.approx(df.tic_penalty(f, data), rel=1e-10)

    def test_batch_nan_on_singular(self):
        design = df.Design((0, 4), (6, 6))
        rng = np.random.default_rng(8)
        means = rng.standard_normal((3, 2))
        ssw = np.abs(rng.standard_normal((3, 2))) + 0.5
        batch = fit_groups(df.emax(), design, means, ssw.sum(axis=1))
        traces = tic_penalty_batch(df.emax(), batch.theta, design.doses,
                                   design.group_sizes, means, ssw, batch.sigma2)
        assert np.isnan(traces).all()

    def test_tic_score_close_to_aic_when_true(self):
        data = linear_true_data(12, design=df.Design((0, 2, 4, 6, 8), (100,) * 5))
        f = df.fit(df.linear(), data)
        s_tic = df.score("tic", f, data)
        s_aic = df.score("aic", f, data)
        assert s_tic.value == pytest.approx(s_aic.value, abs=2.0)
