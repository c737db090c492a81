"""Scenario grid, metrics arithmetic, the Monte Carlo engine, experiments."""

import numpy as np
import pytest

import dosefit as df
from dosefit.sim import (
    DESIGNS,
    ConfigError,
    EstimatorRuns,
    allocate,
    build_grid,
    candidate_models,
    consistency_experiment,
    run_grid,
    run_scenario,
    scenario_metrics,
    scenarios_from_config,
    variance_scaling_experiment,
)


def small_scenario(**overrides):
    grid = build_grid(seed=123, n_sim=20, boot_reps=0)
    s = next(x for x in grid if x.true_model.kind == "emax"
             and x.design_name == "A" and x.n_total == 150)
    return type(s)(**{**s.__dict__, **overrides}) if overrides else s


class TestAllocate:
    def test_divisible(self):
        assert allocate(150, 5) == (30, 30, 30, 30, 30)

    def test_largest_remainder_low_doses_first(self):
        assert allocate(150, 7) == (22, 22, 22, 21, 21, 21, 21)
        assert allocate(250, 4) == (63, 63, 62, 62)

    def test_sum_and_balance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            k = int(rng.integers(2, 12))
            n = int(rng.integers(k, 500))
            sizes = allocate(n, k)
            assert sum(sizes) == n
            assert max(sizes) - min(sizes) <= 1

    def test_errors(self):
        with pytest.raises(ValueError):
            allocate(3, 5)
        with pytest.raises(ValueError):
            allocate(5, 0)


class TestGrid:
    def test_full_grid_has_40_scenarios(self):
        grid = build_grid()
        assert len(grid) == 40
        assert [s.index for s in grid] == list(range(40))

    def test_design_d_drops_sigemax_candidate(self):
        with pytest.warns(UserWarning, match="sigemax"):
            cands = candidate_models("D", DESIGNS["D"])
        assert all(m.kind != "sigemax" for m in cands)
        cands_a = candidate_models("A", DESIGNS["A"])
        assert any(m.kind == "sigemax" for m in cands_a)

    def test_sigemax_still_a_truth_under_d(self):
        grid = build_grid()
        s = [x for x in grid if x.design_name == "D" and x.true_model.kind == "sigemax"]
        assert len(s) == 2  # both sample sizes

    def test_anova_candidate_flag(self):
        grid = build_grid(include_anova_candidate=True)
        assert any(m.kind == "anova" for m in grid[0].candidates)

    def test_scenario_validation(self):
        s = small_scenario()
        with pytest.raises(ValueError):
            type(s)(**{**s.__dict__, "delta": 0.0})
        with pytest.raises(ValueError):
            type(s)(**{**s.__dict__, "sd": -1.0})


class TestMetrics:
    def test_hand_worked_toy(self):
        """Two runs, two doses, worked by hand."""
        true_curve = np.array([0.0, 1.0])
        # method errors: run 1 (0.1, 0.1), run 2 (-0.1, -0.1)
        method = EstimatorRuns(np.array([[0.1, 1.1], [-0.1, 0.9]]),
                               np.array([2.0, np.nan]))
        # reference errors: run 1 (0.1, 0.1), run 2 (0.1, 0.3); tds 1.5, 2.5
        ref = EstimatorRuns(np.array([[0.1, 1.1], [0.1, 1.3]]),
                            np.array([1.5, 2.5]))
        out = scenario_metrics(true_curve, 2.0, {"m": method}, {"ref": ref})
        # method mse per dose: (0.01+0.01)/2 = 0.01 each; amse = 0.01
        np.testing.assert_allclose(out.methods["m"].mse_dose, [0.01, 0.01])
        assert out.methods["m"].amse == pytest.approx(0.01)
        # reference: dose 1 mse 0.01, dose 2 (0.01+0.09)/2 = 0.05 -> amse 0.03
        assert out.mmse == pytest.approx(0.03)
        assert out.methods["m"].smse == pytest.approx(0.01 / 0.03)
        # td: method retains only run 1 -> mse (2-2)^2 = 0; ref (0.25+0.25)/2
        assert out.methods["m"].mse_td == pytest.approx(0.0)
        assert out.methods["m"].n_td_used == 1
        assert out.methods["m"].n_td_excluded == 1
        assert out.mmse_td == pytest.approx(0.25)

    def test_best_single_model_has_smse_one(self):
        true_curve = np.array([0.0, 1.0])
        ref = EstimatorRuns(np.array([[0.1, 1.1], [0.1, 1.3]]), np.array([1.5, 2.5]))
        worse = EstimatorRuns(np.array([[0.5, 1.5], [0.5, 1.5]]), np.array([3.0, 3.0]))
        out = scenario_metrics(true_curve, 2.0, {}, {"good": ref, "bad": worse})
        assert out.methods["good"].smse == pytest.approx(1.0)
        assert out.methods["bad"].smse > 1.0

    def test_degenerate_mmse_raises_unless_allowed(self):
        true_curve = np.array([1.0])
        exact = EstimatorRuns(np.array([[1.0], [1.0]]), np.array([np.nan, np.nan]))
        with pytest.raises(ValueError, match="zero"):
            scenario_metrics(true_curve, np.nan, {}, {"m": exact})
        out = scenario_metrics(true_curve, np.nan, {}, {"m": exact},
                               allow_degenerate=True)
        assert np.isnan(out.methods["m"].smse)


class TestRunScenario:
    def test_deterministic(self):
        s = small_scenario(n_sim=10, boot_reps=25)
        r1 = run_scenario(s)
        r2 = run_scenario(s)
        for name in r1.metrics.methods:
            assert r1.metrics.methods[name] == r2.metrics.methods[name]
        assert r1.selection_probs == r2.selection_probs
        assert r1.boot_selection_freq == r2.boot_selection_freq

    def test_selection_probs_sum_to_one(self):
        rep = run_scenario(small_scenario())
        for crit, probs in rep.selection_probs.items():
            assert sum(probs.values()) == pytest.approx(1.0)

    def test_td_bookkeeping(self):
        rep = run_scenario(small_scenario())
        for name, m in rep.metrics.methods.items():
            assert m.n_td_used + m.n_td_excluded == rep.n_runs

    def test_zero_noise_diagnostic(self):
        """With sd=0 every estimator that can express the truth is exact."""
        s = small_scenario(sd=0.0, n_sim=4)
        rep = run_scenario(s)
        for name in ("model_emax", "select_aic", "select_bic", "average_aic"):
            assert rep.metrics.methods[name].amse <= 1e-12

    def test_zero_noise_with_bootstrap(self):
        s = small_scenario(sd=0.0, n_sim=3, boot_reps=10)
        rep = run_scenario(s)
        assert rep.metrics.methods["boot_aic"].amse <= 1e-12
        td = rep.metrics.methods["boot_aic"]
        assert td.mse_td == pytest.approx(0.0, abs=1e-12)

    def test_singleton_candidate_set(self):
        s = small_scenario()
        s = type(s)(**{**s.__dict__, "candidates": (df.emax(),), "n_sim": 6,
                       "boot_reps": 0})
        rep = run_scenario(s)
        m = rep.metrics.methods
        for crit in ("aic", "bic"):
            np.testing.assert_allclose(m[f"select_{crit}"].mse_dose,
                                       m["model_emax"].mse_dose, rtol=1e-12)
            np.testing.assert_allclose(m[f"average_{crit}"].mse_dose,
                                       m["model_emax"].mse_dose, rtol=1e-12)
        assert rep.selection_probs["aic"] == {"Emax": 1.0}

    def test_singleton_zero_noise_bootstrap_coincides(self):
        """With one candidate and sd=0, bagging reproduces the single fit exactly."""
        s = small_scenario(sd=0.0)
        s = type(s)(**{**s.__dict__, "candidates": (df.emax(),), "n_sim": 3,
                       "boot_reps": 8})
        rep = run_scenario(s)
        m = rep.metrics.methods
        np.testing.assert_array_equal(m["boot_aic"].mse_dose, m["model_emax"].mse_dose)
        assert m["boot_aic"].mse_td == m["model_emax"].mse_td

    def test_anova_true_model_runs(self):
        grid = build_grid(seed=5, n_sim=8, boot_reps=0)
        s = next(x for x in grid if x.true_model.kind == "anova"
                 and x.design_name == "B")
        rep = run_scenario(s)
        assert rep.true_td == pytest.approx(1 + 1 / 6, abs=1e-12)
        np.testing.assert_allclose(
            rep.true_curve,
            [0.0, -1.35, -1.42, -1.5, -1.6, -1.63, -1.65],
        )

    def test_run_grid_workers_agree(self):
        scenarios = build_grid(seed=9, n_sim=6, boot_reps=8)[:2]
        serial = run_grid(scenarios, workers=1)
        parallel = run_grid(scenarios, workers=2)
        for a, b in zip(serial, parallel):
            assert a.metrics.methods == b.metrics.methods
            assert a.selection_probs == b.selection_probs


class TestExperiments:
    def test_zero_reps_is_empty(self):
        assert consistency_experiment("emax", n_reps=0) == []
        assert variance_scaling_experiment(n_reps=0) == []

    def test_selection_probability_grows_with_n(self):
        """Consistency: more data makes every criterion pick the true model more."""
        rows = consistency_experiment("sigemax", n_grid=(150, 15_000), n_reps=300,
                                      seed=21)
        probs = {(r["criterion"], r["n_total"]): r["prob_sigemax"] for r in rows}
        for crit in df.CRITERIA:
            assert probs[(crit, 15_000)] > probs[(crit, 150)]

    def test_row_schema_and_determinism(self):
        rows = consistency_experiment("sigemax", n_grid=(150, 600), n_reps=40, seed=2)
        assert {r["criterion"] for r in rows} == set(df.CRITERIA)
        assert {r["n_total"] for r in rows} == {150, 600}
        again = consistency_experiment("sigemax", n_grid=(150, 600), n_reps=40, seed=2)
        assert rows == again

    def test_probabilities_in_unit_interval(self):
        rows = variance_scaling_experiment(n_grid=(2, 5), n_reps=30, seed=3)
        assert all(0.0 <= r["prob_sigemax"] <= 1.0 for r in rows)

    def test_group_size_one_supported(self):
        rows = variance_scaling_experiment(n_grid=(1,), n_reps=25, seed=4)
        assert len(rows) == len(df.CRITERIA)

    def test_unknown_true_model(self):
        with pytest.raises(ValueError):
            consistency_experiment("linear", n_reps=5)


class TestConfig:
    def test_defaults_give_full_grid(self):
        scenarios = scenarios_from_config({})
        assert len(scenarios) == 40

    def test_unknown_field_pointer(self):
        with pytest.raises(ConfigError) as err:
            scenarios_from_config({"nsim": 5})
        assert err.value.pointer == "/nsim"

    def test_bad_design_pointer(self):
        with pytest.raises(ConfigError) as err:
            scenarios_from_config({"designs": ["A", "Z"]})
        assert err.value.pointer == "/designs/1"

    def test_delta_zero_rejected(self):
        with pytest.raises(ConfigError) as err:
            scenarios_from_config({"delta": 0})
        assert err.value.pointer == "/delta"

    def test_negative_n_sim_rejected(self):
        with pytest.raises(ConfigError) as err:
            scenarios_from_config({"n_sim": -1})
        assert err.value.pointer == "/n_sim"

    def test_theta_override_length_checked(self):
        with pytest.raises(ConfigError) as err:
            scenarios_from_config({"theta_overrides": {"emax": [1, 2]}})
        assert err.value.pointer == "/theta_overrides/emax"
        scenarios = scenarios_from_config(
            {"theta_overrides": {"emax": [0.0, -2.0, 1.0]}, "n_sim": 2})
        s = next(x for x in scenarios if x.true_model.kind == "emax")
        assert s.true_theta == (0.0, -2.0, 1.0)

    def test_sample_size_type_checked(self):
        with pytest.raises(ConfigError) as err:
            scenarios_from_config({"sample_sizes": [150, "big"]})
        assert err.value.pointer == "/sample_sizes/1"
