"""Monte Carlo engine: runs one scenario of the simulation study.

Each replication simulates a trial (normal errors around the true
curve), fits every candidate model, evaluates all five criteria, and
records dose-effect and target-dose estimates for three kinds of
estimator per criterion: plain selection, criterion-weighted averaging,
and (for AIC/BIC) stratified-bootstrap bagging. All randomness flows
through counter-based streams keyed by (seed, scenario index,
replication index[, resample index]), so a report is a pure function of
the scenario and can be reproduced for any subset of the work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..averaging import softmax_weights
from ..bootstrap import BOOT_CRITERIA, TargetDose, resample_selection
from ..criteria import CRITERIA, fixed_penalty, select_batch, tic_penalty_batch
from ..fitting import DEFAULT_OPTIONS, Dataset, Design, FitOptions, fit_groups
from ..models import Model, _anova_indices, _mean, _target_dose_batch, predict, target_dose, ANOVA
from ..rng import DATA, substream
from .metrics import EstimatorRuns, ScenarioMetrics, scenario_metrics
from .scenarios import Scenario

__all__ = ["ScenarioReport", "run_scenario"]

BOOT_EXCLUSION_LIMIT = 0.80  # a run's bagged td is excluded past this resample loss


@dataclass(eq=False)
class ScenarioReport:
    """All aggregated outputs of one scenario."""

    scenario: Scenario
    n_runs: int
    true_curve: tuple[float, ...]
    true_td: float
    metrics: ScenarioMetrics
    selection_probs: dict[str, dict[str, float]]
    boot_selection_freq: dict[str, dict[str, float]]
    boot_runs_excluded: dict[str, int]
    tic_failures: dict[str, int]


def _simulate_responses(scenario: Scenario, sizes, mu_obs):
    """(B, N) response matrix, one keyed stream per replication."""
    B = scenario.n_sim
    N = int(sum(sizes))
    Y = np.empty((B, N))
    for r in range(B):
        rng = substream(scenario.seed, scenario.index, r, DATA)
        Y[r] = mu_obs + scenario.sd * rng.standard_normal(N)
    return Y


def _group_stats_matrix(Y, sizes):
    """Group means (B, k) and within-group SS (B, k) from stacked responses."""
    B = Y.shape[0]
    k = len(sizes)
    means = np.empty((B, k))
    ssw = np.empty((B, k))
    offset = 0
    for i, n in enumerate(sizes):
        block = Y[:, offset:offset + n]
        m = block.mean(axis=1)
        means[:, i] = m
        ssw[:, i] = ((block - m[:, None]) ** 2).sum(axis=1)
        offset += n
    return means, ssw


def _criterion_values(scenario, models, fits, doses, sizes, means, ssw, tic_fail):
    """{criterion: (B, L) value matrix}; TIC failures become -inf and are counted."""
    N = int(sum(sizes))
    loglik = np.stack([bf.loglik for bf in fits], axis=1)
    values = {}
    for crit in CRITERIA:
        if crit == "tic":
            cols = []
            for m, bf in zip(models, fits):
                pen = tic_penalty_batch(m, bf.theta, doses, sizes, means, ssw, bf.sigma2)
                bad = ~np.isfinite(pen)
                if bad.any():
                    tic_fail[m.label] = tic_fail.get(m.label, 0) + int(bad.sum())
                col = 2.0 * bf.loglik - 2.0 * pen
                col[bad] = -np.inf
                cols.append(col)
            values[crit] = np.stack(cols, axis=1)
        else:
            pens = np.array([fixed_penalty(crit, m.param_dim, N) for m in models])
            values[crit] = 2.0 * loglik - 2.0 * pens[None, :]
    return values


def _weighted_td(w, tds, threshold=0.20):
    """Batched 20%-rule averaged target dose; NaN where excluded.

    w (B, L) weights, tds (L, B) per-model target doses (NaN = absent).
    """
    usable = np.isfinite(tds.T)
    w_used = np.where(usable, w, 0.0)
    wsum = w_used.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = np.where(usable, w_used * tds.T, 0.0).sum(axis=1) / wsum
    return np.where(wsum > threshold, avg, np.nan)


def run_scenario(scenario: Scenario, options: FitOptions = DEFAULT_OPTIONS) -> ScenarioReport:
    """Run all replications of one scenario and aggregate its metrics."""
    doses = np.asarray(scenario.doses)
    sizes = scenario.group_sizes
    k = doses.size
    B = scenario.n_sim
    models = list(scenario.candidates)
    labels = [m.label for m in models]
    design = Design(scenario.doses, sizes)

    theta_true = np.asarray(scenario.true_theta)
    true_curve = np.atleast_1d(predict(scenario.true_model, theta_true, doses))
    td = target_dose(scenario.true_model, theta_true, scenario.delta, scenario.dose_range)
    true_td = td if td is not None else np.nan

    mu_obs = np.repeat(true_curve, sizes)
    Y = _simulate_responses(scenario, sizes, mu_obs)
    means, ssw = _group_stats_matrix(Y, sizes)
    ssw_total = ssw.sum(axis=1)

    fits = [fit_groups(m, design, means, ssw_total, options) for m in models]

    # per-model curves at the design doses and per-model target doses
    curves = np.empty((len(models), B, k))
    tds = np.empty((len(models), B))
    lo, hi = scenario.dose_range
    for i, (m, bf) in enumerate(zip(models, fits)):
        idx = _anova_indices(m, doses) if m.kind == ANOVA else None
        curves[i] = _mean(m.kind, bf.theta, doses, idx)
        tds[i] = _target_dose_batch(m.kind, bf.theta, scenario.delta, lo, hi,
                                    model_doses=m.doses)

    tic_failures: dict[str, int] = {}
    values = _criterion_values(scenario, models, fits, doses, sizes, means, ssw,
                               tic_failures)

    rows = np.arange(B)
    estimators: dict[str, EstimatorRuns] = {}
    selection_probs: dict[str, dict[str, float]] = {}
    for crit, vals in values.items():
        sel = select_batch(vals, models)
        selection_probs[crit] = {
            lab: float((sel == i).mean()) for i, lab in enumerate(labels)
        }
        estimators[f"select_{crit}"] = EstimatorRuns(curves[sel, rows, :], tds[sel, rows])

        finite = np.isfinite(vals)
        w = softmax_weights(np.where(finite, vals, -np.inf))
        avg_curves = np.einsum("bl,lbk->bk", w, curves)
        estimators[f"average_{crit}"] = EstimatorRuns(avg_curves, _weighted_td(w, tds))

    boot_freq: dict[str, dict[str, float]] = {}
    boot_excluded: dict[str, int] = {}
    if scenario.boot_reps > 0:
        estimand = TargetDose(scenario.delta, scenario.dose_range)
        boot_curves = {c: np.empty((B, k)) for c in BOOT_CRITERIA}
        boot_tds = {c: np.full(B, np.nan) for c in BOOT_CRITERIA}
        counts = {c: np.zeros(len(models)) for c in BOOT_CRITERIA}
        excluded = {c: 0 for c in BOOT_CRITERIA}
        offsets = np.cumsum((0,) + sizes)
        for r in range(B):
            data_r = Dataset(design, tuple(
                Y[r, offsets[i]:offsets[i + 1]] for i in range(k)
            ))
            res = resample_selection(
                data_r, models, BOOT_CRITERIA, doses, estimand,
                scenario.boot_reps, scenario.seed, (scenario.index, r), options,
            )
            for c in BOOT_CRITERIA:
                sel_c, curves_c, tds_c = res[c]
                boot_curves[c][r] = np.median(curves_c, axis=0)
                retained = tds_c[np.isfinite(tds_c)]
                if retained.size >= (1.0 - BOOT_EXCLUSION_LIMIT) * scenario.boot_reps:
                    boot_tds[c][r] = np.median(retained)
                else:
                    excluded[c] += 1
                counts[c] += np.bincount(sel_c, minlength=len(models))
        for c in BOOT_CRITERIA:
            estimators[f"boot_{c}"] = EstimatorRuns(boot_curves[c], boot_tds[c])
            total = counts[c].sum()
            boot_freq[c] = {
                lab: float(counts[c][i] / total) for i, lab in enumerate(labels)
            }
            boot_excluded[c] = excluded[c]

    singles = {
        f"model_{m.kind}": EstimatorRuns(curves[i], tds[i])
        for i, m in enumerate(models)
    }
    mets = scenario_metrics(true_curve, true_td, estimators, singles,
                            allow_degenerate=(scenario.sd == 0.0))

    return ScenarioReport(
        scenario=scenario,
        n_runs=B,
        true_curve=tuple(true_curve),
        true_td=true_td,
        metrics=mets,
        selection_probs=selection_probs,
        boot_selection_freq=boot_freq,
        boot_runs_excluded=boot_excluded,
        tic_failures=tic_failures,
    )
