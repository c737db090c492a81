"""Performance metrics of the simulation study.

For each estimator ("method") the per-dose mean squared error of the
estimated dose effects is averaged over the design doses (AMSE) and
standardized by the smallest AMSE attained by any single always-fit
candidate model (MMSE), giving the SMSE. Target-dose estimates get the
same treatment, except that runs whose estimate lies outside the dose
range are excluded from the MSE (per-estimator denominators).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["EstimatorRuns", "MethodMetrics", "ScenarioMetrics", "scenario_metrics"]


@dataclass(frozen=True, eq=False)
class EstimatorRuns:
    """Per-run estimates of one estimator across a scenario's runs.

    ``curves`` has shape (n_runs, k): dose-effect estimates at the
    design doses. ``tds`` has shape (n_runs,) with NaN marking runs
    whose target-dose estimate is absent/excluded.
    """

    curves: np.ndarray
    tds: np.ndarray


@dataclass(frozen=True)
class MethodMetrics:
    """Aggregated metrics of one estimator in one scenario."""

    mse_dose: tuple[float, ...]
    amse: float
    smse: float
    mse_td: float
    smse_td: float
    n_td_used: int
    n_td_excluded: int


@dataclass(frozen=True, eq=False)
class ScenarioMetrics:
    mmse: float
    mmse_td: float
    methods: dict[str, MethodMetrics]


def _amse(curves: np.ndarray, true_curve: np.ndarray) -> tuple[np.ndarray, float]:
    mse_dose = np.mean((curves - true_curve[None, :]) ** 2, axis=0)
    return mse_dose, float(mse_dose.mean())


def _mse_td(tds: np.ndarray, true_td: float) -> tuple[float, int]:
    used = np.isfinite(tds)
    n_used = int(used.sum())
    if n_used == 0 or not np.isfinite(true_td):
        return np.nan, n_used
    return float(np.mean((tds[used] - true_td) ** 2)), n_used


def scenario_metrics(
    true_curve,
    true_td: float,
    methods: dict[str, EstimatorRuns],
    single_models: dict[str, EstimatorRuns],
    *,
    allow_degenerate: bool = False,
) -> ScenarioMetrics:
    """MSE/AMSE/SMSE (and the target-dose versions) for every estimator.

    ``single_models`` are the always-fit candidates defining the MMSE
    denominators; they are also reported as methods. A zero MMSE
    (degenerate, e.g. noise-free diagnostic data) raises unless
    ``allow_degenerate`` is set, in which case SMSE values are NaN.
    """
    true_curve = np.asarray(true_curve, dtype=float)
    singles = {}
    for name, runs in single_models.items():
        mse_dose, amse = _amse(runs.curves, true_curve)
        mse_td, n_used = _mse_td(runs.tds, true_td)
        singles[name] = (mse_dose, amse, mse_td, n_used, runs.tds.size - n_used)

    mmse = min(v[1] for v in singles.values())
    td_mses = [v[2] for v in singles.values() if np.isfinite(v[2])]
    mmse_td = min(td_mses) if td_mses else np.nan
    if mmse == 0.0 or (np.isfinite(true_td) and mmse_td == 0.0):
        if not allow_degenerate:
            raise ValueError("degenerate records: the minimal MSE is zero")

    def standardize(value: float, reference: float) -> float:
        if not np.isfinite(value) or not np.isfinite(reference) or reference == 0.0:
            return np.nan
        return value / reference

    out: dict[str, MethodMetrics] = {}
    for name, (mse_dose, amse, mse_td, n_used, n_exc) in singles.items():
        out[name] = MethodMetrics(
            tuple(mse_dose), amse, standardize(amse, mmse),
            mse_td, standardize(mse_td, mmse_td), n_used, n_exc,
        )
    for name, runs in methods.items():
        mse_dose, amse = _amse(runs.curves, true_curve)
        mse_td, n_used = _mse_td(runs.tds, true_td)
        out[name] = MethodMetrics(
            tuple(mse_dose), amse, standardize(amse, mmse),
            mse_td, standardize(mse_td, mmse_td), n_used, runs.tds.size - n_used,
        )
    return ScenarioMetrics(mmse=mmse, mmse_td=mmse_td, methods=out)
