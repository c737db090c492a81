"""Bootstrap model averaging: bagging the model selection step.

The sample is resampled stratified by dose (with replacement within
each dose group), the candidate models are refit on every resample,
selection by AIC or BIC picks one model per resample, and the medians
of the per-resample estimates are the bagged point estimates.
Percentile intervals come from the same resample distribution via the
nearest-rank rule.

Each resample draws from its own counter-based stream keyed by the
resample index, so results are bit-identical regardless of how the work
is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .criteria import fixed_penalty, select_batch
from .fitting import DEFAULT_OPTIONS, Dataset, Design, FitOptions, fit_groups
from .models import Model, _mean, _target_dose_batch, _anova_indices, ANOVA
from .rng import BOOT, substream

__all__ = [
    "DoseEffect",
    "TargetDose",
    "BootstrapResult",
    "stratified_resample",
    "bootstrap_average",
    "percentile_interval",
]

BOOT_CRITERIA = ("aic", "bic")


@dataclass(frozen=True)
class DoseEffect:
    """Estimand: the mean response at one dose."""

    dose: float


@dataclass(frozen=True)
class TargetDose:
    """Estimand: the smallest dose with placebo-adjusted effect ``delta``."""

    delta: float
    dose_range: tuple[float, float]


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    """Bagged estimate of one estimand."""

    estimand: DoseEffect | TargetDose
    criterion: str
    n_boot: int
    n_used: int
    estimates: np.ndarray          # (R,), NaN where excluded
    median: float
    interval: tuple[float, float]
    level: float
    selection_counts: dict[str, int]

    @property
    def empty(self) -> bool:
        return self.n_used == 0

    @property
    def exclusion_fraction(self) -> float:
        return 1.0 - self.n_used / self.n_boot


def _require_resamplable(design: Design) -> None:
    if any(n <= 1 for n in design.group_sizes):
        raise ValueError("stratified bootstrap requires every group size n_i > 1")


def _resample_indices(sizes: Sequence[int], rng: np.random.Generator) -> list[np.ndarray]:
    """Index draws of one stratified resample, one block per dose, in dose order."""
    return [rng.integers(0, n, size=n) for n in sizes]


def stratified_resample(data: Dataset, rng: np.random.Generator) -> Dataset:
    """One stratified bootstrap resample: n_i draws with replacement per dose."""
    _require_resamplable(data.design)
    idx = _resample_indices(data.design.group_sizes, rng)
    return Dataset(data.design, tuple(r[i] for r, i in zip(data.responses, idx)))


def percentile_interval(values: np.ndarray, level: float) -> tuple[float, float]:
    """Nearest-rank percentile interval of ``values`` at the given level."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        return (np.nan, np.nan)
    q = 0.5 * (1.0 - level)

    def rank(prob: float) -> int:
        return min(max(int(np.ceil(prob * n)), 1), n) - 1

    return (float(v[rank(q)]), float(v[rank(1.0 - q)]))


# ---------------------------------------------------------------------------
# Core: batched per-resample selection and estimation
# ---------------------------------------------------------------------------

def _resample_stats(data: Dataset, n_boot: int, seed: int, key: tuple[int, ...]):
    """Group means and within-SS totals of n_boot stratified resamples."""
    sizes = data.design.group_sizes
    k = len(sizes)
    means = np.empty((n_boot, k))
    ssw = np.zeros(n_boot)
    for r in range(n_boot):
        rng = substream(seed, *key, BOOT, r)
        for i, (resp, n) in enumerate(zip(data.responses, sizes)):
            vals = resp[rng.integers(0, n, size=n)]
            m = vals.mean()
            means[r, i] = m
            ssw[r] += ((vals - m) ** 2).sum()
    return means, ssw


def _model_estimates(models, fits, eval_doses, estimand, design):
    """Per-model curves (L, R, k_eval) and target doses (L, R)."""
    R = fits[0].theta.shape[0]
    d = np.asarray(eval_doses, dtype=float)
    curves = np.empty((len(models), R, d.size))
    tds = np.full((len(models), R), np.nan)
    for i, (m, bf) in enumerate(zip(models, fits)):
        idx = _anova_indices(m, d) if m.kind == ANOVA else None
        curves[i] = _mean(m.kind, bf.theta, d, idx)
        if isinstance(estimand, TargetDose):
            lo, hi = estimand.dose_range
            tds[i] = _target_dose_batch(m.kind, bf.theta, estimand.delta, lo, hi,
                                        model_doses=m.doses)
    return curves, tds


def resample_selection(
    data: Dataset,
    models: Sequence[Model],
    criteria: Sequence[str],
    eval_doses,
    estimand,
    n_boot: int,
    seed: int,
    key: tuple[int, ...] = (),
    options: FitOptions = DEFAULT_OPTIONS,
):
    """Refit + select on every resample; shared by the public API and the engine.

    Returns ``{criterion: (sel_idx (R,), curves (R, k_eval), tds (R,))}``
    where tds is NaN unless ``estimand`` is a TargetDose.
    """
    _require_resamplable(data.design)
    for c in criteria:
        if c not in BOOT_CRITERIA:
            raise ValueError(f"bootstrap selection uses AIC or BIC, not {c!r}")
    means, ssw = _resample_stats(data, n_boot, seed, tuple(key))
    N = data.design.n_total
    fits = [fit_groups(m, data.design, means, ssw, options) for m in models]
    loglik = np.stack([bf.loglik for bf in fits], axis=1)  # (R, L)
    curves, tds = _model_estimates(models, fits, eval_doses, estimand, data.design)

    out = {}
    rows = np.arange(n_boot)
    for c in criteria:
        pens = np.array([fixed_penalty(c, m.param_dim, N) for m in models])
        values = 2.0 * loglik - 2.0 * pens[None, :]
        sel = select_batch(values, models)
        out[c] = (sel, curves[sel, rows, :], tds[sel, rows])
    return out


def bootstrap_average(
    data: Dataset,
    models: Sequence[Model],
    criterion: str,
    estimand: DoseEffect | TargetDose,
    *,
    n_boot: int = 500,
    seed: int = 0,
    key: tuple[int, ...] = (),
    level: float = 0.95,
    options: FitOptions = DEFAULT_OPTIONS,
) -> BootstrapResult:
    """Bagged estimate of ``estimand`` by stratified-bootstrap model selection.

    For a :class:`TargetDose` estimand, resamples whose selected-model
    target dose is absent or out of range are recorded as excluded (NaN)
    and dropped from the median and interval; the selection counts still
    cover all ``n_boot`` resamples.
    """
    if criterion not in BOOT_CRITERIA:
        raise ValueError(f"bootstrap averaging uses AIC or BIC, not {criterion!r}")
    if n_boot < 1:
        raise ValueError("n_boot must be at least 1")
    if not models:
        raise ValueError("candidate set is empty")
    if isinstance(estimand, DoseEffect):
        eval_doses = [estimand.dose]
    else:
        eval_doses = [data.design.doses[0]]  # placeholder column, unused
    res = resample_selection(data, models, (criterion,), eval_doses, estimand,
                             n_boot, seed, tuple(key), options)
    sel, curve_col, tds = res[criterion]
    estimates = curve_col[:, 0] if isinstance(estimand, DoseEffect) else tds

    used = np.isfinite(estimates)
    n_used = int(used.sum())
    retained = estimates[used]
    median = float(np.median(retained)) if n_used else np.nan
    interval = percentile_interval(retained, level) if n_used else (np.nan, np.nan)
    counts = {m.label: int((sel == i).sum()) for i, m in enumerate(models)}
    return BootstrapResult(
        estimand=estimand,
        criterion=criterion,
        n_boot=n_boot,
        n_used=n_used,
        estimates=estimates,
        median=median,
        interval=interval,
        level=level,
        selection_counts=counts,
    )
