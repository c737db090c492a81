"""Selection-probability experiments on the Emax vs Sigmoid Emax pair.

Two experiments on the nine-dose grid 0..8 with candidates
{emax, sigemax}:

* consistency: the probability of selecting sigemax as the total sample
  size grows, under each true model;
* variance scaling: the same probability when the group size n grows
  while the error SD grows like sqrt(0.01*n), keeping the standard
  error of every estimate constant.

Both experiments draw the per-dose sufficient statistics directly
(group mean ~ N(eta_i, sd^2/n_i), within-SS ~ sd^2*chi2_{n_i-1}), which
is exact in distribution under the normal model and keeps sample sizes
up to 150,000 affordable. The same standard-normal draws are reused for
the group means along the whole grid (common random numbers), so the
shape of each probability curve reflects the sample size, not
resampling noise; each individual probability stays an unbiased
estimate.
"""

from __future__ import annotations

import numpy as np

from ..criteria import CRITERIA, fixed_penalty, select_batch, tic_penalty_batch
from ..fitting import DEFAULT_OPTIONS, Design, FitOptions, fit_groups
from ..models import Model
from ..rng import EXPERIMENT, substream
from .scenarios import DEFAULT_SD, allocate

__all__ = [
    "CONSISTENCY_THETA",
    "consistency_experiment",
    "variance_scaling_experiment",
]

EXPERIMENT_DOSES = tuple(float(d) for d in range(9))

# True parameters of the two consistency scenarios.
CONSISTENCY_THETA = {
    "emax": (0.0, -1.81, 0.79),
    "sigemax": (0.0, -1.81, 0.79, 2.0),
}

VARIANCE_GRID = (1, 2, 3, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50)


def default_consistency_grid(n_points: int = 8) -> tuple[int, ...]:
    """Log-spaced total sample sizes from 150 to 150,000."""
    return tuple(int(round(x)) for x in np.geomspace(150, 150_000, n_points))


def _group_means(z, eta, sizes, sd):
    """Group means from shared standard-normal draws z of shape (n_reps, k)."""
    n = np.asarray(sizes, dtype=float)
    return eta[None, :] + (sd / np.sqrt(n))[None, :] * z


def _within_ss(rng, sizes, sd, n_reps):
    """Within-group sums of squares, sd^2 * chi2_{n_i - 1} per dose."""
    ssw = np.zeros((n_reps, len(sizes)))
    if sd > 0:
        for i, ni in enumerate(sizes):
            if ni > 1:
                ssw[:, i] = sd * sd * rng.chisquare(ni - 1, size=n_reps)
    return ssw


def _selection_probabilities(design, means, ssw, criteria, options):
    """P(select sigemax) per criterion for emax-vs-sigemax candidates."""
    models = [Model("emax"), Model("sigemax")]
    doses = np.asarray(design.doses)
    sizes = design.group_sizes
    N = design.n_total
    ssw_total = ssw.sum(axis=1)
    fits = [fit_groups(m, design, means, ssw_total, options) for m in models]
    loglik = np.stack([bf.loglik for bf in fits], axis=1)

    probs = {}
    for crit in criteria:
        if crit == "tic":
            cols = []
            for m, bf in zip(models, fits):
                pen = tic_penalty_batch(m, bf.theta, doses, sizes, means, ssw, bf.sigma2)
                col = 2.0 * bf.loglik - 2.0 * pen
                col[~np.isfinite(col)] = -np.inf
                cols.append(col)
            values = np.stack(cols, axis=1)
        else:
            pens = np.array([fixed_penalty(crit, m.param_dim, N) for m in models])
            values = 2.0 * loglik - 2.0 * pens[None, :]
        sel = select_batch(values, models)
        probs[crit] = float((sel == 1).mean())
    return probs


def consistency_experiment(
    true_model: str = "sigemax",
    n_grid: tuple[int, ...] | None = None,
    n_reps: int = 1000,
    *,
    seed: int = 0,
    sd: float = DEFAULT_SD,
    criteria: tuple[str, ...] = CRITERIA,
    options: FitOptions = DEFAULT_OPTIONS,
) -> list[dict]:
    """P(select sigemax) per criterion along a grid of total sample sizes.

    Rows: {criterion, n_total, prob_sigemax}. ``n_reps = 0`` returns an
    empty list.
    """
    if true_model not in CONSISTENCY_THETA:
        raise ValueError("true_model must be 'emax' or 'sigemax'")
    if n_reps == 0:
        return []
    if n_grid is None:
        n_grid = default_consistency_grid()
    theta = np.asarray(CONSISTENCY_THETA[true_model])
    from ..models import predict

    eta = np.atleast_1d(predict(Model(true_model), theta, np.asarray(EXPERIMENT_DOSES)))

    z = substream(seed, EXPERIMENT, 0).standard_normal((n_reps, len(EXPERIMENT_DOSES)))
    rows = []
    for i, n_total in enumerate(n_grid):
        sizes = allocate(int(n_total), len(EXPERIMENT_DOSES))
        design = Design(EXPERIMENT_DOSES, sizes)
        means = _group_means(z, eta, sizes, sd)
        ssw = _within_ss(substream(seed, EXPERIMENT, 0, i), sizes, sd, n_reps)
        probs = _selection_probabilities(design, means, ssw, criteria, options)
        for crit in criteria:
            rows.append({"criterion": crit, "n_total": int(n_total),
                         "prob_sigemax": probs[crit]})
    return rows


def variance_scaling_experiment(
    n_grid: tuple[int, ...] = VARIANCE_GRID,
    n_reps: int = 1000,
    *,
    seed: int = 0,
    criteria: tuple[str, ...] = CRITERIA,
    options: FitOptions = DEFAULT_OPTIONS,
) -> list[dict]:
    """P(select sigemax) vs group size n at constant standard error.

    Sigemax is true; the error SD is sqrt(0.01*n) so that every
    estimate's standard error stays the same across the grid. Rows:
    {criterion, group_size, prob_sigemax}.
    """
    if n_reps == 0:
        return []
    if any(n < 1 for n in n_grid):
        raise ValueError("group sizes must be at least 1")
    theta = np.asarray(CONSISTENCY_THETA["sigemax"])
    from ..models import predict

    eta = np.atleast_1d(predict(Model("sigemax"), theta, np.asarray(EXPERIMENT_DOSES)))
    k = len(EXPERIMENT_DOSES)

    # sd_n/sqrt(n) = 0.1 exactly, so one shared draw gives every n its means;
    # the within-SS shares one normal pool (first n-1 columns per group).
    rng = substream(seed, EXPERIMENT, 1)
    z = rng.standard_normal((n_reps, k))
    max_n = max(int(n) for n in n_grid)
    pool = rng.standard_normal((n_reps, k, max_n - 1)) if max_n > 1 else None
    means = eta[None, :] + 0.1 * z

    rows = []
    for n in n_grid:
        n = int(n)
        design = Design(EXPERIMENT_DOSES, (n,) * k)
        var_n = 0.01 * n
        if n > 1:
            ssw = var_n * (pool[:, :, : n - 1] ** 2).sum(axis=2)
        else:
            ssw = np.zeros((n_reps, k))
        probs = _selection_probabilities(design, means, ssw, criteria, options)
        for crit in criteria:
            rows.append({"criterion": crit, "group_size": n,
                         "prob_sigemax": probs[crit]})
    return rows
