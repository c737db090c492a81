"""Information criteria and model selection.

Every criterion is expressed on the common scale

    value = 2 * max log-likelihood - 2 * penalty,

larger is better. Penalties:

=========  ==================================================
aic        d
aicc       N*d / (N - d - 1)
bic        0.5 * log(N) * d
bic2       0.5 * (log(N) - log(2*pi)) * d
tic        trace(J^-1 K)  (empirical information matrices)
=========  ==================================================

where d is the dimension of the mean-function parameter vector (the
error variance is not counted; pass ``count_variance=True`` to add 1
to every model, which also switches the TIC matrices to the joint
(theta, sigma2) variant).

The TIC matrices are the empirical score outer product K and the
negative mean Hessian J of the normal log-density, both normalized by
1/N (the trace is invariant under any common normalization). By default
they are taken over the mean parameters with the ML variance plugged
in, which keeps trace(J^-1 K) ~ d when the model is true.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fitting import Dataset, FitResult, group_stats
from .models import Model, _gradient, _hessian, _anova_indices, ANOVA

__all__ = [
    "CRITERIA",
    "CriterionScore",
    "SingularInformationError",
    "penalty",
    "score",
    "score_models",
    "select",
    "tic_matrices",
    "tic_penalty",
]

CRITERIA = ("aic", "aicc", "bic", "bic2", "tic")

CRITERION_LABELS = {
    "aic": "AIC",
    "aicc": "AICc",
    "bic": "BIC",
    "bic2": "BIC2",
    "tic": "TIC",
}


class SingularInformationError(ValueError):
    """The empirical Hessian matrix J is numerically singular."""

    def __init__(self, condition: float):
        super().__init__(
            f"singular information matrix (condition estimate {condition:.3e})"
        )
        self.condition = condition


@dataclass(frozen=True)
class CriterionScore:
    """One criterion evaluated on one fitted model."""

    model: Model
    criterion: str
    value: float
    penalty: float
    dim: int


def _check_criterion(criterion: str) -> str:
    key = criterion.lower()
    if key not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    return key


def penalty(criterion: str, fit: FitResult, data, *, count_variance: bool = False) -> float:
    """Penalty term of ``criterion`` for a fitted model."""
    key = _check_criterion(criterion)
    design, _, _ = group_stats(data)
    N = design.n_total
    d = fit.model.param_dim + (1 if count_variance else 0)
    if key == "aic":
        return float(d)
    if key == "aicc":
        if N <= d + 1:
            raise ValueError(f"aicc needs N > d + 1 (N={N}, d={d})")
        return N * d / (N - d - 1)
    if key == "bic":
        return 0.5 * np.log(N) * d
    if key == "bic2":
        return 0.5 * (np.log(N) - np.log(2.0 * np.pi)) * d
    return tic_penalty(fit, data, include_variance=count_variance)


def score(criterion: str, fit: FitResult, data, *, count_variance: bool = False) -> CriterionScore:
    """2*logL - 2*penalty for one fitted model."""
    key = _check_criterion(criterion)
    pen = penalty(key, fit, data, count_variance=count_variance)
    d = fit.model.param_dim + (1 if count_variance else 0)
    return CriterionScore(fit.model, key, 2.0 * fit.loglik - 2.0 * pen, pen, d)


def score_models(criterion: str, fits: Sequence[FitResult], data, *,
                 count_variance: bool = False) -> list[CriterionScore]:
    return [score(criterion, f, data, count_variance=count_variance) for f in fits]


def select(scores: Sequence[CriterionScore]) -> Model:
    """Model with the largest criterion value.

    Ties go to the model with the fewest parameters, then to the one
    listed first.
    """
    if not scores:
        raise ValueError("cannot select from an empty score list")
    criteria = {s.criterion for s in scores}
    if len(criteria) > 1:
        raise ValueError(f"scores mix criteria: {sorted(criteria)}")
    best = min(enumerate(scores), key=lambda t: (-t[1].value, t[1].dim, t[0]))
    return best[1].model


def selection_order(models: Sequence[Model]) -> np.ndarray:
    """Column order implementing the (fewest parameters, list order) tie-break."""
    dims = [m.param_dim for m in models]
    return np.lexsort((np.arange(len(models)), dims))


def select_batch(values: np.ndarray, models: Sequence[Model]) -> np.ndarray:
    """Row-wise selection over a (B, L) value matrix; non-finite values never win."""
    order = selection_order(models)
    v = values[:, order]
    v = np.where(np.isfinite(v), v, -np.inf)
    return order[np.argmax(v, axis=1)]


# ---------------------------------------------------------------------------
# TIC matrices
# ---------------------------------------------------------------------------

def tic_matrices(fit: FitResult, data, *, include_variance: bool = False):
    """Empirical (K, J) matrices of the fitted model.

    K is the mean outer product of per-observation scores, J the
    negative mean per-observation Hessian of the normal log-density,
    both at the ML estimate and normalized by 1/N. By default the
    matrices are over the mean parameters with sigma2_hat plugged in;
    ``include_variance=True`` appends sigma2 as a parameter (this
    joint variant needs individual responses, i.e. a Dataset).
    """
    design, means, ssw = group_stats(data)
    d = np.asarray(design.doses)
    n = np.asarray(design.group_sizes, dtype=float)
    N = design.n_total
    theta = np.asarray(fit.theta, dtype=float)
    s2 = fit.sigma2

    idx = _anova_indices(fit.model, d) if fit.model.kind == ANOVA else None
    from .models import _mean

    eta = _mean(fit.model.kind, theta, d, idx)
    g = _gradient(fit.model.kind, theta, d, idx)      # (k, p)
    H = _hessian(fit.model.kind, theta, d, idx)       # (k, p, p)
    resid = means - eta

    if not include_variance:
        ss_at_theta = ssw + n * resid**2
        K = np.einsum("k,ki,kj->ij", ss_at_theta, g, g) / (N * s2 * s2)
        J = (
            np.einsum("k,ki,kj->ij", n, g, g)
            - np.einsum("k,kij->ij", n * resid, H)
        ) / (N * s2)
        return K, J

    if not isinstance(data, Dataset):
        raise TypeError("the joint (theta, sigma2) TIC variant needs a Dataset")
    p = theta.shape[0]
    K = np.zeros((p + 1, p + 1))
    J = np.zeros((p + 1, p + 1))
    for i, resp in enumerate(data.responses):
        e = resp - eta[i]
        s1, s2m = e.sum(), (e**2).sum()
        s3, s4 = (e**3).sum(), (e**4).sum()
        gi = g[i]
        K[:p, :p] += s2m * np.outer(gi, gi) / s2**2
        K[:p, p] += gi * (s3 - s2 * s1) / (2.0 * s2**3)
        K[p, p] += (s4 - 2.0 * s2 * s2m + len(e) * s2**2) / (4.0 * s2**4)
        J[:p, :p] += (len(e) * np.outer(gi, gi) - s1 * H[i]) / s2
        J[:p, p] += gi * s1 / s2**2
        J[p, p] += s2m / s2**3 - len(e) / (2.0 * s2**2)
    K[p, :p] = K[:p, p]
    J[p, :p] = J[:p, p]
    return K / N, J / N


def tic_penalty(fit: FitResult, data, *, include_variance: bool = False) -> float:
    """trace(J^-1 K); raises :class:`SingularInformationError` for singular J."""
    K, J = tic_matrices(fit, data, include_variance=include_variance)
    eig = np.linalg.eigvalsh(J)
    emin, emax = eig[0], eig[-1]
    if not np.isfinite(emax) or emin <= emax * 1e-12 or emin <= 0:
        raise SingularInformationError(emax / emin if emin > 0 else np.inf)
    return float(np.trace(np.linalg.solve(J, K)))


# ---------------------------------------------------------------------------
# Batched variants used by the simulation engine
# ---------------------------------------------------------------------------

def fixed_penalty(criterion: str, dim: int, N: int) -> float:
    """Penalty of the non-TIC criteria as a plain number."""
    key = _check_criterion(criterion)
    if key == "aic":
        return float(dim)
    if key == "aicc":
        if N <= dim + 1:
            raise ValueError(f"aicc needs N > d + 1 (N={N}, d={dim})")
        return N * dim / (N - dim - 1)
    if key == "bic":
        return 0.5 * np.log(N) * dim
    if key == "bic2":
        return 0.5 * (np.log(N) - np.log(2.0 * np.pi)) * dim
    raise ValueError("tic has no fixed penalty; use tic_penalty_batch")


def tic_penalty_batch(model: Model, theta, doses, sizes, means, ss_within, sigma2):
    """trace(J^-1 K) over a batch of fits; NaN where J is numerically singular.

    theta (B, p), means/ss_within (B, k), sigma2 (B,). All datasets
    share (doses, sizes).
    """
    theta = np.asarray(theta, dtype=float)
    d = np.asarray(doses, dtype=float)
    n = np.asarray(sizes, dtype=float)
    N = n.sum()
    idx = _anova_indices(model, d) if model.kind == ANOVA else None
    from .models import _mean

    eta = _mean(model.kind, theta, d, idx)            # (B, k)
    g = _gradient(model.kind, theta, d, idx)          # (B, k, p)
    H = _hessian(model.kind, theta, d, idx)           # (B, k, p, p)
    resid = means - eta
    ss_at_theta = ss_within + n * resid**2

    s2 = sigma2
    K = np.einsum("bk,bki,bkj->bij", ss_at_theta, g, g) / (N * s2 * s2)[:, None, None]
    J = (
        np.einsum("k,bki,bkj->bij", n, g, g)
        - np.einsum("bk,bkij->bij", n * resid, H)
    ) / (N * s2)[:, None, None]

    eig = np.linalg.eigvalsh(J)
    bad = (eig[:, 0] <= eig[:, -1] * 1e-12) | (eig[:, 0] <= 0) | ~np.isfinite(eig[:, -1])
    J_safe = J.copy()
    J_safe[bad] = np.eye(J.shape[-1])
    tr = np.einsum("bii->b", np.linalg.solve(J_safe, K))
    tr[bad] = np.nan
    return tr
