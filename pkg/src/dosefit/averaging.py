"""Criterion-weighted model averaging of dose effects and target doses.

Weights are the softmax of half the criterion values,

    w_l = exp(0.5*I_l) / sum_i exp(0.5*I_i),

computed after subtracting the maximum value (exact, by shift
invariance). Averaged target doses follow the out-of-range rule: models
whose target dose is absent or outside the dose range are dropped, the
remaining weights are renormalized if they sum to more than the
threshold (20%), and otherwise the averaged estimate is reported as
absent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .criteria import CriterionScore
from .fitting import FitResult
from .models import Model, predict, target_dose

__all__ = ["ModelWeights", "weights", "average_effect", "average_target_dose"]


@dataclass(frozen=True, eq=False)
class ModelWeights:
    """Per-model averaging weights for one criterion."""

    criterion: str
    models: tuple[Model, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.models),):
            raise ValueError("one weight per model is required")
        if np.any(vals < 0) or abs(vals.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to one")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.models)


def softmax_weights(values: np.ndarray) -> np.ndarray:
    """exp(v/2) normalized, stabilized by subtracting the max value."""
    v = np.asarray(values, dtype=float)
    w = np.exp(0.5 * (v - v.max(axis=-1, keepdims=True)))
    return w / w.sum(axis=-1, keepdims=True)


def weights(scores: Sequence[CriterionScore]) -> ModelWeights:
    """Averaging weights from one criterion's scores."""
    if not scores:
        raise ValueError("cannot compute weights from an empty score list")
    criteria = {s.criterion for s in scores}
    if len(criteria) > 1:
        raise ValueError(f"scores mix criteria: {sorted(criteria)}")
    vals = np.array([s.value for s in scores], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("criterion values must be finite")
    return ModelWeights(scores[0].criterion, tuple(s.model for s in scores),
                        softmax_weights(vals))


def _check_aligned(fits: Sequence[FitResult], w: ModelWeights) -> None:
    if len(fits) != len(w):
        raise ValueError("fits and weights are not aligned")
    for f, m in zip(fits, w.models):
        if f.model != m:
            raise ValueError(f"fit for {f.model} does not match weight for {m}")


def average_effect(fits: Sequence[FitResult], w: ModelWeights, dose: float) -> float:
    """Weighted average of the per-model mean responses at ``dose``.

    Models with exactly zero weight are never evaluated, so an anova
    candidate with zero weight does not restrict the dose grid.
    """
    _check_aligned(fits, w)
    total = 0.0
    for f, wl in zip(fits, w.values):
        if wl > 0.0:
            total += wl * predict(f.model, f.theta, dose)
    return float(total)


def average_target_dose(
    fits: Sequence[FitResult],
    w: ModelWeights,
    delta: float,
    dose_range: tuple[float, float],
    *,
    min_weight: float = 0.20,
) -> float | None:
    """Weighted average of in-range per-model target doses.

    Per-model target doses that are absent or fall outside
    ``dose_range`` are dropped; if the remaining weight exceeds
    ``min_weight`` (strictly), the remaining weights are renormalized,
    otherwise the result is absent (None).
    """
    _check_aligned(fits, w)
    tds = np.full(len(fits), np.nan)
    for i, f in enumerate(fits):
        td = target_dose(f.model, f.theta, delta, dose_range)
        if td is not None:
            tds[i] = td
    usable = np.isfinite(tds)
    w_used = w.values[usable].sum()
    if w_used <= min_weight:
        return None
    return float((w.values[usable] * tds[usable]).sum() / w_used)
