"""Scenario grid of the simulation study.

A scenario is one cell of the (sample size) x (design) x (true model)
grid: four designs on the dose range [0, 8], two total sample sizes,
and five data-generating models with fixed reference parameters. The
default grid has 2*4*5 = 40 scenarios.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from ..models import ANOVA, MODEL_KINDS, Model, anova, model_from_name

__all__ = [
    "DESIGNS",
    "TRUE_THETA",
    "TRUE_ANOVA_GRID",
    "DEFAULT_SD",
    "DEFAULT_DELTA",
    "Scenario",
    "allocate",
    "build_grid",
    "candidate_models",
]

DESIGNS: dict[str, tuple[float, ...]] = {
    "A": (0.0, 2.0, 4.0, 6.0, 8.0),
    "B": (0.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0),
    "C": (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0),
    "D": (0.0, 2.0, 4.0, 8.0),
}

TRUE_ANOVA_GRID = tuple(float(d) for d in range(9))

# Reference parameters of the data-generating models.
TRUE_THETA: dict[str, tuple[float, ...]] = {
    "linear": (0.0, -1.65 / 8.0),
    "quadratic": (0.0, -1.65 / 3.0, 1.65 / 36.0),
    "emax": (0.0, -1.81, 0.79),
    "sigemax": (0.0, -1.7, 4.0, 5.0),
    "anova": (0.0, -1.29, -1.35, -1.42, -1.5, -1.6, -1.63, -1.65, -1.65),
}

DEFAULT_SD = math.sqrt(4.5)
DEFAULT_DELTA = -1.3

# SigEmax needs at least this many dose levels to be estimable.
MIN_DOSES_FOR_SIGEMAX = 5


def allocate(n_total: int, k: int) -> tuple[int, ...]:
    """Split ``n_total`` patients as equally as possible over ``k`` arms.

    Largest-remainder apportionment on equal weights; leftover patients
    go to the lowest dose indices first. Deterministic.
    """
    if k < 1 or n_total < k:
        raise ValueError(f"cannot allocate N={n_total} to k={k} arms")
    base, extra = divmod(n_total, k)
    return tuple(base + 1 if i < extra else base for i in range(k))


def candidate_models(
    design_name: str,
    doses: tuple[float, ...],
    *,
    include_anova: bool = False,
    requested: tuple[str, ...] | None = None,
) -> tuple[Model, ...]:
    """Candidate set for a design; drops sigemax when the design cannot support it."""
    if requested is None:
        names = ["linear", "quadratic", "emax", "sigemax"]
        if include_anova:
            names.append("anova")
    else:
        names = list(requested)
    if "sigemax" in names and len(doses) < MIN_DOSES_FOR_SIGEMAX:
        warnings.warn(
            f"sigemax is not estimable under design {design_name} "
            f"({len(doses)} dose levels); dropping it from the candidate set"
        )
        names = [n for n in names if n != "sigemax"]
    return tuple(model_from_name(n, doses) for n in names)


@dataclass(frozen=True)
class Scenario:
    """One cell of the simulation grid."""

    index: int
    design_name: str
    doses: tuple[float, ...]
    n_total: int
    true_model: Model
    true_theta: tuple[float, ...]
    candidates: tuple[Model, ...]
    sd: float = DEFAULT_SD
    delta: float = DEFAULT_DELTA
    n_sim: int = 1000
    boot_reps: int = 500
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.true_theta) != self.true_model.param_dim:
            raise ValueError("true_theta does not match the true model dimension")
        if self.sd < 0:
            raise ValueError("sd must be nonnegative")
        if self.n_sim < 1:
            raise ValueError("n_sim must be positive")
        if self.boot_reps < 0:
            raise ValueError("boot_reps must be nonnegative")
        if self.delta == 0:
            raise ValueError("delta must be nonzero")

    @property
    def group_sizes(self) -> tuple[int, ...]:
        return allocate(self.n_total, len(self.doses))

    @property
    def dose_range(self) -> tuple[float, float]:
        return (self.doses[0], self.doses[-1])

    @property
    def label(self) -> str:
        return f"{self.true_model.kind}/{self.design_name}/N={self.n_total}"


def _true_model(kind: str) -> tuple[Model, tuple[float, ...]]:
    if kind == ANOVA:
        return anova(TRUE_ANOVA_GRID), TRUE_THETA["anova"]
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown true model {kind!r}")
    return Model(kind), TRUE_THETA[kind]


def build_grid(
    *,
    designs: tuple[str, ...] = ("A", "B", "C", "D"),
    sample_sizes: tuple[int, ...] = (150, 250),
    true_models: tuple[str, ...] = ("linear", "quadratic", "emax", "sigemax", "anova"),
    include_anova_candidate: bool = False,
    n_sim: int = 1000,
    boot_reps: int = 500,
    sd: float = DEFAULT_SD,
    delta: float = DEFAULT_DELTA,
    seed: int = 0,
    theta_overrides: dict[str, tuple[float, ...]] | None = None,
) -> list[Scenario]:
    """Scenario list in a fixed deterministic order (N, then design, then model)."""
    overrides = theta_overrides or {}
    scenarios = []
    index = 0
    for n_total in sample_sizes:
        for dname in designs:
            if dname not in DESIGNS:
                raise ValueError(f"unknown design {dname!r}; expected one of {sorted(DESIGNS)}")
            doses = DESIGNS[dname]
            cands = candidate_models(dname, doses, include_anova=include_anova_candidate)
            for kind in true_models:
                model, theta = _true_model(kind)
                theta = tuple(overrides.get(kind, theta))
                scenarios.append(
                    Scenario(
                        index=index,
                        design_name=dname,
                        doses=doses,
                        n_total=n_total,
                        true_model=model,
                        true_theta=theta,
                        candidates=cands,
                        sd=sd,
                        delta=delta,
                        n_sim=n_sim,
                        boot_reps=boot_reps,
                        seed=seed,
                    )
                )
                index += 1
    return scenarios
