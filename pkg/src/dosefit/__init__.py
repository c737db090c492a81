"""dosefit: dose-response model fitting, selection, averaging, and simulation.

The package fits five candidate dose-response models by maximum
likelihood under a homoscedastic normal error model, scores them with
five information criteria (AIC, AICc, BIC, BIC2, TIC), turns criterion
values into model-averaging weights, estimates target doses, bags the
selection step with a stratified bootstrap, and ships a reproducible
Monte Carlo engine for the accompanying simulation study.
"""

from .averaging import ModelWeights, average_effect, average_target_dose, weights
from .bootstrap import (
    BootstrapResult,
    DoseEffect,
    TargetDose,
    bootstrap_average,
    stratified_resample,
)
from .criteria import (
    CRITERIA,
    CriterionScore,
    SingularInformationError,
    penalty,
    score,
    score_models,
    select,
    tic_matrices,
    tic_penalty,
)
from .fitting import (
    Dataset,
    Design,
    FitOptions,
    FitResult,
    GroupSummary,
    fit,
    log_likelihood,
)
from .models import (
    MODEL_KINDS,
    Model,
    anova,
    emax,
    gradient,
    hessian,
    linear,
    model_from_name,
    predict,
    quadratic,
    sig_emax,
    sigemax_ed50,
    sigemax_from_ed50,
    target_dose,
)
from .rng import substream

__version__ = "0.1.0"

__all__ = [
    "CRITERIA",
    "BootstrapResult",
    "CriterionScore",
    "Dataset",
    "Design",
    "DoseEffect",
    "FitOptions",
    "FitResult",
    "GroupSummary",
    "MODEL_KINDS",
    "Model",
    "ModelWeights",
    "SingularInformationError",
    "TargetDose",
    "anova",
    "average_effect",
    "average_target_dose",
    "bootstrap_average",
    "emax",
    "fit",
    "gradient",
    "hessian",
    "linear",
    "log_likelihood",
    "model_from_name",
    "penalty",
    "predict",
    "quadratic",
    "score",
    "score_models",
    "select",
    "sig_emax",
    "sigemax_ed50",
    "sigemax_from_ed50",
    "stratified_resample",
    "substream",
    "target_dose",
    "tic_matrices",
    "tic_penalty",
    "weights",
]
