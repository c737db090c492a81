"""Candidate dose-response mean functions and their calculus.

Five mean-function families cover the shapes that matter in phase II
dose finding: linear and quadratic polynomials, the hyperbolic Emax
curve, its sigmoid generalization with a Hill exponent, and a
one-mean-per-dose ANOVA model. Each family comes with analytic first
and second derivatives in its parameters (used by the fitter and the
trace criterion) and a closed-form inverse for target-dose estimation.

Parameter layout (``theta``):

==========  =======================  ==========================================
kind        parameters               mean response
==========  =======================  ==========================================
linear      (e0, slope)              e0 + slope*d
quadratic   (e0, b1, b2)             e0 + b1*d + b2*d**2
emax        (e0, asym, ed50)         e0 + asym*d/(ed50 + d)
sigemax     (e0, asym, g, h)         e0 + asym*d**h/(g + d**h)
anova       (m1, ..., mk)            m_i at the i-th dose of the model's grid
==========  =======================  ==========================================

For ``sigemax`` the half-effect constant ``g`` lives on the ``d**h``
scale, i.e. ``g = ed50**h``; :func:`sigemax_ed50` and
:func:`sigemax_from_ed50` convert between the two conventions. Setting
``h = 1`` recovers the emax model exactly.

All functions are pure and accept a batch axis: ``theta`` of shape
``(p,)`` or ``(B, p)`` with doses of shape ``()`` or ``(m,)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

LINEAR = "linear"
QUADRATIC = "quadratic"
EMAX = "emax"
SIGEMAX = "sigemax"
ANOVA = "anova"

MODEL_KINDS = (LINEAR, QUADRATIC, EMAX, SIGEMAX, ANOVA)

_LABELS = {
    LINEAR: "Linear",
    QUADRATIC: "Quadratic",
    EMAX: "Emax",
    SIGEMAX: "SigEmax",
    ANOVA: "ANOVA",
}


@dataclass(frozen=True)
class Model:
    """One member of the candidate set.

    ``doses`` is required for (and only for) the ANOVA model, whose
    parameter vector is one mean per dose of that grid.
    """

    kind: str
    doses: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.kind == ANOVA:
            if not self.doses:
                raise ValueError("the anova model needs its dose grid")
            doses = tuple(float(d) for d in self.doses)
            if any(b <= a for a, b in zip(doses, doses[1:])):
                raise ValueError("anova dose grid must be strictly increasing")
            if doses[0] < 0:
                raise ValueError("doses must be nonnegative")
            object.__setattr__(self, "doses", doses)
        elif self.doses is not None:
            raise ValueError("only the anova model carries a dose grid")

    @property
    def param_dim(self) -> int:
        if self.kind == ANOVA:
            return len(self.doses)  # type: ignore[arg-type]
        return {LINEAR: 2, QUADRATIC: 3, EMAX: 3, SIGEMAX: 4}[self.kind]

    @property
    def label(self) -> str:
        return _LABELS[self.kind]

    def __str__(self) -> str:
        return self.label


def linear() -> Model:
    return Model(LINEAR)


def quadratic() -> Model:
    return Model(QUADRATIC)


def emax() -> Model:
    return Model(EMAX)


def sig_emax() -> Model:
    return Model(SIGEMAX)


def anova(doses) -> Model:
    return Model(ANOVA, tuple(float(d) for d in doses))


def model_from_name(name: str, design_doses=None) -> Model:
    """Build a Model from its lowercase name; ``anova`` needs the design doses."""
    key = name.strip().lower()
    if key == ANOVA:
        if design_doses is None:
            raise ValueError("anova model requires the design doses")
        return anova(design_doses)
    if key in MODEL_KINDS:
        return Model(key)
    raise ValueError(f"unknown model name {name!r}")


def sigemax_ed50(theta) -> float:
    """ED50 of a sigemax parameter vector (g = ed50**h convention)."""
    t = np.asarray(theta, dtype=float)
    return float(t[..., 2] ** (1.0 / t[..., 3]))


def sigemax_from_ed50(e0: float, asym: float, ed50: float, h: float) -> np.ndarray:
    """Sigemax parameter vector from the (d/ED50)**h parameterization."""
    if ed50 <= 0 or h <= 0:
        raise ValueError("ed50 and h must be positive")
    return np.array([e0, asym, ed50**h, h], dtype=float)


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------

def _check_theta(model: Model, theta: np.ndarray) -> None:
    if theta.shape[-1] != model.param_dim:
        raise ValueError(
            f"{model.kind} expects {model.param_dim} parameters, got {theta.shape[-1]}"
        )
    if not np.all(np.isfinite(theta)):
        raise ValueError("non-finite model parameters")
    if model.kind == EMAX and np.any(theta[..., 2] <= 0):
        raise ValueError("emax requires ed50 > 0")
    if model.kind == SIGEMAX and (np.any(theta[..., 2] <= 0) or np.any(theta[..., 3] <= 0)):
        raise ValueError("sigemax requires g > 0 and h > 0")


def _anova_indices(model: Model, d: np.ndarray) -> np.ndarray:
    grid = np.asarray(model.doses, dtype=float)
    idx = np.searchsorted(grid, d)
    idx = np.clip(idx, 0, len(grid) - 1)
    if not np.allclose(grid[idx], d, rtol=0.0, atol=1e-12):
        off = np.asarray(d)[~np.isclose(grid[idx], d, rtol=0.0, atol=1e-12)]
        raise ValueError(f"anova model evaluated off its dose grid: {off.tolist()}")
    return idx


# ---------------------------------------------------------------------------
# Mean response, gradient, hessian
# ---------------------------------------------------------------------------

def _mean(kind: str, theta: np.ndarray, d: np.ndarray, anova_idx=None) -> np.ndarray:
    """Batched mean response; theta (...,p) x d (m,) -> (...,m). No validation."""
    if kind == LINEAR:
        return theta[..., 0:1] + theta[..., 1:2] * d
    if kind == QUADRATIC:
        return theta[..., 0:1] + theta[..., 1:2] * d + theta[..., 2:3] * d * d
    if kind == EMAX:
        return theta[..., 0:1] + theta[..., 1:2] * d / (theta[..., 2:3] + d)
    if kind == SIGEMAX:
        u = _pow_dose(d, theta[..., 3:4])
        return theta[..., 0:1] + theta[..., 1:2] * u / (theta[..., 2:3] + u)
    if kind == ANOVA:
        return theta[..., anova_idx]
    raise ValueError(kind)


def _pow_dose(d: np.ndarray, h: np.ndarray) -> np.ndarray:
    """d**h with the d=0, h>0 continuity convention 0**h = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(d > 0, d, 1.0) ** h
    return np.where(d > 0, u, 0.0)


def _gradient(kind: str, theta: np.ndarray, d: np.ndarray, anova_idx=None) -> np.ndarray:
    """Batched d(eta)/d(theta); theta (...,p) x d (m,) -> (...,m,p)."""
    batch = theta.shape[:-1]
    p = theta.shape[-1]
    m = d.shape[0]
    g = np.zeros(batch + (m, p), dtype=float)
    if kind == LINEAR:
        g[..., 0] = 1.0
        g[..., 1] = d
    elif kind == QUADRATIC:
        g[..., 0] = 1.0
        g[..., 1] = d
        g[..., 2] = d * d
    elif kind == EMAX:
        den = theta[..., 2:3] + d
        g[..., 0] = 1.0
        g[..., 1] = d / den
        g[..., 2] = -theta[..., 1:2] * d / (den * den)
    elif kind == SIGEMAX:
        u = _pow_dose(d, theta[..., 3:4])
        v = theta[..., 2:3] + u
        with np.errstate(divide="ignore"):
            uln = np.where(d > 0, u * np.log(np.where(d > 0, d, 1.0)), 0.0)
        g[..., 0] = 1.0
        g[..., 1] = u / v
        g[..., 2] = -theta[..., 1:2] * u / (v * v)
        g[..., 3] = theta[..., 1:2] * theta[..., 2:3] * uln / (v * v)
    elif kind == ANOVA:
        g[..., np.arange(m), anova_idx] = 1.0
    else:
        raise ValueError(kind)
    return g


def _hessian(kind: str, theta: np.ndarray, d: np.ndarray, anova_idx=None) -> np.ndarray:
    """Batched second derivatives of eta in theta -> (...,m,p,p). Zero for linear-in-theta kinds."""
    batch = theta.shape[:-1]
    p = theta.shape[-1]
    m = d.shape[0]
    H = np.zeros(batch + (m, p, p), dtype=float)
    if kind in (LINEAR, QUADRATIC, ANOVA):
        return H
    if kind == EMAX:
        den = theta[..., 2:3] + d
        H[..., 1, 2] = H[..., 2, 1] = -d / (den * den)
        H[..., 2, 2] = 2.0 * theta[..., 1:2] * d / (den * den * den)
        return H
    if kind == SIGEMAX:
        t1 = theta[..., 1:2]
        t2 = theta[..., 2:3]
        u = _pow_dose(d, theta[..., 3:4])
        v = t2 + u
        with np.errstate(divide="ignore"):
            ln = np.where(d > 0, np.log(np.where(d > 0, d, 1.0)), 0.0)
        uln = u * ln
        uln2 = uln * ln
        v2 = v * v
        v3 = v2 * v
        H[..., 1, 2] = H[..., 2, 1] = -u / v2
        H[..., 1, 3] = H[..., 3, 1] = t2 * uln / v2
        H[..., 2, 2] = 2.0 * t1 * u / v3
        H[..., 2, 3] = H[..., 3, 2] = t1 * uln * (u - t2) / v3
        H[..., 3, 3] = t1 * t2 * uln2 * (t2 - u) / v3
        return H
    raise ValueError(kind)


def _prepare(model: Model, theta, dose):
    theta = np.asarray(theta, dtype=float)
    _check_theta(model, theta)
    d = np.atleast_1d(np.asarray(dose, dtype=float))
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValueError("doses must be finite and nonnegative")
    idx = _anova_indices(model, d) if model.kind == ANOVA else None
    return theta, d, idx


def predict(model: Model, theta, dose):
    """Mean response eta(dose, theta).

    ``dose`` may be a scalar (returns a float) or an array. ``theta``
    may carry a leading batch axis, in which case the result has shape
    ``(B, m)``.
    """
    th, d, idx = _prepare(model, theta, dose)
    out = _mean(model.kind, th, d, idx)
    if np.isscalar(dose) or np.ndim(dose) == 0:
        if th.ndim == 1:
            return float(out[0])
        return out[..., 0]
    return out


def gradient(model: Model, theta, dose):
    """Analytic gradient of the mean response in theta.

    Shape: ``(p,)`` for scalar dose and unbatched theta, otherwise
    ``(..., m, p)``.
    """
    th, d, idx = _prepare(model, theta, dose)
    g = _gradient(model.kind, th, d, idx)
    if (np.isscalar(dose) or np.ndim(dose) == 0) and th.ndim == 1:
        return g[0]
    return g


def hessian(model: Model, theta, dose):
    """Analytic second-derivative matrices of the mean response in theta."""
    th, d, idx = _prepare(model, theta, dose)
    H = _hessian(model.kind, th, d, idx)
    if (np.isscalar(dose) or np.ndim(dose) == 0) and th.ndim == 1:
        return H[0]
    return H


# ---------------------------------------------------------------------------
# Target dose (inverse of the placebo-adjusted effect)
# ---------------------------------------------------------------------------

def _quadratic_roots(a, b, c):
    """Stable vectorized roots of a*x**2 + b*x + c = 0 -> (..., 2), NaN where complex."""
    a = np.asarray(a, dtype=float)
    b = np.broadcast_to(np.asarray(b, dtype=float), a.shape)
    c = np.broadcast_to(np.asarray(c, dtype=float), a.shape)
    disc = b * b - 4.0 * a * c
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (b + np.where(b >= 0, 1.0, -1.0) * sq)
        r1 = q / a
        r2 = c / q
    return np.stack([r1, r2], axis=-1)


def _target_dose_batch(kind, theta, delta, lo, hi, model_doses=None):
    """Smallest dose in [lo, hi] with eta(d) - eta(0) == delta; NaN where absent.

    theta (B, p) -> (B,). ``delta`` must be nonzero. For anova,
    ``eta(0)`` is the mean at the lowest grid dose and the inverse is
    the first linear-interpolation crossing.
    """
    theta = np.asarray(theta, dtype=float)
    B = theta.shape[0]
    out = np.full(B, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == LINEAR:
            d = delta / theta[:, 1]
            ok = np.isfinite(d) & (d >= lo) & (d <= hi)
            out[ok] = d[ok]
        elif kind == QUADRATIC:
            a = theta[:, 2]
            b = theta[:, 1]
            lin = delta / np.where(b != 0, b, np.nan)
            roots = _quadratic_roots(np.where(a != 0, a, np.nan), b, -delta)
            roots = np.where(np.isfinite(roots), roots, np.inf)
            roots = np.where((roots >= lo) & (roots <= hi), roots, np.inf)
            best = roots.min(axis=1)
            use_lin = a == 0
            best = np.where(use_lin, np.where((lin >= lo) & (lin <= hi), lin, np.inf), best)
            ok = np.isfinite(best)
            out[ok] = best[ok]
        elif kind in (EMAX, SIGEMAX):
            t1 = theta[:, 1]
            ratio = delta / t1
            u = delta * theta[:, 2] / (t1 - delta)
            d = u ** (1.0 / theta[:, 3]) if kind == SIGEMAX else u
            ok = (ratio > 0) & (ratio < 1) & np.isfinite(d) & (d >= lo) & (d <= hi)
            out[ok] = d[ok]
        elif kind == ANOVA:
            grid = np.asarray(model_doses, dtype=float)
            eff = theta - theta[:, 0:1]
            found = np.zeros(B, dtype=bool)
            exact0 = np.isclose(eff[:, 0], delta) & (grid[0] >= lo) & (grid[0] <= hi)
            out[exact0] = grid[0]
            found |= exact0
            for i in range(len(grid) - 1):
                e0, e1 = eff[:, i], eff[:, i + 1]
                exact = ~found & np.isclose(e1, delta)
                cross = ~found & ~exact & ((e0 - delta) * (e1 - delta) < 0)
                t = (delta - e0) / np.where(e1 != e0, e1 - e0, np.nan)
                d = grid[i] + t * (grid[i + 1] - grid[i])
                hit_d = np.where(exact, grid[i + 1], d)
                ok = (exact | cross) & (hit_d >= lo) & (hit_d <= hi)
                out[ok] = hit_d[ok]
                found |= ok
        else:
            raise ValueError(kind)
    return out


def target_dose(model: Model, theta, delta: float, dose_range=(0.0, None)):
    """Smallest dose whose placebo-adjusted effect equals ``delta``.

    ``delta`` is the signed change from the placebo response
    ``eta(0, theta)``. Closed forms are used for the parametric
    families; the anova model inverts by linear interpolation on its
    grid. Returns ``None`` when no dose in ``dose_range`` attains the
    effect (for emax/sigemax in particular when ``|delta|`` meets or
    exceeds the asymptote ``|asym|``).
    """
    th = np.asarray(theta, dtype=float)
    _check_theta(model, th)
    if delta == 0:
        warnings.warn("delta = 0 never defines a unique target dose", stacklevel=2)
        return None
    lo, hi = dose_range
    if hi is None:
        if model.kind != ANOVA:
            raise ValueError("dose_range upper bound is required for parametric models")
        hi = model.doses[-1]  # type: ignore[index]
    if lo < 0 or hi < lo:
        raise ValueError("invalid dose range")
    td = _target_dose_batch(model.kind, th[None, :], float(delta), float(lo), float(hi),
                            model_doses=model.doses)[0]
    return float(td) if np.isfinite(td) else None
