"""Maximum-likelihood fitting under the homoscedastic normal error model.

Each candidate mean function is fit by minimizing the residual sum of
squares, which is the ML problem once the error variance is profiled
out (sigma2_hat = RSS/N). Linear-in-parameter models (linear,
quadratic, anova) are solved in closed form by weighted normal
equations; emax and sigemax are solved by damped least squares with box
constraints on the nonlinear parameters and a fixed, deterministic
multi-start grid (log-spaced ED50 and Hill values, linear parameters
profiled out at each start). There is no randomness anywhere in the
fitter.

Fitting only ever touches the per-dose sufficient statistics (weighted
group means plus the pooled within-group sum of squares), which is
exact under the normal model: RSS(theta) = SS_within +
sum_i n_i*(ybar_i - eta(d_i, theta))**2. That is also what makes
repeated fitting affordable: the internal entry point
:func:`fit_groups` accepts a whole batch of datasets sharing one design
and optimizes them all simultaneously.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

try:
    # numba's TBB-version grumble is environment noise; the workq/omp
    # threading layers work fine
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    from numba import njit, prange
except ImportError:  # degraded pure-python mode; same code, no compilation
    prange = range

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap

from .models import ANOVA, EMAX, LINEAR, QUADRATIC, SIGEMAX, Model

__all__ = [
    "Design",
    "Dataset",
    "GroupSummary",
    "FitOptions",
    "FitResult",
    "fit",
    "fit_groups",
    "log_likelihood",
]


# ---------------------------------------------------------------------------
# Data containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Design:
    """Dose levels with their group sizes."""

    doses: tuple[float, ...]
    group_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        doses = tuple(float(d) for d in self.doses)
        sizes = tuple(int(n) for n in self.group_sizes)
        if len(doses) != len(sizes):
            raise ValueError("doses and group sizes must have equal length")
        if len(doses) < 1:
            raise ValueError("a design needs at least one dose level")
        if any(b <= a for a, b in zip(doses, doses[1:])):
            raise ValueError("doses must be strictly increasing")
        if doses[0] < 0:
            raise ValueError("doses must be nonnegative")
        if any(n < 1 for n in sizes):
            raise ValueError("group sizes must be positive")
        object.__setattr__(self, "doses", doses)
        object.__setattr__(self, "group_sizes", sizes)

    @property
    def k(self) -> int:
        return len(self.doses)

    @property
    def n_total(self) -> int:
        return sum(self.group_sizes)

    @property
    def max_dose(self) -> float:
        return self.doses[-1]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Individual responses grouped by dose."""

    design: Design
    responses: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        resp = tuple(np.asarray(r, dtype=float) for r in self.responses)
        if len(resp) != self.design.k:
            raise ValueError("one response vector per dose level is required")
        for r, n in zip(resp, self.design.group_sizes):
            if r.ndim != 1 or r.size != n:
                raise ValueError("response vector lengths must match the design group sizes")
            if not np.all(np.isfinite(r)):
                raise ValueError("responses must be finite")
            r.flags.writeable = False
        object.__setattr__(self, "responses", resp)

    @classmethod
    def from_observations(cls, doses, values) -> "Dataset":
        """Group long-form (dose, response) observations into a Dataset."""
        d = np.asarray(doses, dtype=float)
        y = np.asarray(values, dtype=float)
        if d.size == 0:
            raise ValueError("no observations")
        if d.shape != y.shape:
            raise ValueError("doses and responses must have equal length")
        levels, inverse = np.unique(d, return_inverse=True)
        groups = tuple(y[inverse == i] for i in range(levels.size))
        design = Design(tuple(levels), tuple(len(g) for g in groups))
        return cls(design, groups)

    def group_means(self) -> np.ndarray:
        return np.array([r.mean() for r in self.responses])

    def within_group_ss(self) -> np.ndarray:
        return np.array([((r - r.mean()) ** 2).sum() for r in self.responses])


@dataclass(frozen=True, eq=False)
class GroupSummary:
    """Per-dose sufficient statistics (mean, within-group SS).

    Supports fitting published per-arm summary data without individual
    responses; the normal-model fit only depends on these statistics.
    """

    design: Design
    means: np.ndarray
    ss_within: np.ndarray

    def __post_init__(self) -> None:
        means = np.asarray(self.means, dtype=float)
        ssw = np.asarray(self.ss_within, dtype=float)
        if means.shape != (self.design.k,) or ssw.shape != (self.design.k,):
            raise ValueError("means and ss_within must have one entry per dose")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(ssw))):
            raise ValueError("summary statistics must be finite")
        if np.any(ssw < 0):
            raise ValueError("within-group sums of squares must be nonnegative")
        means.flags.writeable = False
        ssw.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "ss_within", ssw)

    @classmethod
    def from_moments(cls, doses, sizes, means, sds) -> "GroupSummary":
        """Build from per-arm (dose, n, mean, sd) rows; sd is the sample SD (divisor n-1)."""
        design = Design(tuple(doses), tuple(sizes))
        n = np.asarray(sizes, dtype=float)
        sd = np.asarray(sds, dtype=float)
        if np.any((n < 2) & (sd != 0)):
            raise ValueError("a nonzero sd needs a group size of at least 2")
        return cls(design, np.asarray(means, dtype=float), (n - 1) * sd**2)


def group_stats(data) -> tuple[Design, np.ndarray, np.ndarray]:
    """(design, group means, per-group within SS) of a Dataset or GroupSummary."""
    if isinstance(data, Dataset):
        return data.design, data.group_means(), data.within_group_ss()
    if isinstance(data, GroupSummary):
        return data.design, data.means, data.ss_within
    raise TypeError(f"expected Dataset or GroupSummary, got {type(data).__name__}")


# ---------------------------------------------------------------------------
# Options and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitOptions:
    """Optimizer configuration.

    The defaults implement the documented deterministic scheme: box
    constraints ED50 in [0.001, 1.5]*d_max and Hill in [0.5, 10], a
    log-spaced multi-start grid (7 ED50 x 5 Hill points), damping
    doubled on a failed step and divided by 3 on a successful one, and
    convergence when the relative RSS change drops below 1e-10 (or
    after 200 iterations). ``starts`` overrides the grid with explicit
    parameter vectors in the reported parameterization.
    """

    max_iter: int = 200
    rss_rel_tol: float = 1e-10
    damping_init: float = 1e-3
    damping_up: float = 2.0
    damping_down: float = 1.0 / 3.0
    n_ed50_starts: int = 7
    n_hill_starts: int = 5
    ed50_bounds: tuple[float, float] = (0.001, 1.5)
    hill_bounds: tuple[float, float] = (0.5, 10.0)
    starts: tuple[tuple[float, ...], ...] | None = None


DEFAULT_OPTIONS = FitOptions()


@dataclass(frozen=True, eq=False)
class FitResult:
    """ML fit of one model on one dataset."""

    model: Model
    theta: np.ndarray
    sigma2: float
    loglik: float
    rss: float
    converged: bool
    n_starts: int
    best_start: int

    def predict(self, dose):
        from .models import predict as _predict

        return _predict(self.model, self.theta, dose)


@dataclass(eq=False)
class BatchFit:
    """Vectorized fit of one model over a batch of same-design datasets."""

    model: Model
    theta: np.ndarray      # (B, p)
    rss: np.ndarray        # (B,)
    sigma2: np.ndarray     # (B,)
    loglik: np.ndarray     # (B,)
    converged: np.ndarray  # (B,) bool
    best_start: np.ndarray  # (B,) int
    n_starts: int = 1


# ---------------------------------------------------------------------------
# Public fitting API
# ---------------------------------------------------------------------------

def fit(model: Model, data, options: FitOptions = DEFAULT_OPTIONS) -> FitResult:
    """Maximum-likelihood fit of ``model`` to ``data``.

    ``data`` may be a :class:`Dataset` or a :class:`GroupSummary`.
    Non-convergence is reported through ``converged``; the best
    parameters found still populate the result so that callers can
    decide whether to exclude the model.
    """
    design, means, ssw = group_stats(data)
    batch = fit_groups(model, design, means[None, :], np.array([ssw.sum()]), options)
    return FitResult(
        model=model,
        theta=batch.theta[0],
        sigma2=float(batch.sigma2[0]),
        loglik=float(batch.loglik[0]),
        rss=float(batch.rss[0]),
        converged=bool(batch.converged[0]),
        n_starts=batch.n_starts,
        best_start=int(batch.best_start[0]),
    )


def log_likelihood(model: Model, data: Dataset, theta, sigma2: float) -> float:
    """Normal log-likelihood of ``theta`` with error variance ``sigma2``.

    Direct per-observation sum of log normal densities.
    """
    if not isinstance(data, Dataset):
        raise TypeError("log_likelihood needs individual responses (a Dataset)")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    th = np.asarray(theta, dtype=float)
    d = np.asarray(data.design.doses)
    eta = _mean_checked(model, th, d)
    total = 0.0
    for i, resp in enumerate(data.responses):
        z2 = (resp - eta[i]) ** 2 / sigma2
        total += float((-0.5 * (np.log(2.0 * np.pi * sigma2) + z2)).sum())
    return total


def _mean_checked(model: Model, theta: np.ndarray, d: np.ndarray) -> np.ndarray:
    from .models import predict

    return np.atleast_1d(predict(model, theta, d))


# ---------------------------------------------------------------------------
# Batched fitting over a shared design
# ---------------------------------------------------------------------------

def fit_groups(
    model: Model,
    design: Design,
    means: np.ndarray,
    ss_within_total: np.ndarray,
    options: FitOptions = DEFAULT_OPTIONS,
) -> BatchFit:
    """Fit one model to B datasets given as group means + within-SS totals.

    ``means`` has shape (B, k); ``ss_within_total`` shape (B,). All
    datasets share ``design``. Used directly by the bootstrap and the
    simulation engine; :func:`fit` is the single-dataset wrapper.
    """
    means = np.asarray(means, dtype=float)
    ssw = np.asarray(ss_within_total, dtype=float)
    B, k = means.shape
    if k != design.k or ssw.shape != (B,):
        raise ValueError("means/ss_within shapes do not match the design")
    d = np.asarray(design.doses)
    n = np.asarray(design.group_sizes, dtype=float)
    N = design.n_total

    if model.kind == ANOVA:
        if model.doses != design.doses:
            raise ValueError("anova model grid must equal the design doses")
        theta = means.copy()
        rss = ssw.copy()
        conv = np.ones(B, dtype=bool)
        best = np.zeros(B, dtype=int)
        n_starts = 1
    elif model.kind in (LINEAR, QUADRATIC):
        theta, rss_fit, identifiable = _fit_linear(model.kind, d, n, means)
        rss = ssw + rss_fit
        conv = np.full(B, identifiable)
        best = np.zeros(B, dtype=int)
        n_starts = 1
    else:
        theta, rss, conv, best, n_starts = _fit_nonlinear(
            model.kind, d, n, means, ssw, options
        )
        if k < model.param_dim:
            conv = np.zeros(B, dtype=bool)  # not identifiable from this design

    scale = 1.0 + np.abs(means) @ n / N
    sigma2 = np.maximum(rss / N, 1e-12 * scale**2)
    loglik = -0.5 * N * (np.log(2.0 * np.pi * sigma2) + 1.0)
    return BatchFit(model, theta, rss, sigma2, loglik, conv, best, n_starts)


def _fit_linear(kind: str, d, n, means):
    """Closed-form weighted least squares for the linear-in-theta models."""
    if kind == LINEAR:
        X = np.stack([np.ones_like(d), d], axis=1)
    else:
        X = np.stack([np.ones_like(d), d, d * d], axis=1)
    sw = np.sqrt(n)
    Xw = X * sw[:, None]
    rank = np.linalg.matrix_rank(Xw)
    solver = np.linalg.pinv(Xw)  # (p, k); minimum-norm solution if rank-deficient
    yw = means * sw
    theta = yw @ solver.T
    resid = yw - theta @ Xw.T
    rss_fit = (resid**2).sum(axis=1)
    return theta, rss_fit, bool(rank == X.shape[1])


# --- nonlinear path ---------------------------------------------------------
#
# Internally emax/sigemax are optimized by damped least squares over the
# log-scale nonlinear parameters only (ln ED50 and, for sigemax, ln Hill),
# with the two linear parameters profiled out by weighted least squares at
# every trial point (variable projection). The box constraints stay exact
# boxes on the log scale, and each parameter row evolves independently of
# the rest of the batch, so results are bit-identical no matter how fits
# are batched or threaded.

_KIND_EMAX = 1
_KIND_SIGEMAX = 2


def _fit_nonlinear(kind, d, n, means, ssw, options):
    B, k = means.shape
    N = n.sum()
    dmax = float(d.max()) if d.max() > 0 else 1.0
    e_lo, e_hi = options.ed50_bounds[0] * dmax, options.ed50_bounds[1] * dmax
    h_lo, h_hi = options.hill_bounds
    nq = 1 if kind == EMAX else 2
    kind_id = _KIND_EMAX if kind == EMAX else _KIND_SIGEMAX

    if options.starts is not None:
        a0 = _explicit_starts(kind, options.starts, e_lo, e_hi, h_lo, h_hi)
        S = a0.shape[0]
        alpha0 = np.tile(a0, (B, 1))
    else:
        alpha0, S = _grid_starts(kind, options, e_lo, e_hi, h_lo, h_hi, B)
        if kind == SIGEMAX and h_lo <= 1.0 <= h_hi:
            # warm start at the fitted emax solution with Hill = 1 (the nested
            # point); guarantees logL(sigemax) >= logL(emax) at the optimum
            emax_theta, _, _, _, _ = _fit_nonlinear(EMAX, d, n, means, ssw, options)
            warm = np.stack([np.log(emax_theta[:, 2]), np.zeros(B)], axis=1)
            alpha0 = np.concatenate(
                [alpha0.reshape(B, S, 2), warm[:, None, :]], axis=1
            ).reshape(B * (S + 1), 2)
            S += 1

    lo = np.array([np.log(e_lo), np.log(h_lo)][:nq])
    hi = np.array([np.log(e_hi), np.log(h_hi)][:nq])
    data_idx = np.repeat(np.arange(B), S)
    scale = 1.0 + np.abs(means) @ n / N
    floor = N * 1e-20 * scale**2

    M = B * S
    alpha = np.empty((M, nq))
    beta = np.empty((M, 2))
    rss_fit = np.empty(M)
    conv = np.zeros(M, dtype=np.bool_)
    _varpro_lm(
        kind_id, d, n, np.sqrt(n), means, data_idx, alpha0, lo, hi, ssw, floor,
        options.max_iter, options.rss_rel_tol, options.damping_init,
        options.damping_up, options.damping_down,
        alpha, beta, rss_fit, conv,
    )

    rss_tot = (rss_fit + ssw[data_idx]).reshape(B, S)
    best = np.argmin(rss_tot, axis=1)
    rows = np.arange(B) * S + best
    theta = _to_reported(kind, alpha[rows], beta[rows])
    return theta, rss_tot[np.arange(B), best], conv[rows], best, S


def _explicit_starts(kind, starts, e_lo, e_hi, h_lo, h_hi):
    """Reported-parameterization starts -> clipped log-scale (ln_e[, ln_h])."""
    t = np.asarray(starts, dtype=float)
    p = 3 if kind == EMAX else 4
    if t.ndim != 2 or t.shape[1] != p:
        raise ValueError(f"explicit starts for {kind} need {p} parameters")
    if np.any(t[:, 2] <= 0) or (kind == SIGEMAX and np.any(t[:, 3] <= 0)):
        raise ValueError("nonlinear start parameters must be positive")
    if kind == SIGEMAX:
        hill = np.clip(t[:, 3], h_lo, h_hi)
        ed50 = np.clip(t[:, 2] ** (1.0 / t[:, 3]), e_lo, e_hi)
        return np.stack([np.log(ed50), np.log(hill)], axis=1)
    return np.log(np.clip(t[:, 2], e_lo, e_hi))[:, None]


def _grid_starts(kind, options, e_lo, e_hi, h_lo, h_hi, B):
    """The fixed log-spaced start grid, replicated for each dataset."""
    ln_e = np.log(np.geomspace(e_lo, e_hi, options.n_ed50_starts))
    if kind == SIGEMAX:
        ln_h = np.log(np.geomspace(h_lo, h_hi, options.n_hill_starts))
        ee, hh = np.meshgrid(ln_e, ln_h, indexing="ij")
        grid = np.stack([ee.ravel(), hh.ravel()], axis=1)
    else:
        grid = ln_e[:, None]
    S = grid.shape[0]
    return np.tile(grid, (B, 1)), S


@njit(parallel=True, cache=True)
def _varpro_lm(kind, d, w, sw, y, data_idx, alpha0, lo, hi, ssw, floor,
               max_trials, rel_tol, lam0, lam_up, lam_down,
               alpha_out, beta_out, rss_out, conv_out):  # pragma: no cover
    """Variable-projection damped least squares, one independent row at a time.

    Trials are capped at ``max_trials``; after a rejected trial only the
    damping changes, so the cached Jacobian is reused. Convergence: the
    attainable change of the total RSS (within-group SS included) falls
    below ``rel_tol`` relative, or the total RSS reaches the
    machine-zero ``floor``.
    """
    M = alpha0.shape[0]
    k = d.shape[0]
    nq = alpha0.shape[1]
    w_sum = 0.0
    for i in range(k):
        w_sum += w[i]
    for m in prange(M):
        row = data_idx[m]
        ssw_row = ssw[row]
        floor_row = floor[row]
        s = np.empty(k)
        ds = np.empty((k, 2))
        s_t = np.empty(k)
        ds_t = np.empty((k, 2))
        rw = np.empty(k)
        jp = np.empty((k, 2))
        a = np.empty(2)
        a_t = np.empty(2)
        for j in range(nq):
            v = alpha0[m, j]
            if v < lo[j]:
                v = lo[j]
            elif v > hi[j]:
                v = hi[j]
            a[j] = v

        # --- profile at the start point
        _shape(kind, a, d, s, ds)
        b0, b1, rss = _profile(w, sw, s, y, row, rw, w_sum)

        lam = lam0
        have_jac = False
        conv = False
        A00 = A01 = A11 = g0 = g1 = 0.0
        for _ in range(max_trials):
            if not have_jac:
                # Kaufman projected Jacobian of the profiled residual
                a00 = w_sum
                a01 = 0.0
                a11 = 0.0
                for i in range(k):
                    a01 += w[i] * s[i]
                    a11 += w[i] * s[i] * s[i]
                det = a00 * a11 - a01 * a01
                ok = det > 1e-12 * (a00 * a11 + 1e-300)
                for j in range(nq):
                    c0 = 0.0
                    c1 = 0.0
                    for i in range(k):
                        vij = b1 * ds[i, j]
                        c0 += w[i] * vij
                        c1 += w[i] * s[i] * vij
                    if ok:
                        u0 = (a11 * c0 - a01 * c1) / det
                        u1 = (a00 * c1 - a01 * c0) / det
                    else:
                        u0 = c0 / a00
                        u1 = 0.0
                    for i in range(k):
                        jp[i, j] = sw[i] * (b1 * ds[i, j] - u0 - u1 * s[i])
                A00 = 0.0
                A01 = 0.0
                A11 = 0.0
                g0 = 0.0
                g1 = 0.0
                for i in range(k):
                    A00 += jp[i, 0] * jp[i, 0]
                    g0 += jp[i, 0] * rw[i]
                    if nq == 2:
                        A01 += jp[i, 0] * jp[i, 1]
                        A11 += jp[i, 1] * jp[i, 1]
                        g1 += jp[i, 1] * rw[i]
                have_jac = True

            # damped normal equations (1x1 or 2x2, closed form)
            dmax_diag = A00 if A00 > A11 else A11
            D0 = A00 if A00 > 1e-10 * dmax_diag + 1e-300 else 1e-10 * dmax_diag + 1e-300
            m00 = A00 + lam * D0
            if nq == 1:
                d0 = g0 / m00
                d1 = 0.0
            else:
                D1 = A11 if A11 > 1e-10 * dmax_diag + 1e-300 else 1e-10 * dmax_diag + 1e-300
                m11 = A11 + lam * D1
                det_m = m00 * m11 - A01 * A01
                if det_m <= 0.0:
                    det_m = 1e-300
                d0 = (m11 * g0 - A01 * g1) / det_m
                d1 = (m00 * g1 - A01 * g0) / det_m

            a_t[0] = a[0] + d0
            if a_t[0] < lo[0]:
                a_t[0] = lo[0]
            elif a_t[0] > hi[0]:
                a_t[0] = hi[0]
            if nq == 2:
                a_t[1] = a[1] + d1
                if a_t[1] < lo[1]:
                    a_t[1] = lo[1]
                elif a_t[1] > hi[1]:
                    a_t[1] = hi[1]

            _shape(kind, a_t, d, s_t, ds_t)
            b0_t, b1_t, rss_t = _profile(w, sw, s_t, y, row, rw, w_sum)

            tot = rss + ssw_row
            tot_t = rss_t + ssw_row
            diff = tot - tot_t
            if diff < 0.0:
                adiff = -diff
            else:
                adiff = diff
            ref = tot_t if tot_t > floor_row else floor_row
            done = adiff <= rel_tol * ref or tot <= floor_row or tot_t <= floor_row

            if rss_t < rss:
                for j in range(nq):
                    a[j] = a_t[j]
                for i in range(k):
                    s[i] = s_t[i]
                    ds[i, 0] = ds_t[i, 0]
                    ds[i, 1] = ds_t[i, 1]
                b0 = b0_t
                b1 = b1_t
                rss = rss_t
                lam *= lam_down
                have_jac = False
            else:
                # rejected: recompute rw for the current point (it was overwritten)
                for i in range(k):
                    rw[i] = sw[i] * (y[row, i] - b0 - b1 * s[i])
                lam *= lam_up
            if done:
                conv = True
                break

        for j in range(nq):
            alpha_out[m, j] = a[j]
        beta_out[m, 0] = b0
        beta_out[m, 1] = b1
        rss_out[m] = rss
        conv_out[m] = conv


@njit(cache=True)
def _shape(kind, a, d, s, ds):  # pragma: no cover
    """Shape function s(d) and its log-scale derivatives, one parameter row."""
    k = d.shape[0]
    if kind == 1:  # emax: s = d/(e+d)
        e = math.exp(a[0])
        for i in range(k):
            den = e + d[i]
            s[i] = d[i] / den
            ds[i, 0] = -d[i] * e / (den * den)
            ds[i, 1] = 0.0
    else:  # sigemax: s = x/(1+x), x = (d/e)^h
        h = math.exp(a[1])
        for i in range(k):
            if d[i] <= 0.0:
                s[i] = 0.0
                ds[i, 0] = 0.0
                ds[i, 1] = 0.0
            else:
                lnt = math.log(d[i]) - a[0]
                z = h * lnt
                if z > 600.0:
                    s[i] = 1.0
                    ds[i, 0] = 0.0
                    ds[i, 1] = 0.0
                elif z < -600.0:
                    s[i] = 0.0
                    ds[i, 0] = 0.0
                    ds[i, 1] = 0.0
                else:
                    x = math.exp(z)
                    one = 1.0 + x
                    base = x / (one * one)
                    s[i] = x / one
                    ds[i, 0] = -h * base
                    ds[i, 1] = z * base
    return


@njit(cache=True)
def _profile(w, sw, s, y, row, rw, w_sum):  # pragma: no cover
    """Weighted LS of y[row] on [1, s]; returns (b0, b1, rss) and fills rw."""
    k = s.shape[0]
    a01 = 0.0
    a11 = 0.0
    b0s = 0.0
    b1s = 0.0
    for i in range(k):
        a01 += w[i] * s[i]
        a11 += w[i] * s[i] * s[i]
        b0s += w[i] * y[row, i]
        b1s += w[i] * y[row, i] * s[i]
    det = w_sum * a11 - a01 * a01
    if det > 1e-12 * (w_sum * a11 + 1e-300):
        b0 = (a11 * b0s - a01 * b1s) / det
        b1 = (w_sum * b1s - a01 * b0s) / det
    else:
        b0 = b0s / w_sum
        b1 = 0.0
    rss = 0.0
    for i in range(k):
        rw[i] = sw[i] * (y[row, i] - b0 - b1 * s[i])
        rss += rw[i] * rw[i]
    return b0, b1, rss


def _to_reported(kind, alpha, beta):
    """Log-scale optimizer parameters -> reported parameterization."""
    B = alpha.shape[0]
    if kind == EMAX:
        theta = np.empty((B, 3))
        theta[:, 0] = beta[:, 0]
        theta[:, 1] = beta[:, 1]
        theta[:, 2] = np.exp(alpha[:, 0])
        return theta
    theta = np.empty((B, 4))
    theta[:, 0] = beta[:, 0]
    theta[:, 1] = beta[:, 1]
    hill = np.exp(alpha[:, 1])
    theta[:, 2] = np.exp(hill * alpha[:, 0])
    theta[:, 3] = hill
    return theta
