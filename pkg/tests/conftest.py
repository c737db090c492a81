import numpy as np
import pytest

import dosefit as df


def bisect_effect(model, theta, delta, lo, hi, tol=1e-12):
    """Independent target-dose oracle: scan for the first sign change of
    eta(d) - eta(0) - delta on a fine grid, then bisect it down to tol."""
    grid = np.linspace(lo, hi, 4001)
    base = df.predict(model, theta, 0.0)
    f = np.array([df.predict(model, theta, d) for d in grid]) - base - delta
    if abs(f[0]) < 1e-14:
        return float(grid[0])
    for i in range(len(grid) - 1):
        if abs(f[i + 1]) < 1e-14:
            return float(grid[i + 1])
        if f[i] * f[i + 1] < 0:
            a, b = grid[i], grid[i + 1]
            fa = f[i]
            while b - a > tol:
                m = 0.5 * (a + b)
                fm = df.predict(model, theta, m) - df.predict(model, theta, 0.0) - delta
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            return float(0.5 * (a + b))
    return None


def fd_gradient(model, theta, d):
    """Central finite differences of the mean response in theta."""
    th = np.asarray(theta, dtype=float)
    out = np.empty(th.size)
    for j in range(th.size):
        h = 1e-6 * (1.0 + abs(th[j]))
        tp, tm = th.copy(), th.copy()
        tp[j] += h
        tm[j] -= h
        out[j] = (df.predict(model, tp, d) - df.predict(model, tm, d)) / (2.0 * h)
    return out


def random_theta(model, rng):
    """A random admissible parameter vector for property tests."""
    kind = model.kind
    if kind == "linear":
        return rng.normal(0, 1, 2)
    if kind == "quadratic":
        return rng.normal(0, 0.5, 3)
    if kind == "emax":
        return np.array([rng.normal(), rng.normal(0, 2), rng.uniform(0.05, 10.0)])
    if kind == "sigemax":
        return np.array([rng.normal(), rng.normal(0, 2),
                         rng.uniform(0.1, 30.0), rng.uniform(0.6, 6.0)])
    return rng.normal(0, 1, model.param_dim)


@pytest.fixture
def emax_dataset():
    """Noisy emax-generated data on the nine-dose grid."""
    rng = np.random.default_rng(101)
    design = df.Design(tuple(range(9)), (17,) * 9)
    mu = df.predict(df.emax(), (0.0, -1.81, 0.79), np.arange(9.0))
    responses = tuple(mu[i] + 0.7 * rng.standard_normal(17) for i in range(9))
    return df.Dataset(design, responses)
