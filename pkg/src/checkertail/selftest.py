"""Quick property checks runnable from an installed package (no pytest needed)."""

import math
import warnings

import numpy as np

from .bootstrap import MultiplierLaw, draw_multipliers
from .checkerboard import CheckerboardGrid, bilinear_weights, build_grid, cell_coordinates
from .copula_models import Clayton, Comonotone, asymptotic_variance
from .empirical import EmpiricalCopula, WeightedEmpiricalCopula, rank_sample
from .tail import TailCopulaEstimator
from .tuning import plan


def _operator(rng):
    m = 16
    corners = rng.uniform(-1, 1, (m + 1, m + 1))
    grid = CheckerboardGrid(corners)
    u, v = rng.uniform(0, 1, (2, 2000))
    ok = np.all(np.abs(grid(u, v)) <= np.abs(corners).max() + 1e-12)
    w = np.stack(bilinear_weights(*rng.uniform(0, 1, (2, 500))))
    ok &= np.all(w >= 0) and np.allclose(w.sum(axis=0), 1.0)
    g = np.arange(m + 1) / m
    a, b, c, d = rng.normal(size=4)
    bil = CheckerboardGrid(a + b * g[:, None] + c * g[None, :] + d * np.outer(g, g))
    ok &= np.allclose(bil(u, v), a + b * u + c * v + d * u * v, atol=1e-12)
    return bool(ok)


def _lipschitz(rng):
    X = Clayton(1.0).sample(500, rng)
    C = EmpiricalCopula(rank_sample(X))
    u1, v1, u2, v2 = rng.uniform(0, 1, (4, 5000))
    gap = np.abs(C(u2, v2) - C(u1, v1))
    return bool(np.all(gap <= 2 * (np.abs(u2 - u1) + np.abs(v2 - v1)) + 1e-12))


def _deviation(rng):
    X = Clayton(1.0).sample(1000, rng)
    C = EmpiricalCopula(rank_sample(X))
    p = np.linspace(0, 1, 129)
    U, V = np.meshgrid(p, p, indexing="ij")
    ok = True
    for m in (8, 32):
        grid = build_grid(C, m)
        ok &= np.max(np.abs(grid(U, V) - C(U, V))) <= 4.0 / m
    return bool(ok)


def _comonotone(rng):
    X = Comonotone().sample(1000, rng)
    est = TailCopulaEstimator(k=100, m=50).fit(X)
    return est.lambda_ == 1.0


def _tuning(rng):
    p = plan(10_000, 0.5, 0.8, 1.0)
    return (p.k, p.m, p.ok) == (100, 1584, True)


def _variance(rng):
    return math.isclose(asymptotic_variance(0.5, 0.25, 0.25), 0.1875)


def _weighted(rng):
    n = 2000
    ranks = rank_sample(Clayton(1.0).sample(n, rng))
    draw = draw_multipliers(MultiplierLaw.exponential(), n, rng)
    wc = WeightedEmpiricalCopula(ranks, draw.xi)
    u1, u2 = rng.uniform(0, 1, (2, 2000))
    d = wc.evaluate(u2, np.ones_like(u2))[0] - wc.evaluate(u1, np.ones_like(u1))[0]
    return bool(np.all(np.abs(d - (u2 - u1)) <= draw.delta + 1e-12))


def _cells(rng):
    t = rng.uniform(0, 1, 1000)
    i, mu = cell_coordinates(t, 13)
    return bool(np.all((i >= 1) & (i <= 13) & (mu >= 0) & (mu <= 1)))


CHECKS = {
    "operator contraction and bilinear reproduction": _operator,
    "cell coordinates in range": _cells,
    "empirical copula 2-Lipschitz": _lipschitz,
    "checkerboard deviation <= 4/m": _deviation,
    "comonotone lambda = 1 on grid": _comonotone,
    "tuning n=10000 (0.5, 0.8)": _tuning,
    "Clayton asymptotic variance 0.1875": _variance,
    "weighted copula modulus at v=1": _weighted,
}


def run(seed=0, out=print):
    """Run every check; return the number of failures."""
    failures = 0
    for name, check in CHECKS.items():
        rng = np.random.default_rng(seed)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                ok = check(rng)
            detail = ""
        except Exception as exc:  # report, keep going
            ok, detail = False, f" ({type(exc).__name__}: {exc})"
        failures += not ok
        out(f"{'PASS' if ok else 'FAIL'} {name}{detail}")
    return failures
