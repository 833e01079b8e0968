"""Direct multiplier bootstrap for checkerboard tail copulas.

Each bootstrap replicate reweights the fixed sample with positive i.i.d.
multipliers, rebuilds the weighted empirical copula through the weighted
marginal inverses, smooths it on the checkerboard and rescales to the tail.
The scaled replicate ``(mu / tau) sqrt(k) (lambda_xi - lambda_hat)`` mimics
``sqrt(k) (lambda_hat - lambda)``.

Random streams
--------------
Replicate ``b`` draws its multipliers from
``SeedSequence(entropy, spawn_key=root.spawn_key + (b,))``, where ``root`` is
the seed sequence passed in (or built from an integer seed).  Replicates are
processed in fixed blocks of :data:`BLOCK_SIZE`, so results do not depend on
the number of workers.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_int, check_sample
from .checkerboard import bilinear_weights, cell_coordinates
from .empirical import WeightedEmpiricalCopula, rank_sample
from .tail import (
    SIDES,
    SMOOTHINGS,
    TailCopulaEstimator,
    copula_arguments,
    tail_from_copula,
)

BLOCK_SIZE = 50


def _standard_exponential(rng, size):
    return rng.standard_exponential(size)


@dataclass(frozen=True)
class _GammaSampler:
    shape: float

    def __call__(self, rng, size):
        return rng.gamma(self.shape, 1.0 / self.shape, size)


@dataclass(frozen=True)
class MultiplierLaw:
    """Law of the bootstrap multipliers.

    Parameters
    ----------
    name : str
    mean, std : float
        Population mean and standard deviation; the bootstrap uses these,
        not sample estimates, in the ``mean / std`` standardisation.
    sampler : callable
        ``sampler(rng, size)`` returning positive draws.  Must be picklable
        for process-based parallelism.
    """

    name: str
    mean: float
    std: float
    sampler: object = field(repr=False)

    def __post_init__(self):
        if not (self.mean > 0 and self.std > 0):
            raise ValueError("Multiplier mean and standard deviation must be positive.")

    @classmethod
    def exponential(cls):
        return cls("exponential", 1.0, 1.0, _standard_exponential)

    @classmethod
    def gamma(cls, shape):
        """Gamma law with mean 1 and standard deviation ``1 / sqrt(shape)``."""
        return cls(f"gamma({shape:g})", 1.0, 1.0 / math.sqrt(shape), _GammaSampler(shape))

    @property
    def scale(self):
        return self.mean / self.std

    def draw(self, n, rng):
        xi = np.asarray(self.sampler(rng, n), dtype=np.float64)
        return MultiplierDraw(xi)


@dataclass(frozen=True, eq=False)
class MultiplierDraw:
    """One vector of positive multipliers."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=np.float64)
        if xi.ndim != 1 or xi.size == 0:
            raise ValueError("Multipliers must form a non-empty 1-D array.")
        if np.any(xi <= 0) or not np.all(np.isfinite(xi)):
            raise ValueError("Multipliers must be positive and finite.")
        object.__setattr__(self, "xi", xi)

    @property
    def n(self):
        return self.xi.size

    @property
    def xi_bar(self):
        return float(self.xi.mean())

    @property
    def delta(self):
        """Largest normalised atom ``max_i xi_i / (n xi_bar)``."""
        return float(self.xi.max() / self.xi.sum())


def draw_multipliers(law, n, rng=None):
    """Draw ``n`` multipliers from ``law``."""
    n = check_positive_int(n, "n")
    return law.draw(n, np.random.default_rng(rng))


def _as_seed_sequence(random_state):
    if isinstance(random_state, np.random.SeedSequence):
        return random_state
    return np.random.SeedSequence(random_state)


def replicate_stream(root, b):
    """Generator for bootstrap replicate ``b`` under ``root``."""
    child = np.random.SeedSequence(root.entropy, spawn_key=tuple(root.spawn_key) + (b,))
    return np.random.default_rng(child)


def multiplier_tail_values(ranks, xi, k, m, side="lower", x=1.0, y=1.0):
    """Weighted tail copula at ``(x, y)`` for each multiplier row.

    Both the raw and the checkerboard versions come from the same weighted
    copula, so the expensive part (weighted marginal inverses) is shared.

    Parameters
    ----------
    ranks : ndarray of shape (n, 2)
    xi : ndarray of shape (n,) or (n_draws, n)
    k, m : int
        Tail sample size and checkerboard resolution (``m`` may be None,
        in which case only the raw value is computed).

    Returns
    -------
    dict
        ``{"raw": values, "checkerboard": values}`` with arrays of shape
        (n_draws,).
    """
    n = ranks.shape[0]
    t = k / n
    u, v, _, ty = copula_arguments(t, x, y, side)
    u, v, ty = float(u), float(v), float(ty)
    wc = WeightedEmpiricalCopula(ranks, xi)
    if m is None:
        c = wc.evaluate([u], [v])[:, 0]
        return {"raw": tail_from_copula(c, t, u, ty, side)}
    i, mu_u = cell_coordinates(u, m)
    j, mu_v = cell_coordinates(v, m)
    i, j, mu_u, mu_v = int(i), int(j), float(mu_u), float(mu_v)
    g = np.arange(m + 1) / m
    us = [g[i - 1], g[i], g[i - 1], g[i], u]
    vs = [g[j - 1], g[j - 1], g[j], g[j], v]
    vals = wc.evaluate(us, vs)
    w00, w10, w01, w11 = bilinear_weights(mu_u, mu_v)
    smooth = w00 * vals[:, 0] + w10 * vals[:, 1] + w01 * vals[:, 2] + w11 * vals[:, 3]
    return {
        "checkerboard": tail_from_copula(smooth, t, u, ty, side),
        "raw": tail_from_copula(vals[:, 4], t, u, ty, side),
    }


def bootstrap_tail_replicate(X, draw, k, m, side="lower", x=1.0, y=1.0, smoothing="checkerboard"):
    """Bootstrap tail copula value for a single multiplier draw."""
    ranks = rank_sample(X)
    xi = draw.xi if isinstance(draw, MultiplierDraw) else np.asarray(draw, float)
    vals = multiplier_tail_values(ranks, xi, k, None if smoothing == "raw" else m, side, x, y)
    return float(vals[smoothing][0])


@dataclass(frozen=True)
class ConfidenceInterval:
    """Interval for a tail dependence coefficient.

    ``lower``/``upper`` are clamped to [0, 1] when ``clamped`` is set;
    ``raw_lower``/``raw_upper`` always hold the unclamped endpoints.
    """

    lower: float
    upper: float
    raw_lower: float
    raw_upper: float
    level: float
    clamped: bool

    @property
    def length(self):
        return self.upper - self.lower

    def __contains__(self, value):
        return self.lower <= value <= self.upper


@dataclass(frozen=True, eq=False)
class BootstrapDistribution:
    """Scaled bootstrap replicates ``(mu/tau) sqrt(k) (lambda_xi - lambda_hat)``.

    ``values`` holds the unscaled weighted estimates ``lambda_xi``.
    """

    replicates: np.ndarray
    estimate: float
    k: int
    values: np.ndarray = None

    def __post_init__(self):
        r = np.asarray(self.replicates, dtype=np.float64)
        if r.ndim != 1:
            raise ValueError("Replicates must be a 1-D array.")
        object.__setattr__(self, "replicates", r)

    @property
    def B(self):
        return self.replicates.size

    def quantile(self, p):
        """Empirical quantile, lower-nearest order statistic ``x_(floor(p (B - 1)))``."""
        if self.B == 0:
            raise ValueError("Empty bootstrap distribution.")
        return float(np.quantile(self.replicates, p, method="lower"))

    def confidence_interval(self, level=0.9, clamp=True):
        return confidence_interval(self, self.estimate, self.k, level, clamp)


def confidence_interval(dist, lambda_hat, k, level=0.9, clamp=True):
    """Basic bootstrap interval by quantile inversion.

    With ``g = 1 - level`` and ``q`` the lower-nearest empirical quantile of
    the scaled replicates, the interval is
    ``[lambda_hat - q(1 - g/2) / sqrt(k), lambda_hat - q(g/2) / sqrt(k)]``.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level!r}.")
    if dist.B == 0:
        raise ValueError("Empty bootstrap distribution.")
    gamma = 1.0 - level
    root_k = math.sqrt(k)
    lo = lambda_hat - dist.quantile(1.0 - gamma / 2.0) / root_k
    hi = lambda_hat - dist.quantile(gamma / 2.0) / root_k
    if clamp:
        return ConfidenceInterval(
            min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0), lo, hi, level, True
        )
    return ConfidenceInterval(lo, hi, lo, hi, level, False)


def _block_values(ranks, law, k, m, side, x, y, root, start, stop):
    n = ranks.shape[0]
    xi = np.empty((stop - start, n))
    for row, b in enumerate(range(start, stop)):
        xi[row] = law.sampler(replicate_stream(root, b), n)
    if np.any(xi <= 0):
        raise ValueError(f"Multiplier law {law.name!r} produced a nonpositive draw.")
    return multiplier_tail_values(ranks, xi, k, m, side, x, y)


def bootstrap_values(ranks, law, k, m, B, random_state=None, side="lower", x=1.0, y=1.0, n_jobs=1):
    """Unscaled weighted tail values for ``B`` replicates, raw and checkerboard.

    Returns a dict of arrays of shape (B,), keyed as in
    :func:`multiplier_tail_values`.
    """
    root = _as_seed_sequence(random_state)
    blocks = [(s, min(s + BLOCK_SIZE, B)) for s in range(0, B, BLOCK_SIZE)]

    def run(bounds):
        return _block_values(ranks, law, k, m, side, x, y, root, *bounds)

    if n_jobs == 1 or len(blocks) == 1:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(run, blocks))
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}


def bootstrap_distribution(
    X,
    law=None,
    k=None,
    m=None,
    side="lower",
    B=500,
    random_state=None,
    smoothing="checkerboard",
    x=1.0,
    y=1.0,
    n_jobs=1,
):
    """Bootstrap distribution of the scaled tail copula at ``(x, y)``.

    Parameters
    ----------
    X : array-like of shape (n, 2)
        The data, held fixed across replicates.
    law : MultiplierLaw, default=standard exponential
    k, m : int
        Tail sample size and checkerboard resolution.
    B : int, default=500
        Number of replicates, at least 2.
    random_state : int, SeedSequence or None

    Returns
    -------
    BootstrapDistribution
    """
    law = law or MultiplierLaw.exponential()
    B = check_positive_int(B, "B", minimum=2)
    est = TailCopulaEstimator(k=k, m=m, side=side, smoothing=smoothing).fit(X)
    vals = bootstrap_values(
        est.copula_.ranks, law, est.k_, est.m_ if smoothing == "checkerboard" else None,
        B, random_state, side, x, y, n_jobs,
    )[smoothing]
    estimate = float(est.tail_copula(x, y))
    scaled = law.scale * math.sqrt(est.k_) * (vals - estimate)
    return BootstrapDistribution(scaled, estimate, est.k_, vals)


class MultiplierBootstrap(BaseEstimator):
    """Tail dependence coefficient with a direct multiplier bootstrap interval.

    Parameters
    ----------
    k, m, alpha, beta, rho, side, smoothing
        As in :class:`~checkertail.tail.TailCopulaEstimator`.
    n_bootstrap : int, default=500
    level : float, default=0.9
    law : MultiplierLaw, optional
        Standard exponential multipliers when omitted.
    clamp : bool, default=True
        Clamp the interval to [0, 1]; the raw endpoints are kept on ``ci_``.
    random_state : int, SeedSequence or None
    n_jobs : int, default=1

    Attributes
    ----------
    estimator_ : TailCopulaEstimator
    lambda_ : float
    distribution_ : BootstrapDistribution
    ci_ : ConfidenceInterval
    """

    def __init__(
        self,
        k=None,
        m=None,
        alpha=None,
        beta=None,
        rho=1.0,
        side="lower",
        smoothing="checkerboard",
        n_bootstrap=500,
        level=0.9,
        law=None,
        clamp=True,
        random_state=None,
        n_jobs=1,
    ):
        self.k = k
        self.m = m
        self.alpha = alpha
        self.beta = beta
        self.rho = rho
        self.side = side
        self.smoothing = smoothing
        self.n_bootstrap = n_bootstrap
        self.level = level
        self.law = law
        self.clamp = clamp
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if self.side not in SIDES or self.smoothing not in SMOOTHINGS:
            raise ValueError(f"Invalid side {self.side!r} or smoothing {self.smoothing!r}.")
        X = check_sample(X, min_samples=2)
        self.estimator_ = TailCopulaEstimator(
            k=self.k,
            m=self.m,
            alpha=self.alpha,
            beta=self.beta,
            rho=self.rho,
            side=self.side,
            smoothing=self.smoothing,
        ).fit(X)
        self.lambda_ = self.estimator_.lambda_
        self.distribution_ = bootstrap_distribution(
            X,
            self.law,
            self.estimator_.k_,
            self.estimator_.m_,
            side=self.side,
            B=self.n_bootstrap,
            random_state=self.random_state,
            smoothing=self.smoothing,
            n_jobs=self.n_jobs,
        )
        self.ci_ = self.distribution_.confidence_interval(self.level, self.clamp)
        self.n_features_in_ = 2
        return self

    @property
    def k_(self):
        check_is_fitted(self, "estimator_")
        return self.estimator_.k_

    @property
    def m_(self):
        check_is_fitted(self, "estimator_")
        return self.estimator_.m_
