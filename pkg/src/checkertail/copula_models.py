"""Parametric copulas used as ground truth: CDFs, samplers and tail oracles.

Gaussian and Student-t CDFs are computed by one-dimensional quadrature of
the conditional distribution of the second coordinate given the first,
which keeps relative accuracy deep in the tails where the tail limits are
taken.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from ._validation import ExtrapolationError, OracleUnavailableError, check_unit

# t values for the numerical tail limit C(tx, ty) / t
_LIMIT_STEPS = tuple(10.0**-k for k in range(3, 10))
# the error estimate is pessimistic; true errors run about ten times smaller
_LIMIT_MAX_ERR = 1e-3


@dataclass(frozen=True)
class TailOracle:
    """Analytic tail-dependence quantities of a model at ``(1, 1)``.

    ``sigma2`` is the asymptotic variance of the scaled tail coefficient
    estimator under unknown marginals.
    """

    lam: float
    d_dx: float
    d_dy: float
    sigma2: float

    @classmethod
    def from_partials(cls, lam, d_dx, d_dy):
        return cls(lam, d_dx, d_dy, asymptotic_variance(lam, d_dx, d_dy))


def asymptotic_variance(lam, d_dx, d_dy):
    """``lam + dx^2 + dy^2 + 2 lam ((dx - 1)(dy - 1) - 1)``."""
    return lam + d_dx**2 + d_dy**2 + 2.0 * lam * ((d_dx - 1.0) * (d_dy - 1.0) - 1.0)


class CopulaModel:
    """Base class. Subclasses are immutable and safe to share across threads."""

    name = "copula"

    def cdf(self, u, v):
        raise NotImplementedError

    def _sample_uniform(self, n, rng):
        raise NotImplementedError

    def sample(self, n, rng=None, marginal=None):
        """Draw ``n`` i.i.d. pairs with this copula.

        Marginals are uniform unless ``marginal`` (a strictly increasing
        vectorised map) is given; rank-based estimators ignore it.

        Returns
        -------
        X : ndarray of shape (n, 2)
        """
        if n < 1:
            raise ValueError("n must be >= 1.")
        rng = np.random.default_rng(rng)
        X = self._sample_uniform(int(n), rng)
        if marginal is not None:
            X = marginal(X)
        return X

    def lower_tail_copula(self, x, y):
        return numerical_tail_limit(self.cdf, x, y)

    def upper_tail_copula(self, x, y):
        def survival(u, v):
            # C-hat(u, v) = u + v - 1 + C(1 - u, 1 - v)
            return u + v - 1.0 + self.cdf(1.0 - u, 1.0 - v)

        return numerical_tail_limit(survival, x, y)

    def tail_oracle(self, side="lower"):
        raise OracleUnavailableError(f"No tail oracle for {self!r}.")

    def params(self):
        return {}

    def _grid_cdf(self, u, v, func):
        u = check_unit(u, "u")
        v = check_unit(v, "v")
        out = np.asarray(func(*np.broadcast_arrays(u, v)), dtype=np.float64)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Independence(CopulaModel):
    name = "independence"

    def cdf(self, u, v):
        return self._grid_cdf(u, v, np.multiply)

    def _sample_uniform(self, n, rng):
        return rng.random((n, 2))

    def lower_tail_copula(self, x, y):
        return _zeros_like(x, y)

    def upper_tail_copula(self, x, y):
        return _zeros_like(x, y)

    def tail_oracle(self, side="lower"):
        return TailOracle.from_partials(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Comonotone(CopulaModel):
    name = "comonotone"

    def cdf(self, u, v):
        return self._grid_cdf(u, v, np.minimum)

    def _sample_uniform(self, n, rng):
        u = rng.random(n)
        return np.column_stack([u, u])

    def lower_tail_copula(self, x, y):
        out = np.minimum(np.asarray(x, float), np.asarray(y, float))
        return out if out.ndim else float(out)

    upper_tail_copula = lower_tail_copula

    def tail_oracle(self, side="lower"):
        # min(x, y) has a kink at (1, 1); the symmetric Euler split of the
        # homogeneous function gives partials 1/2 and a zero variance
        return TailOracle.from_partials(1.0, 0.5, 0.5)


@dataclass(frozen=True)
class Clayton(CopulaModel):
    """Clayton copula ``(u^-theta + v^-theta - 1)^(-1/theta)``, theta > 0."""

    theta: float
    name = "clayton"

    def __post_init__(self):
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"Clayton theta must be positive, got {self.theta!r}.")

    def params(self):
        return {"theta": self.theta}

    def cdf(self, u, v):
        th = self.theta

        def f(u, v):
            out = np.zeros(np.shape(u))
            pos = (u > 0) & (v > 0)
            up, vp = u[pos], v[pos]
            out[pos] = (up**-th + vp**-th - 1.0) ** (-1.0 / th)
            return out

        return self._grid_cdf(u, v, f)

    def _sample_uniform(self, n, rng):
        # conditional inversion of the h-function dC/du
        th = self.theta
        u = rng.random(n)
        w = rng.random(n)
        v = ((w ** (-th / (1.0 + th)) - 1.0) * u**-th + 1.0) ** (-1.0 / th)
        return np.column_stack([u, v])

    def lower_tail_copula(self, x, y):
        th = self.theta
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        with np.errstate(divide="ignore"):
            out = np.where(
                (x > 0) & (y > 0),
                (np.where(x > 0, x, 1.0) ** -th + np.where(y > 0, y, 1.0) ** -th)
                ** (-1.0 / th),
                0.0,
            )
        return out if out.ndim else float(out)

    def upper_tail_copula(self, x, y):
        return _zeros_like(x, y)

    def tail_oracle(self, side="lower"):
        if side == "upper":
            return TailOracle.from_partials(0.0, 0.0, 0.0)
        lam = 2.0 ** (-1.0 / self.theta)
        d = 2.0 ** (-1.0 / self.theta - 1.0)
        return TailOracle.from_partials(lam, d, d)


def _check_corr(corr):
    if not (-1.0 < corr < 1.0):
        raise ValueError(f"Correlation must lie strictly inside (-1, 1), got {corr!r}.")


@dataclass(frozen=True)
class Gaussian(CopulaModel):
    corr: float
    name = "gaussian"

    def __post_init__(self):
        _check_corr(self.corr)

    def params(self):
        return {"corr": self.corr}

    def cdf(self, u, v):
        r = self.corr
        s = math.sqrt(1.0 - r * r)

        def h(q, yv):
            return stats.norm.cdf((yv - r * stats.norm.ppf(q)) / s)

        def f(u, v):
            return _quad_cdf(u, v, h, stats.norm.ppf)

        return self._grid_cdf(u, v, f)

    def _sample_uniform(self, n, rng):
        z = rng.standard_normal((n, 2))
        r = self.corr
        z[:, 1] = r * z[:, 0] + math.sqrt(1.0 - r * r) * z[:, 1]
        return stats.norm.cdf(z)

    def lower_tail_copula(self, x, y):
        # tail independent for |corr| < 1
        return _zeros_like(x, y)

    upper_tail_copula = lower_tail_copula

    def tail_oracle(self, side="lower"):
        return TailOracle.from_partials(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class StudentT(CopulaModel):
    corr: float
    df: float
    name = "student_t"

    def __post_init__(self):
        _check_corr(self.corr)
        if not (self.df > 0 and math.isfinite(self.df)):
            raise ValueError(f"Degrees of freedom must be positive, got {self.df!r}.")

    def params(self):
        return {"corr": self.corr, "df": self.df}

    def cdf(self, u, v):
        r, nu = self.corr, self.df
        tq = stats.t(nu).ppf
        tc = stats.t(nu + 1.0).cdf
        k = math.sqrt((1.0 - r * r) / (nu + 1.0))

        def h(q, yv):
            x = tq(q)
            return tc((yv - r * x) / (k * np.sqrt(nu + x * x)))

        def f(u, v):
            return _quad_cdf(u, v, h, tq)

        return self._grid_cdf(u, v, f)

    def _sample_uniform(self, n, rng):
        r, nu = self.corr, self.df
        z = rng.standard_normal((n, 2))
        z[:, 1] = r * z[:, 0] + math.sqrt(1.0 - r * r) * z[:, 1]
        w = rng.chisquare(nu, n)
        t = z / np.sqrt(w / nu)[:, None]
        return stats.t(nu).cdf(t)

    def upper_tail_copula(self, x, y):
        # radially symmetric
        return self.lower_tail_copula(x, y)

    def tail_oracle(self, side="lower"):
        lam = float(self.lower_tail_copula(1.0, 1.0))
        # exchangeable and homogeneous of degree one: x dL/dx + y dL/dy = L
        return TailOracle.from_partials(lam, lam / 2.0, lam / 2.0)

    def closed_form_lambda(self):
        """Known closed form ``2 t_{nu+1}(-sqrt((nu+1)(1-r)/(1+r)))``."""
        r, nu = self.corr, self.df
        return 2.0 * stats.t(nu + 1.0).cdf(-math.sqrt((nu + 1.0) * (1.0 - r) / (1.0 + r)))


def _quad_cdf(u, v, h, ppf):
    """``C(u, v) = int_0^u h(s, ppf(v)) ds`` elementwise."""
    out = np.empty(np.shape(u))
    for idx in np.ndindex(out.shape):
        uu, vv = float(u[idx]), float(v[idx])
        if uu <= 0.0 or vv <= 0.0:
            out[idx] = 0.0
        elif uu >= 1.0:
            out[idx] = vv
        elif vv >= 1.0:
            out[idx] = uu
        else:
            yv = ppf(vv)
            val, _ = integrate.quad(
                lambda s: h(s, yv), 0.0, uu, epsabs=0.0, epsrel=1e-11, limit=200
            )
            out[idx] = min(max(val, 0.0), min(uu, vv))
    return out


def _aitken(seq):
    """Iterated Aitken delta-squared; returns the last extrapolated value."""
    seq = list(seq)
    while len(seq) >= 3:
        nxt = []
        for a, b, c in zip(seq, seq[1:], seq[2:]):
            d1, d2 = b - a, c - b
            nxt.append(c if d2 == d1 else c - d2 * d2 / (d2 - d1))
        seq = nxt
    return seq[-1]


def numerical_tail_limit(func, x, y, steps=_LIMIT_STEPS, max_rel_error=_LIMIT_MAX_ERR):
    """Limit of ``func(t x, t y) / t`` as ``t -> 0``.

    The ratio is evaluated at geometrically shrinking ``t`` and accelerated
    by iterated Aitken extrapolation, which removes power-law corrections of
    unknown exponent one at a time.  The error is estimated by repeating
    the extrapolation without the two smallest ``t``; if that estimate
    exceeds ``max_rel_error`` an :class:`ExtrapolationError` is raised.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x, y = np.broadcast_arrays(x, y)
    out = np.empty(x.shape)
    for idx in np.ndindex(x.shape):
        xx, yy = float(x[idx]), float(y[idx])
        if xx < 0 or yy < 0:
            raise ValueError("Tail copula arguments must be nonnegative.")
        if xx == 0.0 or yy == 0.0:
            out[idx] = 0.0
            continue
        f = [float(func(t * xx, t * yy)) / t for t in steps]
        limit = _aitken(f)
        coarse = _aitken(f[:-2])
        err = abs(limit - coarse) / max(abs(limit), 1e-300)
        if not np.isfinite(limit) or err > max_rel_error:
            raise ExtrapolationError(
                f"Tail limit at ({xx}, {yy}) did not settle: estimate {limit!r}, "
                f"relative error estimate {err:.2e}."
            )
        out[idx] = limit
    return out if out.ndim else float(out)


def _zeros_like(x, y):
    out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    return out if out.ndim else 0.0


def copula_cdf(model, u, v):
    return model.cdf(u, v)


def sample(model, n, rng=None, marginal=None):
    return model.sample(n, rng, marginal=marginal)


def lower_tail_copula(model, x, y):
    if np.any(np.asarray(x) < 0) or np.any(np.asarray(y) < 0):
        raise ValueError("Tail copula arguments must be nonnegative.")
    return model.lower_tail_copula(x, y)


def tail_oracle(model, side="lower"):
    return model.tail_oracle(side)


_MODELS = {
    "independence": Independence,
    "comonotone": Comonotone,
    "clayton": Clayton,
    "gaussian": Gaussian,
    "student_t": StudentT,
}


def make_model(kind, **params):
    """Build a model by name, e.g. ``make_model("clayton", theta=1.0)``."""
    try:
        cls = _MODELS[kind.lower().replace("-", "_")]
    except KeyError:
        raise ValueError(
            f"Unknown copula model {kind!r}; choose from {sorted(_MODELS)}."
        ) from None
    return cls(**params)
