"""Empirical lower and upper tail copulas, raw and checkerboard-smoothed.

With ``t = k / n`` the estimators are

* lower: ``C(t x, t y) / t``
* upper: ``(t x + t y - 1 + C(1 - t x, 1 - t y)) / t``

where ``C`` is either the empirical copula (``smoothing="raw"``) or its
checkerboard smoothing at resolution ``m``.  Dividing by ``t`` rather than
multiplying by ``n / k`` keeps grid-aligned values exact.
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_int, check_sample
from .checkerboard import LazyCheckerboard
from .empirical import EmpiricalCopula, rank_sample
from .tuning import plan

SIDES = ("lower", "upper")
SMOOTHINGS = ("checkerboard", "raw")


class TailExtrapolationWarning(UserWarning):
    """A tail argument mapped outside the unit square and was clamped."""


def copula_arguments(t, x, y, side, clamp=True):
    """Map tail arguments ``(x, y)`` to copula arguments ``(u, v)``.

    Returns ``(u, v, tx, ty)`` where ``tx, ty`` are the (clamped) products
    ``t x`` and ``t y``.  Values with ``t x > 1`` lie outside the unit
    square: they are clamped with a :class:`TailExtrapolationWarning`, or
    rejected when ``clamp`` is False.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("Tail copula arguments must be nonnegative.")
    tx, ty = t * x, t * y
    outside = (tx > 1.0) | (ty > 1.0)
    if np.any(outside):
        if not clamp:
            raise ValueError(
                "Tail arguments map outside the unit square (k x / n > 1); "
                "pass clamp=True to clamp them."
            )
        warnings.warn(
            f"{int(np.count_nonzero(outside))} tail argument(s) exceed n / k and "
            "were clamped to the unit square.",
            TailExtrapolationWarning,
            stacklevel=3,
        )
        tx, ty = np.minimum(tx, 1.0), np.minimum(ty, 1.0)
    if side == "lower":
        return tx, ty, tx, ty
    if side == "upper":
        return 1.0 - tx, 1.0 - ty, tx, ty
    raise ValueError(f"side must be one of {SIDES}, got {side!r}.")


def tail_from_copula(c, t, u, ty, side):
    """Rescale copula values ``c`` at the mapped arguments to the tail scale."""
    if side == "lower":
        return c / t
    # t x + t y - 1 + c regrouped as (c - u) + t y with u = 1 - t x; for
    # rank-aligned arguments c - u cancels exactly
    return (c - u + ty) / t


def tail_copula(base, n, k, x, y, side="lower", clamp=True):
    """Tail copula estimate from any copula-like callable ``base(u, v)``."""
    t = k / n
    u, v, _, ty = copula_arguments(t, x, y, side, clamp)
    c = np.asarray(base(u, v), dtype=np.float64)
    out = tail_from_copula(c, t, u, ty, side)
    return out if out.ndim else float(out)


def _resolve_tuning(n, k, m, alpha, beta, rho, need_m):
    tuned = None
    if (k is None or (need_m and m is None)) and alpha is not None and beta is not None:
        tuned = plan(n, alpha, beta, rho)
    if k is None:
        if tuned is None:
            raise ValueError(
                "The tail sample size is undetermined: pass k (and m) explicitly "
                "or the exponents alpha and beta."
            )
        k = tuned.k
    if need_m and m is None:
        if tuned is None:
            raise ValueError(
                "Checkerboard smoothing needs a resolution: pass m or alpha and beta."
            )
        m = tuned.m
    k = check_positive_int(k, "k")
    if k > n:
        raise ValueError(f"k={k} exceeds the sample size n={n}.")
    if m is not None:
        m = check_positive_int(m, "m")
    return k, m, tuned


class TailCopulaEstimator(BaseEstimator):
    """Nonparametric tail copula estimator for unknown marginals.

    Parameters
    ----------
    k : int, optional
        Number of tail observations ``k_n``. Taken from the tuning plan when
        omitted.
    m : int, optional
        Checkerboard resolution ``m_n``. Ignored for ``smoothing="raw"``.
    alpha, beta : float, optional
        Exponents for ``k_n = floor(n^alpha)`` and ``m_n = floor(n^beta)``.
    rho : float, default=1.0
        Second-order exponent used to validate ``alpha``.
    side : {"lower", "upper"}, default="lower"
    smoothing : {"checkerboard", "raw"}, default="checkerboard"
    clamp : bool, default=True
        Clamp copula arguments to the unit square instead of raising.

    Attributes
    ----------
    n_ : int
    k_ : int
    m_ : int or None
    plan_ : TuningPlan or None
        The plan used when ``k`` or ``m`` came from the exponents.
    copula_ : EmpiricalCopula
    lambda_ : float
        Estimated tail dependence coefficient (not clipped to [0, 1]).

    Examples
    --------
    >>> import numpy as np
    >>> from checkertail.copula_models import Clayton
    >>> X = Clayton(1.0).sample(2000, rng=0)
    >>> est = TailCopulaEstimator(alpha=0.5, beta=0.8).fit(X)
    >>> est.k_, est.m_
    (44, 437)
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
        clamp=True,
    ):
        self.k = k
        self.m = m
        self.alpha = alpha
        self.beta = beta
        self.rho = rho
        self.side = side
        self.smoothing = smoothing
        self.clamp = clamp

    def fit(self, X, y=None):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}.")
        if self.smoothing not in SMOOTHINGS:
            raise ValueError(
                f"smoothing must be one of {SMOOTHINGS}, got {self.smoothing!r}."
            )
        X = check_sample(X)
        self.n_ = X.shape[0]
        self.k_, self.m_, self.plan_ = _resolve_tuning(
            self.n_,
            self.k,
            self.m,
            self.alpha,
            self.beta,
            self.rho,
            need_m=self.smoothing == "checkerboard",
        )
        self.copula_ = EmpiricalCopula(rank_sample(X))
        self.n_features_in_ = 2
        self.lambda_ = self.tail_copula(1.0, 1.0)
        return self

    @property
    def base_(self):
        """The copula estimate the tail copula is read from."""
        check_is_fitted(self, "copula_")
        if self.smoothing == "raw":
            return self.copula_
        return LazyCheckerboard(self.copula_, self.m_)

    def tail_copula(self, x, y):
        """Estimated tail copula at ``(x, y)`` (broadcast)."""
        check_is_fitted(self, "copula_")
        return tail_copula(
            self.base_, self.n_, self.k_, x, y, side=self.side, clamp=self.clamp
        )

    def checkerboard_gap_bound(self):
        """Pathwise bound ``4 n / (k m)`` on the checkerboard-versus-raw gap."""
        check_is_fitted(self, "copula_")
        return 4.0 * self.n_ / (self.k_ * self.m_)


def _with_side(est, side):
    if est.side == side:
        return est
    params = est.get_params()
    params["side"] = side
    other = type(est)(**params)
    other.__dict__.update(
        {a: getattr(est, a) for a in ("n_", "k_", "m_", "plan_", "copula_", "n_features_in_")}
    )
    return other


def lower_tail_estimate(est, x, y):
    """Lower tail copula estimate of a fitted :class:`TailCopulaEstimator`."""
    return _with_side(est, "lower").tail_copula(x, y)


def upper_tail_estimate(est, x, y):
    """Upper tail copula estimate of a fitted :class:`TailCopulaEstimator`."""
    return _with_side(est, "upper").tail_copula(x, y)


def lambda_hat(est):
    """Tail dependence coefficient estimate on the estimator's side."""
    check_is_fitted(est, "copula_")
    return float(est.tail_copula(1.0, 1.0))
