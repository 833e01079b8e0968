"""Rank transforms, empirical copulas and their multiplier-weighted versions.

The unweighted empirical copula is stored through integer ranks, so every
value it returns is an exact count divided by ``n``.  The weighted copula
keeps one row of multipliers per bootstrap replicate and evaluates all rows
at once.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_sample

# Upper bound on the number of query-by-observation cells held in memory
# by the broadcast counting path.
_CHUNK_CELLS = 4_000_000
# n * u this close below an integer counts as that integer (absorbs the
# rounding in arguments such as 1 - k / n)
_RANK_SNAP = 1e-9


def rank_threshold(u, n):
    """Largest rank ``r`` with ``r / n <= u``, i.e. ``floor(n u)``.

    Values of ``n u`` within ``1e-9`` below an integer are rounded up to it.
    """
    nu = np.asarray(u, dtype=np.float64) * n
    a = np.floor(nu)
    a = np.where(nu - a > 1.0 - _RANK_SNAP, a + 1.0, a)
    return np.clip(a, 0, n).astype(np.int64)


def rank_sample(X):
    """Integer ranks (1..n) of each column of a tie-free bivariate sample.

    Parameters
    ----------
    X : array-like of shape (n_samples, 2)

    Returns
    -------
    ranks : ndarray of shape (n_samples, 2), dtype int64

    Raises
    ------
    TiesError
        If either column contains tied values.
    """
    X = check_sample(X)
    n = X.shape[0]
    ranks = np.empty((n, 2), dtype=np.int64)
    for col in range(2):
        order = np.argsort(X[:, col], kind="stable")
        ranks[order, col] = np.arange(1, n + 1)
    return ranks


def pseudo_observations(X):
    """Pseudo-observations ``(R_X / n, R_Y / n)`` of a bivariate sample.

    >>> pseudo_observations([[3.1, 10], [0.2, 30], [7.7, 20]])
    array([[0.66666667, 0.33333333],
           [0.33333333, 1.        ],
           [1.        , 0.66666667]])
    """
    ranks = rank_sample(X)
    return ranks / ranks.shape[0]


class PseudoObservations(TransformerMixin, BaseEstimator):
    """Rank transform to the unit square.

    ``fit`` stores the sorted marginals; ``transform`` maps new points through
    the fitted empirical marginal distribution functions, so that
    ``fit_transform`` on tie-free data returns the usual pseudo-observations.

    Attributes
    ----------
    n_samples_ : int
    sorted_ : ndarray of shape (n_samples, 2)
        Each column of the training sample sorted ascending.
    """

    def fit(self, X, y=None):
        X = check_sample(X)
        self.n_samples_ = X.shape[0]
        self.sorted_ = np.sort(X, axis=0)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "sorted_")
        X = check_sample(X, allow_ties=True)
        out = np.empty_like(X)
        for col in range(2):
            counts = np.searchsorted(self.sorted_[:, col], X[:, col], side="right")
            out[:, col] = counts / self.n_samples_
        return out


class EmpiricalCopula:
    """Empirical copula of a rank sample.

    Parameters
    ----------
    ranks : array-like of shape (n_samples, 2)
        Integer ranks 1..n in each column, e.g. from :func:`rank_sample`.
    """

    def __init__(self, ranks):
        ranks = np.asarray(ranks, dtype=np.int64)
        self.ranks = ranks
        self.n = ranks.shape[0]
        self.u = ranks[:, 0] / self.n
        self.v = ranks[:, 1] / self.n

    @classmethod
    def from_sample(cls, X):
        return cls(rank_sample(X))

    def counts(self, u, v):
        """Number of pseudo-observations in ``[0, u] x [0, v]`` (broadcast)."""
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        flat_a = rank_threshold(u.ravel(), self.n)
        flat_b = rank_threshold(v.ravel(), self.n)
        rx, ry = self.ranks[:, 0], self.ranks[:, 1]
        out = np.empty(flat_a.shape, dtype=np.int64)
        step = max(1, _CHUNK_CELLS // max(self.n, 1))
        for start in range(0, flat_a.size, step):
            qa = flat_a[start : start + step, None]
            qb = flat_b[start : start + step, None]
            hit = (rx[None, :] <= qa) & (ry[None, :] <= qb)
            out[start : start + step] = np.count_nonzero(hit, axis=1)
        return out.reshape(u.shape)

    def __call__(self, u, v):
        c = self.counts(u, v) / self.n
        return c if c.ndim else float(c)

    def grid(self, m):
        """Copula values at all corners ``(i/m, j/m)``, ``0 <= i, j <= m``.

        Equivalent to evaluating the copula corner by corner, but costs
        O(n + m^2) through a cumulative count table.
        """
        a = rank_threshold(np.arange(m + 1) / m, self.n)
        # first grid index whose rank threshold admits the point
        bx = np.searchsorted(a, self.ranks[:, 0], side="left")
        by = np.searchsorted(a, self.ranks[:, 1], side="left")
        table = np.zeros((m + 1, m + 1), dtype=np.int64)
        np.add.at(table, (bx, by), 1)
        return table.cumsum(axis=0).cumsum(axis=1) / self.n

    def __repr__(self):
        return f"EmpiricalCopula(n={self.n})"


def empirical_copula(pseudo, u, v):
    """Evaluate the empirical copula of pseudo-observations at ``(u, v)``.

    ``pseudo`` holds values ``R / n``; they are converted back to ranks.
    """
    pseudo = np.asarray(pseudo, dtype=np.float64)
    n = pseudo.shape[0]
    ranks = np.rint(pseudo * n).astype(np.int64)
    return EmpiricalCopula(ranks)(u, v)


class WeightedStepFunction:
    """Distribution function with positive point masses.

    Parameters
    ----------
    locations : array-like of shape (n,)
        Jump locations, any order; sorted on construction.
    weights : array-like of shape (n,)
        Positive weights, normalised so the masses sum to one.
    """

    def __init__(self, locations, weights):
        locations = np.asarray(locations, dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        if locations.shape != weights.shape or locations.ndim != 1:
            raise ValueError("locations and weights must be 1-D of equal length.")
        if locations.size == 0:
            raise ValueError("At least one jump is required.")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValueError("Weights must be positive and finite.")
        order = np.argsort(locations, kind="stable")
        self.locations = locations[order]
        cum = np.cumsum(weights[order])
        # dividing by the running total's last entry pins K(max) to exactly 1
        self.cumulative = cum / cum[-1]
        self.masses = np.diff(self.cumulative, prepend=0.0)

    def __call__(self, x):
        idx = np.searchsorted(self.locations, np.asarray(x, float), side="right")
        out = np.where(idx > 0, self.cumulative[np.maximum(idx - 1, 0)], 0.0)
        return out if out.ndim else float(out)

    def inverse(self, p):
        """Left-continuous generalized inverse.

        ``inf{x : K(x) >= p}`` for ``0 < p <= 1`` and ``sup{x : K(x) = 0}``
        for ``p = 0``; the latter is the smallest jump location.
        """
        p = np.asarray(p, dtype=np.float64)
        idx = _count_below(self.cumulative, p)
        out = self.locations[np.minimum(idx, self.locations.size - 1)]
        return out if out.ndim else float(out)


def generalized_inverse(K, p):
    """Functional form of :meth:`WeightedStepFunction.inverse`."""
    return K.inverse(p)


def _count_below(cumulative, p):
    # number of cumulative levels strictly below p == 0-based index of K^-(p)
    return np.searchsorted(cumulative, p, side="left")


class WeightedEmpiricalCopula:
    """Multiplier-weighted empirical copula, one row per multiplier draw.

    The value at ``(u, v)`` is the weighted joint distribution function
    evaluated at the generalized inverses of the weighted marginals.  With
    the data fixed, only the ranks matter, so the sample is held as ranks.

    Parameters
    ----------
    ranks : array-like of shape (n_samples, 2)
        Integer ranks 1..n of the sample.
    xi : array-like of shape (n_samples,) or (n_draws, n_samples)
        Positive multipliers.
    """

    def __init__(self, ranks, xi):
        ranks = np.asarray(ranks, dtype=np.int64)
        xi = np.asarray(xi, dtype=np.float64)
        self._single = xi.ndim == 1
        xi = np.atleast_2d(xi)
        n = ranks.shape[0]
        if xi.shape[1] != n:
            raise ValueError(f"Expected {n} multipliers per draw, got {xi.shape[1]}.")
        if np.any(xi <= 0) or not np.all(np.isfinite(xi)):
            raise ValueError("Multipliers must be positive and finite.")
        self.ranks = ranks
        self.xi = xi
        self.n = n
        order_x = np.empty(n, dtype=np.int64)
        order_y = np.empty(n, dtype=np.int64)
        order_x[ranks[:, 0] - 1] = np.arange(n)
        order_y[ranks[:, 1] - 1] = np.arange(n)
        cx = np.cumsum(xi[:, order_x], axis=1)
        cy = np.cumsum(xi[:, order_y], axis=1)
        # same summation as the query path, so a full hit sums to exactly 1
        self.total = np.sum(xi, axis=1)
        self.cdf_x = cx / cx[:, -1:]
        self.cdf_y = cy / cy[:, -1:]

    @property
    def delta(self):
        """Largest normalised atom ``max_i xi_i / (n * mean(xi))`` per draw."""
        d = self.xi.max(axis=1) / self.total
        return float(d[0]) if self._single else d

    def inverse_ranks(self, p, axis):
        """Rank of the observation at the generalized inverse, per draw.

        Returns an int array of shape (n_draws,) for scalar ``p``.
        """
        cdf = self.cdf_x if axis == 0 else self.cdf_y
        return np.count_nonzero(cdf < p, axis=1) + 1

    def evaluate(self, us, vs):
        """Values at query points ``(us[q], vs[q])`` for every draw.

        Returns
        -------
        values : ndarray of shape (n_draws, n_queries)
        """
        us = np.atleast_1d(np.asarray(us, dtype=np.float64))
        vs = np.atleast_1d(np.asarray(vs, dtype=np.float64))
        us, vs = np.broadcast_arrays(us, vs)
        uniq_u, inv_u = np.unique(us, return_inverse=True)
        uniq_v, inv_v = np.unique(vs, return_inverse=True)
        ra = np.stack([self.inverse_ranks(p, 0) for p in uniq_u], axis=1)
        rb = np.stack([self.inverse_ranks(p, 1) for p in uniq_v], axis=1)
        # sum over all n columns: the reduction order, and so every value,
        # is then the same whichever draws share the batch
        rx = self.ranks[:, 0]
        ry = self.ranks[:, 1]
        w = self.xi
        out = np.empty((self.xi.shape[0], us.size))
        for q in range(us.size):
            a = ra[:, inv_u[q], None]
            b = rb[:, inv_v[q], None]
            hit = (rx[None, :] <= a) & (ry[None, :] <= b)
            out[:, q] = np.sum(w * hit, axis=1) / self.total
        return out

    def __call__(self, u, v):
        vals = self.evaluate(np.ravel(u), np.ravel(v))
        if self._single:
            vals = vals[0]
            return float(vals[0]) if np.ndim(u) == 0 and np.ndim(v) == 0 else vals
        return vals

    def grid(self, m, row=0):
        """Corner values ``(i/m, j/m)`` for one draw via a cumulative table."""
        g = np.arange(m + 1) / m
        a = np.count_nonzero(self.cdf_x[row][None, :] < g[:, None], axis=1) + 1
        b = np.count_nonzero(self.cdf_y[row][None, :] < g[:, None], axis=1) + 1
        # a point enters corner i once its rank is within the i-th threshold
        ix = np.searchsorted(a, self.ranks[:, 0], side="left")
        iy = np.searchsorted(b, self.ranks[:, 1], side="left")
        table = np.zeros((m + 2, m + 2))
        np.add.at(table, (ix, iy), self.xi[row])
        return table.cumsum(axis=0).cumsum(axis=1)[: m + 1, : m + 1] / self.total[row]


def weighted_empirical_copula(X, xi, u, v):
    """Weighted empirical copula of sample ``X`` with multipliers ``xi`` at ``(u, v)``."""
    return WeightedEmpiricalCopula(rank_sample(X), xi)(u, v)
