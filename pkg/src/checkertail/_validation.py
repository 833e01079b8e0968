"""Input validation helpers and the package exception types."""

import numpy as np
from sklearn.utils import check_array


class TiesError(ValueError):
    """Raised when a sample coordinate contains tied values.

    Every estimator here assumes continuous marginals, so ties mean the
    data violate the model rather than something to be broken at random.
    """


class InfeasibleTuningError(ValueError):
    """Raised when the (k_n, m_n) exponents violate the growth conditions."""


class OracleUnavailableError(ValueError):
    """Raised when a copula model has no tail-dependence oracle."""


class ExtrapolationError(RuntimeError):
    """Raised when a numerical tail limit fails to converge."""


def check_sample(X, *, min_samples=1, allow_ties=False):
    """Validate a bivariate sample.

    Parameters
    ----------
    X : array-like of shape (n_samples, 2)
        Paired observations, one row per pair.
    min_samples : int, default=1
        Minimum number of rows.
    allow_ties : bool, default=False
        If False, raise :class:`TiesError` on tied values in either column.

    Returns
    -------
    X : ndarray of shape (n_samples, 2), dtype float64
    """
    X = check_array(
        X, dtype=np.float64, ensure_min_samples=min_samples, ensure_all_finite=True
    )
    if X.shape[1] != 2:
        raise ValueError(
            f"Expected a bivariate sample with 2 columns, got {X.shape[1]} columns."
        )
    if not allow_ties:
        for col, name in ((0, "first"), (1, "second")):
            s = np.sort(X[:, col])
            dup = np.flatnonzero(s[1:] == s[:-1])
            if dup.size:
                raise TiesError(
                    f"The {name} coordinate has {dup.size} tied value(s) "
                    f"(e.g. {s[dup[0]]!r}); continuous marginals are required."
                )
    return X


def check_unit(t, name):
    """Return ``t`` as a float array, raising if any value is outside [0, 1]."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError(f"{name} must lie in [0, 1].")
    return t


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}.")
    return int(value)
