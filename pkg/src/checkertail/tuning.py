"""Choice of the tail sample size k_n = floor(n^alpha) and resolution m_n = floor(n^beta).

The exponents must satisfy ``0 < alpha < 2 rho / (1 + 2 rho)`` and
``beta > max(1 - alpha / 2, 1 / 4)``, where ``rho`` is the second-order
exponent of the tail approximation error.  Those are hard constraints.  The
rate conditions behind them only make sense asymptotically, so at a given
``n`` they are reported as warnings.
"""

import math
import warnings
from dataclasses import dataclass, field

from ._validation import InfeasibleTuningError


class FiniteSampleWarning(UserWarning):
    """A growth condition fails at the requested n despite valid exponents."""


def _floor_power(n, e):
    # n ** e lands a hair below an integer for exact powers (e.g. 1e4 ** 0.5)
    return int(math.floor(n**e + 1e-9))


@dataclass(frozen=True)
class TuningPlan:
    """Resolved tuning for one sample size.

    ``checks`` maps each finite-n condition to ``(lhs, rhs, passed)`` for
    the comparison ``lhs < rhs``.
    """

    n: int
    alpha: float
    beta: float
    rho: float
    k: int
    m: int
    checks: dict = field(default_factory=dict)

    @property
    def warnings(self):
        return [name for name, (_, _, ok) in self.checks.items() if not ok]

    @property
    def ok(self):
        return not self.warnings

    def report(self):
        lines = [
            f"n={self.n} alpha={self.alpha:g} beta={self.beta:g} rho={self.rho:g}",
            f"k={self.k}",
            f"m={self.m}",
        ]
        for name, (lhs, rhs, ok) in self.checks.items():
            status = "PASS" if ok else "WARN"
            lines.append(f"{status} {name}: {lhs:.6g} < {rhs:.6g}")
        return "\n".join(lines)


def check_exponents(alpha, beta, rho):
    """Raise :class:`InfeasibleTuningError` unless the exponents are admissible."""
    if not rho > 0:
        raise InfeasibleTuningError(f"rho must be positive, got {rho!r}.")
    alpha_max = 2.0 * rho / (1.0 + 2.0 * rho)
    if not 0.0 < alpha < alpha_max:
        raise InfeasibleTuningError(
            f"alpha={alpha!r} is outside (0, {alpha_max:.6g}) = (0, 2 rho / (1 + 2 rho))."
        )
    beta_min = max(1.0 - alpha / 2.0, 0.25)
    if not beta > beta_min:
        raise InfeasibleTuningError(
            f"beta={beta!r} must exceed max(1 - alpha/2, 1/4) = {beta_min:.6g}."
        )


def finite_n_checks(n, k, m):
    return {
        "k < n": (k, n, k < n),
        "n / sqrt(k) < m": (n / math.sqrt(k), m, n / math.sqrt(k) < m),
        "sqrt(n) < m^2": (math.sqrt(n), m * m, math.sqrt(n) < m * m),
        "log(n)^2 < k": (math.log(n) ** 2, k, math.log(n) ** 2 < k),
    }


def plan(n, alpha=0.5, beta=0.8, rho=1.0, warn=True):
    """Compute ``k_n`` and ``m_n`` and validate them.

    Parameters
    ----------
    n : int
        Sample size, at least 4.
    alpha, beta : float
        Exponents of ``k_n`` and ``m_n``.
    rho : float, default=1.0
        Second-order exponent; supplied by the user, never estimated.
    warn : bool, default=True
        Emit a :class:`FiniteSampleWarning` for each failed finite-n check.

    Returns
    -------
    TuningPlan

    Examples
    --------
    >>> p = plan(10_000, 0.5, 0.8, 1.0)
    >>> p.k, p.m, p.ok
    (100, 1584, True)
    """
    if isinstance(n, bool) or int(n) != n or n < 4:
        raise ValueError(f"n must be an integer >= 4, got {n!r}.")
    n = int(n)
    check_exponents(alpha, beta, rho)
    k = _floor_power(n, alpha)
    m = _floor_power(n, beta)
    if k < 2:
        raise InfeasibleTuningError(f"k_n = floor({n}^{alpha}) = {k} is below 2.")
    result = TuningPlan(n, float(alpha), float(beta), float(rho), k, m, finite_n_checks(n, k, m))
    if warn:
        for name in result.warnings:
            warnings.warn(
                f"Finite-sample condition {name!r} fails at n={n} (k={k}, m={m}).",
                FiniteSampleWarning,
                stacklevel=2,
            )
    return result
