"""Bilinear interpolation on the uniform m x m grid (checkerboard copulas).

Cells are half-open, ``((i-1)/m, i/m]`` in the usual notation but located
here with the floor convention ``i = floor(m u) + 1``: a point on an interior
grid line belongs to the cell on its right with local coordinate 0, and
``u = 1`` belongs to the last cell with local coordinate 1.  Bilinear
interpolation is continuous, so both conventions give the same value.
"""

import threading
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int


@dataclass(frozen=True)
class CellLocation:
    """Cell indices (1-based) and local coordinates of a point."""

    i: int
    j: int
    mu_u: float
    mu_v: float


def cell_coordinates(t, m):
    """Cell index (1-based) and local coordinate along one axis.

    Vectorised over ``t``.  Cell membership is decided by exact comparison
    with the grid values ``i / m`` so that a point computed as ``i / m``
    always lands on the grid line it names.
    """
    t = np.asarray(t, dtype=np.float64)
    g = np.arange(m + 1) / m
    idx = np.searchsorted(g, t, side="right")
    idx = np.clip(idx, 1, m)
    mu = (t - g[idx - 1]) * m
    mu = np.where(t >= 1.0, 1.0, np.clip(mu, 0.0, 1.0))
    return idx, mu


def locate_cell(u, v, m):
    """Locate the checkerboard cell holding ``(u, v)``.

    >>> locate_cell(0.25, 1.0, 4)
    CellLocation(i=2, j=4, mu_u=0.0, mu_v=1.0)
    """
    m = check_positive_int(m, "m")
    i, mu_u = cell_coordinates(u, m)
    j, mu_v = cell_coordinates(v, m)
    return CellLocation(int(i), int(j), float(mu_u), float(mu_v))


def bilinear_weights(mu_u, mu_v):
    """The four corner weights ``(w00, w10, w01, w11)``; they sum to one."""
    return (
        (1 - mu_u) * (1 - mu_v),
        mu_u * (1 - mu_v),
        (1 - mu_u) * mu_v,
        mu_u * mu_v,
    )


def _interpolate(corner, u, v, m):
    # corner(ii, jj) returns base values at (ii/m, jj/m), broadcast over arrays
    i, mu_u = cell_coordinates(u, m)
    j, mu_v = cell_coordinates(v, m)
    w00, w10, w01, w11 = bilinear_weights(mu_u, mu_v)
    return (
        w00 * corner(i - 1, j - 1)
        + w10 * corner(i, j - 1)
        + w01 * corner(i - 1, j)
        + w11 * corner(i, j)
    )


@dataclass(frozen=True, eq=False)
class CheckerboardGrid:
    """Corner values of a function on the grid ``{0, 1/m, ..., 1}^2``.

    Parameters
    ----------
    corners : ndarray of shape (m + 1, m + 1)
        ``corners[i, j]`` is the base function at ``(i/m, j/m)``.
    description : str
        Free-text label of the base function, kept in dumps.
    """

    corners: np.ndarray
    description: str = ""

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 2:
            raise ValueError("corners must be a square array with at least 2 rows.")
        c.setflags(write=False)
        object.__setattr__(self, "corners", c)

    @property
    def m(self):
        return self.corners.shape[0] - 1

    def __call__(self, u, v):
        out = _interpolate(lambda a, b: self.corners[a, b], u, v, self.m)
        return out if np.ndim(out) else float(out)

    def dump(self, path):
        """Write the grid as text: one header line, then row-major corners."""
        desc = self.description.replace("\n", " ")
        header = f"checkerboard m={self.m} base={desc}"
        np.savetxt(path, self.corners, fmt="%.17g", header=header)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            first = fh.readline()
        if not first.startswith("# checkerboard m="):
            raise ValueError(f"{path}: not a checkerboard grid dump.")
        meta = first[2:].strip()
        m_part, _, desc = meta.partition(" base=")
        m = int(m_part.split("=", 1)[1])
        corners = np.loadtxt(path, ndmin=2)
        if corners.shape != (m + 1, m + 1):
            raise ValueError(
                f"{path}: header says m={m} but found {corners.shape} corners."
            )
        return cls(corners, desc)


def build_grid(base, m, description=""):
    """Evaluate ``base`` at every corner ``(i/m, j/m)``.

    ``base`` is a vectorised callable ``f(u, v)``.  Objects with their own
    ``grid(m)`` method (the empirical copulas) use that faster exact path.
    """
    m = check_positive_int(m, "m")
    if hasattr(base, "grid"):
        corners = base.grid(m)
    else:
        g = np.arange(m + 1) / m
        corners = np.asarray(base(g[:, None], g[None, :]), dtype=np.float64)
        corners = np.broadcast_to(corners, (m + 1, m + 1)).copy()
    return CheckerboardGrid(corners, description or type(base).__name__)


@dataclass(eq=False)
class LazyCheckerboard:
    """Checkerboard of ``base`` that evaluates corners on demand.

    Tail estimators touch a single cell per query, so materialising the
    whole ``(m+1)^2`` grid is wasted work.  Values agree exactly with
    :func:`build_grid` provided ``base`` is deterministic.
    """

    base: object
    m: int
    _memo: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def corner(self, i, j):
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        i, j = np.broadcast_arrays(i, j)
        keys = list(zip(i.ravel().tolist(), j.ravel().tolist()))
        with self._lock:
            missing = sorted({k for k in keys if k not in self._memo})
        if missing:
            mi = np.array([k[0] for k in missing]) / self.m
            mj = np.array([k[1] for k in missing]) / self.m
            vals = np.asarray(self.base(mi, mj), dtype=np.float64).ravel()
            with self._lock:
                self._memo.update(zip(missing, vals.tolist()))
        with self._lock:
            out = np.array([self._memo[k] for k in keys], dtype=np.float64)
        return out.reshape(i.shape)

    def __call__(self, u, v):
        out = _interpolate(self.corner, u, v, self.m)
        return out if np.ndim(out) else float(out)


def checkerboard(base, u, v, m, lazy=True):
    """Checkerboard smoothing ``T_m(base)`` evaluated at ``(u, v)``."""
    if lazy:
        return LazyCheckerboard(base, m)(u, v)
    return build_grid(base, m)(u, v)
