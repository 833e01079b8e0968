import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from checkertail.checkerboard import (
    CellLocation,
    CheckerboardGrid,
    LazyCheckerboard,
    bilinear_weights,
    build_grid,
    cell_coordinates,
    checkerboard,
    locate_cell,
)
from checkertail.copula_models import Clayton, Independence
from checkertail.empirical import EmpiricalCopula


def scalar_checkerboard(corners, u, v):
    """Reference T_m evaluation written out with plain Python arithmetic."""
    m = corners.shape[0] - 1
    i = min(int(np.floor(m * u)) + 1, m)
    j = min(int(np.floor(m * v)) + 1, m)
    a = m * u - (i - 1)
    b = m * v - (j - 1)
    return (
        (1 - a) * (1 - b) * corners[i - 1, j - 1]
        + a * (1 - b) * corners[i, j - 1]
        + (1 - a) * b * corners[i - 1, j]
        + a * b * corners[i, j]
    )


def test_locate_cell_edges():
    assert locate_cell(0.0, 0.0, 4) == CellLocation(1, 1, 0.0, 0.0)
    assert locate_cell(1.0, 1.0, 4) == CellLocation(4, 4, 1.0, 1.0)
    assert locate_cell(0.25, 0.3, 4) == CellLocation(2, 2, 0.0, pytest.approx(0.2))
    # a point computed as i / m lands on that grid line
    for m in (3, 7, 10, 437):
        i, mu = cell_coordinates(np.arange(m) / m, m)
        np.testing.assert_array_equal(i, np.arange(1, m + 1))
        np.testing.assert_array_equal(mu, 0.0)


def test_cell_coordinates_range(rng):
    t = rng.uniform(0, 1, 10_000)
    i, mu = cell_coordinates(t, 17)
    assert np.all((1 <= i) & (i <= 17))
    assert np.all((0 <= mu) & (mu <= 1))
    np.testing.assert_allclose((i - 1 + mu) / 17, t, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_weights_nonnegative_and_sum_to_one(a, b):
    w = bilinear_weights(a, b)
    assert all(x >= 0 for x in w)
    assert sum(w) == pytest.approx(1.0, abs=1e-15)


def test_matches_scalar_reference(rng):
    corners = rng.normal(size=(9, 9))
    grid = CheckerboardGrid(corners)
    u, v = rng.uniform(0, 1, (2, 500))
    expected = [scalar_checkerboard(corners, a, b) for a, b in zip(u, v)]
    np.testing.assert_allclose(grid(u, v), expected, rtol=0, atol=1e-14)


def test_reproduces_corners(rng):
    m = 12
    corners = rng.normal(size=(m + 1, m + 1))
    grid = CheckerboardGrid(corners)
    g = np.arange(m + 1) / m
    np.testing.assert_array_equal(grid(g[:, None], g[None, :]), corners)


def test_reproduces_bilinear_functions(rng):
    a, b, c, d = rng.normal(size=4)

    def f(u, v):
        return a + b * u + c * v + d * u * v

    grid = build_grid(f, 5)
    u, v = rng.uniform(0, 1, (2, 1000))
    np.testing.assert_allclose(grid(u, v), f(u, v), atol=1e-13)


def test_independence_is_fixed_point(rng):
    grid = build_grid(Independence().cdf, 8)
    u, v = rng.uniform(0, 1, (2, 1000))
    np.testing.assert_allclose(grid(u, v), u * v, atol=1e-15)


def test_checkerboard_of_copula_keeps_margins(rng):
    C = Clayton(2.0)
    grid = build_grid(C.cdf, 10)
    u = rng.uniform(0, 1, 50)
    np.testing.assert_allclose(grid(u, 1.0), u, atol=1e-12)
    np.testing.assert_allclose(grid(0.0, u), 0.0, atol=1e-15)


def test_lazy_matches_full_grid(rng):
    C = EmpiricalCopula.from_sample(Clayton(1.0).sample(500, rng))
    u, v = rng.uniform(0, 1, (2, 300))
    full = build_grid(C, 37)(u, v)
    np.testing.assert_array_equal(LazyCheckerboard(C, 37)(u, v), full)
    np.testing.assert_array_equal(checkerboard(C, u, v, 37, lazy=False), full)
    assert isinstance(checkerboard(C, 0.5, 0.5, 37), float)


def test_lazy_is_thread_safe(rng):
    C = EmpiricalCopula.from_sample(rng.normal(size=(300, 2)))
    lazy = LazyCheckerboard(C, 25)
    pts = rng.uniform(0, 1, (8, 2, 200))
    expected = [build_grid(C, 25)(p[0], p[1]) for p in pts]
    results = [None] * 8

    def work(k):
        results[k] = lazy(pts[k, 0], pts[k, 1])

    threads = [threading.Thread(target=work, args=(k,)) for k in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for got, want in zip(results, expected):
        np.testing.assert_array_equal(got, want)


def test_dump_load_round_trip(tmp_path, rng):
    grid = CheckerboardGrid(rng.normal(size=(6, 6)), "random test grid")
    path = tmp_path / "grid.txt"
    grid.dump(path)
    back = CheckerboardGrid.load(path)
    np.testing.assert_array_equal(back.corners, grid.corners)
    assert back.m == 5
    assert back.description == "random test grid"


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("1 2\n3 4\n")
    with pytest.raises(ValueError, match="not a checkerboard"):
        CheckerboardGrid.load(path)
    path.write_text("# checkerboard m=3 base=x\n1 2\n3 4\n")
    with pytest.raises(ValueError, match="m=3"):
        CheckerboardGrid.load(path)


def test_grid_is_read_only(rng):
    grid = CheckerboardGrid(rng.normal(size=(3, 3)))
    with pytest.raises(ValueError):
        grid.corners[0, 0] = 1.0


def test_bad_resolution():
    with pytest.raises(ValueError):
        build_grid(np.multiply, 0)
    with pytest.raises(ValueError):
        CheckerboardGrid(np.zeros((2, 3)))


def test_bias_decays_like_inverse_square():
    C = Clayton(1.0)
    p = np.linspace(0.1, 0.9, 81)
    U, V = np.meshgrid(p, p, indexing="ij")
    exact = C.cdf(U, V)
    errs = [np.max(np.abs(build_grid(C.cdf, m)(U, V) - exact)) for m in (8, 16, 32)]
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.25)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.25)
