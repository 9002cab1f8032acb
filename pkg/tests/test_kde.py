import numpy as np
import pytest

from geocube import grid
from geocube.cube import build_base, flu_points, flu_risk_surface, total_mass
from geocube.trajectory import TrajectoryStore
from helpers import cell_lonlat, hours, post_at


def test_zero_points_zero_surface():
    surface = flu_risk_surface(np.array([]), np.array([]), 10.0, 8)
    assert surface.shape == (72, 104)
    assert not surface.any()


def test_bandwidth_must_be_positive():
    with pytest.raises(ValueError):
        flu_risk_surface(np.array([-100.0]), np.array([40.0]), 0.0, 8)


def test_single_point_peaks_in_containing_cell():
    lon, lat = cell_lonlat(7000, 4000, 0.5, 0.5)
    level = 7
    surface = flu_risk_surface(np.array([lon]), np.array([lat]), 15.0, level)
    r, c = np.unravel_index(np.argmax(surface), surface.shape)
    assert (c, r) == grid.grid_index(lon, lat, level)


def test_mass_conservation_within_one_percent():
    # bandwidth at least the cell size, so the center-sampled quadrature
    # resolves the kernel; the only loss is the 4-sigma cutoff (~0.03%)
    rng = np.random.default_rng(3)
    n = 40
    lon = -100.0 + rng.normal(0, 0.8, n)
    lat = 40.0 + rng.normal(0, 0.6, n)
    level = 6
    surface = flu_risk_surface(lon, lat, 35.0, level)
    assert total_mass(surface, level) == pytest.approx(n, rel=0.01)


def test_translation_equivariance_along_longitude():
    level = 7
    size = grid.cell_size_deg(level)
    rng = np.random.default_rng(4)
    lon = -100.0 + rng.normal(0, 0.5, 25)
    lat = 40.0 + rng.normal(0, 0.5, 25)
    shift_cells = 6
    a = flu_risk_surface(lon, lat, 15.0, level)
    b = flu_risk_surface(lon + shift_cells * size, lat, 15.0, level)
    np.testing.assert_allclose(
        np.roll(a, shift_cells, axis=1)[:, shift_cells + 1 : -shift_cells - 1],
        b[:, shift_cells + 1 : -shift_cells - 1],
        rtol=1e-9,
        atol=1e-15,
    )


def test_flu_points_window_filter():
    store = TrajectoryStore()
    store.append_post(post_at("a", 7000, 4000, hours(0), flu=True))
    store.append_post(post_at("a", 7000, 4000, hours(5), flu=False))
    store.append_post(post_at("a", 7001, 4000, hours(10), flu=True))
    lon, lat = flu_points(store)
    assert len(lon) == 2
    lon, lat = flu_points(store, t0=hours(1), t1=hours(20))
    assert len(lon) == 1
    assert lon[0] == pytest.approx(cell_lonlat(7001, 4000)[0])
