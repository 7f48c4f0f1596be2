"""Spatial layer: Poisson field sampling, hexagonal partition, distance law."""

import math

import numpy as np
import pytest
from scipy import stats

from feelsim.geometry import (
    CellRealization,
    in_hexagon,
    make_hex_grid,
    partition_typical_cell,
    sample_disk_distance,
    sample_ppp,
)


class TestPoissonField:
    def test_count_distribution(self):
        # count in the window is Poisson(density * area)
        rng = np.random.default_rng(7)
        density, half = 0.8, 10.0
        counts = [sample_ppp(density, half, rng).shape[0] for _ in range(2000)]
        mean = density * (2 * half) ** 2
        z = (np.mean(counts) - mean) / math.sqrt(mean / len(counts))
        assert abs(z) < 4
        # index of dispersion ~ 1 for Poisson
        assert np.var(counts) / np.mean(counts) == pytest.approx(1.0, abs=0.1)

    def test_positions_uniform(self):
        pts = sample_ppp(2.0, 25.0, np.random.default_rng(3))
        assert pts.shape[1] == 2
        assert np.all(np.abs(pts) <= 25.0)
        for axis in (0, 1):
            ks = stats.kstest(pts[:, axis], stats.uniform(-25, 50).cdf)
            assert ks.pvalue > 0.01

    def test_zero_density_empty(self):
        pts = sample_ppp(0.0, 25.0, np.random.default_rng(0))
        assert pts.shape == (0, 2)

    def test_seed_determinism(self):
        a = sample_ppp(1.0, 25.0, 42)
        b = sample_ppp(1.0, 25.0, 42)
        np.testing.assert_array_equal(a, b)


class TestHexGrid:
    def test_flat_top_membership(self):
        # apothem-1 hexagon: contains the inscribed unit disk, excluded
        # beyond the circumradius 2/sqrt(3)
        pts = np.array([[0.0, 0.0], [0.0, 0.999], [0.0, -0.999],
                        [0.999, 0.0], [1.05, 0.0], [0.0, 1.2],
                        [2 / math.sqrt(3) + 1e-6, 0.0]])
        inside = in_hexagon(pts, apothem=1.0)
        assert inside.tolist() == [True, True, True, True, True, False, False]

    def test_inscribed_disk_inside_hexagon(self):
        rng = np.random.default_rng(11)
        r = np.sqrt(rng.uniform(0, 1, 4000))
        phi = rng.uniform(0, 2 * math.pi, 4000)
        disk = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
        assert in_hexagon(disk * 0.999, apothem=1.0).all()

    def test_grid_tiles_window(self):
        # every point of the window belongs to exactly one hexagon center
        grid = make_hex_grid(cell_radius=1.0, window_half_width=10.0)
        rng = np.random.default_rng(5)
        pts = rng.uniform(-10, 10, size=(3000, 2))
        hits = np.zeros(len(pts), dtype=int)
        for center in grid.centers:
            hits += in_hexagon(pts - center, apothem=1.0)
        # boundary ties can double-count a measure-zero set; none expected
        assert np.all(hits >= 1)
        assert np.mean(hits > 1) < 1e-3

    def test_typical_cell_at_origin(self):
        grid = make_hex_grid(cell_radius=1.0, window_half_width=10.0)
        d = np.hypot(grid.centers[:, 0], grid.centers[:, 1])
        assert d.min() == pytest.approx(0.0, abs=1e-12)


class TestPartition:
    def test_three_way_split(self):
        grid = make_hex_grid(cell_radius=1.0, window_half_width=10.0)
        pts = sample_ppp(2.0, 10.0, np.random.default_rng(9))
        cell = partition_typical_cell(pts, grid)
        n_disk, n_silent, n_out = cell.counts
        assert n_disk + n_silent + n_out == len(pts)
        # participants are exactly the in-disk devices of the center cell
        r_disk = np.hypot(cell.in_disk_devices[:, 0], cell.in_disk_devices[:, 1])
        assert np.all(r_disk <= 1.0)
        # silent devices are in the hexagon but outside the disk
        assert in_hexagon(cell.silent_cell_devices, apothem=1.0).all()
        r_silent = np.hypot(cell.silent_cell_devices[:, 0],
                            cell.silent_cell_devices[:, 1])
        assert np.all(r_silent > 1.0)
        # interferers are outside the typical hexagon
        assert not in_hexagon(cell.interferers, apothem=1.0).any()

    def test_participant_count_poisson(self):
        # in-disk count ~ Poisson(lambda * pi R^2)
        grid = make_hex_grid(cell_radius=1.0, window_half_width=10.0)
        rng = np.random.default_rng(1)
        counts = [partition_typical_cell(sample_ppp(1.5, 10.0, rng),
                                         grid).counts[0]
                  for _ in range(1500)]
        mean = 1.5 * math.pi
        z = (np.mean(counts) - mean) / math.sqrt(mean / len(counts))
        assert abs(z) < 4

    def test_empty_window(self):
        grid = make_hex_grid(cell_radius=1.0, window_half_width=10.0)
        cell = partition_typical_cell(np.empty((0, 2)), grid)
        assert cell.counts == (0, 0, 0)


class TestDiskDistanceLaw:
    def test_density_linear_in_radius(self):
        # distance from cell center has pdf 2r/R^2, i.e. r = R sqrt(U)
        rng = np.random.default_rng(13)
        r = sample_disk_distance(2.0, rng, size=200_000)
        assert np.all((0 <= r) & (r <= 2.0))
        ks = stats.kstest((r / 2.0) ** 2, stats.uniform(0, 1).cdf)
        assert ks.pvalue > 0.01
        assert np.mean(r) == pytest.approx(2 * 2.0 / 3, rel=5e-3)

    def test_matches_in_disk_radii(self):
        # same law as radii of uniform points conditioned to the disk
        grid = make_hex_grid(cell_radius=1.0, window_half_width=10.0)
        rng = np.random.default_rng(21)
        radii = []
        for _ in range(300):
            cell = partition_typical_cell(sample_ppp(3.0, 10.0, rng), grid)
            radii.extend(np.hypot(cell.in_disk_devices[:, 0],
                                  cell.in_disk_devices[:, 1]))
        direct = sample_disk_distance(1.0, np.random.default_rng(22),
                                      size=len(radii))
        ks = stats.ks_2samp(np.asarray(radii), direct)
        assert ks.pvalue > 0.01

    def test_scalar_draw(self):
        r = sample_disk_distance(1.0, np.random.default_rng(2))
        assert np.isscalar(r) or np.ndim(r) == 0
        assert 0 <= float(r) <= 1.0
