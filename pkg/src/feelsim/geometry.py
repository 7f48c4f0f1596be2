"""Spatial sampling: hexagonal grid, PPP device placement, typical cell.

Points are numpy arrays of shape (n, 2); a single point is a length-2 array.
The typical cell is a flat-top regular hexagon centered at the origin whose
apothem equals the inscribed-disk radius R, so the disk of radius R around
the origin is exactly inscribed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Point2 = np.ndarray  # shape (2,): [x, y]


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


@dataclass(frozen=True)
class HexGrid:
    """Hexagonal lattice of cell centers covering a square window.

    cell_radius is the apothem (center to flat side); the circumradius is
    2*R/sqrt(3).  One center sits at the origin.
    """

    cell_radius: float
    window_half_width: float
    centers: np.ndarray  # shape (n_cells, 2)


def make_hex_grid(cell_radius: float, window_half_width: float) -> HexGrid:
    """Lattice of flat-top hexagon centers covering the window (plus margin)."""
    if cell_radius <= 0 or window_half_width <= 0:
        raise ValueError("cell_radius and window_half_width must be > 0")
    R = cell_radius
    circum = 2.0 * R / math.sqrt(3.0)
    dx = 1.5 * circum            # horizontal column spacing = sqrt(3) * R
    dy = 2.0 * R                 # vertical row spacing
    n_cols = int(math.ceil((window_half_width + circum) / dx))
    n_rows = int(math.ceil((window_half_width + R) / dy)) + 1
    centers = []
    for i in range(-n_cols, n_cols + 1):
        y_off = R if (i % 2 != 0) else 0.0
        for j in range(-n_rows, n_rows + 1):
            centers.append((i * dx, j * dy + y_off))
    return HexGrid(cell_radius=R, window_half_width=window_half_width,
                   centers=np.asarray(centers, dtype=float))


def in_hexagon(points: np.ndarray, apothem: float) -> np.ndarray:
    """Boolean mask: strictly inside the flat-top hexagon centered at the
    origin with the given apothem (flat sides at y = +/-apothem)."""
    pts = np.atleast_2d(points)
    x, y = pts[:, 0], pts[:, 1]
    s3 = math.sqrt(3.0)
    return (np.abs(y) < apothem) \
        & (np.abs(s3 * x + y) < 2.0 * apothem) \
        & (np.abs(s3 * x - y) < 2.0 * apothem)


@dataclass
class CellRealization:
    """One snapshot of device positions, split relative to the typical cell."""

    in_disk_devices: np.ndarray       # |X| < R
    silent_cell_devices: np.ndarray   # inside hexagon, outside disk
    interferers: np.ndarray           # outside hexagon, inside window

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.in_disk_devices), len(self.silent_cell_devices),
                len(self.interferers))


def sample_ppp(density: float, window_half_width: float, rng_seed) -> np.ndarray:
    """Homogeneous PPP over the square [-w, w]^2.

    Count ~ Poisson(density * area), positions i.i.d. uniform; deterministic
    given the seed.  Returns an array of shape (n, 2).
    """
    if density < 0:
        raise ValueError(f"density must be >= 0, got {density}")
    if window_half_width <= 0:
        raise ValueError(f"window_half_width must be > 0, got {window_half_width}")
    rng = _as_rng(rng_seed)
    area = (2.0 * window_half_width) ** 2
    n = rng.poisson(density * area)
    return rng.uniform(-window_half_width, window_half_width, size=(n, 2))


def partition_typical_cell(points: np.ndarray, grid: HexGrid) -> CellRealization:
    """Split points into in-disk, silent-cell, and interferer sets.

    Membership order: inscribed disk first (|X| < R), then the typical
    hexagon; everything else interferes from other cells.  Boundary points
    (measure zero) resolve by strict inequality toward the outer set.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        empty = np.empty((0, 2))
        return CellRealization(empty, empty.copy(), empty.copy())
    R = grid.cell_radius
    r2 = np.einsum("ij,ij->i", pts, pts)
    disk = r2 < R * R
    hexa = in_hexagon(pts, R) & ~disk
    outside = ~disk & ~hexa
    return CellRealization(pts[disk], pts[hexa], pts[outside])


def sample_disk_distance(R: float, rng_seed, size: int | None = None):
    """Distance from the cell center of a uniform point in the disk of
    radius R: density 2r/R^2 on (0, R), drawn by inverse transform
    r = R*sqrt(U)."""
    if R <= 0:
        raise ValueError(f"R must be > 0, got {R}")
    rng = _as_rng(rng_seed)
    u = rng.random() if size is None else rng.random(size)
    return R * np.sqrt(u)
