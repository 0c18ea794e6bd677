"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the code paths they check: dual gauges
are brute-forced over dense boundary samples, TV-L1 optima are found by
exhaustive enumeration, and anisotropic perimeters by quadrature over the
boundary normal.
"""

import itertools
import math

import numpy as np
import pytest

from wulff_tvl1.gauge import Gauge, _convex_hull_ccw
from wulff_tvl1.grid import GridImage, raster_convex_polygon, raster_disk
from wulff_tvl1.solver import energy


def brute_force_dual(g: Gauge, x, samples: int = 400000) -> float:
    """max x.y over a dense sample of the boundary of {phi <= 1}."""
    theta = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    d = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    pts = d / g(d)[:, None]
    return float(np.max(pts @ np.asarray(x, dtype=float)))


def brute_force_binary_optimum(f: GridImage, lam: float, g: Gauge) -> float:
    """Exhaustive minimum of the energy over all binary candidates; for
    binary f the coarea decomposition guarantees a binary optimum exists."""
    h, w = f.values.shape
    best = math.inf
    for bits in itertools.product((0.0, 1.0), repeat=h * w):
        u = GridImage(np.array(bits).reshape(h, w), f.spacing)
        best = min(best, energy(u, f, lam, g))
    return best


def boundary_integral_oracle(g: Gauge, radius: float = 1.0,
                             samples: int = 200000) -> float:
    """Quadrature of the anisotropic perimeter integral of a circle: the
    integral over the boundary of the gauge at the inward normal."""
    theta = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    nu = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return float(np.sum(g(-nu)) * (2.0 * math.pi * radius / samples))


def random_convex_polygon(rng: np.random.Generator, n_points: int = 12,
                          scale: float = 1.0) -> np.ndarray:
    """CCW hull of random points; regenerates until it has >= 3 vertices."""
    while True:
        pts = rng.normal(size=(n_points, 2)) * scale
        try:
            return _convex_hull_ccw(pts)
        except ValueError:
            continue


def gaussian_blur(values: np.ndarray, sigma_cells: float) -> np.ndarray:
    """Separable Gaussian mollifier (reflect-free, 'same' convolution);
    used to build smooth approximants of characteristic functions."""
    r = int(math.ceil(3.0 * sigma_cells))
    x = np.arange(-r, r + 1)
    k = np.exp(-0.5 * (x / sigma_cells) ** 2)
    k /= k.sum()
    out = np.apply_along_axis(lambda m: np.convolve(m, k, mode="same"), 0, values)
    return np.apply_along_axis(lambda m: np.convolve(m, k, mode="same"), 1, out)


def clipped_disk_raster(lam: float, size: int, extent: float = 3.0,
                        supersample: int = 4) -> GridImage:
    """Binary raster of B cap [-h, h]^2, the closed-form optimal shape."""
    h = math.sqrt(1.0 - 1.0 / lam**2)
    spacing = extent / size
    disk = raster_disk(size, size, spacing, radius=1.0, supersample=supersample)
    square = raster_convex_polygon(
        [[h, -h], [h, h], [-h, h], [-h, -h]], size, size, spacing,
        supersample=supersample)
    return GridImage(((disk.values * square.values) > 0.5).astype(float), spacing)


def symmetric_difference_area(a: GridImage, b: GridImage) -> float:
    return float(np.abs(a.values - b.values).sum()) * a.spacing**2


GAUGE_ZOO = {
    "l1": Gauge.p_norm(1),
    "l2": Gauge.p_norm(2),
    "linf": Gauge.p_norm(math.inf),
    "p3": Gauge.p_norm(3),
    "weighted-l2": Gauge.weighted(2, [1.0, 2.0]),
    "weighted-l1": Gauge.weighted(1, [0.5, 3.0]),
    "weighted-linf": Gauge.weighted(math.inf, [2.0, 0.7]),
    "square": Gauge.polyhedral([[1, 1], [-1, 1], [-1, -1], [1, -1]]),
    "hexagon": Gauge.polyhedral(
        [[2, 0], [1, 2], [-1, 1], [-2, -1], [0, -2], [1.5, -1]]),
    "asymmetric": Gauge.asymmetric([0.5, 0.0]),
    "asymmetric-skew": Gauge.asymmetric([0.3, -0.4]),
}


@pytest.fixture(params=sorted(GAUGE_ZOO), ids=sorted(GAUGE_ZOO))
def any_gauge(request) -> Gauge:
    return GAUGE_ZOO[request.param]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
