"""Seeded synthetic fields for verification suites and tests.

Smooth fields are low-order trigonometric polynomials in normalized chart
coordinates, so their derivatives stay O(1) and difference-stencil errors
scale cleanly under refinement.  All randomness flows through an explicit
numpy Generator seed.
"""

from __future__ import annotations

import numpy as np

from .grid import ChartGrid
from .tensors import MetricField, TensorField


def _unit_coords(grid: ChartGrid):
    out = []
    for axis in range(grid.m):
        lo, hi = grid.lo[axis], grid.hi[axis]
        out.append((grid.coords[axis] - lo) / (hi - lo))
    return out


def _smooth_samples(grid: ChartGrid, rng: np.random.Generator,
                    n_modes: int = 3, amplitude: float = 1.0) -> np.ndarray:
    xs = _unit_coords(grid)
    vals = np.zeros(grid.shape)
    for _ in range(n_modes):
        freqs = rng.integers(1, 4, size=grid.m)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=grid.m)
        coef = rng.uniform(-1.0, 1.0)
        term = np.full(grid.shape, coef)
        for axis in range(grid.m):
            term = term * np.sin(freqs[axis] * np.pi * xs[axis] + phases[axis])
        vals = vals + term
    return amplitude * vals


def random_smooth_scalar(grid: ChartGrid, seed: int, n_modes: int = 3,
                         amplitude: float = 1.0, offset: float = 0.0) -> TensorField:
    rng = np.random.default_rng(seed)
    return TensorField.scalar(grid, offset + _smooth_samples(grid, rng, n_modes, amplitude))


def random_smooth_tensor(grid: ChartGrid, sigma: int, tau: int, seed: int,
                         n_modes: int = 2, amplitude: float = 1.0) -> TensorField:
    rng = np.random.default_rng(seed)
    m = grid.m
    comp = np.zeros(grid.shape + (m,) * (sigma + tau))
    flat = comp.reshape(grid.shape + (-1,))
    for j in range(flat.shape[-1]):
        flat[..., j] = _smooth_samples(grid, rng, n_modes, amplitude)
    return TensorField(grid, sigma, tau, comp)


def random_spd_coefficient(grid: ChartGrid, g: MetricField, seed: int,
                           base: float = 1.0, wobble: float = 0.3,
                           scale=None) -> TensorField:
    """Random g-symmetric, uniformly positive (1,1) coefficient field.

    Built as a^i_j = g^{ik} s_kj with s = mu g + sum_r v_r (x) v_r for a
    smooth positive scalar mu and smooth covectors v_r, so s is symmetric
    positive definite and the mixed field is symmetric with respect to g.
    An optional scalar array multiplies the whole field (degenerate
    coefficients use scale = rho**2).
    """
    rng = np.random.default_rng(seed)
    m = grid.m
    mu = base + wobble * np.tanh(_smooth_samples(grid, rng, 2, 1.0))
    s = mu[..., None, None] * g.components
    for _ in range(m):
        v = np.zeros(grid.shape + (m,))
        for axis in range(m):
            v[..., axis] = wobble * _smooth_samples(grid, rng, 2, 1.0)
        s = s + v[..., :, None] * v[..., None, :]
    a = np.einsum("...ik,...kj->...ij", g.inv, s)
    if scale is not None:
        a = a * np.asarray(scale)[..., None, None]
    return TensorField(grid, 1, 1, a)


def random_nodal(grid: ChartGrid, seed: int, amplitude: float = 1.0) -> TensorField:
    """Rough field: independent values per node (no smoothness)."""
    rng = np.random.default_rng(seed)
    return TensorField.scalar(grid, amplitude * rng.standard_normal(grid.shape))
