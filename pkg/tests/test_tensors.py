"""Tensor algebra against loop oracles and closed forms."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from desing.errors import RankError
from desing.fields import random_smooth_tensor
from desing.grid import ChartGrid
from desing.registry import _polar_grid, _polar_metric, _random_metric
from desing.tensors import (TensorField, contract_full, covariant_derivative,
                            divergence, divergence_vector_direct, flat_lower,
                            gradient, laplace_beltrami, sharp, tensor_norm,
                            tensor_norm_sq)

from .oracles import contract_full_loops, norm_sq_loops, sympy_polar_christoffel

GRID = ChartGrid((0.0, 0.0), (1.0, 1.3), (4, 3))
METRIC = _random_metric(GRID, 5)

TYPES = [(s, t) for s in range(3) for t in range(3)]


@pytest.mark.parametrize("sa,ta", TYPES)
@pytest.mark.parametrize("sb,tb", TYPES)
def test_contract_full_matches_loop_oracle(sa, ta, sb, tb):
    if tb > sa or sb > ta:
        with_pair = False
    else:
        with_pair = True
    a = random_smooth_tensor(GRID, sa, ta, seed=11 * sa + 7 * ta + 1)
    b = random_smooth_tensor(GRID, sb, tb, seed=13 * sb + 3 * tb + 2)
    if not with_pair:
        with pytest.raises(RankError):
            contract_full(a, b)
        return
    got = contract_full(a, b)
    assert (got.sigma, got.tau) == (sa - tb, ta - sb)
    want = contract_full_loops(a, b)
    np.testing.assert_allclose(got.components, want, rtol=0, atol=1e-13)


@pytest.mark.parametrize("s,t", TYPES)
def test_norm_sq_matches_loop_oracle(s, t):
    a = random_smooth_tensor(GRID, s, t, seed=17 * s + 5 * t + 3)
    got = tensor_norm_sq(a, METRIC)
    want = norm_sq_loops(a, METRIC)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-13)


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(0, 10_000),
       s=st.integers(0, 2), t=st.integers(1, 2))
def test_sharp_preserves_norm(seed, s, t):
    a = random_smooth_tensor(GRID, s, t, seed=seed)
    n0 = tensor_norm(a, METRIC).components
    n1 = tensor_norm(sharp(a, METRIC), METRIC).components
    assert float(np.max(np.abs(n1 - n0))) <= 1e-12 * max(1.0, float(np.max(n0)))


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(0, 10_000),
       s=st.integers(0, 2), t=st.integers(1, 2))
def test_sharp_flat_roundtrip(seed, s, t):
    a = random_smooth_tensor(GRID, s, t, seed=seed)
    back = flat_lower(sharp(a, METRIC), METRIC)
    scale = max(1.0, float(np.max(np.abs(a.components))))
    assert float(np.max(np.abs(back.components - a.components))) <= 1e-12 * scale


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(0, 10_000))
def test_contraction_bounded_by_norm_product(seed):
    a = random_smooth_tensor(GRID, 1, 1, seed=seed)
    b = random_smooth_tensor(GRID, 1, 1, seed=seed + 77)
    c = contract_full(a, b)
    lhs = tensor_norm(c, METRIC).components
    rhs = tensor_norm(a, METRIC).components * tensor_norm(b, METRIC).components
    assert float(np.max(lhs - rhs)) <= 1e-12 * max(1.0, float(np.max(rhs)))


def test_sharp_requires_covariant_slot():
    a = random_smooth_tensor(GRID, 1, 0, seed=4)
    with pytest.raises(RankError):
        sharp(a, METRIC)


def test_metric_is_covariantly_constant():
    nabla_g = covariant_derivative(METRIC.as_tensor(), METRIC)
    scale = float(np.max(np.abs(METRIC.components)))
    assert float(np.max(np.abs(nabla_g.components))) <= 1e-10 * scale


def test_polar_christoffel_matches_symbolic():
    pg = _polar_grid(9)
    pm = _polar_metric(pg)
    coords, gamma_sym = sympy_polar_christoffel()
    r = pg.coords[0]
    import sympy as sp
    for (c, i, j), expr in gamma_sym.items():
        want = np.broadcast_to(
            np.asarray(sp.lambdify(coords[0], expr, "numpy")(r), dtype=float),
            pg.shape)
        got = pm.christoffel[..., c, i, j]
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-11)


def test_polar_laplacian_of_r_squared_is_four():
    pg = _polar_grid(17)
    pm = _polar_metric(pg)
    r2 = TensorField.scalar(pg, pg.coords[0] ** 2)
    lap = laplace_beltrami(r2, pm).components
    np.testing.assert_allclose(lap, 4.0, rtol=0, atol=1e-10)


def test_divergence_cross_formulas_converge_at_order_two():
    errs = []
    for n in (65, 129, 257):
        pg = _polar_grid(n)
        pm = _polar_metric(pg)
        x = random_smooth_tensor(pg, 1, 0, seed=5)
        d1 = divergence(x, pm).components
        d2 = divergence_vector_direct(x, pm).components
        errs.append(float(np.max(np.abs(d1 - d2))))
    orders = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.8, f"orders {orders}"


def test_gradient_of_linear_function_is_exact():
    vals = 2.0 * GRID.coords[0] - 0.5 * GRID.coords[1]
    u = TensorField.scalar(GRID, vals)
    grad = gradient(u, METRIC)
    du = np.stack([np.full(GRID.shape, 2.0), np.full(GRID.shape, -0.5)], axis=-1)
    want = np.einsum("...ij,...j->...i", METRIC.inv, du)
    np.testing.assert_allclose(grad.components, want, rtol=1e-12, atol=1e-12)
