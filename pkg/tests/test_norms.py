"""Weighted norms: quadrature oracles, scaling identities, equivalences."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from desing.errors import DomainError
from desing.fields import random_smooth_scalar
from desing.geometry import make_cusp, make_euclidean_box
from desing.norms import (NormSpec, check_hat_equivalence, multiplication_ratio,
                          trapezoid_integral, weighted_sobolev_norm,
                          weighted_sup_norm)
from desing.tensors import TensorField

from .oracles import trapz_nd


def _cusp(n=65, alpha=1.0):
    spec, datum = make_cusp(alpha, shape=(n,))
    return spec, datum


def test_trapezoid_matches_reference_quadrature():
    spec, _ = make_euclidean_box(2, shape=(9, 11))
    vals = np.cos(spec.chart.coords[0]) * spec.chart.coords[1] ** 2
    got = trapezoid_integral(vals, spec.chart)
    want = trapz_nd(vals, spec.chart.spacing)
    assert got == pytest.approx(want, rel=1e-14)


def test_unweighted_l2_norm_against_closed_form():
    spec, datum = _cusp(513)
    x = spec.chart.coords[0]
    u = TensorField.scalar(spec.chart, x)
    g11 = spec.metric.components[..., 0, 0]
    dens = x**2 * np.sqrt(g11)
    want = trapz_nd(dens, spec.chart.spacing) ** 0.5
    got = weighted_sobolev_norm(u, NormSpec(p=2.0, k=0), datum.rho, spec.metric)
    assert got.value == pytest.approx(want, rel=1e-13)


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 10_000),
       lam=st.floats(-2.0, 2.0, allow_nan=False),
       lam_prime=st.floats(-1.0, 1.0, allow_nan=False))
def test_multiplication_by_rho_power_shifts_weight_exactly(seed, lam, lam_prime):
    spec, datum = _cusp(33)
    u = random_smooth_scalar(spec.chart, seed, offset=1.5)
    ratio = multiplication_ratio(u, 0, 2.0, lam, lam_prime, datum.rho, spec.metric)
    assert ratio == pytest.approx(1.0, abs=1e-12)


def test_multiplication_ratio_grid_stable_for_higher_orders():
    for k in (1, 2):
        ratios = []
        for n in (33, 65, 129):
            spec, datum = _cusp(n)
            u = random_smooth_scalar(spec.chart, 7, offset=1.5)
            ratios.append(multiplication_ratio(u, k, 2.0, 1.0, 0.0,
                                               datum.rho, spec.metric))
        spread = max(ratios) / min(ratios)
        assert spread < 2.0, f"k={k} ratios {ratios}"


def test_hat_equivalence_unit_ratio_at_low_orders():
    spec, datum = _cusp(65)
    u = random_smooth_scalar(spec.chart, 3, offset=1.0)
    for k in (0, 1):
        rep = check_hat_equivalence(u, k, 2.0, datum, spec.metric)
        assert rep.ratio == pytest.approx(1.0, abs=1e-12), (k, rep)


def test_hat_equivalence_second_order_grid_stable():
    ratios = []
    for n in (33, 65, 129):
        spec, datum = _cusp(n)
        u = random_smooth_scalar(spec.chart, 3, offset=1.0)
        ratios.append(check_hat_equivalence(u, 2, 2.0, datum, spec.metric).ratio)
    spread = max(ratios) / min(ratios)
    assert spread < 2.0, ratios


def test_weighted_sup_norm_of_inverse_weight_is_one():
    spec, datum = _cusp(65)
    r = datum.values()
    u = TensorField.scalar(spec.chart, 1.0 / r)
    assert weighted_sup_norm(u, 0, 1.0, datum, spec.metric) == pytest.approx(1.0)


def test_norms_monotone_in_derivative_count():
    spec, datum = _cusp(65)
    u = random_smooth_scalar(spec.chart, 11, offset=0.5)
    vals = [weighted_sobolev_norm(u, NormSpec(p=2.0, k=k), datum.rho,
                                  spec.metric).value for k in (0, 1, 2)]
    assert vals[0] <= vals[1] <= vals[2]


def test_zero_field_guards():
    spec, datum = _cusp(33)
    zero = TensorField.scalar(spec.chart, np.zeros(spec.chart.shape))
    with pytest.raises(DomainError):
        multiplication_ratio(zero, 0, 2.0, 1.0, 0.0, datum.rho, spec.metric)
    with pytest.raises(DomainError):
        check_hat_equivalence(zero, 0, 2.0, datum, spec.metric)


def test_truncation_strip_blowup_warning_fires_and_stays_quiet():
    def report_at(n, exponent, previous=None):
        spec, datum = _cusp(n)
        x = spec.chart.coords[0]
        u = TensorField.scalar(spec.chart, x**exponent)
        return weighted_sobolev_norm(u, NormSpec(p=2.0, k=0), datum.rho,
                                     spec.metric, previous=previous)

    coarse = report_at(65, -3.0)
    spec, _ = _cusp(65)
    fine = report_at(129, -3.0, previous=coarse)
    assert not fine.blowup_warning

    def report_shrinking_tmin(t_min, previous=None):
        spec, datum = make_cusp(1.0, t_interval=(t_min, 1.0), shape=(65,))
        x = spec.chart.coords[0]
        u = TensorField.scalar(spec.chart, x**-3.0)
        return weighted_sobolev_norm(u, NormSpec(p=2.0, k=0), datum.rho,
                                     spec.metric, previous=previous)

    far = report_shrinking_tmin(0.1)
    near = report_shrinking_tmin(0.025, previous=far)
    assert near.blowup_warning

    quiet_far = report_shrinking_tmin(0.1)
    spec, datum = make_cusp(1.0, t_interval=(0.025, 1.0), shape=(65,))
    ones = TensorField.scalar(spec.chart, np.ones(spec.chart.shape))
    quiet_near = weighted_sobolev_norm(ones, NormSpec(p=2.0, k=0), datum.rho,
                                       spec.metric, previous=quiet_far)
    assert not quiet_near.blowup_warning


def test_norm_spec_validation():
    with pytest.raises(DomainError):
        NormSpec(p=1.0)
    with pytest.raises(DomainError):
        NormSpec(p=2.0, k=3)
    with pytest.raises(DomainError):
        NormSpec(p=2.0, which_metric="other")
