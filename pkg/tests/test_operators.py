"""Differential and boundary operators: closed forms, rescaling, guards."""

import numpy as np
import pytest

from desing.errors import SymmetryError
from desing.fields import (random_smooth_scalar, random_smooth_tensor,
                           random_spd_coefficient)
from desing.geometry import make_cusp, make_euclidean_box, make_funnel
from desing.operators import (CoefficientSet, apply_A, apply_A_nondivergence,
                              apply_B, BoundaryOperator, check_coefficient_symmetry,
                              check_compatibility, check_rho_ellipticity,
                              coefficient_regularity_report, conjugate_by_rho_lambda,
                              desingularize, face_normal, flux_via_tangential_form,
                              grad_log_rho)
from desing.grid import Face
from desing.tensors import TensorField

from .oracles import sympy_divergence_form


def _euclid(n=33, m=1):
    spec, datum = make_euclidean_box(m, shape=(n,) * m)
    return spec, datum


def _identity_coeffs(spec, delta=None):
    grid, g = spec.chart, spec.metric
    m = grid.m
    a = TensorField(grid, 1, 1,
                    np.broadcast_to(np.eye(m), grid.shape + (m, m)).copy())
    return CoefficientSet.static(a, delta=delta or {})


def test_apply_a_reproduces_flat_laplacian_sign():
    spec, _ = _euclid(17)
    coeffs = _identity_coeffs(spec)
    x = spec.chart.coords[0]
    u = TensorField.scalar(spec.chart, x**2)
    out = apply_A(u, coeffs, spec.metric).components
    np.testing.assert_allclose(out, -2.0, rtol=0, atol=1e-10)


def test_apply_a_matches_symbolic_divergence_form():
    spec, _ = make_euclidean_box(2, shape=(129, 129))
    coeffs = _identity_coeffs(spec)
    u_fn, lap_fn = sympy_divergence_form(2)
    xs = spec.chart.coords
    u = TensorField.scalar(spec.chart, u_fn(*xs))
    got = apply_A(u, coeffs, spec.metric).components
    want = -lap_fn(*xs)
    err = np.max(np.abs(got - want)[2:-2, 2:-2])
    assert err <= 5e-3 * np.max(np.abs(want))


def test_divergence_and_expanded_forms_converge_together():
    errs = []
    for n in (33, 65, 129):
        spec, _ = make_euclidean_box(2, shape=(n, n))
        grid, g = spec.chart, spec.metric
        a = random_spd_coefficient(grid, g, 3)
        av = random_smooth_tensor(grid, 1, 0, 5)
        a0 = random_smooth_scalar(grid, 7)
        coeffs = CoefficientSet.static(a, av, a0)
        u = random_smooth_scalar(grid, 11, offset=0.3)
        d1 = apply_A(u, coeffs, g).components
        d2 = apply_A_nondivergence(u, coeffs, g).components
        errs.append(float(np.max(np.abs(d1 - d2)[2:-2, 2:-2])))
    orders = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.8, f"orders {orders}"


def test_coefficient_symmetry_guard():
    spec, _ = _euclid(9)
    grid = spec.chart
    comp = np.broadcast_to(np.eye(1), grid.shape + (1, 1)).copy()
    check_coefficient_symmetry(TensorField(grid, 1, 1, comp), spec.metric)
    spec2, _ = make_euclidean_box(2, shape=(9, 9))
    skew = np.zeros(spec2.chart.shape + (2, 2))
    skew[..., 0, 1] = 1.0
    skew[..., 1, 0] = -1.0
    with pytest.raises(SymmetryError):
        check_coefficient_symmetry(TensorField(spec2.chart, 1, 1, skew),
                                   spec2.metric)


def test_inward_normal_is_unit_and_oriented():
    spec, datum = make_cusp(1.0, shape=(33,))
    g = spec.metric
    bop = BoundaryOperator.build(g, {f: 1 for f in spec.chart.all_faces()})
    assert bop.unit_normal_gap(g) <= 1e-13
    lo = face_normal(g, Face(0, 0)).nu
    hi = face_normal(g, Face(0, 1)).nu
    assert np.all(lo[..., 0] > 0)
    assert np.all(hi[..., 0] < 0)


def test_flux_trace_exact_on_linear_function():
    spec, _ = _euclid(17)
    coeffs = _identity_coeffs(spec, delta={f: 1 for f in spec.chart.all_faces()})
    x = spec.chart.coords[0]
    u = TensorField.scalar(spec.chart, 3.0 * x)
    traces = apply_B(u, coeffs, spec.metric)
    lo = traces.flux[Face(0, 0)]
    hi = traces.flux[Face(0, 1)]
    np.testing.assert_allclose(lo, 3.0, atol=1e-12)
    np.testing.assert_allclose(hi, -3.0, atol=1e-12)


def test_flux_tangential_form_cross_check():
    spec, datum = make_cusp(1.0, shape=(65,))
    grid, g = spec.chart, spec.metric
    a = random_spd_coefficient(grid, g, 3, scale=datum.values()**2)
    b0 = {Face(0, 1): np.asarray(0.7)}
    coeffs = CoefficientSet.static(a, b0=b0, delta={Face(0, 1): 1})
    u = random_smooth_scalar(grid, 5, offset=0.4)
    direct = apply_B(u, coeffs, g).flux[Face(0, 1)]
    alt = flux_via_tangential_form(u, coeffs, g, Face(0, 1))
    np.testing.assert_allclose(direct, alt, rtol=1e-10, atol=1e-12)


def test_desingularized_operator_matches_direct_action():
    # The conformal metric carries analytic derivative data, so the drift
    # correction cancels the rescaled divergence pointwise: the two actions
    # agree to rounding, not merely to stencil order.
    spec, datum = make_cusp(2.0, shape=(65,))
    grid, g = spec.chart, spec.metric
    a = random_spd_coefficient(grid, g, 3, scale=datum.values()**2)
    av = random_smooth_tensor(grid, 1, 0, 5)
    a0 = random_smooth_scalar(grid, 7)
    coeffs = CoefficientSet.static(a, av, a0, delta={f: 1 for f in spec.delta})
    hat_coeffs, ghat = desingularize(coeffs, datum, g)
    u = random_smooth_scalar(grid, 11, offset=0.4)
    direct = apply_A(u, coeffs, g).components
    hat = apply_A(u, hat_coeffs, ghat).components
    scale = max(1.0, float(np.max(np.abs(direct))))
    assert float(np.max(np.abs(direct - hat))) <= 1e-12 * scale


def test_desingularized_principal_part_is_uniformly_elliptic():
    spec, datum = make_cusp(2.0, shape=(65,))
    grid, g = spec.chart, spec.metric
    a = random_spd_coefficient(grid, g, 3, scale=datum.values()**2)
    coeffs = CoefficientSet.static(a, delta={f: 1 for f in spec.delta})
    rep = check_rho_ellipticity(coeffs, datum, g)
    hat_coeffs, ghat = desingularize(coeffs, datum, g)
    rep_hat = check_rho_ellipticity(hat_coeffs, None, ghat)
    assert rep_hat.passed
    assert rep_hat.epsilon == pytest.approx(rep.epsilon, rel=1e-10)


def test_ellipticity_constant_exact_for_scaled_identity():
    spec, datum = make_cusp(1.0, shape=(65,))
    grid, g = spec.chart, spec.metric
    eps0 = 0.7
    comp = eps0 * (datum.values()**2)[..., None, None] * np.eye(1)
    a = TensorField(grid, 1, 1, comp)
    coeffs = CoefficientSet.static(a)
    rep = check_rho_ellipticity(coeffs, datum, g)
    assert rep.passed
    assert rep.epsilon == pytest.approx(eps0, abs=1e-10)


def test_ellipticity_violation_detected_with_location():
    spec, datum = make_cusp(1.0, shape=(65,))
    grid, g = spec.chart, spec.metric
    comp = (datum.values()**2)[..., None, None] * np.eye(1)
    bad_index = 40
    comp[bad_index, 0, 0] *= -0.5
    a = TensorField(grid, 1, 1, comp)
    coeffs = CoefficientSet.static(a)
    rep = check_rho_ellipticity(coeffs, datum, g)
    assert not rep.passed
    assert rep.worst_point == (bad_index,)
    x_bad = grid.axis_coords(0)[bad_index]
    assert rep.worst_coords == pytest.approx((x_bad,))


def test_conjugation_identity_trivial_paths_are_bitwise_zero():
    spec, datum = make_cusp(1.0, shape=(33,))
    grid, g = spec.chart, spec.metric
    a = random_spd_coefficient(grid, g, 3, scale=datum.values()**2)
    coeffs = CoefficientSet.static(a, delta={f: 1 for f in spec.delta})
    u = random_smooth_scalar(grid, 5, offset=0.4)
    conj0 = conjugate_by_rho_lambda(coeffs, datum, g, 0.0)
    gap0 = apply_A(u, coeffs, g).components - apply_A(u, conj0, g).components
    assert np.all(gap0 == 0.0)

    fspec, fdatum = make_funnel(1.0, shape=(33,))
    fa = random_spd_coefficient(fspec.chart, fspec.metric, 3)
    fcoeffs = CoefficientSet.static(fa, delta={f: 1 for f in fspec.delta})
    fu = random_smooth_scalar(fspec.chart, 5, offset=0.4)
    conj2 = conjugate_by_rho_lambda(fcoeffs, fdatum, fspec.metric, 2.0)
    lhs = apply_A(fu, fcoeffs, fspec.metric).components
    rhs = apply_A(fu, conj2, fspec.metric).components
    assert np.all(lhs == rhs)


def test_conjugation_identity_second_order_on_interior():
    errs = []
    for li, n in enumerate((33, 65, 129)):
        spec, datum = make_cusp(1.0, shape=(n,))
        grid, g = spec.chart, spec.metric
        a = random_spd_coefficient(grid, g, 3, scale=datum.values()**2)
        coeffs = CoefficientSet.static(a, delta={f: 1 for f in spec.delta})
        u = random_smooth_scalar(grid, 5, offset=0.4)
        lam = 0.5
        conj = conjugate_by_rho_lambda(coeffs, datum, g, lam)
        rl = datum.values()**lam
        lhs = apply_A(TensorField.scalar(grid, rl * u.components), coeffs, g)
        rhs = rl * apply_A(u, conj, g).components
        layers = 2 * 2**li
        gap = np.abs(lhs.components - rhs)[layers:-layers]
        errs.append(float(np.max(gap)))
    orders = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.8, f"orders {orders} errs {errs}"


def test_grad_log_rho_matches_closed_form():
    spec, datum = make_cusp(2.0, shape=(65,))
    gl = grad_log_rho(datum, spec.metric)
    x = spec.chart.coords[0]
    g11 = spec.metric.components[..., 0, 0]
    want = (2.0 / x) / g11
    np.testing.assert_allclose(gl.components[..., 0], want, rtol=1e-10)


def test_hat_flux_coefficient_scaling():
    spec, datum = make_cusp(1.0, shape=(33,))
    grid, g = spec.chart, spec.metric
    a = random_spd_coefficient(grid, g, 3, scale=datum.values()**2)
    face = Face(0, 1)
    b0 = {face: np.asarray(0.9)}
    coeffs = CoefficientSet.static(a, b0=b0, delta={face: 1})
    hat_coeffs, ghat = desingularize(coeffs, datum, g)
    u = random_smooth_scalar(grid, 5, offset=0.4)
    direct = apply_B(u, coeffs, g).flux[face]
    hat = apply_B(u, hat_coeffs, ghat).flux[face]
    rho_face = datum.face_values(face)
    np.testing.assert_allclose(hat, direct / rho_face, rtol=1e-10)


def _heat_setup(n=33):
    spec, _ = _euclid(n)
    grid, g = spec.chart, spec.metric
    coeffs = _identity_coeffs(spec)
    coeffs = CoefficientSet.static(coeffs.a(0.0), delta={f: 0 for f in grid.all_faces()})
    x = grid.coords[0]
    u0 = TensorField.scalar(grid, np.sin(np.pi * x))
    return spec, grid, g, coeffs, u0


def test_compatibility_threshold_exponents_rejected():
    from desing.errors import ExcludedExponentError
    spec, grid, g, coeffs, u0 = _heat_setup()
    f = lambda t: TensorField.scalar(grid, np.zeros(grid.shape))
    with pytest.raises(ExcludedExponentError):
        check_compatibility(f, {}, u0, coeffs, g, p=1.5)
    flux_coeffs = CoefficientSet.static(coeffs.a(0.0),
                                        delta={f_: 1 for f_ in grid.all_faces()})
    with pytest.raises(ExcludedExponentError):
        check_compatibility(f, {}, u0, flux_coeffs, g, p=3.0)
    # Each threshold is admitted when the faces it guards are absent.
    rep = check_compatibility(f, {}, u0, flux_coeffs, g, p=1.5)
    assert rep.p == 1.5
    rep = check_compatibility(f, {}, u0, coeffs, g, p=3.0)
    assert rep.p == 3.0


def test_compatibility_order0_and_order1_residuals():
    spec, grid, g, coeffs, u0_sin = _heat_setup()
    x = grid.coords[0]
    # Quadratic data make every difference stencil exact: u0 = x(1 - x)
    # vanishes on both faces and A u0 == 2, so f == 2 satisfies the
    # first-order condition d_t h + gamma(A u0) = gamma(f) identically.
    u0 = TensorField.scalar(grid, x * (1.0 - x))

    def f(t):
        return TensorField.scalar(grid, np.full(grid.shape, 2.0))

    rep = check_compatibility(f, {}, u0, coeffs, g, p=2.0, s=2.0, tol=1e-10)
    assert rep.conditions["order0_dirichlet"]["applicable"]
    assert rep.conditions["order0_dirichlet"]["residual"] <= 1e-14
    assert rep.conditions["order1_dirichlet"]["applicable"]
    assert rep.order == 1
    assert rep.passed

    # A mismatched Dirichlet datum breaks the order-0 condition.
    h_bad = {face: (lambda t: np.asarray(0.25)) for face in coeffs.dirichlet_faces()}
    rep_bad = check_compatibility(f, h_bad, u0, coeffs, g, p=2.0, s=0.5, tol=1e-8)
    assert not rep_bad.passed
    assert rep_bad.conditions["order0_dirichlet"]["residual"] == pytest.approx(0.25)


def test_compatibility_rejects_p_at_most_one():
    from desing.errors import DomainError
    spec, grid, g, coeffs, u0 = _heat_setup(9)
    f = lambda t: TensorField.scalar(grid, np.zeros(grid.shape))
    with pytest.raises(DomainError):
        check_compatibility(f, {}, u0, coeffs, g, p=1.0)


def test_coefficient_regularity_report_scales():
    spec, datum = make_cusp(1.0, shape=(65,))
    grid, g = spec.chart, spec.metric
    rho2 = datum.values()**2
    comp = rho2[..., None, None] * np.eye(1)
    a = TensorField(grid, 1, 1, comp)
    face = Face(0, 1)
    coeffs = CoefficientSet.static(a, b0={face: np.asarray(2.0)}, delta={face: 1})
    rep = coefficient_regularity_report(coeffs, datum, g)
    # a = rho^2 id has weighted C^1 norm of order one: finite and O(1).
    assert 0.5 <= rep["a_weighted_c1"] <= 20.0
    assert rep["a_vec_weighted_sup"] == 0.0
    assert rep["a0_sup"] == 0.0
    rho_face = float(datum.face_values(face))
    assert rep[f"b0_weighted_sup_{face.name}"] == pytest.approx(2.0 * rho_face)
