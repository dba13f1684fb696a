"""Second-order divergence-form operators and their boundary traces.

The interior operator acting on scalar fields is

    A u = -div(a . grad u) + a_vec . grad u + a0 u

with a a symmetric (1,1)-coefficient field, a_vec a vector field and a0 a
scalar field.  Each physical boundary face carries either a Dirichlet
trace (delta = 0) or a conormal flux trace (delta = 1)

    B1 u = (nu | a . grad u) + b0 u.

Coefficients may depend on time through callables; every identity check
here freezes t and works on the sampled fields.  The module also provides
the degeneracy-removing rescaling of the full problem and the
rho^lambda-conjugation of the operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from .errors import (
    DomainError,
    ExcludedExponentError,
    GridMismatchError,
    RankError,
    SymmetryError,
    TransformInconsistencyError,
)
from .geometry import ManifoldSpec, SingularityDatum
from .grid import ChartGrid, Face
from .norms import weighted_sup_norm
from .tensors import (
    MetricField,
    TensorField,
    contract_full,
    covariant_derivative,
    divergence,
    gradient,
    second_covariant,
    sharp,
    tensor_norm,
    vector_inner,
)

FieldFn = Callable[[float], TensorField]
FaceFn = Callable[[float], np.ndarray]

_SYM_TOL = 1e-12


def _constant(value: TensorField) -> FieldFn:
    def fn(t: float) -> TensorField:
        return value
    return fn


def _zero_face(shape: tuple) -> FaceFn:
    zeros = np.zeros(shape)

    def fn(t: float) -> np.ndarray:
        return zeros
    return fn


def _face_shape(grid: ChartGrid, face: Face) -> tuple:
    return tuple(n for ax, n in enumerate(grid.shape) if ax != face.axis)


@dataclass(frozen=True)
class CoefficientSet:
    """Time-sampled coefficient fields of the operator and its traces.

    a, a_vec, a0 map a time to tensor fields of type (1,1), (1,0) and
    (0,0) on a common grid; b0 maps each flux face to a time-sampled
    array over that face.  delta assigns 0 (Dirichlet) or 1 (flux) to
    each physical face.
    """

    grid: ChartGrid
    a: FieldFn
    a_vec: FieldFn
    a0: FieldFn
    b0: Mapping[Face, FaceFn]
    delta: Mapping[Face, int]
    autonomous: bool = True

    @staticmethod
    def static(a: TensorField, a_vec: Optional[TensorField] = None,
               a0: Optional[TensorField] = None,
               b0: Optional[Mapping[Face, np.ndarray]] = None,
               delta: Optional[Mapping[Face, int]] = None) -> "CoefficientSet":
        grid = a.grid
        if (a.sigma, a.tau) != (1, 1):
            raise RankError("principal coefficient must be a (1,1) field")
        if a_vec is None:
            a_vec = TensorField.vector(grid, np.zeros(grid.shape + (grid.m,)))
        if a0 is None:
            a0 = TensorField.scalar(grid, np.zeros(grid.shape))
        delta = dict(delta or {})
        flux_faces = [f for f, d in delta.items() if d == 1]
        b0 = dict(b0 or {})
        b0_fns = {}
        for f in flux_faces:
            if f in b0:
                arr = np.asarray(b0[f], dtype=np.float64)
                b0_fns[f] = (lambda a_=arr: (lambda t: a_))()
            else:
                b0_fns[f] = _zero_face(_face_shape(grid, f))
        return CoefficientSet(grid, _constant(a), _constant(a_vec),
                              _constant(a0), b0_fns, delta, autonomous=True)

    @staticmethod
    def for_manifold(spec: ManifoldSpec, a: TensorField,
                     a_vec: Optional[TensorField] = None,
                     a0: Optional[TensorField] = None,
                     b0: Optional[Mapping[Face, np.ndarray]] = None) -> "CoefficientSet":
        return CoefficientSet.static(a, a_vec, a0, b0, delta=spec.delta)

    def dirichlet_faces(self):
        return sorted(f for f, d in self.delta.items() if d == 0)

    def flux_faces(self):
        return sorted(f for f, d in self.delta.items() if d == 1)

    def sample(self, t: float) -> Tuple[TensorField, TensorField, TensorField]:
        a = self.a(t)
        av = self.a_vec(t)
        a0 = self.a0(t)
        for fld, st in ((a, (1, 1)), (av, (1, 0)), (a0, (0, 0))):
            if (fld.sigma, fld.tau) != st:
                raise RankError(f"coefficient of type {(fld.sigma, fld.tau)} where {st} expected")
            if fld.grid != self.grid:
                raise GridMismatchError("coefficient sampled on a different grid")
        return a, av, a0

    def b0_at(self, face: Face, t: float) -> np.ndarray:
        shape = _face_shape(self.grid, face)
        fn = self.b0.get(face)
        if fn is None:
            return np.zeros(shape)
        return np.broadcast_to(np.asarray(fn(t), dtype=np.float64), shape)


def check_coefficient_symmetry(a: TensorField, g: MetricField) -> None:
    """The lowered principal coefficient s_ij = g_ik a^k_j must be symmetric."""
    s = np.einsum("...ik,...kj->...ij", g.components, a.components)
    scale = max(float(np.max(np.abs(s))), 1.0)
    gap = float(np.max(np.abs(s - np.swapaxes(s, -1, -2))))
    if gap > _SYM_TOL * scale:
        raise SymmetryError(
            f"lowered principal coefficient asymmetric: max gap {gap:.3e} (scale {scale:.3e})")


def apply_A(u: TensorField, coeffs: CoefficientSet, g: MetricField,
            t: float = 0.0) -> TensorField:
    """Divergence-form action -div(a . grad u) + a_vec . grad u + a0 u."""
    a, av, a0 = coeffs.sample(t)
    du = gradient(u, g)
    flux = contract_full(a, du)
    out = -divergence(flux, g).components
    out = out + vector_inner(av, du, g).components
    out = out + a0.components * u.components
    return TensorField.scalar(u.grid, out)


def apply_A_nondivergence(u: TensorField, coeffs: CoefficientSet, g: MetricField,
                          t: float = 0.0) -> TensorField:
    """Expanded action -a# : D^2 u + (a_vec - div a#) . D u + a0 u.

    Agrees with apply_A to the order of the difference stencils; the gap
    shrinks at second order under grid refinement for smooth data.
    """
    a, av, a0 = coeffs.sample(t)
    ash = sharp(a, g)
    hess = second_covariant(u, g)
    principal = contract_full(ash, hess).components
    div_a = divergence(ash, g)
    du = covariant_derivative(u, g)
    drift = contract_full(div_a, du).components
    conv = contract_full(av, du).components
    out = -principal - drift + conv + a0.components * u.components
    return TensorField.scalar(u.grid, out)


@dataclass(frozen=True)
class FaceGeometry:
    """Inward unit normal data on one boundary face."""

    face: Face
    nu: np.ndarray
    nu_flat: np.ndarray


def face_normal(g: MetricField, face: Face) -> FaceGeometry:
    """Inward unit normal of a coordinate face, and its lowered form.

    The normal is the metric-normalized gradient of the face coordinate,
    oriented into the domain: nu^i = sign g^{id} / sqrt(g^{dd}) with
    sign +1 on a low face and -1 on a high face.  |nu|_g = 1 pointwise.
    """
    grid = g.grid
    d = face.axis
    sign = 1.0 if face.side == 0 else -1.0
    sl = grid.face_slicer(face)
    ginv_f = g.inv[sl]
    g_f = g.components[sl]
    gdd_up = ginv_f[..., d, d]
    nu = sign * ginv_f[..., :, d] / np.sqrt(gdd_up)[..., None]
    nu_flat = np.einsum("...ij,...j->...i", g_f, nu)
    return FaceGeometry(face, nu, nu_flat)


@dataclass(frozen=True)
class BoundaryOperator:
    """Trace operator data: face split and unit normals on flux faces."""

    delta: Mapping[Face, int]
    normals: Mapping[Face, FaceGeometry]

    @staticmethod
    def build(g: MetricField, delta: Mapping[Face, int]) -> "BoundaryOperator":
        normals = {f: face_normal(g, f) for f, d in delta.items() if d == 1}
        return BoundaryOperator(dict(delta), normals)

    def unit_normal_gap(self, g: MetricField) -> float:
        """max over flux faces of | |nu|_g - 1 |; 0 within rounding."""
        worst = 0.0
        for face, geom in self.normals.items():
            sl = g.grid.face_slicer(face)
            nrm2 = np.einsum("...ij,...i,...j->...", g.components[sl], geom.nu, geom.nu)
            worst = max(worst, float(np.max(np.abs(np.sqrt(nrm2) - 1.0))))
        return worst

    def apply(self, u: TensorField, coeffs: CoefficientSet, g: MetricField,
              t: float = 0.0) -> "BoundaryValues":
        return apply_B(u, coeffs, g, t)


@dataclass(frozen=True)
class BoundaryValues:
    """Traces of the boundary operator, one array per physical face."""

    dirichlet: Mapping[Face, np.ndarray]
    flux: Mapping[Face, np.ndarray]

    def on(self, face: Face) -> np.ndarray:
        if face in self.dirichlet:
            return self.dirichlet[face]
        return self.flux[face]


def apply_B(u: TensorField, coeffs: CoefficientSet, g: MetricField,
            t: float = 0.0) -> BoundaryValues:
    """Boundary trace: gamma u on Dirichlet faces, (nu | a.grad u) + b0 u
    on flux faces.  Face derivatives reuse the one-sided second-order
    stencils of the chart derivative."""
    a, _, _ = coeffs.sample(t)
    grid = u.grid
    du = gradient(u, g)
    flux_vec = contract_full(a, du)
    dirichlet = {}
    flux = {}
    for face in coeffs.dirichlet_faces():
        dirichlet[face] = u.components[grid.face_slicer(face)].copy()
    for face in coeffs.flux_faces():
        geom = face_normal(g, face)
        sl = grid.face_slicer(face)
        w = flux_vec.components[sl]
        conormal = np.einsum("...i,...i->...", geom.nu_flat, w)
        flux[face] = conormal + coeffs.b0_at(face, t) * u.components[sl]
    return BoundaryValues(dirichlet, flux)


def flux_via_tangential_form(u: TensorField, coeffs: CoefficientSet,
                             g: MetricField, face: Face, t: float = 0.0) -> np.ndarray:
    """Evaluates the flux trace through the equivalent first-order form
    b1 . grad u + b0 u with b1^l = nu_flat_j (a#)^{jl}; a cross-check of
    the conormal assembly."""
    a, _, _ = coeffs.sample(t)
    grid = u.grid
    geom = face_normal(g, face)
    sl = grid.face_slicer(face)
    ash = sharp(a, g).components[sl]
    b1 = np.einsum("...j,...jl->...l", geom.nu_flat, ash)
    du = covariant_derivative(u, g).components[sl]
    return np.einsum("...l,...l->...", b1, du) + coeffs.b0_at(face, t) * u.components[sl]


@dataclass(frozen=True)
class EllipticityReport:
    """Two-sided degenerate ellipticity constants of the principal part."""

    epsilon: float
    upper_const: float
    passed: bool
    worst_point: tuple
    worst_coords: tuple
    method: str
    sampled_min: float
    sampled_max: float

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "upper_const": self.upper_const,
            "passed": self.passed,
            "worst_point": list(self.worst_point),
            "worst_coords": list(self.worst_coords),
            "method": self.method,
            "sampled_min": self.sampled_min,
            "sampled_max": self.sampled_max,
        }


def _mixed_eigen_range(a: TensorField, rho2: np.ndarray):
    """Pointwise eigenvalue range of the mixed matrix a^i_j / rho^2.

    The g-symmetry of a makes a^i_j similar to a symmetric matrix, so its
    eigenvalues are real and give the exact Rayleigh-quotient range of
    (a . X | X)_g / (rho^2 |X|_g^2) over directions X.
    """
    m = a.m
    mat = a.components / rho2[..., None, None]
    if m == 1:
        lo = hi = mat[..., 0, 0]
    elif m == 2:
        tr = mat[..., 0, 0] + mat[..., 1, 1]
        det = mat[..., 0, 0] * mat[..., 1, 1] - mat[..., 0, 1] * mat[..., 1, 0]
        disc = np.sqrt(np.clip(tr * tr - 4.0 * det, 0.0, None))
        lo = 0.5 * (tr - disc)
        hi = 0.5 * (tr + disc)
    else:
        flat = mat.reshape((-1, m, m))
        eig = np.sort(np.real(np.linalg.eigvals(flat)), axis=-1)
        lo = eig[:, 0].reshape(mat.shape[:-2])
        hi = eig[:, -1].reshape(mat.shape[:-2])
    return lo, hi


def check_rho_ellipticity(coeffs: CoefficientSet, rho, g: MetricField,
                          n_directions: int = 8, seed: int = 0,
                          t: float = 0.0) -> EllipticityReport:
    """Largest epsilon with eps rho^2 |X|^2 <= (a . X | X) <= rho^2 |X|^2 / eps.

    Exact pointwise bounds come from the eigenvalues of the mixed
    coefficient matrix; seeded random directions corroborate them.  With
    rho identically 1 this is the ordinary ellipticity check.
    """
    a, _, _ = coeffs.sample(t)
    check_coefficient_symmetry(a, g)
    grid = a.grid
    if isinstance(rho, SingularityDatum):
        rho_vals = rho.values()
    elif rho is None:
        rho_vals = np.ones(grid.shape)
    elif isinstance(rho, TensorField):
        rho_vals = rho.components
    else:
        rho_vals = np.broadcast_to(np.asarray(rho, dtype=np.float64), grid.shape)
    rho2 = rho_vals**2
    lo, hi = _mixed_eigen_range(a, rho2)
    eps = float(np.min(lo))
    upper = float(np.max(hi))
    idx = np.unravel_index(int(np.argmin(lo)), grid.shape)
    coords = tuple(float(c[idx]) for c in grid.coords)
    rng = np.random.default_rng(seed)
    s_min, s_max = np.inf, -np.inf
    for _ in range(max(int(n_directions), 1)):
        x = rng.standard_normal(grid.shape + (grid.m,))
        xf = TensorField.vector(grid, x)
        quad = vector_inner(contract_full(a, xf), xf, g).components
        nrm2 = rho2 * tensor_norm(xf, g).components**2
        ratios = quad / np.where(nrm2 > 0.0, nrm2, 1.0)
        s_min = min(s_min, float(np.min(ratios)))
        s_max = max(s_max, float(np.max(ratios)))
    return EllipticityReport(
        epsilon=eps, upper_const=upper, passed=bool(eps > 0.0),
        worst_point=idx, worst_coords=coords,
        method="eigen" if grid.m <= 2 else "eigen-general",
        sampled_min=s_min, sampled_max=s_max)


def _normal_rho_rate(datum: SingularityDatum, g: MetricField, face: Face) -> np.ndarray:
    """Trace on a flux face of the hat-normal derivative scale rho_dot.

    The rescaled outward normal is rho * nu, so the face factor relating
    the two flux traces is the rho value itself when b0 is calibrated per
    unit hat-flux; the sampled quantity here is rho restricted to the face.
    """
    sl = g.grid.face_slicer(face)
    return datum.values()[sl]


def desingularize(coeffs: CoefficientSet, datum: SingularityDatum,
                  g: MetricField) -> Tuple[CoefficientSet, MetricField]:
    """Rescales the problem so the degeneracy cancels.

    With ghat = g / rho^2 the new coefficients are

        ahat    = rho^(-2) a
        dhat    = a_vec - m (ahat . v),   v^i = rho g^{ij} d_j rho
        a0hat   = a0
        b0hat   = b0 / rho|_face

    and A u computed from (ahat, dhat, a0hat) against ghat agrees with the
    original action up to difference-stencil error.  The sign of the
    drift correction follows from sqrt(det ghat) = rho^(-m) sqrt(det g):
    div_ghat X = div X - m (X | grad rho) / rho, so the flux divergence
    picks up +m (ahat . v | grad_ghat u) which the drift must cancel.
    The rescaled principal part must be ordinarily elliptic against ghat;
    otherwise the transform refuses.
    """
    grid = coeffs.grid
    if datum.grid != grid or g.grid != grid:
        raise GridMismatchError("datum, metric and coefficients must share a grid")
    ghat = datum.hat_metric
    rho = datum.values()
    m = grid.m
    v = rho[..., None] * np.einsum("...ij,...j->...i", g.inv, datum.drho)
    v_field = TensorField.vector(grid, v)
    inv_rho2 = 1.0 / rho**2

    a_fn, av_fn, a0_fn = coeffs.a, coeffs.a_vec, coeffs.a0

    def a_hat(t: float) -> TensorField:
        return a_fn(t).scaled_by(inv_rho2)

    def d_hat(t: float) -> TensorField:
        ah = a_fn(t).scaled_by(inv_rho2)
        drift = contract_full(ah, v_field)
        return av_fn(t) + (-float(m)) * drift

    b0_hat = {}
    for f, fn in coeffs.b0.items():
        rate = _normal_rho_rate(datum, g, f)
        b0_hat[f] = (lambda fn_=fn, rate_=rate: (lambda t: np.asarray(fn_(t)) / rate_))()

    hat = CoefficientSet(grid, a_hat, d_hat, a0_fn, b0_hat, dict(coeffs.delta),
                         autonomous=coeffs.autonomous)
    report = check_rho_ellipticity(hat, None, ghat, n_directions=2, seed=0)
    if not report.passed:
        raise TransformInconsistencyError(
            f"rescaled principal part not elliptic: epsilon {report.epsilon:.3e} "
            f"at coords {report.worst_coords}")
    return hat, ghat


def grad_log_rho(datum: SingularityDatum, g: MetricField) -> TensorField:
    """Vector field g^{ij} d_j rho / rho."""
    rho = datum.values()
    comp = np.einsum("...ij,...j->...i", g.inv, datum.drho) / rho[..., None]
    return TensorField.vector(g.grid, comp)


def conjugate_by_rho_lambda(coeffs: CoefficientSet, datum: SingularityDatum,
                            g: MetricField, lam: float) -> CoefficientSet:
    """Coefficients of the conjugated operator A' = rho^(-lam) A rho^lam.

    Writing gl = grad log rho and w(t) = a(t) . gl, the conjugation leaves
    the principal part fixed and shifts

        a_vec' = a_vec - 2 lam w
        a0'    = a0 + lam ((a_vec | gl) - div w) - lam^2 (w | gl)
        b0'    = b0 + lam (nu_flat | w)|_face   on flux faces.
    """
    grid = coeffs.grid
    if datum.grid != grid or g.grid != grid:
        raise GridMismatchError("datum, metric and coefficients must share a grid")
    gl = grad_log_rho(datum, g)
    a_fn, av_fn, a0_fn = coeffs.a, coeffs.a_vec, coeffs.a0

    def av_new(t: float) -> TensorField:
        w = contract_full(a_fn(t), gl)
        return av_fn(t) + (-2.0 * lam) * w

    def a0_new(t: float) -> TensorField:
        w = contract_full(a_fn(t), gl)
        drift_term = vector_inner(av_fn(t), gl, g).components
        shift = lam * (drift_term - divergence(w, g).components)
        shift = shift - lam * lam * vector_inner(w, gl, g).components
        return TensorField.scalar(grid, a0_fn(t).components + shift)

    b0_new = {}
    for f in coeffs.flux_faces():
        geom = face_normal(g, f)
        sl = grid.face_slicer(f)

        def fn(t: float, f_=f, geom_=geom, sl_=sl) -> np.ndarray:
            w = contract_full(a_fn(t), gl)
            extra = np.einsum("...i,...i->...", geom_.nu_flat, w.components[sl_])
            return coeffs.b0_at(f_, t) + lam * extra
        b0_new[f] = fn

    return CoefficientSet(grid, a_fn, av_new, a0_new, b0_new, dict(coeffs.delta),
                          autonomous=coeffs.autonomous)


@dataclass(frozen=True)
class CompatibilityReport:
    """Residuals of the order-0 and order-1 matching conditions at t = 0."""

    p: float
    order: int
    conditions: Mapping[str, Mapping[str, float]]
    passed: bool
    tol: float


def check_compatibility(f: FieldFn, h: Mapping[Face, FaceFn], u0: TensorField,
                        coeffs: CoefficientSet, g: MetricField, p: float,
                        s: float = 2.0, tol: float = 1e-8,
                        dt_probe: float = 1e-4) -> CompatibilityReport:
    """Initial-boundary matching conditions for solvability exponent p.

    The exponents p = 3/2 and p = 3 sit exactly on the trace thresholds
    and are rejected: p = 3/2 is the Dirichlet-trace borderline, so it is
    admitted only when no Dirichlet face is present (pure flux problems),
    and p = 3 is the flux-trace borderline, admitted only when no flux
    face is present (pure Dirichlet problems).  For 3/2 < p < 3 only the
    Dirichlet trace of u0 must match h at t = 0; for p > 3 the flux trace
    must match as well; below 3/2 no condition applies.  When s > 2/p the
    first-order condition d_t h0(0) + gamma(A(0) u0) = gamma f(0) is
    checked on Dirichlet faces with a one-sided difference in t.
    """
    grid = u0.grid
    if p <= 1.0:
        raise DomainError(f"p must exceed 1, got {p}")
    if abs(p - 1.5) < 1e-12 and coeffs.dirichlet_faces():
        raise ExcludedExponentError(
            "p = 3/2 is the Dirichlet-trace threshold; admitted only without Dirichlet faces")
    if abs(p - 3.0) < 1e-12 and coeffs.flux_faces():
        raise ExcludedExponentError(
            "p = 3 is the flux-trace threshold; admitted only without flux faces")

    conditions = {}
    traces = apply_B(u0, coeffs, g, t=0.0)

    def face_h(face: Face, t: float) -> np.ndarray:
        fn = h.get(face)
        if fn is None:
            return np.zeros(_face_shape(grid, face))
        return np.asarray(fn(t), dtype=np.float64)

    check_dirichlet = p > 1.5 + 1e-12
    check_flux = p > 3.0 + 1e-12
    res_d = 0.0
    for face in coeffs.dirichlet_faces():
        res_d = max(res_d, float(np.max(np.abs(traces.dirichlet[face] - face_h(face, 0.0)))))
    conditions["order0_dirichlet"] = {
        "applicable": bool(check_dirichlet and coeffs.dirichlet_faces()),
        "residual": res_d,
    }
    res_f = 0.0
    for face in coeffs.flux_faces():
        res_f = max(res_f, float(np.max(np.abs(traces.flux[face] - face_h(face, 0.0)))))
    conditions["order0_flux"] = {
        "applicable": bool(check_flux and coeffs.flux_faces()),
        "residual": res_f,
    }

    order = 0
    need_order1 = s > 2.0 / p
    res_1 = 0.0
    if need_order1 and coeffs.dirichlet_faces():
        order = 1
        au0 = apply_A(u0, coeffs, g, t=0.0)
        f0 = f(0.0)
        for face in coeffs.dirichlet_faces():
            sl = grid.face_slicer(face)
            h0 = face_h(face, 0.0)
            h1 = face_h(face, dt_probe)
            h2 = face_h(face, 2.0 * dt_probe)
            dth = (-3.0 * h0 + 4.0 * h1 - h2) / (2.0 * dt_probe)
            res = dth + au0.components[sl] - f0.components[sl]
            res_1 = max(res_1, float(np.max(np.abs(res))))
    conditions["order1_dirichlet"] = {
        "applicable": bool(need_order1 and coeffs.dirichlet_faces()),
        "residual": res_1,
    }

    worst = max(c["residual"] for c in conditions.values() if c["applicable"]) \
        if any(c["applicable"] for c in conditions.values()) else 0.0
    return CompatibilityReport(p=p, order=order, conditions=conditions,
                               passed=bool(worst <= tol), tol=tol)


def coefficient_regularity_report(coeffs: CoefficientSet, datum: SingularityDatum,
                                  g: MetricField, t: float = 0.0) -> dict:
    """Weighted sup norms that quantify coefficient regularity.

    The natural scales are rho^-2 for the principal part with one
    derivative, rho^-1 for the drift and rho^0 for the reaction term;
    those exponents are what the weighted sup norm with lam = -2 on a
    (1,1) field, lam = 0 on a vector and lam = 0 on a scalar produces.
    """
    a, av, a0 = coeffs.sample(t)
    report = {
        "a_weighted_c1": weighted_sup_norm(a, k=1, lam=-2.0, rho=datum, g=g),
        "a_vec_weighted_sup": weighted_sup_norm(av, k=0, lam=0.0, rho=datum, g=g),
        "a0_sup": weighted_sup_norm(a0, k=0, lam=0.0, rho=datum, g=g),
    }
    for f in coeffs.flux_faces():
        sl = g.grid.face_slicer(f)
        rho_f = datum.values()[sl]
        report[f"b0_weighted_sup_{f.name}"] = float(
            np.max(np.abs(coeffs.b0_at(f, t)) * rho_f))
    return report
