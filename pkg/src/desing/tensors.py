"""Chart-level tensor algebra and differential operators on a grid.

Tensor fields of type (sigma, tau) store their components as one array of
shape grid.shape + (m,)*sigma + (m,)*tau: contravariant slots first, then
covariant slots, multi-indices enumerated lexicographically (row-major).
Derivatives are centered second-order differences in the interior and
second-order one-sided stencils at faces; metric derivative arrays may be
supplied analytically and then take precedence over differencing.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import backend
from .errors import (ConditioningError, GridMismatchError, MetricError,
                     RankError, ResolutionError, ShapeError)
from .grid import ChartGrid

_ALGEBRA_TOL = 1e-12


@dataclass(frozen=True)
class TensorField:
    """(sigma, tau)-tensor components sampled on a chart grid."""

    grid: ChartGrid
    sigma: int
    tau: int
    components: np.ndarray

    def __post_init__(self):
        m = self.grid.m
        want = self.grid.shape + (m,) * self.sigma + (m,) * self.tau
        comp = np.asarray(self.components, dtype=np.float64)
        if comp.shape != want:
            raise ShapeError(
                f"components shape {comp.shape} != expected {want} "
                f"for orders ({self.sigma},{self.tau}) on grid {self.grid.shape}")
        if not np.all(np.isfinite(comp)):
            raise ShapeError("components contain non-finite entries")
        if comp is self.components or comp.base is not None:
            comp = comp.copy()
        comp.flags.writeable = False
        object.__setattr__(self, "components", comp)

    # -- constructors ----------------------------------------------------
    @staticmethod
    def scalar(grid: ChartGrid, values) -> "TensorField":
        values = np.broadcast_to(np.asarray(values, dtype=np.float64), grid.shape)
        return TensorField(grid, 0, 0, np.array(values))

    @staticmethod
    def vector(grid: ChartGrid, values) -> "TensorField":
        return TensorField(grid, 1, 0, values)

    @staticmethod
    def covector(grid: ChartGrid, values) -> "TensorField":
        return TensorField(grid, 0, 1, values)

    # -- basic queries ----------------------------------------------------
    @property
    def m(self) -> int:
        return self.grid.m

    @property
    def nslots(self) -> int:
        return self.sigma + self.tau

    def flat(self) -> np.ndarray:
        """(npts, m**sigma, m**tau) view of the components."""
        m = self.m
        return self.components.reshape(self.grid.npoints, m**self.sigma, m**self.tau)

    def flat_slots(self) -> np.ndarray:
        """(npts, m**(sigma+tau)) view: all slots flattened together."""
        return self.components.reshape(self.grid.npoints, self.m**self.nslots)

    # -- arithmetic (same grid, same orders) -------------------------------
    def _like(self, comp: np.ndarray) -> "TensorField":
        return TensorField(self.grid, self.sigma, self.tau, comp)

    def __add__(self, other: "TensorField") -> "TensorField":
        _check_same_type(self, other)
        return self._like(self.components + other.components)

    def __sub__(self, other: "TensorField") -> "TensorField":
        _check_same_type(self, other)
        return self._like(self.components - other.components)

    def __neg__(self) -> "TensorField":
        return self._like(-self.components)

    def __mul__(self, factor) -> "TensorField":
        return self._like(self.components * float(factor))

    __rmul__ = __mul__

    def scaled_by(self, scalar_field) -> "TensorField":
        """Multiply by a scalar field (array of grid shape or scalar TensorField)."""
        s = scalar_field.components if isinstance(scalar_field, TensorField) else np.asarray(scalar_field)
        s = s.reshape(s.shape + (1,) * self.nslots)
        return self._like(self.components * s)


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError("operands live on different grids")


def _check_same_type(a: TensorField, b: TensorField):
    _check_same_grid(a, b)
    if (a.sigma, a.tau) != (b.sigma, b.tau):
        raise RankError(f"order mismatch ({a.sigma},{a.tau}) vs ({b.sigma},{b.tau})")


def identity_tensor(grid: ChartGrid) -> TensorField:
    """The (1,1) identity tensor field."""
    m = grid.m
    comp = np.broadcast_to(np.eye(m), grid.shape + (m, m))
    return TensorField(grid, 1, 1, np.array(comp))


@dataclass(frozen=True)
class MetricField:
    """Riemannian metric samples with derived inverse/volume/Christoffel.

    deriv_mode 'analytic' requires dg with dg[..., i, j, k] = the k-th
    partial of g_ij; 'finite-difference' computes dg from the samples.
    """

    grid: ChartGrid
    components: np.ndarray
    dg: Optional[np.ndarray] = None
    deriv_mode: str = "finite-difference"

    def __post_init__(self):
        m = self.grid.m
        comp = np.asarray(self.components, dtype=np.float64)
        if comp.shape != self.grid.shape + (m, m):
            raise ShapeError(f"metric shape {comp.shape} invalid for grid {self.grid.shape}")
        scale = max(1.0, float(np.max(np.abs(comp))))
        sym_err = np.max(np.abs(comp - np.swapaxes(comp, -1, -2)))
        if sym_err > _ALGEBRA_TOL * scale:
            raise MetricError(f"metric not symmetric: max asymmetry {sym_err:.3e}")
        comp = comp.copy()
        comp.flags.writeable = False
        object.__setattr__(self, "components", comp)
        if self.dg is not None:
            dg = np.asarray(self.dg, dtype=np.float64)
            if dg.shape != self.grid.shape + (m, m, m):
                raise ShapeError("dg must have shape grid + (m, m, m)")
            dg = dg.copy()
            dg.flags.writeable = False
            object.__setattr__(self, "dg", dg)
            object.__setattr__(self, "deriv_mode", "analytic")
        elif self.deriv_mode == "analytic":
            raise ShapeError("deriv_mode 'analytic' requires a dg array")
        eig = np.linalg.eigvalsh(comp)
        if np.min(eig) <= 0.0:
            loc = np.unravel_index(int(np.argmin(eig[..., 0])), self.grid.shape)
            point = tuple(float(c[loc]) for c in self.grid.coords)
            raise MetricError(f"metric not positive definite at {point}")

    @property
    def m(self) -> int:
        return self.grid.m

    @cached_property
    def inv(self) -> np.ndarray:
        ginv = np.linalg.inv(self.components)
        resid = np.einsum("...ij,...jk->...ik", self.components, ginv)
        resid -= np.eye(self.m)
        err = float(np.max(np.abs(resid)))
        if err > _ALGEBRA_TOL * max(1.0, float(np.max(np.abs(self.components)))):
            raise MetricError(f"inverse residual {err:.3e} exceeds tolerance")
        ginv.flags.writeable = False
        return ginv

    @cached_property
    def sqrt_det(self) -> np.ndarray:
        det = np.linalg.det(self.components)
        if np.min(det) <= 0.0:
            raise MetricError("metric determinant not positive")
        out = np.sqrt(det)
        out.flags.writeable = False
        return out

    @cached_property
    def dg_array(self) -> np.ndarray:
        if self.dg is not None:
            return self.dg
        out = _partials_of(self.components, self.grid)
        out.flags.writeable = False
        return out

    @cached_property
    def christoffel(self) -> np.ndarray:
        """Levi-Civita symbols gamma[..., c, i, j] = Gamma^c_{ij}."""
        eig = np.linalg.eigvalsh(self.components)
        ratio = eig[..., -1] / eig[..., 0]
        worst = float(np.max(ratio))
        if worst > 1e12:
            loc = np.unravel_index(int(np.argmax(ratio)), self.grid.shape)
            point = tuple(float(c[loc]) for c in self.grid.coords)
            raise ConditioningError(
                f"metric condition ratio {worst:.3e} too large at {point}", location=point)
        npts = self.grid.npoints
        m = self.m
        gam = backend.kernels().christoffel_flat(
            np.ascontiguousarray(self.inv.reshape(npts, m, m)),
            np.ascontiguousarray(self.dg_array.reshape(npts, m, m, m)))
        gam = gam.reshape(self.grid.shape + (m, m, m))
        gam.flags.writeable = False
        return gam

    def as_tensor(self) -> TensorField:
        return TensorField(self.grid, 0, 2, self.components)

    def inv_tensor(self) -> TensorField:
        return TensorField(self.grid, 2, 0, self.inv)

    def flat_inv(self) -> np.ndarray:
        return np.ascontiguousarray(self.inv.reshape(self.grid.npoints, self.m, self.m))

    def flat_g(self) -> np.ndarray:
        return np.ascontiguousarray(self.components.reshape(self.grid.npoints, self.m, self.m))

    def __eq__(self, other):
        if not isinstance(other, MetricField):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.components, other.components)

    def __hash__(self):
        return hash((self.grid, self.components.tobytes()))


def euclidean_metric(grid: ChartGrid) -> MetricField:
    m = grid.m
    comp = np.broadcast_to(np.eye(m), grid.shape + (m, m))
    dg = np.zeros(grid.shape + (m, m, m))
    return MetricField(grid, np.array(comp), dg=dg)


# ---------------------------------------------------------------------------
# differencing


def _partials_of(values: np.ndarray, grid: ChartGrid) -> np.ndarray:
    """Stack of partial derivatives along every grid axis, new axis last."""
    if any(n < 3 for n in grid.shape):
        raise ResolutionError("grid too small for second-order stencils")
    h = grid.spacing
    outs = [np.gradient(values, h[k], axis=k, edge_order=2) for k in range(grid.m)]
    return np.stack(outs, axis=-1)


def partial_derivatives(a: TensorField) -> np.ndarray:
    """Componentwise partials of a tensor field; trailing axis is d/dx^k."""
    return _partials_of(a.components, a.grid)


# ---------------------------------------------------------------------------
# algebraic operations


def contract_full(a: TensorField, b: TensorField) -> TensorField:
    """Complete contraction: pairs b's contravariant slots with a's trailing
    covariant slots and b's covariant slots with a's trailing contravariant
    slots, in slot order."""
    _check_same_grid(a, b)
    s1, t1 = b.sigma, b.tau
    s2 = a.sigma - t1
    t2 = a.tau - s1
    if s2 < 0 or t2 < 0:
        raise RankError(
            f"cannot fully contract ({b.sigma},{b.tau}) into ({a.sigma},{a.tau})")
    m = a.m
    out = backend.kernels().contract_full_flat(
        np.ascontiguousarray(a.flat()), np.ascontiguousarray(b.flat()),
        m, s2, t2, s1, t1)
    comp = out.reshape(a.grid.shape + (m,) * s2 + (m,) * t2)
    return TensorField(a.grid, s2, t2, comp)


def tensor_norm_sq(a: TensorField, g: MetricField) -> np.ndarray:
    _check_same_grid(a, g)
    out = backend.kernels().norm_sq_flat(
        np.ascontiguousarray(a.flat_slots()), g.flat_g(), g.flat_inv(),
        a.m, a.sigma, a.tau)
    return out.reshape(a.grid.shape)


def tensor_norm(a: TensorField, g: MetricField) -> TensorField:
    """Pointwise induced bundle norm |a| under g (scalar field)."""
    sq = tensor_norm_sq(a, g)
    return TensorField.scalar(a.grid, np.sqrt(np.maximum(sq, 0.0)))


def _apply_metric_at_slot(a: TensorField, mat_flat: np.ndarray, slot: int) -> np.ndarray:
    arr = backend.kernels().apply_metric_slot(
        np.ascontiguousarray(a.flat_slots()), mat_flat, a.m, slot, a.nslots)
    return arr.reshape(a.components.shape)


def sharp(a: TensorField, g: MetricField) -> TensorField:
    """Raise the last covariant slot with the inverse metric; the new
    contravariant index is appended after the existing contravariant slots."""
    if a.tau < 1:
        raise RankError("sharp needs at least one covariant slot")
    _check_same_grid(a, g)
    raised = _apply_metric_at_slot(a, g.flat_inv(), a.nslots - 1)
    gn = len(a.grid.shape)
    comp = np.moveaxis(raised, -1, gn + a.sigma)
    return TensorField(a.grid, a.sigma + 1, a.tau - 1, comp)


def flat_lower(a: TensorField, g: MetricField) -> TensorField:
    """Lower the last contravariant slot with g; the new covariant index is
    appended after the existing covariant slots (inverse of sharp)."""
    if a.sigma < 1:
        raise RankError("flat needs at least one contravariant slot")
    _check_same_grid(a, g)
    lowered = _apply_metric_at_slot(a, g.flat_g(), a.sigma - 1)
    gn = len(a.grid.shape)
    comp = np.moveaxis(lowered, gn + a.sigma - 1, -1)
    return TensorField(a.grid, a.sigma - 1, a.tau + 1, comp)


def contraction_C(a: TensorField) -> TensorField:
    """Trace the last contravariant against the last covariant slot."""
    if a.sigma < 1 or a.tau < 1:
        raise RankError("contraction needs at least one slot of each kind")
    gn = len(a.grid.shape)
    comp = np.trace(a.components, axis1=gn + a.sigma - 1, axis2=gn + a.sigma + a.tau - 1)
    return TensorField(a.grid, a.sigma - 1, a.tau - 1, comp)


def vector_inner(x: TensorField, y: TensorField, g: MetricField) -> TensorField:
    """(x|y)_g for two vector fields."""
    if (x.sigma, x.tau) != (1, 0) or (y.sigma, y.tau) != (1, 0):
        raise RankError("vector_inner expects two vector fields")
    _check_same_grid(x, g)
    _check_same_grid(y, g)
    vals = np.einsum("...ij,...i,...j->...", g.components, x.components, y.components)
    return TensorField.scalar(x.grid, vals)


# ---------------------------------------------------------------------------
# differential operations


def covariant_derivative(a: TensorField, g: MetricField) -> TensorField:
    """Levi-Civita covariant derivative; the derivative index becomes the
    last covariant slot.  For scalars this is the differential."""
    _check_same_grid(a, g)
    parts = partial_derivatives(a)
    if a.nslots == 0:
        comp = parts
    else:
        npts = a.grid.npoints
        m = a.m
        corr = backend.kernels().covd_correction_flat(
            np.ascontiguousarray(a.flat_slots()),
            np.ascontiguousarray(g.christoffel.reshape(npts, m, m, m)),
            m, a.sigma, a.tau)
        comp = parts + corr.reshape(parts.shape)
    return TensorField(a.grid, a.sigma, a.tau + 1, comp)


def second_covariant(u: TensorField, g: MetricField) -> TensorField:
    """Hessian of a scalar with the Christoffel correction (a (0,2) field)."""
    if u.nslots != 0:
        raise RankError("second_covariant expects a scalar field")
    return covariant_derivative(covariant_derivative(u, g), g)


def gradient(u: TensorField, g: MetricField) -> TensorField:
    """Metric gradient of a scalar: components g^{ij} d_j u."""
    if u.nslots != 0:
        raise RankError("gradient expects a scalar field")
    _check_same_grid(u, g)
    du = _partials_of(u.components, u.grid)
    comp = np.einsum("...ij,...j->...i", g.inv, du)
    return TensorField(u.grid, 1, 0, comp)


def divergence(a: TensorField, g: MetricField) -> TensorField:
    """Divergence as the trace of the covariant derivative."""
    if a.sigma < 1:
        raise RankError("divergence needs at least one contravariant slot")
    return contraction_C(covariant_derivative(a, g))


def divergence_vector_direct(x: TensorField, g: MetricField) -> TensorField:
    """Divergence of a vector via the volume-density form: differencing is
    applied to the products sqrt(det g) * X^i."""
    if (x.sigma, x.tau) != (1, 0):
        raise RankError("divergence_vector_direct expects a vector field")
    _check_same_grid(x, g)
    sq = g.sqrt_det
    if np.min(sq) <= 0.0:
        raise MetricError("volume density not positive")
    h = x.grid.spacing
    acc = np.zeros(x.grid.shape)
    for i in range(x.m):
        acc += np.gradient(sq * x.components[..., i], h[i], axis=i, edge_order=2)
    return TensorField.scalar(x.grid, acc / sq)


def divergence_form_expand(a: TensorField, u: TensorField, g: MetricField) -> TensorField:
    """Right-hand side of the divergence-form expansion:
    contraction of the raised coefficient with the second covariant
    derivative plus contraction of its divergence with the differential."""
    if (a.sigma, a.tau) != (1, 1):
        raise RankError("divergence_form_expand expects a (1,1) coefficient")
    ash = sharp(a, g)
    term1 = contract_full(ash, second_covariant(u, g))
    term2 = contract_full(divergence(ash, g), covariant_derivative(u, g))
    return term1 + term2


def laplace_beltrami(u: TensorField, g: MetricField) -> TensorField:
    return divergence(gradient(u, g), g)
