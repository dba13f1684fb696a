"""Model singular manifolds: charts, metrics, singularity functions, and
empirical regularity checks.

Every constructor returns a single normalized chart with an analytic metric
(components and first derivatives in closed form) plus the singularity
function rho with its analytic gradient.  The conformally rescaled metric
ghat = g / rho**2 is attached so the desingularized problem can be driven
off the same chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, ShapeError
from .grid import PHYSICAL, TRUNCATION, ChartGrid, Face
from .tensors import MetricField, TensorField, _partials_of


@dataclass(frozen=True)
class ManifoldSpec:
    """A chart, its metric, and the Dirichlet/Robin split of the boundary."""

    name: str
    chart: ChartGrid
    metric: MetricField
    delta: Mapping[Face, int]
    coord_names: tuple

    def __post_init__(self):
        physical = set(self.chart.faces_with_role(PHYSICAL))
        labeled = set(self.delta.keys())
        if labeled != physical:
            raise ConfigurationError(
                f"delta labels {sorted(f.name for f in labeled)} do not match "
                f"physical faces {sorted(f.name for f in physical)}")
        for f, v in self.delta.items():
            if v not in (0, 1):
                raise ConfigurationError(f"delta[{f.name}] must be 0 or 1, got {v}")
        object.__setattr__(self, "delta", dict(self.delta))

    @property
    def m(self) -> int:
        return self.chart.m

    def dirichlet_faces(self):
        return [f for f, v in sorted(self.delta.items()) if v == 0]

    def robin_faces(self):
        return [f for f, v in sorted(self.delta.items()) if v == 1]

    def truncation_faces(self):
        return sorted(self.chart.faces_with_role(TRUNCATION))


@dataclass(frozen=True)
class SingularityDatum:
    """Singularity function samples with gradient and the rescaled metric."""

    rho: TensorField
    drho: np.ndarray
    rho_kappa: float
    hat_metric: MetricField
    analytic: bool = True
    rho_func: Optional[Callable] = None

    def __post_init__(self):
        if self.rho.nslots != 0:
            raise ShapeError("rho must be a scalar field")
        if np.min(self.rho.components) <= 0.0:
            raise DomainError("rho must be strictly positive on the grid")
        drho = np.asarray(self.drho, dtype=np.float64)
        if drho.shape != self.rho.grid.shape + (self.rho.grid.m,):
            raise ShapeError("drho must have shape grid + (m,)")
        drho = drho.copy()
        drho.flags.writeable = False
        object.__setattr__(self, "drho", drho)

    @property
    def grid(self) -> ChartGrid:
        return self.rho.grid

    def values(self) -> np.ndarray:
        return self.rho.components

    def face_values(self, face: Face) -> np.ndarray:
        return self.rho.components[self.grid.face_slicer(face)]

    def is_trivial(self) -> bool:
        return bool(np.all(self.rho.components == 1.0) and np.all(self.drho == 0.0))


def trivial_datum(g: MetricField) -> SingularityDatum:
    """rho == 1: the manifold is already uniformly regular."""
    grid = g.grid
    rho = TensorField.scalar(grid, np.ones(grid.shape))
    drho = np.zeros(grid.shape + (grid.m,))
    return SingularityDatum(rho, drho, 1.0, g, analytic=True, rho_func=lambda *c: np.ones_like(c[0]))


def conformal_metric(g: MetricField, rho: TensorField,
                     drho: Optional[np.ndarray] = None) -> MetricField:
    """ghat = g / rho**2, with chain-rule derivatives when both inputs are
    analytic; sqrt(det ghat) * rho**m == sqrt(det g) follows pointwise."""
    if rho.nslots != 0 or rho.grid != g.grid:
        raise ShapeError("rho must be a scalar field on the metric's grid")
    r = rho.components
    if np.min(r) <= 0.0:
        raise DomainError("rho must be strictly positive")
    r2 = (r * r)[..., None, None]
    comp = g.components / r2
    if drho is not None and g.deriv_mode == "analytic":
        # d_k ghat_ij = dg_ijk / rho^2 - 2 g_ij rho^{-3} drho_k
        dg = (g.dg_array / r2[..., None]
              - 2.0 * g.components[..., None] * (r**-3)[..., None, None, None]
              * drho[..., None, None, :])
        return MetricField(g.grid, comp, dg=dg)
    return MetricField(g.grid, comp)


# ---------------------------------------------------------------------------
# model geometry constructors


def _roles(m: int, axis0_lo: str, axis0_hi: str) -> dict:
    roles = {Face(0, 0): axis0_lo, Face(0, 1): axis0_hi}
    for ax in range(1, m):
        roles[Face(ax, 0)] = TRUNCATION
        roles[Face(ax, 1)] = TRUNCATION
    return roles


def _delta_for(grid: ChartGrid, default: int, overrides: Optional[Mapping] = None) -> dict:
    delta = {f: default for f in grid.faces_with_role(PHYSICAL)}
    if overrides:
        for key, v in overrides.items():
            f = Face.from_name(key) if isinstance(key, str) else key
            if f not in delta:
                raise ConfigurationError(f"{f.name} is not a physical face")
            delta[f] = int(v)
    return delta


def make_euclidean_box(m: int, extents=None, shape=None, delta=None):
    """Flat box, rho == 1."""
    if m not in (1, 2):
        raise DomainError("m must be 1 or 2")
    extents = extents or tuple((0.0, 1.0) for _ in range(m))
    shape = shape or tuple(33 for _ in range(m))
    lo = tuple(e[0] for e in extents)
    hi = tuple(e[1] for e in extents)
    grid = ChartGrid(lo, hi, shape)
    comp = np.broadcast_to(np.eye(m), grid.shape + (m, m)).copy()
    g = MetricField(grid, comp, dg=np.zeros(grid.shape + (m, m, m)))
    spec = ManifoldSpec("euclidean", grid, g, _delta_for(grid, 0, delta),
                        tuple(f"x{i+1}" for i in range(m)))
    return spec, trivial_datum(g)


def make_poincare_ball(m: int, annulus=(0.2, 0.8), shape=None, delta=None,
                       theta_span=(0.0, math.pi / 2)):
    """Annular chart of the unit-ball model in polar coordinates, carrying
    the flat metric and rho(x) = (1 - |x|^2)/2; the rescaled metric is the
    hyperbolic one, 4 g_m / (1 - |x|^2)^2."""
    r0, r1 = float(annulus[0]), float(annulus[1])
    if not (0.0 < r0 < r1 < 1.0):
        raise DomainError(f"annulus must satisfy 0 < r0 < r1 < 1, got ({r0}, {r1})")
    if m not in (1, 2):
        raise DomainError("m must be 1 or 2")
    shape = shape or ((65,) if m == 1 else (33, 33))
    if m == 1:
        grid = ChartGrid((r0,), (r1,), shape, _roles(1, PHYSICAL, PHYSICAL))
        comp = np.ones(grid.shape + (1, 1))
        dg = np.zeros(grid.shape + (1, 1, 1))
        coords = grid.coords
        coord_names = ("r",)
    else:
        grid = ChartGrid((r0, theta_span[0]), (r1, theta_span[1]), shape,
                         _roles(2, PHYSICAL, PHYSICAL))
        coords = grid.coords
        r = coords[0]
        comp = np.zeros(grid.shape + (2, 2))
        comp[..., 0, 0] = 1.0
        comp[..., 1, 1] = r**2
        dg = np.zeros(grid.shape + (2, 2, 2))
        dg[..., 1, 1, 0] = 2.0 * r
        coord_names = ("r", "theta")
    g = MetricField(grid, comp, dg=dg)
    r = coords[0]
    rho_vals = 0.5 * (1.0 - r**2)
    drho = np.zeros(grid.shape + (m,))
    drho[..., 0] = -r
    rho = TensorField.scalar(grid, rho_vals)
    ghat = conformal_metric(g, rho, drho)
    rk = float(0.5 * (1.0 - grid.center()[0]**2))
    datum = SingularityDatum(rho, drho, rk, ghat,
                             rho_func=lambda *c: 0.5 * (1.0 - c[0]**2))
    spec = ManifoldSpec("poincare_ball", grid, g, _delta_for(grid, 0, delta), coord_names)
    return spec, datum


def _embedded_profile_metric(grid: ChartGrid, alpha: float, m: int):
    """First fundamental form of (t, t^alpha * y) over a point-pair or unit
    circle base: g_tt = 1 + alpha^2 t^(2 alpha - 2), g_yy = t^(2 alpha)."""
    t = grid.coords[0]
    a2 = alpha * alpha
    gtt = 1.0 + a2 * t**(2.0 * alpha - 2.0)
    dgtt = a2 * (2.0 * alpha - 2.0) * t**(2.0 * alpha - 3.0) if alpha != 0.0 else np.zeros_like(t)
    comp = np.zeros(grid.shape + (m, m))
    dg = np.zeros(grid.shape + (m, m, m))
    comp[..., 0, 0] = gtt
    dg[..., 0, 0, 0] = dgtt
    if m == 2:
        comp[..., 1, 1] = t**(2.0 * alpha)
        dg[..., 1, 1, 0] = 2.0 * alpha * t**(2.0 * alpha - 1.0) if alpha != 0.0 else 0.0
    return MetricField(grid, comp, dg=dg)


def _power_datum(grid: ChartGrid, alpha: float, g: MetricField) -> SingularityDatum:
    t = grid.coords[0]
    rho_vals = t**alpha
    drho = np.zeros(grid.shape + (grid.m,))
    drho[..., 0] = alpha * t**(alpha - 1.0)
    rho = TensorField.scalar(grid, rho_vals)
    ghat = conformal_metric(g, rho, drho)
    rk = float(grid.center()[0]**alpha)
    return SingularityDatum(rho, drho, rk, ghat, rho_func=lambda *c: c[0]**alpha)


def make_cusp(alpha: float, base: str = "point_pair", t_interval=(0.1, 1.0),
              shape=None, delta=None, y_span=(0.0, math.pi / 2),
              chart_metric: str = "embedded"):
    """Model cusp: profile (t, t^alpha y) shrinking toward t = 0, truncated
    at t_min; rho = t^alpha."""
    if alpha < 1.0:
        raise DomainError(f"cusp requires alpha >= 1, got {alpha}")
    t_min, t_max = float(t_interval[0]), float(t_interval[1])
    if t_min <= 0.0:
        raise DomainError("cusp truncation t_min must be positive")
    if not t_min < t_max <= 1.0:
        raise DomainError("cusp t-interval must satisfy 0 < t_min < t_max <= 1")
    m = {"point_pair": 1, "circle": 2}.get(base)
    if m is None:
        raise DomainError(f"unknown base {base!r}; expected point_pair or circle")
    shape = shape or ((65,) if m == 1 else (33, 17))
    lo = (t_min,) if m == 1 else (t_min, y_span[0])
    hi = (t_max,) if m == 1 else (t_max, y_span[1])
    grid = ChartGrid(lo, hi, shape, _roles(m, TRUNCATION, PHYSICAL))
    if chart_metric == "euclidean":
        g = MetricField(grid, np.broadcast_to(np.eye(m), grid.shape + (m, m)).copy(),
                        dg=np.zeros(grid.shape + (m, m, m)))
    elif chart_metric == "embedded":
        g = _embedded_profile_metric(grid, alpha, m)
    else:
        raise DomainError(f"unknown chart_metric {chart_metric!r}")
    name = f"cusp_alpha{alpha:g}" + ("" if m == 1 else "_circle")
    spec = ManifoldSpec(name, grid, g, _delta_for(grid, 0, delta),
                        ("t",) if m == 1 else ("t", "y"))
    return spec, _power_datum(grid, alpha, g)


def make_infinite_cusp(alpha: float, base: str = "point_pair",
                       t_interval=(1.0, 4.0), shape=None, delta=None,
                       y_span=(0.0, math.pi / 2)):
    """Infinite cusp: same profile on t in (1, T_max), alpha < 0, rho = t^alpha
    decaying toward the truncated far end."""
    if alpha >= 0.0:
        raise DomainError(f"infinite cusp requires alpha < 0, got {alpha}")
    t_lo, t_max = float(t_interval[0]), float(t_interval[1])
    if not (1.0 <= t_lo < t_max) or not math.isfinite(t_max):
        raise DomainError("infinite cusp needs 1 <= t_lo < T_max < inf")
    m = {"point_pair": 1, "circle": 2}.get(base)
    if m is None:
        raise DomainError(f"unknown base {base!r}")
    shape = shape or ((65,) if m == 1 else (33, 17))
    lo = (t_lo,) if m == 1 else (t_lo, y_span[0])
    hi = (t_max,) if m == 1 else (t_max, y_span[1])
    grid = ChartGrid(lo, hi, shape, _roles(m, PHYSICAL, TRUNCATION))
    g = _embedded_profile_metric(grid, alpha, m)
    spec = ManifoldSpec(f"infinite_cusp_alpha{alpha:g}", grid, g,
                        _delta_for(grid, 0, delta), ("t",) if m == 1 else ("t", "y"))
    return spec, _power_datum(grid, alpha, g)


def make_funnel(alpha: float, base: str = "point_pair", t_interval=(1.5, 4.0),
                shape=None, delta=None, y_span=(0.0, math.pi / 2)):
    """Funnel on t in (1, T_max): alpha = 0 is a cylinder, alpha = 1 a cone;
    uniformly regular as it stands, so rho == 1."""
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"funnel requires alpha in [0, 1], got {alpha}")
    t_lo, t_max = float(t_interval[0]), float(t_interval[1])
    if not (1.0 <= t_lo < t_max) or not math.isfinite(t_max):
        raise DomainError("funnel needs 1 <= t_lo < T_max < inf")
    m = {"point_pair": 1, "circle": 2}.get(base)
    if m is None:
        raise DomainError(f"unknown base {base!r}")
    shape = shape or ((65,) if m == 1 else (33, 17))
    lo = (t_lo,) if m == 1 else (t_lo, y_span[0])
    hi = (t_max,) if m == 1 else (t_max, y_span[1])
    grid = ChartGrid(lo, hi, shape, _roles(m, PHYSICAL, TRUNCATION))
    g = _embedded_profile_metric(grid, alpha, m)
    spec = ManifoldSpec(f"funnel_alpha{alpha:g}", grid, g,
                        _delta_for(grid, 0, delta), ("t",) if m == 1 else ("t", "y"))
    return spec, trivial_datum(g)


def make_wedge(alpha: float, t_interval=(0.1, 1.0), w_halfwidth=None,
               shape=(33, 17), delta=None):
    """Wedge: cusp profile times a flat interval in the extra direction,
    with rho independent of the wedge coordinate."""
    if alpha < 1.0:
        raise DomainError(f"wedge requires alpha >= 1, got {alpha}")
    t_min, t_max = float(t_interval[0]), float(t_interval[1])
    if t_min <= 0.0:
        raise DomainError("wedge truncation t_min must be positive")
    w = float(w_halfwidth) if w_halfwidth is not None else t_min
    roles = {Face(0, 0): TRUNCATION, Face(0, 1): PHYSICAL,
             Face(1, 0): PHYSICAL, Face(1, 1): PHYSICAL}
    grid = ChartGrid((t_min, -w), (t_max, w), shape, roles)
    t = grid.coords[0]
    a2 = alpha * alpha
    comp = np.zeros(grid.shape + (2, 2))
    comp[..., 0, 0] = 1.0 + a2 * t**(2.0 * alpha - 2.0)
    comp[..., 1, 1] = 1.0
    dg = np.zeros(grid.shape + (2, 2, 2))
    dg[..., 0, 0, 0] = a2 * (2.0 * alpha - 2.0) * t**(2.0 * alpha - 3.0)
    g = MetricField(grid, comp, dg=dg)
    default = {Face(0, 1).name: 0, Face(1, 0).name: 1, Face(1, 1).name: 1}
    if delta:
        default.update({k if isinstance(k, str) else k.name: v for k, v in delta.items()})
    spec = ManifoldSpec(f"wedge_alpha{alpha:g}", grid, g,
                        _delta_for(grid, 0, default), ("t", "w"))
    return spec, _power_datum(grid, alpha, g)


# ---------------------------------------------------------------------------
# regularity checks


@dataclass(frozen=True)
class RegularityReport:
    """Empirical sups and equivalence ratios with per-condition verdicts."""

    k_max: int
    sup_norms: Mapping[str, float]
    equivalence_ratios: Mapping[str, float]
    threshold: float
    passes: Mapping[str, bool]
    passed: bool
    notes: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "k_max": self.k_max,
            "sup_norms": dict(self.sup_norms),
            "equivalence_ratios": dict(self.equivalence_ratios),
            "threshold": self.threshold,
            "passes": dict(self.passes),
            "passed": self.passed,
            "notes": list(self.notes),
        }


def _derivative_sups(values: np.ndarray, grid: ChartGrid, k_max: int,
                     first_order: Optional[np.ndarray] = None) -> dict:
    """Sup of |d^beta values| for 1 <= |beta| <= k_max (components maxed)."""
    sups = {}
    current = first_order if first_order is not None else _partials_of(values, grid)
    sups[1] = float(np.max(np.abs(current)))
    for order in range(2, k_max + 1):
        current = _partials_of(current, grid)
        sups[order] = float(np.max(np.abs(current)))
    return sups


def check_uniform_regularity(spec: ManifoldSpec, k_max: int = 2,
                             threshold: float = 10.0) -> RegularityReport:
    """Empirical version of the uniform-regularity conditions: eigenvalue
    comparability of the chart metric with the Euclidean one and bounded
    derivative sups up to k_max."""
    g = spec.metric
    eig = np.linalg.eigvalsh(g.components)
    ratio = max(float(np.max(eig)), float(np.max(1.0 / eig)))
    sups = {"g_order0": float(np.max(np.abs(g.components)))}
    dsups = _derivative_sups(g.components, spec.chart, k_max, first_order=g.dg_array)
    for order, v in dsups.items():
        sups[f"g_order{order}"] = v
    ratios = {"metric_vs_euclidean": ratio}
    passes = {"metric_vs_euclidean": ratio <= threshold}
    for key, v in sups.items():
        passes[key] = v <= threshold
    return RegularityReport(k_max, sups, ratios, threshold, passes,
                            all(passes.values()))


def check_singularity_datum(datum: SingularityDatum, spec: ManifoldSpec,
                            k_max: int = 2, threshold: float = 10.0) -> RegularityReport:
    """Empirical singularity-datum conditions: chart derivatives of rho
    bounded by rho_kappa, rho comparable to rho_kappa across the patch,
    and the log-differential bounded in the rescaled cotangent norm."""
    grid = datum.grid
    r = datum.values()
    rk = datum.rho_kappa
    sups = {"rho_order0_over_kappa": float(np.max(r) / rk)}
    dsups = _derivative_sups(r, grid, k_max, first_order=datum.drho)
    for order, v in dsups.items():
        sups[f"rho_order{order}_over_kappa"] = v / rk
    ratios = {
        "rho_sup_over_inf": float(np.max(r) / np.min(r)),
        "rho_vs_kappa": max(float(np.max(r)) / rk, rk / float(np.min(r))),
    }
    dlog = datum.drho / r[..., None]
    ghat_inv = datum.hat_metric.inv
    dlog_norm = np.sqrt(np.maximum(
        np.einsum("...ij,...i,...j->...", ghat_inv, dlog, dlog), 0.0))
    ratios["dlog_rho_hat_sup"] = float(np.max(dlog_norm))
    passes = {k: v <= threshold for k, v in {**sups, **ratios}.items()}
    return RegularityReport(k_max, sups, ratios, threshold, passes,
                            all(passes.values()))


def transition_regularity_report(k_max: int = 2, threshold: float = 10.0,
                                 n_samples: int = 513) -> RegularityReport:
    """Transition-map derivative bounds between two overlapping funnel
    charts, one parametrized by t and one by log t, both normalized onto
    (-1, 1).  The only multi-chart check in the library."""
    c_a, r_a = 2.5, 1.0          # chart A covers t in (1.5, 3.5)
    s_lo, s_hi = math.log(2.0), math.log(5.0)
    c_b, r_b = 0.5 * (s_lo + s_hi), 0.5 * (s_hi - s_lo)
    t_lo, t_hi = 2.0, 3.5        # overlap in t
    xi = np.linspace((t_lo - c_a) / r_a, (t_hi - c_a) / r_a, n_samples)
    eta_of_xi = (np.log(c_a + r_a * xi) - c_b) / r_b
    eta = np.linspace((math.log(t_lo) - c_b) / r_b, (math.log(t_hi) - c_b) / r_b, n_samples)
    xi_of_eta = (np.exp(c_b + r_b * eta) - c_a) / r_a
    sups = {}
    for tag, x, y in (("a_to_b", xi, eta_of_xi), ("b_to_a", eta, xi_of_eta)):
        h = x[1] - x[0]
        cur = y
        for order in range(1, k_max + 1):
            cur = np.gradient(cur, h, edge_order=2)
            sups[f"{tag}_order{order}"] = float(np.max(np.abs(cur)))
    passes = {k: v <= threshold for k, v in sups.items()}
    return RegularityReport(k_max, sups, {}, threshold, passes, all(passes.values()),
                            notes=("two overlapping funnel charts, t and log t",))
