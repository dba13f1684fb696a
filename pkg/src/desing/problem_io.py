"""Problem-spec files: TOML schema, validation, overrides, construction.

A problem-spec file has sections geometry / coefficients / data / time /
norms / mode.  Every scalar or tensor entry is an expression string in
the chart coordinates x1..xm, time t and the singularity function rho.
Unknown sections or keys are schema errors carrying the offending field
path; override dictionaries are validated the same way before anything
is built.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import SchemaError
from .expressions import Expression, compile_expression
from .geometry import (
    make_cusp,
    make_euclidean_box,
    make_funnel,
    make_infinite_cusp,
    make_poincare_ball,
    make_wedge,
)
from .grid import Face
from .norms import NormSpec
from .operators import CoefficientSet, apply_B
from .solver import ProblemData, ProblemSpec, TimeGrid
from .tensors import TensorField

_SECTION_KEYS = {
    "geometry": {"kind", "m", "alpha", "t_min", "t_max", "base", "extents",
                 "annulus", "grid", "delta", "chart_metric", "theta_span",
                 "y_span", "w_halfwidth"},
    "coefficients": {"a", "a_vec", "a0", "b0"},
    "data": {"f", "u0", "reference", "h"},
    "time": {"t_final", "steps", "theta", "t_start"},
    "norms": {"p", "k", "lambda", "metric"},
    "mode": {"mode", "seed"},
}

_GEOMETRY_KINDS = ("euclidean_box", "poincare_ball", "cusp", "infinite_cusp",
                   "funnel", "wedge")

OVERRIDE_KEYS = ("grid", "dt", "alpha", "lambda", "p", "theta", "mode",
                 "t_min", "seed")

_DEFAULTS = {
    "coefficients": {"a": "1"},
    "data": {"u0": "0"},
    "time": {"t_final": 1.0, "steps": 16, "theta": 1.0, "t_start": 0.0},
    "norms": {"p": 2.0, "k": 2, "lambda": 0.0, "metric": "g"},
    "mode": {"mode": "direct", "seed": 0},
}


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise SchemaError(path, message)


def _validate_sections(doc: dict) -> None:
    for section in doc:
        _require(section in _SECTION_KEYS, section, "unknown section")
        _require(isinstance(doc[section], dict), section, "section must be a table")
        for key in doc[section]:
            _require(key in _SECTION_KEYS[section], f"{section}.{key}", "unknown key")
    _require("geometry" in doc, "geometry", "section required")
    _require("kind" in doc["geometry"], "geometry.kind", "key required")
    kind = doc["geometry"]["kind"]
    _require(kind in _GEOMETRY_KINDS, "geometry.kind",
             f"must be one of {_GEOMETRY_KINDS}, got {kind!r}")


def _as_grid(value, path: str):
    if isinstance(value, int):
        return [value]
    if isinstance(value, str):
        try:
            return [int(x) for x in value.split(",") if x.strip()]
        except ValueError:
            raise SchemaError(path, f"cannot parse grid from {value!r}") from None
    if isinstance(value, (list, tuple)):
        _require(all(isinstance(v, int) for v in value), path, "grid entries must be ints")
        return list(value)
    raise SchemaError(path, f"grid must be int or list of ints, got {type(value).__name__}")


def _geometry_dims(geo: dict) -> int:
    kind = geo["kind"]
    if kind == "euclidean_box":
        if "m" in geo:
            return int(geo["m"])
        if "extents" in geo:
            return len(geo["extents"])
        return 1
    if kind == "poincare_ball":
        return int(geo.get("m", 2))
    if kind == "wedge":
        return 2
    return 2 if geo.get("base", "point_pair") == "circle" else 1


def _expr_variables(m: int):
    return tuple(f"x{i+1}" for i in range(m)) + ("t", "rho")


def _check_expr(value, path: str, variables) -> None:
    _require(isinstance(value, str), path, "expected an expression string")
    compile_expression(value, variables, path)


def _validate_expressions(doc: dict) -> None:
    m = _geometry_dims(doc["geometry"])
    variables = _expr_variables(m)
    coeffs = doc.get("coefficients", {})
    a = coeffs.get("a", _DEFAULTS["coefficients"]["a"])
    if isinstance(a, list):
        _require(len(a) == m * m, "coefficients.a",
                 f"matrix form needs {m * m} entries, got {len(a)}")
        for i, entry in enumerate(a):
            _check_expr(entry, f"coefficients.a[{i}]", variables)
    else:
        _check_expr(a, "coefficients.a", variables)
    if "a_vec" in coeffs:
        _require(isinstance(coeffs["a_vec"], list) and len(coeffs["a_vec"]) == m,
                 "coefficients.a_vec", f"needs {m} entries")
        for i, entry in enumerate(coeffs["a_vec"]):
            _check_expr(entry, f"coefficients.a_vec[{i}]", variables)
    if "a0" in coeffs:
        _check_expr(coeffs["a0"], "coefficients.a0", variables)
    if "b0" in coeffs:
        b0 = coeffs["b0"]
        if isinstance(b0, dict):
            for name, entry in b0.items():
                _face_from_name(name, f"coefficients.b0.{name}")
                _check_expr(entry, f"coefficients.b0.{name}", variables)
        else:
            _check_expr(b0, "coefficients.b0", variables)
    data = doc.get("data", {})
    for key in ("f", "u0", "reference"):
        if key in data:
            _check_expr(data[key], f"data.{key}", variables)
    if "h" in data:
        h = data["h"]
        if isinstance(h, dict):
            for name, entry in h.items():
                _face_from_name(name, f"data.h.{name}")
                _check_expr(entry, f"data.h.{name}", variables)
        else:
            _check_expr(h, "data.h", variables)
    if "delta" in doc.get("geometry", {}):
        delta = doc["geometry"]["delta"]
        _require(isinstance(delta, dict), "geometry.delta", "must be a table")
        for name, val in delta.items():
            _face_from_name(name, f"geometry.delta.{name}")
            _require(val in (0, 1), f"geometry.delta.{name}", "must be 0 or 1")


def _face_from_name(name: str, path: str) -> Face:
    try:
        return Face.from_name(name)
    except Exception:
        raise SchemaError(path, f"not a face name (expected like 'x1_lo'): {name!r}") from None


def _validate_scalars(doc: dict) -> None:
    time = {**_DEFAULTS["time"], **doc.get("time", {})}
    _require(isinstance(time["steps"], int) and time["steps"] >= 1,
             "time.steps", "must be a positive integer")
    _require(float(time["t_final"]) > float(time["t_start"]),
             "time.t_final", "must exceed t_start")
    _require(0.0 <= float(time["theta"]) <= 1.0, "time.theta", "must lie in [0, 1]")
    norms = {**_DEFAULTS["norms"], **doc.get("norms", {})}
    _require(float(norms["p"]) > 1.0, "norms.p", "must exceed 1")
    _require(norms["k"] in (0, 1, 2), "norms.k", "must be 0, 1 or 2")
    _require(norms["metric"] in ("g", "hat"), "norms.metric", "must be 'g' or 'hat'")
    mode = {**_DEFAULTS["mode"], **doc.get("mode", {})}
    _require(mode["mode"] in ("direct", "desingularized", "both"),
             "mode.mode", "must be direct, desingularized or both")
    _require(isinstance(mode["seed"], int), "mode.seed", "must be an integer")
    if "grid" in doc.get("geometry", {}):
        _as_grid(doc["geometry"]["grid"], "geometry.grid")


@dataclass(frozen=True)
class ProblemConfig:
    """Validated problem-spec document plus construction logic."""

    raw: dict
    source: str = "<memory>"

    @staticmethod
    def from_dict(doc: dict, source: str = "<memory>") -> "ProblemConfig":
        doc = copy.deepcopy(doc)
        _validate_sections(doc)
        _validate_scalars(doc)
        _validate_expressions(doc)
        return ProblemConfig(doc, source)

    @property
    def seed(self) -> int:
        return int(self.raw.get("mode", {}).get("seed", 0))

    @property
    def mode(self) -> str:
        return self.raw.get("mode", {}).get("mode", "direct")

    def section(self, name: str) -> dict:
        merged = dict(_DEFAULTS.get(name, {}))
        merged.update(self.raw.get(name, {}))
        return merged

    def with_overrides(self, overrides: Mapping) -> "ProblemConfig":
        doc = copy.deepcopy(self.raw)
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in OVERRIDE_KEYS:
                raise SchemaError(f"overrides.{key}", "unknown override")
            if key == "grid":
                doc.setdefault("geometry", {})["grid"] = _as_grid(value, "overrides.grid")
            elif key == "dt":
                time = {**_DEFAULTS["time"], **doc.get("time", {})}
                span = float(time["t_final"]) - float(time["t_start"])
                dt = float(value)
                if not 0.0 < dt <= span:
                    raise SchemaError("overrides.dt", f"dt must lie in (0, {span}]")
                doc.setdefault("time", {})["steps"] = max(1, round(span / dt))
            elif key == "alpha":
                doc.setdefault("geometry", {})["alpha"] = float(value)
            elif key == "t_min":
                doc.setdefault("geometry", {})["t_min"] = float(value)
            elif key == "lambda":
                doc.setdefault("norms", {})["lambda"] = float(value)
            elif key == "p":
                doc.setdefault("norms", {})["p"] = float(value)
            elif key == "theta":
                doc.setdefault("time", {})["theta"] = float(value)
            elif key == "mode":
                doc.setdefault("mode", {})["mode"] = str(value)
            elif key == "seed":
                doc.setdefault("mode", {})["seed"] = int(value)
        return ProblemConfig.from_dict(doc, self.source)

    def _build_geometry(self):
        geo = self.section("geometry")
        kind = geo["kind"]
        dims = _geometry_dims(geo)
        shape = None
        if "grid" in geo:
            sizes = _as_grid(geo["grid"], "geometry.grid")
            if len(sizes) == 1 and dims > 1:
                sizes = sizes * dims
            if len(sizes) != dims:
                raise SchemaError("geometry.grid",
                                  f"needs 1 or {dims} sizes, got {len(sizes)}")
            shape = tuple(sizes)
        delta = None
        if "delta" in geo:
            delta = {_face_from_name(k, f"geometry.delta.{k}"): int(v)
                     for k, v in geo["delta"].items()}
        if kind == "euclidean_box":
            extents = geo.get("extents")
            return make_euclidean_box(dims, extents=extents, shape=shape, delta=delta)
        if kind == "poincare_ball":
            annulus = tuple(geo.get("annulus", (0.2, 0.8)))
            kwargs = {}
            if "theta_span" in geo:
                kwargs["theta_span"] = tuple(geo["theta_span"])
            return make_poincare_ball(dims, annulus=annulus, shape=shape,
                                      delta=delta, **kwargs)
        t_min = float(geo.get("t_min", 0.1 if kind in ("cusp", "wedge") else 1.0))
        if kind == "cusp":
            t_max = float(geo.get("t_max", 1.0))
            return make_cusp(float(geo.get("alpha", 1.0)),
                             base=geo.get("base", "point_pair"),
                             t_interval=(t_min, t_max), shape=shape, delta=delta,
                             chart_metric=geo.get("chart_metric", "embedded"))
        if kind == "infinite_cusp":
            t_max = float(geo.get("t_max", 4.0))
            return make_infinite_cusp(float(geo.get("alpha", -1.0)),
                                      base=geo.get("base", "point_pair"),
                                      t_interval=(max(t_min, 1.0), t_max),
                                      shape=shape, delta=delta)
        if kind == "funnel":
            t_lo = float(geo.get("t_min", 1.5))
            t_max = float(geo.get("t_max", 4.0))
            return make_funnel(float(geo.get("alpha", 0.0)),
                               base=geo.get("base", "point_pair"),
                               t_interval=(t_lo, t_max), shape=shape, delta=delta)
        if kind == "wedge":
            t_max = float(geo.get("t_max", 1.0))
            return make_wedge(float(geo.get("alpha", 1.0)),
                              t_interval=(t_min, t_max),
                              w_halfwidth=geo.get("w_halfwidth"),
                              shape=shape or (33, 17), delta=delta)
        raise SchemaError("geometry.kind", f"unhandled kind {kind!r}")

    def build(self) -> ProblemSpec:
        manifold, datum = self._build_geometry()
        grid = manifold.chart
        m = grid.m
        variables = _expr_variables(m)
        rho_vals = datum.values()
        base_env = {f"x{i+1}": grid.coords[i] for i in range(m)}
        base_env["rho"] = rho_vals

        def grid_eval(expr: Expression, t: float) -> np.ndarray:
            return np.broadcast_to(expr(t=float(t), **base_env), grid.shape).astype(np.float64)

        def face_env(face: Face) -> dict:
            sl = grid.face_slicer(face)
            env = {f"x{i+1}": grid.coords[i][sl] for i in range(m)}
            env["rho"] = rho_vals[sl]
            return env

        coeffs_doc = self.section("coefficients")
        a_doc = coeffs_doc["a"]
        if isinstance(a_doc, list):
            a_exprs = [compile_expression(s, variables, f"coefficients.a[{i}]")
                       for i, s in enumerate(a_doc)]

            def a_fn(t: float) -> TensorField:
                comp = np.zeros(grid.shape + (m, m))
                for i in range(m):
                    for j in range(m):
                        comp[..., i, j] = grid_eval(a_exprs[i * m + j], t)
                return TensorField(grid, 1, 1, comp)
            time_dep_a = any(e.depends_on("t") for e in a_exprs)
        else:
            a_expr = compile_expression(a_doc, variables, "coefficients.a")

            def a_fn(t: float) -> TensorField:
                vals = grid_eval(a_expr, t)
                comp = np.zeros(grid.shape + (m, m))
                for i in range(m):
                    comp[..., i, i] = vals
                return TensorField(grid, 1, 1, comp)
            time_dep_a = a_expr.depends_on("t")

        av_doc = coeffs_doc.get("a_vec")
        if av_doc is None:
            av_exprs = None

            def av_fn(t: float) -> TensorField:
                return TensorField.vector(grid, np.zeros(grid.shape + (m,)))
            time_dep_av = False
        else:
            av_exprs = [compile_expression(s, variables, f"coefficients.a_vec[{i}]")
                        for i, s in enumerate(av_doc)]

            def av_fn(t: float) -> TensorField:
                comp = np.zeros(grid.shape + (m,))
                for i in range(m):
                    comp[..., i] = grid_eval(av_exprs[i], t)
                return TensorField.vector(grid, comp)
            time_dep_av = any(e.depends_on("t") for e in av_exprs)

        a0_doc = coeffs_doc.get("a0")
        if a0_doc is None:
            def a0_fn(t: float) -> TensorField:
                return TensorField.scalar(grid, np.zeros(grid.shape))
            time_dep_a0 = False
        else:
            a0_expr = compile_expression(a0_doc, variables, "coefficients.a0")

            def a0_fn(t: float) -> TensorField:
                return TensorField.scalar(grid, grid_eval(a0_expr, t))
            time_dep_a0 = a0_expr.depends_on("t")

        delta = dict(manifold.delta)
        flux_faces = sorted(f for f, d in delta.items() if d == 1)
        b0_doc = coeffs_doc.get("b0")
        b0_fns = {}
        time_dep_b0 = False
        for face in flux_faces:
            text = None
            if isinstance(b0_doc, dict):
                text = b0_doc.get(face.name)
            elif b0_doc is not None:
                text = b0_doc
            if text is None:
                continue
            expr = compile_expression(text, variables, f"coefficients.b0.{face.name}")
            time_dep_b0 = time_dep_b0 or expr.depends_on("t")
            env = face_env(face)
            shape = tuple(n for ax, n in enumerate(grid.shape) if ax != face.axis)
            b0_fns[face] = (lambda expr_=expr, env_=env, shape_=shape:
                            (lambda t: np.broadcast_to(expr_(t=float(t), **env_),
                                                       shape_).astype(np.float64)))()

        autonomous = not (time_dep_a or time_dep_av or time_dep_a0 or time_dep_b0)
        coeffs = CoefficientSet(grid, a_fn, av_fn, a0_fn, b0_fns, delta,
                                autonomous=autonomous)

        data_doc = self.section("data")
        time_doc = self.section("time")
        t_start = float(time_doc["t_start"])

        u0_expr = compile_expression(data_doc["u0"], variables, "data.u0")
        u0 = TensorField.scalar(grid, grid_eval(u0_expr, t_start))

        f_fn = None
        if "f" in data_doc:
            f_expr = compile_expression(data_doc["f"], variables, "data.f")

            def f_fn(t: float) -> TensorField:
                return TensorField.scalar(grid, grid_eval(f_expr, t))

        reference = None
        if "reference" in data_doc:
            ref_expr = compile_expression(data_doc["reference"], variables,
                                          "data.reference")

            def reference(t: float) -> TensorField:
                return TensorField.scalar(grid, grid_eval(ref_expr, t))

        h_doc = data_doc.get("h")
        h_fns = {}
        g = manifold.metric
        for face in sorted(delta):
            text = None
            if isinstance(h_doc, dict):
                text = h_doc.get(face.name)
            elif h_doc is not None:
                text = h_doc
            if text is not None:
                expr = compile_expression(text, variables, f"data.h.{face.name}")
                env = face_env(face)
                h_fns[face] = (lambda expr_=expr, env_=env:
                               (lambda t: expr_(t=float(t), **env_)))()
            elif reference is not None:
                if delta[face] == 0:
                    sl = grid.face_slicer(face)
                    h_fns[face] = (lambda sl_=sl, ref_=reference:
                                   (lambda t: ref_(t).components[sl_]))()
                else:
                    h_fns[face] = (lambda face_=face, ref_=reference:
                                   (lambda t: apply_B(ref_(t), coeffs, g, t)
                                    .flux[face_]))()

        data = ProblemData(u0=u0, f=f_fn, h=h_fns, reference=reference)
        time_grid = TimeGrid(t_final=float(time_doc["t_final"]),
                             steps=int(time_doc["steps"]),
                             theta=float(time_doc["theta"]),
                             t_start=t_start)
        norms_doc = self.section("norms")
        norm = NormSpec(p=float(norms_doc["p"]), k=int(norms_doc["k"]),
                        lam=float(norms_doc["lambda"]),
                        which_metric=norms_doc["metric"])
        return ProblemSpec(manifold=manifold, datum=datum, coeffs=coeffs,
                           data=data, time=time_grid, norm=norm,
                           mode=self.mode, name=manifold.name)


def load_problem_config(path) -> ProblemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(str(path), f"cannot read spec file: {exc}") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(str(path), f"not valid TOML: {exc}") from None
    return ProblemConfig.from_dict(doc, source=str(path))
