"""Command-line harness: run problem specs, verify invariants, sweep axes.

Exit codes: 0 on success, 1 on a numerical failure (the message names the
failing invariant), 2 on a schema violation (the message carries the
offending field path; argparse usage errors share this code).

Report files are deterministic: identical spec and seed produce
byte-identical results.csv.  Wall-clock timings stay out of results.csv
unless --timings is given; measured times always go to timings.csv,
which is exempt from the byte-identity contract.  DESING_THREADS sets the
worker count for sweeps; DESING_NUMBA selects the compiled kernel backend.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import backend
from .errors import (DesingError, NumericalAssertionError, SchemaError)
from .problem_io import ProblemConfig, load_problem_config
from .registry import EXPERIMENTS, run_experiment
from .reports import (RESULTS_COLUMNS, make_run_id, write_csv, write_experiment,
                      write_json)
from .solver import solve_ibvp

log = logging.getLogger("desing")

SWEEP_AXES = ("alpha", "lambda", "p", "h", "dt", "t_min")


def _add_override_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", action="append", default=None,
                        help="grid shape, one value per axis (33,17); for a "
                             "1-D problem a comma list is a refinement ladder "
                             "(65,129,257); repeat the flag for a ladder of "
                             "multi-axis shapes")
    parser.add_argument("--dt", type=float, default=None, help="time step")
    parser.add_argument("--dt-levels", type=str, default=None,
                        help="either a count N (halve dt N-1 times from the "
                             "base step) or a comma list of explicit time "
                             "steps")
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="weight exponent of the norm")
    parser.add_argument("--p", type=float, default=None)
    parser.add_argument("--theta", type=float, default=None)
    parser.add_argument("--mode", choices=("direct", "desingularized", "both"),
                        default=None)
    parser.add_argument("--t-min", dest="t_min", type=float, default=None,
                        help="truncation position")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="desing",
        description="degenerate parabolic solver with a rescaling transform")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve one problem spec")
    p_run.add_argument("spec", help="problem spec file (TOML)")
    _add_override_args(p_run)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", type=Path, default=Path("out"))
    p_run.add_argument("--dump-trajectory", action="store_true")
    p_run.add_argument("--timings", action="store_true",
                       help="also fill the wall_ms column of results.csv")

    p_ver = sub.add_parser("verify", help="run a named verification suite")
    p_ver.add_argument("suite", choices=sorted(EXPERIMENTS) + ["all"])
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--out", type=Path, default=Path("out"))

    p_sw = sub.add_parser("sweep", help="run a spec over a parameter grid")
    p_sw.add_argument("spec", help="problem spec file (TOML)")
    p_sw.add_argument("--axes", nargs="+", required=True, metavar="KEY=V1,V2",
                      help=f"axes out of {SWEEP_AXES}")
    p_sw.add_argument("--seed", type=int, default=None)
    p_sw.add_argument("--out", type=Path, default=Path("out"))
    p_sw.add_argument("--timings", action="store_true")
    return parser


def _parse_grid_token(token: str):
    try:
        return [int(v) for v in str(token).split(",") if v.strip()]
    except ValueError:
        raise SchemaError("overrides.grid",
                          f"expected comma-separated integers, got {token!r}")


def _expand_grid_args(grid_args, m: int):
    """Turns --grid tokens into a ladder of grid shapes.

    Each token lists one value per axis; on a 1-D problem a multi-value
    token is read as a ladder of 1-D levels instead, matching the usual
    convergence-study call `--grid 65,129,257`.
    """
    if not grid_args:
        return [None]
    grids = []
    for token in grid_args:
        vals = _parse_grid_token(token)
        if m == 1 and len(vals) > 1:
            grids.extend([v] for v in vals)
        else:
            grids.append(vals)
    return grids


def _expand_dt_args(dt_levels, dt_flag, base_dt: float):
    """Turns --dt/--dt-levels into a ladder of time steps.

    --dt-levels accepts either a bare integer count N (the base step
    halved N-1 times) or a comma list of explicit steps.
    """
    if not dt_levels:
        return [dt_flag]
    token = dt_levels.strip()
    try:
        if "," not in token and "." not in token:
            count = int(token)
            if count < 1:
                raise SchemaError("overrides.dt_levels", "count must be >= 1")
            start = dt_flag if dt_flag is not None else base_dt
            return [start / 2**k for k in range(count)]
        return [float(v) for v in token.split(",") if v.strip()]
    except ValueError:
        raise SchemaError("overrides.dt_levels",
                          f"expected a count or a comma list, got {token!r}")


def _row_for(run_id: str, problem, result, wall: bool):
    return [
        run_id, problem.manifold.name, None, problem.norm.lam, problem.norm.p,
        problem.grid.spacing[0], problem.time.dt, problem.time.theta,
        problem.mode, result.err_inf, result.err_l2, None, None,
        result.wall_ms if wall else None,
    ]


def _alpha_of(cfg: ProblemConfig):
    return cfg.raw.get("geometry", {}).get("alpha")


def _solve_levels(cfg: ProblemConfig, base_overrides: dict, grids, dts,
                  timings: bool):
    """Solves the cartesian ladder of grid and dt overrides in order."""
    rows, timing_rows, level_meta = [], [], []
    trajectories = []
    seq = 0
    for grid_tok, dt in itertools.product(grids, dts):
        seq += 1
        overrides = dict(base_overrides)
        if grid_tok is not None:
            overrides["grid"] = list(grid_tok)
        if dt is not None:
            overrides["dt"] = float(dt)
        cfg_level = cfg.with_overrides(overrides)
        problem = cfg_level.build()
        result = solve_ibvp(problem)
        run_id = make_run_id("run", seq)
        row = _row_for(run_id, problem, result, timings)
        row[2] = _alpha_of(cfg_level)
        rows.append(row)
        timing_rows.append([run_id, result.wall_ms])
        level_meta.append({
            "run_id": run_id,
            "h": problem.grid.spacing[0],
            "dt": problem.time.dt,
            "err_inf": result.err_inf,
            "err_l2": result.err_l2,
            "diff_sup": result.diff_sup,
        })
        trajectories.append((result, problem))
        log.info("%s: h=%.5g dt=%.5g err_inf=%.4g err_l2=%.4g",
                 run_id, problem.grid.spacing[0], problem.time.dt,
                 result.err_inf, result.err_l2)
    return rows, timing_rows, level_meta, trajectories


def _observed_orders(meta, err_key: str, scale_key: str):
    orders = []
    for a, b in zip(meta, meta[1:]):
        ea, eb = a[err_key], b[err_key]
        ha, hb = a[scale_key], b[scale_key]
        if not all(math.isfinite(v) and v > 0.0 for v in (ea, eb, ha, hb)) or ha == hb:
            orders.append(None)
        else:
            orders.append(math.log(ea / eb) / math.log(ha / hb))
    return orders


def _cmd_run(args) -> int:
    cfg = load_problem_config(args.spec)
    base = {k: v for k, v in (("alpha", args.alpha), ("lambda", args.lam),
                              ("p", args.p), ("theta", args.theta),
                              ("mode", args.mode), ("t_min", args.t_min),
                              ("seed", args.seed)) if v is not None}
    probe = cfg.with_overrides(base).build()
    grids = _expand_grid_args(args.grid, probe.grid.m)
    dts = _expand_dt_args(args.dt_levels, args.dt, probe.time.dt)
    rows, timing_rows, meta, trajectories = _solve_levels(
        cfg, base, grids, dts, args.timings)
    out = Path(args.out)
    write_csv(out / "results.csv", RESULTS_COLUMNS, rows)
    write_csv(out / "timings.csv", ("run_id", "wall_ms"), timing_rows)
    summary = {
        "spec": str(args.spec),
        "seed": cfg.with_overrides(base).seed,
        "levels": meta,
        "backend": backend.active_backend(),
    }
    if len(grids) > 1:
        dt_ref = min(level["dt"] for level in meta)
        space_meta = [level for level in meta if level["dt"] == dt_ref]
        summary["space_orders"] = _observed_orders(space_meta, "err_inf", "h")
    if len(dts) > 1:
        h_ref = min(level["h"] for level in meta)
        time_meta = [level for level in meta if level["h"] == h_ref]
        summary["time_orders"] = _observed_orders(time_meta, "err_inf", "dt")
    write_json(out / "summary.json", summary)
    if args.dump_trajectory:
        result, problem = trajectories[-1]
        payload = {"times": result.times, "trajectory": result.trajectory}
        if result.hat_trajectory is not None:
            payload["hat_trajectory"] = result.hat_trajectory
        np.savez(out / "trajectory.npz", **payload)
    for line in meta:
        print(f"{line['run_id']}: err_inf={line['err_inf']!r} "
              f"err_l2={line['err_l2']!r}")
    print(f"wrote {out / 'results.csv'}")
    return 0


def _cmd_verify(args) -> int:
    names = sorted(EXPERIMENTS) if args.suite == "all" else [args.suite]
    failing = []
    for name in names:
        log.info("running %s (seed %d)", name, args.seed)
        result = run_experiment(name, seed=args.seed)
        write_experiment(args.out, result)
        for check in result.checks:
            status = "PASS" if check.passed else "FAIL"
            value = "" if check.value is None else f" value={check.value:.6g}"
            detail = f" ({check.detail})" if check.detail else ""
            print(f"[{status}] {check.invariant_id}{value}{detail}")
        failing.extend(result.failing())
    if failing:
        raise NumericalAssertionError(
            failing[0], f"{len(failing)} invariant(s) failed: " + ", ".join(failing))
    print(f"all invariants passed ({', '.join(names)})")
    return 0


def _parse_axes(tokens) -> list:
    axes = []
    for token in tokens:
        if "=" not in token:
            raise SchemaError(f"axes.{token}", "expected KEY=V1,V2,...")
        key, _, values = token.partition("=")
        key = key.strip()
        if key not in SWEEP_AXES:
            raise SchemaError(f"axes.{key}", f"must be one of {SWEEP_AXES}")
        try:
            if key == "h":
                vals = [int(v) for v in values.split(",") if v.strip()]
            else:
                vals = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise SchemaError(f"axes.{key}", f"cannot parse values {values!r}") from None
        if not vals:
            raise SchemaError(f"axes.{key}", "needs at least one value")
        axes.append((key, vals))
    return axes


def _cmd_sweep(args) -> int:
    cfg = load_problem_config(args.spec)
    axes = _parse_axes(args.axes)
    threads = max(1, int(os.environ.get("DESING_THREADS", "1")))
    combos = list(itertools.product(*(vals for _, vals in axes)))
    keys = [k for k, _ in axes]

    def job(idx_combo):
        idx, combo = idx_combo
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        for key, value in zip(keys, combo):
            if key == "h":
                overrides["grid"] = [int(value)]
            else:
                overrides[key] = value
        cfg_level = cfg.with_overrides(overrides)
        problem = cfg_level.build()
        result = solve_ibvp(problem)
        run_id = make_run_id("sweep", idx + 1)
        row = _row_for(run_id, problem, result, args.timings)
        row[2] = _alpha_of(cfg_level)
        return row, [run_id, result.wall_ms], dict(zip(keys, combo))

    log.info("sweep over %s: %d runs on %d thread(s)",
             keys, len(combos), threads)
    if threads == 1:
        outputs = [job(ic) for ic in enumerate(combos)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(job, enumerate(combos)))
    rows = [o[0] for o in outputs]
    timing_rows = [o[1] for o in outputs]
    out = Path(args.out)
    write_csv(out / "results.csv", RESULTS_COLUMNS, rows)
    write_csv(out / "timings.csv", ("run_id", "wall_ms"), timing_rows)
    write_json(out / "summary.json", {
        "spec": str(args.spec),
        "axes": {k: v for k, v in axes},
        "runs": [{"run_id": r[0], "combo": o[2]} for r, o in
                 zip(rows, outputs)],
    })
    print(f"wrote {len(rows)} runs to {out / 'results.csv'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        handler = {"run": _cmd_run, "verify": _cmd_verify, "sweep": _cmd_sweep}
        return handler[args.command](args)
    except SchemaError as exc:
        print(f"schema error [{exc.field_path}]: {exc}", file=sys.stderr)
        return 2
    except NumericalAssertionError as exc:
        print(f"numerical failure [{exc.invariant_id}]: {exc}", file=sys.stderr)
        return 1
    except DesingError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
