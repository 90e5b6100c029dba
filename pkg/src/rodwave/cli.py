"""Configuration-driven entry point: solve, sweep, verify.

Configs are UTF-8 JSON.  Keys:

    N, M            mesh numbers (required)
    P               samples per reference piece (odd, default 129)
    preset          "paper_example" | "zero" | "trig"
    preset_params   for "trig": {"v0": [amp, freq], "r0": ..., "v1": ...,
                    "r1": ...} (missing profiles are zero)
    profiles        {"v0": csv_path, ...}; accepts p0/p1 in place of r0/r1
                    (cumulative integration, c0 = 0)
    solver          "qp" | "el" | "both" (default "both")
    oracle          true/false (default false)
    oracle_points_per_segment, oracle_cfl
    field_samples   samples per half-layer of the output field grid
    out_dir         artifact directory
    dump_matrices   true/false

Exit codes: 0 success, 2 configuration error, 3 infeasible horizon,
4 invariant violation.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import datetime
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (
    ConfigurationError,
    InfeasibleError,
    InvariantViolationError,
    ReconstructionError,
    RodwaveError,
)
from .mesh import MeshConfig, RodParams, build_mesh, counts
from .sampled import SampledFunction
from .edge import (
    StateSpec,
    assemble_edge_constraints,
    assemble_vertex_conditions,
    boundary_matrices,
    eliminate,
    feasibility_check,
)
from .energy import assemble_qp, build_weights, mean_energy
from .solver import compare_solvers, solve_euler_lagrange, solve_qp
from . import reconstruct as rec
from .oracle import SimConfig, compare as oracle_compare, simulate, write_sim_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INVARIANT = 4

_KNOWN_KEYS = {
    "N", "M", "P", "preset", "preset_params", "profiles", "solver",
    "oracle", "oracle_points_per_segment", "oracle_cfl", "field_samples",
    "out_dir", "dump_matrices",
}
_PRESETS = ("paper_example", "zero", "trig")


@dataclass
class RunConfig:
    N: int
    M: int
    P: int = 129
    preset: Optional[str] = None
    preset_params: dict = field(default_factory=dict)
    profiles: dict = field(default_factory=dict)
    solver: str = "both"
    oracle: bool = False
    oracle_points_per_segment: int = 125
    oracle_cfl: float = 0.9
    field_samples: Optional[int] = None
    out_dir: str = "."
    dump_matrices: bool = False


def validate_config(raw) -> RunConfig:
    """Schema-check a JSON text or dict; every violation is reported with
    its key path.  Feasibility of the horizon is a run-time concern, not a
    parse-time one."""
    if isinstance(raw, (str, bytes)):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigurationError([f"not valid JSON: {exc}"])
    else:
        data = dict(raw)
    errors = []
    if not isinstance(data, dict):
        raise ConfigurationError(["top level must be a JSON object"])
    for key in data:
        if key not in _KNOWN_KEYS:
            errors.append(f"{key}: unknown key")

    def geti(key, default=None, minimum=None):
        val = data.get(key, default)
        if val is None:
            errors.append(f"{key}: required")
            return default
        if not isinstance(val, int) or isinstance(val, bool):
            errors.append(f"{key}: must be an integer")
            return default
        if minimum is not None and val < minimum:
            errors.append(f"{key}: must be >= {minimum}")
            return default
        return val

    n = geti("N", minimum=1)
    m = geti("M", minimum=1)
    p = data.get("P", 129)
    if not isinstance(p, int) or p < 5 or p % 2 == 0:
        errors.append("P: must be an odd integer >= 5")
        p = 129
    solver = data.get("solver", "both")
    if solver not in ("qp", "el", "both"):
        errors.append("solver: must be one of qp, el, both")
    preset = data.get("preset")
    if preset is not None and preset not in _PRESETS:
        errors.append(f"preset: unknown preset {preset!r}")
    preset_params = data.get("preset_params", {})
    if not isinstance(preset_params, dict):
        errors.append("preset_params: must be an object")
        preset_params = {}
    profiles = data.get("profiles", {})
    if not isinstance(profiles, dict):
        errors.append("profiles: must be an object")
        profiles = {}
    for key in profiles:
        if key not in ("v0", "r0", "p0", "v1", "r1", "p1"):
            errors.append(f"profiles.{key}: unknown profile")
    if preset is None and not profiles:
        errors.append("preset: either a preset or profiles must be given")
    if preset is not None and profiles:
        errors.append("preset: preset and profiles are mutually exclusive")
    oracle = data.get("oracle", False)
    if not isinstance(oracle, bool):
        errors.append("oracle: must be true or false")
        oracle = False
    opps = data.get("oracle_points_per_segment", 125)
    if not isinstance(opps, int) or opps < 8:
        errors.append("oracle_points_per_segment: integer >= 8")
        opps = 125
    cfl = data.get("oracle_cfl", 0.9)
    if not isinstance(cfl, (int, float)) or not (0 < cfl <= 1):
        errors.append("oracle_cfl: must lie in (0, 1]")
        cfl = 0.9
    fs = data.get("field_samples")
    if fs is not None and (not isinstance(fs, int) or fs < 2):
        errors.append("field_samples: integer >= 2")
        fs = None
    out_dir = data.get("out_dir", ".")
    if not isinstance(out_dir, str):
        errors.append("out_dir: must be a string")
        out_dir = "."
    dump = data.get("dump_matrices", False)
    if not isinstance(dump, bool):
        errors.append("dump_matrices: must be true or false")
        dump = False
    if errors:
        raise ConfigurationError(errors)
    return RunConfig(N=n, M=m, P=p, preset=preset, preset_params=preset_params,
                     profiles=profiles, solver=solver, oracle=oracle,
                     oracle_points_per_segment=opps, oracle_cfl=float(cfl),
                     field_samples=fs, out_dir=out_dir, dump_matrices=dump)


# ---------------------------------------------------------------------------
# State construction
# ---------------------------------------------------------------------------


def _trig(params):
    amp, freq = (list(params) + [0.0, 0.0])[:2]
    return lambda x: amp * np.cos(freq * x)


def build_state(config: RunConfig, mesh: MeshConfig) -> StateSpec:
    if config.preset == "paper_example":
        return StateSpec.from_callables(
            mesh, config.P,
            v0=lambda x: np.cos(3.0 * x), r0=lambda x: -np.cos(3.0 * x),
            v1=lambda x: 0.0 * x, r1=lambda x: 0.0 * x)
    if config.preset == "zero":
        return StateSpec.zero(mesh, config.P)
    if config.preset == "trig":
        pp = config.preset_params
        return StateSpec.from_callables(
            mesh, config.P,
            v0=_trig(pp.get("v0", [0, 0])), r0=_trig(pp.get("r0", [0, 0])),
            v1=_trig(pp.get("v1", [0, 0])), r1=_trig(pp.get("r1", [0, 0])))
    return _state_from_files(config, mesh)


def _read_profile(path) -> SampledFunction:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            rows.append((float(row[0]), float(row[1])))
    rows.sort()
    xs = np.array([r[0] for r in rows])
    ys = np.array([r[1] for r in rows])
    if len(xs) < 2 or xs[0] > -1.0 + 1e-9 or xs[-1] < 1.0 - 1e-9:
        raise ConfigurationError([f"{path}: profile must cover [-1, 1]"])
    p = max(5, len(xs) | 1)
    grid = np.linspace(-1.0, 1.0, p)
    return SampledFunction(-1.0, 1.0, np.interp(grid, xs, ys))


def _state_from_files(config: RunConfig, mesh: MeshConfig) -> StateSpec:
    prof = {k: _read_profile(v) for k, v in config.profiles.items()}
    zero = SampledFunction.zeros(-1.0, 1.0, 5)
    v0 = prof.get("v0", zero)
    v1 = prof.get("v1", zero)
    if "p0" in prof and "r0" in prof:
        raise ConfigurationError(["profiles: give r0 or p0, not both"])
    if "p1" in prof and "r1" in prof:
        raise ConfigurationError(["profiles: give r1 or p1, not both"])
    pd = mesh.N * (config.P - 1) + 1
    grid = np.linspace(-1.0, 1.0, pd)
    onto = lambda f: SampledFunction(-1.0, 1.0, f(grid))
    v0, v1 = onto(v0), onto(v1)
    if "p0" in prof:
        p0 = onto(prof["p0"])
        r0 = p0.cumulative()
    else:
        p0 = None
        r0 = onto(prof.get("r0", zero))
    if "p1" in prof:
        p1 = onto(prof["p1"])
        r1 = p1.cumulative()
    else:
        p1 = None
        r1 = onto(prof.get("r1", zero))
    return StateSpec(v0=v0, r0=r0, v1=v1, r1=r1, p0=p0, p1=p1)


# ---------------------------------------------------------------------------
# Single solve
# ---------------------------------------------------------------------------


def solve_pipeline(config: RunConfig, reconstruct: bool = True):
    """Assemble, solve, reconstruct, and collect diagnostics (no I/O)."""
    mesh = build_mesh(config.N, config.M)
    feas = feasibility_check(config.N, config.M)
    if not feas.feasible:
        raise InfeasibleError(feas.reason)
    state = build_state(config, mesh)
    system = assemble_edge_constraints(mesh, state)
    par = eliminate(system)
    bc = boundary_matrices(par, assemble_vertex_conditions(mesh))
    weights = build_weights(mesh, config.P)

    solutions = {}
    if config.solver in ("qp", "both"):
        qp = assemble_qp(par, bc, weights, config.P)
        solutions["qp"] = solve_qp(qp, par, bc, weights)
    if config.solver in ("el", "both"):
        solutions["el"] = solve_euler_lagrange(par, bc, weights, config.P)
    primary = solutions.get("qp", solutions.get("el"))

    comparison = None
    if len(solutions) == 2:
        comparison = compare_solvers(solutions["qp"], solutions["el"], bc)
        if not comparison.qp_not_worse:
            raise InvariantViolationError(
                f"QP objective {comparison.objective_qp} exceeds the "
                f"stationary path's {comparison.objective_el}")

    if not reconstruct:
        return {"mesh": mesh, "state": state, "system": system, "par": par,
                "bc": bc, "weights": weights, "solutions": solutions,
                "primary": primary, "comparison": comparison}

    waves = rec.waves_from_solution(par, primary)
    controls = rec.controls_from_jumps(
        mesh, rec.jump_pieces_from_solution(par, primary))
    fg = rec.fields(waves, controls, mesh,
                    qt=config.field_samples, qx=config.field_samples)
    terr = rec.terminal_error(fg, state)
    q_resid = rec.residual_Q(fg)
    e_grid = mean_energy(fg)
    return {
        "mesh": mesh, "state": state, "system": system, "par": par,
        "bc": bc, "weights": weights, "solutions": solutions,
        "primary": primary, "comparison": comparison, "waves": waves,
        "controls": controls, "fields": fg, "terminal": terr,
        "Q": q_resid, "E_grid": e_grid,
    }


def summarize(config: RunConfig, result: dict) -> dict:
    mesh = result["mesh"]
    sc = counts(config.N, config.M)
    primary = result["primary"]
    terr = result["terminal"]
    controls = result["controls"]
    fg = result["fields"]
    e_val = primary.objective
    summary = {
        "config": {k: v for k, v in asdict(config).items()},
        "feasible": True,
        "N": config.N, "M": config.M, "lambda": mesh.lam, "T": mesh.T,
        "counts": {"N_e": sc.N_e, "N_w": sc.N_w, "N_u": sc.N_u,
                   "N_v": sc.N_v, "N_s": sc.N_s, "N_b": sc.N_b},
        "boundary_rows_kept": result["bc"].rank,
        "guard_rows_kept": result["bc"].guard_rows_kept,
        "E": float(e_val),
        "TE": float(mesh.T * e_val),
        "E_grid": float(result["E_grid"]),
        "Q": float(result["Q"]),
        "terminal_errors": {
            "v0_sup": terr.v0_sup, "r0_sup": terr.r0_sup,
            "v1_sup": terr.v1_sup, "r1_sup": terr.r1_sup,
            "v0_l2": terr.v0_l2, "r0_l2": terr.r0_l2,
            "v1_l2": terr.v1_l2, "r1_l2": terr.r1_l2,
        },
        "terminal_constant": terr.r1_offset,
        "gamma": [float(g) for g in primary.gamma],
        "wave_continuity": result["waves"].continuity_max,
        "control_checks": {
            "zero_start_max": controls.zero_start_max(),
            "zero_sum_max": controls.zero_sum_max(),
            "jump_identity_max": controls.jump_identity_max(),
        },
        "interface_jumps": {"v": fg.interface_jump_v, "r": fg.interface_jump_r},
        "solver": {},
    }
    for name, sol in result["solutions"].items():
        summary["solver"][name] = {
            "objective": sol.objective,
            "diagnostics": {k: (float(v) if isinstance(v, (int, float, np.floating))
                                else str(v))
                            for k, v in sol.diagnostics.items()},
        }
    if result["comparison"] is not None:
        cmp_ = result["comparison"]
        summary["solver"]["comparison"] = {
            "objective_gap": cmp_.gap, "y_diff": cmp_.y_diff,
            "feas_qp": cmp_.feas_qp, "feas_el": cmp_.feas_el,
            "qp_not_worse": cmp_.qp_not_worse,
        }
    return summary


def _run_oracle(config: RunConfig, result: dict, out_dir=None) -> dict:
    mesh, state = result["mesh"], result["state"]
    controls = result["controls"]
    params = RodParams(1.0, 1.0, 1.0)
    base = config.oracle_points_per_segment
    ladder = [max(8, base // 4), max(8, base // 2), base]
    sims = [simulate(mesh, params, controls, state,
                     SimConfig(points_per_segment=npts, cfl=config.oracle_cfl))
            for npts in ladder]
    report = oracle_compare(sims, result["fields"])
    final = sims[-1]
    if out_dir is not None:
        write_sim_csv(final, os.path.join(out_dir, "oracle_terminal.csv"),
                      os.path.join(out_dir, "oracle_energy.csv"))
    return {
        "points_per_segment": ladder,
        "terminal_energy_error": final.terminal_energy_error,
        "terminal_v_sup": final.terminal_v_sup,
        "momentum_budget_max": final.momentum_budget_max,
        "energy_drift": final.energy_drift(),
        "l2_errors": list(report.l2_errors),
        "sup_errors": list(report.sup_errors),
        "convergence_orders": list(report.orders),
        "mean_order": report.mean_order,
    }


def dump_matrices(result: dict, out_dir: str) -> None:
    """Audit dump: integer C, exact rational A, and the free map."""
    system, par = result["system"], result["par"]
    c_mat = system.coefficient_matrix
    with open(os.path.join(out_dir, "edge_C.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in c_mat:
            writer.writerow([str(v) for v in row])
    with open(os.path.join(out_dir, "parametrization_A.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in par.A_frac:
            out = ["0"] * par.n_free
            for j, val in row.items():
                out[j] = str(Fraction(val))
            writer.writerow(out)
    with open(os.path.join(out_dir, "free_map.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y_index", "entry"])
        for j, key in enumerate(par.free_map):
            writer.writerow([j, repr(key)])


def run_solve(config: RunConfig) -> int:
    """Solve one instance and emit summary JSON plus CSV artifacts."""
    os.makedirs(config.out_dir, exist_ok=True)
    summary_path = os.path.join(config.out_dir, "summary.json")
    try:
        result = solve_pipeline(config)
    except InfeasibleError as exc:
        summary = {"config": asdict(config), "feasible": False,
                   "reason": str(exc),
                   "timestamp": datetime.datetime.now().isoformat()}
        _write_json(summary_path, summary)
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ReconstructionError, InvariantViolationError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    summary = summarize(config, result)
    if config.oracle:
        summary["oracle"] = _run_oracle(config, result, out_dir=config.out_dir)
    summary["timestamp"] = datetime.datetime.now().isoformat()
    _write_json(summary_path, summary)
    rec.write_controls_csv(result["controls"],
                           os.path.join(config.out_dir, "controls.csv"))
    rec.write_fields_csv(result["fields"],
                         os.path.join(config.out_dir, "fields.csv"))
    if config.dump_matrices:
        dump_matrices(result, config.out_dir)
    print(f"E = {summary['E']:.9g}  T*E = {summary['TE']:.9g}  "
          f"Q = {summary['Q']:.3g}  worst terminal error = "
          f"{max(summary['terminal_errors'].values()):.3g}")
    return EXIT_OK


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Parameter sweep
# ---------------------------------------------------------------------------


def _sweep_cell(args):
    """Worker: one (M, N) cell; returns a row dict (exceptions captured)."""
    config_dict, m_val, n_val = args
    config = RunConfig(**config_dict)
    config.N, config.M = n_val, m_val
    t0 = time.perf_counter()
    try:
        result = solve_pipeline(config, reconstruct=False)
        primary = result["primary"]
        mesh = result["mesh"]
        return {"M": m_val, "N": n_val, "TE": mesh.T * primary.objective,
                "E": primary.objective, "seconds": time.perf_counter() - t0,
                "status": "ok"}
    except RodwaveError as exc:
        return {"M": m_val, "N": n_val, "TE": float("nan"),
                "E": float("nan"), "seconds": time.perf_counter() - t0,
                "status": f"failed: {exc}"}


def monotonicity_report(rows, slack: float = 1e-9):
    """Check that TE is nonincreasing along each axis; list violations."""
    table = {(r["M"], r["N"]): r["TE"] for r in rows if r["status"] == "ok"}
    violations = []
    for (m_val, n_val), te in sorted(table.items()):
        for key, label in (((m_val - 1, n_val), "M"), ((m_val, n_val - 1), "N")):
            prev = table.get(key)
            if prev is not None and te > prev + slack:
                violations.append(
                    f"TE({m_val},{n_val}) = {te:.12g} exceeds "
                    f"TE{key} = {prev:.12g} (axis {label})")
    return violations


def run_sweep(config: RunConfig, m_range, n_range, workers: Optional[int] = None) -> int:
    """Solve every cell of the (M, N) grid and emit the T*E table."""
    os.makedirs(config.out_dir, exist_ok=True)
    cells = [(asdict(config), m_val, n_val)
             for m_val in range(m_range[0], m_range[1] + 1)
             for n_val in range(n_range[0], n_range[1] + 1)]
    if workers is None:
        workers = min(len(cells), os.cpu_count() or 1)
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(cell) for cell in cells]
    rows.sort(key=lambda r: (r["M"], r["N"]))

    violations = monotonicity_report(rows)
    path = os.path.join(config.out_dir, "sweep.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["M", "N", "TE", "E", "seconds", "status"])
        for r in rows:
            writer.writerow([r["M"], r["N"], f"{r['TE']:.12g}",
                             f"{r['E']:.12g}", f"{r['seconds']:.3f}",
                             r["status"]])
        fh.write("# monotonicity: TE nonincreasing along M and N "
                 f"(slack 1e-09): {'OK' if not violations else 'VIOLATED'}\n")
        for v in violations:
            fh.write(f"# {v}\n")
    print(f"wrote {path} ({len(rows)} cells, "
          f"{len(violations)} monotonicity violations)")
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_INVARIANT


# ---------------------------------------------------------------------------
# Verify battery
# ---------------------------------------------------------------------------


def run_verify(config: RunConfig) -> int:
    """End-to-end verification of one instance: exact steering, energy
    consistency, constitutive residual, control structure, and the
    finite-difference oracle ladder.  The oracle runs at unit Courant
    number (where the scheme is sharpest) and 500 points per segment
    unless the config explicitly overrides those settings."""
    if config.oracle_cfl == 0.9:
        config.oracle_cfl = 1.0
    if config.oracle_points_per_segment == 125:
        config.oracle_points_per_segment = 500
    checks = []

    def check(name, ok, detail=""):
        checks.append(ok)
        print(f"  {'PASS' if ok else 'FAIL'}  {name}{': ' + detail if detail else ''}")

    try:
        result = solve_pipeline(config)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    terr = result["terminal"]
    mesh = result["mesh"]
    e_val = result["primary"].objective
    check("terminal states matched (sup <= 1e-8)", terr.worst() <= 1e-8,
          f"worst {terr.worst():.3e}")
    check("constitutive residual Q <= 1e-6*T*E",
          result["Q"] <= 1e-6 * mesh.T * e_val, f"Q = {result['Q']:.3e}")
    rel = abs(result["E_grid"] - e_val) / max(e_val, 1e-300)
    check("grid energy within 0.5% of objective", rel <= 5e-3, f"rel {rel:.3e}")
    controls = result["controls"]
    check("control integrals start at zero",
          controls.zero_start_max() <= 1e-9)
    check("forces sum to zero", controls.zero_sum_max() <= 1e-9)
    if result["comparison"] is not None:
        check("QP objective <= stationary objective + 1e-8",
              result["comparison"].qp_not_worse)
    oracle = _run_oracle(config, result)
    check("oracle momentum budget exact",
          oracle["momentum_budget_max"] <= 1e-8)
    check("oracle terminal energy error <= 2%",
          oracle["terminal_energy_error"] <= 0.02,
          f"{oracle['terminal_energy_error']:.3e}")
    print(f"{sum(checks)}/{len(checks)} checks passed")
    return EXIT_OK if all(checks) else EXIT_INVARIANT


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _parse_range(text):
    try:
        a, b = text.split(":")
        a, b = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError("range must be A:B")
    if a < 1 or b < a:
        raise argparse.ArgumentTypeError("range must satisfy 1 <= A <= B")
    return a, b


def _load_config(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    else:
        raw = {"N": 4, "M": 4, "preset": "paper_example"}
    if getattr(args, "out", None):
        raw["out_dir"] = args.out
    if getattr(args, "p_grid", None):
        raw["P"] = args.p_grid
    if getattr(args, "solver", None):
        raw["solver"] = args.solver
    if getattr(args, "oracle", False):
        raw["oracle"] = True
    if getattr(args, "dump_matrices", False):
        raw["dump_matrices"] = True
    return validate_config(raw)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rodwave",
        description="Minimal-mean-energy steering of an elastic rod")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config path")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--p-grid", type=int, dest="p_grid",
                        help="samples per reference piece (odd)")
        sp.add_argument("--solver", choices=("qp", "el", "both"))
        sp.add_argument("--oracle", action="store_true",
                        help="run the finite-difference verification")
        sp.add_argument("--dump-matrices", action="store_true",
                        help="emit C, A and the free map as CSV")
        if name == "sweep":
            sp.add_argument("--m-range", type=_parse_range, default=(2, 6))
            sp.add_argument("--n-range", type=_parse_range, default=(2, 6))
            sp.add_argument("--workers", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
    except ConfigurationError as exc:
        for msg in exc.messages:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "solve":
        return run_solve(config)
    if args.command == "sweep":
        return run_sweep(config, args.m_range, args.n_range, args.workers)
    return run_verify(config)


if __name__ == "__main__":
    sys.exit(main())
