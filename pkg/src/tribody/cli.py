"""Command-line front end: scenario configs, solves, sweeps, verification.

Configs are YAML (JSON parses too); run reports are JSON with full-precision
floats so a report can be re-verified without losing a bit.  Trajectory and
sweep tables are comma-separated with fixed column orders:

    trajectory: nu, tau, x, y, z, xp, yp, zp, m_s, ux, uy, uz, delta1, delta2
    sweep:      bound_kg, duration_days, fuel_mode1_kg, fuel_mode2_kg,
                fuel_total_kg, switch_count, status

Exit codes: 0 success, 2 config/schema error, 3 solve failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile

import numpy as np
import yaml

from . import dynamics, mission, orbits
from .mesh_refinement import (
    RefinementOptions,
    estimate_error,
    transfer_jumps,
)
from .nlp import SolverOptions
from .problem import ThrottleDomain
from .transcription import (
    CollocationSolution,
    PhaseMesh,
    default_mesh,
    rebuild_phase,
    transcribe,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_SOLVE = 3
EXIT_VERIFY = 4

OUT_DIR_ENV = "TRIBODY_OUT_DIR"
REPORT_SCHEMA = "tribody-run-report/1"

TRAJECTORY_COLUMNS = (
    "nu", "tau", "x", "y", "z", "xp", "yp", "zp",
    "m_s", "ux", "uy", "uz", "delta1", "delta2",
)
SWEEP_COLUMNS = (
    "bound_kg", "duration_days", "fuel_mode1_kg", "fuel_mode2_kg",
    "fuel_total_kg", "switch_count", "status",
)


class SchemaError(ValueError):
    """Config or report fails structural validation."""


# ----------------------------------------------------------------------
# config schema

_REFINEMENT_KEYS = {f.name for f in dataclasses.fields(RefinementOptions)}
_SOLVER_KEYS = {f.name for f in dataclasses.fields(SolverOptions)} - {"log_stream"}

_SCHEMA = {
    "system": None,
    "spacecraft": None,
    "orbits": {"initial": None, "terminal": None},
    "solve": {
        "mode": None,
        "bound_kg": None,
        "sweep_kg": None,
        "structure": None,
        "two_stage": None,
        "n_periods_each": None,
        "min_altitudes": None,
        "mesh": {"intervals": None, "degree": None},
        "refinement": {k: None for k in _REFINEMENT_KEYS},
        "solver": {k: None for k in _SOLVER_KEYS},
    },
    "output": {"directory": None, "basename": None, "trajectory_samples": None},
}


def _check_keys(block, schema, path):
    if block is None:
        return
    if not isinstance(block, dict):
        raise SchemaError(f"config section {path or '<root>'} must be a mapping")
    for key, val in block.items():
        if key not in schema:
            where = f"{path}.{key}" if path else key
            raise SchemaError(f"unknown config key {where!r}")
        sub = schema[key]
        if isinstance(sub, dict) and isinstance(val, dict):
            _check_keys(val, sub, f"{path}.{key}" if path else key)


def load_config(path) -> dict:
    """Parse and validate a scenario config file."""
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise SchemaError(f"config is not valid YAML: {exc}") from exc
    return validate_config(cfg or {})


def validate_config(cfg: dict) -> dict:
    """Reject unknown keys; fill in defaults; sanity-check value shapes."""
    _check_keys(cfg, _SCHEMA, "")
    solve = dict(cfg.get("solve") or {})
    orbs = dict(cfg.get("orbits") or {})
    out = {
        "system": cfg.get("system", "earth-moon"),
        "spacecraft": cfg.get("spacecraft", "case1"),
        "orbits": {
            "initial": orbs.get("initial", "l2-southern-halo"),
            "terminal": orbs.get("terminal", "nrho"),
        },
        "solve": solve,
        "output": dict(cfg.get("output") or {}),
    }
    mode = solve.setdefault("mode", "mode1")
    if mode not in ("mode1", "mode2", "multi"):
        raise SchemaError(f"solve.mode must be mode1|mode2|multi, got {mode!r}")
    structure = solve.setdefault("structure", "single")
    if structure not in ("single", "partitioned"):
        raise SchemaError(
            f"solve.structure must be single|partitioned, got {structure!r}"
        )
    bound = solve.get("bound_kg")
    if bound is not None and not (isinstance(bound, (int, float)) and bound > 0):
        raise SchemaError("solve.bound_kg must be a positive number")
    sweep = solve.get("sweep_kg")
    if sweep is not None:
        if not isinstance(sweep, (list, tuple)) or not sweep:
            raise SchemaError("solve.sweep_kg must be a non-empty list")
        if any(not isinstance(b, (int, float)) or b <= 0 for b in sweep):
            raise SchemaError("solve.sweep_kg entries must be positive numbers")
    solve.setdefault("two_stage", structure == "partitioned")
    mesh = solve.setdefault("mesh", {})
    mesh.setdefault("intervals", 10)
    mesh.setdefault("degree", 4)
    solve.setdefault("refinement", {})
    solve.setdefault("solver", {})
    samples = out["output"].get("trajectory_samples")
    if samples is not None and (not isinstance(samples, int) or samples < 2):
        raise SchemaError("output.trajectory_samples must be an integer >= 2")
    return out


# ----------------------------------------------------------------------
# shared plumbing


def _resolve_out_dir(flag_value):
    out = flag_value or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_atomic(path, text):
    """Write through a sibling temp file and rename into place."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    """Full-precision numeric text (round-trips to the same float)."""
    return repr(float(x))


def _write_json(path, obj):
    _write_atomic(path, json.dumps(obj, indent=1) + "\n")


def _write_csv(path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, str) else _fmt(v) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _problem_from_config(cfg: dict):
    solve = cfg["solve"]
    try:
        return mission.build_problem(
            system=cfg["system"],
            spacecraft=cfg["spacecraft"],
            initial_orbit=cfg["orbits"]["initial"],
            terminal_orbit=cfg["orbits"]["terminal"],
            mode=solve["mode"],
            bound_kg=solve.get("bound_kg"),
            structure=solve["structure"],
            min_altitudes=tuple(solve.get("min_altitudes", (500.0, 200.0))),
            n_periods_each=float(solve.get("n_periods_each", 1.0)),
        )
    except (ValueError, TypeError, KeyError, FileNotFoundError) as exc:
        raise SchemaError(f"config does not build a valid problem: {exc}") from exc


def _options_from_config(cfg: dict, tolerance=None):
    solve = cfg["solve"]
    try:
        refinement = RefinementOptions(**solve["refinement"])
        solver = SolverOptions(**solve["solver"])
    except TypeError as exc:
        raise SchemaError(f"bad option block: {exc}") from exc
    if tolerance is not None:
        refinement = dataclasses.replace(refinement, state_error_tol=float(tolerance))
    mesh_cfg = solve["mesh"]
    return refinement, solver, int(mesh_cfg["intervals"]), int(mesh_cfg["degree"])


# ----------------------------------------------------------------------
# report emission


def _phase_record(ps) -> dict:
    return {
        "kind": ps.kind,
        "domain": [ps.domain.mode1, ps.domain.mode2] if ps.domain else None,
        "nu0": ps.nu0,
        "nuf": ps.nuf,
        "mesh": {
            "fractions": [float(f) for f in ps.mesh.fractions],
            "degrees": [int(d) for d in ps.mesh.degrees],
        },
        "states": ps.states.tolist(),
        "controls": ps.controls.tolist(),
    }


def solution_record(sol: CollocationSolution) -> dict:
    """JSON-ready encoding of a collocated solution (lossless floats)."""
    return {
        "objective": float(sol.objective),
        "q": float(sol.q),
        "statics": [float(s) for s in sol.statics],
        "phases": [_phase_record(ps) for ps in sol.phases],
    }


def solution_from_record(rec: dict) -> CollocationSolution:
    phases = []
    for pr in rec["phases"]:
        mesh = PhaseMesh(
            fractions=tuple(pr["mesh"]["fractions"]),
            degrees=tuple(pr["mesh"]["degrees"]),
        )
        phases.append(
            rebuild_phase(
                kind=pr["kind"],
                domain=ThrottleDomain(*pr["domain"]) if pr["domain"] else None,
                nu0=pr["nu0"],
                nuf=pr["nuf"],
                mesh=mesh,
                states=np.asarray(pr["states"], dtype=float),
                controls=np.asarray(pr["controls"], dtype=float),
            )
        )
    return CollocationSolution(
        phases=phases,
        statics=np.asarray(rec["statics"], dtype=float),
        q=float(rec["q"]),
        objective=float(rec["objective"]),
    )


def _refinement_record(result) -> dict:
    return {
        "converged": bool(result.converged),
        "iterations": int(result.iterations),
        "nlp_status": result.nlp_solution.status,
        "nlp_iterations": int(result.nlp_solution.iterations),
        "feasibility": float(result.nlp_solution.feasibility),
        "stationarity": float(result.nlp_solution.stationarity),
        "history": [
            {
                "max_error": float(rep.global_max),
                "jumps": [float(j) for j in rep.jumps],
            }
            for rep in result.history
        ],
        "mesh": [
            {
                "fractions": [float(f) for f in m.fractions],
                "degrees": [int(d) for d in m.degrees],
            }
            for m in result.mesh
        ],
    }


def run_report(cfg: dict, ts: mission.TransferSolution, baseline=None) -> dict:
    rep = {
        "schema": REPORT_SCHEMA,
        "scenario": cfg,
        "status": "converged" if ts.converged else ts.refinement.nlp_solution.status,
        "objective": float(ts.objective),
        "metrics": ts.metrics,
        "refinement": _refinement_record(ts.refinement),
        "solution": solution_record(ts.solution),
    }
    if baseline is not None:
        rep["baseline"] = {
            "objective": float(baseline.objective),
            "metrics": baseline.metrics,
            "jumps": [float(j) for j in transfer_jumps(baseline.solution)],
        }
    return rep


def _coast_mass(sol: CollocationSolution, ps) -> float:
    """Physical spacecraft mass fraction along a coast arc."""
    transfers = [p for p in sol.phases if p.kind == "transfer"]
    if ps is sol.phases[0]:
        return 1.0
    return float(transfers[-1].states[-1, 7])


def trajectory_rows(sol: CollocationSolution, phase: int, samples: int = 200):
    """Dense plot-ready rows for one phase in the fixed column order."""
    ps = sol.phases[phase]
    nus = np.linspace(ps.nu0, ps.nuf, samples)
    rows = []
    mass = _coast_mass(sol, ps) if ps.kind == "coast" else None
    for nu in nus:
        st = ps.eval_state(nu)
        ctrl = ps.eval_control(nu)
        if ps.kind == "coast":
            m_s = mass
        else:
            m_s = st[7]
        rows.append(
            [nu, st[6], st[0], st[1], st[2], st[3], st[4], st[5], m_s, *ctrl]
        )
    return rows


def write_solution_files(out_dir, basename, report, ts, samples=200):
    paths = {}
    report_path = os.path.join(out_dir, f"{basename}.report.json")
    _write_json(report_path, report)
    paths["report"] = report_path
    for k in range(len(ts.solution.phases)):
        p = os.path.join(out_dir, f"{basename}.phase{k}.csv")
        _write_csv(p, TRAJECTORY_COLUMNS, trajectory_rows(ts.solution, k, samples))
        paths[f"phase{k}"] = p
    return paths


# ----------------------------------------------------------------------
# commands


def cmd_solve(cfg, out_dir=".", tolerance=None, dry_run=False, jobs=1):
    """Baseline or constrained solve per config; emits report + CSVs."""
    del jobs  # a single solve has one NLP chain; accepted for symmetry
    refinement, solver, n_int, degree = _options_from_config(cfg, tolerance)
    solve_cfg = cfg["solve"]
    bound = solve_cfg.get("bound_kg")
    two_stage = bool(solve_cfg.get("two_stage")) and bound is not None

    if dry_run:
        prob = _problem_from_config(cfg)
        tr = transcribe(prob, default_mesh(prob.n_phases, n_int, degree))
        print(f"problem {prob.name}: {tr.n} variables, {tr.m} constraint rows")
        for ph in tr.phases:
            print(
                f"  phase {ph.idx} ({ph.kind}): {ph.n_nodes} nodes, "
                f"{ph.n_coll} collocation points, controls {ph.ctrl_names or '-'}"
            )
        return EXIT_OK

    baseline = None
    if two_stage:
        base_cfg = dict(cfg)
        base_cfg["solve"] = {**solve_cfg, "structure": "single", "bound_kg": None}
        prob1 = _problem_from_config(base_cfg)
        baseline = mission.solve_baseline(
            prob1,
            mesh=default_mesh(prob1.n_phases, n_int, degree),
            refinement=refinement,
            solver=solver,
        )
        if not baseline.converged:
            print(
                "stage-1 baseline failed: "
                f"{baseline.refinement.nlp_solution.status}",
                file=sys.stderr,
            )
            return EXIT_SOLVE
        # Switch structure must be read off a structure-free solve that
        # already carries the propellant bound: the unconstrained
        # baseline saturates the throttle with no switches at all, so it
        # only serves as the warm start here.
        free_cfg = dict(cfg)
        free_cfg["solve"] = {**solve_cfg, "structure": "single"}
        prob_free = _problem_from_config(free_cfg)
        free = mission.solve_constrained(
            prob_free,
            warm_start=baseline,
            refinement=refinement,
            solver=solver,
        )
        jumps = (
            mission.transfer_jumps(free.solution) if free.converged else []
        )
        if free.converged and jumps:
            prob = mission.partition_from_structure(prob_free, free, jumps)
            ts = mission.solve_constrained(
                prob,
                mesh=default_mesh(prob.n_phases, n_int, degree),
                refinement=refinement,
                solver=solver,
            )
        else:
            prob, ts = prob_free, free
    else:
        prob = _problem_from_config(cfg)
        runner = mission.solve_constrained if bound is not None else mission.solve_baseline
        ts = runner(
            prob,
            mesh=default_mesh(prob.n_phases, n_int, degree),
            refinement=refinement,
            solver=solver,
        )

    report = run_report(cfg, ts, baseline)
    basename = cfg["output"].get("basename") or prob.name
    samples = int(cfg["output"].get("trajectory_samples", 200))
    paths = write_solution_files(out_dir, basename, report, ts, samples)
    m = ts.metrics
    print(
        f"{report['status']}: J={ts.objective:.6f} "
        f"({m['transfer_duration_days']:.3f} d transfer, "
        f"fuel {m['fuel_total_kg']:.3f} kg) -> {paths['report']}"
    )
    return EXIT_OK if ts.converged else EXIT_SOLVE


def cmd_sweep(cfg, out_dir=".", tolerance=None, jobs=1):
    """Continuation over the configured propellant bounds; emits sweep CSV."""
    del jobs  # one warm-start chain is inherently sequential
    solve_cfg = cfg["solve"]
    sweep = solve_cfg.get("sweep_kg")
    if not sweep:
        raise SchemaError("sweep requires a non-empty solve.sweep_kg list")
    bounds = [float(b) for b in sweep]
    if any(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise SchemaError("solve.sweep_kg must decrease strictly")
    refinement, solver, n_int, degree = _options_from_config(cfg, tolerance)

    base_cfg = dict(cfg)
    base_cfg["solve"] = {**solve_cfg, "structure": "single", "bound_kg": None}
    prob1 = _problem_from_config(base_cfg)
    baseline = mission.solve_baseline(
        prob1,
        mesh=default_mesh(prob1.n_phases, n_int, degree),
        refinement=refinement,
        solver=solver,
    )
    if not baseline.converged:
        print(
            f"baseline failed: {baseline.refinement.nlp_solution.status}",
            file=sys.stderr,
        )
        return EXIT_SOLVE

    rows = []
    try:
        # structure-free solve at the first bound, warm from the
        # baseline; the switch structure comes from this solution
        free = mission.solve_constrained(
            prob1.with_bound(bounds[0]),
            warm_start=baseline,
            refinement=refinement,
            solver=solver,
        )
        first = free
        if free.converged:
            jumps = mission.transfer_jumps(free.solution)
            if jumps:
                first_prob = mission.partition_from_structure(
                    prob1.with_bound(bounds[0]), free, jumps
                )
                first = mission.solve_constrained(
                    first_prob,
                    mesh=default_mesh(first_prob.n_phases, n_int, degree),
                    refinement=refinement,
                    solver=solver,
                )
        status = (
            "converged" if first.converged else first.refinement.nlp_solution.status
        )
    except (ValueError, FloatingPointError, RuntimeError) as exc:
        first, status = None, f"error: {exc}"
    rows.append(mission.summary_row(bounds[0], first, status))
    entries = [(bounds[0], first, status)]
    if len(bounds) > 1 and first is not None:
        entries += mission.continuation_sweep(
            first, bounds[1:], refinement=refinement, solver=solver
        )
        rows += [mission.summary_row(kg, ts, st) for kg, ts, st in entries[1:]]
    elif len(bounds) > 1:
        rows += [mission.summary_row(kg, None, "skipped: no warm start") for kg in bounds[1:]]

    basename = cfg["output"].get("basename") or f"{prob1.name}-sweep"
    csv_path = os.path.join(out_dir, f"{basename}.csv")
    _write_csv(
        csv_path,
        SWEEP_COLUMNS,
        [[r[c] for c in SWEEP_COLUMNS] for r in rows],
    )
    reports = {
        "schema": REPORT_SCHEMA,
        "scenario": cfg,
        "baseline": {"objective": float(baseline.objective), "metrics": baseline.metrics},
        "rows": rows,
    }
    _write_json(os.path.join(out_dir, f"{basename}.report.json"), reports)
    for r in rows:
        print(
            f"  {r['bound_kg']:7.2f} kg  {r['duration_days']:8.4f} d  "
            f"{r['fuel_total_kg']:8.4f} kg  switches={r['switch_count']}  {r['status']}"
        )
    ok = [r for r in rows if r["status"] == "converged"]
    print(f"{len(ok)}/{len(rows)} bounds converged -> {csv_path}")
    return EXIT_OK if ok else EXIT_SOLVE


def cmd_orbits_verify(cfg=None, tolerance=None):
    """Jacobi-constant and one-period closure checks for the catalog pair."""
    tol_closure = 1e-6 if tolerance is None else float(tolerance)
    if cfg is None:
        pair = orbits.catalog()
    else:

        def _orbit(spec):
            try:
                return orbits.by_label(spec)
            except KeyError:
                return orbits.read_orbit_file(spec)

        pair = [_orbit(cfg["orbits"]["initial"]), _orbit(cfg["orbits"]["terminal"])]
    sysp = dynamics.earth_moon()
    failed = False
    for orb in pair:
        jac = float(dynamics.jacobi_constant(sysp, orb.state))
        jac_err = abs(jac - orb.jacobi) / max(1.0, abs(orb.jacobi))
        traj = orbits.orbit_trajectory(orb, revs=1.0, sys=sysp, tol=1e-10)
        resid = np.abs(traj.eval(orb.period) - orb.state)
        ok = jac_err <= 1e-10 and np.all(resid <= tol_closure)
        failed |= not ok
        print(f"{orb.label}: {'pass' if ok else 'FAIL'}")
        print(f"  jacobi stored={orb.jacobi!r} computed={jac!r} rel_err={jac_err:.3e}")
        print(
            "  closure residuals: "
            + " ".join(f"{r:.3e}" for r in resid)
            + f" (gate {tol_closure:g})"
        )
    return EXIT_OK if not failed else EXIT_VERIFY


def cmd_verify_solution(report_path, tolerance=None):
    """Re-propagate each phase of a stored report with its own controls."""
    tol = 1e-6 if tolerance is None else float(tolerance)
    try:
        with open(report_path) as fh:
            report = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read report: {exc}") from exc
    if report.get("schema") != REPORT_SCHEMA:
        raise SchemaError(
            f"not a run report (schema {report.get('schema')!r}, "
            f"expected {REPORT_SCHEMA!r})"
        )
    cfg = validate_config(report["scenario"])
    prob = _problem_from_config(cfg)
    sol = solution_from_record(report["solution"])
    est = estimate_error(sol, prob.sys, prob.sc)
    worst_phase, worst_iv, worst = est.worst()
    bad = [
        (p, k, float(e))
        for p, errs in enumerate(est.phase_errors)
        for k, e in enumerate(errs)
        if e > tol
    ]
    if bad:
        print(f"verification FAILED: max relative error {worst:.3e} > {tol:g}")
        for p, k, e in bad:
            lo, hi = sol.phases[p].intervals[k]["frac_a"], sol.phases[p].intervals[k]["frac_b"]
            print(f"  phase {p} interval {k} (fraction {lo:.3f}-{hi:.3f}): {e:.3e}")
        return EXIT_VERIFY
    print(
        f"verification passed: max relative error {worst:.3e} <= {tol:g} "
        f"(phase {worst_phase}, interval {worst_iv})"
    )
    return EXIT_OK


# ----------------------------------------------------------------------
# argument parsing


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="tribody",
        description="Minimum-time multi-mode transfers between Earth-Moon "
        "three-body periodic orbits.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument(
            "--config", required=config_required, help="scenario config (YAML)"
        )
        p.add_argument(
            "--out",
            default=None,
            help=f"output directory (default ${OUT_DIR_ENV} or '.')",
        )
        p.add_argument(
            "--jobs", type=int, default=1, help="worker budget for parallel stages"
        )

    p = sub.add_parser("solve", help="run one baseline/constrained solve")
    common(p)
    p.add_argument(
        "--tolerance", type=float, default=None, help="mesh state-error tolerance"
    )
    p.add_argument(
        "--dry-run",
        action="store_true",
        help="transcribe and report problem dimensions without solving",
    )

    p = sub.add_parser("sweep", help="continuation over propellant bounds")
    common(p)
    p.add_argument(
        "--tolerance", type=float, default=None, help="mesh state-error tolerance"
    )

    p = sub.add_parser("orbits-verify", help="check catalog orbits")
    common(p, config_required=False)
    p.add_argument(
        "--tolerance", type=float, default=None, help="closure residual gate"
    )

    p = sub.add_parser("verify-solution", help="re-propagate a stored report")
    p.add_argument("report", help="path to a *.report.json from 'solve'")
    p.add_argument(
        "--tolerance", type=float, default=None, help="max relative error gate"
    )
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            cfg = load_config(args.config)
            if args.jobs < 1:
                raise SchemaError("--jobs must be at least 1")
            return cmd_solve(
                cfg,
                out_dir=_resolve_out_dir(args.out),
                tolerance=args.tolerance,
                dry_run=args.dry_run,
                jobs=args.jobs,
            )
        if args.command == "sweep":
            cfg = load_config(args.config)
            if args.jobs < 1:
                raise SchemaError("--jobs must be at least 1")
            return cmd_sweep(
                cfg,
                out_dir=_resolve_out_dir(args.out),
                tolerance=args.tolerance,
                jobs=args.jobs,
            )
        if args.command == "orbits-verify":
            cfg = load_config(args.config) if args.config else None
            return cmd_orbits_verify(cfg, tolerance=args.tolerance)
        if args.command == "verify-solution":
            return cmd_verify_solution(args.report, tolerance=args.tolerance)
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":  # pragma: no cover - exercised via console script
    sys.exit(main())
