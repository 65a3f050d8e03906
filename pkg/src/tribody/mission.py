"""Transfer-mission workflows.

Order of operations mirrors how the case studies are produced: a
propellant-unconstrained single-domain solve from a trajectory-stacking
guess establishes the throttle structure; the transfer phase is then
partitioned into fixed-activity domains at the detected switches so the
switch times become smooth decision variables; finally the propellant
bound is walked downward with warm starts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid as _cumtrapz0

from . import dynamics, lgr, orbits
from .mesh_refinement import (
    RefinementOptions,
    RefinementResult,
    refine_loop,
    transfer_jumps,
)
from .nlp import SolverOptions
from .problem import PhaseGuess, ThrottleDomain, TransferGuess, TransferProblem
from .transcription import default_mesh, solution_guess

__all__ = [
    "TransferSolution",
    "build_problem",
    "default_guess",
    "solve_baseline",
    "solve_constrained",
    "partition_from_structure",
    "continuation_sweep",
    "metrics",
]

SECONDS_PER_DAY = 86400.0


def _cumtrapz(y, x):
    return _cumtrapz0(y, x, initial=0.0)

_MODE_DOMAINS = {
    "mode1": ThrottleDomain("free", "off"),
    "mode2": ThrottleDomain("off", "free"),
    "multi": ThrottleDomain("free", "free"),
}

_PARTITION_TEMPLATES = {
    "mode1": (
        ThrottleDomain("on", "off"),
        ThrottleDomain("off", "off"),
        ThrottleDomain("on", "off"),
    ),
    "mode2": (
        ThrottleDomain("off", "on"),
        ThrottleDomain("off", "off"),
        ThrottleDomain("off", "on"),
    ),
    "multi": (
        ThrottleDomain("on", "off"),
        ThrottleDomain("off", "on"),
        ThrottleDomain("on", "off"),
    ),
}


def mode_of(problem: TransferProblem) -> str:
    """Which propulsion selection a problem's domains encode."""
    any1 = any(d.mode1 != "off" for d in problem.domains)
    any2 = any(d.mode2 != "off" for d in problem.domains)
    if any1 and any2:
        return "multi"
    return "mode1" if any1 else "mode2"


@dataclass
class TransferSolution:
    """A solved transfer: problem, refinement output and derived metrics."""

    problem: TransferProblem
    refinement: RefinementResult
    metrics: dict

    @property
    def solution(self):
        return self.refinement.solution

    @property
    def converged(self) -> bool:
        return self.refinement.converged

    @property
    def objective(self) -> float:
        return self.refinement.solution.objective


# ----------------------------------------------------------------------
# problem construction


def build_problem(
    system="earth-moon",
    spacecraft="case1",
    initial_orbit="l2-southern-halo",
    terminal_orbit="nrho",
    mode="mode1",
    bound_kg=None,
    structure="single",
    min_altitudes=(500.0, 200.0),
    n_periods_each: float = 1.0,
    name=None,
) -> TransferProblem:
    """Assemble a TransferProblem from presets or explicit values."""
    if isinstance(system, str):
        if system != "earth-moon":
            raise ValueError(f"unknown system preset {system!r}")
        sysp = dynamics.earth_moon()
    elif isinstance(system, dict):
        sysp = dynamics.SystemParams(**system)
    else:
        sysp = system

    if isinstance(spacecraft, str):
        presets = {
            "case1": dynamics.case1_spacecraft,
            "case2": dynamics.case2_spacecraft,
        }
        if spacecraft not in presets:
            raise ValueError(f"unknown spacecraft preset {spacecraft!r}")
        scp = presets[spacecraft]()
    elif isinstance(spacecraft, dict):
        scp = dynamics.SpacecraftParams(**spacecraft)
    else:
        scp = spacecraft

    def _orbit(spec):
        if isinstance(spec, orbits.PeriodicOrbit):
            return spec
        try:
            return orbits.by_label(spec)
        except KeyError:
            return orbits.read_orbit_file(spec)

    orb0, orbf = _orbit(initial_orbit), _orbit(terminal_orbit)

    if mode not in _MODE_DOMAINS:
        raise ValueError(f"mode must be one of {sorted(_MODE_DOMAINS)}, got {mode!r}")
    if structure == "single":
        domains = (_MODE_DOMAINS[mode],)
    elif structure == "partitioned":
        domains = _PARTITION_TEMPLATES[mode]
    else:
        raise ValueError(f"structure must be 'single' or 'partitioned', got {structure!r}")

    prob = TransferProblem(
        sys=sysp,
        sc=scp,
        initial_orbit=orb0,
        terminal_orbit=orbf,
        domains=domains,
        min_altitudes=tuple(min_altitudes),
        name=name or f"{orb0.label}-to-{orbf.label}-{mode}",
    )
    if bound_kg is not None:
        prob = prob.with_bound(bound_kg)
    prob.guess = default_guess(prob, n_periods_each=n_periods_each)
    return prob


def default_guess(
    problem: TransferProblem,
    n_periods_each: float = 1.0,
    samples: int = 160,
) -> TransferGuess:
    """Trajectory-stacking guess over all phases.

    Both coasts trace half an orbit period (static-parameter guess at the
    branch-cut-safe midpoint); the transfer phase stacks one forward
    revolution of the initial orbit onto one backward revolution of the
    terminal orbit, patched between the half-period points so the guess
    is linkage-consistent at both model switches.
    """
    sysp, scp = problem.sys, problem.sc
    orb0, orbf = problem.initial_orbit, problem.terminal_orbit
    ntau = sysp.n * sysp.t_char0  # nondimensional time units per tau unit
    mode = mode_of(problem)

    # initial coast: half a period forward from the defining state
    traj0 = orbits.orbit_trajectory(orb0, revs=0.5, sys=sysp)
    ts = np.linspace(0.0, 0.5 * orb0.period, samples)
    st = np.column_stack([traj0.eval(ts), ts / ntau])
    nu0 = np.pi  # statics guess (1, 0) puts the departure anomaly here
    nu1 = nu0 + 0.5 * orb0.period
    coast0 = PhaseGuess(s=ts / ts[-1], states=st, nu0=nu0, nuf=nu1)

    # transfer: stacked ballistic revolutions between the half-period points
    half0 = orbits.PeriodicOrbit(
        label=orb0.label + "+half",
        state=orbits.sample_orbit(orb0, 0.5, sysp),
        jacobi=orb0.jacobi,
        period=orb0.period,
    )
    halff = orbits.PeriodicOrbit(
        label=orbf.label + "+half",
        state=orbits.sample_orbit(orbf, 0.5, sysp),
        jacobi=orbf.jacobi,
        period=orbf.period,
    )
    sg = orbits.stacking_guess(half0, halff, n_periods_each, sysp)
    span_t = float(sg.nu_grid[-1])
    tau1 = 0.5 * orb0.period / ntau
    s_full = sg.nu_grid / span_t
    nu_abs = nu1 + sg.nu_grid

    ctrl_t = sg.control_grid.copy()
    if mode == "mode2":
        ctrl_t[:, 4] = ctrl_t[:, 3]
        ctrl_t[:, 3] = 0.0

    # scale the stacked throttle so the propellant consumed over the whole
    # stack stays inside the mass box, then integrate the mass and clock
    # states consistently with the flow and clock rates
    budget = 0.3 if mode != "mode2" else 0.05
    budget = min(budget, 0.95 * problem.q_cap) if mode != "mode2" else budget
    d1_col = 1.0 if mode != "mode2" else 0.0
    d2_col = 0.0 if mode != "mode2" else 1.0
    flow = -np.array(
        [dynamics.mass_flow_rate(sysp, scp, d1_col, d2_col, nu) for nu in nu_abs]
    )
    total_burn = float(np.trapezoid(flow, nu_abs))
    scale = min(1.0, budget / total_burn) if total_burn > 0 else 0.0
    ctrl_t[:, 3] *= scale
    ctrl_t[:, 4] *= scale
    m_col = 1.0 - scale * _cumtrapz(flow, nu_abs)
    clock = np.array(
        [1.0 / (dynamics.angular_rate(sysp, nu) * sysp.t_char0) for nu in nu_abs]
    )
    tau_col = tau1 + _cumtrapz(clock, nu_abs)
    states_t = np.column_stack([sg.state_grid, tau_col, m_col])

    # slice the stacked arc evenly across the throttle domains, resampling
    # so every slice hits its edges exactly
    nd = len(problem.domains)
    edges = np.linspace(0.0, 1.0, nd + 1)
    transfer_phases = []
    for k in range(nd):
        lo, hi = edges[k], edges[k + 1]
        s_loc = np.linspace(0.0, 1.0, max(16, samples // nd))
        s_abs = lo + s_loc * (hi - lo)
        states_k = np.column_stack(
            [np.interp(s_abs, s_full, states_t[:, c]) for c in range(8)]
        )
        ctrl_k = np.column_stack(
            [np.interp(s_abs, s_full, ctrl_t[:, c]) for c in range(5)]
        )
        transfer_phases.append(
            PhaseGuess(
                s=s_loc,
                states=states_k,
                nu0=nu1 + lo * span_t,
                nuf=nu1 + hi * span_t,
                controls=ctrl_k,
            )
        )
    nu2 = nu1 + span_t
    tau2 = float(tau_col[-1])

    # terminal coast: half a period ending at the defining state
    trajf = orbits.orbit_trajectory(orbf, revs=0.5, sys=sysp, backward=True)
    ts = np.linspace(-0.5 * orbf.period, 0.0, samples)
    st = np.column_stack([trajf.eval(ts), tau2 + (ts - ts[0]) / ntau])
    coastf = PhaseGuess(
        s=(ts - ts[0]) / (ts[-1] - ts[0]),
        states=st,
        nu0=nu2,
        nuf=nu2 + 0.5 * orbf.period,
    )

    statics = np.array([1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
    q = scale * total_burn if mode != "mode2" else 0.0
    return TransferGuess(
        phases=[coast0, *transfer_phases, coastf], statics=statics, q=q
    )


# ----------------------------------------------------------------------
# solving


def _run(
    problem: TransferProblem,
    mesh=None,
    refinement: RefinementOptions | None = None,
    solver: SolverOptions | None = None,
    backend: str = "reference",
    on_iteration=None,
) -> TransferSolution:
    if problem.guess is None:
        problem = replace(problem, guess=default_guess(problem))
    mesh = mesh if mesh is not None else default_mesh(problem.n_phases)
    result = refine_loop(
        problem,
        mesh,
        refinement,
        solver_options=solver,
        backend=backend,
        on_iteration=on_iteration,
    )
    return TransferSolution(
        problem=problem,
        refinement=result,
        metrics=metrics(result.solution, problem.sys, problem.sc),
    )


def solve_baseline(
    problem: TransferProblem,
    mesh=None,
    refinement: RefinementOptions | None = None,
    solver: SolverOptions | None = None,
    backend: str = "reference",
    on_iteration=None,
) -> TransferSolution:
    """Propellant-unconstrained minimum-time solve from the stacking guess."""
    if problem.propellant_bound is not None:
        problem = replace(problem, propellant_bound=None)
    return _run(problem, mesh, refinement, solver, backend, on_iteration)


def solve_constrained(
    problem: TransferProblem,
    warm_start: TransferSolution | None = None,
    mesh=None,
    refinement: RefinementOptions | None = None,
    solver: SolverOptions | None = None,
    backend: str = "reference",
    on_iteration=None,
) -> TransferSolution:
    """Solve with the propellant bound active, warm-started if given."""
    if problem.propellant_bound is None:
        raise ValueError("constrained solve requires a propellant bound")
    if warm_start is not None:
        problem = replace(problem, guess=solution_guess(warm_start.solution))
        if mesh is None:
            mesh = warm_start.refinement.mesh
    return _run(problem, mesh, refinement, solver, backend, on_iteration)


# ----------------------------------------------------------------------
# structure partitioning


def partition_from_structure(
    problem: TransferProblem,
    baseline: TransferSolution,
    jumps=None,
) -> TransferProblem:
    """Split the transfer phase at detected throttle switches.

    The single free domain becomes the three fixed-activity domains of
    the detected on-off-on structure; switch anomalies turn into free
    phase boundaries.  Zero detected jumps leave the problem unchanged;
    a jump count other than two falls back to the outermost pair.
    """
    sol = baseline.solution
    if jumps is None:
        jumps = transfer_jumps(sol)
    jumps = sorted(jumps)
    if len(problem.domains) != 1:
        raise ValueError("partitioning expects a single-domain problem")
    if not jumps:
        return problem
    ps = sol.phases[1]
    if len(jumps) != 2:
        warnings.warn(
            f"expected two throttle switches, found {len(jumps)}; "
            "using the outermost pair",
            stacklevel=2,
        )
        if len(jumps) == 1:
            width = ps.nuf - ps.nu0
            jumps = [jumps[0], min(jumps[0] + 0.05 * width, ps.nuf - 1e-6)]
        else:
            jumps = [jumps[0], jumps[-1]]
    j1, j2 = jumps

    template = _PARTITION_TEMPLATES[mode_of(problem)]
    edges = [ps.nu0, j1, j2, ps.nuf]

    base_guess = solution_guess(sol)
    transfer_guesses = []
    for k in range(3):
        a, b = edges[k], edges[k + 1]
        s = np.linspace(0.0, 1.0, 80)
        nus = a + s * (b - a)
        states = np.vstack([ps.eval_state(nu) for nu in nus])
        ctrl = np.vstack([ps.eval_control(nu) for nu in nus])
        dom = template[k]
        ctrl[:, 3] = 1.0 if dom.mode1 == "on" else 0.0
        ctrl[:, 4] = 1.0 if dom.mode2 == "on" else 0.0
        transfer_guesses.append(
            PhaseGuess(s=s, states=states, nu0=a, nuf=b, controls=ctrl)
        )
    guess = TransferGuess(
        phases=[base_guess.phases[0], *transfer_guesses, base_guess.phases[-1]],
        statics=sol.statics.copy(),
        q=sol.q,
    )
    return problem.with_domains(template, guess=guess)


# ----------------------------------------------------------------------
# continuation


def continuation_sweep(
    start: TransferSolution,
    bounds_kg,
    refinement: RefinementOptions | None = None,
    solver: SolverOptions | None = None,
    backend: str = "reference",
    on_entry=None,
):
    """Re-solve at each propellant bound, warm-starting from the previous.

    Returns a list of (bound_kg, TransferSolution or None, status) in the
    order given; failures are recorded and the sweep continues from the
    last good solution.
    """
    bounds = [float(b) for b in bounds_kg]
    if any(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise ValueError("propellant bounds must decrease strictly")
    out = []
    prev = start
    for kg in bounds:
        prob = prev.problem.with_bound(kg)
        try:
            ts = solve_constrained(
                prob,
                warm_start=prev,
                refinement=refinement,
                solver=solver,
                backend=backend,
            )
            status = "converged" if ts.converged else ts.refinement.nlp_solution.status
        except Exception as exc:  # propagate nothing; record and move on
            ts, status = None, f"error: {exc}"
        out.append((kg, ts, status))
        if on_entry is not None:
            on_entry(kg, ts, status)
        if ts is not None and ts.converged:
            prev = ts
    return out


# ----------------------------------------------------------------------
# reporting


def _phase_fuel_kg(ps, sysp, scp):
    """Per-mode propellant burned over one phase, by mesh quadrature."""
    if ps.kind != "transfer":
        return 0.0, 0.0
    span = ps.nuf - ps.nu0
    t1, t2 = scp.tmax_force
    fuel1 = fuel2 = 0.0
    for iv in ps.intervals:
        pts, w = lgr.points_weights(iv["degree"])
        frs = iv["frac_a"] + 0.5 * (pts + 1.0) * (iv["frac_b"] - iv["frac_a"])
        nus = ps.nu0 + frs * span
        dnu = span * (iv["frac_b"] - iv["frac_a"])
        nudot = dynamics.angular_rate(sysp, nus)
        ctrl = ps.controls[iv["coll"]]
        fuel1 += float(np.sum(w * (t1 * ctrl[:, 3] / scp.isp[0]) / (nudot * sysp.g0)) * dnu / 2)
        fuel2 += float(np.sum(w * (t2 * ctrl[:, 4] / scp.isp[1]) / (nudot * sysp.g0)) * dnu / 2)
    return fuel1, fuel2


def metrics(solution, sysp, scp) -> dict:
    """Durations, coast fractions, fuel accounting and switch structure."""
    day = sysp.t_char0 / SECONDS_PER_DAY
    coast0, coastf = solution.phases[0], solution.phases[-1]
    transfers = solution.phases[1:-1]

    def _dtau(ps):
        return float(ps.states[-1, 6] - ps.states[0, 6])

    # the static parameters encode each coast's fraction of its orbit
    # period; the duration equalities make these exact at a solution
    stat = solution.statics
    frac0 = float((np.arctan2(stat[1], stat[0]) + np.pi) / (2 * np.pi))
    fracf = float((np.arctan2(stat[3], stat[2]) + np.pi) / (2 * np.pi))

    arcs = []
    fuel1 = fuel2 = 0.0
    sat_time = thrust_time = 0.0
    for i, ps in enumerate(transfers):
        f1, f2 = _phase_fuel_kg(ps, sysp, scp)
        fuel1 += f1
        fuel2 += f2
        # time-weighted fraction of the transfer at full mode-1 throttle
        span = ps.nuf - ps.nu0
        for iv in ps.intervals:
            pts, w = lgr.points_weights(iv["degree"])
            frs = iv["frac_a"] + 0.5 * (pts + 1.0) * (iv["frac_b"] - iv["frac_a"])
            nus = ps.nu0 + frs * span
            dnu = span * (iv["frac_b"] - iv["frac_a"])
            clock = 1.0 / (dynamics.angular_rate(sysp, nus) * sysp.t_char0)
            d1 = ps.controls[iv["coll"], 3]
            thrust_time += float(np.sum(w * clock) * dnu / 2)
            sat_time += float(np.sum(w * clock * (d1 >= 0.99)) * dnu / 2)
        arcs.append(
            {
                "domain": i,
                "mode1": ps.domain.mode1,
                "mode2": ps.domain.mode2,
                "duration_days": _dtau(ps) * day,
                "nu_span": (ps.nu0, ps.nuf),
                "fuel_mode1_kg": f1,
                "fuel_mode2_kg": f2,
            }
        )

    m_end = float(transfers[-1].states[-1, 7])
    return {
        "objective": float(solution.objective),
        "transfer_duration_days": float(solution.objective) * day,
        "total_duration_days": float(coastf.states[-1, 6]) * day,
        "coast_initial_days": _dtau(coast0) * day,
        "coast_initial_percent": 100.0 * frac0,
        "coast_terminal_days": _dtau(coastf) * day,
        "coast_terminal_percent": 100.0 * fracf,
        "arcs": arcs,
        "fuel_mode1_kg": fuel1,
        "fuel_mode2_kg": fuel2,
        "fuel_total_kg": fuel1 + fuel2,
        "mode1_saturation_fraction": sat_time / thrust_time if thrust_time else 0.0,
        "propellant_integral_kg": float(solution.q) * scp.m0,
        "mass_final": m_end,
        "mass_budget_residual": abs(m_end - (1.0 - (fuel1 + fuel2) / scp.m0)),
        "switch_count": len(transfer_jumps(solution)),
        "interface_anomalies": (
            float(transfers[0].nu0),
            float(transfers[-1].nuf),
        ),
        "interface_times": (
            float(transfers[0].states[0, 6]),
            float(transfers[-1].states[-1, 6]),
        ),
        "departure_fraction": frac0,
        "arrival_fraction": fracf,
        "statics": [float(s) for s in stat],
    }


def summary_row(bound_kg, ts: TransferSolution | None, status: str) -> dict:
    """One sweep-table row (plot-ready)."""
    if ts is None:
        return {
            "bound_kg": bound_kg,
            "status": status,
            "duration_days": float("nan"),
            "fuel_mode1_kg": float("nan"),
            "fuel_mode2_kg": float("nan"),
            "fuel_total_kg": float("nan"),
            "switch_count": -1,
        }
    m = ts.metrics
    return {
        "bound_kg": bound_kg,
        "status": status,
        "duration_days": m["transfer_duration_days"],
        "fuel_mode1_kg": m["fuel_mode1_kg"],
        "fuel_mode2_kg": m["fuel_mode2_kg"],
        "fuel_total_kg": m["fuel_total_kg"],
        "switch_count": m["switch_count"],
    }
