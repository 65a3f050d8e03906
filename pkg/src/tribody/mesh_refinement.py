"""hp-adaptive mesh refinement for the collocated transfer problem.

After each NLP solve the collocation polynomials are checked against an
explicit propagation through every interval (same dynamics, interpolated
controls).  Intervals that miss the state error tolerance either gain
polynomial degree or split; windows around detected throttle jumps get
their own tight interval boundaries so bang-bang switches resolve
without wasting points elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import dynamics
from .nlp import SolverOptions, solve
from .propagator import PropagationError, PropagatorOptions, propagate
from .transcription import PhaseMesh, Transcription, solution_guess, transcribe

__all__ = [
    "RefinementOptions",
    "ErrorReport",
    "RefinementResult",
    "estimate_error",
    "detect_jumps",
    "refine",
    "refine_loop",
]


@dataclass(frozen=True)
class RefinementOptions:
    state_error_tol: float = 1e-6
    max_iterations: int = 25
    n_min: int = 2
    n_max: int = 12
    jump_orders: tuple = tuple(range(1, 9))
    jump_threshold: float = 0.2
    bound_safety: float = 1.2
    # explicit-propagation settings for the error estimate
    propagate_tol: float = 1e-10
    samples_per_degree: int = 4


@dataclass
class ErrorReport:
    """Per-interval propagation-vs-collocation errors plus jump locations."""

    phase_errors: list  # one array per phase, one entry per interval
    phase_spans: list  # (nu0, nuf) per phase
    jumps: list = field(default_factory=list)  # throttle jump anomalies

    @property
    def global_max(self) -> float:
        vals = [float(np.max(e)) for e in self.phase_errors if len(e)]
        return max(vals) if vals else 0.0

    def worst(self):
        """(phase, interval, error) of the largest entry."""
        best = (0, 0, -np.inf)
        for p, errs in enumerate(self.phase_errors):
            for k, e in enumerate(errs):
                if e > best[2]:
                    best = (p, k, float(e))
        return best


@dataclass
class RefinementResult:
    solution: object  # CollocationSolution of the accepted iterate
    nlp_solution: object
    transcription: Transcription
    mesh: list
    history: list  # ErrorReport per iteration
    converged: bool
    iterations: int


# ----------------------------------------------------------------------
# error estimation


def _phase_rhs(sysp, scp, ps):
    if ps.kind == "coast":
        return lambda nu, y: dynamics.cr3bp_rhs(sysp, y)

    def rhs(nu, y):
        return dynamics.er3bp_rhs(sysp, scp, y, ps.eval_control(nu), nu)

    return rhs


def estimate_error(solution, sysp, scp, opts: RefinementOptions | None = None):
    """Propagate through every interval and compare with the polynomials.

    Error metric per interval: max over a dense sample of the
    componentwise difference, normalized by one plus the largest
    magnitude of that component over the phase.
    """
    opts = opts or RefinementOptions()
    prop_opts = PropagatorOptions(
        rel_tol=opts.propagate_tol, abs_tol=opts.propagate_tol
    )
    phase_errors = []
    spans = []
    for ps in solution.phases:
        spans.append((ps.nu0, ps.nuf))
        scale = 1.0 + np.max(np.abs(ps.states), axis=0)
        rhs = _phase_rhs(sysp, scp, ps)
        width = ps.nuf - ps.nu0
        errs = np.zeros(len(ps.intervals))
        for k, iv in enumerate(ps.intervals):
            nu_a = ps.nu0 + iv["frac_a"] * width
            nu_b = ps.nu0 + iv["frac_b"] * width
            if abs(nu_b - nu_a) < 1e-14:
                continue
            y0 = ps.states[iv["nodes"][0]]
            try:
                traj = propagate(rhs, y0, (nu_a, nu_b), prop_opts)
            except PropagationError:
                errs[k] = np.inf
                continue
            n_samp = opts.samples_per_degree * iv["degree"] + 1
            sample = np.linspace(nu_a, nu_b, n_samp)[1:]
            worst = 0.0
            for nu in sample:
                diff = np.abs(traj.eval(nu) - ps.eval_state(nu)) / scale
                worst = max(worst, float(np.max(diff)))
            errs[k] = worst
        phase_errors.append(errs)
    return ErrorReport(phase_errors=phase_errors, phase_spans=spans)


# ----------------------------------------------------------------------
# throttle jump detection


def detect_jumps(nus, values, opts: RefinementOptions | None = None):
    """Anomalies where a control component steps between sample windows.

    For each stencil order r, left/right window means around every
    interior sample are compared; a location is flagged when the largest
    windowed difference exceeds the jump threshold.  Contiguous flagged
    samples collapse to the single strongest location.
    """
    opts = opts or RefinementOptions()
    nus = np.asarray(nus, dtype=float)
    vals = np.asarray(values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    n = len(nus)
    if n < 2:
        return []
    score = np.zeros(n)
    for col in range(vals.shape[1]):
        v = vals[:, col]
        for i in range(1, n):
            best = 0.0
            for r in opts.jump_orders:
                lo, hi = i - r, i + r
                if lo < 0 or hi > n:
                    continue
                best = max(best, abs(np.mean(v[i:hi]) - np.mean(v[lo:i])))
            score[i] = max(score[i], best)

    flagged = score > opts.jump_threshold
    jumps = []
    i = 0
    while i < n:
        if not flagged[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and flagged[j + 1]:
            j += 1
        peak = i + int(np.argmax(score[i : j + 1]))
        jumps.append(float(0.5 * (nus[peak - 1] + nus[peak])))
        i = j + 1
    return jumps


def transfer_jumps(solution, opts: RefinementOptions | None = None):
    """Throttle jump anomalies over all thrusting phases of a solution."""
    opts = opts or RefinementOptions()
    jumps = []
    for ps in solution.phases:
        if ps.kind != "transfer":
            continue
        width = ps.nuf - ps.nu0
        if width <= 0:
            continue
        s = np.linspace(0.0, 1.0, max(64, 8 * len(ps.intervals)))
        nus = ps.nu0 + s * width
        hist = np.vstack([ps.eval_control(nu)[3:5] for nu in nus])
        jumps.extend(detect_jumps(nus, hist, opts))
    return sorted(jumps)


# ----------------------------------------------------------------------
# mesh updates


def _refine_phase(pm: PhaseMesh, errs, span, jumps, opts: RefinementOptions):
    tol = opts.state_error_tol
    nu0, nuf = span
    width = nuf - nu0
    new_fracs = [pm.fractions[0]]
    new_degs = []
    for k, deg in enumerate(pm.degrees):
        fa, fb = pm.fractions[k], pm.fractions[k + 1]
        err = errs[k] if k < len(errs) else 0.0
        if err <= tol:
            new_fracs.append(fb)
            new_degs.append(deg)
            continue
        ratio = err / tol if np.isfinite(err) else np.inf
        inc = int(np.ceil(np.log10(min(ratio, 1e16)))) + 1
        inside = []
        if width > 0:
            inside = [
                (j - nu0) / width
                for j in jumps
                if fa + 1e-9 < (j - nu0) / width < fb - 1e-9
            ]
        if inside:
            # carve a tight window around each switch estimate
            h = (fb - fa) / deg
            half = 0.5 * opts.bound_safety * h
            cuts = set()
            for f in inside:
                cuts.add(min(max(f - half, fa + 1e-9), fb - 1e-9))
                cuts.add(min(max(f + half, fa + 1e-9), fb - 1e-9))
            pts = sorted(cuts | {fb})
            prev = fa
            for f in pts:
                if f - prev > 1e-9:
                    new_fracs.append(f)
                    new_degs.append(deg)
                    prev = f
            if abs(new_fracs[-1] - fb) > 1e-12:
                new_fracs.append(fb)
                new_degs.append(deg)
        elif deg < opts.n_max:
            new_fracs.append(fb)
            new_degs.append(min(opts.n_max, max(opts.n_min, deg + inc)))
        else:
            pieces = (
                4
                if not np.isfinite(ratio)
                else min(4, int(np.ceil(ratio ** (1.0 / deg))) + 1)
            )
            for j in range(1, pieces + 1):
                new_fracs.append(fa + (fb - fa) * j / pieces)
                new_degs.append(deg)
    new_fracs[-1] = 1.0
    return PhaseMesh(fractions=tuple(new_fracs), degrees=tuple(new_degs))


def refine(mesh, report: ErrorReport, opts: RefinementOptions | None = None):
    """New per-phase meshes: degree raises for smooth misses, splits and
    jump-window boundaries otherwise; passing intervals are untouched."""
    opts = opts or RefinementOptions()
    return [
        _refine_phase(pm, errs, span, report.jumps, opts)
        for pm, errs, span in zip(mesh, report.phase_errors, report.phase_spans)
    ]


# ----------------------------------------------------------------------
# solve / estimate / refine loop


def refine_loop(
    problem,
    initial_mesh,
    opts: RefinementOptions | None = None,
    solver_options: SolverOptions | None = None,
    backend: str = "reference",
    on_iteration=None,
) -> RefinementResult:
    """Drive transcribe -> solve -> estimate -> refine until the state
    error tolerance is met on every interval or the budget runs out."""
    opts = opts or RefinementOptions()
    solver_options = solver_options or SolverOptions()
    mesh = list(initial_mesh)
    prob = problem
    history = []
    best = None  # (error, payload)

    for it in range(1, opts.max_iterations + 1):
        tr = transcribe(prob, mesh)
        nlp = tr.nlp_problem()
        z0 = tr.initial_vector()
        nlpsol = solve(nlp, z0, solver_options, backend=backend)
        sol = tr.extract(nlpsol.z)
        report = estimate_error(sol, prob.sys, prob.sc, opts)
        report.jumps = transfer_jumps(sol, opts)
        history.append(report)
        if on_iteration is not None:
            on_iteration(it, mesh, nlpsol, report)

        err = report.global_max
        payload = (sol, nlpsol, tr, mesh)
        rank = (0 if nlpsol.success else 1, err)
        if best is None or rank < best[0]:
            best = (rank, payload)
        if nlpsol.success and err <= opts.state_error_tol:
            return RefinementResult(
                solution=sol,
                nlp_solution=nlpsol,
                transcription=tr,
                mesh=mesh,
                history=history,
                converged=True,
                iterations=it,
            )
        if not nlpsol.success:
            # a finer mesh cannot fix a solver failure; stop and report
            break
        mesh = refine(mesh, report, opts)
        prob = replace(prob, guess=solution_guess(sol))

    sol, nlpsol, tr, mesh = best[1]
    return RefinementResult(
        solution=sol,
        nlp_solution=nlpsol,
        transcription=tr,
        mesh=mesh,
        history=history,
        converged=False,
        iterations=len(history),
    )
