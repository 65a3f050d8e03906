"""Sparse nonlinear programming by sequential quadratic programming.

The reference solver is a damped-BFGS SQP with an l1 exact-penalty line
search.  Each iteration linearizes the constraints, builds a convex QP
with a block-partitioned quasi-Newton Hessian, and solves it with the
Clarabel interior-point conic solver.  Infeasible QP subproblems fall
back to an elastic relaxation with penalized slacks, which is always
feasible inside the variable box.

Problems declare their structure once in :class:`NlpProblem`:

* callbacks for objective, gradient, constraints, and sparse Jacobian,
* variable bounds ``lb <= z <= ub`` and constraint bounds
  ``cl <= c(z) <= cu`` (rows with ``cl == cu`` are equalities),
* optionally a diagonal variable scaling and a partition of the columns
  into Hessian elements.  Disjoint elements keep the quasi-Newton update
  cheap and the QP Hessian block sparse; without them a single dense
  block is used, which is only sensible for small problems.

Alternate solver backends can be registered under a name and selected
per call, so the reference implementation is replaceable without
touching callers.
"""

from __future__ import annotations

import sys as _sys
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

import clarabel

__all__ = [
    "NlpProblem",
    "SolverOptions",
    "NlpSolution",
    "derivatives",
    "solve",
    "register_backend",
    "available_backends",
]


@dataclass
class NlpProblem:
    """Smooth NLP: min f(z) s.t. cl <= c(z) <= cu, lb <= z <= ub."""

    n: int
    m: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    constraints: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], sp.spmatrix]
    lb: np.ndarray
    ub: np.ndarray
    cl: np.ndarray
    cu: np.ndarray
    var_scale: np.ndarray | None = None
    hess_elements: list[np.ndarray] | None = None
    name: str = "nlp"

    def __post_init__(self):
        for attr in ("lb", "ub"):
            setattr(self, attr, np.asarray(getattr(self, attr), dtype=float))
        for attr in ("cl", "cu"):
            setattr(self, attr, np.asarray(getattr(self, attr), dtype=float))
        if self.lb.shape != (self.n,) or self.ub.shape != (self.n,):
            raise ValueError("variable bounds must have shape (n,)")
        if self.cl.shape != (self.m,) or self.cu.shape != (self.m,):
            raise ValueError("constraint bounds must have shape (m,)")
        if np.any(self.lb > self.ub):
            raise ValueError("variable bounds cross (lb > ub)")
        if np.any(self.cl > self.cu):
            raise ValueError("constraint bounds cross (cl > cu)")


@dataclass
class SolverOptions:
    tolerance: float = 1e-8
    max_iterations: int = 3000
    derivative_mode: str = "analytic-forward"  # or "finite-difference"
    penalty_init: float = 10.0
    step_cap: float = 10.0
    hessian_reset_iters: int = 0  # 0 = never force periodic resets
    log_stream: object = None  # file-like; None keeps the log in memory only
    verbose: bool = False


@dataclass
class NlpSolution:
    z: np.ndarray
    objective: float
    status: str  # optimal | max-iterations | infeasible | numerical-failure
    multipliers: np.ndarray  # one per constraint row
    bound_multipliers: np.ndarray  # one per variable
    feasibility: float
    stationarity: float
    iterations: int
    log: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.status == "optimal"


# ----------------------------------------------------------------------
# derivatives


def derivatives(problem: NlpProblem, z: np.ndarray, mode: str = "analytic-forward"):
    """Objective gradient and constraint Jacobian at z.

    In finite-difference mode the Jacobian is built column-group-wise
    using a greedy coloring of the sparsity pattern when the analytic
    Jacobian is available to supply one, otherwise column by column.
    """
    z = np.asarray(z, dtype=float)
    if mode == "analytic-forward":
        return problem.gradient(z), sp.csr_matrix(problem.jacobian(z))
    if mode != "finite-difference":
        raise ValueError(f"unknown derivative mode {mode!r}")
    h = 1e-7
    g = np.empty(problem.n)
    for i in range(problem.n):
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        g[i] = (problem.objective(zp) - problem.objective(zm)) / (2 * h)
    try:
        pattern = sp.csc_matrix(problem.jacobian(z))
        groups = _color_columns(pattern)
    except Exception:
        groups = [[i] for i in range(problem.n)]
        pattern = None
    jac = sp.lil_matrix((problem.m, problem.n))
    for group in groups:
        zp, zm = z.copy(), z.copy()
        zp[group] += h
        zm[group] -= h
        diff = (problem.constraints(zp) - problem.constraints(zm)) / (2 * h)
        if pattern is None:
            jac[:, group[0]] = diff[:, None]
        else:
            for col in group:
                rows = pattern.indices[pattern.indptr[col] : pattern.indptr[col + 1]]
                jac[rows, col] = diff[rows]
    return g, sp.csr_matrix(jac)


def _color_columns(pattern: sp.csc_matrix) -> list[list[int]]:
    """Greedy structural coloring: columns in one group share no rows."""
    n = pattern.shape[1]
    col_rows = [
        frozenset(pattern.indices[pattern.indptr[j] : pattern.indptr[j + 1]])
        for j in range(n)
    ]
    groups: list[list[int]] = []
    group_rows: list[set] = []
    for j in range(n):
        for gi, rows in enumerate(group_rows):
            if not rows & col_rows[j]:
                groups[gi].append(j)
                rows |= col_rows[j]
                break
        else:
            groups.append([j])
            group_rows.append(set(col_rows[j]))
    return groups


# ----------------------------------------------------------------------
# partitioned quasi-Newton model


class _ElementHessian:
    """Block-diagonal damped-BFGS model over disjoint column groups."""

    def __init__(self, n: int, elements: list[np.ndarray] | None, floor: float = 1e-8):
        if elements is None:
            elements = [np.arange(n)]
        self.n = n
        self.elements = [np.asarray(e, dtype=int) for e in elements if len(e)]
        self.blocks = [np.eye(len(e)) for e in self.elements]
        self.floor = floor
        # constant scatter pattern for assembly
        rows, cols = [], []
        for e in self.elements:
            r, c = np.meshgrid(e, e, indexing="ij")
            rows.append(r.ravel())
            cols.append(c.ravel())
        self._rows = np.concatenate(rows) if rows else np.array([], dtype=int)
        self._cols = np.concatenate(cols) if cols else np.array([], dtype=int)

    def reset(self):
        self.blocks = [np.eye(len(e)) for e in self.elements]

    def matrix(self) -> sp.csc_matrix:
        vals = (
            np.concatenate([b.ravel() for b in self.blocks])
            if self.blocks
            else np.array([])
        )
        p = sp.coo_matrix((vals, (self._rows, self._cols)), shape=(self.n, self.n))
        p = p.tocsc()
        return p + self.floor * sp.identity(self.n, format="csc")

    def update(self, s: np.ndarray, y: np.ndarray):
        """Damped BFGS on each block from a full-space step/gradient pair."""
        for e, b in zip(self.elements, self.blocks):
            se = s[e]
            sn = np.linalg.norm(se)
            if sn < 1e-13:
                continue
            ye = y[e]
            bs = b @ se
            sbs = float(se @ bs)
            sy = float(se @ ye)
            if sbs <= 0:
                continue
            if sy < 0.2 * sbs:
                theta = 0.8 * sbs / (sbs - sy)
                ye = theta * ye + (1.0 - theta) * bs
                sy = float(se @ ye)
            if sy <= 1e-14 * sn * np.linalg.norm(ye):
                continue
            b -= np.outer(bs, bs) / sbs
            b += np.outer(ye, ye) / sy


# ----------------------------------------------------------------------
# QP subproblem via Clarabel


class _QpFailure(RuntimeError):
    pass


def _solve_qp(P, g, J, c, cl, cu, dlb, dub, elastic_rho=None):
    """min 0.5 d'Pd + g'd  s.t. linearized constraints and step box.

    Returns (d, lam, w): the step, constraint multipliers (one per row,
    sign convention grad-of-Lagrangian = g + J'lam + w = 0 at the QP
    solution), and bound multipliers.  With elastic_rho set, equality and
    inequality rows get penalized slacks, making the subproblem feasible
    whenever the box is.
    """
    m, n = J.shape
    eq = cl == cu
    iu = ~eq & np.isfinite(cu)
    il = ~eq & np.isfinite(cl)
    Jeq = J[eq]
    Ju = J[iu]
    Jl = J[il]
    beq = cl[eq] - c[eq]
    bu = cu[iu] - c[iu]
    bl = c[il] - cl[il]

    fin_ub = np.isfinite(dub)
    fin_lb = np.isfinite(dlb)
    Iub = sp.identity(n, format="csr")[fin_ub]
    Ilb = sp.identity(n, format="csr")[fin_lb]

    if elastic_rho is None:
        A = sp.vstack([Jeq, Ju, -Jl, Iub, -Ilb], format="csc")
        b = np.concatenate([beq, bu, bl, dub[fin_ub], -dlb[fin_lb]])
        cones = [clarabel.ZeroConeT(int(eq.sum()))] if eq.any() else []
        n_ineq = A.shape[0] - int(eq.sum())
        if n_ineq:
            cones.append(clarabel.NonnegativeConeT(n_ineq))
        Pfull = sp.triu(P, format="csc")
        qvec = np.asarray(g, dtype=float)
        nvar = n
    else:
        # elastic: one pair of slacks per equality row, one per inequality
        neq, nu_, nl_ = int(eq.sum()), int(iu.sum()), int(il.sum())
        ns = 2 * neq + nu_ + nl_
        nvar = n + ns
        Seq_p = sp.identity(neq, format="csr")
        blocks = []
        # [Jeq  I  -I  0   0 ] d,vp,vm = beq   (zero cone)
        blocks.append(
            sp.hstack(
                [Jeq, -Seq_p, Seq_p, sp.csr_matrix((neq, nu_ + nl_))], format="csr"
            )
        )
        # [Ju 0 0 -I 0] <= bu ; [-Jl 0 0 0 -I] <= -bl... (nonneg cone rows)
        blocks.append(
            sp.hstack(
                [
                    Ju,
                    sp.csr_matrix((nu_, 2 * neq)),
                    -sp.identity(nu_, format="csr"),
                    sp.csr_matrix((nu_, nl_)),
                ],
                format="csr",
            )
        )
        blocks.append(
            sp.hstack(
                [
                    -Jl,
                    sp.csr_matrix((nl_, 2 * neq + nu_)),
                    -sp.identity(nl_, format="csr"),
                ],
                format="csr",
            )
        )
        # box on d, nonnegativity of slacks
        blocks.append(
            sp.hstack([Iub, sp.csr_matrix((int(fin_ub.sum()), ns))], format="csr")
        )
        blocks.append(
            sp.hstack([-Ilb, sp.csr_matrix((int(fin_lb.sum()), ns))], format="csr")
        )
        blocks.append(
            sp.hstack(
                [sp.csr_matrix((ns, n)), -sp.identity(ns, format="csr")], format="csr"
            )
        )
        A = sp.vstack(blocks, format="csc")
        b = np.concatenate(
            [
                beq,
                bu,
                bl,
                dub[fin_ub],
                -dlb[fin_lb],
                np.zeros(ns),
            ]
        )
        cones = []
        if neq:
            cones.append(clarabel.ZeroConeT(neq))
        n_ineq = A.shape[0] - neq
        if n_ineq:
            cones.append(clarabel.NonnegativeConeT(n_ineq))
        Pfull = sp.block_diag(
            [sp.triu(P, format="csc"), 1e-8 * sp.identity(ns, format="csc")],
            format="csc",
        )
        qvec = np.concatenate([g, elastic_rho * np.ones(ns)])

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    solver = clarabel.DefaultSolver(sp.csc_matrix(Pfull), qvec, A, b, cones, settings)
    out = solver.solve()
    status = str(out.status)
    if status not in ("Solved", "AlmostSolved"):
        raise _QpFailure(status)
    x = np.asarray(out.x)
    zdual = np.asarray(out.z)
    d = x[:n]
    if not np.all(np.isfinite(d)):
        raise _QpFailure("non-finite step")

    lam = np.zeros(m)
    k = 0
    neq = int(eq.sum())
    lam[eq] = zdual[k : k + neq]
    k += neq
    nu_ = int(iu.sum())
    lam[iu] += zdual[k : k + nu_]
    k += nu_
    nl_ = int(il.sum())
    lam[il] -= zdual[k : k + nl_]
    k += nl_
    w = np.zeros(n)
    nbu = int(fin_ub.sum())
    w[fin_ub] += zdual[k : k + nbu]
    k += nbu
    nbl = int(fin_lb.sum())
    w[fin_lb] -= zdual[k : k + nbl]
    return d, lam, w


# ----------------------------------------------------------------------
# merit bookkeeping


def _violation(c, cl, cu):
    return np.maximum(0.0, cl - c) + np.maximum(0.0, c - cu)


def _viol_inf(c, cl, cu) -> float:
    v = _violation(c, cl, cu)
    return float(v.max()) if v.size else 0.0


def _viol_l1(c, cl, cu) -> float:
    return float(_violation(c, cl, cu).sum())


# ----------------------------------------------------------------------
# reference SQP backend


def _soc_step(Js, c_full, problem, ds, dlb, dub, Dscale, d):
    """Second-order correction for a rejected SQP step.

    Least-norm feasibility restoration: the constraints are valued at the
    stepped point but linearized about the current one, which cancels the
    curvature part of the violation that merit line searches punish.  The
    objective plays no role; the correction should be as small as possible.
    """
    n = Js.shape[1]
    try:
        s, _, _ = _solve_qp(
            sp.identity(n, format="csc"),
            np.zeros(n),
            Js,
            c_full,
            problem.cl,
            problem.cu,
            dlb - ds,
            dub - ds,
        )
    except _QpFailure:
        return None
    corr = s * Dscale
    # a correction larger than the step it repairs is not a correction
    nd = float(np.linalg.norm(d))
    if not np.all(np.isfinite(corr)) or float(np.linalg.norm(corr)) > 2.0 * nd:
        return None
    return corr


def _solve_reference(problem: NlpProblem, z0, options: SolverOptions) -> NlpSolution:
    n, m = problem.n, problem.m
    z = np.clip(np.asarray(z0, dtype=float), problem.lb, problem.ub)

    scale = (
        np.asarray(problem.var_scale, dtype=float)
        if problem.var_scale is not None
        else np.ones(n)
    )
    if np.any(scale <= 0):
        raise ValueError("variable scales must be positive")

    def evals(zv):
        g, J = derivatives(problem, zv, options.derivative_mode)
        return (
            float(problem.objective(zv)),
            np.asarray(g, dtype=float),
            np.asarray(problem.constraints(zv), dtype=float),
            sp.csr_matrix(J),
        )

    f, g, c, J = evals(z)
    hess = _ElementHessian(n, problem.hess_elements)
    lam = np.zeros(m)
    w = np.zeros(n)
    # one exact-penalty weight per row: constraint sensitivities span many
    # orders of magnitude here (ballistic arcs through a close periapsis
    # carry multipliers ~1e4 while most rows sit near 1), and a scalar
    # weight large enough for the stiff rows strangles steps through all
    # the benign ones
    pi = np.full(m, options.penalty_init)
    cap = options.step_cap
    log: list[dict] = []
    merit_hist: deque = deque(maxlen=5)
    status = "max-iterations"
    feas = _viol_inf(c, problem.cl, problem.cu)
    stat = np.inf
    it = 0
    stall = 0
    crawl = 0
    best_feas = feas

    Dscale = scale  # QP solved in scaled step coordinates

    for it in range(1, options.max_iterations + 1):
        # QP in scaled coordinates: d_z = D * d_s
        Js = J.multiply(Dscale[None, :]).tocsr()
        gs = g * Dscale
        dlb = np.maximum((problem.lb - z) / Dscale, -cap)
        dub = np.minimum((problem.ub - z) / Dscale, cap)
        P = hess.matrix()
        rho_el = min(100.0 * max(float(pi.max()) if m else 1.0, 1.0), 1e6)
        ds = None
        elastic = False
        qp_note = ""
        # failure ladder: plain QP, then convexified, then elastic (which is
        # feasible whenever the step box is), then both at once
        for sigma, rho in ((0.0, None), (1e-4, None), (0.0, rho_el), (1e-2, rho_el)):
            Ptry = P if sigma == 0.0 else P + sigma * sp.identity(n, format="csc")
            try:
                ds, lam, ws = _solve_qp(
                    Ptry, gs, Js, c, problem.cl, problem.cu, dlb, dub, elastic_rho=rho
                )
                elastic = rho is not None
                break
            except _QpFailure as exc:
                qp_note = str(exc)
        if ds is None:
            # every subproblem attempt failed: drop the accumulated curvature,
            # tighten the trust cap, and retry from the same point
            hess.reset()
            cap = max(cap * 0.25, 1e-3)
            stall += 1
            _log_row(log, options, it, f, feas, stat, 0.0, 0.0, pi, note=f"qp:{qp_note}")
            if stall >= 6:
                status = "numerical-failure"
                break
            continue
        w = ws / Dscale
        d = ds * Dscale

        feas = _viol_inf(c, problem.cl, problem.cu)
        kkt = g + J.T @ lam + w
        stat = float(np.abs(kkt * Dscale).max()) / max(1.0, float(np.abs(gs).max()))
        if feas <= options.tolerance and stat <= options.tolerance:
            status = "optimal"
            _log_row(log, options, it, f, feas, stat, 0.0, 0.0, pi)
            break

        # each row's weight must dominate its own multiplier (Powell's
        # rule); elastic multipliers saturate at the elastic weight and say
        # nothing about the true scale, so they do not drive the weights
        if not elastic and m:
            lam_abs = np.abs(lam)
            need = 1.2 * lam_abs
            grow = pi < 1.1 * lam_abs
            pi[grow] = np.maximum(2.0 * pi[grow], need[grow])
            settle = (~grow) & (pi > 10.0 * np.maximum(need, options.penalty_init))
            pi[settle] = np.maximum(
                np.maximum(need[settle], options.penalty_init), 0.5 * pi[settle]
            )
            if np.any(grow):
                merit_hist.clear()

        viol_vec = _violation(c, problem.cl, problem.cu)
        viol1 = float(viol_vec.sum())
        merit0 = f + float(pi @ viol_vec)
        dphi = float(gs @ ds) - float(pi @ viol_vec)
        if dphi > -1e-16 and viol1 <= options.tolerance:
            # no descent available from a (near) feasible point: accept as
            # finished if the KKT residual is already small-ish, else fail
            if feas <= options.tolerance and stat <= 100 * options.tolerance:
                status = "optimal"
                _log_row(log, options, it, f, feas, stat, 0.0, 0.0, pi)
                break

        merit_hist.append(merit0)
        ref_merit = max(merit_hist)
        alpha = 1.0
        accepted = False
        soc = False
        step = np.zeros(n)

        def _merit_at(zv):
            try:
                fv = float(problem.objective(zv))
                cv = np.asarray(problem.constraints(zv), dtype=float)
            except (ValueError, FloatingPointError, OverflowError):
                return np.inf, None
            if not np.isfinite(fv) or not np.all(np.isfinite(cv)):
                return np.inf, None
            return fv + float(pi @ _violation(cv, problem.cl, problem.cu)), cv

        for trial in range(40):
            bar = ref_merit + 1e-4 * alpha * min(dphi, 0.0)
            z_try = np.clip(z + alpha * d, problem.lb, problem.ub)
            m_try, c_try = _merit_at(z_try)
            if m_try <= bar:
                accepted = True
                step = alpha * d
                break
            if c_try is not None and trial < 12:
                # second-order correction: steps along a curved constraint
                # manifold fail the merit test on curvature alone, so cancel
                # the second-order violation and retry at the same length
                corr = _soc_step(
                    Js, c_try, problem, alpha * ds, dlb, dub, Dscale, alpha * d
                )
                if corr is not None:
                    z_soc = np.clip(z + alpha * d + corr, problem.lb, problem.ub)
                    m_soc, _ = _merit_at(z_soc)
                    if m_soc <= bar:
                        accepted = True
                        soc = True
                        step = alpha * d + corr
                        break
            alpha *= 0.5

        if not accepted:
            # shrink the trust cap and rebuild curvature before retrying
            cap = max(cap * 0.25, 1e-3)
            hess.reset()
            stall += 1
            _log_row(log, options, it, f, feas, stat, 0.0, 0.0, pi, note="reject")
            if stall >= 6:
                status = (
                    "infeasible"
                    if feas > options.tolerance and elastic
                    else "numerical-failure"
                )
                break
            continue
        stall = 0
        if alpha >= 0.5:
            cap = min(cap * 1.5, options.step_cap)

        # stale-curvature watchdog: a long run of vanishing accepted steps
        # at feasibility means the quasi-Newton model has gone bad in the
        # null space; rebuilding it lets the next subproblem take a real
        # step instead of creeping
        if float(np.linalg.norm(step)) < 1e-7 and feas <= options.tolerance:
            crawl += 1
            if crawl >= 20:
                hess.reset()
                merit_hist.clear()
                crawl = 0
        else:
            crawl = 0

        z_new = np.clip(z + step, problem.lb, problem.ub)
        f_new, g_new, c_new, J_new = evals(z_new)

        # quasi-Newton pair in scaled coordinates with fresh multipliers
        y_full = (g_new + J_new.T @ lam) - (g + J.T @ lam)
        hess.update(step / Dscale, y_full * Dscale)
        if options.hessian_reset_iters and it % options.hessian_reset_iters == 0:
            hess.reset()

        _log_row(
            log,
            options,
            it,
            f_new,
            _viol_inf(c_new, problem.cl, problem.cu),
            stat,
            float(np.linalg.norm(step)),
            alpha,
            pi,
            note="soc" if soc else "",
        )
        z, f, g, c, J = z_new, f_new, g_new, c_new, J_new

        new_feas = _viol_inf(c, problem.cl, problem.cu)
        if new_feas < best_feas - 1e-12:
            best_feas = new_feas

    feas = _viol_inf(c, problem.cl, problem.cu)
    return NlpSolution(
        z=z,
        objective=f,
        status=status,
        multipliers=lam,
        bound_multipliers=w,
        feasibility=feas,
        stationarity=stat if np.isfinite(stat) else np.inf,
        iterations=it,
        log=log,
    )


def _log_row(log, options, it, f, feas, stat, step, alpha, pi, note=""):
    pi = float(np.max(pi)) if np.size(pi) else 0.0
    row = {
        "iter": it,
        "objective": f,
        "feasibility": feas,
        "stationarity": stat,
        "step_norm": step,
        "alpha": alpha,
        "penalty": pi,
        "note": note,
    }
    log.append(row)
    stream = options.log_stream
    if stream is None and options.verbose:
        stream = _sys.stderr
    if stream is not None:
        stream.write(
            f"{it:5d}  f={f: .9e}  feas={feas:.3e}  opt={stat:.3e}  "
            f"step={step:.2e}  alpha={alpha:.2e}  pi={pi:.1e} {note}\n"
        )


# ----------------------------------------------------------------------
# backend seam


_BACKENDS: dict[str, Callable] = {"reference": _solve_reference}


def register_backend(name: str, solver_fn: Callable) -> None:
    """Install an alternate solver callable (problem, z0, options) -> NlpSolution."""
    _BACKENDS[name] = solver_fn


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def solve(
    problem: NlpProblem,
    z0,
    options: SolverOptions | None = None,
    backend: str = "reference",
) -> NlpSolution:
    """Solve the NLP from z0 with the selected backend."""
    options = options or SolverOptions()
    try:
        fn = _BACKENDS[backend]
    except KeyError:
        raise KeyError(
            f"unknown backend {backend!r}; available: {available_backends()}"
        ) from None
    return fn(problem, z0, options)


# ----------------------------------------------------------------------
# scipy cross-check backend (small problems only; used by the test suite
# to confirm the reference solver against an independent implementation)


def _solve_scipy(problem: NlpProblem, z0, options: SolverOptions) -> NlpSolution:
    from scipy.optimize import Bounds, NonlinearConstraint, minimize

    cons = NonlinearConstraint(
        problem.constraints,
        problem.cl,
        problem.cu,
        jac=lambda z: problem.jacobian(z).toarray(),
    )
    res = minimize(
        problem.objective,
        np.clip(np.asarray(z0, dtype=float), problem.lb, problem.ub),
        jac=problem.gradient,
        method="trust-constr",
        constraints=[cons] if problem.m else [],
        bounds=Bounds(problem.lb, problem.ub),
        options={"gtol": options.tolerance, "xtol": 1e-12, "maxiter": 5000},
    )
    c = problem.constraints(res.x)
    return NlpSolution(
        z=np.asarray(res.x),
        objective=float(res.fun),
        status="optimal" if res.status in (1, 2) else "numerical-failure",
        multipliers=np.asarray(res.v[0]) if problem.m else np.zeros(0),
        bound_multipliers=np.zeros(problem.n),
        feasibility=_viol_inf(c, problem.cl, problem.cu),
        stationarity=float(res.optimality),
        iterations=int(res.nit),
        log=[],
    )


register_backend("scipy-trust-constr", _solve_scipy)
