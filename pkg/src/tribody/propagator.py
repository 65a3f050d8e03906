"""High-order adaptive propagation with dense output.

Thin contract over scipy's DOP853 (explicit Runge-Kutta 8(5,3)).  The
error control defaults to a norm-based test, where a single step scale
is built from the norm of the state vector rather than componentwise,
which behaves better for states whose components span several orders of
magnitude (position vs normalized time, say).  Componentwise control is
available through :class:`PropagatorOptions`.

Solutions come back as :class:`DenseTrajectory`, an interpolant over the
full span that returns the stored step states exactly when queried at a
stored grid point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.integrate._ivp.rk import DOP853

__all__ = [
    "PropagatorOptions",
    "DenseTrajectory",
    "PropagationError",
    "SpanMismatchError",
    "propagate",
    "verify_against_collocation",
]


class PropagationError(RuntimeError):
    """Integration failed; carries the location where the step size died."""

    def __init__(self, message: str, t_failed: float):
        super().__init__(f"{message} (at independent variable {t_failed!r})")
        self.t_failed = t_failed


class SpanMismatchError(ValueError):
    """Trajectory and collocation solution cover different spans."""


@dataclass(frozen=True)
class PropagatorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    norm_control: bool = True
    max_step: float = np.inf
    first_step: float | None = None


class _NormControlDOP853(DOP853):
    """DOP853 with a uniform error scale built from ||y|| per step."""

    def _estimate_error_norm(self, K, h, scale):
        u = self.atol + self.rtol * np.linalg.norm(self.y) / max(
            1.0, np.sqrt(self.n)
        )
        return super()._estimate_error_norm(K, h, np.full_like(scale, u))


@dataclass
class DenseTrajectory:
    """Continuous solution over one integration span.

    grid holds the accepted step points (monotone in integration
    direction), states the corresponding state rows.  Evaluation between
    grid points uses the integrator's own dense interpolant; evaluation
    at a stored grid point returns the stored row bit-for-bit.
    """

    grid: np.ndarray
    states: np.ndarray
    _interp: object

    @property
    def span(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def eval(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            hit = np.nonzero(self.grid == float(t))[0]
            if hit.size:
                return self.states[hit[0]].copy()
            return np.asarray(self._interp(float(t)), dtype=float)
        out = np.asarray(self._interp(t), dtype=float).T
        # snap exact grid hits to stored values
        for j, tj in enumerate(t):
            hit = np.nonzero(self.grid == tj)[0]
            if hit.size:
                out[j] = self.states[hit[0]]
        return out


def propagate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    span: tuple[float, float],
    opts: PropagatorOptions | None = None,
) -> DenseTrajectory:
    """Integrate y' = rhs(t, y) over span (forward or backward).

    Raises PropagationError when the integrator cannot reach the end of
    the span (step-size underflow near a singularity, for instance).
    """
    opts = opts or PropagatorOptions()
    method = _NormControlDOP853 if opts.norm_control else DOP853
    kwargs = {}
    if opts.first_step is not None:
        kwargs["first_step"] = opts.first_step
    sol = solve_ivp(
        rhs,
        span,
        np.asarray(y0, dtype=float),
        method=method,
        rtol=opts.rel_tol,
        atol=opts.abs_tol,
        max_step=opts.max_step,
        dense_output=True,
        **kwargs,
    )
    if not sol.success:
        raise PropagationError(sol.message, float(sol.t[-1]))
    return DenseTrajectory(grid=sol.t, states=sol.y.T, _interp=sol.sol)


def verify_against_collocation(traj: DenseTrajectory, colloc, samples: int = 201) -> float:
    """Max relative disagreement between a propagation and a collocation arc.

    ``colloc`` must expose ``span`` (tuple) and ``eval_state(nu)``; each
    state component is normalized by one plus its largest collocation
    magnitude over the span, so the result is a relative error in the
    same sense the mesh refinement uses.
    """
    a, b = traj.span
    ca, cb = colloc.span
    if abs(a - ca) > 1e-9 or abs(b - cb) > 1e-9:
        raise SpanMismatchError(
            f"propagated span ({a}, {b}) vs collocation span ({ca}, {cb})"
        )
    ts = np.linspace(a, b, samples)
    prop = np.vstack([traj.eval(t) for t in ts])
    coll = np.vstack([np.asarray(colloc.eval_state(t), dtype=float) for t in ts])
    ncomp = min(prop.shape[1], coll.shape[1])
    scale = 1.0 + np.abs(coll[:, :ncomp]).max(axis=0)
    return float((np.abs(prop[:, :ncomp] - coll[:, :ncomp]).max(axis=0) / scale).max())
