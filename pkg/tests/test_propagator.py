"""Propagator contract: accuracy, invariants, dense output, failure modes."""

import numpy as np
import pytest

from tribody import dynamics as dyn
from tribody import orbits
from tribody.propagator import (
    DenseTrajectory,
    PropagationError,
    PropagatorOptions,
    SpanMismatchError,
    propagate,
    verify_against_collocation,
)

SYS = dyn.earth_moon()


def test_polynomial_problem_exact():
    # y' = [y1, t] has the closed solution y0 = c0 e^t - ... use simpler:
    # y' = 3 t^2 -> y = t^3, reproduced to integrator tolerance
    traj = propagate(lambda t, y: np.array([3 * t**2]), [0.0], (0.0, 2.0))
    for t in (0.3, 1.1, 1.9, 2.0):
        assert traj.eval(t)[0] == pytest.approx(t**3, abs=1e-10)


def test_jacobi_drift_over_one_period():
    orb = orbits.by_label("l2-southern-halo")
    traj = propagate(
        lambda t, s: dyn.cr3bp_rhs(SYS, s),
        orb.state,
        (0.0, orb.period),
        PropagatorOptions(rel_tol=1e-10, abs_tol=1e-10),
    )
    j0 = dyn.jacobi_constant(SYS, orb.state)
    drift = max(
        abs(dyn.jacobi_constant(SYS, traj.eval(t)) - j0)
        for t in np.linspace(0, orb.period, 60)
    )
    assert drift < 1e-9


@pytest.mark.parametrize("label", ["l2-southern-halo", "nrho"])
def test_periodic_orbit_closure(label):
    orb = orbits.by_label(label)
    traj = propagate(
        lambda t, s: dyn.cr3bp_rhs(SYS, s),
        orb.state,
        (0.0, orb.period),
        PropagatorOptions(rel_tol=1e-10, abs_tol=1e-10),
    )
    assert np.abs(traj.eval(orb.period) - orb.state).max() < 1e-6


def test_dense_eval_snaps_to_grid():
    traj = propagate(lambda t, y: np.array([np.cos(t)]), [0.0], (0.0, 5.0))
    for i in (0, len(traj.grid) // 2, -1):
        t = traj.grid[i]
        assert traj.eval(t)[0] == traj.states[i][0]  # exact, not approximate
    many = traj.eval(traj.grid[:4])
    np.testing.assert_array_equal(many, traj.states[:4])


def test_backward_span():
    orb = orbits.by_label("nrho")
    rhs = lambda t, s: dyn.cr3bp_rhs(SYS, s)
    fwd = propagate(rhs, orb.state, (0.0, 1.0))
    back = propagate(rhs, fwd.eval(1.0), (1.0, 0.0))
    assert np.abs(back.eval(0.0) - orb.state).max() < 1e-8


def test_norm_control_toggle():
    orb = orbits.by_label("nrho")
    rhs = lambda t, s: dyn.cr3bp_rhs(SYS, s)
    a = propagate(rhs, orb.state, (0.0, 1.0), PropagatorOptions(norm_control=True))
    b = propagate(rhs, orb.state, (0.0, 1.0), PropagatorOptions(norm_control=False))
    assert np.abs(a.eval(1.0) - b.eval(1.0)).max() < 1e-8


def test_step_size_underflow_reports_location():
    # finite-time blowup: y' = y^2, y(0) = 1 diverges at t = 1
    with pytest.raises(PropagationError) as info:
        propagate(lambda t, y: y**2, [1.0], (0.0, 2.0))
    assert info.value.t_failed == pytest.approx(1.0, abs=1e-3)


class _PolyArc:
    """Stand-in collocation arc: states follow [t^2, t]."""

    def __init__(self, a, b):
        self.span = (a, b)

    def eval_state(self, t):
        return np.array([t**2, t])


def test_verify_against_collocation():
    rhs = lambda t, y: np.array([2 * t, 1.0])
    traj = propagate(rhs, [0.0, 0.0], (0.0, 3.0))
    err = verify_against_collocation(traj, _PolyArc(0.0, 3.0))
    assert err < 1e-10
    with pytest.raises(SpanMismatchError):
        verify_against_collocation(traj, _PolyArc(0.0, 2.5))


def test_verify_detects_disagreement():
    rhs = lambda t, y: np.array([2 * t, 1.0])
    traj = propagate(rhs, [0.0, 0.0], (0.0, 3.0))

    class Wrong(_PolyArc):
        def eval_state(self, t):
            return np.array([t**2 + 0.05, t])

    err = verify_against_collocation(traj, Wrong(0.0, 3.0))
    assert err == pytest.approx(0.05 / (1 + 9.05), rel=1e-6)
