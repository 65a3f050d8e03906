"""Periodic-orbit catalog, sampling, and trajectory-stacking guesses.

The built-in catalog carries two Earth-Moon CR3BP halo orbits (a 14.77 day
L2 southern halo and an 8.01 day near-rectilinear halo) at full printed
precision.  Orbits are stored with their defining decimal strings so that
a write/parse round trip preserves them bit for bit.

Defining states live in the rotating nondimensional frame; periods are in
nondimensional time units (1 TU = 1/n seconds of the parent system).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from . import dynamics
from .propagator import PropagatorOptions, propagate

__all__ = [
    "PeriodicOrbit",
    "StackedGuess",
    "catalog",
    "by_label",
    "sample_orbit",
    "orbit_trajectory",
    "stacking_guess",
    "write_orbit_file",
    "read_orbit_file",
]

_STATE_KEYS = ("x", "y", "z", "xp", "yp", "zp")

# defining boundary conditions at full printed precision (decimal strings
# are authoritative; floats are parsed from them)
_CATALOG_RAW = [
    {
        "label": "l2-southern-halo",
        "x": "1.1692032436399828e+0",
        "y": "9.0895948914056935e-30",
        "z": "-9.7343078972773986e-2",
        "xp": "-1.2120988489044185e-15",
        "yp": "-1.9424148423494397e-1",
        "zp": "1.1582044638613824e-15",
        "jacobi": "3.1141257613953099e+0",
        "period": "3.3325377871055926e+0",
    },
    {
        "label": "nrho",
        "x": "9.1929792455210269e-1",
        "y": "-7.8475765128918404e-29",
        "z": "-2.1213093403317357e-1",
        "xp": "-2.1943176228275019e-13",
        "yp": "1.3779559700236524e-1",
        "zp": "-1.1031515999570366e-12",
        "jacobi": "3.0032754028672501e+0",
        "period": "1.8077163954358124e+0",
    },
]


@dataclass(frozen=True)
class PeriodicOrbit:
    """A CR3BP periodic orbit given by one point on it and its period."""

    label: str
    state: np.ndarray  # defining rotating-frame state, shape (6,)
    jacobi: float
    period: float
    raw: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        st = np.asarray(self.state, dtype=float)
        if st.shape != (6,):
            raise ValueError("defining state must have six components")
        object.__setattr__(self, "state", st)
        if self.period <= 0:
            raise ValueError("period must be positive")


def _from_raw(raw: dict) -> PeriodicOrbit:
    state = np.array([float(raw[k]) for k in _STATE_KEYS])
    return PeriodicOrbit(
        label=str(raw["label"]),
        state=state,
        jacobi=float(raw["jacobi"]),
        period=float(raw["period"]),
        raw=dict(raw),
    )


def catalog() -> list[PeriodicOrbit]:
    """The built-in orbits."""
    return [_from_raw(r) for r in _CATALOG_RAW]


def by_label(label: str) -> PeriodicOrbit:
    for orb in catalog():
        if orb.label == label:
            return orb
    known = ", ".join(r["label"] for r in _CATALOG_RAW)
    raise KeyError(f"unknown orbit {label!r} (catalog has: {known})")


# ----------------------------------------------------------------------
# orbit files


def write_orbit_file(path, orbit: PeriodicOrbit) -> None:
    """Write an orbit definition preserving its decimal strings."""
    if orbit.raw is not None:
        doc = {k: str(v) for k, v in orbit.raw.items()}
    else:
        doc = {"label": orbit.label}
        for k, v in zip(_STATE_KEYS, orbit.state):
            doc[k] = repr(float(v))
        doc["jacobi"] = repr(orbit.jacobi)
        doc["period"] = repr(orbit.period)
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False, default_flow_style=False)


def read_orbit_file(path) -> PeriodicOrbit:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    missing = [k for k in ("label", *_STATE_KEYS, "jacobi", "period") if k not in doc]
    if missing:
        raise ValueError(f"orbit file {path} missing keys: {missing}")
    return _from_raw({k: str(v) for k, v in doc.items()})


# ----------------------------------------------------------------------
# sampling and stacking


def orbit_trajectory(
    orbit: PeriodicOrbit,
    revs: float = 1.0,
    sys: dynamics.SystemParams | None = None,
    tol: float = 1e-12,
    backward: bool = False,
):
    """Dense ballistic trajectory along the orbit from its defining state.

    revs is the (possibly fractional) number of periods to cover; with
    backward=True the propagation runs to negative time, ending at the
    defining state.
    """
    sys = sys or dynamics.earth_moon()
    rhs = lambda t, s: dynamics.cr3bp_rhs(sys, s)
    tf = orbit.period * revs
    span = (0.0, -tf) if backward else (0.0, tf)
    opts = PropagatorOptions(rel_tol=tol, abs_tol=tol)
    return propagate(rhs, orbit.state, span, opts)


def sample_orbit(
    orbit: PeriodicOrbit,
    fraction: float,
    sys: dynamics.SystemParams | None = None,
    tol: float = 1e-12,
) -> np.ndarray:
    """State on the orbit a given fraction of a period past the defining state."""
    if fraction == 0.0:
        return orbit.state.copy()
    traj = orbit_trajectory(orbit, revs=fraction, sys=sys, tol=tol)
    return traj.eval(orbit.period * fraction)


@dataclass
class StackedGuess:
    """Ballistic stacked-orbit initial guess over three phases.

    nu_grid is nondimensional rotating-frame time starting at zero,
    state_grid the 6-component ballistic states, control_grid a matching
    unit-direction/full-throttle history for use on the thrusting arc.
    The guess is continuous except at the single patch point, where the
    first orbit's end meets the second orbit's start.
    """

    nu_grid: np.ndarray
    state_grid: np.ndarray
    control_grid: np.ndarray
    discontinuity_location: int


def stacking_guess(
    initial: PeriodicOrbit,
    terminal: PeriodicOrbit,
    n_periods_each: float = 1.0,
    sys: dynamics.SystemParams | None = None,
    samples_per_rev: int = 240,
) -> StackedGuess:
    """Concatenate ballistic revolutions of both orbits as a transfer guess.

    The initial orbit is propagated forward from its defining state for
    n_periods_each revolutions; the terminal orbit is propagated backward
    from its defining state for the same number, then time-shifted to
    follow the first arc.  The two arcs meet (discontinuously) at the
    patch index returned in the guess.
    """
    if n_periods_each <= 0:
        raise ValueError("n_periods_each must be positive")
    sys = sys or dynamics.earth_moon()
    dur0 = initial.period * n_periods_each
    durf = terminal.period * n_periods_each

    fwd = orbit_trajectory(initial, revs=n_periods_each, sys=sys)
    bwd = orbit_trajectory(terminal, revs=n_periods_each, sys=sys, backward=True)

    n0 = max(2, int(round(samples_per_rev * n_periods_each)))
    t_fwd = np.linspace(0.0, dur0, n0 + 1)
    t_bwd = np.linspace(-durf, 0.0, n0 + 1)

    states = np.vstack([fwd.eval(t_fwd), bwd.eval(t_bwd)])
    nu_grid = np.concatenate([t_fwd, t_bwd + dur0 + durf])
    patch = n0 + 1  # first sample of the terminal-orbit arc

    # full-throttle mode-1 guess along the velocity direction
    vel = states[:, 3:6]
    speed = np.linalg.norm(vel, axis=1, keepdims=True)
    unit = np.where(speed > 1e-12, vel / np.where(speed == 0, 1.0, speed), 0.0)
    ctrl = np.zeros((states.shape[0], 5))
    ctrl[:, 0:3] = unit
    ctrl[:, 3] = 1.0

    return StackedGuess(
        nu_grid=nu_grid,
        state_grid=states,
        control_grid=ctrl,
        discontinuity_location=patch,
    )
