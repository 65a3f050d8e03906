"""Transfer problem definition shared by the transcription and mission layers.

A transfer is three chronological arcs: a ballistic coast along the
initial orbit (circular model), a controlled transfer (elliptic model,
possibly split into several throttle domains), and a ballistic coast
along the terminal orbit.  The throttle structure of the transfer arc is
a sequence of :class:`ThrottleDomain` entries; each mode is 'free'
(throttle varies in [0, 1]), 'on' (pinned at 1), or 'off' (pinned at 0).
A single ('free', 'free') domain is the unpartitioned multi-mode
problem; a single ('free', 'off') domain is the single-mode problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import SpacecraftParams, SystemParams
from .orbits import PeriodicOrbit

__all__ = ["ThrottleDomain", "PhaseGuess", "TransferGuess", "TransferProblem"]

_MODES = ("free", "on", "off")


@dataclass(frozen=True)
class ThrottleDomain:
    """Throttle disposition of both modes over one transfer subarc."""

    mode1: str = "free"
    mode2: str = "off"

    def __post_init__(self):
        for m in (self.mode1, self.mode2):
            if m not in _MODES:
                raise ValueError(f"throttle mode must be one of {_MODES}, got {m!r}")

    @property
    def thrusting_possible(self) -> bool:
        return self.mode1 != "off" or self.mode2 != "off"


@dataclass
class PhaseGuess:
    """Sampled guess along one phase, parameterized by arc fraction s in [0,1].

    states rows match the phase state dimension (7 coast / 8 transfer);
    controls rows are always the full [ux, uy, uz, d1, d2] and may be None
    for coast phases.
    """

    s: np.ndarray
    states: np.ndarray
    nu0: float
    nuf: float
    controls: np.ndarray | None = None

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.controls is not None:
            self.controls = np.asarray(self.controls, dtype=float)
        if self.s.ndim != 1 or self.states.shape[0] != self.s.size:
            raise ValueError("guess sample counts disagree")
        if np.any(np.diff(self.s) < 0):
            raise ValueError("guess arc fractions must be nondecreasing")


@dataclass
class TransferGuess:
    phases: list  # one PhaseGuess per phase, coasts included
    statics: np.ndarray
    q: float

    def __post_init__(self):
        self.statics = np.asarray(self.statics, dtype=float)
        if self.statics.shape != (6,):
            raise ValueError("statics guess must have six entries")


@dataclass
class TransferProblem:
    """Everything the transcription needs to build the NLP."""

    sys: SystemParams
    sc: SpacecraftParams
    initial_orbit: PeriodicOrbit
    terminal_orbit: PeriodicOrbit
    domains: tuple = (ThrottleDomain("free", "off"),)
    propellant_bound: float | None = None  # normalized mode-1 propellant cap
    min_altitudes: tuple[float, float] = (500.0, 200.0)  # km above each primary
    guess: TransferGuess | None = None
    # variable box half-widths and caps (nondimensional unless noted)
    pos_bound: float = 5.0
    tau_max: float = 60.0
    nu_max: float = 40.0
    mass_min: float = 0.1
    name: str = "transfer"

    def __post_init__(self):
        self.domains = tuple(self.domains)
        if not self.domains:
            raise ValueError("at least one throttle domain is required")
        if self.propellant_bound is not None and not (
            0.0 < self.propellant_bound < 1.0
        ):
            raise ValueError("normalized propellant bound must lie in (0, 1)")

    @property
    def n_phases(self) -> int:
        return 2 + len(self.domains)

    @property
    def q_cap(self) -> float:
        """Upper bound applied to the mode-1 propellant integral."""
        if self.propellant_bound is not None:
            return self.propellant_bound
        return 1.0 - self.mass_min

    def with_bound(self, bound_kg: float | None) -> "TransferProblem":
        """Copy with a different mode-1 propellant bound given in kilograms."""
        norm = None if bound_kg is None else bound_kg / self.sc.m0
        return replace(self, propellant_bound=norm)

    def with_domains(self, domains, guess=None) -> "TransferProblem":
        return replace(self, domains=tuple(domains), guess=guess or self.guess)
