"""Propellant-constrained minimum-time transfers between Earth-Moon
three-body periodic orbits with single- and multi-mode propulsion.

The package stack, bottom to top:

* :mod:`tribody.dynamics` - restricted three-body equations of motion in
  pulsating rotating coordinates, physical presets.
* :mod:`tribody.propagator` - adaptive high-order integration with dense
  output.
* :mod:`tribody.orbits` - periodic-orbit catalog, sampling, stacked
  ballistic guesses.
* :mod:`tribody.lgr` - Radau collocation points, weights, derivative
  operators.
* :mod:`tribody.transcription` - multiple-phase collocation of the
  transfer problem into a sparse NLP.
* :mod:`tribody.nlp` - sequential quadratic programming solver.
* :mod:`tribody.mesh_refinement` - error estimation and hp adaptation.
* :mod:`tribody.mission` - end-to-end workflows (baseline, constrained,
  throttle-structure detection, continuation sweeps).
* :mod:`tribody.cli` - command line front end.
"""

from .dynamics import (
    SpacecraftParams,
    SystemParams,
    case1_spacecraft,
    case2_spacecraft,
    earth_moon,
)
from .orbits import PeriodicOrbit, by_label, catalog

__all__ = [
    "SystemParams",
    "SpacecraftParams",
    "earth_moon",
    "case1_spacecraft",
    "case2_spacecraft",
    "PeriodicOrbit",
    "catalog",
    "by_label",
]

__version__ = "0.1.0"
