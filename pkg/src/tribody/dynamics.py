"""Earth-Moon restricted three-body dynamics in pulsating rotating coordinates.

The elliptic restricted three-body problem (ER3BP) is written in
nondimensional pulsating coordinates in the non-uniformly rotating frame,
with the primary-orbit true anomaly ``nu`` as the independent variable.
Setting the eccentricity to zero recovers the circular problem (CR3BP),
where ``nu`` reduces to nondimensional time and the rotation rate is the
constant mean motion.

Unit system (everything dimensional is km / s / kg):

* characteristic length  L(nu) = a (1 - e^2) / (1 + e cos nu)
* characteristic time    T(nu) = sqrt(L(nu)^3 / (gm1 + gm2))
* normalized time        tau   = t / T(0), with T(0) the characteristic
  time at zero true anomaly; this single constant is shared by every
  phase of a transfer so that durations add up across phases.
* thrust is supplied in kN, which numerically equals kg km / s^2, so no
  conversion factor is required beyond the explicit constant below.

State component ordering is fixed and relied on by the collocation layer:

* thrusting arcs (8): ``[x, y, z, xp, yp, zp, tau, m]``
* ballistic arcs (7): ``[x, y, z, xp, yp, zp, tau]``

where primes denote derivatives with respect to ``nu`` and ``m`` is the
spacecraft mass normalized by its value at the start of the transfer.
Control ordering on thrusting arcs is ``[ux, uy, uz, delta1, delta2]``.

All scalar-field functions here accept plain floats, numpy arrays, or
:class:`~tribody.ad.Dual` values interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ad

__all__ = [
    "KN_TO_KG_KM_S2",
    "SystemParams",
    "SpacecraftParams",
    "SingularStateError",
    "earth_moon",
    "case1_spacecraft",
    "case2_spacecraft",
    "char_length",
    "char_time",
    "angular_rate",
    "primary_distances",
    "pseudopotential",
    "pseudopotential_gradient",
    "thrust_accel_magnitude",
    "mass_flow_rate",
    "link_scaling",
    "transfer_rates",
    "coast_rates",
    "er3bp_rhs",
    "cr3bp_rhs",
    "jacobi_constant",
]

# kN expressed in the kg-km-s base: 1 kN = 1 kg km / s^2 exactly.
KN_TO_KG_KM_S2 = 1.0

# positions closer than this (nondimensional) to either primary are
# treated as singular rather than letting 1/r^3 blow up silently
_SINGULAR_RADIUS = 1e-12


class SingularStateError(ValueError):
    """Raised when a state is evaluated at (or numerically on top of) a primary."""


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the two-primary system.

    Parameters
    ----------
    gm1, gm2 : float
        Gravitational parameters of the larger and smaller primary [km^3/s^2].
    radius1, radius2 : float
        Mean equatorial radii of the primaries [km].
    g_const : float
        Universal gravitational constant [km^3/(kg s^2)].
    g0 : float
        Sea-level gravitational acceleration [km/s^2].
    a : float
        Semi-major axis of the primary system orbit [km].
    e : float
        Eccentricity of the primary system orbit.
    mu : float, optional
        Mass ratio gm2/(gm1+gm2).  When supplied it is cross-checked
        against the value recomputed from gm1 and gm2 (relative 1e-12);
        the recomputed value is the one stored.
    """

    gm1: float
    gm2: float
    radius1: float
    radius2: float
    g_const: float
    g0: float
    a: float
    e: float
    mu: float | None = None
    # derived quantities, filled in __post_init__
    n: float = field(init=False)
    m_total: float = field(init=False)
    t_char0: float = field(init=False)

    def __post_init__(self):
        if not (0.0 <= self.e < 1.0):
            raise ValueError(f"eccentricity {self.e} outside [0, 1)")
        if self.gm1 <= 0 or self.gm2 <= 0 or self.a <= 0:
            raise ValueError("gm1, gm2 and a must be positive")
        mu_calc = self.gm2 / (self.gm1 + self.gm2)
        if self.mu is not None:
            if abs(self.mu - mu_calc) > 1e-12 * mu_calc:
                raise ValueError(
                    f"supplied mass ratio {self.mu} disagrees with "
                    f"gm2/(gm1+gm2) = {mu_calc}"
                )
        object.__setattr__(self, "mu", mu_calc)
        object.__setattr__(self, "n", np.sqrt((self.gm1 + self.gm2) / self.a**3))
        object.__setattr__(self, "m_total", (self.gm1 + self.gm2) / self.g_const)
        lch0 = self.a * (1.0 - self.e**2) / (1.0 + self.e)
        object.__setattr__(
            self, "t_char0", float(np.sqrt(lch0**3 / (self.gm1 + self.gm2)))
        )


@dataclass(frozen=True)
class SpacecraftParams:
    """Two-mode propulsion and mass properties.

    tmax entries are in kN, isp in seconds, m0 in kg.  Mode 1 is the
    high-thrust chemical-like mode, mode 2 the low-thrust high-Isp mode.
    """

    tmax: tuple[float, float]
    isp: tuple[float, float]
    m0: float

    def __post_init__(self):
        if len(self.tmax) != 2 or len(self.isp) != 2:
            raise ValueError("tmax and isp must each have two entries")
        if any(t <= 0 for t in self.tmax) or any(i <= 0 for i in self.isp):
            raise ValueError("thrust magnitudes and specific impulses must be positive")
        if self.m0 <= 0:
            raise ValueError("initial mass must be positive")

    @property
    def tmax_force(self) -> tuple[float, float]:
        """Maximum thrust per mode in kg km/s^2 (converted once here)."""
        return (self.tmax[0] * KN_TO_KG_KM_S2, self.tmax[1] * KN_TO_KG_KM_S2)


def earth_moon() -> SystemParams:
    """Earth-Moon system constants."""
    return SystemParams(
        gm1=3.986002221116981e5,
        gm2=4.902797989481230e3,
        radius1=6.378137e3,
        radius2=1.7371e3,
        g_const=6.6743e-20,
        g0=9.80665e-3,
        a=3.89703e5,
        e=0.0549,
        mu=1.215058560962404e-2,
    )


def case1_spacecraft() -> SpacecraftParams:
    """100 kg spacecraft, 1 N chemical mode plus 0.5 N electric mode."""
    return SpacecraftParams(tmax=(1.0e-3, 0.5e-3), isp=(250.0, 3100.0), m0=100.0)


def case2_spacecraft() -> SpacecraftParams:
    """Same as case 1 with the electric mode downsized to 0.25 N."""
    return SpacecraftParams(tmax=(1.0e-3, 0.25e-3), isp=(250.0, 3100.0), m0=100.0)


# ----------------------------------------------------------------------
# scalar fields of the primary system orbit


def char_length(sys: SystemParams, nu):
    """Instantaneous characteristic length L(nu) = a(1-e^2)/(1+e cos nu) [km]."""
    return sys.a * (1.0 - sys.e**2) / (1.0 + sys.e * ad.cos(nu))


def char_time(sys: SystemParams, nu):
    """Instantaneous characteristic time sqrt(L(nu)^3/(gm1+gm2)) [s]."""
    lch = char_length(sys, nu)
    return ad.sqrt(lch * lch * lch / (sys.gm1 + sys.gm2))


def angular_rate(sys: SystemParams, nu):
    """True anomaly rate of the primary orbit, n(1+e cos nu)^2/(1-e^2)^(3/2) [rad/s]."""
    ecn = 1.0 + sys.e * ad.cos(nu)
    return sys.n * ecn * ecn / (1.0 - sys.e**2) ** 1.5


def primary_distances(mu: float, x, y, z):
    """Nondimensional distances (r1, r2) to each primary.

    Raises SingularStateError if either distance collapses below the
    singularity guard radius.
    """
    r1 = ad.sqrt((x + mu) ** 2 + y**2 + z**2)
    r2 = ad.sqrt((x - 1.0 + mu) ** 2 + y**2 + z**2)
    rv1, rv2 = ad.value(r1), ad.value(r2)
    if np.any(rv1 < _SINGULAR_RADIUS) or np.any(rv2 < _SINGULAR_RADIUS):
        raise SingularStateError("state coincides with a primary body")
    return r1, r2


def pseudopotential(sys: SystemParams, x, y, z, nu):
    """Pulsating-frame pseudopotential.

    W = [ (x^2 + y^2 - e cos(nu) z^2)/2 + (1-mu)/r1 + mu/r2 ] / (1 + e cos nu)
    """
    r1, r2 = primary_distances(sys.mu, x, y, z)
    ecn = sys.e * ad.cos(nu)
    quad = 0.5 * (x * x + y * y - ecn * (z * z))
    return (quad + (1.0 - sys.mu) / r1 + sys.mu / r2) / (1.0 + ecn)


def pseudopotential_gradient(sys: SystemParams, x, y, z, nu):
    """Partials (Wx, Wy, Wz) of the pseudopotential w.r.t. position."""
    mu = sys.mu
    r1, r2 = primary_distances(mu, x, y, z)
    ecn = sys.e * ad.cos(nu)
    c1 = (1.0 - mu) / (r1 * r1 * r1)
    c2 = mu / (r2 * r2 * r2)
    scale = 1.0 / (1.0 + ecn)
    wx = (x - c1 * (x + mu) - c2 * (x - 1.0 + mu)) * scale
    wy = (y - c1 * y - c2 * y) * scale
    wz = (-ecn * z - c1 * z - c2 * z) * scale
    return wx, wy, wz


def thrust_accel_magnitude(sys: SystemParams, sc: SpacecraftParams, m, d1, d2, nu):
    """Nondimensional thrust acceleration from both modes.

    a_T = (T(nu)^2 / L(nu)) (d1 Tmax1 + d2 Tmax2) / ((1 + e cos nu) m0 m)
    """
    t1, t2 = sc.tmax_force
    tch = char_time(sys, nu)
    lch = char_length(sys, nu)
    ecn = 1.0 + sys.e * ad.cos(nu)
    return (tch * tch / lch) * (d1 * t1 + d2 * t2) / (ecn * sc.m0 * m)


def mass_flow_rate(sys: SystemParams, sc: SpacecraftParams, d1, d2, nu):
    """d(m)/d(nu) of the normalized mass (non-positive).

    m' = -(Tmax1 d1/Isp1 + Tmax2 d2/Isp2) / (nudot g0 m0)
    """
    t1, t2 = sc.tmax_force
    flow = t1 * d1 / sc.isp[0] + t2 * d2 / sc.isp[1]
    return -flow / (angular_rate(sys, nu) * sys.g0 * sc.m0)


def link_scaling(sys: SystemParams, nu):
    """Scalings used by the dimensional continuity conditions across phases.

    Returns (gamma, eta, xi, vel) where

    * gamma = (1 - e^2)/(1 + e cos nu) maps pulsating positions to their
      CR3BP counterparts,
    * eta = e sin(nu)/(1 + e cos nu) multiplies the position in the
      pulsating-rate term of the velocity map,
    * xi = 1 - n/nudot is the frame-rate mismatch term,
    * vel = a n / (L(nu) nudot(nu)) multiplies the CR3BP velocity.
    """
    ecn = 1.0 + sys.e * ad.cos(nu)
    nudot = angular_rate(sys, nu)
    gamma = (1.0 - sys.e**2) / ecn
    eta = sys.e * ad.sin(nu) / ecn
    xi = 1.0 - sys.n / nudot
    vel = sys.a * sys.n / (char_length(sys, nu) * nudot)
    return gamma, eta, xi, vel


# ----------------------------------------------------------------------
# equations of motion


def transfer_rates(sys, sc, x, y, z, xp, yp, zp, m, ux, uy, uz, d1, d2, nu):
    """Componentwise thrusting-arc rates, vectorized over collocation points.

    Returns (ax, ay, az, taup, mp): the accelerations, the normalized-time
    rate and the normalized mass rate.  Position/velocity rates are the
    velocity components themselves and need no evaluation.
    """
    wx, wy, wz = pseudopotential_gradient(sys, x, y, z, nu)
    at = thrust_accel_magnitude(sys, sc, m, d1, d2, nu)
    ax = 2.0 * yp + wx + at * ux
    ay = -2.0 * xp + wy + at * uy
    az = wz + at * uz
    taup = 1.0 / (angular_rate(sys, nu) * sys.t_char0)
    mp = mass_flow_rate(sys, sc, d1, d2, nu)
    return ax, ay, az, taup, mp


def coast_rates(sys, x, y, z, xp, yp, zp):
    """Componentwise ballistic circular-problem rates, vectorized.

    Returns (ax, ay, az, taup) with taup the constant normalized-time
    rate 1/(n T(0)) shared with the transfer phase.
    """
    wx, wy, wz = _circular_gradient(sys, x, y, z)
    ax = 2.0 * yp + wx
    ay = -2.0 * xp + wy
    az = wz
    taup = 1.0 / (sys.n * sys.t_char0)
    return ax, ay, az, taup


def _circular_gradient(sys, x, y, z):
    mu = sys.mu
    r1, r2 = primary_distances(mu, x, y, z)
    c1 = (1.0 - mu) / (r1 * r1 * r1)
    c2 = mu / (r2 * r2 * r2)
    wx = x - c1 * (x + mu) - c2 * (x - 1.0 + mu)
    wy = y - c1 * y - c2 * y
    wz = -c1 * z - c2 * z
    return wx, wy, wz


def er3bp_rhs(sys: SystemParams, sc: SpacecraftParams, state, control, nu):
    """Full 8-state right-hand side of the controlled elliptic problem.

    state = [x, y, z, xp, yp, zp, tau, m], control = [ux, uy, uz, d1, d2],
    derivative is with respect to true anomaly.
    """
    x, y, z, xp, yp, zp = state[0], state[1], state[2], state[3], state[4], state[5]
    m = state[7]
    ux, uy, uz, d1, d2 = control
    ax, ay, az, taup, mp = transfer_rates(
        sys, sc, x, y, z, xp, yp, zp, m, ux, uy, uz, d1, d2, nu
    )
    return np.array([xp, yp, zp, ax, ay, az, taup, mp])


def cr3bp_rhs(sys: SystemParams, state):
    """Ballistic circular-problem right-hand side.

    Accepts a 6-state [x,y,z,xp,yp,zp] or 7-state [...,tau]; the returned
    array has matching length.  The time-like independent variable is the
    nondimensional rotating-frame time; the tau rate uses the shared
    characteristic time T(0) of the (possibly elliptic) parent system so
    that coast durations line up with transfer-phase normalized time.
    """
    x, y, z, xp, yp, zp = state[:6]
    wx, wy, wz = _circular_gradient(sys, x, y, z)
    ax = 2.0 * yp + wx
    ay = -2.0 * xp + wy
    az = wz
    if len(state) == 6:
        return np.array([xp, yp, zp, ax, ay, az])
    taup = 1.0 / (sys.n * sys.t_char0)
    return np.array([xp, yp, zp, ax, ay, az, taup])


def jacobi_constant(sys: SystemParams, state) -> float:
    """CR3BP Jacobi constant 2 W|e=0 - (xp^2 + yp^2 + zp^2)."""
    x, y, z, xp, yp, zp = state[:6]
    r1, r2 = primary_distances(sys.mu, x, y, z)
    w0 = 0.5 * (x * x + y * y) + (1.0 - sys.mu) / r1 + sys.mu / r2
    return 2.0 * w0 - (xp * xp + yp * yp + zp * zp)
