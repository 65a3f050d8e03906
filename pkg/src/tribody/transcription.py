"""Multiple-phase Radau collocation of the orbit transfer problem.

Each phase (initial coast, one or more transfer throttle domains,
terminal coast) carries its own mesh of intervals with per-interval
polynomial degree.  States live at the collocation nodes plus one
non-collocated endpoint per interval; controls live at the collocation
nodes of thrusting domains only.  True anomaly spans, the mode-1
propellant integral, and six static parameters complete the decision
vector.

The construction is derivative-complete: every constraint block knows
its sparsity pattern at build time, and Jacobian values come from
vectorized forward-mode duals over the collocation points, so the NLP
solver sees exact first derivatives with a fixed sparsity layout.

Throttle bookkeeping per domain: a 'free' mode contributes a decision
column bounded to [0, 1], while 'on'/'off' modes are folded into the
dynamics as constants (no column, no bound row).  A domain with both
modes off is a ballistic arc of the elliptic model and carries no
controls at all; its unit-direction and complementarity rows are
dropped rather than left degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import ad, dynamics, lgr
from .nlp import NlpProblem
from .problem import TransferProblem

__all__ = [
    "PhaseMesh",
    "uniform_phase_mesh",
    "default_mesh",
    "DecisionLayout",
    "PhaseSolution",
    "CollocationSolution",
    "Transcription",
    "transcribe",
    "interpolate_phase",
]


# ----------------------------------------------------------------------
# meshes


@dataclass(frozen=True)
class PhaseMesh:
    """Interval breakpoints (as arc fractions) and per-interval degrees."""

    fractions: tuple
    degrees: tuple

    def __post_init__(self):
        fr = tuple(float(f) for f in self.fractions)
        dg = tuple(int(d) for d in self.degrees)
        object.__setattr__(self, "fractions", fr)
        object.__setattr__(self, "degrees", dg)
        if len(fr) != len(dg) + 1:
            raise ValueError("need one more breakpoint than degrees")
        if abs(fr[0]) > 1e-15 or abs(fr[-1] - 1.0) > 1e-15:
            raise ValueError("fractions must start at 0 and end at 1")
        if np.any(np.diff(fr) <= 0):
            raise ValueError("fractions must increase strictly")
        for d in dg:
            if not (lgr.MIN_DEGREE <= d <= lgr.MAX_DEGREE):
                raise ValueError(
                    f"interval degree {d} outside "
                    f"[{lgr.MIN_DEGREE}, {lgr.MAX_DEGREE}]"
                )

    @property
    def n_intervals(self) -> int:
        return len(self.degrees)

    @property
    def n_collocation(self) -> int:
        return int(sum(self.degrees))


def uniform_phase_mesh(n_intervals: int = 10, degree: int = 4) -> PhaseMesh:
    return PhaseMesh(
        fractions=tuple(np.linspace(0.0, 1.0, n_intervals + 1)),
        degrees=(degree,) * n_intervals,
    )


def default_mesh(n_phases: int, n_intervals: int = 10, degree: int = 4):
    return [uniform_phase_mesh(n_intervals, degree) for _ in range(n_phases)]


# ----------------------------------------------------------------------
# decision layout


@dataclass
class DecisionLayout:
    """Named sections of the flat decision vector."""

    sections: list  # (name, offset, length)
    n: int

    def offset(self, name: str) -> int:
        for nm, off, _ in self.sections:
            if nm == name:
                return off
        raise KeyError(name)

    def length(self, name: str) -> int:
        for nm, _, ln in self.sections:
            if nm == name:
                return ln
        raise KeyError(name)

    def unpack(self, z: np.ndarray) -> dict:
        z = np.asarray(z)
        return {nm: z[off : off + ln].copy() for nm, off, ln in self.sections}

    def pack(self, parts: dict) -> np.ndarray:
        z = np.zeros(self.n)
        for nm, off, ln in self.sections:
            part = np.asarray(parts[nm], dtype=float).ravel()
            if part.size != ln:
                raise ValueError(f"section {nm} expects {ln} values, got {part.size}")
            z[off : off + ln] = part
        return z


# ----------------------------------------------------------------------
# per-phase bookkeeping


class _Phase:
    """Mesh geometry, offsets and throttle disposition of one phase."""

    def __init__(self, idx, kind, mesh: PhaseMesh, domain, offset):
        self.idx = idx
        self.kind = kind  # 'coast' | 'transfer'
        self.mesh = mesh
        self.domain = domain
        self.nx = 7 if kind == "coast" else 8

        if kind == "transfer":
            self.has_controls = domain.thrusting_possible
            names = []
            if self.has_controls:
                names = ["ux", "uy", "uz"]
                if domain.mode1 == "free":
                    names.append("d1")
                if domain.mode2 == "free":
                    names.append("d2")
            self.ctrl_names = names
        else:
            self.has_controls = False
            self.ctrl_names = []
        self.nctrl = len(self.ctrl_names)

        # node geometry
        fracs = np.asarray(mesh.fractions)
        cp_frac, cp_w, cp_dfrac, cp_interval = [], [], [], []
        node_frac = []
        rows, cols, vals = [], [], []
        node_base = 0
        self.intervals = []
        for k, deg in enumerate(mesh.degrees):
            fa, fb = fracs[k], fracs[k + 1]
            pts, wts = lgr.points_weights(deg)
            d = lgr.differentiation_matrix(deg)
            local_fr = fa + (pts + 1.0) * 0.5 * (fb - fa)
            node_frac.extend(local_fr)
            cp_frac.extend(local_fr)
            cp_w.extend(wts)
            cp_dfrac.extend([fb - fa] * deg)
            cp_interval.extend([k] * deg)
            # defect rows of this interval act on its deg+1 support nodes
            for i in range(deg):
                for j in range(deg + 1):
                    rows.append(node_base + i)
                    cols.append(node_base + j)
                    vals.append(d[i, j])
            self.intervals.append(
                {
                    "frac_a": float(fa),
                    "frac_b": float(fb),
                    "degree": deg,
                    "nodes": np.arange(node_base, node_base + deg + 1),
                    "coll": np.arange(node_base, node_base + deg),
                }
            )
            node_base += deg
        node_frac.append(1.0)

        self.n_coll = mesh.n_collocation
        self.n_nodes = self.n_coll + 1
        self.node_frac = np.asarray(node_frac)
        self.cp_frac = np.asarray(cp_frac)
        self.cp_w = np.asarray(cp_w)
        self.cp_dfrac = np.asarray(cp_dfrac)
        self.cp_interval = np.asarray(cp_interval, dtype=int)
        self.D = sp.csr_matrix(
            (vals, (rows, cols)), shape=(self.n_coll, self.n_nodes)
        )

        # decision offsets
        self.state_off = offset
        self.ctrl_off = self.state_off + self.n_nodes * self.nx
        self.nu_off = self.ctrl_off + self.n_coll * self.nctrl
        self.end = self.nu_off + 2

    # -- column helpers -------------------------------------------------

    def state_col(self, node: int, comp: int) -> int:
        return self.state_off + node * self.nx + comp

    def ctrl_col(self, pt: int, name: str) -> int:
        return self.ctrl_off + pt * self.nctrl + self.ctrl_names.index(name)

    def states(self, z) -> np.ndarray:
        return z[self.state_off : self.state_off + self.n_nodes * self.nx].reshape(
            self.n_nodes, self.nx
        )

    def controls(self, z) -> np.ndarray:
        return z[self.ctrl_off : self.ctrl_off + self.n_coll * self.nctrl].reshape(
            self.n_coll, self.nctrl
        )

    def anomaly(self, z) -> tuple[float, float]:
        return float(z[self.nu_off]), float(z[self.nu_off + 1])

    def throttle_values(self, z):
        """(d1, d2) arrays at collocation points, fixed modes filled in."""
        ctrl = self.controls(z)
        out = []
        for mode, name in ((self.domain.mode1, "d1"), (self.domain.mode2, "d2")):
            if self.kind != "transfer":
                out.append(np.zeros(self.n_coll))
            elif mode == "free":
                out.append(ctrl[:, self.ctrl_names.index(name)].copy())
            else:
                out.append(np.full(self.n_coll, 1.0 if mode == "on" else 0.0))
        return out


# ----------------------------------------------------------------------
# constraint blocks


class _Block:
    """One group of constraint rows with a fixed sparsity pattern."""

    tag: str
    nrows: int
    cl: np.ndarray
    cu: np.ndarray
    tags: list

    def pattern(self):  # -> (rows_local, cols)
        raise NotImplementedError

    def values(self, z):
        raise NotImplementedError

    def jac_values(self, z):
        raise NotImplementedError


class _DefectBlock(_Block):
    """Collocated dynamics deficiencies of one phase."""

    def __init__(self, tr, ph: _Phase):
        self.tr = tr
        self.ph = ph
        self.nrows = ph.n_coll * ph.nx
        self.cl = np.zeros(self.nrows)
        self.cu = np.zeros(self.nrows)
        eqs = (
            ["eq02-03"] * 6 + ["eq08"] + (["eq10"] if ph.nx == 8 else [])
        )
        comp = "xyzuvwTm"
        self.tags = [
            f"p{ph.idx}.defect.{eqs[c]}[{comp[c]}]@pt{i}"
            for i in range(ph.n_coll)
            for c in range(ph.nx)
        ]

        # dual lanes: nx states, nctrl controls, nu0, nuf
        self.k = ph.nx + ph.nctrl + 2
        n_coll, nx, k = ph.n_coll, ph.nx, self.k

        # pattern: differentiation part (constant values) and dynamics part
        dcoo = ph.D.tocoo()
        rows_d, cols_d, vals_d = [], [], []
        for i, j, v in zip(dcoo.row, dcoo.col, dcoo.data):
            for c in range(nx):
                rows_d.append(i * nx + c)
                cols_d.append(ph.state_col(j, c))
                vals_d.append(v)
        self._rows_d = np.asarray(rows_d, dtype=int)
        self._cols_d = np.asarray(cols_d, dtype=int)
        self._vals_d = np.asarray(vals_d)

        colmap = np.empty((n_coll, k), dtype=int)
        for lane in range(nx):
            colmap[:, lane] = ph.state_off + np.arange(n_coll) * nx + lane
        for lane in range(ph.nctrl):
            colmap[:, nx + lane] = ph.ctrl_off + np.arange(n_coll) * ph.nctrl + lane
        colmap[:, k - 2] = ph.nu_off
        colmap[:, k - 1] = ph.nu_off + 1
        row_base = np.arange(n_coll)[:, None] * nx + np.arange(nx)[None, :]
        self._rows_f = np.broadcast_to(row_base[:, :, None], (n_coll, nx, k)).ravel()
        self._cols_f = np.broadcast_to(
            colmap[:, None, :], (n_coll, nx, k)
        ).ravel()

    def pattern(self):
        return (
            np.concatenate([self._rows_d, self._rows_f]),
            np.concatenate([self._cols_d, self._cols_f]),
        )

    def _rates(self, z, with_duals: bool):
        ph, tr = self.ph, self.tr
        nx, k = ph.nx, self.k
        Xn = ph.states(z)
        Xc = Xn[:-1]
        nu0, nuf = ph.anomaly(z)
        span = nuf - nu0

        if with_duals:
            xs = [ad.Dual(Xc[:, j], _one_hot(ph.n_coll, k, j)) for j in range(nx)]
            nu_der = np.zeros((ph.n_coll, k))
            nu_der[:, k - 2] = 1.0 - ph.cp_frac
            nu_der[:, k - 1] = ph.cp_frac
            nu = ad.Dual(nu0 + ph.cp_frac * span, nu_der)
            dn_der = np.zeros((ph.n_coll, k))
            dn_der[:, k - 2] = -ph.cp_dfrac
            dn_der[:, k - 1] = ph.cp_dfrac
            dnu = ad.Dual(ph.cp_dfrac * span, dn_der)
        else:
            xs = [Xc[:, j] for j in range(nx)]
            nu = nu0 + ph.cp_frac * span
            dnu = ph.cp_dfrac * span

        if ph.kind == "coast":
            ax, ay, az, taup = dynamics.coast_rates(tr.sysp, *xs[:6])
            rates = [xs[3], xs[4], xs[5], ax, ay, az, taup]
        else:
            ctrl = ph.controls(z)
            names = ph.ctrl_names
            if ph.has_controls:
                def ctrl_lane(name):
                    j = names.index(name)
                    if with_duals:
                        return ad.Dual(ctrl[:, j], _one_hot(ph.n_coll, k, nx + j))
                    return ctrl[:, j]

                ux, uy, uz = ctrl_lane("ux"), ctrl_lane("uy"), ctrl_lane("uz")
                d1 = (
                    ctrl_lane("d1")
                    if ph.domain.mode1 == "free"
                    else (1.0 if ph.domain.mode1 == "on" else 0.0)
                )
                d2 = (
                    ctrl_lane("d2")
                    if ph.domain.mode2 == "free"
                    else (1.0 if ph.domain.mode2 == "on" else 0.0)
                )
                ax, ay, az, taup, mp = dynamics.transfer_rates(
                    tr.sysp, tr.scp, *xs[:6], xs[7], ux, uy, uz, d1, d2, nu
                )
            else:
                # ballistic elliptic arc, constant mass
                wx, wy, wz = dynamics.pseudopotential_gradient(
                    tr.sysp, xs[0], xs[1], xs[2], nu
                )
                ax = 2.0 * xs[4] + wx
                ay = -2.0 * xs[3] + wy
                az = wz
                taup = 1.0 / (dynamics.angular_rate(tr.sysp, nu) * tr.sysp.t_char0)
                mp = 0.0
            rates = [xs[3], xs[4], xs[5], ax, ay, az, taup, mp]
        return Xn, rates, dnu

    def values(self, z):
        ph = self.ph
        Xn, rates, dnu = self._rates(z, with_duals=False)
        F = np.empty((ph.n_coll, ph.nx))
        for c, rc in enumerate(rates):
            F[:, c] = rc  # scalars broadcast
        return ((self.ph.D @ Xn) - 0.5 * dnu[:, None] * F).ravel()

    def jac_values(self, z):
        ph = self.ph
        _, rates, dnu = self._rates(z, with_duals=True)
        der = np.zeros((ph.n_coll, ph.nx, self.k))
        for c, rc in enumerate(rates):
            term = 0.5 * dnu * rc
            der[:, c, :] = term.der if isinstance(term, ad.Dual) else 0.0
        return np.concatenate([self._vals_d, -der.ravel()])


def _one_hot(n, k, lane):
    e = np.zeros((n, k))
    e[:, lane] = 1.0
    return e


class _UnitNormBlock(_Block):
    """Thrust direction stays on the unit sphere (transfer domains)."""

    def __init__(self, ph: _Phase):
        self.ph = ph
        self.nrows = ph.n_coll
        self.cl = np.zeros(self.nrows)
        self.cu = np.zeros(self.nrows)
        self.tags = [f"p{ph.idx}.path.eq28@pt{i}" for i in range(ph.n_coll)]
        cols = np.empty((ph.n_coll, 3), dtype=int)
        for j, nm in enumerate(("ux", "uy", "uz")):
            cols[:, j] = [ph.ctrl_col(i, nm) for i in range(ph.n_coll)]
        self._cols = cols
        self._rows = np.broadcast_to(
            np.arange(ph.n_coll)[:, None], cols.shape
        ).ravel()

    def pattern(self):
        return self._rows, self._cols.ravel()

    def _u(self, z):
        ctrl = self.ph.controls(z)
        idx = [self.ph.ctrl_names.index(nm) for nm in ("ux", "uy", "uz")]
        return ctrl[:, idx]

    def values(self, z):
        u = self._u(z)
        return (u * u).sum(axis=1) - 1.0

    def jac_values(self, z):
        return (2.0 * self._u(z)).ravel()


class _ComplementarityBlock(_Block):
    """At most one mode thrusts: d1 * d2 = 0 pointwise."""

    def __init__(self, ph: _Phase):
        self.ph = ph
        self.nrows = ph.n_coll
        self.cl = np.zeros(self.nrows)
        self.cu = np.zeros(self.nrows)
        self.tags = [f"p{ph.idx}.path.eq29@pt{i}" for i in range(ph.n_coll)]
        self._c1 = np.array([ph.ctrl_col(i, "d1") for i in range(ph.n_coll)])
        self._c2 = np.array([ph.ctrl_col(i, "d2") for i in range(ph.n_coll)])
        self._rows = np.repeat(np.arange(ph.n_coll), 2)
        self._cols = np.column_stack([self._c1, self._c2]).ravel()

    def pattern(self):
        return self._rows, self._cols

    def values(self, z):
        return z[self._c1] * z[self._c2]

    def jac_values(self, z):
        return np.column_stack([z[self._c2], z[self._c1]]).ravel()


class _AltitudeBlock(_Block):
    """Keep dimensional altitude above each primary's floor (transfer only).

    The printed form R + h - L(nu) r <= 0 is divided through by L(nu),
    which leaves the feasible set unchanged and the rows dimensionless.
    """

    def __init__(self, tr, ph: _Phase):
        self.tr = tr
        self.ph = ph
        self.nrows = 2 * ph.n_coll
        self.cl = np.full(self.nrows, -np.inf)
        self.cu = np.zeros(self.nrows)
        self.tags = [
            f"p{ph.idx}.path.eq31[primary{i + 1}]@pt{pt}"
            for i in range(2)
            for pt in range(ph.n_coll)
        ]
        # lanes: x, y, z, nu0, nuf
        self.k = 5
        colmap = np.empty((ph.n_coll, self.k), dtype=int)
        for lane in range(3):
            colmap[:, lane] = ph.state_off + np.arange(ph.n_coll) * ph.nx + lane
        colmap[:, 3] = ph.nu_off
        colmap[:, 4] = ph.nu_off + 1
        rows1 = np.broadcast_to(
            np.arange(ph.n_coll)[:, None], (ph.n_coll, self.k)
        ).ravel()
        self._rows = np.concatenate([rows1, rows1 + ph.n_coll])
        self._cols = np.concatenate([colmap.ravel(), colmap.ravel()])

    def pattern(self):
        return self._rows, self._cols

    def _geometry(self, z, with_duals):
        ph, tr = self.ph, self.tr
        Xc = ph.states(z)[:-1]
        nu0, nuf = ph.anomaly(z)
        if with_duals:
            x = ad.Dual(Xc[:, 0], _one_hot(ph.n_coll, self.k, 0))
            y = ad.Dual(Xc[:, 1], _one_hot(ph.n_coll, self.k, 1))
            zz = ad.Dual(Xc[:, 2], _one_hot(ph.n_coll, self.k, 2))
            nu_der = np.zeros((ph.n_coll, self.k))
            nu_der[:, 3] = 1.0 - ph.cp_frac
            nu_der[:, 4] = ph.cp_frac
            nu = ad.Dual(nu0 + ph.cp_frac * (nuf - nu0), nu_der)
        else:
            x, y, zz = Xc[:, 0], Xc[:, 1], Xc[:, 2]
            nu = nu0 + ph.cp_frac * (nuf - nu0)
        r1, r2 = dynamics.primary_distances(tr.sysp.mu, x, y, zz)
        lch = dynamics.char_length(tr.sysp, nu)
        floor1 = tr.sysp.radius1 + tr.prob.min_altitudes[0]
        floor2 = tr.sysp.radius2 + tr.prob.min_altitudes[1]
        g1 = floor1 / lch - r1
        g2 = floor2 / lch - r2
        return g1, g2

    def values(self, z):
        g1, g2 = self._geometry(z, with_duals=False)
        return np.concatenate([g1, g2])

    def jac_values(self, z):
        g1, g2 = self._geometry(z, with_duals=True)
        return np.concatenate([g1.der.ravel(), g2.der.ravel()])


class _IntegralBlock(_Block):
    """Defines q as the mode-1 propellant spent across all transfer domains."""

    def __init__(self, tr, phases):
        self.tr = tr
        self.phases = [
            ph
            for ph in phases
            if ph.kind == "transfer" and ph.domain.mode1 != "off"
        ]
        self.nrows = 1
        self.cl = np.zeros(1)
        self.cu = np.zeros(1)
        self.tags = ["integral.eq26"]
        cols = [tr.q_col]
        self._spans = []
        for ph in self.phases:
            d1_cols = (
                np.array([ph.ctrl_col(i, "d1") for i in range(ph.n_coll)])
                if ph.domain.mode1 == "free"
                else None
            )
            if d1_cols is not None:
                cols.extend(d1_cols)
            cols.extend([ph.nu_off, ph.nu_off + 1])
            self._spans.append((ph, d1_cols))
        self._cols = np.asarray(cols, dtype=int)
        self._rows = np.zeros(len(cols), dtype=int)

    def pattern(self):
        return self._rows, self._cols

    def _accumulate(self, z, with_duals):
        # value = q - sum over domains of quadrature(d1 flow)
        tr = self.tr
        total = z[tr.q_col]
        jac = [1.0]
        for ph, d1_cols in self._spans:
            nu0, nuf = ph.anomaly(z)
            span = nuf - nu0
            if with_duals:
                k = (ph.n_coll if d1_cols is not None else 0) + 2
                if d1_cols is not None:
                    d1 = ad.Dual(z[d1_cols], np.eye(ph.n_coll, k))
                else:
                    d1 = 1.0
                nu_der = np.zeros((ph.n_coll, k))
                nu_der[:, k - 2] = 1.0 - ph.cp_frac
                nu_der[:, k - 1] = ph.cp_frac
                nu = ad.Dual(nu0 + ph.cp_frac * span, nu_der)
                span_der = np.zeros(k)
                span_der[k - 2] = -1.0
                span_der[k - 1] = 1.0
                span_d = ad.Dual(span, span_der)
                flow = -dynamics.mass_flow_rate(tr.sysp, tr.scp, d1, 0.0, nu)
                contrib = 0.5 * span_d * (ph.cp_dfrac * ph.cp_w) * flow
                # sum over points: total derivative per lane
                jac.extend(list(-contrib.der.sum(axis=0)))
                total -= float(contrib.val.sum())
            else:
                d1 = z[d1_cols] if d1_cols is not None else 1.0
                nu = nu0 + ph.cp_frac * span
                flow = -dynamics.mass_flow_rate(tr.sysp, tr.scp, d1, 0.0, nu)
                total -= float(
                    (0.5 * span * ph.cp_dfrac * ph.cp_w * flow).sum()
                )
        return total, np.asarray(jac)

    def values(self, z):
        total, _ = self._accumulate(z, with_duals=False)
        return np.array([total])

    def jac_values(self, z):
        _, jac = self._accumulate(z, with_duals=True)
        return jac


class _DenseBlock(_Block):
    """Small fully-coupled rows (boundary, linkage, statics, spans)."""

    def __init__(self, tag, cols, fn, nrows, cl, cu, tags=None):
        self.tag = tag
        self._colids = np.asarray(cols, dtype=int)
        self.fn = fn
        self.nrows = nrows
        self.cl = np.asarray(cl, dtype=float)
        self.cu = np.asarray(cu, dtype=float)
        self.tags = tags or [f"{tag}[{i}]" for i in range(nrows)]
        self._rows = np.repeat(np.arange(nrows), len(cols))
        self._cols = np.tile(self._colids, nrows)

    def pattern(self):
        return self._rows, self._cols

    def values(self, z):
        out = self.fn(list(z[self._colids]))
        return np.array([float(ad.value(o)) for o in out])

    def jac_values(self, z):
        k = len(self._colids)
        seeds = [ad.seed(z[c], j, k) for j, c in enumerate(self._colids)]
        out = self.fn(seeds)
        jac = np.zeros((self.nrows, k))
        for i, o in enumerate(out):
            if isinstance(o, ad.Dual):
                jac[i] = o.der
        return jac.ravel()


# ----------------------------------------------------------------------
# transcription


class Transcription:
    """Collocated NLP for one TransferProblem on one mesh."""

    def __init__(self, prob: TransferProblem, mesh):
        self.prob = prob
        self.sysp = prob.sys
        self.scp = prob.sc
        if len(mesh) != prob.n_phases:
            raise ValueError(
                f"mesh has {len(mesh)} phases, problem needs {prob.n_phases}"
            )
        self.mesh = list(mesh)

        # phases
        kinds = (
            ["coast"] + ["transfer"] * len(prob.domains) + ["coast"]
        )
        domains = [None, *prob.domains, None]
        self.phases: list[_Phase] = []
        off = 0
        for i, (kind, dom, pm) in enumerate(zip(kinds, domains, self.mesh)):
            ph = _Phase(i, kind, pm, dom, off)
            self.phases.append(ph)
            off = ph.end
        self.q_col = off
        self.statics_off = off + 1
        self.n = self.statics_off + 6

        sections = []
        for ph in self.phases:
            sections.append((f"p{ph.idx}.states", ph.state_off, ph.n_nodes * ph.nx))
            if ph.nctrl:
                sections.append(
                    (f"p{ph.idx}.controls", ph.ctrl_off, ph.n_coll * ph.nctrl)
                )
            sections.append((f"p{ph.idx}.anomaly", ph.nu_off, 2))
        sections.append(("q", self.q_col, 1))
        sections.append(("statics", self.statics_off, 6))
        self.layout = DecisionLayout(sections=sections, n=self.n)

        self._build_blocks()
        self._build_bounds()
        self._build_pattern()
        self._build_hessian_elements()

    # -- constraint blocks ----------------------------------------------

    def _build_blocks(self):
        prob, sysp = self.prob, self.sysp
        blocks: list[_Block] = []
        for ph in self.phases:
            blocks.append(_DefectBlock(self, ph))
        for ph in self.phases:
            if ph.kind != "transfer":
                continue
            if ph.has_controls:
                blocks.append(_UnitNormBlock(ph))
            if ph.domain.mode1 == "free" and ph.domain.mode2 == "free":
                blocks.append(_ComplementarityBlock(ph))
            blocks.append(_AltitudeBlock(self, ph))
        blocks.append(_IntegralBlock(self, self.phases))

        first, last = self.phases[0], self.phases[-1]
        s_off = self.statics_off
        orb0, orbf = prob.initial_orbit, prob.terminal_orbit
        # orbit periods as normalized-time durations
        dur0 = orb0.period / (sysp.n * sysp.t_char0)
        durf = orbf.period / (sysp.n * sysp.t_char0)

        # initial boundary: full 7-state pinned (tau starts at zero)
        target0 = np.concatenate([orb0.state, [0.0]])
        blocks.append(
            _DenseBlock(
                "bc.eq14",
                [first.state_col(0, c) for c in range(7)],
                lambda v, t=target0: [v[c] - t[c] for c in range(7)],
                7,
                np.zeros(7),
                np.zeros(7),
            )
        )
        # initial coast duration picks the departure point on the orbit.
        # The duration-angle relation and the unit-circle condition on the
        # static pair are imposed together as a smooth projection: with
        # theta = 2 pi (tau_f - tau_0) / period, the pair must equal
        # (-cos theta, -sin theta).  This is equivalent to the arctangent
        # form but has no branch cut, which matters because optimal
        # departure angles can land exactly on the wrap.
        blocks.append(
            _DenseBlock(
                "bc.eq15+eq11",
                [
                    first.state_col(0, 6),
                    first.state_col(first.n_nodes - 1, 6),
                    s_off,
                    s_off + 1,
                ],
                lambda v, d=dur0: [
                    v[2] + ad.cos(2 * np.pi * (v[1] - v[0]) / d),
                    v[3] + ad.sin(2 * np.pi * (v[1] - v[0]) / d),
                ],
                2,
                np.zeros(2),
                np.zeros(2),
                tags=["bc.eq15+eq11[c]", "bc.eq15+eq11[s]"],
            )
        )
        # terminal boundary: position/velocity pinned, tau free
        targetf = orbf.state
        blocks.append(
            _DenseBlock(
                "bc.eq16",
                [last.state_col(last.n_nodes - 1, c) for c in range(6)],
                lambda v, t=targetf: [v[c] - t[c] for c in range(6)],
                6,
                np.zeros(6),
                np.zeros(6),
            )
        )
        blocks.append(
            _DenseBlock(
                "bc.eq17+eq12",
                [
                    last.state_col(0, 6),
                    last.state_col(last.n_nodes - 1, 6),
                    s_off + 2,
                    s_off + 3,
                ],
                lambda v, d=durf: [
                    v[2] + ad.cos(2 * np.pi * (v[1] - v[0]) / d),
                    v[3] + ad.sin(2 * np.pi * (v[1] - v[0]) / d),
                ],
                2,
                np.zeros(2),
                np.zeros(2),
                tags=["bc.eq17+eq12[c]", "bc.eq17+eq12[s]"],
            )
        )
        # initial true anomaly from its static pair (same smooth projection)
        blocks.append(
            _DenseBlock(
                "bc.eq19+eq13",
                [first.nu_off, s_off + 4, s_off + 5],
                lambda v: [v[1] + ad.cos(v[0]), v[2] + ad.sin(v[0])],
                2,
                np.zeros(2),
                np.zeros(2),
                tags=["bc.eq19+eq13[c]", "bc.eq19+eq13[s]"],
            )
        )

        # interfaces
        for p in range(len(self.phases) - 1):
            a, b = self.phases[p], self.phases[p + 1]
            blocks.append(
                _DenseBlock(
                    f"link{p}.eq18",
                    [a.nu_off + 1, b.nu_off],
                    lambda v: [v[0] - v[1]],
                    1,
                    np.zeros(1),
                    np.zeros(1),
                )
            )
            an, bn = a.n_nodes - 1, 0
            if a.kind == "coast" and b.kind == "transfer":
                self._add_coast_transfer_links(blocks, p, a, b, coast_side="a")
                if p == 0 or self.phases[p - 1].kind != "transfer":
                    blocks.append(
                        _DenseBlock(
                            f"link{p}.eq25",
                            [b.state_col(0, 7)],
                            lambda v: [v[0] - 1.0],
                            1,
                            np.zeros(1),
                            np.zeros(1),
                        )
                    )
            elif a.kind == "transfer" and b.kind == "coast":
                self._add_coast_transfer_links(blocks, p, b, a, coast_side="b")
            else:  # transfer-to-transfer: full pulsating state continuity
                cols = [a.state_col(an, c) for c in range(8)] + [
                    b.state_col(bn, c) for c in range(8)
                ]
                blocks.append(
                    _DenseBlock(
                        f"link{p}.domain",
                        cols,
                        lambda v: [v[8 + c] - v[c] for c in range(8)],
                        8,
                        np.zeros(8),
                        np.zeros(8),
                    )
                )

        # spans stay chronological; coasts cannot exceed one orbit period
        for ph, span_max in zip(self.phases, self._span_caps()):
            blocks.append(
                _DenseBlock(
                    f"span.p{ph.idx}",
                    [ph.nu_off, ph.nu_off + 1],
                    lambda v: [v[1] - v[0]],
                    1,
                    np.zeros(1),
                    np.array([span_max]),
                )
            )

        self.blocks = blocks
        offs = np.cumsum([0] + [b.nrows for b in blocks])
        self._block_row_off = offs[:-1]
        self.m = int(offs[-1])
        self.row_tags = [t for b in blocks for t in b.tags]

    def _span_caps(self):
        caps = []
        for ph in self.phases:
            if ph.kind == "coast":
                orb = (
                    self.prob.initial_orbit
                    if ph.idx == 0
                    else self.prob.terminal_orbit
                )
                caps.append(orb.period)
            else:
                caps.append(4 * np.pi)
        return caps

    def _add_coast_transfer_links(self, blocks, p, coast, trans, coast_side):
        """Dimensional position/velocity/time continuity at a model switch.

        coast_side 'a': coast phase ends at the interface (its last node
        meets the transfer's first).  coast_side 'b': the transfer ends at
        the interface and the coast begins there.
        """
        sysp = self.sysp
        if coast_side == "a":
            cn, tn = coast.n_nodes - 1, 0
            nu_col = trans.nu_off  # interface anomaly = transfer start
            eqp, eqv = "eq20", "eq22"
        else:
            cn, tn = 0, trans.n_nodes - 1
            nu_col = trans.nu_off + 1
            eqp, eqv = "eq21", "eq23"

        pos_cols = (
            [coast.state_col(cn, c) for c in range(3)]
            + [trans.state_col(tn, c) for c in range(3)]
            + [nu_col]
        )

        def pos_fn(v, s=sysp):
            gamma, _, _, _ = dynamics.link_scaling(s, v[6])
            return [v[c] - gamma * v[3 + c] for c in range(3)]

        blocks.append(
            _DenseBlock(f"link{p}.{eqp}", pos_cols, pos_fn, 3, np.zeros(3), np.zeros(3))
        )

        vel_cols = (
            [coast.state_col(cn, 3 + c) for c in range(3)]
            + [trans.state_col(tn, c) for c in range(6)]
            + [nu_col]
        )

        def vel_fn(v, s=sysp):
            _, eta, xi, vel = dynamics.link_scaling(s, v[9])
            cx, cy, cz = v[0], v[1], v[2]
            px, py, pz = v[3], v[4], v[5]
            vx, vy, vz = v[6], v[7], v[8]
            return [
                vel * cx - (vx + eta * px + xi * (-py)),
                vel * cy - (vy + eta * py + xi * px),
                vel * cz - (vz + eta * pz),
            ]

        blocks.append(
            _DenseBlock(f"link{p}.{eqv}", vel_cols, vel_fn, 3, np.zeros(3), np.zeros(3))
        )

        blocks.append(
            _DenseBlock(
                f"link{p}.eq24",
                [coast.state_col(cn, 6), trans.state_col(tn, 6)],
                lambda v: [v[0] - v[1]],
                1,
                np.zeros(1),
                np.zeros(1),
            )
        )

    # -- bounds ----------------------------------------------------------

    def _build_bounds(self):
        prob = self.prob
        lb = np.full(self.n, -np.inf)
        ub = np.full(self.n, np.inf)
        self.bound_tags: dict[int, str] = {}
        for ph in self.phases:
            for node in range(ph.n_nodes):
                for c in range(6):
                    col = ph.state_col(node, c)
                    lb[col], ub[col] = -prob.pos_bound, prob.pos_bound
                # the clock box stays clear of the tau = 0 boundary row so
                # active equality rows never coincide with an active bound
                col = ph.state_col(node, 6)
                lb[col], ub[col] = -1.0, prob.tau_max
                if ph.nx == 8:
                    # upper slack for the same reason: the transfer entry
                    # mass is pinned to exactly 1 by its linkage row
                    col = ph.state_col(node, 7)
                    lb[col], ub[col] = prob.mass_min, 1.05
            for pt in range(ph.n_coll):
                for nm in ph.ctrl_names:
                    col = ph.ctrl_col(pt, nm)
                    if nm in ("d1", "d2"):
                        lb[col], ub[col] = 0.0, 1.0
                        self.bound_tags[col] = f"p{ph.idx}.bound.eq30[{nm}]@pt{pt}"
                    else:
                        # direction components obey the unit-norm equality;
                        # the box is a loose safeguard
                        lb[col], ub[col] = -1.5, 1.5
            lb[ph.nu_off : ph.nu_off + 2] = -prob.nu_max
            ub[ph.nu_off : ph.nu_off + 2] = prob.nu_max
        # the departure-anomaly projection is 2 pi periodic, so every
        # solution has replicas shifted by whole revolutions; boxing the
        # first anomaly into one padded revolution keeps cold solves from
        # drifting along the timeline into a worse replica's basin while
        # leaving the wrap point itself in the interior
        lb[self.phases[0].nu_off] = -0.5
        ub[self.phases[0].nu_off] = 2.0 * np.pi + 0.5
        lb[self.q_col], ub[self.q_col] = 0.0, prob.q_cap
        self.bound_tags[self.q_col] = "bound.eq27[q]"
        # unit-circle pairs live on their equality rows; the box only guards
        # against runaway iterates
        lb[self.statics_off : self.statics_off + 6] = -1.5
        ub[self.statics_off : self.statics_off + 6] = 1.5
        self.lb, self.ub = lb, ub

    # -- sparsity and Hessian structure -----------------------------------

    def _build_pattern(self):
        rows, cols = [], []
        for b, roff in zip(self.blocks, self._block_row_off):
            r, c = b.pattern()
            rows.append(np.asarray(r, dtype=int) + roff)
            cols.append(np.asarray(c, dtype=int))
        self._jac_rows = np.concatenate(rows)
        self._jac_cols = np.concatenate(cols)

    def _build_hessian_elements(self):
        elements = []
        for ph in self.phases:
            for pt in range(ph.n_coll):
                cols = [ph.state_col(pt, c) for c in range(ph.nx)]
                cols += [ph.ctrl_col(pt, nm) for nm in ph.ctrl_names]
                elements.append(np.asarray(cols, dtype=int))
            elements.append(
                np.asarray(
                    [ph.state_col(ph.n_nodes - 1, c) for c in range(ph.nx)],
                    dtype=int,
                )
            )
        glob = [ph.nu_off + i for ph in self.phases for i in range(2)]
        glob += [self.q_col] + list(range(self.statics_off, self.statics_off + 6))
        elements.append(np.asarray(glob, dtype=int))
        self.hess_elements = elements

    # -- NLP callbacks -----------------------------------------------------

    def constraint_values(self, z):
        z = np.asarray(z, dtype=float)
        return np.concatenate([b.values(z) for b in self.blocks])

    def constraint_jacobian(self, z):
        z = np.asarray(z, dtype=float)
        vals = np.concatenate([b.jac_values(z) for b in self.blocks])
        return sp.coo_matrix(
            (vals, (self._jac_rows, self._jac_cols)), shape=(self.m, self.n)
        ).tocsr()

    def objective_vector(self):
        """Gradient of the (linear) transfer-duration objective."""
        g = np.zeros(self.n)
        tstart = self.phases[1]
        tend = self.phases[-2]
        g[tstart.state_col(0, 6)] = -1.0
        g[tend.state_col(tend.n_nodes - 1, 6)] = 1.0
        return g

    def nlp_problem(self) -> NlpProblem:
        gobj = self.objective_vector()
        cl = np.concatenate([b.cl for b in self.blocks])
        cu = np.concatenate([b.cu for b in self.blocks])
        return NlpProblem(
            n=self.n,
            m=self.m,
            objective=lambda z: float(gobj @ z),
            gradient=lambda z: gobj.copy(),
            constraints=self.constraint_values,
            jacobian=self.constraint_jacobian,
            lb=self.lb,
            ub=self.ub,
            cl=cl,
            cu=cu,
            hess_elements=self.hess_elements,
            name=self.prob.name,
        )

    # -- guess -------------------------------------------------------------

    def initial_vector(self) -> np.ndarray:
        guess = self.prob.guess
        if guess is None:
            raise ValueError("problem carries no guess")
        if len(guess.phases) != len(self.phases):
            raise ValueError("guess phase count mismatch")
        z = np.zeros(self.n)
        for ph, pg in zip(self.phases, guess.phases):
            Xn = np.empty((ph.n_nodes, ph.nx))
            for c in range(ph.nx):
                Xn[:, c] = np.interp(ph.node_frac, pg.s, pg.states[:, c])
            z[ph.state_off : ph.state_off + Xn.size] = Xn.ravel()
            if ph.nctrl:
                if pg.controls is None:
                    raise ValueError(
                        f"phase {ph.idx} thrusts but its guess has no controls"
                    )
                full_idx = {"ux": 0, "uy": 1, "uz": 2, "d1": 3, "d2": 4}
                ctrl = np.empty((ph.n_coll, ph.nctrl))
                for j, nm in enumerate(ph.ctrl_names):
                    ctrl[:, j] = np.interp(
                        ph.cp_frac, pg.s, pg.controls[:, full_idx[nm]]
                    )
                z[ph.ctrl_off : ph.ctrl_off + ctrl.size] = ctrl.ravel()
            z[ph.nu_off] = pg.nu0
            z[ph.nu_off + 1] = pg.nuf
        z[self.q_col] = guess.q
        z[self.statics_off : self.statics_off + 6] = guess.statics
        return np.clip(z, self.lb, self.ub)

    # -- extraction ----------------------------------------------------------

    def extract(self, z) -> "CollocationSolution":
        z = np.asarray(z, dtype=float)
        phases = []
        for ph in self.phases:
            nu0, nuf = ph.anomaly(z)
            ctrl_full = np.zeros((ph.n_coll, 5))
            if ph.kind == "transfer":
                d1, d2 = ph.throttle_values(z)
                if ph.has_controls:
                    ctrl = ph.controls(z)
                    for j, nm in enumerate(("ux", "uy", "uz")):
                        ctrl_full[:, j] = ctrl[:, ph.ctrl_names.index(nm)]
                ctrl_full[:, 3] = d1
                ctrl_full[:, 4] = d2
            phases.append(
                PhaseSolution(
                    kind=ph.kind,
                    domain=ph.domain,
                    nu0=nu0,
                    nuf=nuf,
                    node_frac=ph.node_frac.copy(),
                    states=ph.states(z).copy(),
                    controls=ctrl_full,
                    mesh=self.mesh[ph.idx],
                    intervals=ph.intervals,
                )
            )
        stat = z[self.statics_off : self.statics_off + 6].copy()
        obj = float(self.objective_vector() @ z)
        return CollocationSolution(
            phases=phases, statics=stat, q=float(z[self.q_col]), objective=obj
        )

    # -- reporting -------------------------------------------------------------

    def constraint_report(self, z):
        c = self.constraint_values(z)
        cl = np.concatenate([b.cl for b in self.blocks])
        cu = np.concatenate([b.cu for b in self.blocks])
        viol = np.maximum(0.0, cl - c) + np.maximum(0.0, c - cu)
        return [
            {"tag": t, "value": float(v), "lb": float(a), "ub": float(b), "viol": float(w)}
            for t, v, a, b, w in zip(self.row_tags, c, cl, cu, viol)
        ]

    def dump_constraints(self, path, z):
        rows = sorted(self.constraint_report(z), key=lambda r: -r["viol"])
        with open(path, "w") as fh:
            fh.write(f"# {self.prob.name}: constraint rows by violation\n")
            for r in rows:
                fh.write(
                    f"{r['viol']:.3e}  {r['value']: .6e}  "
                    f"[{r['lb']: .3e}, {r['ub']: .3e}]  {r['tag']}\n"
                )


# ----------------------------------------------------------------------
# solutions


@dataclass
class PhaseSolution:
    """Collocated arc of one phase with polynomial interpolation."""

    kind: str
    domain: object
    nu0: float
    nuf: float
    node_frac: np.ndarray
    states: np.ndarray
    controls: np.ndarray  # (n_coll, 5), fixed throttles filled in
    mesh: PhaseMesh
    intervals: list

    @property
    def span(self) -> tuple[float, float]:
        return (self.nu0, self.nuf)

    def _fraction(self, nu):
        width = self.nuf - self.nu0
        if width <= 0:
            return 0.0
        return min(1.0, max(0.0, (nu - self.nu0) / width))

    def _interval_of(self, frac):
        fr = self.mesh.fractions
        k = int(np.searchsorted(fr, frac, side="right") - 1)
        return min(max(k, 0), len(self.mesh.degrees) - 1)

    def eval_state(self, nu) -> np.ndarray:
        frac = self._fraction(nu)
        k = self._interval_of(frac)
        iv = self.intervals[k]
        sup = lgr.support_points(iv["degree"])
        sigma = (
            2 * (frac - iv["frac_a"]) / (iv["frac_b"] - iv["frac_a"]) - 1.0
        )
        vals = self.states[iv["nodes"]]
        return lgr.barycentric_interpolate(sup, vals, sigma)

    def eval_control(self, nu) -> np.ndarray:
        if self.kind != "transfer":
            return np.zeros(5)
        frac = self._fraction(nu)
        k = self._interval_of(frac)
        iv = self.intervals[k]
        pts, _ = lgr.points_weights(iv["degree"])
        sigma = (
            2 * (frac - iv["frac_a"]) / (iv["frac_b"] - iv["frac_a"]) - 1.0
        )
        vals = self.controls[iv["coll"]]
        out = lgr.barycentric_interpolate(pts, vals, sigma)
        out[3] = np.clip(out[3], 0.0, 1.0)
        out[4] = np.clip(out[4], 0.0, 1.0)
        return out

    def node_anomalies(self) -> np.ndarray:
        return self.nu0 + self.node_frac * (self.nuf - self.nu0)


@dataclass
class CollocationSolution:
    phases: list
    statics: np.ndarray
    q: float
    objective: float


def transcribe(prob: TransferProblem, mesh) -> Transcription:
    """Build the collocated NLP; the Transcription bundles problem + layout."""
    return Transcription(prob, mesh)


def interpolate_phase(solution: CollocationSolution, phase: int, nus):
    """States of one phase at the requested anomalies, one row per query."""
    ps = solution.phases[phase]
    return np.vstack([ps.eval_state(nu) for nu in np.atleast_1d(nus)])


def rebuild_phase(kind, domain, nu0, nuf, mesh: PhaseMesh, states, controls):
    """Reassemble a PhaseSolution from stored node arrays and its mesh.

    Node geometry (support fractions, interval bookkeeping) is recomputed
    from the mesh exactly as the transcription lays it out, so a solution
    written to disk and read back interpolates identically.
    """
    fracs = np.asarray(mesh.fractions)
    node_frac, intervals, node_base = [], [], 0
    for k, deg in enumerate(mesh.degrees):
        fa, fb = fracs[k], fracs[k + 1]
        pts, _ = lgr.points_weights(deg)
        node_frac.extend(fa + (pts + 1.0) * 0.5 * (fb - fa))
        intervals.append(
            {
                "frac_a": float(fa),
                "frac_b": float(fb),
                "degree": deg,
                "nodes": np.arange(node_base, node_base + deg + 1),
                "coll": np.arange(node_base, node_base + deg),
            }
        )
        node_base += deg
    node_frac.append(1.0)
    states = np.asarray(states, dtype=float)
    if states.shape[0] != node_base + 1:
        raise ValueError(
            f"phase stores {states.shape[0]} node states, mesh implies {node_base + 1}"
        )
    return PhaseSolution(
        kind=kind,
        domain=domain,
        nu0=float(nu0),
        nuf=float(nuf),
        node_frac=np.asarray(node_frac),
        states=states,
        controls=np.asarray(controls, dtype=float),
        mesh=mesh,
        intervals=intervals,
    )


def solution_guess(solution: CollocationSolution, samples: int = 160):
    """Resample a collocated solution into a guess for another mesh.

    Dense interpolation keeps warm starts meaningful when the interval
    layout changes between refinement iterations or continuation steps.
    """
    from .problem import PhaseGuess, TransferGuess

    phases = []
    for ps in solution.phases:
        s = np.linspace(0.0, 1.0, samples)
        nus = ps.nu0 + s * (ps.nuf - ps.nu0)
        states = np.vstack([ps.eval_state(nu) for nu in nus])
        controls = None
        if ps.kind == "transfer":
            controls = np.vstack([ps.eval_control(nu) for nu in nus])
            controls[:, 3] = np.clip(controls[:, 3], 0.0, 1.0)
            controls[:, 4] = np.clip(controls[:, 4], 0.0, 1.0)
        phases.append(
            PhaseGuess(s=s, states=states, nu0=ps.nu0, nuf=ps.nuf, controls=controls)
        )
    return TransferGuess(
        phases=phases, statics=solution.statics.copy(), q=solution.q
    )
