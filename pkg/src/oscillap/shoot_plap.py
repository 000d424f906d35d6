"""Radial p-Laplacian shooting: first-zero location and diagnostics.

The Dirichlet problem on a ball is solved by integrating the radial
equation outward from the center at unit parameter and height c, locating
the first radius rho with v = 0, and rescaling: u(r) = v(rho r / R) solves
the problem on the radius-R ball with lambda = (rho/R)^p.  A scan over c
yields the bifurcation diagram lambda(c) whose level sets are the
solutions at a given parameter.

The integration state is (v, w, z) with w = |v'|^{p-2} v' the flux (the
equation is smooth in w even where the operator degenerates at v' = 0)
and z the accumulated path term of the energy identity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, ClassVar, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from ._rk import Event, IntegrateResult, integrate
from .errors import (
    DomainError,
    EmptyGrid,
    NonConvergence,
    NonpositiveFbar,
    NotAZeroHit,
    StalledAtCriticalPoint,
)
from .nonlinearity import Nonlinearity, ZeroSequence
from .primitives import PrimitiveCalculus
from .thresholds import per_solution_lower_bound

#: |f(c)| at or below this (scaled) means the trajectory never leaves c
STALL_TOL = 1e-12


@dataclass(frozen=True)
class ShootConfig:
    """One radial shot: operator, height, and integration controls."""

    p: float
    N: int
    c: float
    lambda_shoot: float = 1.0
    r_max: float = 50.0
    tol_ode: float = 1e-10
    event_tol: float = 1e-12
    max_bounces: int = 200

    def __post_init__(self):
        if not self.p > 1.0:
            raise DomainError(f"exponent must exceed 1, got {self.p!r}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not self.c > 0.0:
            raise DomainError(f"height must be positive, got {self.c!r}")
        if not self.lambda_shoot > 0.0:
            raise DomainError(f"shooting parameter must be positive, got "
                              f"{self.lambda_shoot!r}")
        if not self.r_max > 0.0:
            raise DomainError(f"horizon must be positive, got {self.r_max!r}")
        if not self.tol_ode > 0.0:
            raise DomainError(f"tolerance must be positive, got {self.tol_ode!r}")
        if not self.event_tol > 0.0:
            raise DomainError(f"event tolerance must be positive, got "
                              f"{self.event_tol!r}")


@dataclass(frozen=True)
class HitZero:
    """The trajectory reached v = 0 at radius rho."""

    rho: float
    kind: ClassVar[str] = "HitZero"


@dataclass(frozen=True)
class Bounced:
    """v' returned to 0 at positive height with f <= 0 there: no zero ahead."""

    r_turn: float
    v_turn: float
    kind: ClassVar[str] = "Bounced"


@dataclass(frozen=True)
class Stalled:
    """f(c) = 0: the constant trajectory (recorded by diagram scans)."""

    c: float
    kind: ClassVar[str] = "Stalled"


@dataclass(frozen=True)
class HorizonExceeded:
    """No zero and no turning point before r_max."""

    r_reached: float
    kind: ClassVar[str] = "HorizonExceeded"


Outcome = Union[HitZero, Bounced, Stalled, HorizonExceeded]


@dataclass
class Diagnostics:
    energy_residual_max: float
    F_at_max_ok: bool
    area_condition_ok: bool
    lower_bound_slack: float


@dataclass
class ShootResult:
    """Trajectory samples plus outcome and (once computed) diagnostics."""

    config: ShootConfig
    outcome: Outcome
    r: np.ndarray
    v: np.ndarray
    vp: np.ndarray
    z: np.ndarray
    n_steps: int
    rho_error_estimate: float
    lambda_rescaled: Optional[float] = None
    diagnostics: Optional[object] = None
    q_sign_changes: int = 0  # diffusion switches; only the Pucci shooter sets it

    @property
    def trajectory(self) -> np.ndarray:
        """Sampled (r, v, v') triples, one row per accepted step."""
        return np.column_stack([self.r, self.v, self.vp])


def shoot(cfg: ShootConfig, nl: Nonlinearity) -> ShootResult:
    """Integrate outward from height c until v = 0, a bounce, or the horizon.

    Starts on the symmetric origin series (the (N-1)/r term is singular at
    r = 0), watches the events v = 0 (first zero: HitZero) and w = 0
    (turning point: Bounced when f(v) <= 0 there, otherwise integration
    continues through the tangency).
    """
    p, N, c, lam = cfg.p, cfg.N, cfg.c, cfg.lambda_shoot
    fc = nl.eval(c)
    if abs(fc) <= STALL_TOL * max(1.0, c):
        raise StalledAtCriticalPoint(c, fc)

    f0 = nl.f0
    feval = nl.eval
    q = 1.0 / (p - 1.0)
    pq = 1.0 + q  # p/(p-1)
    nm1 = N - 1

    def rhs(r: float, y: Tuple[float, ...]) -> Tuple[float, float, float]:
        v, w, _ = y
        aw = abs(w)
        avp = aw ** q
        vp = avp if w >= 0.0 else -avp
        fv = feval(v) if v > 0.0 else f0
        dw = -lam * fv - nm1 * w / r
        dz = nm1 * aw ** pq / r
        return (vp, dw, dz)

    # two-term series start: the unique branch symmetric at the origin
    r0 = max(cfg.event_tol, 1e-6 * cfg.r_max)
    K = math.copysign((lam * abs(fc) / N) ** q, fc)
    v0 = c - (p - 1.0) / p * K * r0 ** pq
    w0 = -lam * fc * r0 / N
    z0 = nm1 * (lam * abs(fc) / N) ** pq * (p - 1.0) / p * r0 ** pq

    cmax = max(1.0, c)
    scale = (cmax, cmax ** (p - 1.0), cmax ** p)
    events = [Event(lambda t, y: y[0], direction=-1),
              Event(lambda t, y: y[1], direction=0)]

    rs: List[float] = [0.0, r0]
    vs: List[float] = [c, v0]
    vps: List[float] = [0.0, -abs(w0) ** q if w0 <= 0 else abs(w0) ** q]
    zs: List[float] = [0.0, z0]

    def rec(t: float, y: Tuple[float, ...]) -> None:
        rs.append(t)
        vs.append(y[0])
        w = y[1]
        vps.append(math.copysign(abs(w) ** q, w))
        zs.append(y[2])

    t, y = r0, (v0, w0, z0)
    n_steps = 0
    err_v = 0.0
    outcome: Optional[Outcome] = None
    for _ in range(cfg.max_bounces + 1):
        res = integrate(rhs, t, y, cfg.r_max, rtol=cfg.tol_ode, scale=scale,
                        events=events, record=rec, event_tol=cfg.event_tol)
        n_steps += res.n_steps
        err_v += res.error_accum[0]
        if res.status == "end":
            outcome = HorizonExceeded(res.t)
            break
        if res.event_index == 0:
            outcome = HitZero(res.t)
            y = res.y
            break
        v_turn = res.y[0]
        fv = feval(v_turn) if v_turn > 0.0 else f0
        if fv <= 0.0:
            outcome = Bounced(res.t, v_turn)
            break
        t, y = res.t, res.y
    if outcome is None:
        raise NonConvergence(
            f"more than {cfg.max_bounces} turning points before any zero")

    rho_err = math.nan
    if isinstance(outcome, HitZero):
        vp_hit = abs(y[1]) ** q
        rho_err = err_v / max(vp_hit, 1e-300)

    return ShootResult(cfg, outcome, np.array(rs), np.array(vs),
                       np.array(vps), np.array(zs), n_steps, rho_err)


def rescale_to_ball(res: ShootResult, R: float, p: float) -> float:
    """Parameter on the radius-R ball for this trajectory's profile.

    The rescaled profile u(r) = v(rho r / R) keeps the same maximum c and
    solves the problem at lambda = lambda_shoot * (rho/R)^p.
    """
    if not isinstance(res.outcome, HitZero):
        raise NotAZeroHit(f"cannot rescale a {res.outcome.kind} trajectory")
    if not R > 0.0:
        raise DomainError(f"radius must be positive, got {R!r}")
    lam = res.config.lambda_shoot * (res.outcome.rho / R) ** p
    res.lambda_rescaled = lam
    return lam


def energy_residual(res: ShootResult, pc: PrimitiveCalculus,
                    lam: Optional[float] = None) -> float:
    """Worst relative defect of the radial energy identity along the samples.

    The identity equates (p-1)/p |v'|^p plus the accumulated path term
    with lambda (F(c) - F(v(r))); its residual is the integrator's primary
    self-check.  ``lam`` defaults to the shooting parameter.
    """
    if lam is None:
        lam = res.config.lambda_shoot
    p = res.config.p
    Fc = pc.F(res.config.c)
    v = np.clip(res.v, 0.0, None)  # event overshoot may leave v at -event_tol
    lhs = (p - 1.0) / p * np.abs(res.vp) ** p + res.z
    rhs = lam * (Fc - pc.F_many(v))
    return float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(rhs))))


def check_necessary_conditions(res: ShootResult, pc: PrimitiveCalculus,
                               p: float, R: float,
                               tol: float = 1e-8) -> Diagnostics:
    """Audit a zero-hitting trajectory against the solvability conditions.

    Fills ``res.diagnostics`` with: the energy-identity residual, the sign
    check F(c) >= -tol, the area condition (F(c) at least the running
    maximum of F on [0, c], computed exactly from the tracked extrema),
    and the slack of the per-solution lower bound on the rescaled lambda.
    """
    lam = rescale_to_ball(res, R, p)
    c = res.config.c
    Fc = pc.F(c)
    sign_ok = Fc >= -tol
    area_ok = (Fc - pc.running_max(c)) >= -tol
    slack = lam - per_solution_lower_bound(pc, c, p, R)
    energy = energy_residual(res, pc)
    d = Diagnostics(energy, bool(sign_ok), bool(area_ok), float(slack))
    res.diagnostics = d
    return d


@dataclass(frozen=True)
class DiagramRow:
    c: float
    outcome: str
    rho: float
    lam: float
    F_c: float
    Fbar_c: float
    lower_bound: float
    energy_residual: float
    area_ok: Optional[bool]
    zero_interval_index: int


@dataclass(frozen=True)
class Crossing:
    """One solution of lambda(c) = lambda_star located inside a branch."""

    c: float
    lam: float
    rho: float
    zero_interval_index: int


@dataclass
class BifurcationDiagram:
    """Scan of lambda(c) over a height grid, with per-row diagnostics."""

    rows: Tuple[DiagramRow, ...]
    zeros: ZeroSequence
    nl: Nonlinearity
    pc: PrimitiveCalculus
    p: float
    N: int
    R: float
    lambda_shoot: float
    tol_ode: float
    event_tol: float
    r_max: float

    def branches(self) -> List[Tuple[int, int]]:
        """Maximal index ranges [i, j) of consecutive zero-hitting rows."""
        out: List[Tuple[int, int]] = []
        start = None
        for i, row in enumerate(self.rows):
            if row.outcome == "HitZero":
                if start is None:
                    start = i
            elif start is not None:
                out.append((start, i))
                start = None
        if start is not None:
            out.append((start, len(self.rows)))
        return out

    def _lambda_of(self, c: float) -> float:
        cfg = ShootConfig(self.p, self.N, c, lambda_shoot=self.lambda_shoot,
                          r_max=self.r_max, tol_ode=self.tol_ode,
                          event_tol=self.event_tol)
        res = shoot(cfg, self.nl)
        if not isinstance(res.outcome, HitZero):
            raise NonConvergence(
                f"no zero hit at height {c!r} inside a bracketing interval")
        return rescale_to_ball(res, self.R, self.p)

    def solutions_at(self, lambda_star: float) -> List[Crossing]:
        """All heights where the diagram crosses the level lambda_star.

        Adjacent zero-hitting grid rows bracketing the level are refined
        by bracketed root finding in c (each evaluation is a fresh shot).
        """
        if not lambda_star > 0.0:
            raise DomainError(f"level must be positive, got {lambda_star!r}")
        out: List[Crossing] = []
        for i0, i1 in self.branches():
            for i in range(i0, i1):
                row = self.rows[i]
                g0 = row.lam - lambda_star
                if g0 == 0.0:
                    out.append(Crossing(row.c, row.lam, row.rho,
                                        row.zero_interval_index))
                    continue
                if i + 1 >= i1:
                    continue
                nxt = self.rows[i + 1]
                g1 = nxt.lam - lambda_star
                if g0 * g1 < 0.0:
                    c_star = float(brentq(
                        lambda c: self._lambda_of(c) - lambda_star,
                        row.c, nxt.c, xtol=1e-12 * max(1.0, nxt.c), rtol=1e-13))
                    lam = self._lambda_of(c_star)
                    rho = self.R * (lam / self.lambda_shoot) ** (1.0 / self.p)
                    out.append(Crossing(c_star, lam,
                                        rho, self.zeros.interval_index(c_star)))
        return out


def diagram(nl: Nonlinearity, p: float, N: int, R: float,
            c_grid: Sequence[float], zeros: ZeroSequence,
            pc: Optional[PrimitiveCalculus] = None,
            lambda_shoot: float = 1.0, tol_ode: float = 1e-8,
            event_tol: float = 1e-10, r_max: float = 50.0,
            threads: int = 1) -> BifurcationDiagram:
    """One shot per grid height, merged in grid order.

    Heights where f vanishes are recorded as Stalled rows rather than
    failing the scan.  ``threads`` fans the independent shots out over a
    thread pool; the row order is fixed by the grid either way.
    """
    if len(c_grid) == 0:
        raise EmptyGrid("diagram needs at least one height")
    if pc is None:
        pc = PrimitiveCalculus(nl, p=p)

    def one(c: float) -> DiagramRow:
        c = float(c)
        F_c = pc.F(c)
        Fbar_c = pc.Fbar(c)
        idx = zeros.interval_index(c)
        try:
            bound = per_solution_lower_bound(pc, c, p, R)
        except NonpositiveFbar:
            bound = math.nan
        try:
            cfg = ShootConfig(p, N, c, lambda_shoot=lambda_shoot,
                              r_max=r_max, tol_ode=tol_ode,
                              event_tol=event_tol)
            res = shoot(cfg, nl)
        except StalledAtCriticalPoint:
            return DiagramRow(c, "Stalled", math.nan, math.nan, F_c, Fbar_c,
                              bound, math.nan, None, idx)
        if isinstance(res.outcome, HitZero):
            d = check_necessary_conditions(res, pc, p, R)
            return DiagramRow(c, "HitZero", res.outcome.rho,
                              res.lambda_rescaled, F_c, Fbar_c, bound,
                              d.energy_residual_max,
                              bool(d.F_at_max_ok and d.area_condition_ok), idx)
        return DiagramRow(c, res.outcome.kind, math.nan, math.nan, F_c,
                          Fbar_c, bound, math.nan, None, idx)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = tuple(ex.map(one, c_grid))
    else:
        rows = tuple(one(c) for c in c_grid)
    return BifurcationDiagram(rows, zeros, nl, pc, p, N, R, lambda_shoot,
                              tol_ode, event_tol, r_max)


CSV_COLUMNS = ("c", "outcome", "rho", "lambda", "F_c", "Fbar_c",
               "lower_bound", "energy_residual", "area_ok",
               "zero_interval_index")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def diagram_csv_lines(diag: BifurcationDiagram) -> List[str]:
    """Deterministic CSV encoding of the scan, one line per grid height."""
    lines = [",".join(CSV_COLUMNS)]
    for r in diag.rows:
        area = "" if r.area_ok is None else ("true" if r.area_ok else "false")
        lines.append(",".join([
            _fmt(r.c), r.outcome, _fmt(r.rho), _fmt(r.lam), _fmt(r.F_c),
            _fmt(r.Fbar_c), _fmt(r.lower_bound), _fmt(r.energy_residual),
            area, str(r.zero_interval_index),
        ]))
    return lines


def write_diagram_csv(diag: BifurcationDiagram, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(diagram_csv_lines(diag)) + "\n")


def clustered_heights(zeros: ZeroSequence, k_range: Tuple[int, int] = (2, 7),
                      base_points: int = 12,
                      c_min: Optional[float] = None,
                      c_max: Optional[float] = None) -> np.ndarray:
    """Height grid refined geometrically toward each zero of f.

    Near a zero alpha the diagram spikes, so crossings of large levels
    live at heights alpha (1 +/- 10^-k); the grid places those points for
    k in ``k_range`` on both sides plus ``base_points`` uniform heights
    per gap, and never lands exactly on a zero.
    """
    asc = zeros.ascending()
    pts: List[float] = []
    for a in asc:
        for k in range(k_range[0], k_range[1] + 1):
            off = a * 10.0 ** -k
            pts.append(a - off)
            pts.append(a + off)
    edges = [0.0] + list(asc)
    for lo, hi in zip(edges[:-1], edges[1:]):
        pts.extend(np.linspace(lo, hi, base_points + 2)[1:-1])
    arr = np.unique(np.array(pts, dtype=float))
    if c_min is not None:
        arr = arr[arr >= c_min]
    if c_max is not None:
        arr = arr[arr <= c_max]
    return arr
