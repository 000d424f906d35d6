"""Existence and nonexistence thresholds for radial problems on balls.

Two families of constants are computed from the primitive calculus of a
nonlinearity f:

* a closed-form nonexistence threshold ``lambda_under`` built from the
  liminf/limsup of F(s)/s^p toward the accumulation point, below which no
  positive radial solution on the ball can exist, and

* an existence sequence ``lambda_n = (C2/C1) * gamma_n^p / Fbar(gamma_n)``
  whose limit ``lambda_bar`` certifies parameter values with infinitely
  many solutions nearby.

Both are reported together in a :class:`ThresholdReport` so the ordering
``lambda_under <= lambda_bar`` can be audited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, InfeasibleDelta, NonpositiveFbar
from .nonlinearity import (
    DIRECTION_INFINITY,
    DIRECTION_ZERO,
    ClippedBelowFirstZero,
    Nonlinearity,
    ZeroSequence,
    find_zeros,
)
from .primitives import LimitEstimate, PrimitiveCalculus

#: relative slack allowed when auditing lambda_under <= lambda_bar
ORDER_TOL = 1e-12

#: number of candidate boundary-layer widths tried per gamma_n
DELTA_GRID_POINTS = 64


@dataclass(frozen=True)
class BallGeometry:
    """Ball of radius R in dimension N with an optional boundary layer.

    The boundary layer is the annulus of width ``delta`` along the sphere;
    existence constants need its measure, nonexistence ones do not, so
    ``delta`` may be left unset.
    """

    N: int
    R: float
    delta: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not (self.R > 0.0 and math.isfinite(self.R)):
            raise DomainError(f"radius must be positive and finite, got {self.R!r}")
        if self.delta is not None and not (0.0 < self.delta < self.R):
            raise DomainError(
                f"boundary layer width must lie in (0, R), got {self.delta!r}")

    @property
    def unit_ball_volume(self) -> float:
        """Volume of the unit ball in dimension N."""
        return math.pi ** (self.N / 2.0) / math.gamma(self.N / 2.0 + 1.0)

    @property
    def measure(self) -> float:
        """Volume of the ball."""
        return self.unit_ball_volume * self.R ** self.N

    @property
    def boundary_layer_measure(self) -> float:
        """Volume of the annulus within delta of the boundary."""
        if self.delta is None:
            raise DomainError("boundary layer width is unset")
        return self.unit_ball_volume * (self.R ** self.N - (self.R - self.delta) ** self.N)

    def with_delta(self, delta: float) -> "BallGeometry":
        return BallGeometry(self.N, self.R, delta)


@dataclass(frozen=True)
class Operator:
    """Which radial operator the thresholds refer to."""

    kind: str        # "p_laplacian" or "pucci"
    parameter: float  # the exponent p, or the ellipticity ratio Lambda

    def __post_init__(self):
        if self.kind not in ("p_laplacian", "pucci"):
            raise DomainError(f"unknown operator kind {self.kind!r}")
        if self.kind == "p_laplacian" and not self.parameter > 1.0:
            raise DomainError(f"exponent must exceed 1, got {self.parameter!r}")
        if self.kind == "pucci" and not self.parameter >= 1.0:
            raise DomainError(f"ellipticity ratio must be >= 1, got {self.parameter!r}")

    @classmethod
    def p_laplacian(cls, p: float) -> "Operator":
        return cls("p_laplacian", float(p))

    @classmethod
    def pucci(cls, Lambda: float) -> "Operator":
        return cls("pucci", float(Lambda))

    def to_json(self) -> dict:
        key = "p" if self.kind == "p_laplacian" else "Lambda"
        return {"kind": self.kind, key: self.parameter}


class ThresholdRow(NamedTuple):
    """One term of the existence sequence."""

    gamma: float
    delta: float
    C1: float
    C2: float
    lam: float


class ReducedNonlinearity(NamedTuple):
    """Result of the negative-f(0) reduction."""

    nl: Nonlinearity
    applied: bool


def _check_limits(L_minus: float, L_plus: float) -> None:
    if math.isnan(L_minus) or math.isnan(L_plus):
        raise DomainError("limit estimates must not be NaN")
    if not (math.isfinite(L_minus) and math.isfinite(L_plus)):
        raise DomainError(
            f"closed-form threshold needs finite limits, got ({L_minus!r}, {L_plus!r})")
    if L_minus > L_plus:
        raise DomainError(
            f"liminf exceeds limsup: {L_minus!r} > {L_plus!r}")


def lambda_under_plap(p: float, R: float, L_minus: float, L_plus: float) -> float:
    """Nonexistence threshold for the p-Laplacian on a ball of radius R.

    Below the returned value no positive radial solution exists.  Returns
    ``inf`` in the degenerate cases (limsup negative, or both limits zero)
    where no positive solution exists for any parameter.
    """
    if not (p > 1.0):
        raise DomainError(f"exponent must exceed 1, got {p!r}")
    if not (R > 0.0):
        raise DomainError(f"radius must be positive, got {R!r}")
    _check_limits(L_minus, L_plus)
    if L_plus < 0.0 or (L_minus == 0.0 and L_plus == 0.0):
        return math.inf
    return (p - 1.0) / (p * R ** p * (L_plus - min(0.0, L_minus)))


def lambda_under_pucci(Lambda: float, R: float, L_minus_L: float,
                       L_plus_L: float) -> float:
    """Nonexistence threshold for the maximal Pucci operator on a ball.

    The limits are those of the sign-weighted primitive F_Lambda(s)/s^2.
    At Lambda = 1 this coincides with ``lambda_under_plap`` at p = 2.
    """
    if not (Lambda >= 1.0):
        raise DomainError(f"ellipticity ratio must be >= 1, got {Lambda!r}")
    if not (R > 0.0):
        raise DomainError(f"radius must be positive, got {R!r}")
    _check_limits(L_minus_L, L_plus_L)
    if L_plus_L < 0.0 or (L_minus_L == 0.0 and L_plus_L == 0.0):
        return math.inf
    return 1.0 / (2.0 * Lambda * R ** 2 * (L_plus_L - min(0.0, L_minus_L)))


def _kappa(M: float, ell: str) -> float:
    # volume fraction the comparison argument must keep: 1/(1+M) when the
    # heights shrink to zero, half that when they grow without bound
    if ell == DIRECTION_ZERO:
        return 1.0 / (1.0 + M)
    return 1.0 / (2.0 * (1.0 + M))


def lambda_n_sequence(pc: PrimitiveCalculus, geom: BallGeometry,
                      gammas: Sequence[float], M: float = 0.0,
                      beta: float = 1.0, ell: str = DIRECTION_INFINITY,
                      which: str = "F",
                      delta_points: int = DELTA_GRID_POINTS) -> List[ThresholdRow]:
    """Existence sequence lambda_n = (C2/C1) gamma_n^p / Fbar(gamma_n).

    For each height gamma_n the boundary-layer width delta is chosen on a
    geometric grid to minimize lambda_n subject to C1 > 0, where

        C1 = kappa*|B| - |layer|,   C2 = (beta/p)*|B|/delta^p,

    with kappa = 1/(1+M) toward zero and 1/(2(1+M)) toward infinity.
    ``which`` selects the plain primitive range ``"F"`` or the
    sign-weighted ``"F_Lambda"`` used by the Pucci variant.
    """
    if M < 0.0 or not math.isfinite(M):
        raise DomainError(f"M must be finite and >= 0, got {M!r}")
    if not (beta > 0.0):
        raise DomainError(f"beta must be positive, got {beta!r}")
    if ell not in (DIRECTION_ZERO, DIRECTION_INFINITY):
        raise DomainError(f"unknown accumulation direction {ell!r}")
    if which not in ("F", "F_Lambda"):
        raise DomainError(f"which must be 'F' or 'F_Lambda', got {which!r}")
    if delta_points < 2:
        raise DomainError(f"need at least 2 grid points, got {delta_points!r}")

    p = pc.p
    N, R = geom.N, geom.R
    omega = geom.unit_ball_volume
    measure = omega * R ** N

    kappa = _kappa(M, ell)
    # C1(delta) > 0  <=>  (R - delta)^N > (1 - kappa) R^N
    delta_max = R * (1.0 - (1.0 - kappa) ** (1.0 / N))
    if not delta_max > 0.0:
        raise InfeasibleDelta(
            f"no boundary layer width in (0, {R!r}) keeps C1 positive (M={M!r})")
    grid = delta_max * np.geomspace(1e-4, 1.0 - 2.0 ** -12, delta_points)

    C2_grid = (beta / p) * measure / grid ** p
    C1_grid = kappa * measure - omega * (R ** N - (R - grid) ** N)
    feasible = C1_grid > 0.0
    if not feasible.any():
        raise InfeasibleDelta("every candidate boundary layer width leaves C1 <= 0")
    ratio = np.where(feasible, C2_grid / np.where(feasible, C1_grid, 1.0), math.inf)
    # the delta dependence factorizes out of lambda_n, so one grid minimum serves
    j = int(np.argmin(ratio))

    fbar = pc.Fbar if which == "F" else pc.Fbar_Lambda
    rows: List[ThresholdRow] = []
    for g in gammas:
        if not (g > 0.0 and math.isfinite(g)):
            raise DomainError(f"heights must be positive and finite, got {g!r}")
        fb = fbar(g)
        if not fb > 0.0:
            raise NonpositiveFbar(
                f"primitive range at height {g!r} is {fb!r}; threshold undefined")
        rows.append(ThresholdRow(float(g), float(grid[j]), float(C1_grid[j]),
                                 float(C2_grid[j]), float(ratio[j] * g ** p / fb)))
    return rows


def lambda_bar_estimate(rows: Sequence[ThresholdRow]) -> Tuple[float, bool]:
    """Limit of the existence sequence: last-quartile mean plus trend flag.

    The flag reports whether the computed lambda_n are monotone, a sanity
    signal that the sequence has settled; the mean is never extrapolated.
    """
    if not rows:
        raise DomainError("cannot estimate a limit from an empty sequence")
    lams = np.array([r.lam for r in rows], dtype=float)
    k = max(1, len(lams) // 4)
    bar = float(lams[-k:].mean())
    d = np.diff(lams)
    tol = 1e-12 * np.abs(lams[:-1])
    monotone = bool(len(d) == 0 or np.all(d >= -tol) or np.all(d <= tol))
    return bar, monotone


def per_solution_lower_bound(pc: PrimitiveCalculus, c: float, p: float,
                             R: float) -> float:
    """Bound every radial solution of max height c must satisfy.

    A p-Laplacian solution with max height c on the ball of radius R forces
    lambda >= (p-1) c^p / (p R^p Fbar(c)); diagrams are audited against it.
    """
    if not (c > 0.0):
        raise DomainError(f"height must be positive, got {c!r}")
    if not (p > 1.0):
        raise DomainError(f"exponent must exceed 1, got {p!r}")
    if not (R > 0.0):
        raise DomainError(f"radius must be positive, got {R!r}")
    fb = pc.Fbar(c)
    if not fb > 0.0:
        raise NonpositiveFbar(
            f"primitive range at height {c!r} is {fb!r}; no finite bound")
    return (p - 1.0) * c ** p / (p * R ** p * fb)


def pucci_per_solution_lower_bound(pc: PrimitiveCalculus, c: float,
                                   Lambda: float, R: float) -> float:
    """Pucci analogue: lambda >= c^2 / (2 Lambda R^2 Fbar_Lambda(c))."""
    if not (c > 0.0):
        raise DomainError(f"height must be positive, got {c!r}")
    if not (Lambda >= 1.0):
        raise DomainError(f"ellipticity ratio must be >= 1, got {Lambda!r}")
    if not (R > 0.0):
        raise DomainError(f"radius must be positive, got {R!r}")
    fb = pc.Fbar_Lambda(c)
    if not fb > 0.0:
        raise NonpositiveFbar(
            f"weighted primitive range at height {c!r} is {fb!r}; no finite bound")
    return c * c / (2.0 * Lambda * R ** 2 * fb)


def reduce_negative_f0(nl: Nonlinearity,
                       zero_tolerance: float = 1e-9) -> ReducedNonlinearity:
    """Replace f by its positive part below the first zero when f(0) < 0.

    Thresholds computed for the clipped nonlinearity transfer back to f:
    the primitives differ by a constant beyond the first zero, so the
    asymptotic limits agree.  When f(0) >= 0 the input is returned with
    ``applied = False``.
    """
    f0 = nl.f0
    if f0 >= 0.0:
        return ReducedNonlinearity(nl, False)
    if nl.zero_accumulation == DIRECTION_ZERO:
        raise DomainError(
            "f(0) < 0 is incompatible with zeros accumulating at 0")
    alpha1 = find_zeros(nl, 1, zero_tolerance=zero_tolerance).alphas[0]
    return ReducedNonlinearity(ClippedBelowFirstZero(nl, alpha1), True)


def propose_gammas(pc: PrimitiveCalculus, zeros: ZeroSequence,
                   count: Optional[int] = None) -> List[float]:
    """Candidate heights: maximizers of Fbar(s)/s^p between successive zeros.

    One golden-section search runs per gap between consecutive zeros of f
    (plus the gap from 0 for zeros marching to infinity), so the returned
    heights interleave the zeros.  Gaps whose best ratio is not positive
    are skipped.  Results are ordered toward the accumulation point.
    """
    asc = list(zeros.ascending())
    if zeros.direction == DIRECTION_INFINITY:
        gaps = list(zip([0.0] + asc[:-1], asc))
    else:
        gaps = list(zip(asc[:-1], asc[1:]))[::-1]  # march toward 0

    p = pc.p
    out: List[float] = []
    for lo, hi in gaps:
        if count is not None and len(out) >= count:
            break
        a = lo + 1e-12 * (hi - lo) if lo == 0.0 else lo
        res = minimize_scalar(lambda s: -pc.Fbar(s) / s ** p,
                              bounds=(a, hi), method="bounded",
                              options={"xatol": 1e-10 * hi})
        g = float(res.x)
        if pc.Fbar(g) > 0.0:
            out.append(g)
    return out


def estimate_M(pc: PrimitiveCalculus, gammas: Sequence[float]) -> float:
    """Smallest constant with -min F on [0, gamma] <= M * F(gamma) sampled.

    Zero when F never dips below 0 on the sampled heights.
    """
    worst = 0.0
    for g in gammas:
        if not (g > 0.0):
            raise DomainError(f"heights must be positive, got {g!r}")
        dip = max(0.0, -pc.running_min(g))
        if dip == 0.0:
            continue
        Fg = pc.F(g)
        if not Fg > 0.0:
            raise DomainError(
                f"F({g!r}) = {Fg!r} <= 0 while F dips below zero; no finite "
                "constant bounds the dip at this height")
        worst = max(worst, dip / Fg)
    return worst


@dataclass(frozen=True)
class ThresholdReport:
    """Both thresholds for one nonlinearity/operator pair, with provenance.

    ``lambda_under`` is the closed-form nonexistence threshold (may be 0
    when the limits diverge and no window is certified, or inf in the
    degenerate cases); ``lambda_bar`` the existence sequence limit.
    """

    lambda_under: float
    lambda_bar: float
    rows: Tuple[ThresholdRow, ...]
    M: float
    limits: LimitEstimate
    operator: Operator
    geometry: BallGeometry
    beta: float
    direction: str
    monotone: bool

    def __post_init__(self):
        if self.lambda_under < 0.0 or math.isnan(self.lambda_under):
            raise DomainError(f"lambda_under must be >= 0, got {self.lambda_under!r}")
        if self.lambda_bar < 0.0 or math.isnan(self.lambda_bar):
            raise DomainError(f"lambda_bar must be >= 0, got {self.lambda_bar!r}")
        for r in self.rows:
            if not (r.C1 > 0.0 and r.C2 > 0.0 and r.lam > 0.0):
                raise DomainError(f"invalid sequence row {r!r}")
        if (math.isfinite(self.lambda_under) and math.isfinite(self.lambda_bar)
                and self.lambda_under > self.lambda_bar * (1.0 + ORDER_TOL)):
            raise DomainError(
                f"threshold ordering violated: lambda_under={self.lambda_under!r} "
                f"> lambda_bar={self.lambda_bar!r}")

    def to_json(self) -> dict:
        def ext(x: float):
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return x

        if self.operator.kind == "p_laplacian":
            under_formula = "(p-1)/(p*R^p*(L_plus - min(0, L_minus)))"
        else:
            under_formula = "1/(2*Lambda*R^2*(L_plus - min(0, L_minus)))"
        kappa_formula = ("1/(1+M)" if self.direction == DIRECTION_ZERO
                         else "1/(2*(1+M))")
        return {
            "lambda_under": ext(self.lambda_under),
            "lambda_bar": ext(self.lambda_bar),
            "lambda_bar_monotone": self.monotone,
            "M": self.M,
            "beta": self.beta,
            "direction": self.direction,
            "operator": self.operator.to_json(),
            "geometry": {"N": self.geometry.N, "R": self.geometry.R},
            "limits": self.limits.to_json(),
            "sequence": [
                {"gamma": r.gamma, "delta": r.delta, "C1": r.C1,
                 "C2": r.C2, "lambda": r.lam}
                for r in self.rows
            ],
            "formulas": {
                "lambda_under": under_formula,
                "lambda_n": "(C2/C1)*gamma^p/Fbar(gamma)",
                "C1": f"kappa*|B| - |layer|, kappa = {kappa_formula}",
                "C2": "(beta/p)*|B|/delta^p",
                "lambda_bar": "mean of the last quartile of lambda_n",
            },
        }


def compute_thresholds(pc: PrimitiveCalculus, geom: BallGeometry,
                       direction: str, gammas: Optional[Sequence[float]] = None,
                       count: int = 12, M: Optional[float] = None,
                       beta: float = 1.0,
                       operator: Optional[Operator] = None) -> ThresholdReport:
    """Assemble the full report: limits, both thresholds, and the sequence.

    ``gammas`` defaults to maximizers of Fbar(s)/s^p between the first
    ``count + 1`` zeros of f; ``M`` defaults to the sampled dip constant.
    Divergent limits yield lambda_under = 0 (no window certified); the
    both-zero degenerate case yields inf.
    """
    if operator is None:
        operator = Operator.p_laplacian(pc.p)
    which = "F" if operator.kind == "p_laplacian" else "F_Lambda"

    limits = pc.estimate_limits(which=which, direction=direction)
    if limits.classification == "FinitePair":
        if operator.kind == "p_laplacian":
            under = lambda_under_plap(pc.p, geom.R, limits.L_minus, limits.L_plus)
        else:
            under = lambda_under_pucci(operator.parameter, geom.R,
                                       limits.L_minus, limits.L_plus)
    elif limits.classification == "BothZero":
        under = math.inf
    else:
        under = 0.0  # a diverging limit certifies no nonexistence window

    if gammas is None:
        zeros = find_zeros(pc.nl, count + 1)
        gammas = propose_gammas(pc, zeros, count=count)
    if not gammas:
        raise DomainError("no usable heights: every zero gap had Fbar <= 0")
    if M is None:
        M = estimate_M(pc, gammas)

    rows = lambda_n_sequence(pc, geom, gammas, M=M, beta=beta,
                             ell=direction, which=which)
    bar, monotone = lambda_bar_estimate(rows)
    return ThresholdReport(under, bar, tuple(rows), float(M), limits,
                           operator, geom, float(beta), direction, monotone)
