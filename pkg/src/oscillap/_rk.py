"""Embedded Dormand-Prince 5(4) stepper on small tuple states.

The radial shooting problems integrate 2- or 3-component systems whose
right-hand sides are a handful of float operations, so the stepper works
on plain tuples of floats; per-step overhead stays in the microsecond
range, which a generic array-based solver cannot match at this size.

Events are located by sign change between accepted steps: the crossing
offset is solved by bracketed root finding on the map
``tau -> g(one RK5 step of size tau from the step start)``, which is
smooth in tau and reuses the already-computed first stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from scipy.optimize import brentq

from .errors import NonConvergence, NonintegrableStep

# Dormand-Prince coefficients
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (9017 / 3168, -355 / 33, 46732 / 5247,
                                49 / 176, -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-minus-fourth order error weights
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ALPHA = 0.7 / 5.0   # PI step controller exponents for a 5th-order pair
_BETA = 0.4 / 5.0


def _stages(f, t, y, h, k1):
    """Stages k2..k6 and the 5th-order solution for one step of size h."""
    n = len(y)
    y2 = tuple(y[i] + h * _A21 * k1[i] for i in range(n))
    k2 = f(t + _C2 * h, y2)
    y3 = tuple(y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(n))
    k3 = f(t + _C3 * h, y3)
    y4 = tuple(y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
               for i in range(n))
    k4 = f(t + _C4 * h, y4)
    y5 = tuple(y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i]
                           + _A54 * k4[i]) for i in range(n))
    k5 = f(t + _C5 * h, y5)
    y6 = tuple(y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                           + _A64 * k4[i] + _A65 * k5[i]) for i in range(n))
    k6 = f(t + h, y6)
    ynew = tuple(y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                             + _B5 * k5[i] + _B6 * k6[i]) for i in range(n))
    return k2, k3, k4, k5, k6, ynew


def _step(f, t, y, h, k1):
    """One embedded step: returns (ynew, k7, per-component error estimate)."""
    n = len(y)
    _, k3, k4, k5, k6, ynew = _stages(f, t, y, h, k1)
    k7 = f(t + h, ynew)
    err = tuple(h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                     + _E6 * k6[i] + _E7 * k7[i]) for i in range(n))
    return ynew, k7, err


def _advance(f, t, y, h, k1):
    """Fifth-order solution only, for event localization probes."""
    return _stages(f, t, y, h, k1)[-1]


@dataclass
class Event:
    """Sign-change event on a scalar function of the state.

    ``direction``: -1 fires on + -> -, +1 on - -> +, 0 on any flip.  An
    event starting at g = 0 stays disarmed until g moves off zero, so a
    restart exactly on the crossing does not re-fire immediately.
    """

    g: Callable[[float, Tuple[float, ...]], float]
    direction: int = 0


@dataclass
class IntegrateResult:
    status: str                 # "event" or "end"
    t: float
    y: Tuple[float, ...]
    event_index: Optional[int]
    n_steps: int
    error_accum: Tuple[float, ...]  # summed |local error| per component


def integrate(
    f: Callable[[float, Tuple[float, ...]], Tuple[float, ...]],
    t0: float,
    y0: Tuple[float, ...],
    t_end: float,
    rtol: float,
    scale: Sequence[float],
    events: Sequence[Event] = (),
    record: Optional[Callable[[float, Tuple[float, ...]], None]] = None,
    max_steps: int = 500_000,
    event_tol: float = 1e-12,
    first_step: Optional[float] = None,
) -> IntegrateResult:
    """Integrate y' = f(t, y) from t0 to t_end or the first fired event.

    ``scale`` gives per-component magnitudes; the error test uses
    tolerance rtol*(scale_i + |y_i|) per component.  ``record`` is called
    after every accepted step (and at the event point).  Raises
    NonintegrableStep on step-size underflow and NonConvergence when the
    step budget runs out.
    """
    if not t_end > t0:
        raise NonConvergence(f"empty integration span [{t0!r}, {t_end!r}]")
    n = len(y0)
    t, y = t0, tuple(float(v) for v in y0)
    k1 = f(t, y)

    # reference signs for event arming; 0 means not yet armed
    signs = [_sign(ev.g(t, y)) for ev in events]

    def tolv(a, b):
        return tuple(rtol * (scale[i] + max(abs(a[i]), abs(b[i])))
                     for i in range(n))

    if first_step is not None:
        h = float(first_step)
    else:
        d0 = max(abs(y[i]) / scale[i] for i in range(n))
        d1 = max(abs(k1[i]) / scale[i] for i in range(n))
        h = 0.01 * d0 / d1 if d1 > 0 and d0 > 0 else (t_end - t0) * 1e-4
        h = max(h, 1e-12 * (t_end - t0))
    h = min(h, t_end - t)

    err_prev = 1.0
    err_accum = [0.0] * n
    steps = 0
    while True:
        if steps >= max_steps:
            raise NonConvergence(
                f"integration exceeded {max_steps} steps at t={t!r}",
                best=(t, y))
        if h < 1e-14 * max(1.0, abs(t)):
            raise NonintegrableStep(
                f"step size underflow: h={h!r} at t={t!r}")
        last = h >= t_end - t
        if last:
            h = t_end - t

        ynew, k7, le = _step(f, t, y, h, k1)
        steps += 1
        tv = tolv(y, ynew)
        err = math.sqrt(sum((le[i] / tv[i]) ** 2 for i in range(n)) / n)

        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            continue

        # event scan over the accepted span
        hit_tau, hit_idx = None, None
        for idx, ev in enumerate(events):
            g1 = ev.g(t + h, ynew)
            s1 = _sign(g1)
            s0 = signs[idx]
            if s0 == 0:
                signs[idx] = s1
                continue
            fired = (s1 != s0 and s1 != 0) or (s1 == 0)
            if fired and ev.direction != 0 and s0 != -ev.direction:
                fired = False
            if not fired:
                continue
            tau = _locate(f, ev.g, t, y, k1, h, event_tol)
            if hit_tau is None or tau < hit_tau:
                hit_tau, hit_idx = tau, idx

        for i in range(n):
            err_accum[i] += abs(le[i])

        if hit_tau is not None:
            t_ev = t + hit_tau
            y_ev = _advance(f, t, y, hit_tau, k1) if hit_tau < h else ynew
            if record is not None:
                record(t_ev, y_ev)
            return IntegrateResult("event", t_ev, y_ev, hit_idx, steps,
                                   tuple(err_accum))

        t, y, k1 = t + h, ynew, k7
        for idx, ev in enumerate(events):
            s = _sign(ev.g(t, y))
            if s != 0:
                signs[idx] = s
        if record is not None:
            record(t, y)
        if last:
            return IntegrateResult("end", t, y, None, steps, tuple(err_accum))

        fac = _SAFETY * err ** -_ALPHA * err_prev ** _BETA if err > 0 else _MAX_FACTOR
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, fac))
        h = min(h, t_end - t)
        err_prev = max(err, 1e-10)


def _sign(x: float) -> int:
    if x > 0.0:
        return 1
    if x < 0.0:
        return -1
    return 0


def _locate(f, g, t, y, k1, h, event_tol):
    """Offset tau in (0, h] where g crosses zero along the step."""

    def phi(tau):
        if tau == 0.0:
            return g(t, y)
        return g(t + tau, _advance(f, t, y, tau, k1))

    lo, hi = 0.0, h
    flo, fhi = phi(lo), phi(hi)
    if fhi == 0.0:
        return hi
    if flo == 0.0 or flo * fhi > 0.0:
        # the sign flip came from the arming logic (start at 0); bisect a
        # bracket by marching from the left endpoint
        probe = h * 1e-6
        while probe < h:
            fp = phi(probe)
            if fp != 0.0 and fp * fhi < 0.0:
                lo, flo = probe, fp
                break
            probe *= 8.0
        else:
            return hi
    tau = float(brentq(phi, lo, hi, xtol=max(event_tol, 1e-15), rtol=1e-15))
    # Bias the returned offset strictly past the crossing: brentq can stop a
    # hair on the near side, and a caller restarting there would re-detect
    # the same crossing forever.  phi(h) is on the far side, so this ends.
    snear = flo > 0.0
    step = max(event_tol, 4e-16 * abs(t), 1e-15 * h)
    while tau < h:
        ft = phi(tau)
        if ft == 0.0 or (ft > 0.0) != snear:
            break
        tau = min(h, tau + step)
        step *= 4.0
    return tau
