"""Dormand-Prince 5(4) for small scalar systems.

Plain-float implementations: the systems integrated here have two to four
components and are stepped hundreds of thousands of times per analysis, where
per-call overhead of array-based solvers dominates.

``integrate`` steps the shooting ODE with error control and locates sign
changes of an event function on the accepted steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy.optimize import brentq

Vector = list[float]
RHS = Callable[[float, Sequence[float]], Vector]

__all__ = [
    "StepSizeUnderflow", "dopri5_step", "error_norm", "integrate", "IntegrationResult",
]


class StepSizeUnderflow(ArithmeticError):
    def __init__(self, t: float, h: float):
        super().__init__(f"step size underflow at t={t:.17g} (h={h:.3g})")
        self.t = t
        self.h = h


# Dormand-Prince 5(4)
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                22 / 525, -1 / 40)


def dopri5_step(fun: RHS, t: float, y: Sequence[float], h: float,
                k1: Sequence[float]) -> tuple[Vector, Vector, Vector]:
    """One DOPRI5 step. Returns (y_new, f(t+h, y_new), local error estimate)."""
    n = len(y)
    r = range(n)
    k2 = fun(t + _C2 * h, [y[i] + h * _A21 * k1[i] for i in r])
    k3 = fun(t + _C3 * h, [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in r])
    k4 = fun(t + _C4 * h, [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in r])
    k5 = fun(t + _C5 * h, [y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i]
                                      + _A54 * k4[i]) for i in r])
    k6 = fun(t + h, [y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i]
                                 + _A65 * k5[i]) for i in r])
    y_new = [y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
             for i in r]
    k7 = fun(t + h, y_new)
    err = [h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i]
                + _E7 * k7[i]) for i in r]
    return y_new, k7, err


def error_norm(err: Sequence[float], y: Sequence[float], y_new: Sequence[float],
               rtol: float, atol: float) -> float:
    worst = 0.0
    for e, a, b in zip(err, y, y_new):
        sc = atol + rtol * max(abs(a), abs(b))
        q = abs(e) / sc
        if q > worst:
            worst = q
    return worst


@dataclass
class IntegrationResult:
    t: list[float] = field(default_factory=list)
    y: list[Vector] = field(default_factory=list)
    dy: list[Vector] = field(default_factory=list)
    event_t: float | None = None
    event_y: Vector | None = None
    event_dy: Vector | None = None
    steps: int = 0
    rejected: int = 0


def integrate(fun: RHS, t0: float, y0: Sequence[float], t_end: float, *,
              rtol: float = 1e-10, atol: float = 1e-12, h0: float | None = None,
              h_max: float = math.inf, event: Callable[[float, Vector], float] | None = None,
              event_tol: float = 0.0, max_steps: int = 1_000_000) -> IntegrationResult:
    """Adaptive DOPRI5 from ``t0`` towards ``t_end`` (> t0).

    Every accepted node is recorded together with its derivative. When
    ``event`` is given and changes sign inside a step, the crossing is located
    by Brent's method on a fresh step of variable length from the left node
    (a fifth-order dense output) until ``|event| <= event_tol`` or the bracket
    reaches roundoff; integration stops there.
    """
    t = float(t0)
    y = [float(v) for v in y0]
    k1 = fun(t, y)
    res = IntegrationResult(t=[t], y=[y], dy=[k1])
    span = t_end - t
    h = min(h0 if h0 is not None else 1e-3 * span, span, h_max)
    g_prev = event(t, y) if event is not None else None
    h_min_rel = 1e-14
    while t < t_end:
        if res.steps >= max_steps:
            raise StepSizeUnderflow(t, h)
        h = min(h, t_end - t, h_max)
        if h <= h_min_rel * max(1.0, abs(t)):
            raise StepSizeUnderflow(t, h)
        y_new, k7, err = dopri5_step(fun, t, y, h, k1)
        en = error_norm(err, y, y_new, rtol, atol)
        if en > 1.0 or en != en:
            res.rejected += 1
            fac = 0.2 if en != en else max(0.2, 0.9 * en ** -0.2)
            h *= fac
            continue
        if event is not None:
            g_new = event(t + h, y_new)
            if g_prev != 0.0 and (g_new == 0.0 or (g_new > 0) != (g_prev > 0)):
                _locate_event(fun, event, t, y, k1, h, g_prev, g_new, event_tol, res)
                res.steps += 1
                return res
            g_prev = g_new
        t = t + h
        y = y_new
        k1 = k7
        res.t.append(t)
        res.y.append(y)
        res.dy.append(k7)
        res.steps += 1
        fac = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
        h *= fac
    return res


def _locate_event(fun: RHS, event, t: float, y: Vector, k1: Vector, h: float,
                  g_left: float, g_right: float, tol: float, res: IntegrationResult) -> None:
    cache: dict[float, Vector] = {}

    def state(tau: float) -> Vector:
        if tau not in cache:
            cache[tau] = dopri5_step(fun, t, y, tau, k1)[0] if tau > 0 else list(y)
        return cache[tau]

    def g(tau: float) -> float:
        return event(t + tau, state(tau))

    if g_right == 0.0:
        tau = h
    else:
        lo, hi = 0.0, h
        glo = g_left
        tau = brentq(g, lo, hi, xtol=4 * math.ulp(max(abs(t + h), 1.0)), rtol=1e-15,
                     maxiter=200)
        if tol > 0 and abs(g(tau)) > tol:
            # polish by bisection on the same dense output
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if abs(gm) <= tol or hi - lo <= 4 * math.ulp(max(abs(t + h), 1.0)):
                    tau = mid
                    break
                if (gm > 0) == (glo > 0):
                    lo, glo = mid, gm
                else:
                    hi = mid
    y_ev = state(tau)
    res.event_t = t + tau
    res.event_y = y_ev
    res.event_dy = fun(t + tau, y_ev)

