"""Shooting for radial solutions: v'' + v'/r + f(v) = 0, v(0) = alpha, v'(0) = 0.

The ODE is integrated in the Emden-Fowler variable t = log r for the state
(v, s = r v'), where it reads

    v_t = s,   s_t = -r^2 f(v).

The factor r^2 f(v) is formed in the log domain, so cores of width
1/sqrt(f(alpha)) ~ 1e-150 cost no more steps than moderate ones.  The
variational equation for w = dv/dalpha is carried along; at the first zero R
it yields the exact derivative

    d lambda / d alpha = -2 lambda w(R) / s(R),   lambda = R^2,

which lets module ``curve`` place turning points by root finding instead of
by comparing nearly equal lambda values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ._parallel import pmap
from .expr import ExprError
from .nonlinearity import NonlinearitySpec
from .ode import StepSizeUnderflow, dopri5_step, integrate

__all__ = [
    "LOG_F_CAP", "ShootError", "ShootOptions", "Profile", "UProfile", "ZeroPoint",
    "shoot", "first_zero_curve", "profile_u", "alpha_cap",
]

LOG_F_CAP = 700.0


class ShootError(RuntimeError):
    def __init__(self, alpha: float, reason: str):
        super().__init__(f"alpha={alpha:.12g}: {reason}")
        self.alpha = alpha
        self.reason = reason


@dataclass(frozen=True)
class ShootOptions:
    rtol: float = 1e-11
    atol: float = 1e-30
    r_max: float = 1e3
    extend: float = 1.0       # continue to extend * R past the first zero when > 1
    variational: bool = True  # integrate w = dv/dalpha for dlambda/dalpha
    max_steps: int = 200_000


@dataclass(frozen=True, eq=False)
class Profile:
    alpha: float
    t: np.ndarray            # log r at accepted nodes
    v: np.ndarray
    s: np.ndarray            # r v'(r)
    w: np.ndarray | None     # dv/dalpha (None without the variational equation)
    R: float | None
    lam: float | None
    dlam: float | None       # d lambda / d alpha
    extended: bool
    f_alpha: float           # f(alpha) (may be inf for reporting only)
    log_f_alpha: float
    spec: NonlinearitySpec = field(repr=False)
    i_zero: int = -1         # index of the node at r = R (when found)
    steps: int = 0

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.t)

    @property
    def vp(self) -> np.ndarray:
        return self.s / np.exp(self.t)

    @property
    def r_start(self) -> float:
        return float(math.exp(self.t[0]))

    def _rhs_s(self, t: np.ndarray, v: np.ndarray) -> np.ndarray:
        spec = self.spec
        return -np.array([spec.scaled(float(x), 2.0 * float(tt)) for tt, x in zip(t, v)])

    def state_at(self, t: float) -> tuple[float, float]:
        """(v, s) at log r = t by a fresh DOPRI5 step from the nearest node on the left."""
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        if i < 0:
            raise ValueError(f"t={t} precedes the series start")
        tau = t - self.t[i]
        if tau == 0.0:
            return float(self.v[i]), float(self.s[i])
        spec = self.spec

        def rhs(tt, y):
            return [y[1], -spec.scaled(y[0], 2.0 * tt)]

        y0 = [float(self.v[i]), float(self.s[i])]
        y = dopri5_step(rhs, float(self.t[i]), y0, tau, rhs(float(self.t[i]), y0))[0]
        return y[0], y[1]

    def dense(self):
        """Cubic Hermite interpolants (in t) of v and s."""
        ds = self._rhs_s(self.t, self.v)
        return CubicHermiteSpline(self.t, self.v, self.s), CubicHermiteSpline(self.t, self.s, ds)

    def __len__(self) -> int:
        return len(self.t)


class UProfile(NamedTuple):
    """A solution of -Delta u = lambda f(u) on the unit disk, s = r/R in (0, 1]."""

    alpha: float
    lam: float
    s: np.ndarray
    u: np.ndarray
    du: np.ndarray           # u'(s) = R v'(sR)
    su: np.ndarray           # s u'(s) = r v'(r)
    x: np.ndarray            # lambda s^2 f(u(s)) = r^2 f(v(r)) = -d(s u')/d(log s)
    s_start: float
    f_alpha: float


class ZeroPoint(NamedTuple):
    alpha: float
    lam: float
    error: str | None = None


def alpha_cap(spec: NonlinearitySpec, cap: float = LOG_F_CAP, hi: float = 1e6) -> float:
    """Largest alpha with log f(alpha) <= cap (bisection)."""
    lo = 0.0
    try:
        if spec.log_f(hi) <= cap:
            return hi
    except ExprError:
        pass
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        try:
            ok = spec.log_f(mid) <= cap
        except ExprError:
            ok = False
        lo, hi = (mid, hi) if ok else (lo, mid)
        if hi - lo <= 1e-14 * hi:
            break
    return lo


def _series_start(spec: NonlinearitySpec, alpha: float, log_fa: float, variational: bool):
    # h0 = min(1e-6, 0.001/sqrt(f(alpha))), kept in log form; at 0.01 the truncated
    # series for w = dv/dalpha costs ~1e-4 in dlambda/dalpha for steep f
    t0 = min(math.log(1e-6), math.log(0.001) - 0.5 * log_fa)
    a2 = spec.scaled(alpha, 2.0 * t0)            # r^2 f(alpha) <= 1e-6
    b2 = spec.scaled_fp(alpha, 2.0 * t0)         # r^2 f'(alpha)
    try:
        c2 = math.exp(2.0 * t0 + spec.log_fpp(alpha))   # r^2 f''(alpha)
    except ExprError:
        c2 = 0.0
    # v = alpha + c2 r^2 + c4 r^4 + c6 r^6 with 4 c2 = -f, 16 c4 = -f' c2,
    # 36 c6 = -(f' c4 + f'' c2^2 / 2); the r^6 term matters for G near r = 0
    k6 = a2 * b2 * b2 + 2.0 * a2 * a2 * c2
    v = alpha - a2 / 4 + a2 * b2 / 64 - k6 / 2304
    s = -a2 / 2 + a2 * b2 / 16 - k6 / 384
    y = [v, s]
    if variational:
        # w = dv/dalpha of the series through r^4
        q = b2 * b2 + a2 * c2
        y += [1.0 - b2 / 4 + q / 64, -b2 / 2 + q / 16]
    return t0, y


def shoot(spec: NonlinearitySpec, alpha: float, opts: ShootOptions | None = None) -> Profile:
    """Integrate from the series start to the first zero R of v (and beyond if asked)."""
    opts = opts or ShootOptions()
    alpha = float(alpha)
    if not alpha > 0 or not math.isfinite(alpha):
        raise ShootError(alpha, "alpha must be positive and finite")
    try:
        log_fa = spec.log_f(alpha)
    except ExprError as exc:
        raise ShootError(alpha, f"log f(alpha) not representable: {exc}") from None
    if log_fa > LOG_F_CAP:
        raise ShootError(alpha, f"overflow cap exceeded: log f(alpha) = {log_fa:.6g} > {LOG_F_CAP:g}")
    if log_fa == -math.inf:
        raise ShootError(alpha, "f(alpha) = 0")
    t0, y0 = _series_start(spec, alpha, log_fa, opts.variational)
    scaled, scaled_fp = spec.scaled, spec.scaled_fp

    if opts.variational:
        def rhs(t, y):
            tt = 2.0 * t
            return [y[1], -scaled(y[0], tt), y[3], -scaled_fp(y[0], tt) * y[2]]
    else:
        def rhs(t, y):
            return [y[1], -scaled(y[0], 2.0 * t)]

    def event(t, y):
        return y[0]

    t_end = math.log(opts.r_max)
    # first step: the solution is flat for r << 1/sqrt(f(alpha))
    h0 = 0.05
    try:
        res = integrate(rhs, t0, y0, t_end, rtol=opts.rtol, atol=opts.atol, h0=h0,
                        h_max=0.25, event=event, event_tol=0.0, max_steps=opts.max_steps)
    except StepSizeUnderflow as exc:
        raise ShootError(alpha, f"step size underflow at r={math.exp(exc.t):.6g}") from None
    except (ExprError, OverflowError) as exc:
        raise ShootError(alpha, f"evaluation failed: {exc}") from None
    if res.event_t is None:
        raise ShootError(alpha, f"no zero before r_max={opts.r_max:g}")
    ts = res.t + [res.event_t]
    ys = res.y + [res.event_y]
    ye = list(res.event_y)
    ye[0] = 0.0 if abs(ye[0]) < 1e-300 else ye[0]
    ys[-1] = ye
    i_zero = len(ts) - 1
    steps = res.steps
    extended = False
    if opts.extend > 1.0:
        t_ext = res.event_t + math.log(opts.extend)
        try:
            more = integrate(rhs, res.event_t, ye, t_ext, rtol=opts.rtol, atol=opts.atol,
                             h0=0.01, h_max=0.25, max_steps=opts.max_steps)
        except (StepSizeUnderflow, ExprError, OverflowError) as exc:
            raise ShootError(alpha, f"continuation past R failed: {exc}") from None
        ts += more.t[1:]
        ys += more.y[1:]
        steps += more.steps
        extended = True
    y = np.array(ys)
    R = math.exp(res.event_t)
    lam = R * R
    dlam = None
    w = None
    if opts.variational:
        w = y[:, 2]
        s_R = ye[1]
        dlam = -2.0 * lam * ye[2] / s_R
    try:
        fa = spec.f(alpha)
    except ExprError:
        fa = math.inf
    return Profile(alpha=alpha, t=np.array(ts), v=y[:, 0], s=y[:, 1], w=w, R=R, lam=lam,
                   dlam=dlam, extended=extended, f_alpha=fa, log_f_alpha=log_fa,
                   spec=spec, i_zero=i_zero, steps=steps)


def first_zero_curve(spec: NonlinearitySpec, alphas: Sequence[float],
                     opts: ShootOptions | None = None) -> list[ZeroPoint]:
    """lambda(alpha) for each alpha, in input order; failures are kept inline."""
    opts = opts or ShootOptions(variational=False)

    def one(a: float) -> ZeroPoint:
        try:
            p = shoot(spec, a, opts)
            return ZeroPoint(float(a), p.lam)
        except ShootError as exc:
            return ZeroPoint(float(a), math.nan, exc.reason)

    return pmap(one, alphas)


def profile_u(p: Profile) -> UProfile:
    """Rescale a shot to the unit disk: s = r/R, u(s) = v(sR), u'(s) = R v'(sR)."""
    if p.R is None:
        raise ShootError(p.alpha, "profile has no zero")
    k = p.i_zero + 1
    t = p.t[:k]
    s = np.exp(t) / p.R
    s[-1] = 1.0
    u = p.v[:k].copy()
    su = p.s[:k].copy()
    spec = p.spec
    x = np.array([spec.scaled(float(vv), 2.0 * float(tt)) for tt, vv in zip(t, u)])
    return UProfile(alpha=p.alpha, lam=p.lam, s=s, u=u, du=su / s, su=su, x=x,
                    s_start=float(s[0]), f_alpha=p.f_alpha)
