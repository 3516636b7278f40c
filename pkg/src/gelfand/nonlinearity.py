"""Nonlinearities f(u), the ratio F/f, and the supercriticality constant.

Everything that involves the primitive F(u) = int_0^u f goes through the ratio
rho = F/f and log F, which stay representable when F itself overflows.  They
solve the linear system

    rho'   = 1 - a rho,                  a = f'/f
    sigma' = -a sigma - a' rho,          sigma = rho' = 1 - a rho
    (log F)' = 1 / rho

``sigma`` is carried as its own unknown so that the combination
``1 - F f'/f^2`` is never formed by cancellation; that product is multiplied
by ``log F`` (up to ~1e7 on the default windows) in the derivative of
F log F / f.  The system is stiff with rate ``a`` and is stepped with an
L-stable SDIRK pair whose stage equations are solved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .expr import (
    Expr, ExprDomainError, ExprError, NotLogRepresentable, U, Const, add, compile_expr,
    compile_log, differentiate, log_expr, exp_, log_, mul, parse, power, simplify, to_string,
)

__all__ = [
    "ConditionViolation", "NonlinearitySpec", "RatioState", "RatioTable", "StiffnessError",
    "SupercritReport", "Lemma22Check", "build_spec", "family", "FAMILIES", "init_ratio",
    "advance_ratio", "estimate_A", "check_lemma22",
]


class ConditionViolation(ValueError):
    """Raised when f fails (f1) or (f2) on the sampling grid."""

    def __init__(self, failures: list[tuple[str, str, float]]):
        self.failures = failures
        parts = [f"{cond}: {what} at u={u:.6g}" for cond, what, u in failures]
        super().__init__("; ".join(parts))


class StiffnessError(ArithmeticError):
    def __init__(self, u: float):
        super().__init__(f"ratio ODE step size underflow at u={u:.17g}")
        self.u = u


def _ratio(num, num_log, den, den_log, u: float) -> float:
    """num(u)/den(u), falling back to the log domain when either overflows."""
    x = num(u)
    y = den(u)
    if math.isfinite(x) and math.isfinite(y) and y != 0.0 and abs(y) > 1e-290:
        return x / y
    if x == 0.0:
        return 0.0
    return math.exp(num_log(u) - den_log(u))


@dataclass(frozen=True)
class NonlinearitySpec:
    name: str
    expr: Expr
    d1: Expr
    d2: Expr
    params: tuple[tuple[str, float], ...] = ()
    f0: float = math.nan
    fp0: float = math.nan
    violations: tuple[tuple[str, str, float], ...] = ()
    default_window: tuple[float, float] = (1.0, 50.0)

    @property
    def satisfies_conditions(self) -> bool:
        return not self.violations and math.isfinite(self.f0)

    # compiled evaluators (excluded from eq/hash by cached_property semantics)
    @cached_property
    def _fns(self):
        return (compile_expr(self.expr), compile_expr(self.d1), compile_expr(self.d2),
                compile_log(self.expr), compile_log(self.d1), compile_log(self.d2))

    def f(self, u: float) -> float:
        if u < 0:
            return self.f_ext(u)
        return self._fns[0](u)

    def fp(self, u: float) -> float:
        if u < 0:
            return self.fp_ext(u)
        return self._fns[1](u)

    def fpp(self, u: float) -> float:
        return self._fns[2](u)

    def log_f(self, u: float) -> float:
        if u < 0:
            val = self.f_ext(u)
            return math.log(val) if val > 0 else -math.inf
        return self._fns[3](u)

    def log_fp(self, u: float) -> float:
        if u < 0:
            val = self.fp_ext(u)
            return math.log(val) if val > 0 else -math.inf
        return self._fns[4](u)

    def log_fpp(self, u: float) -> float:
        return self._fns[5](u)

    # nonnegative, nondecreasing, convex extension to u < 0
    def f_ext(self, u: float) -> float:
        return max(0.0, self.f0 + self.fp0 * u)

    def fp_ext(self, u: float) -> float:
        return self.fp0 if self.f0 + self.fp0 * u > 0 else 0.0

    @cached_property
    def _logderiv(self):
        # a = (log f)' and a' from the structural symbolic log of f
        try:
            a_e = differentiate(log_expr(self.expr))
        except NotLogRepresentable:
            return None
        return compile_expr(a_e), compile_expr(differentiate(a_e))

    def a(self, u: float) -> float:
        """f'/f, evaluated without forming overflowing values."""
        if u >= 0 and self._logderiv is not None:
            try:
                val = self._logderiv[0](u)
                if math.isfinite(val):
                    return val
            except ExprError:
                pass
        if u < 0:
            fu = self.f_ext(u)
            return self.fp_ext(u) / fu if fu > 0 else 0.0
        fn = self._fns
        return _ratio(fn[1], fn[4], fn[0], fn[3], u)

    def da(self, u: float) -> float:
        """(f'/f)' = f''/f - (f'/f)^2."""
        if self._logderiv is not None:
            try:
                val = self._logderiv[1](u)
                if math.isfinite(val):
                    return val
            except ExprError:
                pass
        fn = self._fns
        a = self.a(u)
        return _ratio(fn[2], fn[5], fn[0], fn[3], u) - a * a

    def da_over_a2(self, u: float) -> float:
        a = self.a(u)
        return self.da(u) / (a * a)

    def scaled(self, u: float, log_scale: float) -> float:
        """exp(log_scale) * f(u) without intermediate overflow/underflow."""
        val = self.f(u)
        if val == 0.0:
            return 0.0
        if math.isfinite(val) and val < 1e250 and log_scale > -570.0:
            return val * math.exp(log_scale)
        return math.exp(log_scale + self.log_f(u))

    def scaled_fp(self, u: float, log_scale: float) -> float:
        """exp(log_scale) * f'(u) without intermediate overflow/underflow."""
        val = self.fp(u)
        if val == 0.0:
            return 0.0
        if math.isfinite(val) and val < 1e250 and log_scale > -570.0:
            return val * math.exp(log_scale)
        return math.exp(log_scale + self.log_fp(u))

    def __str__(self) -> str:
        return f"{self.name}: f(u) = {to_string(self.expr)}"


def _check_conditions(spec: NonlinearitySpec, u_max: float, n: int) -> list[tuple[str, str, float]]:
    failures: list[tuple[str, str, float]] = []
    if not math.isfinite(spec.f0):
        return [("f1", "f(0) is not finite", 0.0)]
    if spec.f0 < 0:
        failures.append(("f1", "f(0) < 0", 0.0))
    if spec.f0 == 0 and not spec.fp0 > 0:
        failures.append(("f2", "f(0) = 0 but f'(0) <= 0", 0.0))
    grid = np.concatenate(([0.0], np.geomspace(1e-4, u_max, n)))
    checks = (("f'", spec.fp, spec.log_fp), ("f''", spec.fpp, spec.log_fpp))
    for label, fn, lfn in checks:
        for u in grid:
            try:
                val = fn(float(u))
            except ExprDomainError:
                try:
                    lfn(float(u))
                    continue  # log-representable means positive
                except NotLogRepresentable:
                    failures.append(("f1", f"{label} undefined", float(u)))
                    break
            if val < -1e-12 * max(1.0, abs(spec.f(float(u))) if u < 50 else 1.0):
                failures.append(("f1", f"{label} < 0", float(u)))
                break
    return failures


def build_spec(e: Expr | str, *, name: str | None = None, params: dict | None = None,
               check: bool = True, u_max: float = 10.0, n_check: int = 200,
               default_window: tuple[float, float] | None = None) -> NonlinearitySpec:
    """Attach f', f'' to ``e`` and sample conditions (f1), (f2) on [0, u_max].

    With ``check=True`` a violation raises ``ConditionViolation`` naming the
    condition and the witness u; otherwise violations are recorded on the spec.
    """
    if isinstance(e, str):
        e = parse(e)
    e = simplify(e)
    d1 = differentiate(e)
    d2 = differentiate(d1)
    try:
        f0 = compile_expr(e)(0.0)
        fp0 = compile_expr(d1)(0.0)
    except ExprError:
        f0 = fp0 = math.nan
    if not (math.isfinite(f0) and math.isfinite(fp0)):
        f0 = fp0 = math.nan
    spec = NonlinearitySpec(
        name=name or to_string(e), expr=e, d1=d1, d2=d2,
        params=tuple(sorted((params or {}).items())), f0=f0, fp0=fp0,
        default_window=default_window or (1.0, 50.0),
    )
    failures = _check_conditions(spec, u_max, n_check)
    if failures and check:
        raise ConditionViolation(failures)
    if default_window is None:
        spec = _with(spec, default_window=_guess_window(spec))
    return _with(spec, violations=tuple(failures))


def _with(spec: NonlinearitySpec, **changes) -> NonlinearitySpec:
    d = {k: getattr(spec, k) for k in spec.__dataclass_fields__}
    d.update(changes)
    return NonlinearitySpec(**d)


def _guess_window(spec: NonlinearitySpec) -> tuple[float, float]:
    # doubly exponential growth: log f(50) is astronomically large
    try:
        lf = spec.log_f(50.0)
    except ExprError:
        return (1.0, 50.0)
    return (1.0, 12.0) if not lf < 1e8 else (1.0, 50.0)


# ---------------------------------------------------------------------------
# builtin families

def _exp_pow(k: float = 0.0, c: float = 1.0, p: float = 1.0) -> Expr:
    core = exp_(mul(Const(float(c)), power(U, Const(float(p)))))
    return mul(power(U, Const(float(k))), core)


def _exp() -> Expr:
    return exp_(U)


def _double_exp() -> Expr:
    return exp_(exp_(U))


def _power_shift(p: float = 3.0) -> Expr:
    return power(add(Const(1.0), U), Const(float(p)))


def _exp_pow_log(p: float = 3.0, k: float = 1.0) -> Expr:
    logterm = power(log_(add(Const(math.e), U)), Const(float(k)))
    return exp_(mul(power(U, Const(float(p))), logterm))


FAMILIES = {
    "exp_pow": (_exp_pow, (1.0, 50.0)),
    "exp": (_exp, (1.0, 50.0)),
    "double_exp": (_double_exp, (1.0, 12.0)),
    "power_shift": (_power_shift, (1.0, 50.0)),
    "exp_pow_log": (_exp_pow_log, (1.0, 50.0)),
}


def family(name: str, **params: float) -> NonlinearitySpec:
    """Builtin nonlinearity by registry name; condition violations are recorded, not raised."""
    try:
        builder, window = FAMILIES[name]
    except KeyError:
        raise KeyError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    e = builder(**params)
    label = name if not params else f"{name}(" + ", ".join(f"{k}={v:g}" for k, v in sorted(params.items())) + ")"
    return build_spec(e, name=label, params=params, check=False, default_window=window)


# ---------------------------------------------------------------------------
# ratio ODE

@dataclass(frozen=True)
class RatioState:
    u: float
    rho: float    # F(u)/f(u)
    logF: float   # log F(u)
    drho: float   # (F/f)'(u) = 1 - F f'/f^2


def init_ratio(spec: NonlinearitySpec, u_start: float = 1e-4) -> RatioState:
    """Seed the ratio ODE at small ``u_start`` from the Taylor expansion of F."""
    if not math.isfinite(spec.f0):
        raise ValueError("f(0) is not finite; use init_ratio_at for asymptotic-only families")
    if spec.f0 == 0 and spec.fp0 == 0:
        raise ValueError("f(0) = 0 and f'(0) = 0 violates (f2)")
    u = float(u_start)
    f1 = spec.fp0
    f2 = spec.fpp(0.0)
    F = spec.f0 * u + f1 * u * u / 2 + f2 * u ** 3 / 6
    rho = F / spec.f(u)
    return RatioState(u=u, rho=rho, logF=math.log(F), drho=1.0 - rho * spec.a(u))


def init_ratio_at(spec: NonlinearitySpec, u_start: float) -> RatioState:
    """Seed on the slow manifold rho = f/f' at ``u_start`` (F fixed up to a constant).

    Only asymptotic quantities are meaningful afterwards; used for families that
    are not regular at u = 0 (e.g. u^k e^{u^p} with k < 0).
    """
    u = float(u_start)
    a = spec.a(u)
    kappa = 1.0 / a
    dkappa = -spec.da(u) / (a * a)
    rho = kappa - kappa * dkappa
    return RatioState(u=u, rho=rho, logF=spec.log_f(u) + math.log(rho), drho=dkappa)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_X = ((_GL_X + 1.0) / 2.0).tolist()
_GL_W = (_GL_W / 2.0).tolist()


def _kernel_integral(fn, lo: float, hi: float, width: float, rtol: float) -> float:
    """int_lo^hi fn for an integrand concentrated within ~``width`` of ``hi``.

    Panels [hi - 2d, hi - d] double in length away from hi, each with 16-point
    Gauss-Legendre; summation stops once the panel's left value times the
    remaining length is negligible (the kernels here are nondecreasing in t).
    """
    total = 0.0
    right = hi
    d = min(width, hi - lo)
    while right > lo:
        left = max(lo, hi - d)
        span = right - left
        part = 0.0
        for x, w in zip(_GL_X, _GL_W):
            part += w * fn(left + span * x)
        total += span * part
        if left <= lo:
            break
        tail = abs(fn(left)) * (left - lo)
        if tail <= 1e-3 * rtol * abs(total):
            break
        right = left
        d *= 2.0
    return total


def _step(spec: NonlinearitySpec, s: RatioState, u: float, rtol: float) -> RatioState:
    # exact variation of constants for rho' = 1 - a rho:
    #   rho(u) = rho(s) e^{L(s)-L(u)} + int_s^u e^{L(t)-L(u)} dt,   L = log f
    log_f = spec.log_f
    Lu = log_f(u)
    decay = math.exp(log_f(s.u) - Lu)

    def kernel(t: float) -> float:
        return math.exp(log_f(t) - Lu)

    au = spec.a(u)
    a_s = spec.a(s.u)
    width = min(u - s.u, 1.0 / au if au > 0 else math.inf, 0.05 * u)
    rho = s.rho * decay + _kernel_integral(kernel, s.u, u, width, rtol)
    if a_s * s.rho < 0.5 or au * rho < 0.5:
        sigma = 1.0 - au * rho
    else:
        # 1 - a rho cancels here; integrating by parts gives sigma directly
        #   sigma(u) = (a(u)/a(s)) e^{L(s)-L(u)} sigma(s) - a(u) int_s^u e^{L(t)-L(u)} a'/a^2 dt
        q = spec.da_over_a2
        sigma = (au / a_s * decay * s.drho
                 - au * _kernel_integral(lambda t: kernel(t) * q(t), s.u, u, width, rtol))
    return RatioState(u=u, rho=rho, logF=Lu + math.log(rho), drho=sigma)


def advance_ratio(spec: NonlinearitySpec, state: RatioState, u_next: float,
                  rtol: float = 1e-13, max_du: float = 1.0) -> RatioState:
    """Advance (rho, rho', log F) from ``state.u`` to ``u_next``.

    The linear ODE rho' = 1 - (f'/f) rho is stiff with rate f'/f, so it is
    advanced by its exact solution formula with adaptive Gauss-Kronrod
    quadrature of the log-domain kernel e^{L(t) - L(u)}, in sub-intervals of
    length at most ``max_du``.  log F = log f + log rho needs no integration.
    """
    if not u_next > state.u:
        raise ValueError("u_next must exceed state.u")
    s = state
    while s.u < u_next:
        u = min(u_next, s.u + max_du * max(1.0, s.u))
        try:
            s = _step(spec, s, u, rtol)
        except (ExprError, OverflowError, ZeroDivisionError) as exc:
            raise StiffnessError(s.u) from exc
        if not (s.rho > 0 and math.isfinite(s.logF) and math.isfinite(s.drho)):
            raise StiffnessError(s.u)
    return s


class RatioTable:
    """Dense table of rho, rho', log F on [0, u_max] with cubic Hermite interpolation."""

    def __init__(self, spec: NonlinearitySpec, u_max: float, rtol: float = 1e-13,
                 u_start: float = 1e-4, n_nodes: int | None = None):
        self.spec = spec
        self.u_start = u_start
        u_max = float(u_max)
        if u_max <= u_start:
            u_max = 2 * u_start
        # geometric near zero (ratio 1.01 keeps the Hermite error of log F ~ (h/u)^4
        # small), uniform with step 0.005 from where the geometric step reaches it
        knee = min(0.5, u_max)
        n_geo = max(2, int(math.ceil(math.log(knee / u_start) / math.log(1.01))) + 1)
        n_uni = n_nodes or int(math.ceil((u_max - knee) / 0.005)) + 1
        nodes = np.unique(np.concatenate((
            np.geomspace(u_start, knee, n_geo),
            np.linspace(knee, u_max, max(2, n_uni)),
        )))
        s = init_ratio(spec, u_start)
        states = [s]
        for x in nodes[1:]:
            s = advance_ratio(spec, s, float(x), rtol)
            states.append(s)
        u = np.array([t.u for t in states])
        rho = np.array([t.rho for t in states])
        drho = np.array([t.drho for t in states])
        logF = np.array([t.logF for t in states])
        d2rho = np.array([-spec.a(x) * sd - spec.da(x) * r for x, sd, r in zip(u, drho, rho)])
        self.u_max = float(u[-1])
        self.nodes = u
        self.states = states
        self._rho = CubicHermiteSpline(u, rho, drho)
        self._drho = CubicHermiteSpline(u, drho, d2rho)
        self._logF = CubicHermiteSpline(u, logF, 1.0 / rho)

    def _prep(self, v) -> tuple[np.ndarray, np.ndarray]:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any(v < 0) or np.any(v > self.u_max * (1 + 1e-12)):
            raise ValueError(f"u outside ratio table range [0, {self.u_max}]")
        return v, v < self.u_start

    def _taylor(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        spec = self.spec
        F = spec.f0 * v + spec.fp0 * v * v / 2 + spec.fpp(0.0) * v ** 3 / 6
        fv = np.array([spec.f(float(x)) for x in v])
        return F, fv

    def rho(self, v) -> np.ndarray:
        v, small = self._prep(v)
        out = self._rho(np.clip(v, self.u_start, None))
        if np.any(small):
            F, fv = self._taylor(v[small])
            out[small] = F / fv
        return out

    def drho(self, v) -> np.ndarray:
        v, small = self._prep(v)
        out = self._drho(np.clip(v, self.u_start, None))
        if np.any(small):
            F, fv = self._taylor(v[small])
            a = np.array([self.spec.a(float(x)) for x in v[small]])
            out[small] = 1.0 - F / fv * a
        return out

    def logF(self, v) -> np.ndarray:
        v, small = self._prep(v)
        out = self._logF(np.clip(v, self.u_start, None))
        if np.any(small):
            F, _ = self._taylor(v[small])
            with np.errstate(divide="ignore"):
                out[small] = np.log(F)
        return out


# ---------------------------------------------------------------------------
# supercriticality

@dataclass
class SupercritReport:
    A_est: float
    p: float | None
    u0: float | None
    is_supercritical: bool
    conclusive: bool
    trend_slope: float
    window: tuple[float, float]
    margin: float
    samples: list[tuple[float, float]] = field(default_factory=list)
    states: list[RatioState] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "A_est": self.A_est, "p": self.p, "u0": self.u0,
            "is_supercritical": self.is_supercritical, "conclusive": self.conclusive,
            "trend_slope": self.trend_slope, "window": list(self.window), "margin": self.margin,
            "verdict": ("supercritical" if self.is_supercritical else
                        "not supercritical" if self.conclusive else "inconclusive"),
        }


def g_prime(state: RatioState) -> float:
    """(F log F / f)' = 1 + log F * (1 - F f'/f^2)."""
    return 1.0 + state.logF * state.drho


def estimate_A(spec: NonlinearitySpec, u_window: Sequence[float] | None = None,
               n_samples: int = 200, *, margin: float = 0.01, trend_tol: float = 0.01,
               rtol: float = 1e-13) -> SupercritReport:
    """Estimate limsup (F log F/f)' by its maximum over the upper half of a window.

    Samples are log-spaced; the upper half is u >= (lo + hi)/2.  The estimate is
    flagged inconclusive when g' still moves by more than ``trend_tol`` across
    the upper half (least-squares slope against log u).
    """
    lo, hi = (float(x) for x in (u_window or spec.default_window))
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    us = np.geomspace(lo, hi, n_samples)
    if math.isfinite(spec.f0) and not (spec.f0 == 0 and spec.fp0 == 0):
        state = init_ratio(spec, min(1e-4, lo / 10))
    else:
        state = init_ratio_at(spec, lo)
    states: list[RatioState] = []
    for u in us:
        if u > state.u:
            state = advance_ratio(spec, state, float(u), rtol)
        states.append(state)
    gp = np.array([g_prime(s) for s in states])
    upper = us >= 0.5 * (lo + hi)
    A_est = float(np.max(gp[upper]))
    x = np.log(us[upper])
    slope = float(np.polyfit(x, gp[upper], 1)[0]) if upper.sum() >= 2 else 0.0
    drift = abs(slope) * (x[-1] - x[0])
    conclusive = bool(np.all(np.isfinite(gp[upper]))) and drift <= trend_tol
    supercrit = conclusive and A_est < 0.5 - margin
    p = u0 = None
    if supercrit:
        p = min(0.5 * (A_est + 0.5), 0.5 - margin)
        logF = np.array([s.logF for s in states])
        good = (logF > 0) & (gp < p)
        # smallest sample from which the hypothesis holds on the rest of the window
        bad = np.nonzero(~good)[0]
        start = 0 if bad.size == 0 else bad[-1] + 1
        if start < len(us):
            u0 = float(us[start])
        else:
            supercrit = False
            p = None
    return SupercritReport(
        A_est=A_est, p=p, u0=u0, is_supercritical=supercrit, conclusive=conclusive,
        trend_slope=slope, window=(lo, hi), margin=margin,
        samples=list(zip(us.tolist(), gp.tolist())), states=states,
    )


@dataclass
class Lemma22Check:
    c1: float
    p: float
    u0: float
    monotone: bool
    passed: bool
    message: str
    residuals: list[tuple[float, float]] = field(default_factory=list, repr=False)


def check_lemma22(spec: NonlinearitySpec, report: SupercritReport,
                  p: float | None = None) -> Lemma22Check:
    """Largest c1 with log F(u) >= (c1 u)^(1/p) for u >= u0, and F/f nonincreasing.

    On the window c1 is fitted from the samples; past its end the hypothesis
    (F log F/f)' < p is integrated in closed form, which bounds c1 from below.
    """
    if not report.is_supercritical or report.u0 is None:
        raise ValueError("growth bounds need a supercritical report (A < 1/2)")
    p = report.p if p is None else float(p)
    if not report.A_est < p < 0.5:
        raise ValueError(f"p={p} must lie strictly between A_est={report.A_est:.4g} and 1/2")
    # u0 depends on p: the hypothesis (F log F/f)' < p must hold from u0 on
    allu = np.array([s.u for s in report.states])
    good = np.array([s.logF > 0 and g_prime(s) < p for s in report.states])
    bad = np.nonzero(~good)[0]
    start = 0 if bad.size == 0 else bad[-1] + 1
    if start >= len(allu) - 2:
        raise ValueError(f"(F log F/f)' < p={p:g} does not hold at the end of the window")
    u0 = max(float(report.u0), float(allu[start]))
    sel = [s for s in report.states if s.u >= u0]
    u = np.array([s.u for s in sel])
    logF = np.array([s.logF for s in sel])
    rho = np.array([s.rho for s in sel])
    drho = np.array([s.drho for s in sel])
    gp = 1.0 + logF * drho
    ok_p = bool(np.all(gp < p))
    ratio = logF ** p / u
    # beyond the window end U, (F log F/f)' < p gives F log F/f <= h_U + p (u - U),
    # hence log F(u)^p / u >= log F(U)^p (h_U + p(u - U)) / (h_U u) >= p log F(U)^p / h_U
    h_end = rho[-1] * logF[-1]
    c1_tail = p * logF[-1] ** p / h_end
    c1 = float(min(np.min(ratio), c1_tail))
    resid = logF - (c1 * u) ** (1.0 / p)
    monotone = bool(np.all(drho <= 0) and np.all(np.diff(rho) <= 1e-14 * rho[:-1]))
    passed = c1 > 0 and monotone and ok_p
    if not ok_p:
        msg = f"(F logF/f)' exceeds p={p:g} on the window"
    elif not monotone:
        msg = "F/f increases beyond u0"
    else:
        msg = "ok"
    return Lemma22Check(c1=c1, p=p, u0=u0, monotone=monotone, passed=passed,
                        message=msg, residuals=list(zip(u.tolist(), resid.tolist())))
