"""Checks of the Pohozaev-type quantity, the gradient estimate, the a priori
logarithmic bounds and the H^1 norm on computed profiles.

With s = r v' and X = r^2 f(v) (both O(1) along any shot) the quantity

    G(r) = r^2 F(v)/2 + r^2 v'^2/4 + (F/f)(v) r v'
         = rho X / 2 + s^2 / 4 + rho s,        rho = F/f,

never needs F itself, and dG/d(log r) = (F/f)'(v) s^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize_scalar

from .nonlinearity import NonlinearitySpec, RatioTable, SupercritReport, estimate_A
from .shoot import Profile, UProfile

__all__ = [
    "InvariantReport", "ratio_table", "supercrit_report", "pohozaev_G", "pohozaev_terms",
    "check_G_monotone", "check_G_identity", "check_gradient_estimate", "check_monotone_profile",
    "check_apriori_log_bound", "log_bound_constants", "h1_norm", "mutate_profile",
    "PASS", "FAIL", "NOT_APPLICABLE",
]

PASS, FAIL, NOT_APPLICABLE = "PASS", "FAIL", "NOT_APPLICABLE"


@dataclass
class InvariantReport:
    name: str
    max_violation: float
    witness_r: float | None
    tolerance: float
    status: str
    value: float | None = None       # fitted constant, where the check fits one
    detail: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool | None:
        return None if self.status == NOT_APPLICABLE else self.status == PASS

    def to_dict(self) -> dict:
        d = {"name": self.name, "status": self.status, "max_violation": _json_num(self.max_violation),
             "witness_r": _json_num(self.witness_r), "tolerance": self.tolerance}
        if self.value is not None:
            d["value"] = _json_num(self.value)
        if self.detail:
            d["detail"] = self.detail
        d.update(self.extra)
        return d


def _json_num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _not_applicable(name: str, why: str) -> InvariantReport:
    return InvariantReport(name=name, max_violation=math.nan, witness_r=None, tolerance=math.nan,
                           status=NOT_APPLICABLE, detail=why)


def _verdict(name: str, viol: np.ndarray, r: np.ndarray, tol: float, **kw) -> InvariantReport:
    if viol.size == 0:
        return InvariantReport(name=name, max_violation=-math.inf, witness_r=None, tolerance=tol,
                               status=PASS, detail="empty check region", **kw)
    i = int(np.argmax(viol))
    worst = float(viol[i])
    return InvariantReport(name=name, max_violation=worst, witness_r=float(r[i]), tolerance=tol,
                           status=PASS if worst <= tol else FAIL, **kw)


def ratio_table(spec: NonlinearitySpec, u_max: float) -> RatioTable:
    """Shared ratio table on [0, ceil(u_max)]."""
    return _ratio_table(spec, float(math.ceil(u_max)))


@lru_cache(maxsize=64)
def _ratio_table(spec: NonlinearitySpec, u_max: float) -> RatioTable:
    return RatioTable(spec, u_max)


@lru_cache(maxsize=64)
def supercrit_report(spec: NonlinearitySpec) -> SupercritReport:
    return estimate_A(spec)


def _region(p: Profile, u0: float) -> np.ndarray:
    """Node indices with v >= u0 (a leading interval since v decreases)."""
    k = p.i_zero + 1 if p.R is not None else len(p.t)
    idx = np.nonzero(p.v[:k] >= u0)[0]
    return idx


def pohozaev_terms(spec: NonlinearitySpec, p: Profile, idx=None, table: RatioTable | None = None):
    """(r, T1, T2, T3) with G = T1 + T2 + T3 at the selected nodes."""
    idx = np.arange(p.i_zero + 1) if idx is None else np.asarray(idx)
    v = np.clip(p.v[idx], 0.0, None)
    table = table or ratio_table(spec, float(np.max(v)) if v.size else 1.0)
    rho = table.rho(v)
    t = p.t[idx]
    X = np.array([spec.scaled(float(x), 2.0 * float(tt)) for tt, x in zip(t, v)])
    s = p.s[idx]
    return np.exp(t), 0.5 * rho * X, 0.25 * s * s, rho * s


def pohozaev_G(spec: NonlinearitySpec, p: Profile, r: float, table: RatioTable | None = None) -> float:
    """G(r) at any r in (0, R], continuing the shot from the nearest node."""
    if r <= 0:
        return 0.0
    t = math.log(r)
    if not p.t[0] <= t <= p.t[p.i_zero] + 1e-12:
        if t < p.t[0]:
            # series region: G = O((r^2 f(alpha))^2)
            X = spec.scaled(p.alpha, 2 * t)
            rho = (table or ratio_table(spec, p.alpha)).rho(p.alpha)[0]
            s = -X / 2
            return 0.5 * rho * X + 0.25 * s * s + rho * s
        raise ValueError(f"r={r} outside the profile range (0, R]")
    v, s = p.state_at(t)
    v = max(0.0, v)
    table = table or ratio_table(spec, p.alpha)
    rho = float(table.rho(v)[0])
    X = spec.scaled(v, 2 * t)
    return 0.5 * rho * X + 0.25 * s * s + rho * s


def _gate(spec: NonlinearitySpec, report: SupercritReport | None, name: str):
    report = report or supercrit_report(spec)
    if not report.is_supercritical or report.u0 is None:
        return report, _not_applicable(name, f"f is not supercritical (A_est={report.A_est:.4g})")
    return report, None


def check_G_monotone(spec: NonlinearitySpec, p: Profile, report: SupercritReport | None = None,
                     tol: float = 1e-8) -> InvariantReport:
    """G <= 0 and G nonincreasing on {v >= u0}, relative to |T1| + |T2| + |T3|."""
    name = "G_monotone"
    report, na = _gate(spec, report, name)
    if na:
        return na
    idx = _region(p, report.u0)
    if idx.size == 0:
        return _verdict(name, np.array([]), np.array([]), tol)
    r, t1, t2, t3 = pohozaev_terms(spec, p, idx)
    G = t1 + t2 + t3
    scale = np.abs(t1) + np.abs(t2) + np.abs(t3)
    scale = np.where(scale > 0, scale, 1.0)
    sign_viol = G / scale
    inc = np.diff(G) / np.maximum(scale[1:], scale[:-1])
    viol = np.concatenate((sign_viol, inc))
    where = np.concatenate((r, r[1:]))
    rep = _verdict(name, viol, where, tol)
    rep.extra = {"u0": report.u0, "n_nodes": int(idx.size), "G_min": float(G.min())}
    return rep


def check_G_identity(spec: NonlinearitySpec, p: Profile, report: SupercritReport | None = None,
                     tol: float = 1e-4) -> InvariantReport:
    """Compare the increments of G with the integral of (F/f)'(v) (r v')^2 d(log r)."""
    name = "G_identity"
    report, na = _gate(spec, report, name)
    if na:
        return na
    idx = _region(p, report.u0)
    if idx.size < 2:
        return _verdict(name, np.array([]), np.array([]), tol)
    table = ratio_table(spec, p.alpha)
    r, t1, t2, t3 = pohozaev_terms(spec, p, idx, table)
    G = t1 + t2 + t3
    scale = float(np.max(np.abs(t1) + np.abs(t2) + np.abs(t3)))
    vd, sd = p.dense()
    t = p.t[idx]
    tm = 0.5 * (t[1:] + t[:-1])

    def integrand(tt, v, s):
        return table.drho(np.clip(v, 0.0, None)) * s * s

    f0 = integrand(t, p.v[idx], p.s[idx])
    fm = integrand(tm, vd(tm), sd(tm))
    h = np.diff(t)
    simpson = h / 6 * (f0[:-1] + 4 * fm + f0[1:])
    viol = np.abs(np.diff(G) - simpson) / (scale * np.maximum(h, 1e-300))
    rep = _verdict(name, viol, r[1:], tol)
    rep.extra = {"u0": report.u0}
    return rep


def check_gradient_estimate(spec: NonlinearitySpec, p: Profile, report: SupercritReport | None = None,
                            tol: float = 1e-8) -> InvariantReport:
    """-r v' <= 4 F/f(v) on {v >= u0}."""
    name = "gradient_estimate"
    report, na = _gate(spec, report, name)
    if na:
        return na
    idx = _region(p, report.u0)
    if idx.size == 0:
        return _verdict(name, np.array([]), np.array([]), tol)
    v = np.clip(p.v[idx], 0.0, None)
    rho = ratio_table(spec, p.alpha).rho(v)
    s = p.s[idx]
    lhs, rhs = -s, 4.0 * rho
    scale = np.abs(lhs) + np.abs(rhs)
    viol = (lhs - rhs) / np.where(scale > 0, scale, 1.0)
    rep = _verdict(name, viol, np.exp(p.t[idx]), tol)
    rep.extra = {"u0": report.u0, "max_ratio": float(np.max(lhs / rhs))}
    return rep


def check_monotone_profile(p: Profile, tol: float = 1e-12) -> InvariantReport:
    """v' <= 0 and r v' nonincreasing up to the first zero."""
    k = p.i_zero + 1
    s = p.s[:k]
    scale = max(1.0, float(np.max(np.abs(s))))
    viol = np.concatenate((s / scale, np.diff(s) / scale))
    r = np.exp(p.t[:k])
    return _verdict("monotone_profile", viol, np.concatenate((r, r[1:])), tol)


def log_bound_constants(up: UProfile) -> tuple[float, float]:
    """(C_log, C_grad): smallest C with u <= C (1 + |log s|) and -s u' <= C.

    The maximum of u/(1 + |log s|) is refined between the neighbours of the best
    node on the Hermite interpolant of u in log s; -s u' is monotone, so its
    maximum sits at a node.
    """
    x = np.log(up.s)
    ratio = up.u / (1.0 + np.abs(x))
    i = int(np.argmax(ratio))
    c_log = float(ratio[i])
    if 0 < i < len(x) - 1:
        spline = CubicHermiteSpline(x, up.u, up.su)
        best = minimize_scalar(lambda z: -float(spline(z)) / (1.0 + abs(z)),
                               bounds=(x[i - 1], x[i + 1]), method="bounded",
                               options={"xatol": 1e-12 * max(1.0, abs(x[i]))})
        c_log = max(c_log, -float(best.fun))
    c_grad = float(np.max(-up.su))
    return c_log, c_grad


def check_apriori_log_bound(up: UProfile | Sequence[UProfile], spread: float = 1.5) -> InvariantReport:
    """Fit C in u(s) <= C(1 + |log s|) and -u'(s) <= C/s.

    For a batch, passes when the fitted constants are uniform: max/median <= spread
    for both C_log and C_grad.  A single profile passes when C is finite.
    """
    ups = [up] if isinstance(up, UProfile) else list(up)
    consts = np.array([log_bound_constants(x) for x in ups])
    c = np.max(consts, axis=1)
    ok = bool(np.all(np.isfinite(c)))
    if len(ups) == 1:
        return InvariantReport(name="apriori_log_bound", max_violation=0.0 if ok else math.inf,
                               witness_r=None, tolerance=math.inf, status=PASS if ok else FAIL,
                               value=float(c[0]),
                               extra={"C_log": float(consts[0, 0]), "C_grad": float(consts[0, 1])})
    ratios = consts.max(axis=0) / np.median(consts, axis=0)
    worst = float(np.max(ratios))
    return InvariantReport(
        name="apriori_log_bound", max_violation=worst, witness_r=None, tolerance=spread,
        status=PASS if ok and worst <= spread else FAIL, value=float(np.max(c)),
        extra={"alphas": [x.alpha for x in ups], "C_log": consts[:, 0].tolist(),
               "C_grad": consts[:, 1].tolist(), "spread_log": float(ratios[0]),
               "spread_grad": float(ratios[1])},
    )


def h1_norm(up: UProfile) -> float:
    """(2 pi int_0^1 u'(s)^2 s ds)^(1/2), by Hermite quadrature in log s.

    With g = (s u')^2 and x = log s, dg/dx = -2 (s u') X where
    X = lambda s^2 f(u); the core s < s_start contributes X_0^2/16.
    """
    x = np.log(up.s)
    su = up.su
    if su.size < 2 or not np.any(su):
        return 0.0
    X = up.x
    g = su * su
    dg = -2.0 * su * X
    h = np.diff(x)
    integral = float(np.sum(0.5 * h * (g[:-1] + g[1:]) + h * h / 12 * (dg[:-1] - dg[1:])))
    integral += X[0] ** 2 / 16.0
    return math.sqrt(2.0 * math.pi * integral)


def mutate_profile(p: Profile, kind: str = "flip", factor: float = 10.0) -> Profile:
    """Corrupted copy for harness self-tests: 'flip' negates v', 'inflate' scales it."""
    if kind == "flip":
        s = -p.s
    elif kind == "inflate":
        s = factor * p.s
    else:
        raise ValueError(f"unknown mutation {kind!r}")
    return replace(p, s=s.copy())
