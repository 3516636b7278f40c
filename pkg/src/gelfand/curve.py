"""The bifurcation curve alpha -> lambda(alpha): tracing, turning points, and
the asymptotic behaviour as alpha grows.

Turning points are zeros of d lambda/d alpha, which every shot returns from
its variational equation.  The base grid is refined where the secant slope of
lambda disagrees in sign with the endpoint derivatives (a hidden pair of
extrema), and each sign change of the derivative is then solved by Brent's
method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from ._parallel import pmap
from .nonlinearity import NonlinearitySpec, SupercritReport, estimate_A
from .shoot import (
    LOG_F_CAP, Profile, ShootError, ShootOptions, profile_u, shoot,
)
from .verify import h1_norm, log_bound_constants

__all__ = [
    "BranchPoint", "TurningPoint", "CurveTrace", "TraceOptions", "LambdaStar", "TheoremAVerdict",
    "SingularReport", "trace", "estimate_lambda_star", "check_theorem_A", "singular_convergence",
    "SUPPORTED", "REFUTED", "NOT_APPLICABLE", "INCONCLUSIVE",
]

SUPPORTED = "SUPPORTED"
REFUTED = "REFUTED-AT-DESK-SCALE"
NOT_APPLICABLE = "NOT_APPLICABLE"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class BranchPoint:
    alpha: float
    lam: float
    R: float = math.nan
    dlam: float = math.nan
    morse: int = -1
    h1_norm: float = math.nan
    counts: tuple[int, ...] | None = None
    turning: str = ""           # "max" / "min" at a located turning point
    sup_check: dict | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


class TurningPoint(NamedTuple):
    alpha: float
    lam: float
    kind: str                   # "max" or "min"


class LambdaStar(NamedTuple):
    value: float
    uncertainty: float
    method: str                 # "bracket" or "tail"
    trend: str                  # "oscillating", "decreasing", "increasing", "flat"


@dataclass(frozen=True)
class TraceOptions:
    n_grid: int = 64
    tp_tol: float = 1e-8        # alpha tolerance of turning points
    min_cell: float = 1e-4      # relative width below which cells are not bisected
    max_rounds: int = 12
    h1: bool = True
    shoot: ShootOptions = field(default_factory=ShootOptions)


@dataclass(frozen=True)
class CurveTrace:
    points: list[BranchPoint]
    turning_points: list[TurningPoint]
    lambda_star_est: LambdaStar | None
    lambda_min_observed: float
    lambda_max_observed: float
    alpha_range: tuple[float, float]
    spec_name: str = ""
    morse_increments: list[tuple[float, float, int, int]] = field(default_factory=list)
    shots: int = 0

    @property
    def ok_points(self) -> list[BranchPoint]:
        return [p for p in self.points if p.ok]

    def to_dict(self) -> dict:
        ls = self.lambda_star_est
        return {
            "f": self.spec_name,
            "alpha_range": list(self.alpha_range),
            "n_points": len(self.points),
            "n_failed": sum(1 for p in self.points if not p.ok),
            "turning_points": [{"alpha": t.alpha, "lambda": t.lam, "kind": t.kind}
                               for t in self.turning_points],
            "lambda_star_est": None if ls is None else {
                "value": ls.value, "uncertainty": ls.uncertainty, "method": ls.method,
                "trend": ls.trend},
            "lambda_min_observed": self.lambda_min_observed,
            "lambda_max_observed": self.lambda_max_observed,
            "morse_increments": [{"alpha_before": a, "alpha_after": b, "from": m, "to": n}
                                 for a, b, m, n in self.morse_increments],
            "failures": [{"alpha": p.alpha, "error": p.error} for p in self.points if not p.ok],
        }


def _point(spec: NonlinearitySpec, alpha: float, opts: TraceOptions) -> BranchPoint:
    try:
        p = shoot(spec, alpha, opts.shoot)
    except ShootError as exc:
        return BranchPoint(alpha=float(alpha), lam=math.nan, error=exc.reason)
    h1 = h1_norm(profile_u(p)) if opts.h1 else math.nan
    return BranchPoint(alpha=p.alpha, lam=p.lam, R=p.R, dlam=p.dlam, h1_norm=h1)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def trace(spec: NonlinearitySpec, alpha_range: Sequence[float],
          opts: TraceOptions | None = None) -> CurveTrace:
    """Sample lambda(alpha) on a log-spaced grid, refine, and locate turning points."""
    opts = opts or TraceOptions()
    lo, hi = (float(a) for a in alpha_range)
    if not (0 < lo < hi) or not math.isfinite(hi):
        raise ValueError(f"alpha range must satisfy 0 < lo < hi, got [{lo}, {hi}]")
    if spec.log_f(hi) > LOG_F_CAP:
        raise ValueError(f"alpha_max={hi:g} is beyond the overflow cap (log f > {LOG_F_CAP:g})")
    if opts.n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    grid = np.geomspace(lo, hi, opts.n_grid)
    grid[0], grid[-1] = lo, hi
    pts = {float(a): bp for a, bp in zip(grid, pmap(lambda a: _point(spec, a, opts), grid))}
    shots = len(pts)

    # bisect cells whose secant contradicts an endpoint derivative
    for _ in range(opts.max_rounds):
        ok = sorted(a for a, bp in pts.items() if bp.ok)
        new = []
        for a, b in zip(ok[:-1], ok[1:]):
            if b - a <= opts.min_cell * b:
                continue
            pa, pb = pts[a], pts[b]
            sec = _sign(pb.lam - pa.lam)
            da, db = _sign(pa.dlam), _sign(pb.dlam)
            if da == db and sec != da:
                new.append(0.5 * (a + b))
        if not new:
            break
        for a, bp in zip(new, pmap(lambda a: _point(spec, a, opts), new)):
            pts[float(a)] = bp
        shots += len(new)

    # root-find d lambda / d alpha in every cell with a sign change
    tps: list[TurningPoint] = []
    ok = sorted(a for a, bp in pts.items() if bp.ok)
    cells = [(a, b) for a, b in zip(ok[:-1], ok[1:])
             if _sign(pts[a].dlam) * _sign(pts[b].dlam) < 0]

    def locate(cell):
        a, b = cell
        cache: dict[float, Profile] = {}

        def g(x: float) -> float:
            p = shoot(spec, x, opts.shoot)
            cache[x] = p
            return p.dlam

        try:
            x = brentq(g, a, b, xtol=opts.tp_tol, rtol=4 * np.finfo(float).eps, maxiter=200)
        except (ShootError, ValueError) as exc:
            return None, str(exc), len(cache)
        p = cache.get(x) or shoot(spec, x, opts.shoot)
        kind = "max" if pts[a].dlam > 0 else "min"
        h1 = h1_norm(profile_u(p)) if opts.h1 else math.nan
        return BranchPoint(alpha=p.alpha, lam=p.lam, R=p.R, dlam=p.dlam, h1_norm=h1,
                           turning=kind), None, len(cache) + 1

    for bp, err, n in pmap(locate, cells):
        shots += n
        if bp is not None:
            pts[bp.alpha] = bp
            tps.append(TurningPoint(bp.alpha, bp.lam, bp.turning))
    tps.sort()
    points = [pts[a] for a in sorted(pts)]
    good = [p for p in points if p.ok]
    if not good:
        raise ShootError(lo, "no alpha in the range could be shot")
    lams = np.array([p.lam for p in good])
    if spec.f0 > 0 and tps:
        tail = [p.lam for p in good if p.alpha >= tps[0].alpha]
        lam_min = float(min(tail))
    else:
        lam_min = float(lams.min())
    tr = CurveTrace(points=points, turning_points=tps, lambda_star_est=None,
                    lambda_min_observed=lam_min, lambda_max_observed=float(lams.max()),
                    alpha_range=(lo, hi), spec_name=spec.name, shots=shots)
    try:
        ls = estimate_lambda_star(tr)
    except ValueError:
        ls = None
    return replace(tr, lambda_star_est=ls)


def _trend(values: Sequence[float], rel: float = 1e-9) -> str:
    d = np.diff(np.asarray(values, dtype=float))
    scale = max(abs(v) for v in values) if len(values) else 1.0
    if d.size == 0 or np.all(np.abs(d) <= rel * scale):
        return "flat"
    if np.all(d <= rel * scale):
        return "decreasing"
    if np.all(d >= -rel * scale):
        return "increasing"
    return "oscillating"


def estimate_lambda_star(tr: CurveTrace) -> LambdaStar:
    """Midpoint and half-width of the last two turning values, or the monotone tail."""
    good = tr.ok_points
    if len(good) < 2:
        raise ValueError("too few points to estimate lambda*")
    tps = tr.turning_points
    if len(tps) >= 2:
        a, b = tps[-2].lam, tps[-1].lam
        lo, hi = min(a, b), max(a, b)
        return LambdaStar(0.5 * (lo + hi), 0.5 * (hi - lo), "bracket", "oscillating")
    start = tps[-1].alpha if tps else -math.inf
    tail = [p.lam for p in good if p.alpha >= start]
    if len(tail) < 2:
        tail = [p.lam for p in good[-2:]]
    k = max(2, len(tail) // 4)
    trailing = tail[-k:]
    return LambdaStar(tail[-1], abs(trailing[-1] - trailing[0]), "tail", _trend(tail))


class TheoremAVerdict(NamedTuple):
    verdict: str
    reason: str
    evidence: dict


def check_theorem_A(tr: CurveTrace, spec: NonlinearitySpec, *, floor_fraction: float = 0.25,
                    report: SupercritReport | None = None) -> TheoremAVerdict:
    """Desk-scale test of a positive lower bound for lambda along the whole curve.

    SUPPORTED: at least two turning points, the points after the last one stay
    inside the oscillation bracket, and lambda_min_observed >= floor_fraction *
    lambda*_est.  REFUTED-AT-DESK-SCALE: past the fold, lambda is still
    decreasing at the end of the range.  NOT_APPLICABLE: no turning point.
    """
    report = report or estimate_A(spec)
    ls = tr.lambda_star_est
    tps = tr.turning_points
    good = tr.ok_points
    ev = {
        "is_supercritical": report.is_supercritical, "A_est": report.A_est,
        "n_turning_points": len(tps), "lambda_min_observed": tr.lambda_min_observed,
        "lambda_max_observed": tr.lambda_max_observed, "floor_fraction": floor_fraction,
        "lambda_star_est": None if ls is None else ls._asdict(),
        "lambda_end": good[-1].lam if good else None,
    }
    if not tps:
        return TheoremAVerdict(NOT_APPLICABLE, "no turning point on the traced range", ev)
    tail = [p.lam for p in good if p.alpha > tps[-1].alpha]
    ev["trailing_lambda"] = tail
    if len(tps) >= 2 and ls is not None:
        lo, hi = ls.value - ls.uncertainty, ls.value + ls.uncertainty
        slack = 1e-9 * hi
        inside = all(lo - slack <= x <= hi + slack for x in tail)
        floor_ok = tr.lambda_min_observed >= floor_fraction * ls.value
        ev.update(bracket=[lo, hi], trailing_inside=inside, floor_ok=floor_ok)
        if inside and floor_ok and tr.lambda_min_observed > 0:
            return TheoremAVerdict(SUPPORTED, "lambda oscillates inside a bracket bounded away from 0", ev)
        return TheoremAVerdict(INCONCLUSIVE, "oscillation bracket not respected by the tail", ev)
    if len(tail) >= 2 and _trend(tail) == "decreasing":
        ratio = tail[-1] / tr.lambda_max_observed
        ev["end_over_fold"] = ratio
        return TheoremAVerdict(REFUTED, f"lambda still decreasing at the end of the range "
                                        f"(lambda_end / lambda_fold = {ratio:.3g})", ev)
    return TheoremAVerdict(INCONCLUSIVE, "a single turning point without a decaying tail", ev)


@dataclass
class SingularReport:
    alphas: list[float]
    window: tuple[float, float]
    distances: list[float]          # sup |u_i - u_{i+1}| on the window
    deriv_distances: list[float]    # sup |u_i' - u_{i+1}'|
    decreasing: bool
    C_values: list[float]           # fitted C in u <= C (1 + |log s|) on the window
    C_best: float

    def to_dict(self) -> dict:
        return {"alphas": self.alphas, "window": list(self.window), "distances": self.distances,
                "deriv_distances": self.deriv_distances, "decreasing": self.decreasing,
                "C_values": self.C_values, "C_best": self.C_best}


def _sample_u(p: Profile, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    up = profile_u(p)
    x = np.log(up.s)
    u = CubicHermiteSpline(x, up.u, up.su)
    su = CubicHermiteSpline(x, up.su, -up.x)
    xs = np.log(s)
    return u(xs), su(xs) / s


def singular_convergence(spec: NonlinearitySpec, alphas: Sequence[float],
                         r_window: Sequence[float] = (0.2, 1.0), n_samples: int = 2001,
                         opts: ShootOptions | None = None) -> SingularReport:
    """Consecutive sup-distances of u(., alpha) and u'(., alpha) on a window of (0, 1]."""
    a, b = (float(x) for x in r_window)
    if not 0 < a < b <= 1:
        raise ValueError(f"window must lie in (0, 1], got [{a}, {b}]")
    alphas = [float(x) for x in alphas]
    if len(alphas) < 3:
        raise ValueError("need at least 3 alphas")
    if any(y < x for x, y in zip(alphas[:-1], alphas[1:])):
        raise ValueError("alphas must be nondecreasing")
    opts = opts or ShootOptions(variational=False)
    s = np.linspace(a, b, n_samples)
    profiles = pmap(lambda al: shoot(spec, al, opts), alphas)
    samples = [_sample_u(p, s) for p in profiles]
    dist = [float(np.max(np.abs(u1 - u2))) for (u1, _), (u2, _) in zip(samples[:-1], samples[1:])]
    ddist = [float(np.max(np.abs(d1 - d2))) for (_, d1), (_, d2) in zip(samples[:-1], samples[1:])]
    C = [float(np.max(u / (1.0 + np.abs(np.log(s))))) for u, _ in samples]
    return SingularReport(alphas=alphas, window=(a, b), distances=dist, deriv_distances=ddist,
                          decreasing=all(y < x for x, y in zip(dist[:-1], dist[1:])),
                          C_values=C, C_best=max(C))
