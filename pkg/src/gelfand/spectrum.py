"""Morse index of -Delta - lambda f'(u) on the unit disk by angular modes.

Separating phi(r) e^{i l theta} turns the quadratic form into one radial form
per mode l >= 0; modes l >= 1 come in sin/cos pairs, so

    m(u) = n_0 + 2 * sum_{l >= 1} n_l,

with n_l the number of negative eigenvalues of mode l.  n_l is nonincreasing
in l, so the sum stops at the first empty mode.

Two discretisations are provided.

* ``mode_negative_count`` takes a potential sampled on a uniform grid in
  (0, 1) and works with w = sqrt(r) phi at cell centres r_i = (i - 1/2) h.
  The flux form -(r phi')' is differenced at faces r = i h and symmetrised by
  sqrt(r_i), which keeps the l = 0 mode second-order accurate.
* ``morse_index`` works on a shot profile directly, with piecewise-linear
  elements in t = log r where the form reads
  int phi_t^2 + (l^2 - r^2 f'(v)) phi^2 dt.  Concentrated profiles (core width
  1/sqrt(f(alpha))) are resolved at no extra cost.

Inertia is read off the pivots of an LDL^T factorisation (Sylvester's law).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ._parallel import pmap
from .nonlinearity import NonlinearitySpec
from .shoot import Profile, ShootError, ShootOptions, UProfile, shoot

__all__ = [
    "ModeProblem", "SpectrumReport", "SpectrumError", "tridiagonal_inertia", "liouville_matrix",
    "mode_negative_count", "lowest_mode_eigenvalue", "uniform_mode_problem",
    "morse_index", "morse_along_curve", "radial_zero_count",
]


class SpectrumError(ValueError):
    pass


def tridiagonal_inertia(d: Sequence[float], e: Sequence[float]) -> tuple[int, int]:
    """(negative, zero) eigenvalue counts of the symmetric tridiagonal (d, e)."""
    neg = zero = 0
    piv = 1.0
    tiny = 1e-300
    d = np.asarray(d, dtype=float).tolist()
    e2 = (np.asarray(e, dtype=float) ** 2).tolist()
    for k, dk in enumerate(d):
        piv = dk - (e2[k - 1] / piv if k else 0.0)
        if piv == 0.0:
            zero += 1
            piv = -tiny  # perturb: counts the zero pivot once, with a defined sign
        elif piv < 0.0:
            neg += 1
    return neg, zero


@dataclass(frozen=True, eq=False)
class ModeProblem:
    """Mode l of -Delta - q on the unit disk with q sampled at r_i = (i - 1/2) h."""

    l: int
    potential: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        q = np.asarray(self.potential, dtype=float)
        object.__setattr__(self, "potential", q)
        object.__setattr__(self, "n", len(q))

    @staticmethod
    def grid(n: int) -> np.ndarray:
        h = 1.0 / (n + 0.5)
        return (np.arange(1, n + 1) - 0.5) * h

    @classmethod
    def constant(cls, l: int, c: float, n: int = 2000) -> "ModeProblem":
        return cls(l, np.full(n, float(c)))


def liouville_matrix(mp: ModeProblem) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the symmetric mode operator acting on sqrt(r) phi."""
    if mp.l < 0:
        raise SpectrumError("mode l must be >= 0")
    if mp.n < 500:
        raise SpectrumError(f"grid too small: n={mp.n} < 500")
    q = mp.potential
    if not np.all(np.isfinite(q)):
        bad = int(np.argmin(np.isfinite(q)))
        raise SpectrumError(f"potential is not finite at r={ModeProblem.grid(mp.n)[bad]:.6g}")
    n = mp.n
    h = 1.0 / (n + 0.5)
    i = np.arange(1, n + 1, dtype=float)
    r = (i - 0.5) * h
    d = 2.0 / h**2 + mp.l**2 / r**2 - q
    j = i[:-1]
    # faces r = j h weighted by 1/sqrt(r_j r_{j+1}); the first face r = 0 carries no flux
    e = -(1.0 / h**2) * j / np.sqrt(j * j - 0.25)
    return d, e


def mode_negative_count(mp: ModeProblem) -> int:
    d, e = liouville_matrix(mp)
    return tridiagonal_inertia(d, e)[0]


def lowest_mode_eigenvalue(mp: ModeProblem) -> float:
    from scipy.linalg import eigh_tridiagonal

    d, e = liouville_matrix(mp)
    return float(eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 0))[0])


def uniform_mode_problem(spec: NonlinearitySpec, up: UProfile, l: int, n: int = 2000) -> ModeProblem:
    """Sample q(s) = lambda f'(u(s)) of a unit-disk profile at the cell centres."""
    s = ModeProblem.grid(n)
    x = np.log(up.s)
    curve = CubicHermiteSpline(x, up.u, up.su)
    xs = np.log(s)
    u = np.where(xs < x[0], up.alpha, curve(np.clip(xs, x[0], None)))
    q = np.array([up.lam * spec.fp(float(v)) for v in u])
    return ModeProblem(l, q)


# ---------------------------------------------------------------------------
# profile-adapted discretisation in t = log r

_GX = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])


@dataclass(frozen=True, eq=False)
class _LogForm:
    t: np.ndarray            # nodes t_0 < ... < t_m = log R (Dirichlet at t_m)
    q_gauss: np.ndarray      # r^2 f'(v) at two Gauss points per element, shape (m, 2)
    q_left: float            # r^2 f'(v) at t_0


def _log_form(spec: NonlinearitySpec, p: Profile, h_max: float, refine: int) -> _LogForm:
    if p.R is None:
        raise SpectrumError("profile has no zero")
    k = p.i_zero + 1
    t = p.t[:k]
    v = p.v[:k]
    s = p.s[:k]
    q_nodes = np.array([spec.scaled_fp(float(x), 2.0 * float(tt)) for tt, x in zip(t, v)])
    if not np.all(np.isfinite(q_nodes)):
        bad = int(np.argmin(np.isfinite(q_nodes)))
        raise SpectrumError(f"potential unrepresentable below s={math.exp(t[bad]) / p.R:.6g}")
    h = min(h_max, 0.25 / math.sqrt(max(1.0, float(q_nodes.max())))) / refine
    pieces = [np.linspace(t[i], t[i + 1], max(1, int(math.ceil((t[i + 1] - t[i]) / h))) + 1)[:-1]
              for i in range(k - 1)]
    grid = np.concatenate(pieces + [t[-1:]])
    vs = CubicHermiteSpline(t, v, s)
    tg = grid[:-1, None] + np.diff(grid)[:, None] * _GX[None, :]
    vg = vs(tg)
    qg = np.array([[spec.scaled_fp(float(x), 2.0 * float(tt)) for tt, x in zip(trow, vrow)]
                   for trow, vrow in zip(tg, vg)])
    return _LogForm(t=grid, q_gauss=qg, q_left=float(q_nodes[0]))


def _mode_matrix(form: _LogForm, l: int, mu: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    t = form.t
    h = np.diff(t)
    m = len(t)
    n0, n1 = (1.0 - _GX), _GX
    c = (l * l) - form.q_gauss                      # (elements, 2)
    if mu != 0.0:
        c = c - mu * np.exp(2.0 * (t[:-1, None] + h[:, None] * _GX[None, :]))
    w = 0.5 * h[:, None]
    aa = np.sum(w * c * n0 * n0, axis=1)
    bb = np.sum(w * c * n1 * n1, axis=1)
    ab = np.sum(w * c * n0 * n1, axis=1)
    d = np.zeros(m)
    d[:-1] += 1.0 / h + aa
    d[1:] += 1.0 / h + bb
    e = -1.0 / h + ab
    # the discarded core r < r_0: constant (l = 0) or r^l (l >= 1) continuation
    q0 = form.q_left
    d[0] += l - q0 / (2 * l + 2) - (mu * math.exp(2 * t[0]) / (2 * l + 2) if mu else 0.0)
    # Dirichlet at r = R: drop the last node
    return d[:-1], e[:-1]


@dataclass
class SpectrumReport:
    counts: list[tuple[int, int]]
    morse: int
    lowest_eigenvalue: float | None = None
    alpha: float | None = None
    lam: float | None = None
    n_nodes: int = 0

    @property
    def n(self) -> list[int]:
        return [c for _, c in self.counts]

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "lambda": self.lam, "counts": [list(c) for c in self.counts],
                "morse": self.morse, "lowest_eigenvalue": self.lowest_eigenvalue}


def _principal(form: _LogForm, R: float, rel: float = 1e-9) -> float:
    """Lowest eigenvalue of mode 0 in unit-disk scaling, by inertia bisection."""
    def below(mu_v: float) -> int:
        return tridiagonal_inertia(*_mode_matrix(form, 0, mu_v))[0]

    # mu_u = R^2 mu_v
    if below(0.0) > 0:
        hi, lo = 0.0, -1.0 / R**2
        while below(lo) > 0:
            hi, lo = lo, 2.0 * lo
    else:
        lo, hi = 0.0, 1.0 / R**2
        while below(hi) == 0:
            lo, hi = hi, 2.0 * hi
    while hi - lo > rel * max(abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if below(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi) * R * R


def morse_index(spec: NonlinearitySpec, p: Profile, *, h_max: float = 0.02, refine: int = 1,
                principal: bool = False, l_max: int = 10_000) -> SpectrumReport:
    """Mode counts n_0, n_1, ... (up to the first zero) and the total Morse index."""
    form = _log_form(spec, p, h_max, refine)
    counts = []
    for l in range(l_max + 1):
        n_l = tridiagonal_inertia(*_mode_matrix(form, l))[0]
        counts.append((l, n_l))
        if n_l == 0:
            break
    morse = counts[0][1] + 2 * sum(c for _, c in counts[1:])
    lowest = _principal(form, p.R) if principal else None
    return SpectrumReport(counts=counts, morse=morse, lowest_eigenvalue=lowest, alpha=p.alpha,
                          lam=p.lam, n_nodes=len(form.t) - 1)


def radial_zero_count(p: Profile) -> int:
    """Sign changes of w = dv/dalpha on (0, R): equals n_0 away from turning points."""
    if p.w is None:
        raise SpectrumError("profile was shot without the variational equation")
    w = p.w[: p.i_zero]
    sg = np.sign(w[w != 0])
    return int(np.count_nonzero(sg[1:] != sg[:-1]))


def morse_along_curve(spec: NonlinearitySpec, tr, shoot_opts: ShootOptions | None = None,
                      **kw):
    """Fill BranchPoint.morse along a trace; per-point failures are recorded, not raised."""
    opts = shoot_opts or ShootOptions()

    def one(bp):
        if bp.error is not None:
            return bp
        try:
            p = shoot(spec, bp.alpha, opts)
            rep = morse_index(spec, p, **kw)
            return replace(bp, morse=rep.morse, counts=tuple(rep.n))
        except (ShootError, SpectrumError) as exc:
            return replace(bp, error=f"morse: {exc}")

    points = pmap(one, tr.points)
    increments = []
    prev = None
    for bp in points:
        if bp.morse >= 0:
            if prev is not None and bp.morse != prev.morse:
                increments.append((prev.alpha, bp.alpha, prev.morse, bp.morse))
            prev = bp
    return replace(tr, points=points, morse_increments=increments)
