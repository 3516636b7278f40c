"""Command-line front end: check f, trace the curve, verify invariants, count Morse indices.

    gelfand check-f  --f "exp(u^3)"
    gelfand trace    --f "exp(u)" --alpha-min 0.5 --alpha-max 20 --out trace.csv
    gelfand verify   --family exp_pow --param p=3 --alphas 4,6,8
    gelfand morse    --f "exp(u)" --alphas 0.5,4 --out morse.csv
    gelfand plotdata --input trace.csv --out plots/ --svg

Settings come from an optional JSON file (--config) and are overridden by
flags.  Exit codes: 0 success, 1 operational error, 2 negative result (not
supercritical, or a verification check failed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .curve import TraceOptions, check_theorem_A, trace
from .expr import ExprError
from .nonlinearity import ConditionViolation, NonlinearitySpec, build_spec, estimate_A, family
from .shoot import ShootError, ShootOptions, profile_u, shoot
from .spectrum import SpectrumError, morse_along_curve, morse_index
from .verify import (
    FAIL, NOT_APPLICABLE, check_apriori_log_bound, check_G_identity, check_G_monotone,
    check_gradient_estimate, check_monotone_profile, mutate_profile, supercrit_report,
)

log = logging.getLogger("gelfand")

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """All settings of a run.  Every field has a documented default."""

    expression: str | None = None       # f as an expression in u
    family: str | None = None           # or a builtin family name ...
    params: dict = field(default_factory=dict)   # ... with its parameters
    alpha_range: tuple[float, float] = (0.5, 20.0)
    alphas: list[float] | None = None   # explicit alpha list (verify, morse)
    n_grid: int = 64
    tol: float = 1e-11                  # shooting relative tolerance
    tp_tol: float = 1e-8                # turning point tolerance in alpha
    floor_fraction: float = 0.25
    morse: bool = False                 # trace: fill the morse column
    h1: bool = True
    mutate: str | None = None           # verify self-test: "flip" or "inflate"
    input: str | None = None            # plotdata: trace CSV
    profile_alphas: list[float] = field(default_factory=list)
    svg: bool = False
    out: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        nl = d.pop("nonlinearity", None)
        if nl is not None:
            if not isinstance(nl, dict):
                raise ConfigError("'nonlinearity' must be an object")
            for k in ("expression", "family", "params"):
                if k in nl:
                    d[k] = nl[k]
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        if "alpha_range" in d:
            d["alpha_range"] = tuple(d["alpha_range"])
        return cls(**d)

    def validate(self, command: str) -> None:
        if command != "plotdata" or self.profile_alphas:
            if (self.expression is None) == (self.family is None):
                raise ConfigError("give exactly one of an expression (--f) or a family (--family)")
        if self.expression is not None and self.params:
            raise ConfigError("params apply to families only")
        for name in ("tol", "tp_tol", "floor_fraction"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        lo, hi = self.alpha_range
        if not (0 < lo < hi and math.isfinite(hi)):
            raise ConfigError(f"alpha_range must satisfy 0 < min < max, got [{lo}, {hi}]")
        if self.n_grid < 2:
            raise ConfigError("n_grid must be at least 2")
        if self.alphas is not None:
            if not self.alphas:
                raise ConfigError("alphas is empty")
            if any(not (a > 0 and math.isfinite(a)) for a in self.alphas):
                raise ConfigError("alphas must be positive")
        if self.mutate not in (None, "flip", "inflate"):
            raise ConfigError(f"unknown mutation {self.mutate!r}")

    def spec(self) -> NonlinearitySpec:
        if self.family is not None:
            return family(self.family, **{k: float(v) for k, v in self.params.items()})
        return build_spec(self.expression)

    def alpha_list(self) -> list[float]:
        if self.alphas is not None:
            return [float(a) for a in self.alphas]
        lo, hi = self.alpha_range
        return np.geomspace(lo, hi, self.n_grid).tolist()


# ---------------------------------------------------------------------------
# output helpers

def _num(x) -> str:
    """Shortest round-trip text for a float; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _json(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    with open(p, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def _sidecar(out: str | None, text: str) -> None:
    """JSON next to a CSV written to a file, otherwise to stderr."""
    if out is None:
        sys.stderr.write(text)
    else:
        _write(str(Path(out).with_suffix(".json")), text)


# ---------------------------------------------------------------------------
# commands

def cmd_check_f(cfg: RunConfig) -> int:
    spec = cfg.spec()
    rep = estimate_A(spec)
    d = rep.to_dict()
    d["f"] = spec.name
    d["violations"] = [list(v) for v in spec.violations]
    _write(cfg.out, _json(d))
    return EXIT_OK if rep.is_supercritical else EXIT_NEGATIVE


def cmd_trace(cfg: RunConfig) -> int:
    spec = cfg.spec()
    opts = TraceOptions(n_grid=cfg.n_grid, tp_tol=cfg.tp_tol, h1=cfg.h1,
                        shoot=ShootOptions(rtol=cfg.tol))
    tr = trace(spec, cfg.alpha_range, opts)
    if cfg.morse:
        tr = morse_along_curve(spec, tr, opts.shoot)
    rows = []
    for bp in tr.points:
        if bp.error is not None:
            log.warning("alpha=%r: %s", bp.alpha, bp.error)
        rows.append([_num(bp.alpha), _num(bp.lam), _num(bp.R), str(bp.morse), _num(bp.h1_norm)])
    if not tr.ok_points:
        log.error("no alpha in the range could be shot")
        return EXIT_ERROR
    _write(cfg.out, _csv(["alpha", "lambda", "R", "morse", "h1_norm"], rows))
    verdict = check_theorem_A(tr, spec, floor_fraction=cfg.floor_fraction)
    d = tr.to_dict()
    d["theorem_A"] = {"verdict": verdict.verdict, "reason": verdict.reason,
                      "evidence": verdict.evidence}
    _sidecar(cfg.out, _json(d))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    spec = cfg.spec()
    report = supercrit_report(spec)
    results = []
    profiles = []
    all_ok = True
    for a in cfg.alpha_list():
        try:
            p = shoot(spec, a, ShootOptions(rtol=cfg.tol))
        except ShootError as exc:
            log.error("alpha=%r: %s", a, exc.reason)
            return EXIT_ERROR
        profiles.append(profile_u(p))
        if cfg.mutate:
            p = mutate_profile(p, cfg.mutate)
        checks = [check_G_monotone(spec, p, report), check_G_identity(spec, p, report),
                  check_gradient_estimate(spec, p, report), check_monotone_profile(p)]
        all_ok &= not any(c.status == FAIL for c in checks)
        results.append({"alpha": a, "lambda": p.lam, "checks": [c.to_dict() for c in checks]})
    batch = check_apriori_log_bound(profiles)
    if not report.is_supercritical:
        batch.status = NOT_APPLICABLE
        batch.detail = f"f is not supercritical (A_est={report.A_est:.4g})"
    elif len(profiles) > 1:
        all_ok &= batch.status != FAIL
    d = {"f": spec.name, "supercritical": report.to_dict(), "mutation": cfg.mutate,
         "alphas": results, "apriori_log_bound": batch.to_dict(), "all_passed": all_ok}
    _write(cfg.out, _json(d))
    return EXIT_OK if all_ok else EXIT_NEGATIVE


def cmd_morse(cfg: RunConfig) -> int:
    spec = cfg.spec()
    opts = ShootOptions(rtol=cfg.tol)
    rows = []
    for a in cfg.alpha_list():
        try:
            p = shoot(spec, a, opts)
            rep = morse_index(spec, p)
        except (ShootError, SpectrumError) as exc:
            log.warning("alpha=%r: %s", a, exc)
            rows.append((a, None, None, None))
            continue
        rows.append((a, p.lam, rep.n, rep.morse))
    good = [r for r in rows if r[3] is not None]
    if not good:
        log.error("no alpha could be processed")
        return EXIT_ERROR
    width = max(len(r[2]) for r in good)
    header = ["alpha", "lambda"] + [f"n{l}" for l in range(width)] + ["morse"]
    table = []
    for a, lam, n, m in rows:
        if m is None:
            table.append([_num(a), ""] + [""] * width + [""])
        else:
            table.append([_num(a), _num(lam)] + [str(c) for c in n + [0] * (width - len(n))] + [str(m)])
    _write(cfg.out, _csv(header, table))
    increments = [{"alpha_before": x[0], "alpha_after": y[0], "from": x[3], "to": y[3]}
                  for x, y in zip(good[:-1], good[1:]) if x[3] != y[3]]
    _sidecar(cfg.out, _json({"f": spec.name, "increments": increments}))
    return EXIT_OK


def _read_trace(path: str) -> list[tuple[float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"alpha", "lambda"} <= set(reader.fieldnames):
            raise ConfigError(f"{path}: not a trace CSV (needs alpha and lambda columns)")
        out = []
        for row in reader:
            if row["lambda"]:
                out.append((float(row["alpha"]), float(row["lambda"])))
    return out


def _svg(points: Sequence[tuple[float, float]], xlabel: str, ylabel: str) -> str:
    w, h, pad = 640, 400, 50
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys)
    sx = (w - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (h - 2 * pad) / ((y1 - y0) or 1.0)
    poly = " ".join(f"{pad + (x - x0) * sx:.2f},{h - pad - (y - y0) * sy:.2f}" for x, y in points)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
        f'<rect width="{w}" height="{h}" fill="white"/>\n'
        f'<path d="M{pad},{pad} V{h - pad} H{w - pad}" stroke="black" fill="none"/>\n'
        f'<polyline points="{poly}" stroke="steelblue" stroke-width="1.5" fill="none"/>\n'
        f'<text x="{w / 2}" y="{h - 12}" text-anchor="middle" font-size="14">{xlabel}</text>\n'
        f'<text x="14" y="{h / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 14 {h / 2})">{ylabel}</text>\n'
        f'<text x="{pad}" y="{pad - 8}" font-size="11">{ylabel} in [{y0:.4g}, {y1:.4g}], '
        f'{xlabel} in [{x0:.4g}, {x1:.4g}]</text>\n'
        "</svg>\n"
    )


def cmd_plotdata(cfg: RunConfig) -> int:
    if not cfg.input:
        raise ConfigError("plotdata needs a trace CSV (--input)")
    if not Path(cfg.input).is_file():
        raise ConfigError(f"input file not found: {cfg.input}")
    pts = sorted(_read_trace(cfg.input))
    if not pts:
        raise ConfigError(f"{cfg.input}: no rows with a lambda value")
    out = Path(cfg.out) if cfg.out else Path(cfg.input).parent
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def dat(name: str, header: str, rows) -> None:
        text = f"# {header}\n" + "".join(f"{_num(a)} {_num(b)}\n" for a, b in rows)
        _write(str(out / name), text)
        written.append(str(out / name))

    dat("lambda_alpha.dat", "alpha lambda", pts)
    # the maximum of a positive radial solution is its centre value alpha
    dat("bifurcation.dat", "lambda sup_norm", [(lam, a) for a, lam in pts])
    if cfg.profile_alphas:
        spec = cfg.spec()
        for a in cfg.profile_alphas:
            up = profile_u(shoot(spec, a, ShootOptions(rtol=cfg.tol, variational=False)))
            dat(f"profile_{_num(float(a))}.dat", f"r u  (alpha={a!r}, lambda={up.lam!r})",
                zip(np.concatenate(([0.0], up.s)), np.concatenate(([up.alpha], up.u))))
    if cfg.svg:
        _write(str(out / "bifurcation.svg"), _svg([(lam, a) for a, lam in pts], "lambda", "sup u"))
        written.append(str(out / "bifurcation.svg"))
    sys.stdout.write("".join(f"{p}\n" for p in written))
    return EXIT_OK


COMMANDS = {
    "check-f": cmd_check_f, "trace": cmd_trace, "verify": cmd_verify,
    "morse": cmd_morse, "plotdata": cmd_plotdata,
}


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _param(text: str) -> tuple[str, float]:
    k, sep, v = text.partition("=")
    try:
        if not sep or not k:
            raise ValueError
        return k.strip(), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gelfand", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--f", dest="expression", help="nonlinearity as an expression in u")
        p.add_argument("--family", help="builtin family name")
        p.add_argument("--param", action="append", type=_param, default=None,
                       help="family parameter NAME=VALUE (repeatable)")
        p.add_argument("--alpha-min", type=float)
        p.add_argument("--alpha-max", type=float)
        p.add_argument("--alphas", type=_floats, help="comma-separated alpha values")
        p.add_argument("--n-grid", type=int)
        p.add_argument("--tol", type=float, help="shooting relative tolerance")
        p.add_argument("--out", help="output file (directory for plotdata)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "trace":
            p.add_argument("--morse", action="store_true", default=None, help="fill the morse column")
        if name == "verify":
            p.add_argument("--mutate", choices=["flip", "inflate"],
                           help="corrupt each profile first (the report must fail)")
        if name == "plotdata":
            p.add_argument("--input", help="trace CSV")
            p.add_argument("--profile-alphas", type=_floats)
            p.add_argument("--svg", action="store_true", default=None)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON: {exc}") from None
        if not isinstance(base, dict):
            raise ConfigError("config must be a JSON object")
    cfg = RunConfig.from_dict(base)
    if args.expression is not None and args.family is not None:
        raise ConfigError("give exactly one of --f and --family")
    if args.expression is not None:
        cfg.expression, cfg.family = args.expression, None
    if args.family is not None:
        cfg.family, cfg.expression = args.family, None
    if args.param:
        cfg.params = dict(args.param)
    lo, hi = cfg.alpha_range
    cfg.alpha_range = (args.alpha_min if args.alpha_min is not None else lo,
                       args.alpha_max if args.alpha_max is not None else hi)
    for key in ("alphas", "n_grid", "tol", "out", "morse", "mutate", "input",
                "profile_alphas", "svg"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    cfg.validate(args.command)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors share the generic error code; 2 is reserved for failed checks
        return EXIT_ERROR if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ConditionViolation, ExprError, KeyError, ValueError,
            ShootError, SpectrumError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
