"""Acceptance criteria AC1-AC9.

Each test prints one line ``AC<n> PASS|FAIL <details>`` to the terminal (even
under output capture) and then asserts.  Run alone with

    pytest tests/test_acceptance.py -v
"""

import math
import random
import time

import numpy as np
import pytest

from conftest import liouville_lambda
from gelfand.cli import main
from gelfand.curve import REFUTED, SUPPORTED, check_theorem_A, estimate_lambda_star, \
    singular_convergence, trace
from gelfand.expr import differentiate, evaluate, parse
from gelfand.nonlinearity import estimate_A, family
from gelfand.shoot import first_zero_curve, profile_u, shoot
from gelfand.spectrum import ModeProblem, lowest_mode_eigenvalue, mode_negative_count, \
    morse_along_curve
from gelfand.verify import FAIL, PASS, check_gradient_estimate, check_G_monotone, \
    log_bound_constants, mutate_profile, supercrit_report

LN4 = 2.0 * math.log(2.0)


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nAC{n} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, f"AC{n}: {detail}"
    return emit


def _bessel_j0(x: float) -> float:
    total, term = 0.0, 1.0
    for k in range(80):
        total += term
        term *= -(x / 2) ** 2 / ((k + 1) ** 2)
    return total


def _j01() -> float:
    """First zero of J0 by sign scan and bisection of the power series."""
    x = 0.5
    while _bessel_j0(x) * _bessel_j0(x + 0.01) > 0:
        x += 0.01
    a, b = x, x + 0.01
    for _ in range(80):
        m = 0.5 * (a + b)
        a, b = (m, b) if _bessel_j0(a) * _bessel_j0(m) > 0 else (a, m)
    return 0.5 * (a + b)


def test_ac1_liouville_oracle(report):
    spec = family("exp")
    t0 = time.perf_counter()
    alphas = [0.5, LN4, 3.0, 6.0, 12.0, 20.0]
    pts = first_zero_curve(spec, alphas)
    rel = max(abs(p.lam - liouville_lambda(p.alpha)) / liouville_lambda(p.alpha) for p in pts)
    tr = trace(spec, (0.5, 20.0))
    elapsed = time.perf_counter() - t0
    tps = tr.turning_points
    ok = (rel <= 1e-6 and len(tps) == 1 and abs(tps[0].alpha - LN4) <= 1e-4
          and abs(tps[0].lam - 2.0) <= 1e-6 and elapsed < 5.0)
    tp = f"TP=({tps[0].alpha:.10f}, {tps[0].lam:.12f})" if tps else "no TP"
    report(1, ok, f"max rel err {rel:.2e}; {len(tps)} turning point(s), {tp}; {elapsed:.2f} s")


def test_ac2_supercriticality(report):
    t0 = time.perf_counter()
    details, ok = [], True
    for p in (2.5, 3.0, 4.0):
        a = estimate_A(family("exp_pow", p=p)).A_est
        ok &= abs(a - 1 / p) <= 0.02 / p
        details.append(f"p={p:g}: A={a:.5f}")
    a_dd = estimate_A(family("double_exp")).A_est
    ok &= abs(a_dd) <= 0.02
    r_exp = estimate_A(family("exp"))
    ok &= abs(r_exp.A_est - 1.0) <= 0.02 and not r_exp.is_supercritical
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5.0
    details += [f"exp(exp(u)): A={a_dd:.5f}",
                f"exp(u): A={r_exp.A_est:.5f} supercritical={r_exp.is_supercritical}",
                f"{elapsed:.2f} s"]
    report(2, ok, "; ".join(details))


def test_ac3_lower_bound_contrast(report):
    cubic = family("exp_pow", p=3)
    tc = trace(cubic, (0.5, 8.8))
    vc = check_theorem_A(tc, cubic)
    ls = estimate_lambda_star(tc)
    tail = [bp.lam for bp in tc.ok_points if bp.alpha > tc.turning_points[-1].alpha]
    lo, hi = ls.value - ls.uncertainty, ls.value + ls.uncertainty
    inside = all(lo <= x <= hi for x in tail)

    ex = family("exp")
    te = trace(ex, (0.5, 20.0))
    ve = check_theorem_A(te, ex)
    lam20 = te.ok_points[-1].lam
    # for exp(u) lambda* is the fold value (the extremal parameter), not the tail estimate
    ratio = ve.evidence["end_over_fold"]
    ok_fold = ratio == pytest.approx(lam20 / te.lambda_max_observed, rel=1e-15)
    closed = 8 * (math.exp(10) - 1) * math.exp(-20)
    ok = (tc.lambda_min_observed > 0 and inside and vc.verdict == SUPPORTED and ok_fold
          and ratio <= 2e-4 and ve.verdict == REFUTED and abs(lam20 - closed) <= 1e-6 * closed)
    report(3, ok, f"exp(u^3): lambda_min={tc.lambda_min_observed:.6f}, bracket=[{lo:.6f}, {hi:.6f}], "
                  f"tail inside={inside}, verdict={vc.verdict}; exp(u): lambda(20)/lambda_fold={ratio:.3e}, "
                  f"verdict={ve.verdict}")


SUPERCRITICAL = [
    ("exp_pow", {"p": 3}, [4.0, 5.0, 6.0, 7.0, 8.8]),
    ("exp_pow", {"p": 2.5}, [3.0, 6.0, 9.0, 12.0, 13.6]),
    ("exp_pow", {"p": 4}, [2.0, 3.0, 4.0, 4.5, 5.1]),
    ("double_exp", {}, [2.0, 3.0, 4.0, 5.0, 6.0]),
    ("exp_pow_log", {}, [2.0, 3.0, 4.0, 5.0, 5.5]),
]


def test_ac4_pohozaev_suite(report):
    t0 = time.perf_counter()
    worst_G = worst_grad = -math.inf
    ok = True
    for name, kw, alphas in SUPERCRITICAL:
        spec = family(name, **kw)
        rep = supercrit_report(spec)
        ok &= rep.is_supercritical
        for a in alphas:
            p = shoot(spec, a)
            g = check_G_monotone(spec, p, rep)
            d = check_gradient_estimate(spec, p, rep)
            ok &= g.status == PASS and d.status == PASS
            worst_G = max(worst_G, g.max_violation)
            worst_grad = max(worst_grad, d.max_violation)
    spec = family("exp_pow", p=3)
    bad = mutate_profile(shoot(spec, 6.0), "flip")
    mutated = (check_G_monotone(spec, bad).status, check_gradient_estimate(spec, bad).status)
    ok &= FAIL in mutated
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    report(4, ok, f"{len(SUPERCRITICAL)} families x 5 alphas: worst G/scale={worst_G:.2e}, "
                  f"worst gradient excess={worst_grad:.2e}; flipped v' -> {'/'.join(mutated)}; "
                  f"{elapsed:.2f} s")


def test_ac5_spectral_oracle(report):
    j01 = _j01()
    lo = lowest_mode_eigenvalue(ModeProblem.constant(0, 0.0, 2000))
    rel = abs(lo - j01 ** 2) / j01 ** 2
    counts = [mode_negative_count(ModeProblem.constant(0, c, 2000)) for c in (6.0, 40.0)]
    ok = rel <= 1e-3 and counts == [1, 2]
    report(5, ok, f"mu_1={lo:.8f} vs j01^2={j01 ** 2:.8f} (rel {rel:.2e}); counts c=6,40 -> {counts}")


def test_ac6_morse_behaviour(report):
    ex = family("exp")
    te = morse_along_curve(ex, trace(ex, (0.5, 20.0)))
    before = {bp.morse for bp in te.ok_points if bp.alpha < LN4 * (1 - 1e-6)}
    after = {bp.morse for bp in te.ok_points if bp.alpha > LN4 * (1 + 1e-6)}

    cubic = family("exp_pow", p=3)
    tc = morse_along_curve(cubic, trace(cubic, (0.5, 8.8)))
    m = [bp.morse for bp in tc.ok_points]
    nondecr = all(x <= y for x, y in zip(m, m[1:]))
    ok = before == {0} and after == {1} and nondecr and max(m) >= 2
    report(6, ok, f"exp(u): morse {sorted(before)} before 2ln2, {sorted(after)} after; "
                  f"exp(u^3): nondecreasing={nondecr}, max={max(m)}, increments={tc.morse_increments}")


def test_ac7_apriori_uniformity(report):
    cubic, ex = family("exp_pow", p=3), family("exp")
    alphas = [5.0, 6.0, 7.0, 8.0]
    c = np.array([log_bound_constants(profile_u(shoot(cubic, a)))[0] for a in alphas])
    spread = float(c.max() / np.median(c))
    ce = [log_bound_constants(profile_u(shoot(ex, a)))[0] for a in alphas]
    grows = all(x < y for x, y in zip(ce, ce[1:]))
    ok = spread <= 1.5 and grows
    report(7, ok, f"exp(u^3): C={np.round(c, 5).tolist()} spread={spread:.4f}; "
                  f"exp(u): C={np.round(ce, 5).tolist()} growing={grows}")


def test_ac8_singular_convergence(report):
    rep = singular_convergence(family("exp_pow", p=3), [6.0, 7.0, 8.0], (0.2, 1.0))
    d = list(rep.distances)
    ok = all(x > y for x, y in zip(d, d[1:])) and rep.decreasing
    report(8, ok, f"sup distances on [0.2, 1]: {[f'{x:.6g}' for x in d]}")


BUILTIN = ["exp(u^3)", "u^2*exp(u^2.5)", "exp(exp(u))", "exp(u)", "(1+u)^3",
           "exp(u^3*log(2.718281828459045+u))", "1", "u", "u*exp(u^3)"]


def test_ac9_determinism_and_parser(report, tmp_path, capsys):
    blobs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        code = main(["trace", "--f", "exp(u^3)", "--alpha-min", "0.5", "--alpha-max", "8.8",
                     "--out", str(out)])
        blobs.append((code, out.read_bytes()))
    capsys.readouterr()
    identical = blobs[0] == blobs[1] and blobs[0][0] == 0

    worst, samples = 0.0, 0
    rng = random.Random(2024)
    for text in BUILTIN:
        e = parse(text)
        d = differentiate(e)
        for _ in range(1000):
            u = rng.uniform(0.1, 5.0)
            val, f = evaluate(d, u), evaluate(e, u)
            if not (math.isfinite(val) and math.isfinite(f)) or abs(f) > 1e250:
                continue
            h = 1e-5 / (1.0 + (abs(val / f) if f else 1.0))
            fd = (evaluate(e, u + h) - evaluate(e, u - h)) / (2 * h)
            worst = max(worst, abs(val - fd) / (1 + abs(val)))
            samples += 1
    ok = identical and worst <= 1e-6 and samples >= 1000 * len(BUILTIN) // 2
    report(9, ok, f"byte-identical CSV={identical} ({len(blobs[0][1])} bytes); "
                  f"derivative FD worst {worst:.2e} over {samples} samples")
