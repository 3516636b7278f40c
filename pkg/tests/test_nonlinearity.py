import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from gelfand.nonlinearity import (
    ConditionViolation, RatioTable, advance_ratio, build_spec, check_lemma22, estimate_A, family,
    init_ratio,
)


def test_build_spec_examples():
    s = build_spec("exp(u^3)")
    assert (s.f0, s.fp0) == (1.0, 0.0)
    assert s.satisfies_conditions
    s = build_spec("u")
    assert (s.f0, s.fp0) == (0.0, 1.0)
    with pytest.raises(ConditionViolation) as info:
        build_spec("exp(-u)")
    cond, msg, where = info.value.failures[0]
    assert cond == "f1" and "f'" in msg and where == 0.0


def test_build_spec_f2_violation():
    with pytest.raises(ConditionViolation) as info:
        build_spec("u^2")
    assert info.value.failures[0][0] == "f2"


def test_family_registry():
    for name in ("exp_pow", "exp", "double_exp", "power_shift", "exp_pow_log"):
        assert family(name).f(0.5) > 0
    assert family("exp_pow", k=2, p=2.5).violations      # recorded, not raised
    with pytest.raises(KeyError):
        family("sinh")


def test_log_domain_scaling():
    s = family("double_exp")
    # r^2 f(v) with f(v) = exp(e^7) ~ 1e476 and r^2 = 1e-480
    log_r2 = -480 * math.log(10.0)
    got = s.scaled(7.0, log_r2)
    assert got == pytest.approx(math.exp(math.exp(7.0) + log_r2), rel=1e-10)


def test_rho_exp_closed_form(f_exp):
    st = init_ratio(f_exp)
    for u in (0.5, 1.0, 5.0, 20.0):
        st = advance_ratio(f_exp, st, u)
        assert st.rho == pytest.approx(1.0 - math.exp(-u), rel=1e-12)
        assert st.logF == pytest.approx(math.log(math.expm1(u)), rel=1e-12)
    assert advance_ratio(f_exp, init_ratio(f_exp), 5.0).rho == pytest.approx(0.993262, abs=5e-7)


def test_rho_constant_f(f_one):
    st = init_ratio(f_one)
    for u in (0.01, 1.0, 3.0):
        st = advance_ratio(f_one, st, u)
        assert st.rho == pytest.approx(u, rel=1e-12)
        assert st.logF == pytest.approx(math.log(u), rel=1e-12, abs=1e-13)


def test_init_ratio_examples(f_exp, f_cubic):
    assert init_ratio(f_exp, 1e-4).rho == pytest.approx(1e-4 * (1 - 5e-5), rel=1e-8)
    assert init_ratio(build_spec("u"), 1e-4).rho == pytest.approx(5e-5, rel=1e-12)
    assert init_ratio(f_cubic, 1e-4).rho == pytest.approx(1e-4, rel=1e-11)


def test_rho_leading_term_for_exp_pow():
    p = 3.0
    s = family("exp_pow", p=p)
    st = advance_ratio(s, init_ratio(s), 12.0)
    lead = 12.0 ** (1 - p) / p
    # next order is (p - 1)/p * u^-p
    assert st.rho / lead == pytest.approx(1.0, abs=2 * (p - 1) / p / 12.0 ** p)


def _mp_ratio(expr_f, expr_fp, u):
    u = mp.mpf(u)
    nodes = sorted({mp.mpf(0)} | {u - mp.mpf(2) ** (-j) for j in range(40, -2, -1)
                                  if u - mp.mpf(2) ** (-j) > 0} | {u})
    F = mp.quad(expr_f, nodes)
    f, fp = expr_f(u), expr_fp(u)
    return F / f, mp.log(F), 1 - F * fp / f ** 2


@pytest.mark.parametrize("u", [0.3, 1.0, 2.0, 4.0, 6.5, 8.8])
def test_ratio_against_mpmath(f_cubic, u):
    mp.mp.dps = 40
    rho, logF, drho = _mp_ratio(lambda x: mp.e ** (x ** 3), lambda x: 3 * x * x * mp.e ** (x ** 3), u)
    st = advance_ratio(f_cubic, init_ratio(f_cubic), u)
    assert st.rho == pytest.approx(float(rho), rel=1e-12)
    assert st.logF == pytest.approx(float(logF), rel=1e-12)
    assert st.drho == pytest.approx(float(drho), rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("u", [1.0, 3.0, 6.0])
def test_ratio_double_exp_against_mpmath(f_double, u):
    mp.mp.dps = 40
    rho, logF, _ = _mp_ratio(lambda x: mp.e ** (mp.e ** x), lambda x: mp.e ** x * mp.e ** (mp.e ** x), u)
    st = advance_ratio(f_double, init_ratio(f_double), u)
    assert st.rho == pytest.approx(float(rho), rel=1e-12)
    assert st.logF == pytest.approx(float(logF), rel=1e-12)


@pytest.mark.parametrize("name, kw", [("exp_pow", {"p": 3}), ("exp_pow", {"p": 2.5}),
                                      ("double_exp", {}), ("exp_pow_log", {})])
def test_rho_times_f_matches_quadrature(name, kw):
    s = family(name, **kw)
    table = RatioTable(s, 6.0)
    for u in np.linspace(0.2, 6.0, 12):
        if s.log_f(u) > 690:
            continue
        F, _ = quad(s.f, 0.0, u, epsabs=0, epsrel=1e-12, limit=200)
        assert table.rho(u)[0] * s.f(u) == pytest.approx(F, rel=1e-8)


SUPERCRITICAL = [("exp_pow", {"p": 3}), ("exp_pow", {"p": 2.5}), ("exp_pow", {"p": 4}),
                 ("double_exp", {}), ("exp_pow_log", {})]


@pytest.mark.parametrize("name, kw", SUPERCRITICAL)
def test_logF_increasing_convex_and_rho_nonincreasing(name, kw):
    s = family(name, **kw)
    rep = estimate_A(s)
    assert rep.is_supercritical
    u = np.array([st.u for st in rep.states])
    logF = np.array([st.logF for st in rep.states])
    assert np.all(np.diff(logF) > 0)
    slope = np.diff(logF) / np.diff(u)
    assert np.all(np.diff(slope) >= -1e-12 * slope[1:])
    rho = np.array([st.rho for st in rep.states])
    beyond = u >= rep.u0
    assert np.all(np.diff(rho[beyond]) <= 1e-14 * rho[beyond][1:])


@pytest.mark.parametrize("k, p, window", [(0, 3, None), (2, 2.5, (1.0, 80.0)), (-1, 4, None)])
def test_g_prime_converges_to_one_over_p(k, p, window):
    s = family("exp_pow", k=k, p=p)
    rep = estimate_A(s, window)
    us, g = np.array(rep.samples).T
    upper = us >= 0.5 * (us[0] + us[-1])
    gu = g[upper]
    d = np.diff(gu)
    assert np.all(d <= 0) or np.all(d >= 0)
    assert abs(gu[-1] - 1 / p) < abs(gu[0] - 1 / p)
    assert rep.A_est == pytest.approx(1 / p, rel=0.02)


def test_g_prime_dip_for_k2_matches_oracle():
    # u^2 e^{u^2.5}: g' has a shallow minimum near u = 27 before rising to 0.4
    s = family("exp_pow", k=2, p=2.5)
    rep = estimate_A(s)
    us, g = np.array(rep.samples).T
    i = int(np.argmin(np.abs(us - 50.0)))
    assert g[i] - 0.4 == pytest.approx(-1.718457942e-5, rel=1e-4)


def test_estimate_A_examples(f_exp, f_cubic, f_double):
    r = estimate_A(f_cubic)
    assert r.is_supercritical and r.A_est == pytest.approx(1 / 3, rel=0.02)
    assert A_ok(r) and r.u0 > 0
    r = estimate_A(f_double)
    assert r.is_supercritical and abs(r.A_est) <= 0.02
    r = estimate_A(f_exp)
    assert not r.is_supercritical and r.A_est == pytest.approx(1.0, abs=0.02)
    assert r.to_dict()["verdict"] == "not supercritical"


def A_ok(r):
    return r.A_est < r.p < 0.5 - r.margin + 1e-15


def test_supercritical_iff_margin(f_cubic):
    for margin in (0.01, 0.1, 0.2):
        r = estimate_A(f_cubic, margin=margin)
        assert r.is_supercritical == (r.A_est < 0.5 - margin)
        if r.p is not None:
            assert r.p == min((r.A_est + 0.5) / 2, 0.5 - margin)


def test_power_shift_is_not_supercritical():
    r = estimate_A(family("power_shift"))
    assert not r.is_supercritical


def test_growth_bound_examples(f_exp, f_cubic, f_double):
    c = check_lemma22(f_cubic, estimate_A(f_cubic), 0.34)
    assert c.passed and c.c1 > 0
    c = check_lemma22(f_double, estimate_A(f_double), 0.05)
    assert c.passed and c.c1 > 0
    with pytest.raises(ValueError):
        check_lemma22(f_exp, estimate_A(f_exp))
    with pytest.raises(ValueError):
        check_lemma22(f_cubic, estimate_A(f_cubic), 0.3)    # p below A


def test_growth_bound_holds_on_samples(f_cubic):
    rep = estimate_A(f_cubic)
    c = check_lemma22(f_cubic, rep)
    assert all(r >= -1e-9 * (c.c1 * u) ** (1 / c.p) for u, r in c.residuals)
