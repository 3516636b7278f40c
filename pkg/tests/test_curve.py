import math
import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import liouville_lambda
from gelfand.curve import (
    INCONCLUSIVE, NOT_APPLICABLE, REFUTED, SUPPORTED, TraceOptions, check_theorem_A,
    estimate_lambda_star, singular_convergence, trace,
)
from gelfand.nonlinearity import build_spec
from gelfand.shoot import ShootError, ShootOptions


@pytest.fixture(scope="module")
def exp_trace(f_exp):
    return trace(f_exp, (0.5, 20.0))


@pytest.fixture(scope="module")
def cubic_trace(f_cubic):
    return trace(f_cubic, (0.5, 8.8))


def test_liouville_single_turning_point(f_exp):
    t0 = time.perf_counter()
    tr = trace(f_exp, (0.5, 20.0))
    assert time.perf_counter() - t0 < 5.0
    assert len(tr.turning_points) == 1
    tp = tr.turning_points[0]
    assert tp.kind == "max"
    assert tp.alpha == pytest.approx(2 * math.log(2), abs=1e-7)
    assert tp.lam == pytest.approx(2.0, abs=1e-9)
    for bp in tr.points:
        assert bp.lam == pytest.approx(liouville_lambda(bp.alpha), rel=1e-8)


def test_constant_f_no_turning_point(f_one):
    tr = trace(f_one, (0.5, 10.0), TraceOptions(n_grid=16))
    assert tr.turning_points == []
    lams = [bp.lam for bp in tr.points]
    assert np.all(np.diff(lams) > 0)
    assert lams == pytest.approx([4 * bp.alpha for bp in tr.points], rel=1e-10)


def test_cubic_turning_points_alternate(cubic_trace):
    tps = cubic_trace.turning_points
    assert len(tps) >= 1 and tps[0].kind == "max"
    kinds = [t.kind for t in tps]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    lam = [t.lam for t in tps]
    for i in range(1, len(lam)):
        assert (lam[i] < lam[i - 1]) == (kinds[i] == "min")
    # frozen from a desk-scale run
    assert [t.alpha for t in tps] == pytest.approx([0.88737, 2.07639, 3.45769, 5.82229, 8.48057],
                                                   abs=1e-4)
    assert lam == pytest.approx([2.50451, 0.86816, 1.87165, 1.05218, 1.68791], abs=1e-4)


def test_monotone_between_turning_points(cubic_trace):
    cuts = [t.alpha for t in cubic_trace.turning_points]
    pts = cubic_trace.ok_points
    edges = [-math.inf] + cuts + [math.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        seg = [p.lam for p in pts if lo <= p.alpha <= hi]
        d = np.diff(seg)
        assert np.all(d > 0) or np.all(d < 0)


def test_turning_points_stable_under_tighter_tolerance(f_cubic):
    opts = TraceOptions(n_grid=32, h1=False)
    a = trace(f_cubic, (0.5, 8.8), opts)
    b = trace(f_cubic, (0.5, 8.8), replace(opts, tp_tol=opts.tp_tol / 10))
    assert len(a.turning_points) == len(b.turning_points)
    for x, y in zip(a.turning_points, b.turning_points):
        assert abs(x.alpha - y.alpha) <= opts.tp_tol


def test_minimal_branch_emanates_from_origin(f_exp):
    tr = trace(f_exp, (1e-4, 1.0), TraceOptions(n_grid=12, h1=False))
    first = tr.ok_points[0]
    assert first.lam == pytest.approx(4 * first.alpha, rel=1e-3)


def test_f_zero_branch_starts_at_first_eigenvalue():
    s = build_spec("u*exp(u^3)")
    tr = trace(s, (1e-4, 0.5), TraceOptions(n_grid=8, h1=False))
    assert tr.ok_points[0].lam == pytest.approx(2.404825557695773 ** 2, rel=1e-6)


def test_lambda_star_liouville(exp_trace):
    ls = exp_trace.lambda_star_est
    assert ls.method == "tail" and ls.trend == "decreasing"
    assert ls.value == pytest.approx(liouville_lambda(20.0), rel=1e-8)
    assert exp_trace.lambda_max_observed == pytest.approx(2.0, abs=1e-9)


def test_lambda_star_cubic_bracket(cubic_trace):
    ls = estimate_lambda_star(cubic_trace)
    assert ls.method == "bracket"
    lo, hi = ls.value - ls.uncertainty, ls.value + ls.uncertainty
    assert 0 < lo < hi
    assert lo == pytest.approx(cubic_trace.turning_points[-2].lam)
    assert cubic_trace.lambda_min_observed > 0


def test_lambda_star_needs_two_points(exp_trace):
    with pytest.raises(ValueError):
        estimate_lambda_star(replace(exp_trace, points=exp_trace.points[:1]))


def test_lower_bound_verdicts(f_exp, f_cubic, f_one, exp_trace, cubic_trace):
    v = check_theorem_A(cubic_trace, f_cubic)
    assert v.verdict == SUPPORTED and v.evidence["is_supercritical"]
    v = check_theorem_A(exp_trace, f_exp)
    assert v.verdict == REFUTED and not v.evidence["is_supercritical"]
    assert exp_trace.points[-1].lam / exp_trace.lambda_max_observed <= 2e-4
    v = check_theorem_A(trace(f_one, (0.5, 5.0), TraceOptions(n_grid=8)), f_one)
    assert v.verdict == NOT_APPLICABLE


def test_lower_bound_inconclusive_on_short_range(f_cubic):
    tr = trace(f_cubic, (0.5, 1.5), TraceOptions(n_grid=16))
    assert len(tr.turning_points) == 1
    assert check_theorem_A(tr, f_cubic).verdict in (INCONCLUSIVE, REFUTED)


def test_trace_input_validation(f_exp, f_cubic):
    with pytest.raises(ValueError):
        trace(f_exp, (2.0, 1.0))
    with pytest.raises(ValueError):
        trace(f_exp, (0.0, 1.0))
    with pytest.raises(ValueError, match="overflow cap"):
        trace(f_cubic, (1.0, 9.0))


def test_trace_all_shots_failing(f_exp):
    opts = TraceOptions(n_grid=4, shoot=ShootOptions(max_steps=3))
    with pytest.raises(ShootError):
        trace(f_exp, (1.0, 2.0), opts)


def test_trace_to_dict_is_json_ready(exp_trace):
    import json

    d = exp_trace.to_dict()
    json.dumps(d)
    assert d["turning_points"][0]["kind"] == "max"


def test_singular_convergence_cubic(f_cubic):
    rep = singular_convergence(f_cubic, [6.0, 7.0, 8.0], (0.2, 1.0))
    assert rep.decreasing
    assert rep.distances[1] < rep.distances[0]
    assert rep.distances == pytest.approx([0.0769857, 0.0750026], rel=1e-4)


def test_singular_convergence_identical_alphas(f_cubic):
    rep = singular_convergence(f_cubic, [6.0, 6.0, 6.0])
    assert rep.distances == [0.0, 0.0]
    assert rep.deriv_distances == [0.0, 0.0]


def test_singular_convergence_constant_f_diverges(f_one):
    rep = singular_convergence(f_one, [1.0, 2.0, 4.0], (0.2, 1.0))
    # u = alpha (1 - s^2): distance (delta alpha) * max(1 - s^2) on the window
    assert rep.distances == pytest.approx([0.96, 1.92], rel=1e-8)
    assert not rep.decreasing


def test_singular_convergence_validation(f_cubic):
    with pytest.raises(ValueError):
        singular_convergence(f_cubic, [6.0, 7.0, 8.0], (0.0, 1.0))
    with pytest.raises(ValueError):
        singular_convergence(f_cubic, [6.0, 7.0, 8.0], (0.5, 1.5))
    with pytest.raises(ValueError):
        singular_convergence(f_cubic, [6.0, 7.0])
