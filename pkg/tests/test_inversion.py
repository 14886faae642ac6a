import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resonant_waveguide.benchmarks import run_profile
from resonant_waveguide.fitting import AiryParams, model_eval
from resonant_waveguide.forward import SurfaceTrace, default_n_max, benchmark_point_source, synthesize_surface
from resonant_waveguide.inversion import (Branch, CalibrationError, FrequencyPlan, ReconstructionError,
                                          calibrate_bounds, calibrate_support, default_branches, error_metrics,
                                          filter_resonant_component, parse_grid, reconstruct_profile,
                                          refine_peak, select_window)
from resonant_waveguide.inversion import _longest_monotone
from resonant_waveguide.waveguide import GAMMA, builtin_profile, classify_mode, flat_profile


@pytest.fixture(scope="module")
def h3_result():
    return run_profile("h3")


@pytest.fixture(scope="module")
def h2_result():
    return run_profile("h2")


def test_parse_grid():
    assert np.array_equal(parse_grid("1:2:3"), np.array([1.0, 1.5, 2.0]))
    assert np.array_equal(parse_grid("5:5:1"), np.array([5.0]))
    for bad in ("1:2", "a:b:c", "2:1:4", "1:2:0"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_frequency_plan():
    plan = FrequencyPlan.from_bounds(1, 0.0986667, 0.1013333, "31.01:31.83:20")
    assert plan.k_min == pytest.approx(math.pi / 0.1013333)
    assert plan.h_min == pytest.approx(0.0986667) and plan.h_max == pytest.approx(0.1013333)
    assert plan.width(31.4) == pytest.approx(math.pi / 31.4)
    with pytest.raises(ValueError):
        FrequencyPlan(1, 31.0, 32.0, (31.5, 31.2))
    with pytest.raises(ValueError):
        FrequencyPlan(1, 31.0, 32.0, (30.5, 31.2))
    with pytest.raises(ValueError):
        FrequencyPlan(0, 31.0, 32.0, (31.5,))


def test_filter_without_bands_is_identity():
    t = np.linspace(-5, 5, 101)
    tr = SurfaceTrace(t, np.exp(1j * t), 1.0)
    out = filter_resonant_component(tr, [])
    assert np.array_equal(out.values, tr.values)


def test_filter_removes_plane_wave():
    t = np.arange(-8, 8.0001, 0.01)
    airy_part = model_eval(AiryParams(1.0, 1.4, -2.8), t)
    tr = SurfaceTrace(t, airy_part + 0.5 * np.exp(20j * t), 1.0)
    out = filter_resonant_component(tr, [20.0])
    m = np.abs(t) <= 6
    assert np.linalg.norm((out.values - airy_part)[m]) <= 0.02 * np.linalg.norm(airy_part[m])


def test_filter_needs_uniform_samples():
    t = np.array([0.0, 0.1, 0.3, 0.4])
    with pytest.raises(ValueError):
        filter_resonant_component(SurfaceTrace(t, np.ones(4), 1.0), [3.0])


def test_select_window():
    t = np.arange(-8, 8.0001, 0.01)
    d = model_eval(AiryParams(1.0, 1.4, -2.8), t)
    win = select_window(SurfaceTrace(t, d, 1.0))
    assert win.meta["radius"] == pytest.approx(0.2 * 8e-4 ** (-1 / 3), abs=1e-12)
    assert win.meta["radius"] == pytest.approx(2.154, abs=1e-3)
    # peak of |Ai| at -1.0188 mapped to t = (beta - a')/alpha
    assert abs(win.meta["x_max"] - (-2.8 + 1.018792971647471) / 1.4) <= 0.01
    assert "truncated" not in win.meta
    edge = select_window(SurfaceTrace(t, d, 1.0), radius=10.0)
    assert edge.meta["truncated"]
    with pytest.raises(ValueError):
        select_window(SurfaceTrace(t, d, 1.0), search=(20.0, 30.0))


def test_default_branches():
    assert default_branches([6.0], (-4, 4)) == [Branch(6.0, -1)]
    assert default_branches([0.0], (-4, 4)) == [Branch(0.0, -1), Branch(0.0, 1)]
    assert default_branches([6.0, -6.0], (-4, 4)) == [Branch(-6.0, 1), Branch(6.0, -1)]
    assert Branch(6.0, -1).increasing and not Branch(0.0, 1).increasing


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), max_size=25))
def test_longest_monotone_property(values):
    idx = _longest_monotone(values)
    kept = [values[i] for i in idx]
    assert all(a < b for a, b in zip(kept, kept[1:]))
    assert idx == sorted(idx)
    if values:
        assert len(idx) >= 1


def test_h3_points_follow_the_ramp(h3_result):
    xs = np.array([p[0] for p in h3_result.points])
    ws = np.array([p[1] for p in h3_result.points])
    assert len(xs) >= 15
    slope = np.polyfit(xs, ws, 1)[0]
    assert slope == pytest.approx(GAMMA[5], rel=0.05)


def test_h3_anchors_and_metrics(h3_result):
    truth = builtin_profile("h3")
    assert h3_result.anchors == ((-4.0, truth.h_min), (4.0, truth.h_max))
    bx, bh = h3_result.breakpoints
    assert bx[0] == -4.0 and bx[-1] == 4.0 and np.all(np.diff(bx) > 0)
    m = error_metrics(h3_result, truth)
    assert m == h3_result.metrics
    assert m["relative_linf"] <= 0.02
    d = json.loads(h3_result.to_json())
    assert len(d["points"]) == len(h3_result.points) and d["mode"] == 1


def test_h2_resonant_points_accurate(h2_result):
    truth = builtin_profile("h2")
    errs = []
    for x_app, _, k, _ in h2_result.points:
        x_true = classify_mode(1, k, truth).resonant_points
        errs.append(min(abs(x_app - x) for x in x_true))
    assert np.median(errs) <= 0.15


def test_plot_csv(h2_result, tmp_path):
    path = tmp_path / "plot.csv"
    h2_result.write_plot_csv(path, builtin_profile("h2"), n=11)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,h_true,h_app" and len(lines) == 12


def test_reconstruction_fails_on_structureless_traces():
    plan = FrequencyPlan.from_bounds(1, 0.0986667, 0.1013333, "31.01:31.83:5")
    x = np.arange(-8, 8.0001, 0.01)
    # evanescent decay away from the source: no interior peak on any branch
    traces = {k: SurfaceTrace(x, np.exp(2 * (x - 6.0)) + 0j, k) for k in plan.frequencies}
    with pytest.raises(ReconstructionError):
        reconstruct_profile(plan, traces, (-4, 4), [6.0])
    with pytest.raises(ReconstructionError):
        reconstruct_profile(plan, {}, (-4, 4), [6.0])


def _flat_generator(width=0.1):
    p = flat_profile(width)
    x = np.arange(-8, 8.001, 0.02)

    def gen(k, s):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            spec = benchmark_point_source(p, [s], default_n_max(k, p), interior=False)
            return synthesize_surface(p, k, spec, x)
    return gen


def test_calibrate_bounds_on_flat_guide():
    gen = _flat_generator()
    out = calibrate_bounds(gen, parse_grid("31:32:30"), -6.0, 6.0)
    step = 1.0 / 29
    assert out["left_k_peak"] == out["right_k_peak"]
    assert abs(out["left_k_peak"] - math.pi / 0.1) <= step
    k = refine_peak(gen, -6.0, out["left_k_peak"], step)
    assert k == pytest.approx(math.pi / 0.1, rel=1e-7)


def test_calibrate_bounds_without_peak():
    gen = _flat_generator()
    with pytest.raises(CalibrationError):
        calibrate_bounds(gen, parse_grid("32:33:10"), -6.0, 6.0)


def test_calibrate_support_needs_a_varying_guide():
    with pytest.raises(CalibrationError):
        calibrate_support(_flat_generator(), 31.45, 31.38, np.linspace(-7, 7, 15))
