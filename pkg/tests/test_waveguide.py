import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resonant_waveguide.special import integrate
from resonant_waveguide.waveguide import (ForbiddenFrequencyError, GAMMA, builtin_profile, classify_mode,
                                          delta_margin, flat_profile, local_wavenumber, mode_function,
                                          piecewise_linear_profile, profile_from_json, profile_to_json,
                                          ramp_profile, table_profile, transverse_trace)

NAMES = [f"h{i}" for i in range(1, 8)]
FREQUENCY_SETS = {
    "h1": np.linspace(30.92, 31.93, 20), "h2": np.linspace(30.9, 31.95, 20),
    "h3": np.linspace(31.01, 31.83, 20), "h4": np.linspace(31.01, 31.83, 20),
    "h5": np.linspace(30.65, 31.4, 20), "h6": np.linspace(31.42, 32.21, 20),
    "h7": np.linspace(30.97, 31.43, 20),
}


def test_mode_function_values():
    p = flat_profile(0.1)
    assert mode_function(0, p, 0.0, 0.05) == pytest.approx(math.sqrt(10))
    assert mode_function(1, p, 0.0, 0.1) == pytest.approx(-math.sqrt(2 / 0.1))
    with pytest.raises(ValueError):
        mode_function(1, p, 0.0, 0.2)
    with pytest.raises(ValueError):
        mode_function(1, p, 0.0, -1e-3)


@pytest.mark.parametrize("n,m", [(0, 0), (1, 1), (1, 2), (0, 3), (2, 2)])
def test_modes_orthonormal(n, m):
    p = builtin_profile("h1")
    x = 2.3
    hx = float(p.h(np.array([x]))[0])
    val = integrate(lambda y: mode_function(n, p, x, y) * mode_function(m, p, x, y), 0.0, hx)
    assert val == pytest.approx(1.0 if n == m else 0.0, abs=1e-10)


def test_transverse_trace():
    assert transverse_trace(0, "top") == 1.0
    assert transverse_trace(3, "bottom") == pytest.approx(math.sqrt(2))
    assert transverse_trace(3, "top") == pytest.approx(-math.sqrt(2))


def test_local_wavenumber():
    p = flat_profile(0.1013)
    assert local_wavenumber(1, math.pi / 0.1013, p, 0.0) == pytest.approx(0.0, abs=1e-6)
    assert local_wavenumber(0, 31.1, p, 0.0) == 31.1
    assert local_wavenumber(1, 31.1, p, 0.0) == pytest.approx(2.3278051941847853, rel=1e-12)
    below = local_wavenumber(1, 30.0, p, 0.0)
    assert below.real == 0.0 and below.imag > 0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 4), st.floats(20, 70), st.floats(-8, 8))
def test_wavenumber_branch(n, k, x):
    p = builtin_profile("h2")
    kn = local_wavenumber(n, k, p, x)
    assert kn.real >= 0 and kn.imag >= 0
    assert kn.real == 0 or kn.imag == 0
    assert (kn.imag == 0) == (k >= n * math.pi / float(p.h(np.array([x]))[0]))


def test_delta_margin():
    prof = piecewise_linear_profile([(-4, 0.0982933), (4, 0.1017067)])
    brute = min(math.sqrt(abs(31.4**2 - (n * math.pi / h) ** 2)) for n in range(3)
                for h in (0.0982933, 0.1017067))
    assert delta_margin(31.4, prof, 2) == pytest.approx(brute, rel=1e-12)
    assert brute == pytest.approx(5.643157836066031, rel=1e-12)
    assert delta_margin(math.pi / prof.h_min, prof) == pytest.approx(0.0, abs=1e-5)


@settings(max_examples=100, deadline=None)
@given(st.floats(25, 40))
def test_delta_margin_continuous(k):
    p = builtin_profile("h3")
    kf = [n * math.pi / h for n in (1,) for h in (p.h_min, p.h_max)]
    if min(abs(k - f) for f in kf) > 1e-3:
        assert abs(delta_margin(k + 1e-6, p) - delta_margin(k, p)) <= 1e-3


@pytest.mark.parametrize("name", NAMES)
def test_delta_positive_on_frequency_sets(name):
    p = builtin_profile(name)
    assert all(delta_margin(float(k), p) > 0 for k in FREQUENCY_SETS[name])


def test_builtin_values():
    assert GAMMA[4] == pytest.approx(512 / 3 * 1e-5)
    assert builtin_profile("h1").h(np.array([0.0]))[0] == pytest.approx(0.1, abs=1e-15)
    h3 = builtin_profile("h3")
    assert h3.h(np.array([4.5, 7.0])) == pytest.approx([0.1 + 4 * GAMMA[5]] * 2, abs=1e-15)
    h5 = builtin_profile("h5")
    assert h5.h(np.array([-5.0, 5.0, 0.0])) == pytest.approx([0.1, 0.1, 0.1 + GAMMA[6]], abs=1e-15)
    with pytest.raises(ValueError):
        builtin_profile("h8")


@pytest.mark.parametrize("name", NAMES)
def test_builtin_invariants(name):
    p = builtin_profile(name)
    inv = p.check_invariants()
    assert inv["bounds_ok"]
    assert inv["eta_bound_ok"]
    # h4 has a square-root corner at -4, sampled 1e-13 away from it
    assert inv["endpoint_jump"] < (1e-9 if name == "h4" else 1e-12)
    # the h7 plateaus are not the extreme widths
    assert inv["outside_extremal"] == (name != "h7")


@pytest.mark.parametrize("name", NAMES)
def test_analytic_derivatives(name):
    p = builtin_profile(name)
    a, b = p.support
    x = np.linspace(a + 0.013, b - 0.017, 157)
    notches = np.asarray(list(p.spec.get("notches", [])) + [1e9])
    x = x[np.min(np.abs(x[:, None] - notches[None, :]), axis=1) > 1e-2]
    d = 1e-5
    fd = (p.h(x + d) - p.h(x - d)) / (2 * d)
    assert np.max(np.abs(fd - p.h_prime(x))) < 1e-8
    fd2 = (p.h_prime(x + d) - p.h_prime(x - d)) / (2 * d)
    assert np.max(np.abs(fd2 - p.h_double_prime(x))) < 1e-6 * max(1.0, float(np.max(np.abs(fd2))))


def test_h3_resonant_point_closed_form():
    p = builtin_profile("h3")
    for k in (31.1, 31.4, 31.7):
        ctx = classify_mode(1, k, p)
        assert ctx.classification == "locally-resonant"
        assert ctx.resonant_points == pytest.approx([(math.pi / k - 0.1) / GAMMA[5]], abs=1e-9)
        assert ctx.simple == (True,)
    assert classify_mode(1, math.pi / 0.1, p).resonant_points == pytest.approx([0.0], abs=1e-9)


def test_h5_two_symmetric_points():
    ctx = classify_mode(1, 31.0, builtin_profile("h5"))
    a, b = ctx.resonant_points
    assert a == pytest.approx(-b, abs=1e-9)


def test_classification_regimes():
    p = builtin_profile("h3")
    assert classify_mode(1, 32.5, p).classification == "propagative"
    assert classify_mode(1, 30.5, p).classification == "evanescent"
    assert classify_mode(0, 30.5, p).classification == "propagative"
    with pytest.raises(ForbiddenFrequencyError) as info:
        classify_mode(1, math.pi / p.h_min, p)
    assert info.value.delta == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("name", ["h1", "h2", "h3", "h4", "h5", "h6", "h7"])
def test_resonant_count_matches_brute_force(name):
    p = builtin_profile(name)
    x = np.linspace(-8, 8, 100_001)
    hx = p.h(x)
    for k in FREQUENCY_SETS[name][::4]:
        ctx = classify_mode(1, float(k), p)
        g = hx - math.pi / k
        changes = int(np.sum(np.sign(g[:-1]) * np.sign(g[1:]) < 0))
        assert len(ctx.resonant_points) == changes
        for xs in ctx.resonant_points:
            assert abs(float(p.h(np.array([xs]))[0]) - math.pi / k) <= 1e-10 * p.h_max
        if name in ("h1", "h2", "h3", "h4"):
            assert changes == 1
        if name == "h5":
            assert changes == 2


def test_profile_json_round_trip(tmp_path):
    for p in (builtin_profile("h2"), flat_profile(0.1), ramp_profile(1e-4, 3.0),
              table_profile(np.linspace(-4, 4, 9), 0.1 + 1e-4 * np.tanh(np.linspace(-4, 4, 9)))):
        q = profile_from_json(profile_to_json(p))
        x = np.linspace(-6, 6, 301)
        assert np.allclose(q.h(x), p.h(x), atol=1e-15, rtol=0)
    with pytest.raises(ValueError):
        profile_from_json(json.dumps({"nothing": 1}))


def test_table_profile_is_monotone_between_samples():
    x = np.linspace(-4, 4, 9)
    h = 0.1 + 1e-3 * np.array([-2, -2, -1.5, -0.5, 0, 0.4, 1.5, 2, 2])
    p = table_profile(x, h)
    dense = p.h(np.linspace(-5, 5, 2001))
    assert np.all(np.diff(dense) >= -1e-15)
    assert p.h_min == pytest.approx(h.min()) and p.h_max == pytest.approx(h.max())
