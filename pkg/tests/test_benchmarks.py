import math

import numpy as np
import pytest

from resonant_waveguide import benchmarks
from resonant_waveguide.benchmarks import (CONSISTENCY_RISE, PROFILE_SETUPS, consistency_ramp, benchmark_traces,
                                           run_bench, theta_profile)
from resonant_waveguide.inversion import FrequencyPlan
from resonant_waveguide.waveguide import builtin_profile


def test_setups_cover_all_profiles_and_fit_the_band():
    assert sorted(PROFILE_SETUPS) == [f"h{i}" for i in range(1, 8)]
    for name, setup in PROFILE_SETUPS.items():
        p = builtin_profile(name)
        plan = FrequencyPlan.from_bounds(1, p.h_min, p.h_max, setup.grid)
        assert len(plan.frequencies) == 20


def test_h7_end_widths_are_read_off_the_plateaus():
    p = builtin_profile("h7")
    lo, hi = PROFILE_SETUPS["h7"].end_widths(p)
    assert lo == pytest.approx(float(p.h(np.array([-6.0]))[0]), abs=1e-15)
    assert hi == pytest.approx(float(p.h(np.array([6.0]))[0]), abs=1e-15)
    assert PROFILE_SETUPS["h3"].end_widths(p) is None


def test_theta_profile_shape():
    p = theta_profile(0.5)
    x = np.array([-0.2, 0.2, 1.0, 2.3])
    slopes = p.h_prime(x)
    assert slopes[:2] == pytest.approx([0.5 * 8e-4] * 2)
    assert slopes[2:] == pytest.approx([8e-4] * 2)
    assert p.h_min == pytest.approx(0.0983) and p.h_max == pytest.approx(0.1017)
    with pytest.raises(ValueError):
        theta_profile(10.0, core=3.0)


@pytest.mark.parametrize("eta", [1.6e-3, 8e-4, 4e-4])
def test_consistency_ramp(eta):
    p = consistency_ramp(eta)
    assert p.h_max - p.h_min == pytest.approx(2 * CONSISTENCY_RISE, rel=1e-12)
    assert float(np.max(np.abs(p.h_prime(np.linspace(-1, 1, 11))))) == pytest.approx(eta / 1.1)


def test_benchmark_traces_noise_is_seeded():
    p = builtin_profile("h3")
    plan = FrequencyPlan.from_bounds(1, p.h_min, p.h_max, "31.2:31.4:2")
    a = benchmark_traces(p, plan, [6.0], step=0.05, noise=0.1, seed=4)
    b = benchmark_traces(p, plan, [6.0], step=0.05, noise=0.1, seed=4)
    c = benchmark_traces(p, plan, [6.0], step=0.05, noise=0.1, seed=5)
    for k in plan.frequencies:
        assert np.array_equal(a[k].values, b[k].values)
        assert not np.array_equal(a[k].values, c[k].values)


def test_bench_records_failures(tmp_path, monkeypatch):
    def broken(name, *args, **kwargs):
        raise RuntimeError("synthetic failure")
    monkeypatch.setattr(benchmarks, "run_profile", broken)
    out = run_bench(tmp_path, ["h1", "h2"], noise_levels=())
    assert [r["ok"] for r in out["rows"]] == [False, False]
    assert "synthetic failure" in (tmp_path / "summary.csv").read_text()
    assert math.isnan(out["rows"][0]["relative_linf"])
    assert (tmp_path / "timings.csv").exists()
