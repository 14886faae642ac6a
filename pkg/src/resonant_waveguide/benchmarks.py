"""Reference experiments: the seven profiles, the noise study, the slope family.

Every routine here is deterministic for fixed seeds.
"""

from __future__ import annotations

import csv
import io
import math
import time
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .fitting import AiryParams, direct_fit, fit_least_squares, model_eval
from .forward import (PointSource, ReducedSource, SourceSpec, SourceTerm, SurfaceTrace, add_noise,
                      default_n_max, mode_ode_oracle, mode_trace, benchmark_point_source,
                      synthesize_surface, taylor_parameters)
from .inversion import (FrequencyPlan, ReconstructionResult, calibrate_bounds, calibrate_support,
                        filter_resonant_component, reconstruct_profile, refine_peak)
from .waveguide import (Profile, builtin_profile, classify_mode, piecewise_linear_profile,
                        ramp_profile)

__all__ = [
    "ProfileSetup",
    "PROFILE_SETUPS",
    "REFERENCE_ERRORS",
    "ERROR_BOUNDS",
    "NOISE_REFERENCE",
    "TRUE_PARAMS",
    "SAMPLING_SETS",
    "benchmark_traces",
    "run_profile",
    "noise_study",
    "theta_profile",
    "theta_misfit",
    "consistency_ramp",
    "forward_consistency",
    "filter_configuration",
    "run_bench",
    "run_calibration",
]

# relative L-infinity errors printed by the reference reconstructions
REFERENCE_ERRORS = {"h1": 0.0049, "h2": 0.0094, "h3": 0.0040, "h4": 0.016,
                    "h5": 0.0057, "h6": 0.0081, "h7": 0.0097}
# accepted relative errors for our generator; h4 has an unbounded slope
ERROR_BOUNDS = {name: (0.04 if name == "h4" else 0.02) for name in REFERENCE_ERRORS}
# reference least-squares error on the full window at noise 0.05
NOISE_REFERENCE = 0.000784

TRUE_PARAMS = AiryParams(2 + 1j, 1.4, -2.8)
SAMPLING_SETS = {
    "t1": (-6.0, -1.0, 100),
    "t2": (-2.0, 6.0, 100),
    "t3": (-6.0, 6.0, 200),
}


@dataclass(frozen=True)
class ProfileSetup:
    grid: str
    sources: tuple[float, ...]
    plateau_ends: tuple[float, float] | None = None  # read end widths off h at these points

    def end_widths(self, profile: Profile):
        if self.plateau_ends is None:
            return None
        return tuple(float(profile.h(np.array([x]))[0]) for x in self.plateau_ends)


PROFILE_SETUPS = {
    "h1": ProfileSetup("30.92:31.93:20", (6.0,)),
    "h2": ProfileSetup("30.9:31.95:20", (6.0,)),
    "h3": ProfileSetup("31.01:31.83:20", (6.0,)),
    "h4": ProfileSetup("31.01:31.83:20", (6.0,)),
    "h5": ProfileSetup("30.65:31.4:20", (0.0,)),
    "h6": ProfileSetup("31.42:32.21:20", (-6.0, 6.0)),
    # neither plateau of h7 is an extremum of the width
    "h7": ProfileSetup("30.97:31.43:20", (-1.5, 6.0), plateau_ends=(-4.0, 5.0)),
}


def benchmark_traces(profile: Profile, plan: FrequencyPlan, sources: Sequence[float],
                 step: float = 0.01, extent: float = 8.0, noise: float = 0.0,
                 seed: int = 0) -> dict:
    """Surface traces for the point sources ``f = y*delta_s``, ``b_top = delta_s``."""
    x = np.arange(-extent, extent + step / 2, step)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i, k in enumerate(plan.frequencies):
            spec = benchmark_point_source(profile, sources, default_n_max(k, profile))
            tr = synthesize_surface(profile, k, spec, x)
            out[k] = add_noise(tr, noise, seed + i) if noise > 0 else tr
    return out


def run_profile(name: str, noise: float = 0.0, seed: int = 0, step: float = 0.01,
                profile: Profile | None = None) -> ReconstructionResult:
    """Full reconstruction of a builtin profile with its reference setup."""
    setup = PROFILE_SETUPS[name]
    truth = builtin_profile(name) if profile is None else profile
    plan = FrequencyPlan.from_bounds(1, truth.h_min, truth.h_max, setup.grid)
    traces = benchmark_traces(truth, plan, setup.sources, step=step, noise=noise, seed=seed)
    return reconstruct_profile(plan, traces, truth.support, setup.sources, eta=truth.eta,
                               end_widths=setup.end_widths(truth), truth=truth)


# --------------------------------------------------------------------------
# noise study


def noise_study(levels: Sequence[float], seeds: int = 32, params: AiryParams = TRUE_PARAMS) -> dict:
    """Median errors on x* = beta/alpha over ``seeds`` noisy copies of the model.

    Keys: ``levels`` and, per method (LS on t1/t2/t3, direct on t3), the
    median x* error and the median parameter error relative to |p|.
    """
    truth = params.x_star
    pnorm = float(np.linalg.norm(params.as_vector()))
    out = {"levels": [float(a) for a in levels]}
    clean = {}
    for name, (a, b, n) in SAMPLING_SETS.items():
        t = np.linspace(a, b, n)
        clean[name] = SurfaceTrace(t, model_eval(params, t), 1.0)
    for name in list(SAMPLING_SETS) + ["direct"]:
        out[name] = {"lambda": [], "params": []}
    for amp in levels:
        for name in SAMPLING_SETS:
            lam, par = [], []
            for seed in range(seeds):
                rep = fit_least_squares(add_noise(clean[name], amp, seed))
                lam.append(abs(rep.params.x_star - truth))
                par.append(np.linalg.norm(rep.params.as_vector() - params.as_vector()) / pnorm)
            out[name]["lambda"].append(float(np.median(lam)))
            out[name]["params"].append(float(np.median(par)))
        lam, par = [], []
        for seed in range(seeds):
            try:
                p = direct_fit(add_noise(clean["t3"], amp, seed))
                lam.append(abs(p.x_star - truth))
                par.append(np.linalg.norm(p.as_vector() - params.as_vector()) / pnorm)
            except (ValueError, ArithmeticError):
                lam.append(math.inf)
                par.append(math.inf)
        out["direct"]["lambda"].append(float(np.median(lam)))
        out["direct"]["params"].append(float(np.median(par)))
    return out


# --------------------------------------------------------------------------
# slope family and model misfit


def theta_profile(theta: float, eta: float = 8e-4, h_min: float = 0.0983, h_max: float = 0.1017,
                  core: float = 0.5) -> Profile:
    """Increasing two-slope width: slope theta*eta on [-core, core], eta outside.

    The fit window around the centre reaches both kinks, so a smaller theta
    means a stronger departure from a single linear ramp inside the window.
    """
    mid = 0.5 * (h_min + h_max)
    rise = theta * eta * core
    outer = (0.5 * (h_max - h_min) - rise) / eta
    if outer <= 0:
        raise ValueError("theta*eta*core exceeds the half-range of the width")
    knots = [(-core - outer, h_min), (-core, mid - rise), (core, mid + rise), (core + outer, h_max)]
    return piecewise_linear_profile(knots, name=f"theta={theta:g}")


def theta_misfit(theta: float, x_stars: Sequence[float] = (-0.25, 0.0, 0.25), eta: float = 8e-4,
                 r: float = 0.2, source: float = 6.0, step: float = 1e-3) -> float:
    """Median L2 misfit on [x*-R, x*+R] between the resonant mode and its Airy model.

    The source is ``delta_source * phi_1``; the model parameters come from the
    closed-form Taylor expansion at x*.
    """
    prof = theta_profile(theta, eta)
    radius = r * eta ** (-1.0 / 3.0)
    out = []
    for xs in x_stars:
        k = math.pi / float(prof.h(np.array([xs]))[0])
        ctx = classify_mode(1, k, prof)
        x_star = min(ctx.resonant_points, key=lambda p: abs(p - xs))
        weight = 1.0 / math.sqrt(float(prof.h(np.array([source]))[0]))
        x = np.arange(x_star - radius, x_star + radius + step / 2, step)
        u = mode_trace(ctx, ReducedSource(1, ((source, complex(weight)),)), x)
        d_ex = u * math.sqrt(2.0) / np.sqrt(prof.h(x))
        z, alpha, beta = taylor_parameters(ctx, x_star, weight, source)
        d_app = model_eval(AiryParams(z, alpha, beta), x)
        out.append(math.sqrt(np.trapezoid(np.abs(d_ex - d_app) ** 2, x)))
    return float(np.median(out))


# --------------------------------------------------------------------------
# forward consistency against the finite-difference oracle

CONSISTENCY_RISE = 4 * 0.01 / 30  # width change on each side of the ramp centre


def consistency_ramp(eta: float) -> Profile:
    """Linear ramp with slope eta/1.1 and a fixed total rise, so smaller eta means longer."""
    slope = eta / 1.1
    return ramp_profile(slope, CONSISTENCY_RISE / slope, name=f"ramp eta={eta:g}")


def forward_consistency(eta: float, x=None, grid_step: float = 1e-3) -> dict:
    """Relative l2 gap between kernel synthesis and the FD oracle for three regimes of mode 1."""
    prof = consistency_ramp(eta)
    x = np.linspace(-6, 6, 1201) if x is None else np.asarray(x, dtype=float)
    configs = {
        "resonant": (math.pi / 0.1, 6.0),
        "propagative": (1.01 * math.pi / prof.h_min, 6.0),
        "evanescent": (0.999 * math.pi / prof.h_max, 0.0),
    }
    out = {}
    for label, (k, s) in configs.items():
        ctx = classify_mode(1, k, prof)
        g = ReducedSource(1, ((s, 1.0 + 0j),))
        u = mode_trace(ctx, g, x)
        ref = mode_ode_oracle(prof, k, 1, g, (-6.0, 6.0), grid_step)
        ov = np.interp(x, ref.abscissae, ref.values.real) + 1j * np.interp(x, ref.abscissae, ref.values.imag)
        out[label] = float(np.linalg.norm(u - ov) / np.linalg.norm(ov))
    return out


# --------------------------------------------------------------------------
# spatial filtering on a three-mode field


def filter_configuration(profile: Profile | None = None, k: float = 63.4, mode: int = 2,
                         source: float = 6.0, step: float = 0.01, region=(-8.0, 5.0)) -> dict:
    """Band-stop filter on ``f = delta_s*(3 phi_0 + 2 phi_1 + phi_2)``, ``b_top = delta_s``.

    Returns the relative l2 gaps, before and after filtering, between the
    full trace and the synthesis of the resonant mode alone, measured on
    ``region`` (away from the evanescent field of the source).
    """
    prof = builtin_profile("h2") if profile is None else profile
    x = np.arange(-8.0, 8.0 + step / 2, step)
    spec = SourceSpec({0: SourceTerm((PointSource(source, 3 + 0j),)),
                       1: SourceTerm((PointSource(source, 2 + 0j),)),
                       2: SourceTerm((PointSource(source, 1 + 0j),))},
                      SourceTerm((PointSource(source, 1 + 0j),)), SourceTerm())
    full = synthesize_surface(prof, k, spec, x)
    res_only = synthesize_surface(prof, k, spec, x, modes=[mode])
    h_ref = 0.5 * (prof.h_min + prof.h_max)
    prop = [math.sqrt(k * k - (n * math.pi / h_ref) ** 2) for n in range(mode)]
    filt = filter_resonant_component(full, prop)
    m = (x >= region[0]) & (x <= region[1])
    ref = np.linalg.norm(res_only.values[m])
    return {
        "before": float(np.linalg.norm(full.values[m] - res_only.values[m]) / ref),
        "after": float(np.linalg.norm(filt.values[m] - res_only.values[m]) / ref),
        "wavenumbers": prop,
    }


# --------------------------------------------------------------------------
# bench


def run_bench(out_dir: str | Path, profiles: Sequence[str] = tuple(PROFILE_SETUPS),
              noise_levels: Sequence[float] = (0.05, 0.1, 0.3, 0.5, 1.0), seeds: int = 32) -> dict:
    """Reconstruct every profile and run the noise study.

    Writes summary.md, summary.csv, noise.csv and timings.csv plus one JSON
    result and one plot CSV per profile.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in profiles:
        t0 = time.perf_counter()
        try:
            res = run_profile(name)
            err = res.metrics["relative_linf"]
            bound = ERROR_BOUNDS[name]
            rows.append({"profile": name, "relative_linf": err, "reference": REFERENCE_ERRORS[name],
                         "bound": bound, "ok": err <= bound, "points": len(res.points),
                         "dropped": len(res.dropped), "error": "",
                         "seconds": round(time.perf_counter() - t0, 1)})
            (out_dir / f"{name}.json").write_text(res.to_json())
            res.write_plot_csv(out_dir / f"{name}_plot.csv", builtin_profile(name))
        except Exception as exc:  # the suite records failures and moves on
            rows.append({"profile": name, "relative_linf": math.nan, "reference": REFERENCE_ERRORS[name],
                         "bound": math.nan, "ok": False, "points": 0, "dropped": 0,
                         "error": f"{type(exc).__name__}: {exc}",
                         "seconds": round(time.perf_counter() - t0, 1)})
    noise = noise_study(noise_levels, seeds) if noise_levels else None

    # wall-clock times go to their own file so the summary is reproducible
    (out_dir / "timings.csv").write_text("profile,seconds\n" + "".join(
        f"{row['profile']},{row['seconds']}\n" for row in rows))
    fields = ["profile", "relative_linf", "reference", "bound", "ok", "points", "dropped", "error"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (f"{row[k]:.6g}" if isinstance(row[k], float) else row[k]) for k in fields})
    (out_dir / "summary.csv").write_text(buf.getvalue())

    lines = ["# Benchmark summary", "",
             "| profile | relative L-inf error | reference | bound | ok | points | dropped |",
             "|---|---|---|---|---|---|---|"]
    for row in rows:
        lines.append(f"| {row['profile']} | {100 * row['relative_linf']:.3f}% | "
                     f"{100 * row['reference']:.2f}% | {100 * row['bound']:.0f}% | "
                     f"{'yes' if row['ok'] else 'no'} | {row['points']} | {row['dropped']} |")
    if noise is not None:
        lines += ["", f"## Median error on x* ({seeds} seeds)",
                  "", "| noise | LS t3 | LS t2 | LS t1 | direct |", "|---|---|---|---|---|"]
        nbuf = io.StringIO()
        nbuf.write("noise,ls_t3,ls_t2,ls_t1,direct\n")
        for i, amp in enumerate(noise["levels"]):
            vals = [noise[m]["lambda"][i] for m in ("t3", "t2", "t1", "direct")]
            lines.append(f"| {amp:g} | " + " | ".join(f"{v:.4g}" for v in vals) + " |")
            nbuf.write(f"{amp!r}," + ",".join(repr(v) for v in vals) + "\n")
        (out_dir / "noise.csv").write_text(nbuf.getvalue())
    (out_dir / "summary.md").write_text("\n".join(lines) + "\n")
    return {"rows": rows, "noise": noise}


# --------------------------------------------------------------------------
# calibration


def run_calibration(profile: Profile, k_scan: Sequence[float], positions: Sequence[float],
                    sources: tuple[float, float] = (-5.0, 5.0), mode: int = 1, eps: float = 1e-8,
                    step: float = 0.02, extent: float = 8.0) -> dict:
    """Bounds from a frequency scan, refined peaks, then the support sweeps.

    The traces come from a unit point source on the top wall. The sweeps
    run at the refined forbidden frequencies shifted by a relative ``eps``.
    """
    x = np.arange(-extent, extent + step / 2, step)
    ks = np.asarray(k_scan, dtype=float)

    def generator(k, s):
        spec = SourceSpec.from_dict({"top": [[s, 1.0, 0.0]]})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return synthesize_surface(profile, k, spec, x)

    left, right = sources
    bounds = calibrate_bounds(generator, ks, left, right, mode)
    scan_step = float(ks[1] - ks[0]) if ks.size > 1 else 0.01 * float(ks[0])
    k_left = refine_peak(generator, left, bounds["left_k_peak"], scan_step)
    k_right = refine_peak(generator, right, bounds["right_k_peak"], scan_step)
    support = calibrate_support(generator, max(k_left, k_right) * (1 + eps),
                                min(k_left, k_right) * (1 - eps), positions)
    summary = {"h_min": bounds["h_min"], "h_max": bounds["h_max"],
               "h_min_refined": mode * math.pi / max(k_left, k_right),
               "h_max_refined": mode * math.pi / min(k_left, k_right), "support": support["support"],
               "k_peaks": [bounds["left_k_peak"], bounds["right_k_peak"]],
               "scan_step": scan_step}
    return {"summary": summary, "bounds": bounds, "support": support}
