"""Command-line front end: simulate, fit, reconstruct, calibrate, bench.

A run reads an optional JSON config; flags given on the command line
override its fields. Exit codes: 0 success, 2 invalid input, 3 numerical
failure, 4 file error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import benchmarks
from .fitting import FitBox, InsufficientWindowError, InvalidFitError, fit_least_squares
from .forward import SourceSpec, SurfaceTrace, add_noise, default_n_max, benchmark_point_source, synthesize_surface
from .inversion import CalibrationError, FrequencyPlan, ReconstructionError, parse_grid, reconstruct_profile
from .waveguide import ForbiddenFrequencyError, Profile, builtin_profile, profile_from_json

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("resonant_waveguide")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# config helpers


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}", EXIT_IO) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}", EXIT_VALIDATION) from exc
    if not isinstance(data, dict):
        raise CliError("config must be a JSON object", EXIT_VALIDATION)
    return data


def _merged(args: argparse.Namespace, keys) -> dict:
    """Config fields overridden by the flags that were actually given."""
    cfg = _load_config(getattr(args, "config", None))
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _profile(value) -> Profile:
    if value is None:
        raise CliError("a profile is required (--profile h1..h7 or a JSON file)", EXIT_VALIDATION)
    if isinstance(value, dict):
        try:
            return profile_from_json(value)
        except (ValueError, KeyError) as exc:
            raise CliError(f"bad profile description: {exc}", EXIT_VALIDATION) from exc
    if isinstance(value, str) and value in {f"h{i}" for i in range(1, 8)}:
        return builtin_profile(value)
    path = Path(str(value))
    if not path.exists():
        raise CliError(f"profile {value!r} is neither h1..h7 nor an existing file", EXIT_IO)
    try:
        return profile_from_json(path.read_text())
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(f"bad profile file {path}: {exc}", EXIT_VALIDATION) from exc


def _frequencies(value) -> np.ndarray:
    if value is None:
        raise CliError("frequencies are required (--freqs a:b:l)", EXIT_VALIDATION)
    try:
        ks = parse_grid(value) if isinstance(value, str) else np.asarray(value, dtype=float)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    if ks.size == 0 or np.any(ks <= 0) or not np.all(np.isfinite(ks)):
        raise CliError("frequencies must be positive and finite", EXIT_VALIDATION)
    return ks


def _floats(value, name: str) -> list[float]:
    if value is None:
        return []
    try:
        if isinstance(value, str):
            return [float(v) for v in value.split(",") if v.strip()]
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise CliError(f"{name}: expected comma-separated numbers", EXIT_VALIDATION) from exc


def _noise(cfg: dict) -> tuple[float, int]:
    amp = float(cfg.get("noise", 0.0))
    seed = int(cfg.get("seed", 0))
    if amp < 0 or not math.isfinite(amp):
        raise CliError("noise must be a non-negative number", EXIT_VALIDATION)
    return amp, seed


def _box(cfg: dict) -> FitBox:
    try:
        return FitBox(**cfg.get("box", {}))
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad fit box: {exc}", EXIT_VALIDATION) from exc


def _out_dir(cfg: dict, default: str) -> Path:
    out = Path(cfg.get("out", default))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc}", EXIT_IO) from exc
    return out


def _trace_name(k: float) -> str:
    return f"trace_k{k:.6f}.csv"


def _synthesize(profile: Profile, ks, cfg: dict, x: np.ndarray) -> dict:
    sources = _floats(cfg.get("sources", [6.0]), "sources")
    amp, seed = _noise(cfg)
    spec_dict = cfg.get("source_spec")
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i, k in enumerate(ks):
            k = float(k)
            spec = (SourceSpec.from_dict(spec_dict) if spec_dict is not None
                    else benchmark_point_source(profile, sources, default_n_max(k, profile)))
            try:
                tr = synthesize_surface(profile, k, spec, x)
            except ForbiddenFrequencyError as exc:
                raise CliError(f"k = {k}: forbidden frequency, delta(k) = {exc.delta:.3e}",
                               EXIT_VALIDATION) from exc
            out[k] = add_noise(tr, amp, seed + i) if amp > 0 else tr
    return out


def _abscissae(cfg: dict) -> np.ndarray:
    step = float(cfg.get("step", 0.01))
    extent = float(cfg.get("extent", 8.0))
    if not (step > 0 and extent > 0):
        raise CliError("step and extent must be positive", EXIT_VALIDATION)
    return np.arange(-extent, extent + step / 2, step)


# --------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    cfg = _merged(args, ["profile", "freqs", "sources", "noise", "seed", "out", "step", "extent"])
    profile = _profile(cfg.get("profile"))
    ks = _frequencies(cfg.get("freqs"))
    out = _out_dir(cfg, "traces")
    traces = _synthesize(profile, ks, cfg, _abscissae(cfg))
    try:
        for k, tr in traces.items():
            tr.to_csv(out / _trace_name(k))
    except OSError as exc:
        raise CliError(f"cannot write traces: {exc}", EXIT_IO) from exc
    print(f"wrote {len(traces)} traces to {out}")
    return EXIT_OK


def _read_trace(path: Path, k: float | None = None) -> SurfaceTrace:
    if not path.exists():
        raise CliError(f"trace file {path} not found", EXIT_IO)
    try:
        return SurfaceTrace.from_csv(path, k)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read trace {path}: {exc}", EXIT_IO) from exc


def cmd_fit(args) -> int:
    cfg = _merged(args, ["trace", "out", "k"])
    if cfg.get("trace") is None:
        raise CliError("a trace file is required", EXIT_VALIDATION)
    trace = _read_trace(Path(cfg["trace"]), None if cfg.get("k") is None else float(cfg["k"]))
    if trace.abscissae.size < 10:
        raise CliError("a fit needs at least 10 samples", EXIT_VALIDATION)
    try:
        rep = fit_least_squares(trace, _box(cfg))
    except (InsufficientWindowError, InvalidFitError, ArithmeticError, ValueError) as exc:
        raise CliError(f"fit failed: {exc}", EXIT_NUMERIC) from exc
    out = Path(cfg.get("out") or Path(cfg["trace"]).with_suffix(".fit.json"))
    try:
        out.write_text(rep.to_json())
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc
    print(f"{rep.params.x_star!r}")
    if not rep.converged:
        print("fit did not converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    cfg = _merged(args, ["profile", "freqs", "sources", "noise", "seed", "out", "traces",
                         "support", "end_widths", "mode", "step", "extent", "r"])
    truth = None
    ks = _frequencies(cfg.get("freqs"))
    sources = _floats(cfg.get("sources", [6.0]), "sources")
    mode = int(cfg.get("mode", 1))
    if cfg.get("profile") is not None:
        truth = _profile(cfg["profile"])
    if cfg.get("traces") is not None:
        folder = Path(cfg["traces"])
        if not folder.is_dir():
            raise CliError(f"trace directory {folder} not found", EXIT_IO)
        traces = {float(k): _read_trace(folder / _trace_name(float(k)), float(k)) for k in ks}
    elif truth is not None:
        traces = _synthesize(truth, ks, cfg, _abscissae(cfg))
    else:
        raise CliError("give either --traces DIR or a profile to simulate", EXIT_VALIDATION)

    if "h_bounds" in cfg:
        h_min, h_max = _floats(cfg["h_bounds"], "h_bounds")
    elif truth is not None:
        h_min, h_max = truth.h_min, truth.h_max
    else:
        raise CliError("h_bounds (from calibration) are required without a profile", EXIT_VALIDATION)
    if cfg.get("support") is not None:
        support = tuple(_floats(cfg["support"], "support"))
    elif truth is not None:
        support = truth.support
    else:
        raise CliError("support (from calibration) is required without a profile", EXIT_VALIDATION)
    if len(support) != 2 or not support[0] < support[1]:
        raise CliError("support must be two increasing numbers", EXIT_VALIDATION)
    end_widths = tuple(_floats(cfg["end_widths"], "end_widths")) if cfg.get("end_widths") else None
    try:
        plan = FrequencyPlan.from_bounds(mode, h_min, h_max, ks)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    eta = float(cfg.get("eta", truth.eta if truth is not None else 8e-4))
    out = _out_dir(cfg, "reconstruction")
    try:
        res = reconstruct_profile(plan, traces, support, sources, r=float(cfg.get("r", 0.2)), eta=eta,
                                  end_widths=end_widths, truth=truth, box=_box(cfg))
    except ReconstructionError as exc:
        (out / "failure.json").write_text(json.dumps({"error": str(exc)}, indent=2))
        raise CliError(f"reconstruction failed: {exc}", EXIT_NUMERIC) from exc
    try:
        (out / "result.json").write_text(res.to_json())
        res.write_plot_csv(out / "plot.csv", truth)
    except OSError as exc:
        raise CliError(f"cannot write results: {exc}", EXIT_IO) from exc
    print(f"{len(res.points)} resonant points, {len(res.dropped)} dropped fits")
    if truth is not None:
        print(f"relative L-inf error: {100 * res.metrics['relative_linf']:.3f}%")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _merged(args, ["profile", "scan", "positions", "out", "step", "extent"])
    profile = _profile(cfg.get("profile"))
    ks = _frequencies(cfg.get("scan", "30:33:30"))
    try:
        positions = parse_grid(cfg.get("positions", "-7:7:57"))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    sources = _floats(cfg.get("calibration_sources", [-5.0, 5.0]), "calibration_sources")
    if len(sources) != 2:
        raise CliError("calibration_sources needs two positions", EXIT_VALIDATION)
    step = float(cfg.get("step", 0.02))
    extent = float(cfg.get("extent", 8.0))
    if not (step > 0 and extent > 0):
        raise CliError("step and extent must be positive", EXIT_VALIDATION)
    try:
        result = benchmarks.run_calibration(profile, ks, positions, tuple(sources), int(cfg.get("mode", 1)),
                                            float(cfg.get("eps", 1e-8)), step, extent)
    except (CalibrationError, ForbiddenFrequencyError) as exc:
        raise CliError(f"calibration failed: {exc}", EXIT_NUMERIC) from exc
    out = _out_dir(cfg, "calibration")
    summary = result["summary"]
    (out / "calibration.json").write_text(json.dumps(result, indent=2))
    print(json.dumps(summary))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _merged(args, ["out", "seeds", "profiles", "noise_levels"])
    out = _out_dir(cfg, "bench")
    profiles = cfg.get("profiles", list(benchmarks.PROFILE_SETUPS))
    if isinstance(profiles, str):
        profiles = [p.strip() for p in profiles.split(",") if p.strip()]
    unknown = set(profiles) - set(benchmarks.PROFILE_SETUPS)
    if unknown:
        raise CliError(f"unknown profiles {sorted(unknown)}", EXIT_VALIDATION)
    levels = _floats(cfg.get("noise_levels", [0.05, 0.1, 0.3, 0.5, 1.0]), "noise_levels")
    benchmarks.run_bench(out, profiles, levels, int(cfg.get("seeds", 32)))
    print((out / "summary.md").read_text(), end="")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resonant-waveguide", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-frequency decisions")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *names):
        p.add_argument("--config", help="JSON file with the run parameters")
        p.add_argument("--out", help="output directory (file for fit)")
        if "profile" in names:
            p.add_argument("--profile", help="h1..h7 or a profile JSON file")
        if "freqs" in names:
            p.add_argument("--freqs", help="frequency grid a:b:l (l values from a to b)")
        if "noise" in names:
            p.add_argument("--noise", type=float, help="relative noise amplitude")
            p.add_argument("--seed", type=int, help="noise seed")
        if "sources" in names:
            p.add_argument("--sources", help="comma-separated point-source positions")
        if "grid" in names:
            p.add_argument("--step", type=float, help="sampling step of the traces")
            p.add_argument("--extent", type=float, help="traces cover [-extent, extent]")

    p = sub.add_parser("simulate", help="write surface traces for a profile and frequency grid")
    common(p, "profile", "freqs", "noise", "sources", "grid")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit the Airy model to one trace and print beta/alpha")
    p.add_argument("trace", nargs="?", help="trace CSV with header x,re,im")
    p.add_argument("--k", type=float, help="frequency, when the trace has no sidecar")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reconstruct", help="recover the width profile from traces")
    common(p, "profile", "freqs", "noise", "sources", "grid")
    p.add_argument("--traces", help="directory written by simulate")
    p.add_argument("--support", help="support ends a,b")
    p.add_argument("--end-widths", dest="end_widths", help="widths at the support ends")
    p.add_argument("--r", type=float, help="window factor r in R = r*eta^(-1/3)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("calibrate", help="estimate h_min, h_max and the support by sweeps")
    common(p, "profile", "grid")
    p.add_argument("--scan", help="frequency scan a:b:l")
    p.add_argument("--positions", help="source positions a:b:l for the support sweep")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bench", help="run all profiles and the noise study")
    common(p)
    p.add_argument("--seeds", type=int, help="seeds per noise level")
    p.add_argument("--profiles", help="comma-separated subset of h1..h7")
    p.add_argument("--noise-levels", dest="noise_levels", help="comma-separated noise levels")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
