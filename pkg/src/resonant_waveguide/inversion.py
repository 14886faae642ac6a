"""Width reconstruction from multi-frequency surface traces."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .fitting import FitBox, fit_least_squares
from .forward import SurfaceTrace
from .waveguide import Profile

__all__ = [
    "FrequencyPlan",
    "Branch",
    "default_branches",
    "ReconstructionResult",
    "CalibrationError",
    "ReconstructionError",
    "TraceGenerator",
    "parse_grid",
    "calibrate_bounds",
    "calibrate_support",
    "refine_peak",
    "filter_resonant_component",
    "select_window",
    "reconstruct_profile",
    "error_metrics",
]

log = logging.getLogger(__name__)

PEAK_FACTOR = 5.0
FILTER_FRACTION = 0.15
SOURCE_GUARD = 0.5


class CalibrationError(RuntimeError):
    pass


class ReconstructionError(RuntimeError):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``"a:b:l"`` means l uniformly spaced values from a to b inclusive."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise ValueError(f"grid {text!r} is not of the form a:b:l") from exc
    if n < 1 or (n > 1 and not b > a):
        raise ValueError(f"grid {text!r}: need l >= 1 and b > a")
    return np.linspace(a, b, n)


@dataclass(frozen=True)
class FrequencyPlan:
    mode: int
    k_min: float
    k_max: float
    frequencies: tuple[float, ...]

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if self.mode < 1:
            raise ValueError("the resonant mode must be >= 1")
        if f.size == 0 or np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if not (self.k_min < f.min() and f.max() < self.k_max):
            raise ValueError(f"frequencies must lie in ({self.k_min}, {self.k_max})")

    @classmethod
    def from_bounds(cls, mode: int, h_min: float, h_max: float, grid: str | Sequence[float]) -> "FrequencyPlan":
        ks = parse_grid(grid) if isinstance(grid, str) else np.asarray(grid, dtype=float)
        return cls(mode, mode * math.pi / h_max, mode * math.pi / h_min, tuple(float(k) for k in ks))

    @property
    def h_min(self) -> float:
        return self.mode * math.pi / self.k_max

    @property
    def h_max(self) -> float:
        return self.mode * math.pi / self.k_min

    def width(self, k: float) -> float:
        return self.mode * math.pi / k


# --------------------------------------------------------------------------
# calibration

TraceGenerator = Callable[[float, float], SurfaceTrace]


def _norm_l2(trace: SurfaceTrace, lo: float = -8.0, hi: float = 8.0) -> float:
    m = (trace.abscissae >= lo) & (trace.abscissae <= hi)
    return float(math.sqrt(np.trapezoid(np.abs(trace.values[m]) ** 2, trace.abscissae[m])))


def _peaks(values: np.ndarray, factor: float = PEAK_FACTOR) -> list[tuple[int, float]]:
    """Local maxima exceeding ``factor`` times the median of the values before them.

    Above an explosion the resonant regime raises the norm for the rest of
    the scan, so the background is taken from the lower frequencies only.
    """
    out = []
    for i in range(3, values.size):
        left = values[i - 1]
        right = values[i + 1] if i < values.size - 1 else -np.inf
        background = float(np.median(values[:i]))
        ratio = values[i] / background if background > 0 else np.inf
        if values[i] >= left and values[i] >= right and ratio > factor:
            out.append((i, ratio))
    return out


def calibrate_bounds(generator: TraceGenerator, k_scan: Sequence[float], source_left: float,
                     source_right: float, mode: int = 1, factor: float = PEAK_FACTOR) -> dict:
    """Widths at both ends from the explosion of the trace norm.

    ``generator(k, s)`` returns the surface trace for a point source at s.
    A source sitting in a region of constant width w explodes at
    k = mode*pi/w; the strongest such peak of each scan gives that width.
    """
    ks = np.asarray(k_scan, dtype=float)
    out = {"k_scan": ks.tolist()}
    for label, s in (("left", source_left), ("right", source_right)):
        norms = np.array([_norm_l2(generator(float(k), s)) for k in ks])
        peaks = _peaks(norms, factor)
        if not peaks:
            raise CalibrationError(f"no explosion peak for the {label} source at {s}")
        j = max(peaks, key=lambda p: p[1])[0]
        out[f"{label}_norms"] = norms.tolist()
        out[f"{label}_k_peak"] = float(ks[j])
        out[f"{label}_width"] = mode * math.pi / float(ks[j])
    out["h_min"] = min(out["left_width"], out["right_width"])
    out["h_max"] = max(out["left_width"], out["right_width"])
    return out


def refine_peak(generator: TraceGenerator, source: float, k_peak: float, step: float,
                xtol: float = 1e-10) -> float:
    """Locate the explosion near ``k_peak`` to ``xtol`` by a bounded scalar search.

    The norm blows up at the forbidden frequency itself, where the generator
    refuses to run; that case counts as an infinite norm.
    """
    from scipy.optimize import minimize_scalar

    def neg_norm(k):
        try:
            return -_norm_l2(generator(float(k), source))
        except ValueError:
            return -np.inf

    res = minimize_scalar(neg_norm, bounds=(k_peak - step, k_peak + step), method="bounded",
                          options={"xatol": xtol * k_peak})
    return float(res.x)


def calibrate_support(generator: TraceGenerator, k_thin: float, k_thick: float,
                      source_positions: Sequence[float], factor: float = PEAK_FACTOR) -> dict:
    """Support of h' from two source sweeps close to the forbidden frequencies.

    ``k_thin`` sits just above mode*pi/h_min, where the mode propagates
    everywhere and only sources in the thin plateau explode. ``k_thick`` sits
    just below mode*pi/h_max, where it is evanescent everywhere and only
    sources in the thick plateau explode. Each support end is the last
    exploding position of its sweep.
    """
    pos = np.asarray(source_positions, dtype=float)
    result = {"positions": pos.tolist()}
    ends = {}
    for label, k in (("thin", k_thin), ("thick", k_thick)):
        norms = np.array([_norm_l2(generator(k, float(s))) for s in pos])
        # near cutoff the norm also climbs inside the support, so a position
        # counts as exploding only above half the sweep maximum as well
        hot = norms > max(factor * float(np.median(norms)), 0.5 * float(norms.max()))
        result[f"{label}_norms"] = norms.tolist()
        if not np.any(hot) or np.all(hot):
            raise CalibrationError(f"{label} sweep shows no localized explosion; support not detected")
        idx = np.nonzero(hot)[0]
        if idx[0] == 0:
            # explosion on the left: the end is the last hot position of the leading run
            run_end = idx[np.nonzero(np.diff(idx) > 1)[0][0]] if np.any(np.diff(idx) > 1) else idx[-1]
            ends[label] = ("left", float(pos[run_end]))
        else:
            ends[label] = ("right", float(pos[idx[0]]))
    if ends["thin"][0] == ends["thick"][0]:
        raise CalibrationError("both sweeps explode on the same side")
    lo = ends["thin"][1] if ends["thin"][0] == "left" else ends["thick"][1]
    hi = ends["thick"][1] if ends["thick"][0] == "right" else ends["thin"][1]
    result.update(support=[lo, hi], thin_side=ends["thin"][0])
    return result


# --------------------------------------------------------------------------
# filtering and windowing


def _uniform_step(x: np.ndarray) -> float:
    dx = np.diff(x)
    if dx.size == 0 or np.max(np.abs(dx - dx.mean())) > 1e-9 * max(1.0, abs(dx.mean())):
        raise ValueError("trace must be uniformly sampled; resample first")
    return float(dx.mean())


def filter_resonant_component(trace: SurfaceTrace, propagative_wavenumbers: Sequence[float],
                              half_widths: Sequence[float] | None = None,
                              fraction: float = FILTER_FRACTION) -> SurfaceTrace:
    """Band-stop the spatial frequencies +-k_n of the propagative modes.

    Each band has half-width ``fraction * k_n`` unless ``half_widths`` is given.
    """
    if len(propagative_wavenumbers) == 0:
        return trace
    dx = _uniform_step(trace.abscissae)
    spec = np.fft.fft(trace.values)
    freq = 2 * math.pi * np.fft.fftfreq(trace.values.size, d=dx)
    if half_widths is None:
        half_widths = [fraction * kn for kn in propagative_wavenumbers]
    keep = np.ones(freq.size, dtype=bool)
    for kn, w in zip(propagative_wavenumbers, half_widths):
        keep &= np.abs(np.abs(freq) - kn) > w
    out = np.fft.ifft(np.where(keep, spec, 0))
    return SurfaceTrace(trace.abscissae.copy(), out, trace.k,
                        dict(trace.meta, filtered=[float(k) for k in propagative_wavenumbers]))


def select_window(trace: SurfaceTrace, r: float = 0.2, eta: float = 8e-4,
                  radius: float | None = None, search: tuple[float, float] | None = None) -> SurfaceTrace:
    """Sub-trace of radius R = r*eta**(-1/3) around the peak of |d|.

    ``search`` restricts where the peak is looked for.
    """
    x, d = trace.abscissae, trace.values
    big_r = r * eta ** (-1.0 / 3.0) if radius is None else radius
    mask = np.ones(x.size, dtype=bool) if search is None else (x >= search[0]) & (x <= search[1])
    if not np.any(mask):
        raise ValueError("empty search interval")
    idx = np.nonzero(mask)[0]
    i = idx[int(np.argmax(np.abs(d[mask])))]
    x_max = float(x[i])
    lo, hi = x_max - big_r, x_max + big_r
    meta = dict(trace.meta, x_max=x_max, radius=big_r)
    if lo < x[0] or hi > x[-1]:
        meta["truncated"] = True
    sel = (x >= lo) & (x <= hi)
    return SurfaceTrace(x[sel], d[sel], trace.k, meta)


# --------------------------------------------------------------------------
# reconstruction


@dataclass(frozen=True)
class Branch:
    """A source and the direction in which its resonant wave is looked for."""

    source: float
    direction: int  # -1: left of the source, +1: right of it

    @property
    def increasing(self) -> bool:
        # the wave oscillates on the source side, where the guide is wider
        return self.direction < 0


def default_branches(sources: Sequence[float], support: tuple[float, float]) -> list[Branch]:
    """Every direction from every source that points toward the support."""
    out = []
    a, b = support
    for s in sorted(sources):
        if s > a:
            out.append(Branch(s, -1))
        if s < b:
            out.append(Branch(s, +1))
    return out


def _moving_max(v: np.ndarray, half: int) -> np.ndarray:
    from scipy.ndimage import maximum_filter1d
    return maximum_filter1d(v, size=2 * half + 1, mode="nearest")


def _search_intervals(trace: SurfaceTrace, branches: Sequence[Branch]) -> dict:
    """Interval of the trace assigned to each branch.

    Between two facing sources the interval is split at the minimum of the
    local envelope of |d| over the central half of the gap.
    """
    x = trace.abscissae
    env = _moving_max(np.abs(trace.values), max(1, int(round(0.3 / (x[1] - x[0])))))
    sources = sorted({br.source for br in branches})
    out = {}
    for br in branches:
        s = br.source
        if br.direction < 0:
            others = [t for t in sources if t < s]
            far = others[-1] if others else x[0]
            lo, hi = far, s - SOURCE_GUARD
        else:
            others = [t for t in sources if t > s]
            far = others[0] if others else x[-1]
            lo, hi = s + SOURCE_GUARD, far
        if others:
            a, b = (far, s) if br.direction < 0 else (s, far)
            gap = b - a
            m = (x >= a + 0.25 * gap) & (x <= b - 0.25 * gap)
            split = float(x[m][int(np.argmin(env[m]))]) if np.any(m) else 0.5 * (a + b)
            if br.direction < 0:
                lo = split
            else:
                hi = split
        out[br] = (lo, hi)
    return out


@dataclass
class ReconstructionResult:
    plan: FrequencyPlan
    points: list  # (x_star, width, k, branch index)
    anchors: tuple
    reports: dict = field(default_factory=dict)
    dropped: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    @property
    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        pts = sorted([(p[0], p[1]) for p in self.points] + list(self.anchors))
        x = np.array([p[0] for p in pts])
        h = np.array([p[1] for p in pts])
        return x, h

    def h_app(self, x):
        bx, bh = self.breakpoints
        return np.interp(np.asarray(x, dtype=float), bx, bh)

    def to_json(self) -> str:
        bx, bh = self.breakpoints
        return json.dumps({
            "mode": self.plan.mode,
            "k_min": self.plan.k_min,
            "k_max": self.plan.k_max,
            "points": [{"x_star": p[0], "width": p[1], "k": p[2], "branch": p[3]} for p in self.points],
            "anchors": [list(a) for a in self.anchors],
            "breakpoints": [[float(a), float(b)] for a, b in zip(bx, bh)],
            "fits": {str(k): json.loads(r.to_json()) for k, r in self.reports.items()},
            "dropped": {str(k): v for k, v in self.dropped.items()},
            "metrics": self.metrics,
        }, indent=2)

    def write_plot_csv(self, path: str | Path, truth: Profile | None = None, n: int = 2001) -> None:
        bx, _ = self.breakpoints
        x = np.linspace(bx[0], bx[-1], n)
        ha = self.h_app(x)
        ht = truth.h(x) if truth is not None else np.full(n, np.nan)
        with Path(path).open("w") as fh:
            fh.write("x,h_true,h_app\n")
            for a, b, c in zip(x, ht, ha):
                fh.write(f"{a!r},{b!r},{c!r}\n")


def reconstruct_profile(plan: FrequencyPlan, traces: dict, support: tuple[float, float],
                        sources: Sequence[float], r: float = 0.2, eta: float = 8e-4,
                        radius: float | None = None, end_widths: tuple[float, float] | None = None,
                        branches: Sequence[Branch] | None = None, box: FitBox | None = None,
                        max_relative_residual: float = 0.5, truth: Profile | None = None,
                        filter_fraction: float = FILTER_FRACTION) -> ReconstructionResult:
    """Piecewise-linear width through the fitted resonant points.

    For each frequency: remove the propagative modes n < N, cut a window
    around the resonant peak of each branch, fit the Airy model, and keep
    x* = beta/alpha (mirrored for branches seen from the left). The ends of
    the support carry the widths ``end_widths``; by default the thin end
    gets N*pi/k_max and the thick end N*pi/k_min.
    """
    n_res = plan.mode
    h_ref = 0.5 * (plan.h_min + plan.h_max)
    branches = list(branches) if branches is not None else default_branches(sources, support)
    points, reports, dropped = [], {}, {}
    for k in plan.frequencies:
        trace = traces.get(k)
        if trace is None:
            dropped[k] = "missing trace"
            continue
        prop = [math.sqrt(k * k - (n * math.pi / h_ref) ** 2) for n in range(n_res)
                if k > n * math.pi / h_ref]
        clean = filter_resonant_component(trace, prop, fraction=filter_fraction)
        intervals = _search_intervals(clean, branches)
        for bi, br in enumerate(branches):
            lo, hi = intervals[br]
            key = (k, bi)
            try:
                x_star, rep = _fit_branch(clean, br, lo, hi, r, eta, radius, box, max_relative_residual)
            except (ValueError, ArithmeticError, ReconstructionError) as exc:
                dropped[key] = str(exc)
                log.info("k=%.6g branch %d dropped: %s", k, bi, exc)
                continue
            points.append((x_star, plan.width(k), float(k), bi))
            reports[key] = rep
    points = _monotone_filter(points, branches, dropped)
    if len(points) < 3:
        raise ReconstructionError(f"only {len(points)} usable frequencies")

    points.sort(key=lambda p: p[0])
    a, b = support
    if end_widths is None:
        left_inc = branches[min(range(len(branches)), key=lambda i: min(
            (p[0] for p in points if p[3] == i), default=np.inf))].increasing
        right_inc = branches[max(range(len(branches)), key=lambda i: max(
            (p[0] for p in points if p[3] == i), default=-np.inf))].increasing
        end_widths = (plan.h_min if left_inc else plan.h_max, plan.h_max if right_inc else plan.h_min)
    anchors = ((float(a), float(end_widths[0])), (float(b), float(end_widths[1])))
    points = [p for p in points if a < p[0] < b] or points
    result = ReconstructionResult(plan, points, anchors, reports, dropped)
    if truth is not None:
        result.metrics = error_metrics(result, truth)
    return result


def _longest_monotone(values: Sequence[float]) -> list[int]:
    """Indices of a longest strictly increasing subsequence."""
    best_len = [1] * len(values)
    prev = [-1] * len(values)
    for i in range(len(values)):
        for j in range(i):
            if values[j] < values[i] and best_len[j] + 1 > best_len[i]:
                best_len[i], prev[i] = best_len[j] + 1, j
    if not values:
        return []
    i = int(np.argmax(best_len))
    out = []
    while i >= 0:
        out.append(i)
        i = prev[i]
    return out[::-1]


def _monotone_filter(points, branches, dropped):
    """Drop fits that break the ordering of x* along each branch.

    Widths decrease with k, so x* moves toward the thin side as k grows:
    leftward on a branch where the guide widens toward the source.
    """
    kept = []
    for bi, br in enumerate(branches):
        pts = sorted((p for p in points if p[3] == bi), key=lambda p: p[2])
        sign = -1.0 if br.increasing else 1.0
        keep = set(_longest_monotone([sign * p[0] for p in pts]))
        for i, p in enumerate(pts):
            if i in keep:
                kept.append(p)
            else:
                dropped[(p[2], bi)] = f"x* = {p[0]:.3f} breaks the monotone order of its branch"
    return kept


def _fit_branch(trace, br: Branch, lo, hi, r, eta, radius, box, max_rel):
    x = trace.abscissae
    sel = (x >= lo) & (x <= hi)
    if sel.sum() < 10:
        raise ReconstructionError("search interval too short")
    piece = SurfaceTrace(x[sel], trace.values[sel], trace.k)
    # a decaying trace peaks at the edge of its interval: no resonance there
    i = int(np.argmax(np.abs(piece.values)))
    edge = max(2, int(0.05 / (x[1] - x[0])))
    if i < edge or i >= piece.abscissae.size - edge:
        raise ReconstructionError("no interior resonant peak")
    win = select_window(piece, r, eta, radius)
    t, d = win.abscissae, win.values
    if br.direction > 0:
        t, d = -t[::-1], d[::-1]
    rep = fit_least_squares(SurfaceTrace(t, d, trace.k), box)
    rms = math.sqrt(float(np.mean(np.abs(d) ** 2)))
    if rep.residual_l2 > max_rel * rms:
        raise ReconstructionError(f"poor Airy fit (relative residual {rep.residual_l2 / rms:.2f})")
    x_star = rep.params.x_star if br.direction < 0 else -rep.params.x_star
    if not (lo - 1.0 <= x_star <= hi + 1.0):
        raise ReconstructionError(f"x* = {x_star:.3f} far outside the search interval")
    return float(x_star), rep


def error_metrics(result: ReconstructionResult, truth: Profile, n: int = 4001) -> dict:
    bx, _ = result.breakpoints
    xs = np.array([p[0] for p in result.points])
    at_points = float(np.max(np.abs(result.h_app(xs) - truth.h(xs)))) if xs.size else 0.0
    grid = np.linspace(bx[0], bx[-1], n)
    dense = float(np.max(np.abs(result.h_app(grid) - truth.h(grid))))
    return {
        "linf_points": at_points,
        "linf_dense": dense,
        "relative_linf_points": at_points / truth.h_max,
        "relative_linf": dense / truth.h_max,
    }
