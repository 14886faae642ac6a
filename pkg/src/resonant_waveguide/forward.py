"""Approximate wavefield synthesis from modal Green kernels, and a 1D PML oracle."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .special import airy, integrate
from .waveguide import (
    ModeContext,
    Profile,
    classify_mode,
    delta_margin,
    local_wavenumber,
    transverse_trace,
)

__all__ = [
    "PointSource",
    "SourceTerm",
    "SourceSpec",
    "ReducedSource",
    "SurfaceTrace",
    "SingularKernelError",
    "reduced_source",
    "xi_map",
    "airy_prefactor",
    "green_kernel",
    "mode_trace",
    "synthesize_surface",
    "default_n_max",
    "mode_ode_oracle",
    "add_noise",
    "taylor_parameters",
    "benchmark_point_source",
]

PML_START = 8.0
PML_END = 15.0


class SingularKernelError(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class PointSource:
    location: float
    weight: complex


@dataclass(frozen=True)
class SourceTerm:
    """Dirac terms plus an optional density with declared compact support."""

    points: tuple[PointSource, ...] = ()
    density: Callable[[np.ndarray], np.ndarray] | None = None
    support: tuple[float, float] | None = None

    def __post_init__(self):
        if self.density is not None and self.support is None:
            raise ValueError("a source density needs a declared compact support")

    @property
    def empty(self) -> bool:
        return not self.points and self.density is None

    def extent(self) -> tuple[float, float] | None:
        locs = [p.location for p in self.points]
        if self.support is not None:
            locs += list(self.support)
        return (min(locs), max(locs)) if locs else None


@dataclass(frozen=True)
class SourceSpec:
    """Interior modal sources ``f_n`` and boundary sources on both walls."""

    interior_modes: dict = field(default_factory=dict)
    boundary_top: SourceTerm = SourceTerm()
    boundary_bottom: SourceTerm = SourceTerm()

    def support(self) -> tuple[float, float] | None:
        ext = [t.extent() for t in list(self.interior_modes.values()) + [self.boundary_top, self.boundary_bottom]]
        ext = [e for e in ext if e is not None]
        if not ext:
            return None
        return min(e[0] for e in ext), max(e[1] for e in ext)

    def to_dict(self) -> dict:
        def term(t: SourceTerm):
            if t.density is not None:
                raise ValueError("only point sources serialize")
            return [[p.location, p.weight.real, p.weight.imag] for p in t.points]

        return {
            "interior": {str(n): term(t) for n, t in self.interior_modes.items()},
            "top": term(self.boundary_top),
            "bottom": term(self.boundary_bottom),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SourceSpec":
        def term(rows):
            return SourceTerm(tuple(PointSource(float(r[0]), complex(r[1], r[2] if len(r) > 2 else 0.0))
                                    for r in rows or []))

        return cls({int(n): term(v) for n, v in d.get("interior", {}).items()},
                   term(d.get("top")), term(d.get("bottom")))


def _y_moment(n: int, h: float) -> float:
    """Projection of f(y) = y on the mode n of a section of width h."""
    if n == 0:
        return h**1.5 / 2
    return math.sqrt(2.0 / h) * (h / (n * math.pi)) ** 2 * ((-1) ** n - 1)


def benchmark_point_source(profile: Profile, locations: Sequence[float], n_max: int,
                       interior: bool = True, top: bool = True) -> SourceSpec:
    """Source ``f = y * sum delta_s`` inside and ``b_top = sum delta_s`` on the top wall."""
    interior_modes = {}
    if interior:
        for n in range(n_max + 1):
            pts = tuple(PointSource(float(s), complex(_y_moment(n, float(profile.h(np.array([s]))[0]))))
                        for s in locations)
            interior_modes[n] = SourceTerm(pts)
    top_term = SourceTerm(tuple(PointSource(float(s), 1.0 + 0j) for s in locations)) if top else SourceTerm()
    return SourceSpec(interior_modes, top_term, SourceTerm())


@dataclass(frozen=True)
class ReducedSource:
    """The 1D right-hand side ``g_n``: symbolic Dirac pairs plus a density."""

    n: int
    points: tuple[tuple[float, complex], ...]
    density: Callable[[np.ndarray], np.ndarray] | None = None
    support: tuple[float, float] | None = None

    def density_at(self, x):
        if self.density is None:
            return np.zeros(np.shape(x), dtype=complex)
        return self.density(np.asarray(x, dtype=float))


def reduced_source(spec: SourceSpec, n: int, profile: Profile) -> ReducedSource:
    h = lambda x: profile.h(np.asarray(x, dtype=float))
    hp = lambda x: profile.h_prime(np.asarray(x, dtype=float))
    top, bot = transverse_trace(n, "top"), transverse_trace(n, "bottom")
    interior = spec.interior_modes.get(n, SourceTerm())

    points = []
    for p in interior.points:
        points.append((p.location, p.weight / math.sqrt(h(p.location))))
    for p in spec.boundary_top.points:
        s = p.location
        points.append((s, top * p.weight * math.sqrt(1 + hp(s) ** 2) / math.sqrt(h(s))))
    for p in spec.boundary_bottom.points:
        points.append((p.location, bot * p.weight / math.sqrt(h(p.location))))

    parts = []
    if interior.density is not None:
        parts.append((interior.support, lambda x: interior.density(x) / np.sqrt(h(x))))
    if spec.boundary_top.density is not None:
        bt = spec.boundary_top
        parts.append((bt.support, lambda x: top * bt.density(x) * np.sqrt(1 + hp(x) ** 2) / np.sqrt(h(x))))
    if spec.boundary_bottom.density is not None:
        bb = spec.boundary_bottom
        parts.append((bb.support, lambda x: bot * bb.density(x) / np.sqrt(h(x))))
    if not parts:
        return ReducedSource(n, tuple((float(s), complex(w)) for s, w in points))

    lo = min(p[0][0] for p in parts)
    hi = max(p[0][1] for p in parts)

    def density(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for (a, b), f in parts:
            m = (x >= a) & (x <= b)
            if np.any(m):
                out[m] += f(x[m])
        return out

    return ReducedSource(n, tuple((float(s), complex(w)) for s, w in points), density, (lo, hi))


# --------------------------------------------------------------------------
# phase integrals and the Airy coordinate


def _kn2(ctx: ModeContext, x):
    return ctx.k**2 - (ctx.n * math.pi / ctx.profile.h(np.asarray(x, dtype=float))) ** 2


class _PhaseTable:
    """Cumulative integral of k_n (or |k_n|) on a fine grid, spline-interpolated."""

    def __init__(self, ctx: ModeContext, lo: float, hi: float, step: float = 1e-3):
        m = max(int(math.ceil((hi - lo) / step)), 8)
        m += m % 2
        x = np.linspace(lo, hi, m + 1)
        kn = np.abs(local_wavenumber(ctx.n, ctx.k, ctx.profile, x))
        self.lo, self.hi = lo, hi
        self.spline = CubicSpline(x, cumulative_simpson(kn, x=x, initial=0.0))
        self.kn = CubicSpline(x, kn)

    def __call__(self, x):
        return self.spline(np.asarray(x, dtype=float))


def _resonant_orientation(ctx: ModeContext, x_star: float) -> int:
    slope = float(ctx.profile.h_prime(np.array([x_star]))[0])
    if slope == 0.0:
        slope = float(ctx.profile.h(np.array([x_star + 1e-6]))[0] - ctx.profile.h(np.array([x_star - 1e-6]))[0])
    if slope == 0.0:
        raise SingularKernelError(f"multiple resonant point at {x_star}: h' vanishes")
    return 1 if slope > 0 else -1


class _XiTable:
    """xi on both sides of x*, built with the substitution t = x* + sign*u**2.

    That substitution turns the square-root zero of k_N at x* into a smooth
    integrand, so a cumulative Simpson rule stays accurate up to x*.
    """

    def __init__(self, ctx: ModeContext, x_star: float, lo: float, hi: float, n_u: int = 4001):
        self.x_star = x_star
        self.sigma = _resonant_orientation(ctx, x_star)
        self.splines = {}
        for side, length in ((-1, x_star - lo), (1, hi - x_star)):
            length = max(length, 1e-6)
            u = np.linspace(0.0, math.sqrt(length), n_u)
            t = x_star + side * u * u
            integrand = np.sqrt(np.abs(_kn2(ctx, t))) * 2 * u
            acc = cumulative_simpson(integrand, x=u, initial=0.0)
            # positive on the evanescent side, negative on the oscillatory one
            evanescent = (side == -self.sigma)
            xi = (1.5 * acc) ** (2.0 / 3.0)
            self.splines[side] = CubicSpline(u, xi if evanescent else -xi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.x_star
        u = np.sqrt(np.abs(d))
        return np.where(d < 0, self.splines[-1](u), self.splines[1](u))


def xi_map(ctx: ModeContext, x, x_star: float | None = None, method: str = "grid"):
    """Airy coordinate of the resonant mode: zero at x*, positive where evanescent.

    ``method="adaptive"`` integrates each point separately with the
    endpoint-singular adaptive rule; ``"grid"`` uses one cumulative table.
    """
    if not ctx.resonant:
        raise ValueError("xi_map needs a locally resonant mode")
    if x_star is None:
        x_star = ctx.resonant_points[0]
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if method == "grid":
        lo = min(float(xs.min()), x_star) - 1e-3
        hi = max(float(xs.max()), x_star) + 1e-3
        out = _XiTable(ctx, x_star, lo, hi)(xs)
    elif method == "adaptive":
        sigma = _resonant_orientation(ctx, x_star)
        out = np.empty_like(xs)
        f = lambda t: math.sqrt(abs(float(_kn2(ctx, t))))
        for i, xv in enumerate(xs):
            if xv == x_star:
                out[i] = 0.0
                continue
            a, b = (xv, x_star) if xv < x_star else (x_star, xv)
            val = integrate(f, a, b, singular="right" if xv < x_star else "left")
            mag = (1.5 * val) ** (2.0 / 3.0)
            evanescent = (xv < x_star) == (sigma > 0)
            out[i] = mag if evanescent else -mag
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out[0]) if scalar else out


def airy_prefactor(ctx: ModeContext, x, xi, x_star: float):
    """|xi / k_N^2|^(1/4), continued by its limit at x*."""
    x = np.asarray(x, dtype=float)
    kn2 = _kn2(ctx, x)
    h = float(ctx.profile.h(np.array([x_star]))[0])
    hp = float(ctx.profile.h_prime(np.array([x_star]))[0])
    slope = abs(2 * (ctx.n * math.pi) ** 2 * hp / h**3)
    limit = slope ** (-1.0 / 6.0)
    near = np.abs(x - x_star) < 1e-6
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.abs(np.asarray(xi) / kn2) ** 0.25
    return np.where(near, limit, val)


def taylor_parameters(ctx: ModeContext, x_star: float, weight: complex, s: float):
    """Closed-form Airy parameters (z, alpha, beta) of one resonant point source.

    Near x*, the resonant trace is z*Ai(beta - alpha*x) with
    alpha = sigma*(k_N^2)'(x*)^(1/3) and beta = alpha*x*.
    """
    h = float(ctx.profile.h(np.array([x_star]))[0])
    hp = float(ctx.profile.h_prime(np.array([x_star]))[0])
    c = 2 * (ctx.n * math.pi) ** 2 * hp / h**3
    alpha = math.copysign(abs(c) ** (1 / 3), c)
    table = _XiTable(ctx, x_star, min(s, x_star) - 1e-3, max(s, x_star) + 1e-3)
    xi_s = float(table(np.array([s]))[0])
    a_s = float(airy_prefactor(ctx, np.array([s]), np.array([xi_s]), x_star)[0])
    a_star = abs(c) ** (-1 / 6)
    ai, _, bi, _ = airy(np.array([xi_s]))
    other = complex(1j * ai[0] + bi[0])
    trace = transverse_trace(ctx.n, "bottom") / math.sqrt(h)
    z = math.pi * a_star * a_s * other * weight * trace
    return z, alpha, alpha * x_star


# --------------------------------------------------------------------------
# Green kernels


def _designated_point(points: Sequence[float], x: float, s: float) -> float:
    """The resonant point between s and x nearest to s, else the nearest one on x's side."""
    lo, hi = min(x, s), max(x, s)
    between = [p for p in points if lo <= p <= hi]
    if between:
        return min(between, key=lambda p: abs(p - s))
    side = [p for p in points if (p - s) * (x - s) > 0]
    pool = side or list(points)
    return min(pool, key=lambda p: abs(p - s))


def _kernel_nonresonant(ctx, x, s, table: _PhaseTable):
    kx = local_wavenumber(ctx.n, ctx.k, ctx.profile, x)
    ks = complex(local_wavenumber(ctx.n, ctx.k, ctx.profile, s))
    if np.any(np.abs(kx) == 0) or ks == 0:
        raise SingularKernelError("k_n vanishes in a non-resonant branch")
    phase = np.abs(table(x) - table(s))
    if ctx.classification == "propagative":
        return 1j / (2 * np.sqrt(ks.real * kx.real)) * np.exp(1j * phase)
    return 1.0 / (2 * np.sqrt(abs(ks) * np.abs(kx))) * np.exp(-phase)


def _kernel_resonant(ctx, x, s, x_star, xi_table: _XiTable):
    sigma = xi_table.sigma
    xi_x = xi_table(x)
    xi_s = float(xi_table(np.array([s]))[0])
    a_x = airy_prefactor(ctx, x, xi_x, x_star)
    a_s = float(airy_prefactor(ctx, np.array([s]), np.array([xi_s]), x_star)[0])
    ai_x, _, bi_x, _ = airy(xi_x)
    ai_s, _, bi_s, _ = airy(np.array([xi_s]))
    ai_s, bi_s = ai_s[0], bi_s[0]
    # Ai goes on the evanescent side of the pair, iAi+Bi on the other
    x_on_evanescent_side = (x < s) if sigma > 0 else (x > s)
    val = np.where(x_on_evanescent_side,
                   ai_x * (1j * ai_s + bi_s),
                   (1j * ai_x + bi_x) * ai_s)
    return math.pi * a_x * a_s * val


def green_kernel(ctx: ModeContext, x, s: float, x_star: float | None = None):
    """G_n(x, s) for the mode's branch; vectorized in x."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    lo = min(float(xs.min()), s) - 1e-2
    hi = max(float(xs.max()), s) + 1e-2
    if not ctx.resonant:
        out = _kernel_nonresonant(ctx, xs, s, _PhaseTable(ctx, lo, hi))
    else:
        out = _resonant_kernel_all(ctx, xs, s, x_star)
    return complex(out[0]) if scalar else out


def _resonant_kernel_all(ctx, xs, s, x_star=None):
    points = ctx.resonant_points
    out = np.empty(xs.shape, dtype=complex)
    if x_star is not None:
        groups = {x_star: np.ones(xs.shape, dtype=bool)}
    else:
        chosen = np.array([_designated_point(points, float(xv), s) for xv in xs])
        groups = {p: chosen == p for p in sorted(set(chosen.tolist()))}
    for p, mask in groups.items():
        sel = xs[mask]
        lo = min(float(sel.min()), s, p) - 1e-2
        hi = max(float(sel.max()), s, p) + 1e-2
        out[mask] = _kernel_resonant(ctx, sel, s, p, _XiTable(ctx, p, lo, hi))
    return out


# --------------------------------------------------------------------------
# synthesis


def default_n_max(k: float, profile: Profile) -> int:
    """Every propagative or resonant mode plus three evanescent ones."""
    return int(math.floor(k * profile.h_max / math.pi)) + 3


def mode_trace(ctx: ModeContext, g: ReducedSource, x, quad_points: int = 2001) -> np.ndarray:
    """u_n(x) = int G_n(x, s) g_n(s) ds with Dirac terms collapsed."""
    x = np.asarray(x, dtype=float)
    u = np.zeros(x.shape, dtype=complex)
    for s, w in g.points:
        u += w * green_kernel(ctx, x, s)
    if g.density is not None:
        a, b = g.support
        nodes = np.linspace(a, b, quad_points)
        weights = np.full(quad_points, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        weights *= (b - a) / (quad_points - 1) / 3
        gvals = g.density_at(nodes)
        for s, gw, gv in zip(nodes, weights, gvals):
            if gv != 0:
                u += gw * gv * green_kernel(ctx, x, float(s))
    return u


@dataclass
class SurfaceTrace:
    abscissae: np.ndarray
    values: np.ndarray
    k: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissae = np.asarray(self.abscissae, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.abscissae.shape != self.values.shape or self.abscissae.ndim != 1:
            raise ValueError("abscissae and values must be 1D arrays of equal length")
        if np.any(np.diff(self.abscissae) <= 0):
            raise ValueError("abscissae must be strictly increasing")

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "re", "im"])
            for x, v in zip(self.abscissae, self.values):
                w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])
        meta = dict(self.meta, k=self.k)
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, default=str))

    @classmethod
    def from_csv(cls, path: str | Path, k: float | None = None) -> "SurfaceTrace":
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"x", "re", "im"}:
            raise ValueError(f"{path}: expected a CSV with header x,re,im")
        x = np.array([float(r["x"]) for r in rows])
        v = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
        meta = {}
        side = path.with_suffix(".json")
        if side.exists():
            meta = json.loads(side.read_text())
        if k is None:
            k = meta.get("k")
        if k is None:
            raise ValueError(f"{path}: frequency k missing (no sidecar metadata)")
        return cls(x, v, float(k), meta)


def synthesize_surface(profile: Profile, k: float, spec: SourceSpec, abscissae,
                       n_max: int | None = None, modes: Sequence[int] | None = None,
                       tol: float = 1e-8) -> SurfaceTrace:
    """Trace u(x, 0) of the approximate wavefield at frequency k.

    ``modes`` restricts the sum (e.g. to the resonant mode only).
    """
    delta = delta_margin(k, profile)
    if delta <= tol:
        from .waveguide import ForbiddenFrequencyError
        raise ForbiddenFrequencyError(k, delta)
    if n_max is None:
        n_max = default_n_max(k, profile)
    x = np.asarray(abscissae, dtype=float)
    h0 = profile.h(x)
    total = np.zeros(x.shape, dtype=complex)
    for n in (range(n_max + 1) if modes is None else modes):
        ctx = classify_mode(n, k, profile)
        g = reduced_source(spec, n, profile)
        if not g.points and g.density is None:
            continue
        if ctx.resonant:
            for s, _ in g.points:
                if float(profile.h(np.array([s]))[0]) <= ctx.width:
                    warnings.warn(f"source at {s} sits on the evanescent side of mode {n}", stacklevel=2)
        u = mode_trace(ctx, g, x)
        phi0 = (1.0 if n == 0 else math.sqrt(2.0)) / np.sqrt(h0)
        total += u * phi0
    meta = {"profile": profile.name, "k": k, "n_max": n_max, "source": _safe_source(spec)}
    return SurfaceTrace(x, total, k, meta)


def _safe_source(spec: SourceSpec):
    try:
        return spec.to_dict()
    except ValueError:
        return "density"


# --------------------------------------------------------------------------
# oracle


def mode_ode_oracle(profile: Profile, k: float, n: int, g: ReducedSource,
                    domain: tuple[float, float] = (-6.0, 6.0), grid_step: float = 1e-3,
                    absorber: str = "stretch", pml_start: float = PML_START,
                    pml_end: float = PML_END, stretch_strength: float = 60.0) -> SurfaceTrace:
    """Finite-difference solve of u'' + k_n^2 u = -g_n on [-15, 15], u = 0 at the ends.

    The layers |x| > 8 absorb the outgoing waves. ``absorber="stretch"`` uses
    a complex coordinate stretch s(x) = 1 + i*sigma(x)/k with a quadratic
    sigma, which does not reflect near-cutoff modes. ``absorber="damping"``
    adds i*k*d(x) to k_n^2, d being the depth into the layer. Dirac terms are
    split linearly between the two nearest nodes.
    """
    if grid_step > 1e-3 * (domain[1] - domain[0]):
        raise ValueError("grid_step must be at most 1e-3 of the domain length")
    m = int(round(2 * pml_end / grid_step))
    x = np.linspace(-pml_end, pml_end, m + 1)
    dx = x[1] - x[0]
    depth = np.clip(x - pml_start, 0, None) + np.clip(-pml_start - x, 0, None)
    coef = _kn2(ModeContext(n, k, profile, "any"), x).astype(complex)
    inner = slice(1, m)
    if absorber == "damping":
        coef += 1j * k * depth
        s_node = np.ones(m + 1, dtype=complex)
        s_mid = np.ones(m, dtype=complex)
    elif absorber == "stretch":
        width = pml_end - pml_start
        sig = lambda d: stretch_strength * (d / width) ** 2
        s_node = 1 + 1j * sig(depth) / k
        xm = 0.5 * (x[1:] + x[:-1])
        dm = np.clip(xm - pml_start, 0, None) + np.clip(-pml_start - xm, 0, None)
        s_mid = 1 + 1j * sig(dm) / k
    else:
        raise ValueError(f"unknown absorber {absorber!r}")
    # (1/s) d/dx ((1/s) du/dx) with s on the half-grid for the fluxes
    left = 1.0 / (s_node[1:m] * s_mid[:-1] * dx**2)
    right = 1.0 / (s_node[1:m] * s_mid[1:] * dx**2)
    ab = np.zeros((3, m - 1), dtype=complex)
    ab[0, 1:] = right[:-1]
    ab[2, :-1] = left[1:]
    ab[1, :] = -(left + right) + coef[inner]
    rhs = np.zeros(m + 1, dtype=complex)
    for s, w in g.points:
        j = int(math.floor((s - x[0]) / dx))
        j = min(max(j, 0), m - 1)
        frac = (s - x[j]) / dx
        rhs[j] -= w * (1 - frac) / dx
        rhs[j + 1] -= w * frac / dx
    if g.density is not None:
        rhs -= g.density_at(x)
    try:
        sol = solve_banded((1, 1), ab, rhs[inner])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ArithmeticError(f"singular tridiagonal system: {exc}") from exc
    u = np.zeros(m + 1, dtype=complex)
    u[inner] = sol
    keep = (x >= domain[0] - 1e-12) & (x <= domain[1] + 1e-12)
    return SurfaceTrace(x[keep], u[keep], k,
                        {"oracle": "fd", "absorber": absorber, "n": n, "grid_step": grid_step})


# --------------------------------------------------------------------------
# noise


def add_noise(trace: SurfaceTrace, amplitude: float, seed: int) -> SurfaceTrace:
    """Complex Gaussian noise whose expected squared l2 norm is (amplitude*||d||)^2."""
    if amplitude < 0:
        raise ValueError("noise amplitude must be non-negative")
    d = trace.values
    if amplitude == 0:
        return SurfaceTrace(trace.abscissae.copy(), d.copy(), trace.k, dict(trace.meta, noise=0.0, seed=seed))
    rng = np.random.default_rng(seed)
    sigma = amplitude * np.linalg.norm(d) / math.sqrt(d.size)
    noise = sigma * (rng.standard_normal(d.size) + 1j * rng.standard_normal(d.size)) / math.sqrt(2.0)
    return SurfaceTrace(trace.abscissae.copy(), d + noise, trace.k,
                        dict(trace.meta, noise=amplitude, seed=seed))
