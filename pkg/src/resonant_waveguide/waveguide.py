"""Width profiles, transverse modes, local wavenumbers and mode classification."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

__all__ = [
    "Profile",
    "ModeContext",
    "ForbiddenFrequencyError",
    "GAMMA",
    "mode_function",
    "local_wavenumber",
    "classify_mode",
    "delta_margin",
    "builtin_profile",
    "flat_profile",
    "ramp_profile",
    "piecewise_linear_profile",
    "table_profile",
    "profile_to_json",
    "profile_from_json",
]

TOL_FORBIDDEN = 1e-8
TOL_SIMPLE = 1e-6
SCAN_POINTS = 2048

# gamma_4 is 512/3 * 1e-5: the value that makes h2 continuous at |x| = 4.
GAMMA = {
    1: 3e-6,
    2: 8192 / 5 * 1e-6,
    3: 5e-5,
    4: 512 / 3 * 1e-5,
    5: 0.01 / 30,
    6: 25e-4,
    7: 5e-4,
    8: 4e-4,
}

Func = Callable[[np.ndarray], np.ndarray]


class ForbiddenFrequencyError(ValueError):
    """The frequency sits on n*pi/h_min or n*pi/h_max."""

    def __init__(self, k: float, delta: float):
        super().__init__(f"forbidden frequency k={k!r}: delta(k)={delta:.3e}")
        self.k = k
        self.delta = delta


@dataclass(frozen=True, eq=False)
class Profile:
    """Width function of the strip ``0 < y < h(x)``.

    ``h``, ``h_prime`` and ``h_double_prime`` accept and return numpy arrays.
    ``support`` is an interval containing supp(h'); outside it the width
    equals ``h_min`` or ``h_max``.
    """

    h: Func
    h_prime: Func
    h_double_prime: Func
    support: tuple[float, float]
    h_min: float
    h_max: float
    eta: float
    name: str = "custom"
    nonsmooth: bool = False
    spec: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.h(x)

    def check_invariants(self, x: np.ndarray | None = None) -> dict:
        """Sampled diagnostics for the slow-variation assumptions."""
        if x is None:
            x = np.linspace(-8.0, 8.0, 10_001)
        hx = self.h(x)
        a, b = self.support
        hp = np.abs(self.h_prime(x))
        hpp = np.abs(self.h_double_prime(x))
        if self.nonsmooth:
            keep = np.ones_like(x, dtype=bool)
            for c in self.spec.get("notches", []):
                keep &= np.abs(x - c) > 5e-4
            hp, hpp = hp[keep], hpp[keep]
        outside = (x < a) | (x > b)
        ho = hx[outside]
        ends = []
        for e in (a, b):
            ends.append(abs(float(self.h(np.array([e - 1e-13]))[0] - self.h(np.array([e + 1e-13]))[0])))
        return {
            "bounds_ok": bool(np.all(hx >= self.h_min - 1e-15) and np.all(hx <= self.h_max + 1e-15)),
            "outside_extremal": bool(np.all(np.isclose(ho, self.h_min, atol=1e-14, rtol=0)
                                            | np.isclose(ho, self.h_max, atol=1e-14, rtol=0))),
            "sup_h_prime": float(hp.max()) if hp.size else 0.0,
            "sup_h_double_prime": float(hpp.max()) if hpp.size else 0.0,
            "eta_bound_ok": bool(hp.max() < self.eta) if hp.size else True,
            "eta2_bound_ok": bool(hpp.max() < self.eta**2) if hpp.size else True,
            "endpoint_jump": max(ends),
        }


@dataclass(frozen=True, eq=False)
class ModeContext:
    n: int
    k: float
    profile: Profile
    classification: str
    resonant_points: tuple[float, ...] = ()
    simple: tuple[bool, ...] = ()

    @property
    def resonant(self) -> bool:
        return self.classification == "locally-resonant"

    @property
    def width(self) -> float:
        """The width n*pi/k at which the mode turns."""
        return self.n * math.pi / self.k

    def wavenumber(self, x):
        return local_wavenumber(self.n, self.k, self.profile, x)


def mode_function(n: int, profile: Profile, x: float, y: float) -> float:
    hx = float(profile.h(np.array([x]))[0])
    if y < 0 or y > hx:
        raise ValueError(f"mode_function: y={y} outside [0, h(x)={hx}]")
    if n == 0:
        return 1.0 / math.sqrt(hx)
    return math.sqrt(2.0 / hx) * math.cos(n * math.pi * y / hx)


def transverse_trace(n: int, side: str = "bottom") -> float:
    """Unit-interval transverse function at y=0 ("bottom") or y=1 ("top")."""
    if n == 0:
        return 1.0
    sign = 1.0 if side == "bottom" else (-1.0) ** n
    return math.sqrt(2.0) * sign


def local_wavenumber(n: int, k: float, profile: Profile, x):
    """k_n(x) with non-negative real and imaginary parts."""
    hx = profile.h(np.asarray(x, dtype=float))
    kn2 = k * k - (n * math.pi / hx) ** 2
    out = np.where(kn2 >= 0, np.sqrt(np.abs(kn2)) + 0j, 1j * np.sqrt(np.abs(kn2)))
    if np.ndim(x) == 0:
        return complex(out)
    return out


def delta_margin(k: float, profile: Profile, n_max: int | None = None) -> float:
    if n_max is None:
        n_max = int(math.ceil(k * profile.h_max / math.pi)) + 1
    ns = np.arange(n_max + 1)
    a = np.sqrt(np.abs(k * k - (ns * math.pi / profile.h_min) ** 2))
    b = np.sqrt(np.abs(k * k - (ns * math.pi / profile.h_max) ** 2))
    return float(min(a.min(), b.min()))


def _check_forbidden(n: int, k: float, profile: Profile) -> None:
    if n == 0:
        return
    for hb in (profile.h_min, profile.h_max):
        if abs(k - n * math.pi / hb) < TOL_FORBIDDEN:
            raise ForbiddenFrequencyError(k, delta_margin(k, profile))


def classify_mode(n: int, k: float, profile: Profile) -> ModeContext:
    if k <= 0:
        raise ValueError("classify_mode: k must be positive")
    _check_forbidden(n, k, profile)
    width = n * math.pi / k
    if width < profile.h_min or n == 0:
        return ModeContext(n, k, profile, "propagative")
    if width > profile.h_max:
        return ModeContext(n, k, profile, "evanescent")

    a, b = profile.support
    margin = 1e-9 * max(1.0, b - a)
    grid = np.linspace(a - margin, b + margin, max(SCAN_POINTS, 2048))
    g = profile.h(grid) - width
    points = []
    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]:
        root = brentq(lambda x: float(profile.h(np.array([x]))[0]) - width,
                      grid[i], grid[i + 1], xtol=1e-12)
        points.append(root)
    for i in np.nonzero(g == 0.0)[0]:
        points.append(float(grid[i]))
    points = sorted(set(points))
    simple = tuple(bool(abs(float(profile.h_prime(np.array([p]))[0])) > TOL_SIMPLE) for p in points)
    return ModeContext(n, k, profile, "locally-resonant", tuple(points), simple)


# --------------------------------------------------------------------------
# profile construction


def _measured_eta(hp: Func, support, notches=()) -> float:
    a, b = support
    if b <= a:
        return 1e-12
    x = np.linspace(a, b, 100_001)
    keep = np.ones_like(x, dtype=bool)
    for c in notches:
        keep &= np.abs(x - c) > 5e-4
    val = float(np.max(np.abs(hp(x[keep]))))
    return 1.1 * val if val > 0 else 1e-12


def _finish(h, hp, hpp, support, name, nonsmooth=False, notches=(), spec=None, eta=None):
    x = np.linspace(support[0] - 1.0, support[1] + 1.0, 200_001)
    x = np.concatenate([x, np.asarray(notches, dtype=float), np.asarray(support, dtype=float)])
    hx = h(x)
    return Profile(
        h=h, h_prime=hp, h_double_prime=hpp, support=tuple(float(s) for s in support),
        h_min=float(hx.min()), h_max=float(hx.max()),
        eta=_measured_eta(hp, support, notches) if eta is None else eta,
        name=name, nonsmooth=nonsmooth,
        spec=dict(spec or {"id": name}, notches=list(notches)),
    )


def _piecewise(x, conds, funcs, default):
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, default, dtype=float)
    for c, f in zip(conds, funcs):
        m = c(x)
        if np.any(m):
            out[m] = f(x[m])
    return out


def _h1():
    g1, g2 = GAMMA[1], GAMMA[2]
    inside = lambda x: (x >= -4) & (x <= 4)
    h = lambda x: 0.1 + _piecewise(x, [inside, lambda x: x > 4, lambda x: x < -4],
                                   [lambda x: g1 * (x**5 / 5 - 32 * x**3 / 3 + 256 * x),
                                    lambda x: g2 + 0 * x, lambda x: -g2 + 0 * x], 0.0)
    hp = lambda x: _piecewise(x, [inside], [lambda x: g1 * (x * x - 16) ** 2], 0.0)
    hpp = lambda x: _piecewise(x, [inside], [lambda x: g1 * 4 * x * (x * x - 16)], 0.0)
    return _finish(h, hp, hpp, (-4.0, 4.0), "h1")


def _h2():
    g3, g4 = GAMMA[3], GAMMA[4]
    p = lambda s: s**5 / 5 - 2 * s**4 + 16 * s**3 / 3
    inside = lambda x: (x >= -4) & (x <= 4)
    h = lambda x: 0.1 + _piecewise(x, [inside, lambda x: x > 4, lambda x: x < -4],
                                   [lambda x: np.sign(x) * g3 * p(np.abs(x)),
                                    lambda x: g4 + 0 * x, lambda x: -g4 + 0 * x], 0.0)
    hp = lambda x: _piecewise(x, [inside], [lambda x: g3 * x * x * (np.abs(x) - 4) ** 2], 0.0)
    hpp = lambda x: _piecewise(
        x, [inside], [lambda x: np.sign(x) * g3 * 4 * np.abs(x) * (np.abs(x) - 2) * (np.abs(x) - 4)], 0.0)
    return _finish(h, hp, hpp, (-4.0, 4.0), "h2")


def _h3():
    g5 = GAMMA[5]
    inside = lambda x: (x >= -4) & (x <= 4)
    h = lambda x: 0.1 + g5 * np.clip(np.asarray(x, dtype=float), -4.0, 4.0)
    hp = lambda x: _piecewise(x, [inside], [lambda x: g5 + 0 * x], 0.0)
    hpp = lambda x: np.zeros(np.shape(x))
    return _finish(h, hp, hpp, (-4.0, 4.0), "h3", nonsmooth=True, notches=(-4.0, 4.0))


def _h4():
    g5 = GAMMA[5]
    inside = lambda x: (x > -4) & (x <= 4)
    h = lambda x: 0.1 - 4 * g5 + _piecewise(
        x, [inside, lambda x: x > 4],
        [lambda x: 4 * g5 * np.sqrt((x + 4) / 2), lambda x: 8 * g5 + 0 * x], 0.0)
    hp = lambda x: _piecewise(x, [inside], [lambda x: math.sqrt(2) * g5 / np.sqrt(x + 4)], 0.0)
    hpp = lambda x: _piecewise(x, [inside], [lambda x: -math.sqrt(2) * g5 / (2 * (x + 4) ** 1.5)], 0.0)
    return _finish(h, hp, hpp, (-4.0, 4.0), "h4", nonsmooth=True, notches=(-4.0,))


def _h5():
    g6 = GAMMA[6]
    w = math.pi / 10
    inside = lambda x: (x >= -5) & (x <= 5)
    h = lambda x: 0.1 + _piecewise(x, [inside], [lambda x: g6 * np.sin(w * (x + 5))], 0.0)
    hp = lambda x: _piecewise(x, [inside], [lambda x: g6 * w * np.cos(w * (x + 5))], 0.0)
    hpp = lambda x: _piecewise(x, [inside], [lambda x: -g6 * w * w * np.sin(w * (x + 5))], 0.0)
    return _finish(h, hp, hpp, (-5.0, 5.0), "h5", nonsmooth=True, notches=(-5.0, 5.0))


def _h6():
    g6, g7 = GAMMA[6], GAMMA[7]
    left = lambda x: (x >= -5) & (x <= 0)
    right = lambda x: (x > 0) & (x <= 4)
    h = lambda x: 0.1 + _piecewise(x, [left, right],
                                   [lambda x: -g7 * (x + 5), lambda x: g6 / 4 * (x - 4)], 0.0)
    hp = lambda x: _piecewise(x, [left, right], [lambda x: -g7 + 0 * x, lambda x: g6 / 4 + 0 * x], 0.0)
    hpp = lambda x: np.zeros(np.shape(x))
    return _finish(h, hp, hpp, (-5.0, 4.0), "h6", nonsmooth=True, notches=(-5.0, 0.0, 4.0))


def _h7():
    g8 = GAMMA[8]
    c = 4 * math.pi / 3
    base = 0.1 + g8 * math.sqrt(3)
    inside = lambda x: (x >= -3.5) & (x <= 4)
    h = lambda x: base + _piecewise(
        x, [inside, lambda x: x < -3.5],
        [lambda x: 2 * g8 * np.sin(c * np.sqrt(x + 5)), lambda x: 2 * g8 * math.sin(c * math.sqrt(1.5)) + 0 * x],
        0.0)

    def hp_in(x):
        r = np.sqrt(x + 5)
        return 2 * g8 * np.cos(c * r) * c / (2 * r)

    def hpp_in(x):
        r = np.sqrt(x + 5)
        w1 = c / (2 * r)
        w2 = -c / (4 * r**3)
        return 2 * g8 * (-np.sin(c * r) * w1 * w1 + np.cos(c * r) * w2)

    hp = lambda x: _piecewise(x, [inside], [hp_in], 0.0)
    hpp = lambda x: _piecewise(x, [inside], [hpp_in], 0.0)
    return _finish(h, hp, hpp, (-3.5, 4.0), "h7", nonsmooth=True, notches=(-3.5,))


_BUILTINS = {"h1": _h1, "h2": _h2, "h3": _h3, "h4": _h4, "h5": _h5, "h6": _h6, "h7": _h7}
_CACHE: dict[str, Profile] = {}


def builtin_profile(name: str) -> Profile:
    """One of the seven benchmark profiles ``"h1"`` ... ``"h7"``."""
    if name not in _BUILTINS:
        raise ValueError(f"unknown profile {name!r}; expected one of {sorted(_BUILTINS)}")
    if name not in _CACHE:
        _CACHE[name] = _BUILTINS[name]()
    return _CACHE[name]


def flat_profile(h0: float = 0.1) -> Profile:
    z = lambda x: np.zeros(np.shape(x))
    return Profile(h=lambda x: np.full(np.shape(x), h0, dtype=float), h_prime=z, h_double_prime=z,
                   support=(0.0, 0.0), h_min=h0, h_max=h0, eta=1e-12, name="flat",
                   spec={"flat": h0})


def piecewise_linear_profile(knots, name: str = "piecewise-linear") -> Profile:
    """Continuous piecewise-linear width through ``knots = [(x, h), ...]``.

    The width is constant outside the first and last knot.
    """
    kx = np.array([k[0] for k in knots], dtype=float)
    kh = np.array([k[1] for k in knots], dtype=float)
    if np.any(np.diff(kx) <= 0):
        raise ValueError("knots must have strictly increasing abscissae")
    slopes = np.diff(kh) / np.diff(kx)
    h = lambda x: np.interp(np.asarray(x, dtype=float), kx, kh)

    def hp(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(kx, x, side="right") - 1, 0, len(slopes) - 1)
        out = slopes[idx]
        return np.where((x < kx[0]) | (x > kx[-1]), 0.0, out)

    hpp = lambda x: np.zeros(np.shape(x))
    notches = tuple(float(v) for v in kx)
    return _finish(h, hp, hpp, (kx[0], kx[-1]), name, nonsmooth=True, notches=notches,
                   spec={"knots": [[float(a), float(b)] for a, b in zip(kx, kh)]})


def ramp_profile(slope: float, half_length: float = 4.0, centre: float = 0.1,
                 name: str = "ramp") -> Profile:
    """Linear ramp ``centre + slope*x`` on ``[-L, L]``, constant outside (h3 family)."""
    return piecewise_linear_profile(
        [(-half_length, centre - slope * half_length), (half_length, centre + slope * half_length)], name)


def table_profile(x, h, name: str = "table") -> Profile:
    """Monotone-cubic interpolant of sampled widths, constant outside the table."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    pchip = PchipInterpolator(x, h, extrapolate=False)
    d1, d2 = pchip.derivative(1), pchip.derivative(2)
    lo, hi = x[0], x[-1]

    def ev(f, fill_left, fill_right):
        def g(t):
            t = np.asarray(t, dtype=float)
            tc = np.clip(t, lo, hi)
            out = f(tc)
            out = np.where(t < lo, fill_left, out)
            return np.where(t > hi, fill_right, out)
        return g

    return _finish(ev(pchip, h[0], h[-1]), ev(d1, 0.0, 0.0), ev(d2, 0.0, 0.0), (lo, hi), name,
                   spec={"table": [[float(a), float(b)] for a, b in zip(x, h)]})


def profile_to_json(profile: Profile) -> str:
    spec = {k: v for k, v in profile.spec.items() if k != "notches"}
    if "id" in spec and spec["id"] in _BUILTINS:
        return json.dumps({"id": spec["id"]})
    if "table" in spec or "knots" in spec or "flat" in spec:
        return json.dumps(spec)
    x = np.linspace(profile.support[0], profile.support[1], 401)
    return json.dumps({"table": [[float(a), float(b)] for a, b in zip(x, profile.h(x))]})


def profile_from_json(text: str | dict) -> Profile:
    data = json.loads(text) if isinstance(text, str) else text
    if "id" in data:
        return builtin_profile(data["id"])
    if "table" in data:
        arr = np.asarray(data["table"], dtype=float)
        return table_profile(arr[:, 0], arr[:, 1])
    if "knots" in data:
        return piecewise_linear_profile(data["knots"])
    if "flat" in data:
        return flat_profile(float(data["flat"]))
    raise ValueError("profile JSON needs one of 'id', 'table', 'knots', 'flat'")
