"""Airy functions, their zeros and extrema, and one-dimensional quadrature.

Ai, Ai', Bi, Bi' are evaluated without external special-function libraries:

* on ``|x| < 7`` by Taylor expansions about a grid of centres spaced 0.25
  apart.  The Taylor coefficients follow from the Airy equation ``y'' = x y``.
  The values at the centres are obtained by stepping outwards from the
  Maclaurin values at ``x = 0`` (Bi everywhere, Ai for ``x <= 0``) and by
  stepping inwards from the asymptotic values at ``x = 7`` (Ai for ``x > 0``),
  so that each function is always continued in its dominant direction;
* on ``|x| >= 7`` by the standard asymptotic expansions, truncated at the
  smallest term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = [
    "AiryValue",
    "QuadratureRule",
    "QuadratureError",
    "airy",
    "airy_eval",
    "airy_ai",
    "airy_first_zeros",
    "airy_prime_zeros",
    "airy_global_max",
    "integrate",
    "AI0",
    "AIP0",
    "BI0",
    "BIP0",
]

# Ai(0), Ai'(0), Bi(0), Bi'(0)
AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))
BI0 = 1.0 / (3.0 ** (1.0 / 6.0) * math.gamma(2.0 / 3.0))
BIP0 = 3.0 ** (1.0 / 6.0) / math.gamma(1.0 / 3.0)

SWITCH = 7.0
_STEP = 0.25
_NTERMS = 28
_MAX_ARG = 200.0
_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class AiryValue:
    """Ai, Ai', Bi, Bi' at a single point."""

    ai: float
    ai_prime: float
    bi: float
    bi_prime: float

    @property
    def wronskian(self) -> float:
        return self.ai * self.bi_prime - self.ai_prime * self.bi


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature exhausts its subdivision budget."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class QuadratureRule:
    kind: str = "adaptive-simpson"
    abs_tol: float = 1e-10
    max_subdivisions: int = 2**20
    # composite Gauss-Legendre only
    order: int = 8
    panels: int = 16

    def __post_init__(self):
        if self.kind not in ("adaptive-simpson", "gauss-legendre-composite"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        if self.abs_tol <= 0 or self.max_subdivisions < 1:
            raise ValueError("abs_tol and max_subdivisions must be positive")


# --------------------------------------------------------------------------
# Taylor machinery


def _taylor_coefficients(c: float, y0: float, y1: float, nterms: int = _NTERMS) -> np.ndarray:
    a = np.zeros(nterms)
    a[0], a[1] = y0, y1
    for m in range(nterms - 2):
        prev = a[m - 1] if m >= 1 else 0.0
        a[m + 2] = (c * a[m] + prev) / ((m + 2) * (m + 1))
    return a


def _taylor_step(c: float, y0: float, y1: float, t: float) -> tuple[float, float]:
    a = _taylor_coefficients(c, y0, y1, 60)
    powers = t ** np.arange(60)
    val = float(np.dot(a, powers))
    der = float(np.dot(a[1:] * np.arange(1, 60), powers[:-1]))
    return val, der


def _asymptotic_coefficients(nmax: int = 60) -> np.ndarray:
    u = np.zeros(nmax)
    u[0] = 1.0
    for k in range(1, nmax):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    return u


_U = _asymptotic_coefficients()
_V = np.array([1.0] + [-(6 * k + 1) / (6 * k - 1) * _U[k] for k in range(1, len(_U))])


def _truncated_sum(coef: np.ndarray, inv_zeta: np.ndarray, alternate: bool) -> np.ndarray:
    """Sum coef[k] (+-1/zeta)^k, stopping each series at its smallest term."""
    total = np.zeros_like(inv_zeta)
    term_prev = np.full_like(inv_zeta, np.inf)
    active = np.ones(inv_zeta.shape, dtype=bool)
    power = np.ones_like(inv_zeta)
    for k in range(len(coef)):
        sign = (-1.0) ** k if alternate else 1.0
        term = sign * coef[k] * power
        mag = np.abs(term)
        active &= mag < term_prev
        total = np.where(active, total + term, total)
        term_prev = np.where(active, mag, term_prev)
        power = power * inv_zeta
        if not active.any():
            break
    return total


def _split_sums(coef: np.ndarray, inv_zeta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Even/odd alternating sums used by the oscillatory expansions."""
    even = np.zeros_like(inv_zeta)
    odd = np.zeros_like(inv_zeta)
    prev = np.full_like(inv_zeta, np.inf)
    active = np.ones(inv_zeta.shape, dtype=bool)
    power = np.ones_like(inv_zeta)
    for k in range(len(coef)):
        term = coef[k] * power
        mag = np.abs(term)
        active &= mag < prev
        sign = (-1.0) ** (k // 2)
        if k % 2 == 0:
            even = np.where(active, even + sign * term, even)
        else:
            odd = np.where(active, odd + sign * term, odd)
        prev = np.where(active, mag, prev)
        power = power * inv_zeta
        if not active.any():
            break
    return even, odd


def _asymptotic_positive(x: np.ndarray):
    zeta = 2.0 / 3.0 * x**1.5
    inv = 1.0 / zeta
    x14 = x**0.25
    su_alt = _truncated_sum(_U, inv, True)
    sv_alt = _truncated_sum(_V, inv, True)
    su = _truncated_sum(_U, inv, False)
    sv = _truncated_sum(_V, inv, False)
    with np.errstate(over="ignore", under="ignore"):
        em = np.exp(-zeta)
        ep = np.exp(zeta)
        ai = em / (2 * _SQRT_PI * x14) * su_alt
        aip = -x14 * em / (2 * _SQRT_PI) * sv_alt
        bi = ep / (_SQRT_PI * x14) * su
        bip = x14 * ep / _SQRT_PI * sv
    return ai, aip, bi, bip


def _asymptotic_negative(x: np.ndarray):
    z = -x
    zeta = 2.0 / 3.0 * z**1.5
    inv = 1.0 / zeta
    z14 = z**0.25
    ue, uo = _split_sums(_U, inv)
    ve, vo = _split_sums(_V, inv)
    ph = zeta - math.pi / 4
    c, s = np.cos(ph), np.sin(ph)
    ai = (c * ue + s * uo) / (_SQRT_PI * z14)
    aip = z14 / _SQRT_PI * (s * ve - c * vo)
    bi = (-s * ue + c * uo) / (_SQRT_PI * z14)
    bip = z14 / _SQRT_PI * (c * ve + s * vo)
    return ai, aip, bi, bip


@lru_cache(maxsize=1)
def _node_tables():
    """Taylor coefficient tables for Ai and Bi about every grid centre."""
    n_half = int(round(SWITCH / _STEP))
    centres = _STEP * np.arange(-n_half, n_half + 1)
    vals = {c: [0.0, 0.0, 0.0, 0.0] for c in centres}

    # Bi outward from 0 in both directions, Ai outward on the negative side.
    vals[0.0] = [AI0, AIP0, BI0, BIP0]
    bi, bip = BI0, BIP0
    for i in range(n_half):
        c = centres[n_half + i]
        bi, bip = _taylor_step(c, bi, bip, _STEP)
        vals[centres[n_half + i + 1]][2:] = [bi, bip]
    ai, aip, bi, bip = AI0, AIP0, BI0, BIP0
    for i in range(n_half):
        c = centres[n_half - i]
        ai, aip = _taylor_step(c, ai, aip, -_STEP)
        bi, bip = _taylor_step(c, bi, bip, -_STEP)
        vals[centres[n_half - i - 1]] = [ai, aip, bi, bip]

    # Ai inward from the asymptotic region.
    a7 = _asymptotic_positive(np.array([SWITCH]))
    ai, aip = float(a7[0][0]), float(a7[1][0])
    vals[centres[-1]][:2] = [ai, aip]
    for i in range(n_half - 1):
        c = centres[2 * n_half - i]
        ai, aip = _taylor_step(c, ai, aip, -_STEP)
        vals[centres[2 * n_half - i - 1]][:2] = [ai, aip]

    ai_tab = np.array([_taylor_coefficients(c, vals[c][0], vals[c][1]) for c in centres])
    bi_tab = np.array([_taylor_coefficients(c, vals[c][2], vals[c][3]) for c in centres])
    return centres, ai_tab, bi_tab


def _horner(tab: np.ndarray, t: np.ndarray):
    m = tab.shape[1]
    val = tab[:, m - 1].copy()
    der = np.zeros_like(val)
    for j in range(m - 2, -1, -1):
        der = der * t + val
        val = val * t + tab[:, j]
    return val, der


def airy(x):
    """Vectorised Ai, Ai', Bi, Bi' for real ``x`` with ``|x| <= 200``.

    Returns four arrays (or floats for scalar input).
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("airy: non-finite argument")
    if np.any(np.abs(xa) > _MAX_ARG):
        raise ValueError(f"airy: |x| must not exceed {_MAX_ARG}")
    flat = xa.ravel()
    out = [np.empty_like(flat) for _ in range(4)]

    inner = np.abs(flat) < SWITCH
    if inner.any():
        centres, ai_tab, bi_tab = _node_tables()
        xi = flat[inner]
        idx = np.rint((xi - centres[0]) / _STEP).astype(int)
        t = xi - centres[idx]
        ai, aip = _horner(ai_tab[idx], t)
        bi, bip = _horner(bi_tab[idx], t)
        for o, v in zip(out, (ai, aip, bi, bip)):
            o[inner] = v
    pos = flat >= SWITCH
    if pos.any():
        for o, v in zip(out, _asymptotic_positive(flat[pos])):
            o[pos] = v
    neg = flat <= -SWITCH
    if neg.any():
        for o, v in zip(out, _asymptotic_negative(flat[neg])):
            o[neg] = v

    res = tuple(o.reshape(xa.shape) for o in out)
    if xa.ndim == 0:
        return tuple(float(r) for r in res)
    return res


def airy_ai(x):
    """Ai and Ai' only."""
    ai, aip, _, _ = airy(x)
    return ai, aip


def airy_eval(x: float) -> AiryValue:
    if not math.isfinite(x):
        raise ValueError("airy_eval: non-finite argument")
    return AiryValue(*airy(float(x)))


# --------------------------------------------------------------------------
# zeros and extrema


def _refine_root(f: Callable[[float], float], df: Callable[[float], float], lo: float, hi: float,
                 tol: float = 1e-12) -> float:
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or hi - lo < 1e-6:
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(20):
        d = df(x)
        if d == 0.0:
            break
        step = f(x) / d
        x_new = min(max(x - step, lo), hi)
        if abs(x_new - x) < tol:
            x = x_new
            break
        x = x_new
    return x


def _scan_zeros(f, df, count: int) -> list[float]:
    roots: list[float] = []
    step = 0.05
    a, fa = 0.0, f(0.0)
    while len(roots) < count:
        b = a - step
        fb = f(b)
        if fa == 0.0:
            roots.append(a)
        elif (fa > 0) != (fb > 0):
            roots.append(_refine_root(f, df, b, a))
        a, fa = b, fb
    return roots[:count]


def airy_first_zeros(count: int) -> list[float]:
    """The ``count`` negative zeros of Ai closest to the origin, decreasing."""
    if not isinstance(count, (int, np.integer)) or not 1 <= count <= 20:
        raise ValueError("airy_first_zeros: count must be an integer in [1, 20]")
    return _cached_ai_zeros(int(count))


@lru_cache(maxsize=None)
def _cached_ai_zeros(count: int) -> list[float]:
    return _scan_zeros(lambda x: airy(x)[0], lambda x: airy(x)[1], count)


def airy_prime_zeros(count: int) -> list[float]:
    """The ``count`` negative zeros of Ai' closest to the origin, decreasing."""
    if not 1 <= count <= 20:
        raise ValueError("airy_prime_zeros: count must be in [1, 20]")
    return _scan_zeros(lambda x: airy(x)[1], lambda x: x * airy(x)[0], count)


@lru_cache(maxsize=1)
def airy_global_max() -> tuple[float, float]:
    """Location and value of max Ai over the real line (first zero of Ai')."""
    x = airy_prime_zeros(1)[0]
    return x, airy(x)[0]


# --------------------------------------------------------------------------
# quadrature


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(f, a: float, b: float, tol: float, max_sub: int) -> float:
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    stack = [(a, fa, b, fb, m, fm, whole, tol, 0)]
    total = 0.0
    n_sub = 1
    while stack:
        a, fa, b, fb, m, fm, whole, eps, depth = stack.pop()
        lm, flm, left = _simpson(f, a, fa, m, fm)
        rm, frm, right = _simpson(f, m, fm, b, fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps or depth > 60 or b - a < 1e-15 * max(1.0, abs(a)):
            total += left + right + delta / 15.0
            continue
        n_sub += 1
        if n_sub > max_sub:
            estimate = total + left + right + sum(s[6] for s in stack)
            raise QuadratureError("adaptive Simpson: subdivision limit exceeded", estimate)
        stack.append((a, fa, m, fm, lm, flm, left, eps / 2.0, depth + 1))
        stack.append((m, fm, b, fb, rm, frm, right, eps / 2.0, depth + 1))
    return total


def _gauss_composite(f, a: float, b: float, order: int, panels: int) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        total += half * sum(w * f(mid + half * t) for t, w in zip(nodes, weights))
    return float(total)


def integrate(f: Callable[[float], float], a: float, b: float,
              rule: QuadratureRule | None = None, singular: str | None = None) -> float:
    """Integrate ``f`` over ``[a, b]``.

    ``singular`` may be ``"left"``, ``"right"`` or ``"both"`` to flag an
    integrable ``(x - endpoint)^(-1/2)`` behaviour; the substitution
    ``x = a + u^2`` (mirrored for the right end) removes it.
    """
    rule = rule or QuadratureRule()
    if b < a:
        raise ValueError("integrate: require a <= b")
    if a == b:
        return 0.0
    if singular == "both":
        m = 0.5 * (a + b)
        return integrate(f, a, m, rule, "left") + integrate(f, m, b, rule, "right")
    if singular in ("left", "right"):
        width = math.sqrt(b - a)
        sign = 1.0 if singular == "left" else -1.0
        base = a if singular == "left" else b
        # base + u^2 must differ from base in floating point
        u_min = max(1e-8 * width, 2.0 * math.sqrt(np.finfo(float).eps * abs(base)))

        def g(u):
            # the endpoint itself may be non-finite; sample just inside it
            u = max(u, u_min)
            return 2.0 * u * f(base + sign * u * u)

        return integrate(g, 0.0, width, rule)
    if singular is not None:
        raise ValueError(f"unknown singular flag {singular!r}")
    if rule.kind == "adaptive-simpson":
        return _adaptive_simpson(f, float(a), float(b), rule.abs_tol, rule.max_subdivisions)
    return _gauss_composite(f, float(a), float(b), rule.order, rule.panels)
