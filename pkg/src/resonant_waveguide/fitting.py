"""Three-parameter Airy model z*Ai(beta - alpha*t): direct and least-squares fits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .forward import SurfaceTrace
from .special import airy, airy_first_zeros, airy_global_max

__all__ = [
    "AiryParams",
    "FitBox",
    "FitReport",
    "InsufficientWindowError",
    "InvalidFitError",
    "model_eval",
    "lsq_objective",
    "lsq_gradient",
    "lsq_hessian",
    "direct_fit",
    "fit_least_squares",
    "lambda_resonant_point",
    "estimate_noise",
]


class InsufficientWindowError(ValueError):
    pass


class InvalidFitError(ValueError):
    pass


@dataclass(frozen=True)
class AiryParams:
    z: complex
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0) or self.z == 0 or not math.isfinite(self.beta):
            raise ValueError(f"invalid Airy parameters {self}")

    @property
    def x_star(self) -> float:
        return self.beta / self.alpha

    def as_vector(self) -> np.ndarray:
        return np.array([self.z.real, self.z.imag, self.alpha, self.beta])

    @classmethod
    def from_vector(cls, v) -> "AiryParams":
        return cls(complex(v[0], v[1]), float(v[2]), float(v[3]))

    def to_dict(self) -> dict:
        return {"re_z": self.z.real, "im_z": self.z.imag, "alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_dict(cls, d: dict) -> "AiryParams":
        return cls(complex(d["re_z"], d["im_z"]), float(d["alpha"]), float(d["beta"]))


@dataclass(frozen=True)
class FitBox:
    z_max: float = 1e3
    alpha_min: float = 1e-2
    alpha_max: float = 50.0
    beta_min: float = -200.0
    beta_max: float = 200.0

    def __post_init__(self):
        if not (0 < self.alpha_min < self.alpha_max) or self.beta_min >= self.beta_max or self.z_max <= 0:
            raise ValueError(f"empty or invalid fit box {self}")

    def clamp(self, v: np.ndarray) -> np.ndarray:
        v = v.copy()
        mod = math.hypot(v[0], v[1])
        if mod > self.z_max:
            v[:2] *= self.z_max / mod
        v[2] = min(max(v[2], self.alpha_min), self.alpha_max)
        v[3] = min(max(v[3], self.beta_min), self.beta_max)
        return v


@dataclass
class FitReport:
    params: AiryParams
    residual_l2: float
    iterations: int
    converged: bool
    hessian_min_eigenvalue: float
    history: list = field(default_factory=list)

    def to_json(self, include_history: bool = False) -> str:
        out = {
            "params": self.params.to_dict(),
            "lambda": self.params.x_star,
            "residual_l2": self.residual_l2,
            "iterations": self.iterations,
            "converged": self.converged,
            "hessian_min_eigenvalue": self.hessian_min_eigenvalue,
        }
        if include_history:
            out["history"] = self.history
        return json.dumps(out, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FitReport":
        d = json.loads(text)
        return cls(AiryParams.from_dict(d["params"]), d["residual_l2"], d["iterations"],
                   d["converged"], d["hessian_min_eigenvalue"], d.get("history", []))


def model_eval(p: AiryParams, t):
    ai, _, _, _ = airy(p.beta - p.alpha * np.asarray(t, dtype=float))
    out = p.z * ai
    return complex(out) if np.ndim(t) == 0 else out


def _check(t, d):
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=complex)
    if t.size == 0 or t.shape != d.shape:
        raise ValueError("need non-empty abscissae and data of equal length")
    return t, d


def _pieces(v, t):
    xi = v[3] - v[2] * t
    ai, aip, _, _ = airy(xi)
    return xi, ai, aip


def _residual_jacobian(v, t, d):
    """Residual r = z*Ai - d and its complex Jacobian in (Re z, Im z, alpha, beta)."""
    z = complex(v[0], v[1])
    xi, ai, aip = _pieces(v, t)
    r = z * ai - d
    jac = np.stack([ai + 0j, 1j * ai, -z * t * aip, z * aip], axis=1)
    return r, jac, xi, ai, aip


def lsq_objective(p: AiryParams, t, d) -> float:
    t, d = _check(t, d)
    r = model_eval(p, t) - d
    return 0.5 * float(np.sum(np.abs(r) ** 2)) / t.size


def lsq_gradient(p: AiryParams, t, d) -> np.ndarray:
    """Gradient of the objective in (Re z, Im z, alpha, beta)."""
    t, d = _check(t, d)
    r, jac, *_ = _residual_jacobian(p.as_vector(), t, d)
    return np.real(jac.conj().T @ r) / t.size


def _hessian(v, t, d, r=None, jac=None, xi=None, ai=None, aip=None):
    if r is None:
        r, jac, xi, ai, aip = _residual_jacobian(v, t, d)
    n = t.size
    gn = np.real(jac.conj().T @ jac)
    z = complex(v[0], v[1])
    aipp = xi * ai
    rc = r.conj()
    # second derivatives of the residual; the (z, z) block vanishes
    b = np.zeros((4, 4))
    b[0, 2] = np.real(np.sum(rc * (-t * aip)))
    b[0, 3] = np.real(np.sum(rc * aip))
    b[1, 2] = np.real(np.sum(rc * (-1j * t * aip)))
    b[1, 3] = np.real(np.sum(rc * (1j * aip)))
    b[2, 2] = np.real(np.sum(rc * z * t * t * aipp))
    b[2, 3] = np.real(np.sum(rc * (-z * t * aipp)))
    b[3, 3] = np.real(np.sum(rc * z * aipp))
    b = b + np.triu(b, 1).T
    return (gn + b) / n


def lsq_hessian(p: AiryParams, t, d) -> np.ndarray:
    t, d = _check(t, d)
    return _hessian(p.as_vector(), t, d)


def estimate_noise(values) -> float:
    """Relative noise level from second differences (robust MAD estimate)."""
    d = np.asarray(values, dtype=complex)
    if d.size < 5:
        return 0.0
    dd = d[2:] - 2 * d[1:-1] + d[:-2]
    mad = np.median(np.abs(dd)) / 0.8326  # median of a unit complex Rayleigh variable
    sigma = mad / math.sqrt(6.0)
    rms = math.sqrt(float(np.mean(np.abs(d) ** 2)))
    return float(sigma / rms) if rms > 0 else 0.0


def _crossings(t, y):
    idx = np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]
    out = []
    for i in idx:
        out.append(t[i] - y[i] * (t[i + 1] - t[i]) / (y[i + 1] - y[i]))
    return out


def direct_fit(trace: SurfaceTrace, smooth: bool | None = None) -> AiryParams:
    """Parameters from the peak and the first two zeros after it.

    Complex data are rotated by the unit phase that maximizes the energy of
    the real part. ``smooth=None`` applies a width-5 moving average when the
    estimated relative noise exceeds 5%.
    """
    t = trace.abscissae
    d = trace.values
    if t.size < 5:
        raise InsufficientWindowError("too few samples for a direct fit")
    if smooth is None:
        smooth = estimate_noise(d) > 0.05
    if smooth:
        kernel = np.ones(5) / 5
        d = np.convolve(d, kernel, mode="same")
        d[:2], d[-2:] = trace.values[:2], trace.values[-2:]
    phase = 0.5 * np.angle(np.sum(d * d))
    y = np.real(d * np.exp(-1j * phase))
    i = int(np.argmax(np.abs(y)))
    if y[i] < 0:
        phase += math.pi
        y = -y
    t_peak, y_peak = t[i], y[i]
    if 0 < i < t.size - 1:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        den = y0 - 2 * y1 + y2
        if den != 0:
            off = 0.5 * (y0 - y2) / den
            if abs(off) < 1:
                t_peak = t[i] + off * (t[i + 1] - t[i])
                y_peak = y1 - 0.25 * (y0 - y2) * off
    zeros = [c for c in _crossings(t, y) if c > t_peak]
    if len(zeros) < 2:
        raise InsufficientWindowError("fewer than two zero crossings after the peak")
    x1, x2 = zeros[0], zeros[1]
    yz1, yz2 = airy_first_zeros(2)
    alpha = (yz1 - yz2) / (x2 - x1)
    beta = (yz1 * x2 - yz2 * x1) / (x2 - x1)
    _, ai_max = airy_global_max()
    z = complex(y_peak / ai_max) * complex(np.exp(1j * phase))
    return AiryParams(z, float(alpha), float(beta))


def _variable_projection_start(t, d, box: FitBox, n_grid: int = 41) -> np.ndarray:
    """Coarse (alpha, x*) scan with z solved in closed form."""
    if t.size > 80:
        keep = np.unique(np.linspace(0, t.size - 1, 80).round().astype(int))
        t, d = t[keep], d[keep]
    alphas = np.geomspace(box.alpha_min, box.alpha_max, n_grid)
    stars = np.linspace(t.min(), t.max(), n_grid)
    aa, ss = np.meshgrid(alphas, stars, indexing="ij")
    aa, bb = aa.ravel(), np.clip(aa.ravel() * ss.ravel(), box.beta_min, box.beta_max)
    args = bb[:, None] - aa[:, None] * t[None, :]
    ok = np.abs(args).max(axis=1) <= 150
    if not np.any(ok):
        raise InvalidFitError("no admissible starting point in the box")
    aa, bb = aa[ok], bb[ok]
    ai = airy(args[ok])[0]
    den = np.sum(ai * ai, axis=1)
    den[den == 0] = np.inf
    z = (ai @ d) / den
    cost = np.sum(np.abs(z[:, None] * ai - d[None, :]) ** 2, axis=1)
    j = int(np.argmin(cost))
    return box.clamp(np.array([z[j].real, z[j].imag, aa[j], bb[j]]))


def _descend(v, t, d, box, cost, max_iter, method, gtol, xtol, keep_history):
    n = t.size
    lam = 1e-3
    f = cost(v)
    history = []
    converged = False
    it = 0
    if not math.isfinite(f):
        return v, f, it, converged, history
    for it in range(1, max_iter + 1):
        r, jac, *_ = _residual_jacobian(v, t, d)
        g = np.real(jac.conj().T @ r) / n
        if keep_history:
            history.append({"iter": it, "cost": f, "grad_norm": float(np.linalg.norm(g))})
        if np.linalg.norm(g) <= gtol:
            converged = True
            break
        accepted = False
        if method == "lm":
            a = np.real(jac.conj().T @ jac) / n
            for _ in range(60):
                step = np.linalg.solve(a + lam * np.diag(np.diag(a) + 1e-300), -g)
                v_new = box.clamp(v + step)
                f_new = cost(v_new)
                if f_new <= f:
                    lam = max(lam / 3, 1e-12)
                    accepted = True
                    break
                lam *= 4
        elif method == "gd":
            s = 1.0
            for _ in range(60):
                v_new = box.clamp(v - s * g)
                f_new = cost(v_new)
                if f_new < f - 1e-4 * s * float(g @ g):
                    accepted = True
                    break
                s *= 0.5
        else:
            raise ValueError(f"unknown method {method!r}")
        if not accepted:
            converged = True  # no descent left at working precision
            break
        moved = float(np.linalg.norm(v_new - v))
        v, f = v_new, f_new
        if moved <= xtol * (1 + float(np.linalg.norm(v))):
            converged = True
            break
    return v, f, it, converged, history


def fit_least_squares(trace: SurfaceTrace, box: FitBox | None = None, init: AiryParams | None = None,
                      max_iter: int = 500, method: str = "lm", gtol: float = 1e-10,
                      xtol: float = 1e-12, keep_history: bool = False) -> FitReport:
    """Minimize the normalized least-squares misfit inside the box.

    ``method="lm"`` is Levenberg-Marquardt on the Gauss-Newton matrix;
    ``method="gd"`` is plain gradient descent with backtracking.
    """
    box = box or FitBox()
    t, d = _check(trace.abscissae, trace.values)
    if t.size < 10:
        raise ValueError("need at least 10 samples")
    n = t.size

    def cost(v):
        z = complex(v[0], v[1])
        arg = v[3] - v[2] * t
        if np.abs(arg).max() > 190:
            return math.inf
        return 0.5 * float(np.sum(np.abs(z * airy(arg)[0] - d) ** 2)) / n

    if init is not None:
        v, f, it, converged, history = _descend(box.clamp(init.as_vector()), t, d, box, cost,
                                                max_iter, method, gtol, xtol, keep_history)
    else:
        try:
            v0 = box.clamp(direct_fit(trace).as_vector())
        except ValueError:
            v0 = None
        best = None
        if v0 is not None:
            best = _descend(v0, t, d, box, cost, max_iter, method, gtol, xtol, keep_history)
        # a coarse scan guards against a poor direct start
        other = _descend(_variable_projection_start(t, d, box), t, d, box, cost,
                         max_iter, method, gtol, xtol, keep_history)
        if best is None or other[1] < best[1]:
            best = other
        v, f, it, converged, history = best
    hess = _hessian(v, t, d)
    params = AiryParams.from_vector(v)
    return FitReport(params, math.sqrt(2 * f), it, converged,
                     float(np.linalg.eigvalsh(hess).min()), history)


def lambda_resonant_point(report: FitReport | AiryParams) -> float:
    p = report.params if isinstance(report, FitReport) else report
    if not p.alpha > 0:
        raise InvalidFitError("alpha must be positive")
    return p.beta / p.alpha
