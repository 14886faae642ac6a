"""Fit the three-parameter Airy model to clean and noisy samples."""

import numpy as np

from resonant_waveguide.fitting import AiryParams, direct_fit, fit_least_squares, model_eval
from resonant_waveguide.forward import SurfaceTrace, add_noise

p0 = AiryParams(2 + 1j, 1.4, -2.8)
t = np.linspace(-6, 6, 200)
clean = SurfaceTrace(t, model_eval(p0, t), k=1.0)
print("true x* =", p0.x_star)

# peak and zeros only
print("direct fit x* =", direct_fit(clean).x_star)

# least squares from the direct start and a coarse scan
rep = fit_least_squares(clean)
print("least squares x* =", rep.params.x_star, "after", rep.iterations, "iterations")

# the same on noisy copies
for amp in (0.05, 0.3, 1.0):
    errs = [abs(fit_least_squares(add_noise(clean, amp, seed)).params.x_star - p0.x_star)
            for seed in range(16)]
    print(f"noise {amp}: median |x* error| = {np.median(errs):.4f}")
