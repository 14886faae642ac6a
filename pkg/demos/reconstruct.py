"""Recover h3 and h5 from their multi-frequency traces."""

import numpy as np

from resonant_waveguide.benchmarks import REFERENCE_ERRORS, run_profile
from resonant_waveguide.waveguide import builtin_profile

for name in ("h3", "h5"):
    res = run_profile(name)
    err = res.metrics["relative_linf"]
    print(f"{name}: {len(res.points)} resonant points, {len(res.dropped)} dropped, "
          f"relative L-inf error {100 * err:.3f}% (reference {100 * REFERENCE_ERRORS[name]:.2f}%)")
    truth = builtin_profile(name)
    xs = np.linspace(-4, 4, 9)
    for x, a, b in zip(xs, truth.h(xs), res.h_app(xs)):
        print(f"  x = {x:+.1f}  h = {a:.6f}  h_app = {b:.6f}")
    res.write_plot_csv(f"{name}_plot.csv", truth)
