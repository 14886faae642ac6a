"""Width bounds and support of h' from trace-norm explosions."""

from resonant_waveguide.benchmarks import run_calibration
from resonant_waveguide.inversion import parse_grid
from resonant_waveguide.waveguide import builtin_profile

h1 = builtin_profile("h1")
out = run_calibration(h1, parse_grid("30:33:30"), parse_grid("-7:7:57"))
s = out["summary"]
print("peaks on the scan:", s["k_peaks"])
print(f"h_min {s['h_min']:.7f} -> refined {s['h_min_refined']:.7f} (true {h1.h_min:.7f})")
print(f"h_max {s['h_max']:.7f} -> refined {s['h_max_refined']:.7f} (true {h1.h_max:.7f})")
print("support:", s["support"], "true:", h1.support)
