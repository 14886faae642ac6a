"""Locally resonant waveguides: forward synthesis and width reconstruction.

The modules build on each other in this order: ``special`` (Airy functions
and quadrature), ``waveguide`` (profiles and modes), ``forward`` (Green
kernels, surface traces, finite-difference oracle), ``fitting`` (the
three-parameter Airy model), ``inversion`` (calibration and assembly of the
width) and ``benchmarks`` (reference experiments). ``cli`` wraps them.
"""

from .special import *  # noqa: F401,F403
from .waveguide import *  # noqa: F401,F403
from .forward import *  # noqa: F401,F403
from .fitting import *  # noqa: F401,F403
from .inversion import *  # noqa: F401,F403
from . import special, waveguide, forward, fitting, inversion, benchmarks  # noqa: F401

__version__ = "0.1.0"
