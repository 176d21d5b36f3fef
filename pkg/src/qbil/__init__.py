"""Numerical laboratory for a triangular quantum billiard radiating
through a two-slit wall into a detector box.

Modules:
    geometry   apparatus description and rasterization
    solver     wave-packet propagation (split Cayley steps)
    screen     film records, visibility, interference decomposition
    classical  specular ray tracing, stretching rates, direction census
    spectral   closed-cavity spectra, recurrence time, gap statistics
    poles      finite-wall pole formulas and decoherence scales
    sid        stationary interference sums and their large-x decay
    config     experiment config files
    snapshots  binary field dumps
    runner     end-to-end experiment orchestration
    cli        command line entry point
"""

__version__ = "0.1.0"

from .errors import (ConfigError, CornerHitError, GeometryError,
                     IoFormatError, NumericsError, QbilError)

__all__ = [
    "ConfigError", "CornerHitError", "GeometryError", "IoFormatError",
    "NumericsError", "QbilError", "__version__",
]
