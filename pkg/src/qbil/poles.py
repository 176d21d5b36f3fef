"""Scattering-pole estimates and the decoherence time they set.

A finite wall of height U0 with a power-law opening profile of order
wall_order and transmission amplitude scale A shifts the lowest cavity
resonance off the real axis. The leading pole sits at

    beta0 = R0 - i I0
    I0 = ln(2 U0^(wall_order + 2) / A^2) / 2
    R0 = U0 - (wall_order + 2) / (4 U0) * ln(2 U0^(wall_order + 2) / A^2)

valid while the log argument exceeds 1 (otherwise the imaginary part is
not positive and the expansion has left its regime). For a cavity of size
`radius` the pole gives the damping rate and its reciprocal time

    gamma = hbar^2 R0 I0 / (2 mass radius^2),    t_d = hbar / gamma

so gamma * t_d = hbar identically, t_d grows like radius^2 and mass, and
the infinite-cavity limit has no damping at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericsError


@dataclass(frozen=True)
class WallParams:
    """Finite-wall model inputs. radius may be math.inf."""

    U0: float
    A: float
    wall_order: int = 0
    radius: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.U0 > 0.0) or not math.isfinite(self.U0):
            raise ConfigError(f"U0 must be positive and finite, got {self.U0}")
        if self.A == 0.0 or not math.isfinite(self.A):
            raise ConfigError(f"A must be nonzero and finite, got {self.A}")
        if self.wall_order < 0:
            raise ConfigError(f"wall_order must be >= 0, got {self.wall_order}")
        if not (self.radius > 0.0):
            raise ConfigError(f"radius must be positive, got {self.radius}")
        for name in ("mass", "hbar"):
            v = getattr(self, name)
            if not (v > 0.0) or not math.isfinite(v):
                raise ConfigError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class Beta0:
    R0: float
    I0: float


def pole_beta0(wall: WallParams) -> Beta0:
    """Leading pole of the finite-wall cavity, as (R0, I0)."""
    arg = 2.0 * wall.U0 ** (wall.wall_order + 2) / (wall.A * wall.A)
    if arg <= 1.0:
        raise NumericsError(
            f"pole formula outside validity (I0 <= 0): "
            f"2 U0^{wall.wall_order + 2} / A^2 = {arg:.6g} must exceed 1")
    log_arg = math.log(arg)
    I0 = 0.5 * log_arg
    R0 = wall.U0 - (wall.wall_order + 2) / (4.0 * wall.U0) * log_arg
    return Beta0(R0=R0, I0=I0)


@dataclass(frozen=True)
class DecoherenceScale:
    gamma: float
    t_d: float


def decoherence_time(beta0: Beta0, radius: float, mass: float = 1.0,
                     hbar: float = 1.0) -> DecoherenceScale:
    """Damping rate and time from the pole and the cavity size.

    An infinite radius is a legal input meaning no confinement scale:
    gamma = 0 and t_d = inf.
    """
    if not (radius > 0.0):
        raise ConfigError(f"radius must be positive, got {radius}")
    if not (mass > 0.0 and hbar > 0.0):
        raise ConfigError("mass and hbar must be positive")
    product = beta0.R0 * beta0.I0
    if math.isinf(radius):
        return DecoherenceScale(gamma=0.0, t_d=math.inf)
    if product <= 0.0:
        raise NumericsError(
            f"pole product R0 I0 = {product:.6g} is not positive; "
            "no damping time is defined")
    gamma = hbar * hbar * product / (2.0 * mass * radius * radius)
    return DecoherenceScale(gamma=gamma, t_d=hbar / gamma)


def radius_sweep(beta0: Beta0, radii, mass: float = 1.0, hbar: float = 1.0):
    """(gamma, t_d) arrays over a sequence of radii (inf allowed)."""
    radii = np.asarray(list(radii), dtype=float)
    gammas = np.empty_like(radii)
    times = np.empty_like(radii)
    for i, a in enumerate(radii):
        res = decoherence_time(beta0, float(a), mass=mass, hbar=hbar)
        gammas[i] = res.gamma
        times[i] = res.t_d
    return gammas, times
