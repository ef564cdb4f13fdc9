"""Received-power scaling of a single-user, single-antenna link via one RIS sector.

With one sector switched fully on (``|phi| = 1`` on its ``M`` antennas) and
phases matched to LoS channels, the received power is ``P_T M^2 / zeta``.
The functions below evaluate this for both element patterns, the average
over a uniformly placed user, and the cosine-of-mean upper bound on that
average.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import IDEALIZED, PATTERN_KINDS, RadiationPattern, alpha_for_sectors
from .errors import DomainError


@dataclass(frozen=True)
class ScalingScenario:
    """Single-user link budget with the transmitter on sector-1 boresight."""

    P_T: float
    M: int
    L: int
    d_IT: float
    d_IU: float
    wavelength: float
    G_T: float = 1.0
    G_U: float = 1.0
    pattern: str = IDEALIZED

    def __post_init__(self):
        if self.P_T <= 0:
            raise DomainError("P_T must be positive")
        if self.pattern not in PATTERN_KINDS:
            raise DomainError(f"unknown pattern {self.pattern!r}")
        if self.L < 2 or self.M < 1:
            raise DomainError("need L >= 2 and M >= 1")

    @property
    def radiation(self) -> RadiationPattern:
        return RadiationPattern(self.pattern, self.L)

    def _free_space(self) -> float:
        # P_T M^2 lambda^4 G_T G_U / (4^3 pi^4 d_IT^2 d_IU^2)
        return (self.P_T * self.M ** 2 * self.wavelength ** 4 * self.G_T * self.G_U
                / (4.0 ** 3 * math.pi ** 4 * self.d_IT ** 2 * self.d_IU ** 2))


def max_received_power(P_T: float, zeta: float, M: int) -> float:
    """``P_T M^2 / zeta``: power with all ``M`` sector antennas phase-aligned."""
    if P_T <= 0 or zeta <= 0 or M <= 0:
        raise DomainError("P_T, zeta and M must be positive")
    return P_T * M ** 2 / zeta


def matched_phases(h_ui, h_it) -> np.ndarray:
    """Phases aligning every term of ``h_ui^H diag(phi) h_it``."""
    return -np.angle(np.conj(h_ui) * h_it)


def received_power(P_T: float, zeta: float, h_ui, phases, h_it) -> float:
    """``P_T / zeta * |h_ui^H diag(exp(j phases)) h_it|^2`` for one active sector."""
    s = np.sum(np.conj(h_ui) * np.exp(1j * np.asarray(phases)) * h_it)
    return float(P_T / zeta * abs(s) ** 2)


def received_power_idealized(scn: ScalingScenario) -> float:
    return scn._free_space() / (1.0 - math.cos(math.pi / scn.L)) ** 2


def received_power_practical(scn: ScalingScenario, theta_IU):
    """Practical-pattern power for a user at elevation ``theta_IU`` (scalar or array)."""
    theta = np.asarray(theta_IU, dtype=float)
    if np.any(theta < 0) or np.any(theta > math.pi / scn.L + 1e-12):
        raise DomainError(f"theta_IU outside [0, pi/{scn.L}]")
    a = alpha_for_sectors(scn.L)
    p = scn._free_space() * (a + 1.0) ** 2 * np.cos(theta) ** a
    return float(p) if p.ndim == 0 else p


def practical_upper_bound(scn: ScalingScenario) -> float:
    """Bound on the average practical power: cosine evaluated at the mean elevation."""
    a = alpha_for_sectors(scn.L)
    return scn._free_space() * (a + 1.0) ** 2 * math.cos(math.pi / (2 * scn.L)) ** a


def monte_carlo_average(scn: ScalingScenario, trials: int, rng: np.random.Generator):
    """Sample mean and standard error of the received power over user placements.

    The user elevation is drawn from ``U(0, pi / L)``.  When the gain does not
    depend on the elevation (idealized pattern, or the practical one at
    ``L = 2``) the exact value is returned with zero error.
    """
    if trials < 1:
        raise DomainError("need at least one trial")
    if scn.pattern == IDEALIZED:
        return received_power_idealized(scn), 0.0
    if alpha_for_sectors(scn.L) == 0.0:
        # omnidirectional in elevation: every placement gives the same power
        return received_power_practical(scn, 0.0), 0.0
    theta = rng.uniform(0.0, math.pi / scn.L, size=trials)
    p = np.atleast_1d(received_power_practical(scn, theta))
    se = float(p.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(p.mean()), se
