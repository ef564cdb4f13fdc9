"""Antenna gains, cascaded path loss and Rician channel generation.

Two RIS element patterns are supported.  The idealized pattern is a flat
cone of half-angle ``pi / L``; the practical one is ``cos(theta) ** alpha``
with ``alpha`` chosen so the half-power beamwidth is ``2 pi / L``.  Both are
azimuth-symmetric, so azimuth angles only enter the LoS steering phases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .model import SectorLayout

SPEED_OF_LIGHT = 299_792_458.0

IDEALIZED = "idealized"
PRACTICAL = "practical"
PATTERN_KINDS = (IDEALIZED, PRACTICAL)

# finite Rician factors are capped here; kappa = inf gives the exact LoS term
KAPPA_CAP = 1e12

_ANGLE_SLACK = 1e-12


def alpha_for_sectors(L: int) -> float:
    """Exponent of the practical pattern giving a ``2 pi / L`` half-power beamwidth.

    Solves ``arccos(0.5 ** (1 / alpha)) = pi / L``.  For ``L = 2`` the
    equation has no finite solution (``cos(pi / 2) = 0``); the limit
    ``alpha = 0`` is returned, i.e. a constant gain of 2 over the hemisphere.
    """
    if L < 2:
        raise DomainError(f"need L >= 2 sectors, got {L}")
    if L == 2:
        return 0.0
    return math.log(0.5) / math.log(math.cos(math.pi / L))


def wavelength(frequency_hz: float) -> float:
    return SPEED_OF_LIGHT / frequency_hz


@dataclass(frozen=True)
class RadiationPattern:
    kind: str
    L: int

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise DomainError(f"unknown pattern kind {self.kind!r}")
        if self.L < 2:
            raise DomainError(f"need L >= 2 sectors, got {self.L}")

    @property
    def alpha(self) -> float:
        return alpha_for_sectors(self.L)

    @property
    def boresight_gain(self) -> float:
        return gain(self, 0.0)


def gain(p: RadiationPattern, theta):
    """Linear gain of one RIS element at elevation ``theta`` off boresight."""
    theta = np.asarray(theta, dtype=float)
    if p.kind == IDEALIZED:
        g = np.where(theta <= math.pi / p.L, 2.0 / (1.0 - math.cos(math.pi / p.L)), 0.0)
    else:
        a = p.alpha
        c = np.clip(np.cos(theta), 0.0, None)
        g = np.where(theta <= math.pi / 2, 2.0 * (a + 1.0) * c ** a, 0.0)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class LinkGeometry:
    """Large-scale geometry of the transmitter-RIS-user links.

    Per-user fields are length-``K`` arrays.  ``theta_IU`` / ``varphi_IU``
    may be left as ``None`` so that :func:`realize_channels` draws them.
    ``sector_of_user`` holds 1-based sector ids.
    """

    d_IT: float
    d_IU: np.ndarray
    wavelength: float
    theta_IT: float = 0.0
    theta_IU: np.ndarray | None = None
    sector_of_user: np.ndarray | None = None
    G_T: float = 1.0
    G_U: float = 1.0
    varphi_IT: float = 0.0
    varphi_IU: np.ndarray | None = None
    theta_T: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "d_IU", np.atleast_1d(np.asarray(self.d_IU, dtype=float)))
        for name in ("theta_IU", "varphi_IU", "sector_of_user"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.atleast_1d(np.asarray(v)))
        if self.d_IT <= 0 or np.any(self.d_IU <= 0):
            raise DomainError("distances must be positive")

    @property
    def K(self) -> int:
        return self.d_IU.size


def _check_elevation(theta, L, what):
    if theta < -_ANGLE_SLACK or theta > math.pi / L + _ANGLE_SLACK:
        raise DomainError(f"{what} = {theta!r} outside sector coverage [0, pi/{L}]")


def path_loss(p: RadiationPattern, g: LinkGeometry, k: int) -> float:
    """Cascaded transmitter-RIS-user path loss ``zeta_k`` of user ``k`` (1-based).

    ``zeta_k = (4 pi)^4 (d_IT d_IU)^2 / (lambda^4 G_T G_U G_I(theta_IT) G_I(theta_IU))``,
    which reduces to the closed forms of the idealized and practical patterns.
    """
    if g.theta_IU is None:
        raise DomainError("user elevations are unset")
    th_u = float(g.theta_IU[k - 1])
    _check_elevation(g.theta_IT, p.L, "theta_IT")
    _check_elevation(th_u, p.L, f"theta_IU[{k}]")
    d_iu = float(g.d_IU[k - 1])
    base = 4.0 ** 3 * math.pi ** 4 * g.d_IT ** 2 * d_iu ** 2 / (g.wavelength ** 4 * g.G_T * g.G_U)
    if p.kind == IDEALIZED:
        return base * (1.0 - math.cos(math.pi / p.L)) ** 2
    a = p.alpha
    return base / ((a + 1.0) ** 2 * math.cos(g.theta_IT) ** a * math.cos(th_u) ** a)


def path_losses(p: RadiationPattern, g: LinkGeometry) -> np.ndarray:
    return np.array([path_loss(p, g, k) for k in range(1, g.K + 1)])


def array_response(shape, theta: float, varphi: float = 0.0) -> np.ndarray:
    """Half-wavelength steering vector of a ULA (``shape`` int) or UPA (``(Mx, My)``).

    ULA entry ``n`` is ``exp(j pi n sin(theta))``; UPA entry ``(x, y)`` is
    ``exp(j pi (x sin(theta) cos(varphi) + y sin(theta) sin(varphi)))`` with
    0-based ``x, y`` and ``y`` running fastest in the flattened vector.
    """
    if isinstance(shape, (int, np.integer)):
        n = np.arange(shape)
        return np.exp(1j * np.pi * n * math.sin(theta))
    mx, my = shape
    x = np.arange(mx)[:, None]
    y = np.arange(my)[None, :]
    ph = np.pi * math.sin(theta) * (x * math.cos(varphi) + y * math.sin(varphi))
    return np.exp(1j * ph).ravel()


def sample_rician(rng: np.random.Generator, los, kappa: float) -> np.ndarray:
    """``sqrt(k/(k+1)) LoS + sqrt(1/(k+1)) NLoS`` with unit-variance CN(0, 1) NLoS."""
    los = np.asarray(los, dtype=complex)
    kappa = float(kappa)
    if kappa < 0:
        raise DomainError(f"Rician factor must be >= 0, got {kappa}")
    nlos = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)) / math.sqrt(2.0)
    if kappa == math.inf:
        # NLoS is still drawn so the generator stream does not depend on kappa
        return los.copy()
    kappa = min(kappa, KAPPA_CAP)
    return math.sqrt(kappa / (kappa + 1.0)) * los + math.sqrt(1.0 / (kappa + 1.0)) * nlos


def db_to_linear(db: float) -> float:
    return math.inf if db == math.inf else 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class RicianParams:
    """Rician factors (linear) of the transmitter-RIS and RIS-user links."""

    kappa_IT: float
    kappa_UI: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kappa_UI", np.atleast_1d(np.asarray(self.kappa_UI, dtype=float)))
        if self.kappa_IT < 0 or np.any(self.kappa_UI < 0):
            raise DomainError("Rician factors must be >= 0")

    @classmethod
    def from_db(cls, kappa_IT_db: float, kappa_UI_db, K: int) -> "RicianParams":
        ui = np.broadcast_to(np.asarray(kappa_UI_db, dtype=float), (K,))
        return cls(db_to_linear(kappa_IT_db), np.array([db_to_linear(v) for v in ui]))


@dataclass(frozen=True)
class ChannelRealization:
    """Small-scale fading plus path loss for one drop of users.

    ``H_IT`` is ``M x N`` (transmitter to sector 1), row ``k`` of ``h_UI`` is the
    ``M``-vector between user ``k``'s serving sector and the user, and ``zeta``
    holds the cascaded path losses.  Blocks towards non-serving sectors are
    identically zero and are not stored.
    """

    layout: SectorLayout
    H_IT: np.ndarray
    h_UI: np.ndarray
    zeta: np.ndarray
    sector_of_user: np.ndarray
    theta_IU: np.ndarray = field(default=None, compare=False)

    @property
    def N(self) -> int:
        return self.H_IT.shape[1]

    @property
    def K(self) -> int:
        return self.h_UI.shape[0]

    @property
    def h_eff(self) -> np.ndarray:
        """RIS-user vectors with the path loss folded in, ``h_k / sqrt(zeta_k)``."""
        return self.h_UI / np.sqrt(self.zeta)[:, None]

    def users_in_sector(self, l: int) -> np.ndarray:
        """0-based indices of the users served by sector ``l`` (1-based)."""
        return np.flatnonzero(self.sector_of_user == l)


def uniform_assignment(K: int, L: int) -> np.ndarray:
    """Contiguous blocks of ``K / L`` users per sector, 1-based sector ids."""
    if K % L:
        raise ConfigError(f"K={K} users cannot be split evenly over L={L} sectors")
    return np.repeat(np.arange(1, L + 1), K // L)


def realize_channels(
    rng: np.random.Generator,
    layout: SectorLayout,
    geometry: LinkGeometry,
    pattern: RadiationPattern,
    rician: RicianParams,
    N: int,
    K: int,
) -> ChannelRealization:
    """Draw one channel realization.

    Unset user elevations are drawn from ``U(0, pi / L)`` and unset user
    azimuths from ``U(0, 2 pi)``; an unset sector assignment is the uniform
    contiguous one.  Draw order is fixed (elevations, azimuths, ``H_IT``, then
    users in order) so a seed fully determines the realization.
    """
    if geometry.K != K:
        raise ConfigError(f"geometry describes {geometry.K} users, expected K={K}")
    if pattern.L != layout.L:
        raise ConfigError("pattern and layout disagree on L")
    L = layout.L
    sectors = geometry.sector_of_user
    if sectors is None:
        sectors = uniform_assignment(K, L)
    sectors = np.asarray(sectors, dtype=np.int64)
    if np.any(sectors < 1) or np.any(sectors > L):
        raise ConfigError("sector assignment outside 1..L")
    theta_iu = geometry.theta_IU
    if theta_iu is None:
        theta_iu = rng.uniform(0.0, math.pi / L, size=K)
    varphi_iu = geometry.varphi_IU
    if varphi_iu is None:
        varphi_iu = rng.uniform(0.0, 2.0 * math.pi, size=K)
    resolved = LinkGeometry(
        d_IT=geometry.d_IT, d_IU=geometry.d_IU, wavelength=geometry.wavelength,
        theta_IT=geometry.theta_IT, theta_IU=theta_iu, sector_of_user=sectors,
        G_T=geometry.G_T, G_U=geometry.G_U, varphi_IT=geometry.varphi_IT,
        varphi_IU=varphi_iu, theta_T=geometry.theta_T,
    )
    zeta = path_losses(pattern, resolved)

    upa = (layout.Mx, layout.My)
    los_it = np.outer(array_response(upa, geometry.theta_IT, geometry.varphi_IT),
                      array_response(N, geometry.theta_T).conj())
    H_IT = sample_rician(rng, los_it, rician.kappa_IT)
    h_UI = np.empty((K, layout.M), dtype=complex)
    for k in range(K):
        los = array_response(upa, float(theta_iu[k]), float(varphi_iu[k]))
        h_UI[k] = sample_rician(rng, los, rician.kappa_UI[k])
    return ChannelRealization(layout, H_IT, h_UI, zeta, sectors, np.asarray(theta_iu, dtype=float))
