"""Sector/cell index algebra and RIS coefficient containers.

The RIS has ``L`` sectors of ``M`` antennas each.  Antenna ``i`` (1-based)
belongs to sector ``ceil(i / M)`` and to cell ``((i - 1) mod M) + 1``.  All
public functions take and return 1-based antenna, cell and sector ids; the
arrays themselves are stored 0-based in sector-major order so that
``phi.reshape(L, M)[l, m]`` is the coefficient of sector ``l + 1`` in cell
``m + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolation, DomainError

TWO_PI = 2.0 * np.pi

# slack for |phi|^2 landing a few ulps outside [0, 1]
_BETA_SLACK = 1e-12


@dataclass(frozen=True)
class SectorLayout:
    """Partition of ``L * M`` RIS antennas into sectors and cells.

    Parameters
    ----------
    L : int
        Number of sectors, at least 2.
    M : int
        Cells per RIS, i.e. antennas per sector.
    Mx, My : int, optional
        UPA dimensions of one sector.  Defaults to an ``M x 1`` array.
    """

    L: int
    M: int
    Mx: int = 0
    My: int = 0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise DomainError(f"need L >= 2 sectors, got {self.L}")
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"need M >= 1 cells, got {self.M}")
        if self.Mx == 0 and self.My == 0:
            object.__setattr__(self, "Mx", self.M)
            object.__setattr__(self, "My", 1)
        elif self.My == 0:
            object.__setattr__(self, "My", self.M // self.Mx if self.Mx else 0)
        elif self.Mx == 0:
            object.__setattr__(self, "Mx", self.M // self.My)
        if self.Mx * self.My != self.M:
            raise DomainError(f"UPA {self.Mx}x{self.My} does not hold M={self.M} antennas")

    @property
    def size(self) -> int:
        """Total antenna count ``L * M``."""
        return self.L * self.M


def cell_indices(layout: SectorLayout, m: int) -> list[int]:
    """Antenna ids of cell ``m``: ``[m, M + m, ..., (L - 1) M + m]``."""
    if not 1 <= m <= layout.M:
        raise DomainError(f"cell id {m} outside 1..{layout.M}")
    return [l * layout.M + m for l in range(layout.L)]


def sector_indices(layout: SectorLayout, l: int) -> list[int]:
    """Antenna ids of sector ``l``: ``[(l - 1) M + 1, ..., l M]``."""
    if not 1 <= l <= layout.L:
        raise DomainError(f"sector id {l} outside 1..{layout.L}")
    return list(range((l - 1) * layout.M + 1, l * layout.M + 1))


@dataclass(frozen=True)
class Codebook:
    """Uniform amplitude-square and phase codebooks.

    ``A`` bits give the amplitude-square grid ``{a / (2**A - 1)}`` and ``B``
    bits the phase grid ``{2 pi b / 2**B}``.
    """

    A: int
    B: int

    def __post_init__(self):
        if self.A < 1 or self.B < 1:
            raise DomainError(f"codebook needs A, B >= 1, got A={self.A}, B={self.B}")

    @property
    def amp_levels(self) -> int:
        """Number of amplitude steps, ``2**A - 1``."""
        return 2 ** self.A - 1

    @property
    def phase_levels(self) -> int:
        return 2 ** self.B

    @property
    def delta_a(self) -> float:
        return 1.0 / self.amp_levels

    @property
    def delta_b(self) -> float:
        return TWO_PI / self.phase_levels

    @property
    def amplitudes(self) -> np.ndarray:
        return np.arange(self.amp_levels + 1) / self.amp_levels

    @property
    def phases(self) -> np.ndarray:
        return TWO_PI * np.arange(self.phase_levels) / self.phase_levels


def canonical_phase(theta):
    """Reduce phases into ``[0, 2 pi)``."""
    out = np.mod(theta, TWO_PI)
    # np.mod can return exactly 2 pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RisConfiguration:
    """The ``L * M`` RIS coefficients ``phi_i = sqrt(beta_i) exp(j theta_i)``.

    Discrete configurations additionally carry the integer grid indices
    ``amp_grid`` (multiples of ``1 / (2**A - 1)``) and ``phase_grid``
    (multiples of ``2 pi / 2**B``) together with the codebook that produced
    them, so cell sums can be checked in exact integer arithmetic.
    """

    phi: np.ndarray
    amp_grid: np.ndarray | None = None
    phase_grid: np.ndarray | None = None
    codebook: Codebook | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen(self.phi, complex).ravel())
        if self.amp_grid is not None:
            object.__setattr__(self, "amp_grid", _frozen(self.amp_grid, np.int64).ravel())
            object.__setattr__(self, "phase_grid", _frozen(self.phase_grid, np.int64).ravel())

    @classmethod
    def from_polar(cls, beta, theta) -> "RisConfiguration":
        beta = np.asarray(beta, dtype=float)
        return cls(np.sqrt(np.clip(beta, 0.0, None)) * np.exp(1j * np.asarray(theta, dtype=float)))

    @classmethod
    def from_grid(cls, amp_grid, phase_grid, codebook: Codebook) -> "RisConfiguration":
        """Build a discrete configuration from integer codeword indices."""
        a = np.asarray(amp_grid, dtype=np.int64)
        b = np.mod(np.asarray(phase_grid, dtype=np.int64), codebook.phase_levels)
        beta = a / codebook.amp_levels
        theta = TWO_PI * b / codebook.phase_levels
        return cls(np.sqrt(beta) * np.exp(1j * theta), a, b, codebook)

    @classmethod
    def equal_split(cls, layout: SectorLayout) -> "RisConfiguration":
        """``beta_i = 1/L`` and zero phase everywhere."""
        return cls(np.full(layout.size, np.sqrt(1.0 / layout.L), dtype=complex))

    @property
    def is_discrete(self) -> bool:
        return self.amp_grid is not None

    @property
    def beta(self) -> np.ndarray:
        if self.amp_grid is not None:
            return self.amp_grid / self.codebook.amp_levels
        return np.abs(self.phi) ** 2

    @property
    def theta(self) -> np.ndarray:
        if self.phase_grid is not None:
            return TWO_PI * self.phase_grid / self.codebook.phase_levels
        return canonical_phase(np.angle(self.phi))

    def sector_matrix(self, layout: SectorLayout) -> np.ndarray:
        """Coefficients as an ``(L, M)`` array, row ``l`` holding sector ``l + 1``."""
        return self.phi.reshape(layout.L, layout.M)

    def phi_sector(self, layout: SectorLayout, l: int) -> np.ndarray:
        """The diagonal ``Phi_l`` of sector ``l`` (1-based) as an ``M x M`` matrix."""
        return np.diag(self.sector_matrix(layout)[l - 1])


def _check_size(cfg, layout):
    if cfg.phi.size != layout.size:
        raise DomainError(f"configuration has {cfg.phi.size} entries, layout needs {layout.size}")


def validate_continuous(cfg: RisConfiguration, layout: SectorLayout) -> float:
    """Largest per-cell deviation ``|sum_{i in cell} beta_i - 1|``.

    Raises
    ------
    ConstraintViolation
        If some ``beta_i`` lies outside ``[0, 1]``.
    """
    _check_size(cfg, layout)
    beta = cfg.beta
    bad = np.flatnonzero((beta < -_BETA_SLACK) | (beta > 1.0 + _BETA_SLACK))
    if bad.size:
        i = int(bad[0])
        raise ConstraintViolation(f"beta_{i + 1} = {beta[i]!r} outside [0, 1]", index=i + 1)
    cell_sums = beta.reshape(layout.L, layout.M).sum(axis=0)
    return float(np.max(np.abs(cell_sums - 1.0)))


def discrete_violations(
    cfg: RisConfiguration, layout: SectorLayout, cb: Codebook, phase_tol: float = 1e-9
) -> list[str]:
    """List every way ``cfg`` fails the discrete constraint; empty when valid.

    Grid indices stored on ``cfg`` are used as-is when they come from the same
    codebook.  Otherwise they are recovered by rounding and each value must sit
    on its grid point to within ``1e-12`` (amplitude) or ``phase_tol`` radians.
    """
    _check_size(cfg, layout)
    problems = []
    levels = cb.amp_levels
    if cfg.is_discrete and cfg.codebook == cb:
        a = np.asarray(cfg.amp_grid)
        b = np.asarray(cfg.phase_grid)
        if not np.allclose(np.abs(cfg.phi) ** 2, a / levels, rtol=0, atol=1e-12):
            problems.append("stored amplitudes disagree with amplitude grid indices")
        ph_err = np.angle(cfg.phi * np.exp(-1j * TWO_PI * b / cb.phase_levels))
        if np.any((a > 0) & (np.abs(ph_err) > phase_tol)):
            problems.append("stored phases disagree with phase grid indices")
    else:
        beta = np.abs(cfg.phi) ** 2
        a = np.floor(beta * levels + 0.5).astype(np.int64)
        for i in np.flatnonzero(np.abs(beta - a / levels) > 1e-12):
            problems.append(f"beta_{i + 1} = {beta[i]!r} not in amplitude codebook")
        x = canonical_phase(np.angle(cfg.phi)) / cb.delta_b
        b = np.mod(np.floor(x + 0.5), cb.phase_levels).astype(np.int64)
        off = np.abs(x - np.floor(x + 0.5)) * cb.delta_b
        # phase of a zero coefficient is irrelevant
        for i in np.flatnonzero((off > phase_tol) & (a > 0)):
            problems.append(f"theta_{i + 1} not in phase codebook")
    if np.any(a < 0) or np.any(a > levels):
        problems.append("amplitude grid index outside 0..2^A-1")
    if np.any(b < 0) or np.any(b >= cb.phase_levels):
        problems.append("phase grid index outside 0..2^B-1")
    sums = a.reshape(layout.L, layout.M).sum(axis=0)
    for m in np.flatnonzero(sums != levels):
        problems.append(f"cell {m + 1} sums to {sums[m]}/{levels}, expected 1")
    return problems


def validate_discrete(cfg: RisConfiguration, layout: SectorLayout, cb: Codebook) -> bool:
    """True iff every coefficient is a codeword and every cell sums to one."""
    return not discrete_violations(cfg, layout, cb)


def assemble_stacked_phi(cfg: RisConfiguration, layout: SectorLayout) -> np.ndarray:
    """Vertical stack ``[Phi_1; ...; Phi_L]`` of the diagonal sector blocks.

    The result is ``LM x M``; its columns are orthonormal exactly when every
    cell satisfies the unit-power constraint.
    """
    _check_size(cfg, layout)
    P = cfg.sector_matrix(layout)
    out = np.zeros((layout.L, layout.M, layout.M), dtype=complex)
    idx = np.arange(layout.M)
    out[:, idx, idx] = P
    return out.reshape(layout.size, layout.M)
