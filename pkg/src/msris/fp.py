"""Fractional-programming block coordinate descent for MU-MISO sum-rate.

User ``k`` is served by sector ``l(k)`` and receives
``y_k = sum_p v_{k,p}^H phi_l s_p + n_k`` with
``v_{k,p} = (h_k^H diag(H_IT w_p))^H``.  The sum-rate is lifted to the
surrogate

    F = sum_k [ln(1 + iota_k) - iota_k + 2 sqrt(1 + iota_k) Re{tau_k^* a_kk}
               - |tau_k|^2 (sum_p |a_kp|^2 + sigma_k^2)] / ln 2,

``a_kp = v_{k,p}^H phi_l``, which is maximized block by block over
``(iota, tau)``, the precoder ``W`` and the RIS coefficients.  Dividing by
``ln 2`` keeps every block maximizer unchanged and makes ``F`` equal the
sum-rate in bits/s/Hz once ``iota`` and ``tau`` are at their optimum.

Internally RIS coefficients are an ``(L, M)`` complex array (row = sector)
and user indices are 0-based.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .discrete import adjust_amplitudes, quantize_amplitudes, quantize_phase_index
from .errors import ConfigError
from .model import Codebook, RisConfiguration, canonical_phase, validate_continuous, validate_discrete
from .secular import _solve as _solve_secular

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
CONTINUOUS = "continuous"
DISCRETE = "discrete"


# ---------------------------------------------------------------------------
# effective channels and rates
# ---------------------------------------------------------------------------

def effective_vectors(ch: ChannelRealization, W) -> np.ndarray:
    """``v[k, p] = h_k * conj(H_IT w_p)``, shape ``(K, K, M)``."""
    X = ch.H_IT @ np.asarray(W)  # M x K
    return ch.h_eff[:, None, :] * np.conj(X.T)[None, :, :]


def _phi_of_user(ch, phi):
    return phi[ch.sector_of_user - 1]  # K x M


def cross_gains(ch: ChannelRealization, phi, W) -> np.ndarray:
    """``a[k, p] = v_{k,p}^H phi_{l(k)} = g_k^H w_p``."""
    G = effective_rows(ch, phi)  # K x N, row k = g_k^H
    return G @ np.asarray(W)


def effective_rows(ch: ChannelRealization, phi) -> np.ndarray:
    """Row ``k`` is ``h_k^H Phi_{l(k)} H_IT`` (length ``N``)."""
    return (np.conj(ch.h_eff) * _phi_of_user(ch, phi)) @ ch.H_IT


def _as_phi(ch, cfg):
    if isinstance(cfg, RisConfiguration):
        return cfg.sector_matrix(ch.layout)
    return np.asarray(cfg, dtype=complex).reshape(ch.layout.L, ch.layout.M)


def _noise(noise, K):
    return np.broadcast_to(np.asarray(noise, dtype=float), (K,))


def sinr(ch: ChannelRealization, cfg, W, noise) -> np.ndarray:
    a2 = np.abs(cross_gains(ch, _as_phi(ch, cfg), W)) ** 2
    sig = np.diag(a2)
    return sig / (a2.sum(axis=1) - sig + _noise(noise, ch.K))


def sum_rate(ch: ChannelRealization, cfg, W, noise) -> float:
    """``sum_k log2(1 + SINR_k)`` in bits/s/Hz."""
    return float(np.sum(np.log2(1.0 + sinr(ch, cfg, W, noise))))


# ---------------------------------------------------------------------------
# auxiliary blocks
# ---------------------------------------------------------------------------

@dataclass
class AuxiliaryState:
    iota: np.ndarray
    tau: np.ndarray


def surrogate(ch: ChannelRealization, cfg, W, noise, aux: AuxiliaryState) -> float:
    """The lifted objective ``F`` in bits/s/Hz."""
    a = cross_gains(ch, _as_phi(ch, cfg), W)
    D = np.sum(np.abs(a) ** 2, axis=1) + _noise(noise, ch.K)
    iota, tau = aux.iota, aux.tau
    terms = (np.log1p(iota) - iota + 2.0 * np.sqrt(1.0 + iota) * np.real(np.conj(tau) * np.diag(a))
             - np.abs(tau) ** 2 * D)
    return float(np.sum(terms) / LN2)


def update_iota(ch: ChannelRealization, cfg, W, noise) -> np.ndarray:
    """``iota_k = SINR_k``, the maximizer of ``F`` with ``tau`` profiled out."""
    return sinr(ch, cfg, W, noise)


def update_tau(ch: ChannelRealization, cfg, W, noise, iota) -> np.ndarray:
    """``tau_k = sqrt(1 + iota_k) a_kk / (sum_p |a_kp|^2 + sigma_k^2)``."""
    a = cross_gains(ch, _as_phi(ch, cfg), W)
    D = np.sum(np.abs(a) ** 2, axis=1) + _noise(noise, ch.K)
    return np.sqrt(1.0 + np.asarray(iota)) * np.diag(a) / D


def update_precoder(ch: ChannelRealization, cfg, noise, aux: AuxiliaryState, P_T: float,
                    rtol: float = 1e-12) -> np.ndarray:
    """Maximize ``F`` over ``||W||_F^2 <= P_T`` with everything else fixed.

    ``w_k = sqrt(1 + iota_k) tau_k (sum_p |tau_p|^2 g_p g_p^H + mu I)^-1 g_k``
    with ``mu = 0`` when that already meets the budget and otherwise the
    ``mu > 0`` found by bisection for which ``||W||_F^2 = P_T``.
    """
    G = effective_rows(ch, _as_phi(ch, cfg)).conj().T  # N x K, column k = g_k
    t2 = np.abs(aux.tau) ** 2
    B = G * (np.sqrt(1.0 + aux.iota) * aux.tau)[None, :]
    if not np.any(B):
        return np.zeros_like(B)
    A = (G * t2[None, :]) @ G.conj().T
    lam, U = np.linalg.eigh(A)
    lam = np.clip(lam, 0.0, None)
    C2 = np.sum(np.abs(U.conj().T @ B) ** 2, axis=1)  # per-eigendirection energy

    def power(mu):
        return float(np.sum(C2 / (lam + mu) ** 2))

    tiny = 1e-13 * max(lam.max(), 1e-300)
    null = lam <= tiny
    if not np.any(null & (C2 > 1e-20 * C2.sum())) and np.sum(C2[~null] / lam[~null] ** 2) <= P_T:
        mu = 0.0
        inv = np.where(null, 0.0, 1.0 / np.where(null, 1.0, lam))
    else:
        lo, hi = 0.0, math.sqrt(C2.sum() / P_T)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            p = power(mid)
            if abs(p - P_T) <= rtol * P_T or not lo < mid < hi:
                break
            if p > P_T:
                lo = mid
            else:
                hi = mid
        mu = mid
        inv = 1.0 / (lam + mu)
    return U @ (inv[:, None] * (U.conj().T @ B))


def matched_filter(ch: ChannelRealization, cfg, P_T: float) -> np.ndarray:
    """``W`` proportional to the effective channels, scaled to ``||W||_F^2 = P_T``."""
    G = effective_rows(ch, _as_phi(ch, cfg)).conj().T
    nrm = np.linalg.norm(G)
    if nrm == 0:
        return np.zeros_like(G)
    return G * (math.sqrt(P_T) / nrm)


# ---------------------------------------------------------------------------
# RIS block
# ---------------------------------------------------------------------------

@dataclass
class SectorAggregates:
    """Per-sector linear term ``v_tilde`` (L x M) and quadratic term ``V`` (L x M x M)."""

    v_tilde: np.ndarray
    V: np.ndarray

    def objective(self, phi) -> float:
        """``sum_l 2 Re{v_tilde_l^H phi_l} - phi_l^H V_l phi_l`` (to be maximized)."""
        phi = np.asarray(phi)
        lin = 2.0 * np.real(np.sum(np.conj(self.v_tilde) * phi))
        quad = np.real(np.einsum("lm,lmn,ln->", np.conj(phi), self.V, phi))
        return float(lin - quad)


def sector_aggregates(ch: ChannelRealization, W, aux: AuxiliaryState) -> SectorAggregates:
    v = effective_vectors(ch, W)  # K x K x M
    L, M = ch.layout.L, ch.layout.M
    vt = np.zeros((L, M), dtype=complex)
    V = np.zeros((L, M, M), dtype=complex)
    w_lin = np.sqrt(1.0 + aux.iota) * aux.tau
    t2 = np.abs(aux.tau) ** 2
    for k in range(ch.K):
        l = ch.sector_of_user[k] - 1
        vt[l] += w_lin[k] * v[k, k]
        V[l] += t2[k] * (v[k].T @ v[k].conj())
    return SectorAggregates(vt, V)


@dataclass
class CellCoefficients:
    """``chi`` (complex) and ``nu`` (real) of the ``L`` antennas in one cell."""

    chi: np.ndarray
    nu: np.ndarray

    def cost(self, phi) -> float:
        """``sum_i nu_i |phi_i|^2 + 2 Re{phi_i^* chi_i}`` (to be minimized)."""
        phi = np.asarray(phi)
        return float(np.sum(self.nu * np.abs(phi) ** 2 + 2.0 * np.real(np.conj(phi) * self.chi)))


def cell_coefficients(agg: SectorAggregates, phi, m: int) -> CellCoefficients:
    """Coefficients of cell ``m`` (1-based) with all other cells held at ``phi``."""
    j = m - 1
    phi = np.asarray(phi)
    row = agg.V[:, j, :]
    diag = row[:, j]
    chi = np.sum(row * phi, axis=1) - diag * phi[:, j] - agg.v_tilde[:, j]
    return CellCoefficients(chi, np.real(diag).copy())


def continuous_phase_update(chi, previous=None) -> np.ndarray:
    """``theta_i = angle(chi_i) + pi`` in ``[0, 2 pi)``; zero ``chi_i`` keeps ``previous``."""
    chi = np.asarray(chi, dtype=complex)
    theta = canonical_phase(np.angle(chi) + np.pi)
    if previous is not None:
        theta = np.where(chi == 0, canonical_phase(previous), theta)
    return theta


def _continuous_cell(nu, chi, phi_old, tol):
    """Exact minimizer of the cell cost on ``sum |phi_i|^2 = 1``."""
    chi_abs = np.abs(chi)
    if not np.any(chi_abs):
        return phi_old
    theta = continuous_phase_update(chi, np.angle(phi_old))
    _, b = _solve_secular(nu.tolist(), chi_abs.tolist(), tol)
    return np.asarray(b) * np.exp(1j * theta)


def _discrete_cell(nu, chi, phi_old, cb, tol):
    """Quantized phases, relaxed amplitudes against them, round, then repair."""
    theta_star = continuous_phase_update(chi, np.angle(phi_old))
    b_idx = quantize_phase_index(theta_star, cb)
    theta = b_idx * cb.delta_b
    # effective linear weight under the quantized phases, clipped at 0 for safety
    lin = np.clip(-np.abs(chi) * np.cos(np.angle(chi) - theta), 0.0, None)
    _, b = _solve_secular(nu.tolist(), lin.tolist(), tol)
    a = quantize_amplitudes(np.asarray(b) ** 2, cb)
    a = adjust_amplitudes(a, nu, chi, theta, cb)
    return a, b_idx


def _sweep(agg, phi, mode, cb, tol, grids):
    """One Gauss-Seidel pass over the cells, updating ``phi`` in place."""
    V, vt = agg.V, agg.v_tilde
    L, M = phi.shape
    R = np.einsum("lmn,ln->lm", V, phi)
    rows = np.arange(L)
    for j in range(M):
        nu = np.real(V[rows, j, j])
        old = phi[:, j].copy()
        chi = R[:, j] - V[rows, j, j] * old - vt[:, j]
        if mode == CONTINUOUS:
            new = _continuous_cell(nu, chi, old, tol)
        else:
            a, b_idx = _discrete_cell(nu, chi, old, cb, tol)
            grids[0][:, j] = a
            grids[1][:, j] = b_idx
            new = np.sqrt(a / cb.amp_levels) * np.exp(1j * b_idx * cb.delta_b)
        d = new - old
        if np.any(d):
            R += V[:, :, j] * d[:, None]
            phi[:, j] = new


def design_ris(agg: SectorAggregates, phi0, mode=CONTINUOUS, cb: Codebook | None = None,
               max_sweeps: int = 50, rtol: float = 1e-6, secular_tol: float = 1e-10,
               history=None):
    """Cell-by-cell RIS update, repeated until the RIS objective settles.

    Returns ``(phi, grids)``; ``grids`` is ``None`` in continuous mode and the
    ``(amp, phase)`` integer index arrays in discrete mode.  ``history``, if
    given, receives the RIS objective before the first and after every sweep.
    """
    if mode == DISCRETE and cb is None:
        raise ConfigError("discrete RIS design needs a codebook")
    phi = np.array(phi0, dtype=complex)
    L, M = phi.shape
    grids = None
    if mode == DISCRETE:
        grids = (np.zeros((L, M), dtype=np.int64), np.zeros((L, M), dtype=np.int64))
    obj = agg.objective(phi)
    if history is not None:
        history.append(obj)
    for _ in range(max_sweeps):
        before = phi.copy()
        _sweep(agg, phi, mode, cb, secular_tol, grids)
        new_obj = agg.objective(phi)
        if history is not None:
            history.append(new_obj)
        settled = abs(new_obj - obj) < rtol * max(abs(obj), 1e-300)
        obj = new_obj
        if settled or np.array_equal(before, phi):
            break
    return phi, grids


def design_ris_continuous(agg: SectorAggregates, phi0, **kw):
    return design_ris(agg, phi0, CONTINUOUS, **kw)[0]


def design_ris_discrete(agg: SectorAggregates, phi0, cb: Codebook, **kw):
    return design_ris(agg, phi0, DISCRETE, cb, **kw)


# ---------------------------------------------------------------------------
# outer loop
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    P_T: float
    noise: float
    mode: str = CONTINUOUS
    codebook: Codebook | None = None
    max_outer: int = 200
    outer_rtol: float = 1e-4
    max_sweeps: int = 50
    sweep_rtol: float = 1e-6
    secular_tol: float = 1e-10

    def __post_init__(self):
        if self.mode not in (CONTINUOUS, DISCRETE):
            raise ConfigError(f"unknown RIS mode {self.mode!r}")
        if self.mode == DISCRETE and self.codebook is None:
            raise ConfigError("discrete mode needs a codebook")
        if self.P_T <= 0 or self.noise <= 0:
            raise ConfigError("P_T and noise power must be positive")


@dataclass
class SolveReport:
    """Trajectory and diagnostics of one BCD run.

    ``blocks`` lists ``(iteration, block, surrogate)`` after every block update,
    where block is ``"aux"`` (iota and tau), ``"precoder"`` or ``"ris"``.
    """

    sum_rates: list = field(default_factory=list)
    blocks: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    sum_rate: float = 0.0
    power_residual: float = 0.0
    constraint_residual: float = 0.0
    wall_time: float = 0.0

    @property
    def surrogate_trajectory(self) -> np.ndarray:
        return np.array([v for _, _, v in self.blocks])


def solve(ch: ChannelRealization, config: SolverConfig, phi0=None, W0=None):
    """Run the BCD until the sum-rate settles.

    Starts from equal amplitudes and zero phases with matched-filter
    precoding unless ``phi0`` / ``W0`` are given.  Returns
    ``(RisConfiguration, W, SolveReport)``; the returned pair is the best
    iterate by sum-rate (the discrete mode is not monotone).
    """
    t0 = time.perf_counter()
    layout = ch.layout
    noise = _noise(config.noise, ch.K)
    phi = (np.full((layout.L, layout.M), math.sqrt(1.0 / layout.L), dtype=complex)
           if phi0 is None else _as_phi(ch, phi0).copy())
    W = matched_filter(ch, phi, config.P_T) if W0 is None else np.array(W0, dtype=complex)
    report = SolveReport()
    best = (-math.inf, phi.copy(), W.copy(), None)
    grids = None
    rate = sum_rate(ch, phi, W, noise)
    report.sum_rates.append(rate)
    for it in range(1, config.max_outer + 1):
        iota = update_iota(ch, phi, W, noise)
        tau = update_tau(ch, phi, W, noise, iota)
        aux = AuxiliaryState(iota, tau)
        report.blocks.append((it, "aux", surrogate(ch, phi, W, noise, aux)))
        W = update_precoder(ch, phi, noise, aux, config.P_T)
        report.blocks.append((it, "precoder", surrogate(ch, phi, W, noise, aux)))
        agg = sector_aggregates(ch, W, aux)
        phi, grids = design_ris(agg, phi, config.mode, config.codebook, config.max_sweeps,
                                config.sweep_rtol, config.secular_tol)
        report.blocks.append((it, "ris", surrogate(ch, phi, W, noise, aux)))
        new_rate = sum_rate(ch, phi, W, noise)
        report.sum_rates.append(new_rate)
        report.iterations = it
        if new_rate > best[0]:
            best = (new_rate, phi.copy(), W.copy(), None if grids is None else (grids[0].copy(), grids[1].copy()))
        if abs(new_rate - rate) < config.outer_rtol * max(abs(rate), 1e-300):
            report.converged = True
            rate = new_rate
            break
        rate = new_rate
    if not report.converged:
        logger.info("BCD stopped at the %d-iteration cap", config.max_outer)
    rate, phi, W, grids = best
    if grids is None:
        cfg = RisConfiguration(phi.ravel())
        report.constraint_residual = validate_continuous(cfg, layout)
    else:
        cfg = RisConfiguration.from_grid(grids[0].ravel(), grids[1].ravel(), config.codebook)
        report.constraint_residual = 0.0 if validate_discrete(cfg, layout, config.codebook) else math.inf
    report.sum_rate = rate
    report.power_residual = float(np.linalg.norm(W) ** 2 - config.P_T)
    report.wall_time = time.perf_counter() - t0
    return cfg, W, report


def baseline_sum_rate(ch: ChannelRealization, P_T: float, noise, rng: np.random.Generator) -> float:
    """Random phases, equal amplitudes ``1/L`` and matched-filter precoding."""
    L, M = ch.layout.L, ch.layout.M
    phi = math.sqrt(1.0 / L) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(L, M)))
    W = matched_filter(ch, phi, P_T)
    return sum_rate(ch, phi, W, noise)
