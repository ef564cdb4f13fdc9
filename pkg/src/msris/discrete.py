"""Codebook quantization and greedy repair of one RIS cell.

Rounding always goes half away from zero.  Amplitudes are handled as integer
multiples ``a`` of ``1 / (2**A - 1)`` so the per-cell sum constraint
``sum(a) == 2**A - 1`` is checked exactly.
"""
from __future__ import annotations

import math

import numpy as np

from .model import Codebook, canonical_phase


def round_half_away(x):
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_phase_index(theta, cb: Codebook) -> np.ndarray:
    """Grid index ``b`` of the nearest codeword ``2 pi b / 2**B``."""
    x = canonical_phase(theta) * (cb.phase_levels / (2.0 * math.pi))
    return np.mod(round_half_away(x), cb.phase_levels).astype(np.int64)


def quantize_phase(theta, cb: Codebook):
    """Nearest phase codeword, reduced into ``[0, 2 pi)``."""
    q = quantize_phase_index(theta, cb) * cb.delta_b
    return float(q) if np.ndim(q) == 0 else q


def quantize_amplitudes(beta, cb: Codebook) -> np.ndarray:
    """Integer grid multiples ``a_i = round(beta_i (2**A - 1))``."""
    beta = np.clip(np.asarray(beta, dtype=float), 0.0, 1.0)
    return round_half_away(beta * cb.amp_levels).astype(np.int64)


def cell_cost(beta, nu, chi_abs, cos_term):
    """``f_i(beta) = beta nu_i + 2 |chi_i| sqrt(beta) cos(angle(chi_i) - theta_i)``."""
    beta = np.asarray(beta, dtype=float)
    return beta * nu + 2.0 * chi_abs * np.sqrt(np.clip(beta, 0.0, None)) * cos_term


def adjust_amplitudes(a, nu, chi, theta, cb: Codebook, trace=None) -> np.ndarray:
    """Restore ``sum(beta) = 1`` in a cell after rounding.

    Parameters
    ----------
    a : array_like of int
        Rounded amplitude grid indices of the ``L`` antennas in the cell.
    nu, chi : array_like
        Cell coefficients (``nu`` real, ``chi`` complex).
    theta : array_like
        Phases already fixed for the cell; they enter the cost through
        ``cos(angle(chi) - theta)``.
    trace : list, optional
        If given, receives one ``(index, deltas)`` pair per greedy step.

    Returns
    -------
    ndarray of int
        Repaired grid indices summing to ``2**A - 1``.

    Notes
    -----
    With ``zeta = (2**A - 1) - sum(a)`` missing steps, a positive ``zeta``
    adds ``zeta`` increments one at a time, each to the antenna whose cost
    grows least; a negative one removes ``-zeta`` increments, each from the
    antenna whose cost drops most.  Saturated antennas are skipped and ties
    go to the lowest index.
    """
    a = np.array(a, dtype=np.int64)
    levels = cb.amp_levels
    nu = np.asarray(nu, dtype=float)
    chi = np.asarray(chi, dtype=complex)
    chi_abs = np.abs(chi)
    cos_term = np.cos(np.angle(chi) - np.asarray(theta, dtype=float))
    zeta = levels - int(a.sum())
    assert abs(zeta) <= a.size * levels, "amplitude repair infeasible"
    step = 1 if zeta > 0 else -1
    for _ in range(abs(zeta)):
        cur = cell_cost(a / levels, nu, chi_abs, cos_term)
        nxt = cell_cost((a + step) / levels, nu, chi_abs, cos_term)
        eligible = a < levels if step > 0 else a > 0
        delta = np.where(eligible, nxt - cur, np.inf)
        i = int(np.argmin(delta))
        if trace is not None:
            trace.append((i, delta.copy()))
        a[i] += step
    return a
