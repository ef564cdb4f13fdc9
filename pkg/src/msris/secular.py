"""Sphere-constrained quadratic subproblem for one RIS cell.

Minimizes ``f(b) = b^T Psi b - 2 chi^T b`` subject to ``b^T b = 1``, where
``Psi = diag(nu)`` and ``chi >= 0``.  ``b`` holds the amplitude roots
``sqrt(beta_i)`` of the ``L`` antennas in the cell.  The minimizer is
``b = (Psi + mu I)^-1 chi`` with ``Psi + mu I`` PSD and ``mu`` the root of the
secular equation ``g(mu) = sum_l chi_l^2 / (nu_l + mu)^2 = 1``, bracketed by
``[sqrt(sum_{l in E} chi_l^2) - nu_min, ||chi|| - nu_min]`` where ``E`` is the
set of sectors attaining ``nu_min``.

Psi is diagonal, so its eigenvectors are coordinate axes and the rotated
``chi`` is just ``chi`` reordered by ascending ``nu``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

EIG_RTOL = 1e-12
MAX_BISECT = 200


def _diag(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    if psi.ndim == 2:
        if np.any(psi - np.diag(np.diag(psi))):
            raise DomainError("Psi must be diagonal")
        psi = np.diag(psi)
    return psi


def sphere_objective(psi, chi, b) -> float:
    """``b^T Psi b - 2 chi^T b``."""
    nu = _diag(psi)
    b = np.asarray(b, dtype=float)
    return float(b @ (nu * b) - 2.0 * np.asarray(chi, dtype=float) @ b)


def secular_function(psi, chi, mu: float) -> float:
    """``g(mu) = sum_l chi_l^2 / (nu_l + mu)^2``."""
    nu = _diag(psi)
    chi = np.asarray(chi, dtype=float)
    shifted = nu + mu
    if np.any(shifted <= 0):
        raise DomainError(f"mu = {mu!r} at or below a pole of the secular equation")
    return float(np.sum(chi ** 2 / shifted ** 2))


def _equal_set(nu_sorted):
    e1 = nu_sorted[0]
    return [i for i, e in enumerate(nu_sorted) if math.isclose(e, e1, rel_tol=EIG_RTOL, abs_tol=0.0)]


def mu_bounds(psi, chi):
    """Bracket ``(lower, upper)`` containing the secular root."""
    nu = _diag(psi)
    chi = np.asarray(chi, dtype=float)
    if not np.any(chi):
        raise DomainError("chi is zero; the secular equation has no root")
    order = np.argsort(nu, kind="stable")
    nu_s = nu[order].tolist()
    chi_s = chi[order].tolist()
    E = _equal_set(nu_s)
    lower = math.hypot(*(chi_s[i] for i in E)) - nu_s[0]
    upper = math.hypot(*chi_s) - nu_s[0]
    return lower, upper


def _g(nu, chi, mu):
    # ratio first: nu and chi can be tiny enough for their squares to underflow
    s = 0.0
    for e, c in zip(nu, chi):
        d = e + mu
        if d <= 0.0:
            return math.inf
        r = c / d
        s += r * r
    return s


def _solve(nu, chi, tol):
    """Core solver on plain float lists; returns ``(mu, b)`` with ``b`` a list."""
    L = len(nu)
    norm_chi = math.hypot(*chi)
    if norm_chi == 0.0:
        # no linear term: all power on the smallest-nu sector (lowest index on ties)
        j = min(range(L), key=lambda i: (nu[i], i))
        b = [0.0] * L
        b[j] = 1.0
        return -nu[j], b
    e1 = min(nu)
    E = [i for i in range(L) if math.isclose(nu[i], e1, rel_tol=EIG_RTOL, abs_tol=0.0)]
    chi_e = math.hypot(*(chi[i] for i in E))
    upper = norm_chi - e1
    if chi_e == 0.0:
        # chi vanishes on the bottom eigenspace: the pole at -e1 has zero residue
        rest = [i for i in range(L) if i not in E]
        g_pole = sum((chi[i] / (nu[i] - e1)) ** 2 for i in rest)
        if g_pole <= 1.0:
            b = [0.0] * L
            for i in rest:
                b[i] = chi[i] / (nu[i] - e1)
            b[E[0]] = math.sqrt(max(0.0, 1.0 - g_pole))
            return -e1, b
        lo, hi = -e1, upper
    else:
        lo, hi = chi_e - e1, upper
        if lo + e1 <= 0.0:
            # chi_e is below the resolution of e1; step just off the pole
            lo = math.nextafter(-e1, math.inf)
    if hi <= lo:
        mu = lo
    else:
        mu = hi
        g_hi = _g(nu, chi, hi)
        if abs(g_hi - 1.0) <= tol:
            mu = hi
        elif chi_e > 0.0 and abs(_g(nu, chi, lo) - 1.0) <= tol:
            mu = lo
        else:
            for _ in range(MAX_BISECT):
                mid = 0.5 * (lo + hi)
                # the bracket can no longer shrink in floating point
                if not lo < mid < hi:
                    break
                mu = mid
                gm = _g(nu, chi, mid)
                if abs(gm - 1.0) <= tol:
                    break
                if gm > 1.0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-14:
                    break
    b = [c / (e + mu) if c else 0.0 for c, e in zip(chi, nu)]
    s = math.hypot(*b)
    return mu, [x / s for x in b]


def solve_secular(psi, chi, tol: float = 1e-10):
    """Minimize ``b^T Psi b - 2 chi^T b`` on the unit sphere.

    Parameters
    ----------
    psi : array_like
        ``L`` diagonal entries ``nu_l >= 0`` or the ``L x L`` diagonal matrix.
    chi : array_like
        Nonnegative linear coefficients.
    tol : float
        Bisection stops once ``|g(mu) - 1| <= tol`` or the bracket is narrower
        than ``1e-14``.

    Returns
    -------
    mu : float
        Lagrange multiplier; ``Psi + mu I`` is PSD.
    b : ndarray
        Unit-norm, entrywise nonnegative minimizer (amplitude roots).

    Notes
    -----
    A zero ``chi`` puts all weight on the sector with smallest ``nu``.  When
    ``chi`` vanishes only on the smallest-``nu`` sectors and ``g`` stays below
    one up to the pole, the remaining norm is assigned to the first of them.
    """
    nu = _diag(psi)
    chi = np.asarray(chi, dtype=float)
    if np.any(chi < 0):
        raise DomainError("chi must be nonnegative")
    mu, b = _solve(nu.tolist(), chi.tolist(), tol)
    return mu, np.array(b)
