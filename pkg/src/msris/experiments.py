"""Seeded experiment sweeps producing plot-ready tables.

Trial ``t`` of every sweep point draws its channel from
``default_rng(seed + t)``, so different sector counts, patterns and RIS modes
are compared on paired realizations.  Work items run in a process pool and
are merged in sweep order, which makes the output independent of the number
of workers.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .channel import LinkGeometry, RadiationPattern, RicianParams, realize_channels, wavelength
from .config import ScenarioConfig
from .fp import CONTINUOUS, DISCRETE, SolverConfig, solve
from .model import SectorLayout
from .scaling import ScalingScenario, monte_carlo_average, practical_upper_bound
from .tables import Table

logger = logging.getLogger(__name__)


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


# ---------------------------------------------------------------------------
# received-power scaling
# ---------------------------------------------------------------------------

def _scaling_points(cfg: ScenarioConfig):
    for M in cfg.M:
        for L in cfg.L:
            yield "fixed_M", L, M
    for ML in cfg.ML:
        for L in cfg.L:
            yield "fixed_ML", L, ML // L


def run_scaling(cfg: ScenarioConfig) -> Table:
    """Average received power of one phase-aligned sector versus ``L``.

    The practical-pattern rows are Monte Carlo averages over ``mc_draws``
    user elevations; the draws of each row come from a generator seeded by
    ``(seed, L, M)``.  The upper bound is left empty for the idealized
    pattern, whose mean is exact.
    """
    lam = wavelength(cfg.frequency_hz)
    table = Table("scaling")
    for sweep, L, M in _scaling_points(cfg):
        for pattern in cfg.patterns:
            scn = ScalingScenario(cfg.P_T_W, M, L, cfg.d_IT, cfg.d_IU, lam, cfg.G_T, cfg.G_U, pattern)
            rng = np.random.default_rng([cfg.seed, L, M])
            mean, se = monte_carlo_average(scn, cfg.mc_draws, rng)
            bound = None if pattern == "idealized" else practical_upper_bound(scn)
            table.rows.append((sweep, L, M, L * M, pattern, mean, se, bound, cfg.mc_draws))
    return table


# ---------------------------------------------------------------------------
# sum-rate
# ---------------------------------------------------------------------------

def make_channel(cfg: ScenarioConfig, L: int, ML: int, pattern: str, seed: int):
    """Channel realization of one trial at one sweep point."""
    M = ML // L
    layout = SectorLayout(L, M, M // cfg.My, cfg.My)
    geometry = LinkGeometry(cfg.d_IT, np.full(cfg.K, cfg.d_IU), wavelength(cfg.frequency_hz),
                            theta_IT=cfg.theta_IT, G_T=cfg.G_T, G_U=cfg.G_U)
    rician = RicianParams.from_db(cfg.kappa_IT_dB, cfg.kappa_UI_dB, cfg.K)
    rng = np.random.default_rng(seed)
    return realize_channels(rng, layout, geometry, RadiationPattern(pattern, L), rician, cfg.N, cfg.K)


def _trial(args):
    cfg, ML, L, pattern, trial, trace = args
    seed = cfg.seed + trial
    ch = make_channel(cfg, L, ML, pattern, seed)
    out = []
    for mode in cfg.ris:
        solver = SolverConfig(cfg.P_T_W, cfg.noise_W, CONTINUOUS if mode.codebook is None else DISCRETE,
                              mode.codebook, max_outer=cfg.max_outer, outer_rtol=cfg.outer_rtol)
        _, _, report = solve(ch, solver)
        blocks = list(report.blocks) if trace else []
        out.append((report.sum_rate, report.iterations, report.converged, blocks))
    return seed, out


def _map(fn, items, workers):
    if workers == 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def run_sumrate(cfg: ScenarioConfig, trace: bool = False):
    """Monte Carlo sum-rate sweep over ``ML x L x pattern`` and RIS modes.

    Returns
    -------
    summary, trials, trajectory : Table
        Per-point aggregates, per-trial results and (when ``trace`` is set)
        the surrogate value after every block update.  ``trajectory`` is
        empty otherwise.
    """
    points = [(ML, L, p) for ML in cfg.ML for L in cfg.L for p in cfg.patterns]
    items = [(cfg, ML, L, p, t, trace) for ML, L, p in points for t in range(cfg.trials)]
    logger.info("running %d trials on %d worker(s)", len(items), cfg.workers)
    results = _map(_trial, items, cfg.workers)

    summary, trials, trajectory = Table("summary"), Table("trials"), Table("trajectory")
    for n, (ML, L, pattern) in enumerate(points):
        chunk = results[n * cfg.trials:(n + 1) * cfg.trials]
        for j, mode in enumerate(cfg.ris):
            rates, iters, conv = [], [], []
            for t, (seed, per_mode) in enumerate(chunk):
                rate, it, ok, blocks = per_mode[j]
                rates.append(rate)
                iters.append(it)
                conv.append(ok)
                trials.rows.append((ML, L, ML // L, pattern, mode.name, mode.A, mode.B, t, seed, rate, it, ok))
                for it_, block, value in blocks:
                    trajectory.rows.append((ML, L, pattern, mode.name, mode.A, mode.B, t, it_, block, value))
            mean, se = _mean_se(rates)
            summary.rows.append((ML, L, ML // L, pattern, mode.name, mode.A, mode.B, mean, se,
                                 float(np.mean(iters)), float(np.mean(conv)), cfg.trials))
            if not all(conv):
                logger.info("ML=%d L=%d %s %s: %d trial(s) hit the iteration cap",
                            ML, L, pattern, mode.name, conv.count(False))
    return summary, trials, trajectory
