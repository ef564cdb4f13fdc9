"""Simulation of multi-sector beyond-diagonal RIS links.

Sector/cell geometry and constraints (:mod:`msris.model`), channels and
radiation patterns (:mod:`msris.channel`), received-power scaling
(:mod:`msris.scaling`), the fractional-programming sum-rate optimizer
(:mod:`msris.fp`) and the experiment runner (:mod:`msris.experiments`).
"""
from .channel import (
    ChannelRealization, LinkGeometry, RadiationPattern, RicianParams, path_loss, realize_channels,
    wavelength,
)
from .config import ScenarioConfig, load_config
from .errors import ConfigError, ConstraintViolation, DomainError, MsrisError
from .experiments import run_scaling, run_sumrate
from .fp import SolverConfig, SolveReport, solve, sum_rate
from .model import (
    Codebook, RisConfiguration, SectorLayout, validate_continuous, validate_discrete,
)
from .scaling import ScalingScenario, received_power_idealized, received_power_practical
from .secular import solve_secular
from .tables import Table, emit_csv, read_csv

__version__ = "0.1.0"
