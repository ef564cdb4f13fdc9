import math

import numpy as np
import pytest

from msris.channel import LinkGeometry, RadiationPattern, RicianParams, realize_channels, wavelength
from msris.model import SectorLayout

FREQ = 2.4e9
P_T_10DBM = 10 ** ((10 - 30) / 10)
NOISE_M80DBM = 10 ** ((-80 - 30) / 10)


def make_channel(L, M, seed, N=4, K=4, kind="idealized", kappa_db=0.0, My=1, d_IU=10.0, **geo):
    """Random channel drawn the same way the experiment runner draws it."""
    layout = SectorLayout(L, M, M // My, My)
    g = LinkGeometry(d_IT=100.0, d_IU=np.full(K, d_IU), wavelength=wavelength(FREQ), **geo)
    rng = np.random.default_rng(seed)
    return realize_channels(rng, layout, g, RadiationPattern(kind, L),
                            RicianParams.from_db(kappa_db, kappa_db, K), N, K)


def random_cell_phi(rng, L, M):
    """Random ``(L, M)`` coefficients with unit power per cell."""
    beta = rng.dirichlet(np.ones(L), size=M).T
    return np.sqrt(beta) * np.exp(1j * rng.uniform(0, 2 * math.pi, size=(L, M)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
