import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chirpspdc.biphoton import JafContext
from chirpspdc.crystal import CrystalConfig, solve_central_period
from chirpspdc.pump import PumpConfig

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

PERIOD_25C = solve_central_period(0.8, 25.0)


def make_ctx(D=0.0, T=25.0, L=5000.0, fwhm=0.001, beta=0.0, W=100.0):
    return JafContext(
        pump=PumpConfig(fwhm=fwhm, beta=beta, Wx=W, Wy=W),
        crystal=CrystalConfig(length_L=L, chirp_D=D, period_Lambda_c=PERIOD_25C, temperature_T=T),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
