"""Independent reference computations shared by the unit and acceptance tests."""
import mpmath
import numpy as np

from chirpspdc.dispersion import PhotonMode


def mp_erf_series(z, terms=None, dps=80):
    """erf by its Maclaurin series in high precision arithmetic."""
    with mpmath.workdps(dps):
        z = mpmath.mpc(z)
        total = mpmath.mpc(0)
        term = z
        n = 0
        while True:
            add = term / (2 * n + 1)
            total += add
            n += 1
            if terms is not None and n >= terms:
                break
            if terms is None and n > 4 * abs(z) ** 2 + 10 and abs(add) < mpmath.mpf(10) ** (-45) * abs(total):
                break
            term *= -z * z / n
        return complex(2 / mpmath.sqrt(mpmath.pi) * total)


def random_modes(rng, ctx, n):
    """Propagating signal/idler pairs spread over the region the observables sample."""
    wpc = ctx.pump.omega_pc
    wi = rng.uniform(0.5, 1.85, n)
    ws = wpc - wi + rng.normal(0.0, ctx.pump.sigma, n)
    kxs = rng.uniform(-0.4, 0.4, n)
    kxi = -kxs + rng.normal(0.0, 1.0 / ctx.pump.Wx, n)
    kys = rng.uniform(-0.05, 0.05, n)
    return PhotonMode(ws, kxs, kys), PhotonMode(wi, kxi, -kys)
