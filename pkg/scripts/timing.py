"""Cost per outer x inner point of the joint-spectrum kernel, chirped and unchirped."""
import time

from chirpspdc.biphoton import JafContext
from chirpspdc.crystal import CrystalConfig, solve_central_period
from chirpspdc.observables import ObservableRequest, joint_spectrum
from chirpspdc.pump import PumpConfig

if __name__ == "__main__":
    period = solve_central_period(0.8, 25.0)
    for D in (0.0, 2e-6):
        ctx = JafContext(PumpConfig(fwhm=0.001), CrystalConfig(chirp_D=D, period_Lambda_c=period))
        for outer, inner in ((32, 32), (64, 64)):
            req = ObservableRequest(k_xs=(-0.45, 0.45, outer), omega_i=(0.43, 1.93, outer), inner_counts=(inner, inner))
            joint_spectrum(req, ctx)  # compile / warm up
            t = time.perf_counter()
            joint_spectrum(req, ctx)
            dt = time.perf_counter() - t
            per = dt / (outer * outer * inner * inner)
            print(f"D={D:g}  outer {outer}^2  inner {inner}^2  {dt:6.2f} s  {per * 1e9:6.1f} ns/point", flush=True)
