"""Space-time widths of FJ versus outer grid resolution, unchirped and chirped.

The conjugate-grid step is 2 pi / (outer span), so the widths here are only
resolved when they exceed a few steps; the printout makes that visible.
"""
import argparse

from chirpspdc.biphoton import JafContext
from chirpspdc.crystal import CrystalConfig, solve_central_period
from chirpspdc.observables import ObservableRequest, RangeTooSmallError, extract_widths, joint_spectrum, spacetime_map
from chirpspdc.pump import PumpConfig

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--outer", type=int, nargs="+", default=[64, 128])
    args = ap.parse_args()
    period = solve_central_period(0.8, 25.0)
    for n in args.outer:
        for D in (0.0, 2e-6):
            ctx = JafContext(PumpConfig(fwhm=0.001), CrystalConfig(chirp_D=D, period_Lambda_c=period))
            req = ObservableRequest(k_xs=(-0.45, 0.45, n), inner_counts=(64, 64)).resolve(ctx)
            req = ObservableRequest(req.k_xs, (req.omega_i[0], req.omega_i[1], n), req.inner_counts)
            fj = spacetime_map(joint_spectrum(req, ctx))
            try:
                dx, dt = extract_widths(fj.magnitude())
                res = f"dx {dx:8.3f} um  dt {dt:7.3f} fs"
            except RangeTooSmallError as exc:
                res = str(exc)
            print(f"outer {n:4d}  D={D:g}  {res}  (steps {fj.axis1.step:.2f} um, {fj.axis2.step:.2f} fs)", flush=True)
