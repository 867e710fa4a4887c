"""How far J(k_xs, omega_i) is from mirror symmetric about the degenerate idler frequency.

J integrates over the partner's transverse momentum for a fixed signal one, so
signal and idler are not treated alike once k_xs != 0; the asymmetry shrinks
as the pump waist grows and the transverse integration collapses.
"""
import argparse

import numpy as np

from chirpspdc.biphoton import JafContext
from chirpspdc.crystal import CrystalConfig, solve_central_period
from chirpspdc.observables import ObservableRequest, joint_spectrum
from chirpspdc.pump import PumpConfig


def asymmetry(J, level=0.5):
    v = J.values
    sup = v >= level * v.max()
    return float(np.max(np.abs(v - v[:, ::-1])[sup] / v[sup]))


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--waists", type=float, nargs="+", default=[100.0, 1000.0, 1e4])
    ap.add_argument("--chirp", type=float, default=0.0)
    ap.add_argument("--outer", type=int, default=96)
    args = ap.parse_args()
    period = solve_central_period(0.8, 25.0)
    req = ObservableRequest(k_xs=(-0.45, 0.45, args.outer), inner_counts=(64, 64))
    print("waist_um   asymmetry(50%)   asymmetry(1%)")
    for W in args.waists:
        ctx = JafContext(PumpConfig(fwhm=0.001, Wx=W, Wy=W), CrystalConfig(chirp_D=args.chirp, period_Lambda_c=period))
        lo, hi, _ = req.resolve(ctx).omega_i
        J = joint_spectrum(ObservableRequest(req.k_xs, (lo, hi, args.outer), req.inner_counts), ctx)
        print(f"{W:9.0f}   {asymmetry(J):.3e}        {asymmetry(J, 0.01):.3e}", flush=True)
