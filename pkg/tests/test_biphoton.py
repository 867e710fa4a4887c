import cmath
import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chirpspdc.biphoton import (
    XI_SWITCH,
    JafContext,
    _z_integral,
    chirped_profile,
    erf_difference_scaled,
    jaf,
    oracle_unchirped,
    phase_mismatch_xt,
    pmf,
    pmf_map,
    unchirped_profile,
)
from chirpspdc.crystal import CrystalConfig
from chirpspdc.dispersion import KinematicsError, PhotonMode, longitudinal_k, wavevector_magnitude
from chirpspdc.mathkit import Axis
from chirpspdc.observables import half_max_support, Spectrum1D
from chirpspdc.pump import PumpConfig

from conftest import PERIOD_25C, make_ctx
from oracles import random_modes


def collinear_degenerate(ctx):
    w = 0.5 * ctx.pump.omega_pc
    return PhotonMode(w), PhotonMode(w)


def test_xt_vanishes_at_design_point():
    s, i = collinear_degenerate(make_ctx())
    assert abs(phase_mismatch_xt(s, i, make_ctx())) < 1e-9


def test_xt_structure_in_transverse_momenta():
    # moving delta from the idler to the signal keeps k_t, so x_t changes only through the two k_z
    ctx = make_ctx()
    T = ctx.crystal.temperature_T
    s, i = PhotonMode(1.3, 0.2), PhotonMode(1.05, -0.17)
    d = 0.03
    s2, i2 = PhotonMode(1.3, 0.2 + d), PhotonMode(1.05, -0.17 - d)
    dz = (longitudinal_k(s2, T) - longitudinal_k(s, T)) + (longitudinal_k(i2, T) - longitudinal_k(i, T))
    change = phase_mismatch_xt(s2, i2, ctx) - phase_mismatch_xt(s, i, ctx)
    assert change == pytest.approx(-ctx.crystal.length_L * dz, rel=1e-9)


def test_bright_ridge_sits_in_main_lobe():
    ctx = make_ctx()
    wi = np.linspace(0.45, 1.9, 600)[:, None]
    kx = np.linspace(-0.45, 0.45, 301)[None, :]
    s, i = PhotonMode(ctx.pump.omega_pc - wi, kx), PhotonMode(wi, -kx)
    a = np.abs(jaf(s, i, ctx))
    r, c = np.unravel_index(np.argmax(a), a.shape)
    xt = phase_mismatch_xt(PhotonMode(ctx.pump.omega_pc - wi[r, 0], kx[0, c]), PhotonMode(wi[r, 0], -kx[0, c]), ctx)
    assert abs(xt) <= math.pi


def test_evanescent_mode_gives_zero():
    ctx = make_ctx(D=2e-6)
    w = 0.6
    k = wavevector_magnitude(w, 25.0)
    s, i = PhotonMode(ctx.pump.omega_pc - w, 0.1), PhotonMode(w, 1.01 * k)
    assert jaf(s, i, ctx) == 0
    with pytest.raises(KinematicsError):
        phase_mismatch_xt(s, i, ctx)


def test_far_detuned_pump_is_suppressed():
    ctx = make_ctx(D=2e-6)
    s, i = collinear_degenerate(ctx)
    far = PhotonMode(s.omega + 10 * ctx.pump.sigma)
    assert abs(jaf(far, i, ctx)) < 1e-40 * abs(jaf(s, i, ctx))


def test_jaf_matches_oracle_at_moderate_chirp(rng):
    ctx = make_ctx(D=2e-6)
    assert ctx.xi == pytest.approx(50.0)
    s, i = random_modes(rng, ctx, 10)
    a = jaf(s, i, ctx)
    b = oracle_unchirped(s, i, ctx)
    assert np.max(np.abs(a - b) / np.abs(b)) < 1e-6


@pytest.mark.parametrize("xi", [1e-1, 1e-2, 1e-3])
def test_small_chirp_approaches_oracle(xi):
    ctx = make_ctx(D=xi / 5000.0**2)
    s, i = PhotonMode(1.2, 0.05), PhotonMode(1.15, -0.05)
    a, b = jaf(s, i, ctx), oracle_unchirped(s, i, ctx)
    assert abs(a - b) / abs(b) < 1e-6


def test_unchirped_oracle_is_sinc():
    ctx = make_ctx()
    s, i = PhotonMode(1.2, 0.05), PhotonMode(1.15, -0.05)
    xt = phase_mismatch_xt(s, i, ctx)
    expected = -1 / math.sqrt(math.pi) * np.exp(-0.5j * xt) * np.sinc(xt / (2 * math.pi))
    expected = expected * abs(ctx.pump and 1) * np.exp(-((1.2 + 1.15 - ctx.pump.omega_pc) ** 2) / ctx.pump.sigma**2)
    assert oracle_unchirped(s, i, ctx) == pytest.approx(complex(expected), rel=1e-9)


def test_oracle_step_refinement():
    cr = CrystalConfig(chirp_D=2e-6, period_Lambda_c=PERIOD_25C)
    dk = cr.K0 + 0.004
    a = _z_integral(dk, cr)[0]
    b = _z_integral(dk, cr, min_segments=2 * 65536)[0]
    assert abs(a - b) < 1e-9 * abs(b)


def test_continuity_across_switch():
    s, i = PhotonMode(1.2, 0.05), PhotonMode(1.15, -0.05)
    vals = [jaf(s, i, make_ctx(D=XI_SWITCH * f / 5000.0**2)) for f in (1 - 1e-3, 1 + 1e-3)]
    assert abs(vals[0] - vals[1]) < 1e-5 * abs(vals[1])


def _literal_erf_form(rho, xi):
    # exp(i rho^2 / 4 xi) (erf z1 - erf z2) in extended precision, no rearrangement
    with mpmath.workdps(50):
        a = mpmath.exp(1j * mpmath.pi / 4)
        root = mpmath.sqrt(mpmath.mpf(xi))
        z1 = a * rho / (2 * root)
        z2 = a * (rho - 2 * xi) / (2 * root)
        return complex(mpmath.exp(1j * mpmath.mpf(rho) ** 2 / (4 * xi)) * (mpmath.erf(z1) - mpmath.erf(z2)))


@pytest.mark.parametrize("xi", [-125.0, -50.0, -3.0, 0.5, 50.0, 125.0])
@pytest.mark.parametrize("rho", [-300.0, -40.0, -1.0, 0.0, 2.5, 60.0, 400.0])
def test_stable_erf_difference_matches_literal(rho, xi):
    ref = _literal_erf_form(rho, xi)
    got = erf_difference_scaled(rho, xi)
    assert abs(got - ref) <= 1e-11 * abs(ref)


@pytest.mark.parametrize("xi", [-125.0, -7.0, 1e-3, 2.0, 50.0])
@pytest.mark.parametrize("rho", [-80.0, -3.0, 0.0, 10.0, 150.0])
def test_profile_is_the_chirped_phase_integral(rho, xi):
    with mpmath.workdps(30):
        f = lambda u: mpmath.exp(-1j * (rho * u + xi * u * u))
        pts = np.linspace(-1, 0, 65)
        ref = complex(mpmath.quad(f, list(pts)))
    assert abs(chirped_profile(rho, xi) - ref) <= 1e-10 * max(abs(ref), 1e-3)


def test_sinc_profile():
    assert unchirped_profile(0.0) == 1.0
    rho = 2 * math.pi
    assert abs(unchirped_profile(rho)) < 1e-15


modes = st.tuples(
    st.floats(0.5, 1.85), st.floats(-0.003, 0.003), st.floats(-0.4, 0.4), st.floats(-0.03, 0.03), st.floats(-0.05, 0.05)
)


@given(m=modes, D=st.sampled_from([0.0, 2e-6, -5e-6]))
def test_exchange_symmetry(m, D):
    wi, dw, kx, dk, ky = m
    ctx = make_ctx(D=D)
    s = PhotonMode(ctx.pump.omega_pc - wi + dw, kx, ky)
    i = PhotonMode(wi, -kx + dk, -ky)
    a, b = abs(jaf(s, i, ctx)), abs(jaf(i, s, ctx))
    # x_t cancels terms of size L k ~ 1e5, so it carries ~1e-11 absolute rounding;
    # near sinc zeros that dominates the relative error, hence the absolute floor
    assert b == pytest.approx(a, rel=1e-9, abs=1e-10)


@given(m=modes, D=st.sampled_from([0.0, 2e-6]))
def test_pump_chirp_is_pure_phase(m, D):
    wi, dw, kx, dk, ky = m
    s = PhotonMode(2.3545 - wi + dw, kx, ky)
    i = PhotonMode(wi, -kx + dk, -ky)
    a = abs(jaf(s, i, make_ctx(D=D, beta=0.0)))
    b = abs(jaf(s, i, make_ctx(D=D, beta=1e5)))
    assert b == pytest.approx(a, rel=1e-12, abs=1e-300)


def test_amplitude_scale_validation():
    with pytest.raises(ValueError):
        JafContext(amplitude_scale=0.0)
    with pytest.raises(ValueError):
        JafContext(amplitude_scale=complex("nan"))


def test_pmf_has_no_envelope():
    ctx = make_ctx(D=2e-6)
    s, i = PhotonMode(1.25, 0.1), PhotonMode(1.0, -0.1)
    ratio = jaf(s, i, ctx) / pmf(s, i, ctx)
    w = 1.25 + 1.0 - ctx.pump.omega_pc
    assert ratio == pytest.approx(math.exp(-(w**2) / ctx.pump.sigma**2), rel=1e-12)


def _symmetric_axes(ctx, half=0.6, n=241):
    wd = 0.5 * ctx.pump.omega_pc
    return Axis("omega_s", "rad/fs", wd - half, wd + half, n), Axis("omega_i", "rad/fs", wd - half, wd + half, n)


def test_pmf_map_peaks_at_degenerate_point():
    ctx = make_ctx(fwhm=0.01)
    a, b = _symmetric_axes(ctx)
    grid = pmf_map(a, b, ctx)
    c = a.count // 2
    assert grid.values[c, c] == pytest.approx(grid.values.max(), rel=1e-12)
    assert grid.flags["observable"] == "pmf"


def test_chirp_widens_pmf_along_antidiagonal():
    widths = []
    for D in (0.0, 3e-6):
        ctx = make_ctx(D=D, fwhm=0.01)
        a, b = _symmetric_axes(ctx)
        v = pmf_map(a, b, ctx).values
        anti = np.array([v[k, a.count - 1 - k] for k in range(a.count)])
        widths.append(half_max_support(Spectrum1D(b, anti)))
    assert widths[1] > 2 * widths[0]


def test_pmf_map_axis_swap_invariance():
    ctx = make_ctx(D=2e-6, fwhm=0.01)
    a = Axis("omega_s", "rad/fs", 0.7, 1.6, 60)
    b = Axis("omega_i", "rad/fs", 0.9, 1.5, 45)
    g1 = pmf_map(a, b, ctx).values
    g2 = pmf_map(replace(b, name="omega_s"), replace(a, name="omega_i"), ctx).values
    assert np.max(np.abs(g1 - g2.T)) <= 1e-12 * g1.max()


def test_noncollinear_pmf_dominates_collinear():
    ctx = make_ctx(fwhm=0.01)
    a, b = _symmetric_axes(ctx, n=61)
    col = pmf_map(a, b, ctx).values
    non = pmf_map(a, b, ctx, collinear=False, kx_scan=np.linspace(0, 0.5, 26)).values
    assert np.all(non >= col)
