"""Closed-form joint amplitude for a linearly chirped QPM crystal, plus its brute-force check."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .crystal import CrystalConfig, chirp_strength, local_spatial_frequency
from .dispersion import DispersionModel, KinematicsError, PhotonMode, _kz, load_material, wavevector_magnitude
from .mathkit import SQRT_PI, Axis, ComplexGrid2D, faddeeva
from .pump import PumpConfig, envelope, spatial_factor

XI_SWITCH = 1e-6
ROOT4_M1 = cmath.exp(0.25j * math.pi)  # (-1)^(1/4)
ROOT4_M1_CUBED = cmath.exp(0.75j * math.pi)  # (-1)^(3/4)


@dataclass(frozen=True)
class JafContext:
    pump: PumpConfig = field(default_factory=PumpConfig)
    crystal: CrystalConfig = field(default_factory=CrystalConfig)
    dispersion: DispersionModel = field(default_factory=load_material)
    amplitude_scale: complex = 1.0

    def __post_init__(self):
        s = complex(self.amplitude_scale)
        if s == 0 or not cmath.isfinite(s):
            raise ValueError("amplitude_scale must be finite and nonzero")

    @property
    def xi(self) -> float:
        return chirp_strength(self.crystal)


def _mismatch_parts(signal: PhotonMode, idler: PhotonMode, ctx: JafContext):
    """(k_p, k_p - k_zs - k_zi - k_t^2 / 2 k_p) with nan for evanescent modes."""
    T = ctx.crystal.temperature_T
    model = ctx.dispersion
    omega_p = np.asarray(signal.omega) + np.asarray(idler.omega)
    kp = wavevector_magnitude(omega_p, T, model)
    kzs = _kz(wavevector_magnitude(signal.omega, T, model), np.asarray(signal.kx), np.asarray(signal.ky))
    kzi = _kz(wavevector_magnitude(idler.omega, T, model), np.asarray(idler.kx), np.asarray(idler.ky))
    ktx = np.asarray(signal.kx) + np.asarray(idler.kx)
    kty = np.asarray(signal.ky) + np.asarray(idler.ky)
    kt2 = ktx * ktx + kty * kty
    return kp, kp - kzs - kzi - kt2 / (2 * kp)


def _xt(signal, idler, ctx):
    _, dk = _mismatch_parts(signal, idler, ctx)
    return ctx.crystal.length_L * (dk - ctx.crystal.K0)


def phase_mismatch_xt(signal: PhotonMode, idler: PhotonMode, ctx: JafContext):
    """x_t = L (k_p - k_zs - k_zi - 2 pi / Lambda_c - k_t^2 / 2 k_p), pump k at omega_s + omega_i."""
    xt = _xt(signal, idler, ctx)
    if np.any(np.isnan(xt)):
        raise KinematicsError("evanescent signal or idler mode")
    return xt if np.ndim(xt) else float(xt)


def unchirped_profile(rho):
    """int_{-1}^{0} exp(-i rho u) du = exp(i rho / 2) sinc(rho / 2)."""
    rho = np.asarray(rho, dtype=float)
    return np.exp(0.5j * rho) * np.sinc(rho / (2 * np.pi))


def erf_difference_scaled(rho, xi: float):
    """exp(i rho^2 / 4 xi) (erf[a rho / 2 sqrt xi] - erf[a (rho - 2 xi) / 2 sqrt xi]), a = (-1)^(1/4).

    Evaluated through w(z) so that neither the huge phase nor the erf
    cancellation is formed explicitly. With s = sign(Re z),
    erf z = s (1 - exp(-z^2) w(i s z)).
    """
    rho = np.asarray(rho, dtype=float)
    scalar = rho.ndim == 0
    rho = np.atleast_1d(rho)
    root = cmath.sqrt(xi)
    z1 = ROOT4_M1 * rho / (2 * root)
    z2 = ROOT4_M1 * (rho - 2 * xi) / (2 * root)
    s1 = np.where(z1.real < 0, -1.0, 1.0)
    s2 = np.where(z2.real < 0, -1.0, 1.0)
    w1 = faddeeva(1j * s1 * z1)
    w2 = faddeeva(1j * s2 * z2)
    # exp(i rho^2/4xi) exp(-z1^2) = 1 and exp(i rho^2/4xi) exp(-z2^2) = exp(i (rho - xi))
    out = -s1 * w1 + s2 * np.exp(1j * (rho - xi)) * w2
    straddle = s1 != s2
    if np.any(straddle):
        rs = rho[straddle]
        out[straddle] += (s1 - s2)[straddle] * np.exp(1j * rs * rs / (4 * xi))
    return out[0] if scalar else out


def chirped_profile(rho, xi: float):
    """int_{-1}^{0} exp(-i (rho u + xi u^2)) du from the closed form (any xi != 0)."""
    return SQRT_PI / (2 * ROOT4_M1 * cmath.sqrt(xi)) * erf_difference_scaled(rho, xi)


def _amplitude(signal: PhotonMode, idler: PhotonMode, ctx: JafContext, with_envelope: bool = True):
    xi = ctx.xi
    xt = _xt(signal, idler, ctx)
    forbidden = np.isnan(xt)
    xt = np.where(forbidden, 0.0, xt)
    rho = -xt + ctx.crystal.r * xi
    pump = ctx.pump
    pef = envelope(signal.omega, idler.omega, pump) if with_envelope else 1.0
    sf = spatial_factor(
        np.asarray(signal.kx) + np.asarray(idler.kx), np.asarray(signal.ky) + np.asarray(idler.ky), pump
    )
    scale = complex(ctx.amplitude_scale)
    if abs(xi) < XI_SWITCH:
        # removable singularity of the erf form; the crystal integral is a sinc here
        out = -scale / SQRT_PI * unchirped_profile(rho) * pef * sf
    else:
        out = (
            scale
            * ROOT4_M1_CUBED
            / (2 * cmath.sqrt(xi))
            * pef
            * sf
            * erf_difference_scaled(rho, xi)
        )
    out = np.where(forbidden, 0.0, out)
    return out if np.ndim(out) else complex(out)


def jaf(signal: PhotonMode, idler: PhotonMode, ctx: JafContext):
    """Joint amplitude f(k_s, k_i); zero for evanescent modes. Arrays broadcast."""
    return _amplitude(signal, idler, ctx)


def _z_integral(dk, cr: CrystalConfig, tol=1e-10, min_segments=16384, max_segments=1 << 22):
    """int_A^{A+L} exp(i (dk - K(z)) z) dz for each entry of ``dk``.

    Composite trapezoid at N and 2N segments combined by Richardson
    extrapolation; N doubles until two successive extrapolations agree.
    """
    dk = np.atleast_1d(np.asarray(dk, dtype=float))
    out = np.empty(dk.shape, dtype=complex)
    lo, hi = cr.boundaries
    L, D = cr.length_L, cr.chirp_D
    for idx, dk_i in np.ndenumerate(dk):
        slope = abs(dk_i - cr.K0 - D * cr.z0) + 2 * abs(D) * L
        n = max(min_segments, int(math.ceil(L * slope / 0.01)))
        n += n % 2
        prev = None
        while True:
            z = np.linspace(lo, hi, 2 * n + 1)
            f = np.exp(1j * (dk_i - local_spatial_frequency(cr, z)) * z)
            h = L / (2 * n)
            t_fine = h * (f.sum() - 0.5 * (f[0] + f[-1]))
            t_coarse = 2 * h * (f[::2].sum() - 0.5 * (f[0] + f[-1]))
            rich = t_fine + (t_fine - t_coarse) / 3
            if prev is not None and abs(rich - prev) <= tol * abs(rich) + 1e-14 * L:
                break
            if 2 * n > max_segments:
                break
            prev = rich
            n *= 2
        out[idx] = rich
    return out


def oracle_unchirped(signal: PhotonMode, idler: PhotonMode, ctx: JafContext):
    """Joint amplitude by direct quadrature of the longitudinal phase integral.

    Uses the grating K(z) itself rather than the rho/xi reduction, so it checks
    the closed form for any chirp, including zero.
    """
    cr = ctx.crystal
    kp, dk = _mismatch_parts(signal, idler, ctx)
    shape = np.broadcast(dk, np.asarray(signal.omega), np.asarray(idler.omega)).shape
    dk = np.broadcast_to(dk, shape)
    forbidden = np.isnan(dk)
    integral = _z_integral(np.where(forbidden, 0.0, dk), cr)
    pump = ctx.pump
    pef = envelope(signal.omega, idler.omega, pump)
    sf = spatial_factor(
        np.asarray(signal.kx) + np.asarray(idler.kx), np.asarray(signal.ky) + np.asarray(idler.ky), pump
    )
    out = -complex(ctx.amplitude_scale) / (SQRT_PI * cr.length_L) * integral.reshape(shape) * pef * sf
    out = np.where(forbidden, 0.0, out)
    return out if np.ndim(out) else complex(out)


def pmf(signal: PhotonMode, idler: PhotonMode, ctx: JafContext):
    """Phase-matching factor: the joint amplitude with the spectral pump envelope set to 1."""
    return _amplitude(signal, idler, ctx, with_envelope=False)


def pmf_map(omega_s_axis: Axis, omega_i_axis: Axis, ctx: JafContext, collinear: bool = True, kx_scan=None):
    """|PMF| over the (omega_s, omega_i) plane.

    ``collinear`` puts both photons on axis. Otherwise each pixel takes the
    largest |PMF| over signal transverse momenta ``kx_scan`` (idler at
    -k_xs), i.e. the kinematically allowed zone for any emission angle.
    """
    ws = omega_s_axis.values[:, None]
    wi = omega_i_axis.values[None, :]
    if collinear:
        values = np.abs(pmf(PhotonMode(ws), PhotonMode(wi), ctx))
    else:
        if kx_scan is None:
            kx_scan = np.linspace(0.0, 0.6, 121)
        values = np.zeros((omega_s_axis.count, omega_i_axis.count))
        for kx in np.asarray(kx_scan, dtype=float):
            amp = np.abs(pmf(PhotonMode(ws, kx), PhotonMode(wi, -kx), ctx))
            np.maximum(values, amp, out=values)
    return ComplexGrid2D(omega_s_axis, omega_i_axis, values, {"observable": "pmf", "collinear": collinear})
