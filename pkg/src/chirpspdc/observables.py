"""Joint spectrum J(k_xs, omega_i), single-photon spectra, space-time map and widths."""
from __future__ import annotations

import cmath
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from . import _kernels
from .biphoton import XI_SWITCH, JafContext, jaf
from .dispersion import C_UM_PER_FS, PhotonMode, wavevector_magnitude
from .mathkit import (
    SERIES_IM_MAX,
    SERIES_RADIUS,
    Axis,
    ComplexGrid2D,
    dft2,
    integrate_1d,
    integrate_grid,
    trapezoid_weights,
)
from .pump import envelope, spatial_factor

log = logging.getLogger(__name__)

MIN_COUNT = 16
PRESCAN_COUNT = 64
PRESCAN_OUTER = 16
SUPPORT_LEVEL = 1e-4
SUPPORT_PAD = 0.2
CLIP_LEVEL = 1e-3
KX_CHUNK = 32
DEFAULT_HALF_SPAN = 0.75
DEFAULT_OMEGA_COUNT = 256

VARIABLES = ("omega_i", "k_xs", "omega_s", "k_xi")


class RangeTooSmallError(ValueError):
    """A width cannot be measured because the feature touches the grid edge."""


@dataclass(frozen=True)
class Window:
    """Rectangular filter on one variable; ``keep`` selects inside or outside [lo, hi]."""

    variable: str
    lo: float
    hi: float
    keep: str = "inside"

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown window variable {self.variable!r}")
        if not self.hi > self.lo:
            raise ValueError("window needs hi > lo")
        if self.keep not in ("inside", "outside"):
            raise ValueError("keep must be 'inside' or 'outside'")

    def mask(self, x):
        inside = (x >= self.lo) & (x <= self.hi)
        return inside if self.keep == "inside" else ~inside


@dataclass(frozen=True)
class ObservableRequest:
    """Outer grid (k_xs, omega_i) and inner integration grid.

    The inner variables are the offsets d_omega = omega_s + omega_i - omega_pc
    and d_k = k_xs + k_xi; integrating over them is the same as integrating
    over (omega_s, k_xi). ``inner_ranges=None`` triggers the support pre-scan;
    ``omega_i=None`` centres the idler grid on the degenerate frequency.
    """

    k_xs: tuple = (-0.45, 0.45, 256)
    omega_i: tuple | None = None
    inner_counts: tuple = (128, 128)
    inner_ranges: tuple | None = None
    k_ys: float = 0.0
    windows: tuple = ()

    def __post_init__(self):
        grids = [("k_xs", self.k_xs)] + ([("omega_i", self.omega_i)] if self.omega_i is not None else [])
        for name, (lo, hi, n) in grids:
            if n < MIN_COUNT:
                raise ValueError(f"{name} needs at least {MIN_COUNT} samples")
            if not hi > lo:
                raise ValueError(f"{name} range must be increasing")
        if min(self.inner_counts) < MIN_COUNT:
            raise ValueError(f"inner grids need at least {MIN_COUNT} samples")
        if self.omega_i is not None and self.omega_i[0] <= 0:
            raise ValueError("omega_i must be positive")

    def resolve(self, ctx) -> "ObservableRequest":
        """Fill a missing idler grid with DEFAULT_OMEGA_COUNT points over the degenerate frequency +- DEFAULT_HALF_SPAN."""
        if self.omega_i is not None:
            return self
        wd = 0.5 * ctx.pump.omega_pc
        return replace(self, omega_i=(wd - DEFAULT_HALF_SPAN, wd + DEFAULT_HALF_SPAN, DEFAULT_OMEGA_COUNT))

    @property
    def k_axis(self) -> Axis:
        lo, hi, n = self.k_xs
        return Axis("k_xs", "rad/um", float(lo), float(hi), int(n))

    @property
    def omega_axis(self) -> Axis:
        if self.omega_i is None:
            raise ValueError("idler grid not set; call resolve(ctx) first")
        lo, hi, n = self.omega_i
        return Axis("omega_i", "rad/fs", float(lo), float(hi), int(n))


@dataclass
class Spectrum1D:
    axis: Axis
    values: np.ndarray
    flags: dict = field(default_factory=dict)


def _modes(omega_i, kxs, dw, dk, ctx, k_ys):
    """Signal/idler modes over the (d_omega, k_xs, d_k) block for one idler frequency."""
    ws = ctx.pump.omega_pc - omega_i + dw[:, None, None]
    kx_s = kxs[None, :, None]
    kx_i = -kx_s + dk[None, None, :]
    return PhotonMode(ws, kx_s, k_ys), PhotonMode(omega_i, kx_i, -k_ys)


def _inner_masks(windows, omega_i, kxs, dw, dk, ctx):
    mask = None
    for w in windows:
        if w.variable == "omega_s":
            m = w.mask(ctx.pump.omega_pc - omega_i + dw)[:, None, None]
        elif w.variable == "k_xi":
            m = w.mask(-kxs[None, :, None] + dk[None, None, :])
        else:
            continue
        mask = m if mask is None else mask & m
    return mask


def _valid_dw(req, ctx):
    """d_omega interval keeping omega_s and the pump frequency inside the material's tabulated range."""
    lam_lo, lam_hi = ctx.dispersion.valid_wavelength_range
    w_lo = 2 * np.pi * C_UM_PER_FS / lam_hi
    w_hi = 2 * np.pi * C_UM_PER_FS / lam_lo
    wpc = ctx.pump.omega_pc
    wi_lo, wi_hi = req.omega_i[0], req.omega_i[1]
    lo = max(w_lo - wpc + wi_hi, w_lo - wpc)
    hi = min(w_hi - wpc + wi_lo, w_hi - wpc)
    # stay a hair inside so round-off in omega -> wavelength cannot cross the bound
    lo, hi = lo + 1e-9 * wpc, hi - 1e-9 * wpc
    if not hi > lo:
        raise ValueError("no signal frequencies inside the material's valid range for this idler grid")
    return lo, hi


def support_prescan(req: ObservableRequest, ctx: JafContext):
    """Inner integration box from a coarse scan of |jaf|.

    Starts from generous bounds set by the pump envelope width and waist
    (cut to the material's valid frequency range),
    keeps the bounding box where |jaf| exceeds SUPPORT_LEVEL of its maximum
    and pads it by SUPPORT_PAD of its width.
    """
    req = req.resolve(ctx)
    sigma = ctx.pump.sigma
    wmin = min(ctx.pump.Wx, ctx.pump.Wy)
    lo, hi = _valid_dw(req, ctx)
    dw = np.linspace(max(-6 * sigma, lo), min(6 * sigma, hi), PRESCAN_COUNT)
    dk = np.linspace(-12 / wmin, 12 / wmin, PRESCAN_COUNT)
    k_out = req.k_axis.values
    w_out = req.omega_axis.values
    k_sub = k_out[np.linspace(0, len(k_out) - 1, PRESCAN_OUTER).astype(int)]
    w_sub = w_out[np.linspace(0, len(w_out) - 1, PRESCAN_OUTER).astype(int)]
    peak = np.zeros((PRESCAN_COUNT, PRESCAN_COUNT))
    for wi in w_sub:
        s, i = _modes(wi, k_sub, dw, dk, ctx, req.k_ys)
        amp = np.abs(jaf(s, i, ctx)).max(axis=1)
        np.maximum(peak, amp, out=peak)
    top = peak.max()
    if not top > 0:
        return (dw[0], dw[-1]), (dk[0], dk[-1])
    rows, cols = np.nonzero(peak >= SUPPORT_LEVEL * top)

    def padded(ax, idx):
        lo, hi = ax[idx.min()], ax[idx.max()]
        if hi <= lo:
            lo, hi = ax[max(idx.min() - 1, 0)], ax[min(idx.max() + 1, len(ax) - 1)]
        pad = SUPPORT_PAD * 0.5 * (hi - lo)
        return lo - pad, hi + pad

    (a, b) = padded(dw, rows)
    return (max(a, lo), min(b, hi)), padded(dk, cols)


def _row_reference(j, omega_i, kx, dw, dk, wdw, wdk, ctx, req, swap=False):
    """J at one idler frequency for all k_xs through ``jaf``, plus per-point clipping ratio."""
    n = len(kx)
    vals = np.empty(n)
    clip = np.zeros(n)
    for a in range(0, n, KX_CHUNK):
        kc = kx[a:a + KX_CHUNK]
        s, i = _modes(omega_i, kc, dw, dk, ctx, req.k_ys)
        amp = jaf(i, s, ctx) if swap else jaf(s, i, ctx)
        p = amp.real**2 + amp.imag**2
        mask = _inner_masks(req.windows, omega_i, kc, dw, dk, ctx)
        if mask is not None:
            p = np.where(mask, p, 0.0)
        vals[a:a + KX_CHUNK] = ((p * wdw[:, None, None]).sum(axis=0) * wdk[None, :]).sum(axis=1)
        edge = np.maximum(
            np.maximum(p[0].max(axis=1), p[-1].max(axis=1)),
            np.maximum(p[:, :, 0].max(axis=0), p[:, :, -1].max(axis=0)),
        )
        inner = p.max(axis=(0, 2))
        with np.errstate(invalid="ignore", divide="ignore"):
            clip[a:a + KX_CHUNK] = np.where(inner > 0, edge / inner, 0.0)
    return j, vals, clip


def _row(j, omega_i, kx, dw, dk, wdw, wdk, ctx, req, swap=False):
    """Compiled equivalent of _row_reference.

    |f|^2 is symmetric under exchanging the photon labels at fixed modes
    (x_t, envelope and spatial factor are), so ``swap`` needs no extra work.
    """
    T = ctx.crystal.temperature_T
    model = ctx.dispersion
    pump = ctx.pump
    cr = ctx.crystal
    xi = ctx.xi
    ws = pump.omega_pc - omega_i + dw
    PhotonMode(ws)  # positivity check
    PhotonMode(omega_i)
    ks = wavevector_magnitude(ws, T, model)
    kp = wavevector_magnitude(ws + omega_i, T, model)
    ki = float(wavevector_magnitude(omega_i, T, model))
    chirped = abs(xi) >= XI_SWITCH
    scale2 = abs(complex(ctx.amplitude_scale)) ** 2
    pref = scale2 / (4 * abs(xi)) if chirped else scale2 / np.pi
    env2 = np.abs(envelope(ws, omega_i, pump)) ** 2
    sf2 = spatial_factor(dk, 0.0, pump) ** 2
    mask_w = np.ones(len(dw), dtype=bool)
    mask_kk = np.ones((len(kx), len(dk)), dtype=bool)
    for w in req.windows:
        if w.variable == "omega_s":
            mask_w &= w.mask(ws)
        elif w.variable == "k_xi":
            mask_kk &= w.mask(-kx[:, None] + dk[None, :])
    vals = np.empty(len(kx))
    clip = np.empty(len(kx))
    _kernels.joint_row(
        np.ascontiguousarray(kp, dtype=float), np.ascontiguousarray(ks * ks, dtype=float), ki * ki,
        np.ascontiguousarray(kx, dtype=float), np.ascontiguousarray(dk, dtype=float), float(req.k_ys) ** 2,
        float(cr.length_L), float(cr.K0), float(cr.r * xi), float(xi), complex(cmath.sqrt(xi)), chirped, pref,
        env2, np.ascontiguousarray(sf2, dtype=float), mask_w, mask_kk, wdw, wdk, SERIES_RADIUS, SERIES_IM_MAX,
        vals, clip,
    )
    return j, vals, clip


def joint_spectrum(
    req: ObservableRequest, ctx: JafContext, threads: int = 1, swap_roles: bool = False, engine: str = "compiled"
):
    """J(k_xs, omega_i) = int dk_xi domega_s |f|^2, normalized to unit grid integral.

    ``swap_roles`` evaluates f with the photon labels exchanged (the outer
    frequency then belongs to the signal, the outer momentum to the idler).
    ``engine="reference"`` integrates jaf itself instead of the compiled
    kernel. Each idler frequency is an independent task and rows are
    assembled in index order, so the result does not depend on ``threads``.
    """
    if engine not in ("compiled", "reference"):
        raise ValueError("engine must be 'compiled' or 'reference'")
    row = _row if engine == "compiled" else _row_reference
    req = req.resolve(ctx)
    if req.inner_ranges is None:
        (dw_lo, dw_hi), (dk_lo, dk_hi) = support_prescan(req, ctx)
    else:
        (dw_lo, dw_hi), (dk_lo, dk_hi) = req.inner_ranges
    n_dw, n_dk = req.inner_counts
    dw = np.linspace(dw_lo, dw_hi, n_dw)
    dk = np.linspace(dk_lo, dk_hi, n_dk)
    wdw = trapezoid_weights(n_dw, dw[1] - dw[0])
    wdk = trapezoid_weights(n_dk, dk[1] - dk[0])
    kx = req.k_axis.values
    wi = req.omega_axis.values
    J = np.empty((len(kx), len(wi)))
    clip = np.empty_like(J)

    def task(j):
        return row(j, wi[j], kx, dw, dk, wdw, wdk, ctx, req, swap_roles)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task, range(len(wi))))
    else:
        results = [task(j) for j in range(len(wi))]
    for j, vals, c in results:
        J[:, j] = vals
        clip[:, j] = c

    for w in req.windows:
        if w.variable == "omega_i":
            J[:, ~w.mask(wi)] = 0.0
        elif w.variable == "k_xs":
            J[~w.mask(kx), :] = 0.0

    grid = ComplexGrid2D(req.k_axis, req.omega_axis, J)
    total = integrate_grid(grid)
    if not total > 0:
        raise ValueError("joint spectrum vanishes on the requested grid")
    grid.values = J / total
    significant = grid.values >= 1e-2 * grid.values.max()
    worst = float(clip[significant].max())
    grid.flags.update(
        observable="joint",
        inner_ranges=[[float(dw_lo), float(dw_hi)], [float(dk_lo), float(dk_hi)]],
        inner_counts=[n_dw, n_dk],
        clip_ratio=worst,
        clipped=worst > CLIP_LEVEL,
        norm_before=total,
    )
    if worst > CLIP_LEVEL:
        log.warning("inner integration range clips the integrand (edge/max = %.3g)", worst)
    return grid


def marginal_spectrum(joint: ComplexGrid2D, k_xs: float | None = None) -> Spectrum1D:
    """S(omega_i) = int dk_xs J, or the fixed-k_xs cut J(k_xs, omega_i) when ``k_xs`` is given."""
    values = np.asarray(joint.values, dtype=float)
    if k_xs is None:
        s = integrate_1d(values, joint.axis1.step, axis=0)
        return Spectrum1D(joint.axis2, s, {"marginal": "integrated"})
    k = joint.axis1.values
    if not k[0] <= k_xs <= k[-1]:
        raise ValueError(f"k_xs = {k_xs} outside the grid")
    pos = (k_xs - k[0]) / joint.axis1.step
    lo = min(int(np.floor(pos)), len(k) - 2)
    t = pos - lo
    cut = (1 - t) * values[lo] + t * values[lo + 1]
    return Spectrum1D(joint.axis2, cut, {"marginal": "cut", "k_xs": float(k_xs)})


def spacetime_map(joint: ComplexGrid2D) -> ComplexGrid2D:
    """FJ(x_s, t_i) = (2 pi)^-2 int dk_xs domega_i J exp(-i (omega_i t_i + k_xs x_s))."""
    out = dft2(joint, names=("x_s", "t_i"), units=("um", "fs"))
    out.flags["observable"] = "spacetime"
    return out


def _fwhm_1d(x, y, i0):
    half = 0.5 * y[i0]
    n = len(y)
    right = i0
    while right < n - 1 and y[right] > half:
        right += 1
    left = i0
    while left > 0 and y[left] > half:
        left -= 1
    if y[right] > half or y[left] > half:
        raise RangeTooSmallError("half maximum not reached inside the grid")

    def cross(a, b):
        # linear interpolation between samples a (above) and b (at/below half)
        return x[a] + (y[a] - half) / (y[a] - y[b]) * (x[b] - x[a])

    return cross(right - 1, right) - cross(left + 1, left)


def extract_widths(grid: ComplexGrid2D) -> tuple[float, float]:
    """FWHM of the axis-aligned cuts through the global maximum of |values|.

    Ties between equal maxima go to the sample with the smallest
    (|axis1|, |axis2|), compared lexicographically.
    """
    mag = np.abs(np.asarray(grid.values))
    a1 = grid.axis1.values
    a2 = grid.axis2.values
    top = mag.max()
    idx = np.argwhere(mag == top)
    i, j = min(idx, key=lambda ij: (abs(a1[ij[0]]), abs(a2[ij[1]])))
    if i in (0, len(a1) - 1) or j in (0, len(a2) - 1):
        raise RangeTooSmallError("maximum lies on the grid boundary")
    return _fwhm_1d(a1, mag[:, j], i), _fwhm_1d(a2, mag[i, :], j)


def half_max_support(spectrum: Spectrum1D, level: float = 0.5) -> float:
    """Total axis length where the spectrum is at or above ``level`` of its maximum."""
    y = np.asarray(spectrum.values, dtype=float)
    x = spectrum.axis.values
    thr = level * y.max()
    above = y >= thr
    total = 0.0
    for a in range(len(y) - 1):
        ya, yb = y[a] - thr, y[a + 1] - thr
        if above[a] and above[a + 1]:
            total += x[a + 1] - x[a]
        elif above[a] != above[a + 1]:
            frac = ya / (ya - yb)
            seg = frac if above[a] else 1 - frac
            total += seg * (x[a + 1] - x[a])
    return total


def count_runs(values, level: float = 0.5) -> int:
    """Number of connected 1D runs at or above ``level`` of the maximum."""
    y = np.asarray(values, dtype=float)
    _, n = ndimage.label(y >= level * y.max())
    return int(n)


def components(grid: ComplexGrid2D, level: float = 0.5):
    """Label connected super-threshold regions (8-connectivity) of a real map."""
    v = np.asarray(grid.values, dtype=float)
    return ndimage.label(v >= level * v.max(), structure=np.ones((3, 3)))
