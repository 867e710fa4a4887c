"""Compiled scalar kernels behind mathkit.faddeeva / mathkit.cerf and the joint spectrum.

w(z) in the upper half plane: Weideman's rational expansion (N = 40) for
|z| < RATIONAL_RADIUS, Laplace continued fraction beyond. cerf uses the erf
Maclaurin series in a disc-and-strip region and 1 - exp(-z^2) w(iz) elsewhere.
"""
import math

import numba
import numpy as np

_SQRT_PI = math.sqrt(math.pi)
_TWO_OVER_SQRT_PI = 2.0 / _SQRT_PI

RATIONAL_RADIUS = 12.0
RATIONAL_N = 40


def _rational_coefficients(n):
    # Weideman (1994), SIAM J. Numer. Anal. 31, 1497: expansion in ((L + iz)/(L - iz))^k
    m = 2 * n
    k = np.arange(-m + 1, m)
    scale = math.sqrt(n / math.sqrt(2.0))
    t = scale * np.tan(k * math.pi / (2 * m))
    f = np.concatenate([[0.0], np.exp(-t * t) * (scale * scale + t * t)])
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / (2 * m)
    return scale, np.ascontiguousarray(a[n:0:-1])


_RAT_L, _RAT_A = _rational_coefficients(RATIONAL_N)


@numba.njit(cache=True)
def erf_maclaurin(z):
    z2 = z * z
    term = z
    total = z
    peak = abs(z2)
    n = 0
    while n < 4000:
        n += 1
        term = term * (-z2) / n
        add = term / (2 * n + 1)
        total += add
        if n > peak and abs(add) <= 1e-17 * abs(total):
            break
    return _TWO_OVER_SQRT_PI * total


@numba.njit(cache=True)
def faddeeva_cf(z):
    r = abs(z)
    # depths measured for ~5e-14 relative error on each radius band
    if r >= 50.0:
        depth = 6
    elif r >= 12.0:
        depth = 8
    elif r >= 9.0:
        depth = 10
    elif r >= 7.0:
        depth = 14
    elif r >= 6.0:
        depth = 18
    else:
        depth = 90
    t = 0j
    for n in range(depth, 0, -1):
        t = (0.5 * n) / (z - t)
    return (1j / _SQRT_PI) / (z - t)


@numba.njit(cache=True)
def faddeeva_rational(z):
    d = _RAT_L - 1j * z
    q = (_RAT_L + 1j * z) / d
    p = 0j
    for c in _RAT_A:
        p = p * q + c
    return 2.0 * p / (d * d) + (1.0 / _SQRT_PI) / d


@numba.njit(cache=True)
def faddeeva_upper(z, series_radius, series_im_max):
    if abs(z) < RATIONAL_RADIUS:
        return faddeeva_rational(z)
    return faddeeva_cf(z)


@numba.njit(cache=True)
def faddeeva_scalar(z, series_radius, series_im_max):
    if z.imag >= 0.0:
        return faddeeva_upper(z, series_radius, series_im_max)
    return 2.0 * np.exp(-z * z) - faddeeva_upper(-z, series_radius, series_im_max)


@numba.njit(cache=True)
def faddeeva_array(z, out, series_radius, series_im_max):
    for k in range(z.size):
        out[k] = faddeeva_scalar(z[k], series_radius, series_im_max)


@numba.njit(cache=True)
def cerf_array(z, out, series_radius, series_im_max):
    for k in range(z.size):
        zk = z[k]
        sign = 1.0
        if zk.real < 0.0:
            sign = -1.0
            zk = -zk
        if abs(zk) < series_radius and zk.real < series_im_max:
            val = erf_maclaurin(zk)
        else:
            val = 1.0 - np.exp(-zk * zk) * faddeeva_upper(1j * zk, series_radius, series_im_max)
        out[k] = sign * val


@numba.njit(cache=True)
def erf_difference_point(rho, xi, root, series_radius, series_im_max):
    # same algebra as biphoton.erf_difference_scaled, one sample at a time
    a = complex(math.sqrt(0.5), math.sqrt(0.5))
    z1 = a * rho / (2.0 * root)
    z2 = a * (rho - 2.0 * xi) / (2.0 * root)
    s1 = -1.0 if z1.real < 0.0 else 1.0
    s2 = -1.0 if z2.real < 0.0 else 1.0
    w1 = faddeeva_scalar(1j * s1 * z1, series_radius, series_im_max)
    w2 = faddeeva_scalar(1j * s2 * z2, series_radius, series_im_max)
    ph = rho - xi
    out = -s1 * w1 + s2 * complex(math.cos(ph), math.sin(ph)) * w2
    if s1 != s2:
        q = rho * rho / (4.0 * xi)
        out += (s1 - s2) * complex(math.cos(q), math.sin(q))
    return out


@numba.njit(cache=True, nogil=True)
def joint_row(kp, ks2, ki2, kxs, dk, kys2, L, K0, rxi, xi, root, chirped, pref,
              env2, sf2, mask_w, mask_kk, wdw, wdk, series_radius, series_im_max,
              vals, clip):
    """Weighted sum of |f|^2 over (d_omega, d_k) for every k_xs at one idler frequency.

    ``pref`` is |amplitude prefactor|^2, ``env2``/``sf2`` the squared pump
    envelope and spatial factor. Reduction order is fixed: d_omega innermost.
    """
    n_w = ks2.size
    n_k = dk.size
    for a in range(kxs.size):
        kx = kxs[a]
        total = 0.0
        peak = 0.0
        edge = 0.0
        for n in range(n_k):
            kxi = dk[n] - kx
            kiz2 = ki2 - kxi * kxi - kys2
            col = 0.0
            for m in range(n_w):
                if not (mask_w[m] and mask_kk[a, n]):
                    continue
                ksz2 = ks2[m] - kx * kx - kys2
                if ksz2 < 0.0 or kiz2 < 0.0:
                    continue
                xt = L * (kp[m] - math.sqrt(ksz2) - math.sqrt(kiz2) - dk[n] * dk[n] / (2.0 * kp[m]) - K0)
                rho = -xt + rxi
                if chirped:
                    g = erf_difference_point(rho, xi, root, series_radius, series_im_max)
                    g2 = g.real * g.real + g.imag * g.imag
                else:
                    h = 0.5 * rho
                    s = 1.0 if h == 0.0 else math.sin(h) / h
                    g2 = s * s
                p = pref * g2 * env2[m] * sf2[n]
                col += p * wdw[m]
                if p > peak:
                    peak = p
                if (m == 0 or m == n_w - 1 or n == 0 or n == n_k - 1) and p > edge:
                    edge = p
            total += col * wdk[n]
        vals[a] = total
        clip[a] = edge / peak if peak > 0.0 else 0.0
