"""Gaussian pulsed pump: spectral envelope with quadratic phase, transverse waists."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import C_UM_PER_FS

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))

# beta in the configs is fs^2; 1e-25 s^2 is 1e5 fs^2
S2_TO_FS2 = 1e30


@dataclass(frozen=True)
class PumpConfig:
    """Pump at ``lambda_pc`` um.

    Give exactly one of ``fwhm`` (spectral FWHM in um of wavelength) or
    ``sigma_omega`` (rad/fs). The wavelength width is mapped to angular
    frequency to first order about ``lambda_pc``.
    """

    lambda_pc: float = 0.8
    fwhm: float | None = 0.001
    beta: float = 0.0
    Wx: float = 100.0
    Wy: float = 100.0
    sigma_omega: float | None = None

    def __post_init__(self):
        if (self.fwhm is None) == (self.sigma_omega is None):
            raise ValueError("give exactly one of fwhm and sigma_omega")
        if self.fwhm is not None and not self.fwhm > 0:
            raise ValueError("fwhm must be positive")
        if self.sigma_omega is not None and not self.sigma_omega > 0:
            raise ValueError("sigma_omega must be positive")
        if not (self.Wx > 0 and self.Wy > 0):
            raise ValueError("waists must be positive")
        if not self.lambda_pc > 0:
            raise ValueError("lambda_pc must be positive")

    @property
    def omega_pc(self) -> float:
        return 2 * math.pi * C_UM_PER_FS / self.lambda_pc

    @property
    def sigma(self) -> float:
        """Angular-frequency width entering exp(-dw^2 / sigma^2)."""
        if self.sigma_omega is not None:
            return self.sigma_omega
        sigma_lambda = self.fwhm * FWHM_TO_SIGMA
        return 2 * math.pi * C_UM_PER_FS / self.lambda_pc**2 * sigma_lambda


def envelope(omega_s, omega_i, cfg: PumpConfig):
    dw = np.asarray(omega_s) + np.asarray(omega_i) - cfg.omega_pc
    dw2 = dw * dw
    return np.exp(-dw2 / cfg.sigma**2 + 1j * cfg.beta * dw2)


def spatial_factor(k_x, k_y, cfg: PumpConfig):
    """exp(-w0^2 / 4) with w0^2 = kx^2 Wx^2 + ky^2 Wy^2 (summed signal + idler momenta)."""
    k_x = np.asarray(k_x)
    k_y = np.asarray(k_y)
    return np.exp(-(k_x * k_x * cfg.Wx**2 + k_y * k_y * cfg.Wy**2) / 4)
