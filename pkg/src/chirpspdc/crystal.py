"""Linearly chirped quasi-phase-matched grating."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import C_UM_PER_FS, DispersionModel, wavevector_magnitude

# Linear + quadratic thermal expansion of congruent LiNbO3 along the grating axis
# (Lambda(T) = Lambda(T_ref) [1 + a (T - T_ref) + b (T - T_ref)^2]).
THERMAL_EXPANSION_A = 1.54e-5
THERMAL_EXPANSION_B = 5.3e-9


class QPMInfeasibleError(ValueError):
    """Collinear degenerate mismatch is non-positive; no first-order period exists."""


@dataclass(frozen=True)
class CrystalConfig:
    """Crystal of length L on [-L, 0] with K(z) = K0 + D (z0 + z).

    ``chirp_D`` is read as rad/um^2. ``period_Lambda_c`` is the period at
    ``period_reference_T``; with ``thermal_expansion`` on it is scaled to
    ``temperature_T``.
    """

    length_L: float = 5000.0
    chirp_D: float = 0.0
    r: float = 0.5
    period_Lambda_c: float = 20.33
    temperature_T: float = 25.0
    thermal_expansion: bool = False
    period_reference_T: float = 25.0

    def __post_init__(self):
        if not self.length_L > 0:
            raise ValueError("length_L must be positive")
        if not self.period_Lambda_c > 0:
            raise ValueError("period_Lambda_c must be positive")
        lo, hi = self.boundaries
        k_ends = [self.K0 + self.chirp_D * (self.z0 + z) for z in (lo, hi)]
        if min(k_ends) <= 0:
            raise ValueError("local grating frequency K(z) must stay positive across the crystal")

    @property
    def z0(self) -> float:
        return self.r * self.length_L

    @property
    def boundary_A(self) -> float:
        return -self.length_L

    @property
    def boundaries(self) -> tuple[float, float]:
        return self.boundary_A, self.boundary_A + self.length_L

    @property
    def period(self) -> float:
        """Effective central period at the operating temperature."""
        if not self.thermal_expansion:
            return self.period_Lambda_c
        dT = self.temperature_T - self.period_reference_T
        return self.period_Lambda_c * (1 + THERMAL_EXPANSION_A * dT + THERMAL_EXPANSION_B * dT * dT)

    @property
    def K0(self) -> float:
        return 2 * np.pi / self.period


def local_spatial_frequency(cfg: CrystalConfig, z):
    lo, hi = cfg.boundaries
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < lo) or np.any(z_arr > hi):
        raise ValueError(f"z outside crystal [{lo}, {hi}] um")
    return cfg.K0 + cfg.chirp_D * (cfg.z0 + z)


def chirp_strength(cfg: CrystalConfig) -> float:
    """xi = D L^2 (dimensionless)."""
    return cfg.chirp_D * cfg.length_L**2


def collinear_degenerate_mismatch(pump_lambda, T, period, model: DispersionModel | None = None) -> float:
    """k_p - 2 k(omega_p / 2) - 2 pi / period, collinear."""
    omega_p = 2 * np.pi * C_UM_PER_FS / pump_lambda
    kp = wavevector_magnitude(omega_p, T, model)
    ks = wavevector_magnitude(omega_p / 2, T, model)
    return float(kp - 2 * ks - 2 * np.pi / period)


def solve_central_period(pump_lambda, T, model: DispersionModel | None = None) -> float:
    """First-order period that phase-matches degenerate collinear type-0 SPDC."""
    omega_p = 2 * np.pi * C_UM_PER_FS / pump_lambda
    dk = float(wavevector_magnitude(omega_p, T, model) - 2 * wavevector_magnitude(omega_p / 2, T, model))
    if not dk > 0:
        raise QPMInfeasibleError(f"k_p - 2 k_s = {dk:.3g} rad/um; quasi-phase-matching impossible")
    return 2 * np.pi / dk
