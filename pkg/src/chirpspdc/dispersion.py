"""Temperature-dependent extraordinary index and photon wavevector kinematics.

Units throughout the package: um, fs, rad/fs, rad/um, degC.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

C_UM_PER_FS = 0.299792458

_COEFF_KEYS = ("a1", "a2", "a3", "a4", "a5", "a6", "b1", "b2", "b3", "b4", "t_offset", "t_shift")
_RANGE_KEYS = ("lambda_min", "lambda_max", "temperature_min", "temperature_max")


class DispersionDomainError(ValueError):
    """Wavelength or temperature outside the tabulated validity range."""


class KinematicsError(ValueError):
    """Transverse momentum exceeds |k| (evanescent mode)."""


@dataclass(frozen=True)
class DispersionModel:
    """Sellmeier coefficient set with an auxiliary quadratic temperature function.

    n_e^2 = a1 + b1 f + (a2 + b2 f) / (lam^2 - (a3 + b3 f)^2) + (a4 + b4 f) / (lam^2 - a5^2) - a6 lam^2
    with f(T) = (T - t_offset)(T + t_shift).
    """

    sellmeier_coefficients: dict
    valid_wavelength_range: tuple = (0.4, 5.0)
    valid_temperature_range: tuple = (20.0, 250.0)
    name: str = ""

    def __post_init__(self):
        missing = [k for k in _COEFF_KEYS if k not in self.sellmeier_coefficients]
        if missing:
            raise ValueError(f"missing Sellmeier coefficients: {', '.join(missing)}")
        lo, hi = self.valid_wavelength_range
        if not 0 < lo < hi:
            raise ValueError(f"bad wavelength range {self.valid_wavelength_range}")
        # the pole a5 and the UV pole a3 must lie outside the validity window
        c = self.sellmeier_coefficients
        if lo <= c["a5"] <= hi:
            raise ValueError("Sellmeier IR pole inside the wavelength validity range")

    @property
    def temperature_map(self) -> tuple[float, float]:
        c = self.sellmeier_coefficients
        return c["t_offset"], c["t_shift"]

    def f(self, T):
        t0, t1 = self.temperature_map
        return (T - t0) * (T + t1)

    def check_domain(self, lam, T):
        lam_lo, lam_hi = self.valid_wavelength_range
        t_lo, t_hi = self.valid_temperature_range
        lam = np.asarray(lam)
        T = np.asarray(T)
        if np.any(~np.isfinite(lam)) or np.any(lam < lam_lo):
            raise DispersionDomainError(f"wavelength below lower bound {lam_lo} um (got min {np.nanmin(lam):.6g})")
        if np.any(lam > lam_hi):
            raise DispersionDomainError(f"wavelength above upper bound {lam_hi} um (got max {np.max(lam):.6g})")
        if np.any(~np.isfinite(T)) or np.any(T < t_lo):
            raise DispersionDomainError(f"temperature below lower bound {t_lo} degC (got {np.nanmin(T):.6g})")
        if np.any(T > t_hi):
            raise DispersionDomainError(f"temperature above upper bound {t_hi} degC (got {np.max(T):.6g})")

    def n_squared(self, lam, T):
        c = self.sellmeier_coefficients
        f = self.f(T)
        lam2 = lam * lam
        return (
            c["a1"]
            + c["b1"] * f
            + (c["a2"] + c["b2"] * f) / (lam2 - (c["a3"] + c["b3"] * f) ** 2)
            + (c["a4"] + c["b4"] * f) / (lam2 - c["a5"] ** 2)
            - c["a6"] * lam2
        )

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> "DispersionModel":
        values: dict[str, float] = {}
        name = ""
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{source}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key == "name":
                name = val
                continue
            if key not in _COEFF_KEYS + _RANGE_KEYS:
                raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
            try:
                values[key] = float(val)
            except ValueError:
                raise ValueError(f"{source}:{lineno}: {key} is not a number: {val!r}") from None
        missing = [k for k in _COEFF_KEYS + _RANGE_KEYS if k not in values]
        if missing:
            raise ValueError(f"{source}: missing keys {', '.join(missing)}")
        return cls(
            sellmeier_coefficients={k: values[k] for k in _COEFF_KEYS},
            valid_wavelength_range=(values["lambda_min"], values["lambda_max"]),
            valid_temperature_range=(values["temperature_min"], values["temperature_max"]),
            name=name,
        )

    @classmethod
    def from_file(cls, path) -> "DispersionModel":
        path = Path(path)
        return cls.from_text(path.read_text(encoding="utf-8"), source=str(path))


DEFAULT_MATERIAL = "linbo3_congruent_e.txt"


def default_material_path() -> Path:
    return Path(str(resources.files("chirpspdc") / "data" / DEFAULT_MATERIAL))


def load_material(path=None) -> DispersionModel:
    """Load a coefficient file; ``None`` gives the shipped congruent LiNbO3 set."""
    if path is None:
        path = default_material_path()
    return DispersionModel.from_file(path)


@dataclass(frozen=True)
class PhotonMode:
    """Angular frequency (rad/fs) and transverse momenta (rad/um) of one photon.

    Fields may be numpy arrays; they broadcast together.
    """

    omega: object
    kx: object = 0.0
    ky: object = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.omega) <= 0):
            raise ValueError("omega must be positive")


def wavelength_of(omega):
    return 2 * np.pi * C_UM_PER_FS / np.asarray(omega, dtype=float)


def refractive_index(lam, T, model: DispersionModel | None = None):
    model = model if model is not None else _default_model()
    model.check_domain(lam, T)
    return np.sqrt(model.n_squared(np.asarray(lam, dtype=float), T))


def wavevector_magnitude(omega, T, model: DispersionModel | None = None):
    """|k| = n_e(2 pi c / omega, T) omega / c in rad/um."""
    omega = np.asarray(omega, dtype=float)
    return refractive_index(wavelength_of(omega), T, model) * omega / C_UM_PER_FS


def _kz(k, kx, ky):
    # nan marks evanescent modes; callers decide whether that is an error
    rad = k * k - kx * kx - ky * ky
    with np.errstate(invalid="ignore"):
        return np.where(rad > 0, np.sqrt(np.where(rad > 0, rad, 0.0)), np.nan)


def longitudinal_k(mode: PhotonMode, T, model: DispersionModel | None = None):
    k = wavevector_magnitude(mode.omega, T, model)
    kz = _kz(k, np.asarray(mode.kx, dtype=float), np.asarray(mode.ky, dtype=float))
    if np.any(np.isnan(kz)):
        raise KinematicsError("evanescent mode: kx^2 + ky^2 >= k^2")
    return kz if np.ndim(kz) else float(kz)


_DEFAULT = None


def _default_model() -> DispersionModel:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_material()
    return _DEFAULT
