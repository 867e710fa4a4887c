import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chirpspdc.dispersion import (
    C_UM_PER_FS,
    DispersionDomainError,
    DispersionModel,
    KinematicsError,
    PhotonMode,
    default_material_path,
    load_material,
    longitudinal_k,
    refractive_index,
    wavevector_magnitude,
)

# Evaluated with mpmath (30 digits) straight from the published coefficients,
# not through the package.
N_E_0800_25C = 2.17580269743953526
N_E_1600_25C = 2.13646081409185518
K_1600_25C = 8.38986199779180157
KZ_1600_25C_KX025 = 8.38613643711995899


def omega_of(lam):
    return 2 * math.pi * C_UM_PER_FS / lam


def test_regression_index_800nm():
    assert refractive_index(0.8, 25.0) == pytest.approx(N_E_0800_25C, rel=1e-14)


def test_index_1600nm_against_independent_evaluation():
    assert refractive_index(1.6, 25.0) == pytest.approx(N_E_1600_25C, rel=1e-14)
    assert wavevector_magnitude(omega_of(1.6), 25.0) == pytest.approx(K_1600_25C, rel=1e-13)


def test_lower_bound_is_inclusive():
    n = refractive_index(0.4, 25.0)
    assert np.isfinite(n) and n > 1


@pytest.mark.parametrize(
    "lam,T,word",
    [(0.1, 25.0, "wavelength below"), (6.0, 25.0, "wavelength above"), (1.0, 10.0, "temperature below"), (1.0, 300.0, "temperature above")],
)
def test_domain_errors_name_the_bound(lam, T, word):
    with pytest.raises(DispersionDomainError, match=word):
        refractive_index(lam, T)


def test_wavevector_is_n_omega_over_c():
    w = omega_of(0.8)
    assert wavevector_magnitude(w, 25.0) == pytest.approx(refractive_index(0.8, 25.0) * w / C_UM_PER_FS, rel=1e-15)


def _flat_model(n):
    # a1 = n^2 and every dispersive term switched off
    c = dict(a1=n * n, a2=0.0, a3=0.0, a4=0.0, a5=10.0, a6=0.0, b1=0.0, b2=0.0, b3=0.0, b4=0.0, t_offset=24.5, t_shift=570.82)
    return DispersionModel(c, (0.4, 5.0), (20.0, 250.0), "flat")


def test_constant_index_gives_linear_k():
    m = _flat_model(2.0)
    w = omega_of(1.6)
    assert wavevector_magnitude(2 * w, 25.0, m) == pytest.approx(2 * wavevector_magnitude(w, 25.0, m), rel=1e-15)


def test_collinear_longitudinal_equals_magnitude():
    w = omega_of(1.6)
    assert longitudinal_k(PhotonMode(w), 25.0) == wavevector_magnitude(w, 25.0)


def test_longitudinal_hand_value():
    assert longitudinal_k(PhotonMode(omega_of(1.6), 0.25), 25.0) == pytest.approx(KZ_1600_25C_KX025, rel=1e-13)


def test_grazing_mode_is_rejected():
    w = omega_of(1.6)
    k = wavevector_magnitude(w, 25.0)
    with pytest.raises(KinematicsError):
        longitudinal_k(PhotonMode(w, k * (1 + 1e-12)), 25.0)


def test_photon_mode_needs_positive_frequency():
    with pytest.raises(ValueError):
        PhotonMode(0.0)


def test_index_smooth_over_validity_range():
    lam = np.linspace(0.4, 4.0, 10_000)
    n = refractive_index(lam, 25.0)
    assert np.all(np.isfinite(n)) and np.all(n > 1)
    d2 = np.diff(n, 2)
    # no pole: second differences stay tiny and never flip wildly
    assert np.max(np.abs(d2)) < 1e-5


def test_refractive_index_is_pure():
    lam = np.linspace(0.5, 3.0, 101)
    a = refractive_index(lam, 60.0)
    b = refractive_index(lam, 60.0)
    assert a.tobytes() == b.tobytes()


@given(
    lam=st.floats(0.45, 4.5),
    frac=st.floats(0.0, 0.95),
    angle=st.floats(0.0, 2 * math.pi),
    T=st.floats(20.0, 250.0),
)
def test_longitudinal_pythagoras(lam, frac, angle, T):
    w = omega_of(lam)
    k = wavevector_magnitude(w, T)
    kx, ky = frac * k * math.cos(angle), frac * k * math.sin(angle)
    kz = longitudinal_k(PhotonMode(w, kx, ky), T)
    assert kz**2 + kx**2 + ky**2 == pytest.approx(k * k, rel=1e-12)


def test_material_file_round_trip(tmp_path):
    text = default_material_path().read_text()
    p = tmp_path / "copy.txt"
    p.write_text(text)
    assert load_material(p) == load_material()


def test_material_file_errors_carry_line_numbers(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("name = x\na1 = 1.0\na2 = oops\n")
    with pytest.raises(ValueError, match=r"bad.txt:3:"):
        load_material(p)
