import math

import pytest

from cpforce.errors import DomainError
from cpforce.units import (
    C_LIGHT,
    EPS0,
    HBAR,
    MU0,
    UnitSystem,
    coupling_C,
    coupling_C_from_dipole,
    dipole_magnitude,
    reduced_C_over_hbar_z3,
)
from cpforce.atom import dipole_vector

# Independent symbolic reduction (sympy script, frozen): with
# d_A^2 = 3 pi hbar eps0 c^3 g / omega_T^2 and z = zeta * 2 pi c / omega_T,
#   C/(hbar z^3) = 3 g (1 + cos^2 theta) / (256 pi^3 zeta^3) * omega_T,
# which at g = 1e-7, theta = 0, zeta = 0.0075 equals 1/(180 pi^3).
REFERENCE_REDUCED_C = 0.00017917519129555273


def test_internal_constants_consistent():
    assert C_LIGHT == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-15)
    assert MU0 * EPS0 * C_LIGHT**2 == pytest.approx(1.0, rel=1e-15)


def test_reduced_c_reference_value():
    val = reduced_C_over_hbar_z3(1e-7, 0.0, 0.0075)
    assert val == pytest.approx(REFERENCE_REDUCED_C, rel=1e-12)
    assert val == pytest.approx(1.0 / (180.0 * math.pi**3), rel=1e-12)


def test_reduced_c_zero_dipole():
    assert reduced_C_over_hbar_z3(0.0, 0.3, 0.01) == 0.0


def test_reduced_c_orientation_ratio():
    # (1 + cos^2 theta): 1 for a dipole in the surface plane, 2 for one
    # along the normal, hence the exact ratio 1/2.
    par = reduced_C_over_hbar_z3(1e-7, math.pi / 2.0, 0.0075)
    perp = reduced_C_over_hbar_z3(1e-7, 0.0, 0.0075)
    assert par / perp == pytest.approx(0.5, rel=1e-14)


def test_reduced_c_cubic_scaling():
    a = reduced_C_over_hbar_z3(1e-7, 0.2, 0.004)
    b = reduced_C_over_hbar_z3(1e-7, 0.2, 0.008)
    assert a / b == pytest.approx(8.0, rel=1e-14)


def test_reduced_c_linear_in_g():
    a = reduced_C_over_hbar_z3(1e-7, 0.4, 0.006)
    b = reduced_C_over_hbar_z3(2e-7, 0.4, 0.006)
    assert b == pytest.approx(2.0 * a, rel=1e-14)


def test_reduced_c_domain_errors():
    with pytest.raises(DomainError):
        reduced_C_over_hbar_z3(1e-7, 0.0, 0.0)
    with pytest.raises(DomainError):
        reduced_C_over_hbar_z3(1e-7, 0.0, -1.0)
    with pytest.raises(DomainError):
        reduced_C_over_hbar_z3(-1e-7, 0.0, 0.01)


def test_coupling_consistency():
    g, theta, z = 3.7e-7, 0.83, 0.011
    assert coupling_C(g, theta) / (HBAR * z**3) == pytest.approx(
        reduced_C_over_hbar_z3(g, theta, z), rel=1e-13
    )


def test_coupling_from_dipole_matches_angle_form():
    g, theta, phi = 2.2e-7, 1.1, 0.7
    d = dipole_vector(g, theta, phi)
    assert coupling_C_from_dipole(d) == pytest.approx(
        coupling_C(g, theta), rel=1e-12
    )


def test_dipole_magnitude_definition():
    g = 1e-7
    d2 = dipole_magnitude(g) ** 2
    assert d2 == pytest.approx(3.0 * math.pi * HBAR * EPS0 * C_LIGHT**3 * g, rel=1e-14)


class TestUnitSystem:
    def test_lambda_T(self):
        from scipy.constants import c as c_si

        us = UnitSystem(omega_T_ref=1.0e15)
        assert us.lambda_T == pytest.approx(2.0 * math.pi * c_si / 1.0e15, rel=1e-15)

    @pytest.mark.parametrize(
        "fwd,back,value",
        [
            ("frequency_to_internal", "frequency_from_internal", 3.7e14),
            ("length_to_internal", "length_from_internal", 5.3e-8),
            ("time_to_internal", "time_from_internal", 2.5e-13),
            ("energy_to_internal", "energy_from_internal", 4.1e-19),
            ("force_to_internal", "force_from_internal", 6.6e-21),
        ],
    )
    def test_roundtrip(self, fwd, back, value):
        us = UnitSystem(omega_T_ref=8.9e14, coupling_g=1e-7)
        there = getattr(us, fwd)(value)
        again = getattr(us, back)(there)
        assert again == pytest.approx(value, rel=1e-14)

    def test_validation(self):
        with pytest.raises(DomainError):
            UnitSystem(omega_T_ref=0.0)
        with pytest.raises(DomainError):
            UnitSystem(omega_T_ref=1e15, coupling_g=-1.0)
