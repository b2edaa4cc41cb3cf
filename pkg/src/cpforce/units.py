"""Dimensionless unit scheme and the coupling-constant reduction.

Everything numerical in this package works in internal units tied to the
medium resonance:

* frequencies are measured in units of the resonance frequency ``omega_T``
  (so the resonance sits at 1),
* lengths are measured in units of the resonance vacuum wavelength
  ``lambda_T = 2*pi*c / omega_T``,
* energies in ``hbar * omega_T``, times in ``1 / omega_T``.

In this scheme the numerical value of the speed of light is ``1/(2*pi)``
and we are free to set ``hbar = epsilon_0 = 1`` (hence
``mu_0 = (2*pi)**2``).  SI constants appear only inside
:class:`UnitSystem`, which converts user-facing quantities at the
boundary; no physics routine ever touches them.

The ``2*pi`` in the length scale is a convention choice: the wavelength
(not the reduced wavelength ``c/omega_T``) is used, which makes the
distance labels of the bundled sweep configurations come out in
fractions of the resonance wavelength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import c as _C_SI
from scipy.constants import hbar as _HBAR_SI

from .errors import DomainError

# Internal numerical values of the fundamental constants (see module
# docstring).  These are scheme constants, not SI values.
C_LIGHT = 1.0 / (2.0 * math.pi)
HBAR = 1.0
EPS0 = 1.0
MU0 = 1.0 / (EPS0 * C_LIGHT**2)

#: relative tolerance guaranteed for conversion round trips
ROUNDTRIP_RTOL = 1e-14


@dataclass(frozen=True)
class UnitSystem:
    """Conversion layer between SI inputs and the internal scheme.

    Parameters
    ----------
    omega_T_ref : float
        Medium resonance frequency in rad/s.  All internal frequencies
        are ``omega / omega_T_ref``.
    coupling_g : float
        Dimensionless dipole coupling ``omega_T^2 d_A^2 / (3 pi hbar
        epsilon_0 c^3)`` of the reference transition.
    """

    omega_T_ref: float
    coupling_g: float = 0.0

    def __post_init__(self):
        if not self.omega_T_ref > 0.0:
            raise DomainError("omega_T_ref must be positive")
        if self.coupling_g < 0.0:
            raise DomainError("coupling_g must be non-negative")

    @property
    def lambda_T(self) -> float:
        """Length scale 2*pi*c/omega_T in meters."""
        return 2.0 * math.pi * _C_SI / self.omega_T_ref

    # -- frequencies ------------------------------------------------------
    def frequency_to_internal(self, omega_si: float) -> float:
        return omega_si / self.omega_T_ref

    def frequency_from_internal(self, omega: float) -> float:
        return omega * self.omega_T_ref

    # -- lengths ----------------------------------------------------------
    def length_to_internal(self, z_si: float) -> float:
        return z_si / self.lambda_T

    def length_from_internal(self, z: float) -> float:
        return z * self.lambda_T

    # -- times -------------------------------------------------------------
    def time_to_internal(self, t_si: float) -> float:
        return t_si * self.omega_T_ref

    def time_from_internal(self, t: float) -> float:
        return t / self.omega_T_ref

    # -- energies ----------------------------------------------------------
    def energy_to_internal(self, e_si: float) -> float:
        return e_si / (_HBAR_SI * self.omega_T_ref)

    def energy_from_internal(self, e: float) -> float:
        return e * _HBAR_SI * self.omega_T_ref

    # -- forces -------------------------------------------------------------
    def force_to_internal(self, f_si: float) -> float:
        return f_si * self.lambda_T / (_HBAR_SI * self.omega_T_ref)

    def force_from_internal(self, f: float) -> float:
        return f * _HBAR_SI * self.omega_T_ref / self.lambda_T


def dipole_magnitude(g: float) -> float:
    """Internal dipole magnitude for a transition of coupling strength g.

    Inverts ``g = omega_T^2 d_A^2 / (3 pi hbar eps0 c^3)`` inside the
    internal scheme (omega_T = 1).
    """
    if g < 0.0:
        raise DomainError("coupling g must be non-negative")
    return math.sqrt(3.0 * math.pi * HBAR * EPS0 * C_LIGHT**3 * g)


def coupling_C(g: float, theta: float) -> float:
    """Orientation-weighted coupling constant d_A^2 (1+cos^2 theta)/(32 pi eps0).

    Returned in internal units (energy times length cubed).  This is the
    strength of the 1/z^3 short-distance interaction for a dipole tilted
    by ``theta`` against the surface normal.
    """
    d2 = dipole_magnitude(g) ** 2
    return d2 * (1.0 + math.cos(theta) ** 2) / (32.0 * math.pi * EPS0)


def coupling_C_from_dipole(dipole) -> float:
    """Same as :func:`coupling_C` but from a raw dipole 3-vector.

    Uses d_par^2 + 2 d_z^2 = |d|^2 (1+cos^2 theta), valid for any
    orientation.
    """
    dx, dy, dz = dipole
    return (dx * dx + dy * dy + 2.0 * dz * dz) / (32.0 * math.pi * EPS0)


def reduced_C_over_hbar_z3(g: float, theta: float, z_over_lambdaT: float) -> float:
    """C/(hbar z^3) in units of omega_T; the single place where the
    dimensional reduction happens.

    Equals ``(3 g / 32) (1 + cos^2 theta) (lambda_T / (2 pi z))^3``.
    """
    if g < 0.0:
        raise DomainError("coupling g must be non-negative")
    if not z_over_lambdaT > 0.0:
        raise DomainError("distance must be positive")
    return (
        3.0
        * g
        * (1.0 + math.cos(theta) ** 2)
        / (256.0 * math.pi**3 * z_over_lambdaT**3)
    )
