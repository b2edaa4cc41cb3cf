"""Single-resonance magnetodielectric response of the half-space medium.

Permittivity and permeability follow the absorbing single-resonance form

    eps(omega) = 1 + omega_P^2 / (omega_T^2 - omega^2 - i gamma omega)

which is analytic in the upper half of the complex frequency plane and
Kramers-Kronig consistent by construction.  Evaluation is supported for
real, imaginary and general upper-half-plane complex frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import DomainError


@dataclass(frozen=True)
class DrudeLorentzParams:
    """Oscillator parameters, all in units of the internal resonance.

    omega_p : plasma frequency (coupling strength of the resonance)
    gamma   : absorption linewidth, strictly positive (the medium must be
              absorbing for the field quantization behind the formulas
              used here to be well defined)
    omega_t : resonance frequency, 1 by construction in internal units
    """

    omega_p: float
    gamma: float
    omega_t: float = 1.0

    def __post_init__(self):
        if self.omega_p < 0.0:
            raise DomainError("omega_p must be non-negative")
        if not self.gamma > 0.0:
            raise DomainError("gamma must be strictly positive (absorbing medium)")
        if not self.omega_t > 0.0:
            raise DomainError("omega_t must be positive")


@dataclass(frozen=True)
class MaterialModel:
    """Half-space medium: a permittivity and a permeability model.

    ``None`` stands for the constant-unity (vacuum-like) response.
    """

    permittivity: Optional[DrudeLorentzParams] = None
    permeability: Optional[DrudeLorentzParams] = None

    @classmethod
    def vacuum(cls) -> "MaterialModel":
        return cls(None, None)

    @classmethod
    def drude_lorentz(
        cls, omega_p: float, gamma: float, mu: Optional[DrudeLorentzParams] = None
    ) -> "MaterialModel":
        return cls(DrudeLorentzParams(omega_p, gamma), mu)

    @property
    def is_vacuum(self) -> bool:
        return self.permittivity is None and self.permeability is None


def _dl_eval(params: DrudeLorentzParams, omega: complex) -> complex:
    return 1.0 + params.omega_p**2 / (
        params.omega_t**2 - omega * omega - 1j * params.gamma * omega
    )


def _dl_eval_iu(params: DrudeLorentzParams, u: float) -> float:
    return 1.0 + params.omega_p**2 / (
        params.omega_t**2 + u * u + params.gamma * u
    )


def _check_upper_half(omega: complex):
    if complex(omega).imag < 0.0:
        raise DomainError(
            "frequency must lie in the closed upper half plane, got %r" % (omega,)
        )


def eval_eps(model: MaterialModel, omega: complex) -> complex:
    """Complex permittivity at frequency ``omega`` (Im omega >= 0)."""
    _check_upper_half(omega)
    if model.permittivity is None:
        return complex(1.0)
    return _dl_eval(model.permittivity, omega)


def eval_mu(model: MaterialModel, omega: complex) -> complex:
    """Complex permeability at frequency ``omega`` (Im omega >= 0)."""
    _check_upper_half(omega)
    if model.permeability is None:
        return complex(1.0)
    return _dl_eval(model.permeability, omega)


def eval_eps_iu(model: MaterialModel, u: float) -> float:
    """Permittivity on the positive imaginary frequency axis.

    Real, >= 1 and monotonically decreasing in ``u`` for the
    single-resonance model; tends to 1 as u -> infinity.
    """
    if u < 0.0:
        raise DomainError("imaginary-axis coordinate u must be non-negative")
    if model.permittivity is None:
        return 1.0
    return _dl_eval_iu(model.permittivity, u)


def eval_mu_iu(model: MaterialModel, u: float) -> float:
    """Permeability on the positive imaginary frequency axis."""
    if u < 0.0:
        raise DomainError("imaginary-axis coordinate u must be non-negative")
    if model.permeability is None:
        return 1.0
    return _dl_eval_iu(model.permeability, u)


def surface_resonance(model: MaterialModel) -> float:
    """Surface-mode frequency sqrt(omega_t^2 + omega_p^2 / 2).

    This is where |eps + 1| is smallest and the near-field response of
    the half space peaks.
    """
    p = model.permittivity
    if p is None:
        raise DomainError(
            "surface resonance is defined only for a dispersive permittivity"
        )
    return (p.omega_t**2 + 0.5 * p.omega_p**2) ** 0.5
