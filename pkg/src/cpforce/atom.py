"""Atomic level structure, dipole data and polarizability tensors.

Levels are bare energies in units of hbar * omega_T with the ground state
first; dipole matrix elements are real 3-vectors (a global phase choice
that is always possible for the nonrelativistic Hamiltonian) stored in
internal units, normally constructed from the dimensionless coupling g of
each transition.  Permanent dipoles are excluded (d_nn = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from .errors import DomainError, PoleError
from .units import HBAR, dipole_magnitude

_POLE_RTOL = 1e-12


def dipole_vector(g: float, theta: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """Dipole 3-vector of coupling strength g tilted by (theta, phi).

    theta is measured from the surface normal (z axis), phi in the
    surface plane.
    """
    d = dipole_magnitude(g)
    st = math.sin(theta)
    return d * np.array(
        [st * math.cos(phi), st * math.sin(phi), math.cos(theta)]
    )


@dataclass(frozen=True)
class AtomSpec:
    """Multilevel atom: bare energies and transition dipoles.

    dipoles maps ordered index pairs to vectors; only one orientation of
    each pair needs to be given (d_mn = d_nm is enforced).
    """

    energies: Tuple[float, ...]
    dipoles: Mapping[Tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.energies)
        if n < 2:
            raise DomainError("need at least two levels")
        if min(self.energies) != self.energies[0]:
            raise DomainError("level 0 must be the ground state")
        table: Dict[Tuple[int, int], np.ndarray] = {}
        for (m, k), vec in self.dipoles.items():
            if not (0 <= m < n and 0 <= k < n):
                raise DomainError("dipole indices (%d, %d) out of range" % (m, k))
            if m == k:
                raise DomainError("permanent dipoles d_nn are not supported")
            v = np.asarray(vec, dtype=float)
            if v.shape != (3,):
                raise DomainError("dipole vectors must be real 3-vectors")
            other = table.get((k, m))
            if other is not None and not np.array_equal(other, v):
                raise DomainError(
                    "conflicting values for d_%d%d and d_%d%d" % (m, k, k, m)
                )
            table[(m, k)] = v
            table[(k, m)] = v
        object.__setattr__(self, "dipoles", table)

    @classmethod
    def two_level(cls, g: float, omega10: float, theta: float = 0.0, phi: float = 0.0) -> "AtomSpec":
        """Two-level atom from the coupling strength and orientation."""
        if not omega10 > 0.0:
            raise DomainError("transition frequency must be positive")
        return cls(
            energies=(0.0, omega10),
            dipoles={(1, 0): dipole_vector(g, theta, phi)},
        )

    @property
    def n_levels(self) -> int:
        return len(self.energies)

    def omega(self, m: int, k: int) -> float:
        """Bare transition frequency (E_m - E_k)/hbar."""
        return (self.energies[m] - self.energies[k]) / HBAR

    def dipole(self, m: int, k: int) -> np.ndarray:
        return self.dipoles.get((m, k), _ZERO3)

    def has_dipole(self, m: int, k: int) -> bool:
        return (m, k) in self.dipoles

    def transition_pairs(self):
        """Ordered pairs (m, k), m > k, with a nonzero dipole."""
        return sorted({(max(p), min(p)) for p in self.dipoles})


_ZERO3 = np.zeros(3)


@dataclass(frozen=True)
class PolarizabilityEval:
    """3x3 polarizability tensor evaluated at one complex frequency."""

    tensor: np.ndarray
    omega: complex
    pair: Tuple[int, int]

    @property
    def scalar(self) -> complex:
        """Isotropic reduction Tr(alpha)/3."""
        return np.trace(self.tensor) / 3.0


def alpha0(atom: AtomSpec, l: int, omega: complex) -> PolarizabilityEval:
    """Lowest-order polarizability tensor of state l:

        (2/hbar) sum_k omega_kl d_lk (x) d_kl / (omega_kl^2 - omega^2).

    Real frequencies may not coincide with a transition frequency; the
    offending intermediate state index is reported if they do.
    """
    omega = complex(omega)
    tensor = np.zeros((3, 3), dtype=complex)
    for k in range(atom.n_levels):
        d = atom.dipole(l, k)
        if not d.any():
            continue
        w_kl = atom.omega(k, l)
        den = w_kl * w_kl - omega * omega
        if abs(den) <= _POLE_RTOL * max(w_kl * w_kl, abs(omega) ** 2):
            raise PoleError(
                "polarizability pole at transition %d <-> %d" % (l, k), location=k
            )
        tensor += (2.0 / HBAR) * w_kl / den * np.outer(d, d)
    return PolarizabilityEval(tensor=tensor, omega=omega, pair=(l, l))


def alpha0_scalar(atom: AtomSpec, l: int, omega: complex) -> complex:
    """Spherically averaged lowest-order polarizability (Tr/3)."""
    return alpha0(atom, l, omega).scalar


def alpha_generalized(atom: AtomSpec, spectrum, m: int, n: int, omega: complex) -> PolarizabilityEval:
    """Generalized polarizability tensor with body-induced shifted
    frequencies and level widths:

        (1/hbar) sum_k [ d_mk (x) d_kn / (w~_kn - omega - i(G_k+G_m)/2)
                       + d_kn (x) d_mk / (w~_km + omega + i(G_k+G_n)/2) ].

    With all shifts and widths zero this reduces to the lowest-order
    tensor (for omega off the real poles).
    """
    omega = complex(omega)
    tensor = np.zeros((3, 3), dtype=complex)
    for k in range(atom.n_levels):
        d_mk = atom.dipole(m, k)
        d_kn = atom.dipole(k, n)
        if not (d_mk.any() and d_kn.any()):
            continue
        g_k = spectrum.width(k)
        den1 = spectrum.omega_tilde(k, n) - omega - 0.5j * (g_k + spectrum.width(m))
        den2 = spectrum.omega_tilde(k, m) + omega + 0.5j * (g_k + spectrum.width(n))
        tensor += (np.outer(d_mk, d_kn) / den1 + np.outer(d_kn, d_mk) / den2) / HBAR
    return PolarizabilityEval(tensor=tensor, omega=omega, pair=(m, n))
