"""Intra-atomic density-matrix dynamics and the time-dependent force.

In the weak-coupling (Markov) regime with well-separated transitions the
off-diagonal density-matrix elements evolve independently,

    sigma_nm(t) = exp{ [i w~_mn - (Gamma_m + Gamma_n)/2] t } sigma_nm(0),

while the populations obey the balance equations

    d sigma_mm / dt = -Gamma_m sigma_mm + sum_n Gamma_n^m sigma_nn.

The average force is the density-matrix weighted sum of precomputed
force coefficients at fixed height (the atom's center of mass is treated
as a slow parameter: the force table is valid as long as the atom moves
negligibly over an intra-atomic decay time).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError, DomainError, QuadratureError
from .force import ForceBreakdown
from .spectra import ShiftedSpectrum, assert_nondegenerate

#: local tolerance of the population stepper (spec floor is 1e-10; the
#: tighter default keeps the trace drift at the 1e-12 level)
POPULATION_RTOL = 1e-12
POPULATION_ATOL = 1e-14

_TRACE_TOL = 1e-12
_IMAG_RESIDUE_RTOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """Internal-state density matrix at one instant."""

    matrix: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("density matrix must be square")
        if abs(np.trace(m).real - 1.0) > _TRACE_TOL or abs(np.trace(m).imag) > _TRACE_TOL:
            raise DomainError("density matrix trace must be 1")
        if not np.allclose(m, m.conj().T, atol=1e-12):
            raise DomainError("density matrix must be Hermitian")
        diag = np.diag(m).real
        if np.any(diag < -1e-14) or np.any(diag > 1.0 + 1e-14):
            raise DomainError("populations must lie in [0, 1]")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, n_levels: int, state: int) -> "DensityMatrix":
        m = np.zeros((n_levels, n_levels), dtype=complex)
        m[state, state] = 1.0
        return cls(m)

    @classmethod
    def from_entries(
        cls,
        n_levels: int,
        populations: Mapping[int, float],
        coherences: Optional[Mapping[Tuple[int, int], complex]] = None,
    ) -> "DensityMatrix":
        m = np.zeros((n_levels, n_levels), dtype=complex)
        for idx, p in populations.items():
            m[idx, idx] = p
        for (a, b), c in (coherences or {}).items():
            m[a, b] = c
            m[b, a] = np.conj(c)
        return cls(m)

    @property
    def n_levels(self) -> int:
        return self.matrix.shape[0]

    def population(self, m: int) -> float:
        return self.matrix[m, m].real


@dataclass(frozen=True)
class ForceTrajectory:
    """Average force along a time grid, with optional per-pair pieces."""

    times: np.ndarray
    totals: np.ndarray  # (n_t, 3) real
    per_part: Dict[str, np.ndarray] = field(default_factory=dict)
    per_pair: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict)

    @property
    def total_z(self) -> np.ndarray:
        return self.totals[:, 2]


def evolve_offdiagonal(
    spectrum: ShiftedSpectrum, sigma0: DensityMatrix, m: int, n: int, t: float
) -> complex:
    """sigma_nm(t) for one coherence pair (m != n)."""
    if m == n:
        raise DomainError("evolve_offdiagonal is for coherences only")
    assert_nondegenerate(spectrum)
    rate = 1j * spectrum.omega_tilde(m, n) - 0.5 * (
        spectrum.width(m) + spectrum.width(n)
    )
    return np.exp(rate * t) * sigma0.matrix[n, m]


def _rate_matrix(spectrum: ShiftedSpectrum) -> np.ndarray:
    n = spectrum.n_levels
    rate = np.zeros((n, n))
    for m in range(n):
        rate[m, m] = -spectrum.width(m)
        for k in range(n):
            if k == m:
                continue
            ch = spectrum.per_channel.get((k, m))
            if ch is not None:
                rate[m, k] += ch.width
    return rate


def evolve_populations(
    spectrum: ShiftedSpectrum,
    sigma0: DensityMatrix,
    t_grid,
    rtol: float = POPULATION_RTOL,
    atol: float = POPULATION_ATOL,
) -> np.ndarray:
    """Populations on ``t_grid`` from the balance equations.

    Solved with an adaptive implicit stepper (Radau); the rate matrix has
    zero column sums, so the exact flow conserves the trace and the
    stepper is held tight enough to keep the numerical drift at the
    1e-12 level.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise DomainError("t_grid must be a non-empty 1-d array")
    if t_grid[0] < 0.0 or np.any(np.diff(t_grid) <= 0.0):
        raise DomainError("t_grid must increase from t >= 0")
    rate = _rate_matrix(spectrum)
    p0 = np.diag(sigma0.matrix).real

    if t_grid[-1] == 0.0:
        return np.tile(p0, (len(t_grid), 1))

    sol = solve_ivp(
        lambda _t, p: rate @ p,
        (0.0, t_grid[-1]),
        p0,
        method="Radau",
        t_eval=t_grid,
        rtol=rtol,
        atol=atol,
        jac=lambda _t, _p: rate,
    )
    if not sol.success:
        raise QuadratureError(
            "population stepper failed: %s" % sol.message, estimate=sol.y
        )
    return sol.y.T


def force_trajectory(
    atom,
    model,
    spectrum: ShiftedSpectrum,
    force_table: Mapping[Tuple[int, int], ForceBreakdown],
    sigma0: DensityMatrix,
    t_grid,
) -> ForceTrajectory:
    """Average force over time from a precomputed force table.

    The table must contain every diagonal pair (populations redistribute
    through decay) and every coherence pair initially occupied.  The
    assembled totals are real; a residual imaginary part above the noise
    level signals an inconsistent table.
    """
    n = sigma0.n_levels
    if n != spectrum.n_levels:
        raise ConfigError("density matrix and spectrum disagree on level count")
    t_grid = np.asarray(t_grid, dtype=float)

    needed = [(m, m) for m in range(n)]
    coh_pairs = []
    for mm in range(n):
        for nn in range(n):
            if mm != nn and sigma0.matrix[nn, mm] != 0.0:
                coh_pairs.append((mm, nn))
                needed.append((mm, nn))
    missing = [p for p in needed if p not in force_table]
    if missing:
        raise ConfigError(
            "force table is missing entries for pairs %s" % (missing,)
        )

    pops = evolve_populations(spectrum, sigma0, t_grid)

    parts = ("el_or", "el_r", "mag_or", "mag_r")
    totals_c = np.zeros((len(t_grid), 3), dtype=complex)
    per_part = {p: np.zeros((len(t_grid), 3), dtype=complex) for p in parts}
    per_pair: Dict[Tuple[int, int], np.ndarray] = {}

    for m in range(n):
        fb = force_table[(m, m)]
        weights = pops[:, m]
        contrib = weights[:, None] * fb.total[None, :]
        totals_c += contrib
        per_pair[(m, m)] = contrib
        for p in parts:
            per_part[p] += weights[:, None] * getattr(fb, p)[None, :]

    for (mm, nn) in coh_pairs:
        fb = force_table[(mm, nn)]
        sig = np.array(
            [evolve_offdiagonal(spectrum, sigma0, mm, nn, t) for t in t_grid]
        )
        contrib = sig[:, None] * fb.total[None, :]
        totals_c += contrib
        per_pair[(mm, nn)] = contrib
        for p in parts:
            per_part[p] += sig[:, None] * getattr(fb, p)[None, :]

    scale = np.max(np.abs(totals_c)) or 1.0
    if np.max(np.abs(totals_c.imag)) > _IMAG_RESIDUE_RTOL * scale:
        raise ConfigError(
            "assembled force has a non-negligible imaginary part; the "
            "force table must contain conjugate-consistent coefficients"
        )
    return ForceTrajectory(
        times=t_grid,
        totals=totals_c.real,
        per_part={p: v for p, v in per_part.items()},
        per_pair=per_pair,
    )
