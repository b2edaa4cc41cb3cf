"""Casimir-Polder force components on the multilevel atom.

Three layers are provided:

* the lowest-order (perturbative) route: potentials from the
  imaginary-frequency integral plus resonant pole terms, forces as their
  analytic height derivative;
* the general nonperturbative route: for each density-matrix index pair
  (m, n), electric and magnetic force components split into off-resonant
  (imaginary-frequency quadrature) and resonant (complex-frequency pole)
  parts, with body-induced shifted frequencies and widths entering both
  the energy denominators and the pole positions
  Omega_mnk = w~_nk + i (Gamma_m + Gamma_k)/2;
* closed short-distance forms for the two-level atom, used for the
  frequency sweeps.

Index bookkeeping for the general route: the force coefficient
multiplying sigma_nm(t) is F_mn = A_mn + conj(A_nm), where A carries one
channel sum over intermediate states k.  For diagonal pairs the two
terms are complex conjugates and the force is real; for coherences the
reality of the total force is restored by the (m, n) <-> (n, m) pairing
in the trajectory sum.

The planar half space makes all forces point along z (the data model
carries the diagonal Green tensor and its height derivative only), and
the single-argument gradient of the scattering Green tensor equals half
the derivative of the equal-position tensor, since both arguments enter
the reflected-wave phase as z + z'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

import numpy as np

from .atom import AtomSpec
from .errors import DomainError
from .greens import (
    _quad_checked,
    _quad_vec_checked,
    green_curl,
    green_curl_iu,
    green_scatter,
    green_scatter_iu,
    green_scatter_real,
    weighted_iu_short_distance,
)
from .material import MaterialModel, eval_eps_iu
from .spectra import ShiftedSpectrum, assert_nondegenerate
from .units import HBAR, MU0, coupling_C_from_dipole

POTENTIAL_RTOL = 1e-8
FORCE_RTOL = 1e-8
OFFRES_RTOL = 1e-9

_IMAG_RESIDUE_RTOL = 1e-10


@dataclass(frozen=True)
class PotentialEval:
    """Perturbative vdW potential of an eigenstate, split into the
    off-resonant and resonant parts."""

    U_or: float
    U_r: float
    state: int
    z: float

    @property
    def total(self) -> float:
        return self.U_or + self.U_r


@dataclass(frozen=True)
class ForceBreakdown:
    """Force coefficient of one density-matrix pair, per component.

    Components are 3-vectors along z (planar geometry); they are complex
    for coherence pairs (reality of observable forces emerges in the
    trajectory sum) and real up to numerical residue on the diagonal.
    ``omega_complex`` records the complex pole frequency
    w~_nk + i(Gamma_m + Gamma_k)/2 of each intermediate channel;
    ``normalization`` records the convention of the stored numbers.
    """

    pair: Tuple[int, int]
    el_or: np.ndarray
    el_r: np.ndarray
    mag_or: np.ndarray
    mag_r: np.ndarray
    omega_complex: Dict[int, complex] = field(default_factory=dict)
    normalization: str = "raw"

    @property
    def total(self) -> np.ndarray:
        return self.el_or + self.el_r + self.mag_or + self.mag_r

    @property
    def total_z(self) -> complex:
        return complex(self.total[2])

    def real_z(self) -> float:
        """Real z-force for diagonal pairs; asserts the imaginary residue
        is at the numerical-noise level."""
        t = self.total_z
        if abs(t.imag) > _IMAG_RESIDUE_RTOL * max(abs(t), 1e-300):
            raise DomainError(
                "force has a non-negligible imaginary part (%r); only "
                "diagonal pairs carry a real force on their own" % (t,)
            )
        return t.real

    def normalized(self, coupling_C: float) -> "ForceBreakdown":
        """Rescale to the plotting convention F lambda_T^4 / (3 C)."""
        if coupling_C <= 0.0:
            raise DomainError("coupling constant must be positive")
        s = 1.0 / (3.0 * coupling_C)
        return replace(
            self,
            el_or=self.el_or * s,
            el_r=self.el_r * s,
            mag_or=self.mag_or * s,
            mag_r=self.mag_r * s,
            normalization="lambda_T^4/(3C)",
        )


def _zvec(value: complex) -> np.ndarray:
    v = np.zeros(3, dtype=complex)
    v[2] = value
    return v


def _alpha0_weights(atom: AtomSpec, l: int):
    """Per-channel dipole contractions entering the lowest-order
    polarizability: (omega_kl, parallel weight, z weight)."""
    out = []
    for k in range(atom.n_levels):
        d = atom.dipole(l, k)
        if not d.any():
            continue
        out.append(
            (atom.omega(k, l), d[0] * d[0] + d[1] * d[1], d[2] * d[2])
        )
    return out


def vdw_potential_offres(
    atom: AtomSpec,
    model: MaterialModel,
    l: int,
    z: float,
    rtol: float = POTENTIAL_RTOL,
    short_distance: bool = False,
) -> float:
    """Off-resonant part of the vdW potential of eigenstate l:

        (hbar mu0 / 2 pi) integral du u^2 Tr[alpha_l(iu) G(z, z, iu)].

    ``short_distance=True`` routes through the closed quasi-static form
    of the weighted imaginary-frequency integral instead of the full
    tensor quadrature.
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if model.is_vacuum:
        return 0.0
    weights = _alpha0_weights(atom, l)
    if not weights:
        return 0.0

    if short_distance:

        def f(u):
            usq = u * u
            acc = 0.0
            for w_kl, c_par, c_z in weights:
                acc += w_kl * (2.0 * c_par + 2.0 * c_z) / (w_kl * w_kl + usq)
            return usq * (2.0 / HBAR) * acc

        w_tensor = weighted_iu_short_distance(f, model, z, rtol=rtol)
        return HBAR * MU0 / (2.0 * math.pi) * w_tensor[0, 0]

    def integrand(u):
        g = green_scatter_iu(model, z, u, rtol=min(rtol, 1e-9))
        gxx = g.tensor[0, 0].real
        gzz = g.tensor[2, 2].real
        usq = u * u
        acc = 0.0
        for w_kl, c_par, c_z in weights:
            acc += w_kl * (c_par * 2.0 * gxx + 2.0 * c_z * gzz) / (
                w_kl * w_kl + usq
            )
        # NB: Tr[alpha G] = alpha_xx G_xx + alpha_yy G_yy + alpha_zz G_zz;
        # with G_xx = G_yy the parallel dipole weight doubles, hence the
        # factor 2 on gxx above; the 2 on gzz is alpha's own prefactor.
        return usq * acc / HBAR

    val = _quad_checked(integrand, 0.0, np.inf, rtol, "potential integral")
    return HBAR * MU0 / (2.0 * math.pi) * val


def vdw_potential_res(
    atom: AtomSpec, model: MaterialModel, l: int, z: float, rtol: float = FORCE_RTOL
) -> float:
    """Resonant part of the vdW potential (downward channels only):

        - mu0 sum_k Theta(omega_lk) omega_lk^2 d . Re G(z, z, omega_lk) . d.
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if model.is_vacuum:
        return 0.0
    val = 0.0
    for k in range(atom.n_levels):
        d = atom.dipole(l, k)
        if not d.any():
            continue
        w_lk = atom.omega(l, k)
        if w_lk <= 0.0:
            continue
        g = green_scatter_real(model, z, w_lk, rtol=rtol)
        val -= MU0 * w_lk**2 * g.contract(d, d).real
    return val


def vdw_potential(
    atom: AtomSpec, model: MaterialModel, l: int, z: float, rtol: float = POTENTIAL_RTOL
) -> PotentialEval:
    """Full perturbative vdW potential split of eigenstate l."""
    return PotentialEval(
        U_or=vdw_potential_offres(atom, model, l, z, rtol=rtol),
        U_r=vdw_potential_res(atom, model, l, z, rtol=rtol),
        state=l,
        z=z,
    )


def perturbative_force(
    atom: AtomSpec, model: MaterialModel, l: int, z: float, rtol: float = FORCE_RTOL
) -> np.ndarray:
    """Perturbative force -dU/dz on eigenstate l, via the analytic height
    derivative of the Green tensor inside the quadrature."""
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if model.is_vacuum:
        return np.zeros(3)
    weights = _alpha0_weights(atom, l)
    if not weights:
        return np.zeros(3)

    def integrand(u):
        g = green_scatter_iu(model, z, u, rtol=min(rtol, 1e-9))
        dxx = g.dz_tensor[0, 0].real
        dzz = g.dz_tensor[2, 2].real
        usq = u * u
        acc = 0.0
        for w_kl, c_par, c_z in weights:
            acc += w_kl * (2.0 * c_par * dxx + 2.0 * c_z * dzz) / (
                w_kl * w_kl + usq
            )
        return usq * acc / HBAR

    val = _quad_checked(integrand, 0.0, np.inf, rtol, "force integral")
    fz = -HBAR * MU0 / (2.0 * math.pi) * val

    for k in range(atom.n_levels):
        d = atom.dipole(l, k)
        if not d.any():
            continue
        w_lk = atom.omega(l, k)
        if w_lk <= 0.0:
            continue
        g = green_scatter_real(model, z, w_lk, rtol=rtol)
        fz += MU0 * w_lk**2 * g.contract_dz(d, d).real

    out = np.zeros(3)
    out[2] = fz
    return out


def force_component_general(
    atom: AtomSpec,
    model: MaterialModel,
    spectrum: ShiftedSpectrum,
    m: int,
    n: int,
    z: float,
    rtol: float = FORCE_RTOL,
) -> ForceBreakdown:
    """All four force parts of the density-matrix pair (m, n).

    Channel structure per intermediate state k (requires both d_mk and
    d_kn nonzero):

        X1 = w~_nk + i (G_m + G_k)/2,   X2 = w~_mk + i (G_n + G_k)/2,

        el_or  = (mu0/pi) sum_k [ X1 J_k(X1) + conj(X2 J_k(X2)) ]
        el_r   = mu0 sum_k [ T(w~_nk) X1^2 ghat_k(X1)
                             + conj(T(w~_mk) X2^2 ghat_k(X2)) ]
        mag_or = (mu0/pi) w~_mn sum_k W_k [ Jc(X1) - conj(Jc(X2)) ]
        mag_r  = mu0 w~_mn sum_k W_k [ T(w~_nk) X1 g_c(X1)
                                       - conj(T(w~_mk) X2 g_c(X2)) ]

    with J_k(X) = int du u^2 ghat_k(iu)/(u^2+X^2), ghat_k the
    single-argument height derivative contracted with the dipole pair,
    Jc the same with the curl amplitude, W_k the in-plane dipole
    contraction, and T the (strict) unit step selecting downward
    resonances.
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    assert_nondegenerate(spectrum)
    zero = _zvec(0.0)
    if model.is_vacuum:
        return ForceBreakdown((m, n), zero, zero.copy(), zero.copy(), zero.copy())

    channels = []
    for k in range(atom.n_levels):
        d_mk = atom.dipole(m, k)
        d_kn = atom.dipole(k, n)
        if not (d_mk.any() and d_kn.any()):
            continue
        c_par = d_mk[0] * d_kn[0] + d_mk[1] * d_kn[1]
        c_z = d_mk[2] * d_kn[2]
        x1 = spectrum.omega_tilde(n, k) + 0.5j * (
            spectrum.width(m) + spectrum.width(k)
        )
        x2 = spectrum.omega_tilde(m, k) + 0.5j * (
            spectrum.width(n) + spectrum.width(k)
        )
        channels.append((k, c_par, c_z, x1, x2))
    if not channels:
        return ForceBreakdown((m, n), zero, zero.copy(), zero.copy(), zero.copy())

    w_mn = spectrum.omega_tilde(m, n)
    need_mag = w_mn != 0.0 and any(c[1] != 0.0 for c in channels)
    nch = len(channels)

    def integrand(u):
        g = green_scatter_iu(model, z, u, rtol=min(rtol, 1e-9))
        dpar = 0.5 * g.dz_tensor[0, 0].real
        dzz = 0.5 * g.dz_tensor[2, 2].real
        gc = green_curl_iu(model, z, u, rtol=min(rtol, 1e-9)) if need_mag else 0.0
        usq = u * u
        out = np.empty(8 * nch)
        for i, (_k, c_par, c_z, x1, x2) in enumerate(channels):
            ghat = c_par * dpar + c_z * dzz
            e1 = usq * ghat / (usq + x1 * x1)
            e2 = usq * ghat / (usq + x2 * x2)
            m1 = usq * gc / (usq + x1 * x1)
            m2 = usq * gc / (usq + x2 * x2)
            out[8 * i : 8 * i + 8] = (
                e1.real, e1.imag, e2.real, e2.imag,
                m1.real, m1.imag, m2.real, m2.imag,
            )
        return out

    vec = _quad_vec_checked(integrand, 0.0, np.inf, rtol, "force iu integral")

    el_or = 0.0 + 0.0j
    mag_or = 0.0 + 0.0j
    el_r = 0.0 + 0.0j
    mag_r = 0.0 + 0.0j
    for i, (k, c_par, c_z, x1, x2) in enumerate(channels):
        j1 = vec[8 * i + 0] + 1j * vec[8 * i + 1]
        j2 = vec[8 * i + 2] + 1j * vec[8 * i + 3]
        jc1 = vec[8 * i + 4] + 1j * vec[8 * i + 5]
        jc2 = vec[8 * i + 6] + 1j * vec[8 * i + 7]
        el_or += x1 * j1 + np.conj(x2 * j2)
        w_mag = -c_par
        mag_or += w_mag * (jc1 - np.conj(jc2))

        if spectrum.omega_tilde(n, k) > 0.0:
            ge = green_scatter(model, z, x1, rtol=rtol)
            ghat1 = 0.5 * (
                c_par * ge.dz_tensor[0, 0] + c_z * ge.dz_tensor[2, 2]
            )
            el_r += x1 * x1 * ghat1
            if need_mag:
                mag_r += w_mag * x1 * green_curl(model, z, x1, rtol=rtol)
        if spectrum.omega_tilde(m, k) > 0.0:
            ge = green_scatter(model, z, x2, rtol=rtol)
            ghat2 = 0.5 * (
                c_par * ge.dz_tensor[0, 0] + c_z * ge.dz_tensor[2, 2]
            )
            el_r += np.conj(x2 * x2 * ghat2)
            if need_mag:
                mag_r -= np.conj(w_mag * x2 * green_curl(model, z, x2, rtol=rtol))

    return ForceBreakdown(
        pair=(m, n),
        el_or=_zvec(MU0 / math.pi * el_or),
        el_r=_zvec(MU0 * el_r),
        mag_or=_zvec(MU0 / math.pi * w_mn * mag_or),
        mag_r=_zvec(MU0 * w_mn * mag_r),
        omega_complex={k: x1 for (k, _cp, _cz, x1, _x2) in channels},
    )


def _two_level_params(atom: AtomSpec):
    if atom.n_levels != 2:
        raise DomainError("closed two-level forms require exactly two levels")
    d = atom.dipole(1, 0)
    return coupling_C_from_dipole(d), atom.omega(1, 0)


def _effective_eps_resonant(model: MaterialModel, omega_tilde: float, gamma_atom: float) -> complex:
    """Permittivity at the complex pole frequency w~ + i Gamma/2 for
    small widths: the atomic width adds to the medium linewidth."""
    p = model.permittivity
    if p is None:
        return complex(1.0)
    return 1.0 + p.omega_p**2 / (
        p.omega_t**2
        - omega_tilde**2
        - 1j * (gamma_atom + p.gamma) * omega_tilde
    )


def two_level_resonant_force(
    atom: AtomSpec,
    model: MaterialModel,
    spectrum: ShiftedSpectrum,
    z: float,
    perturbative: bool = False,
    use_shift: bool = True,
    use_broadening: bool = True,
    state: int = 1,
) -> float:
    """Resonant short-distance force on the two-level atom (z-component):

        F_r = -(3 C / z^4) (|eps(Omega)|^2 - 1) / |eps(Omega) + 1|^2,
        Omega = w~_10 + i Gamma/2.

    ``perturbative`` (or switching off both the shift and the
    broadening) evaluates the bare-frequency, medium-linewidth-only
    variant; the two switches separate the two body-induced effects for
    diagnostics.  The ground state carries no resonant force.
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if state == 0:
        return 0.0
    C, omega10 = _two_level_params(atom)
    if C == 0.0 or model.is_vacuum:
        return 0.0
    if perturbative:
        use_shift = False
        use_broadening = False
    omega_tilde = spectrum.omega_tilde(1, 0) if use_shift else omega10
    gamma_atom = spectrum.width(1) if use_broadening else 0.0
    eps = _effective_eps_resonant(model, omega_tilde, gamma_atom)
    return -(3.0 * C / z**4) * (abs(eps) ** 2 - 1.0) / abs(eps + 1.0) ** 2


def two_level_offresonant_force(
    atom: AtomSpec,
    model: MaterialModel,
    spectrum: ShiftedSpectrum,
    z: float,
    state: int = 1,
    perturbative: bool = False,
    use_shift: bool = True,
    use_broadening: bool = True,
    rtol: float = OFFRES_RTOL,
) -> float:
    """Off-resonant short-distance force on the two-level atom:

        F_or(excited) = (3 C / pi z^4) integral du
            (eps(iu)-1)/(eps(iu)+1)
            * w~ / (w~^2 + (u + Gamma/2)^2)
            * (w~^2 + u^2 + Gamma^2/4) / (w~^2 + (u - Gamma/2)^2),

    and F_or(ground) = -F_or(excited) exactly (the symmetric
    polarizability combinations of the two states differ only by sign).
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if state not in (0, 1):
        raise DomainError("state must be 0 or 1")
    C, omega10 = _two_level_params(atom)
    if C == 0.0 or model.is_vacuum:
        return 0.0
    if perturbative:
        use_shift = False
        use_broadening = False
    w = spectrum.omega_tilde(1, 0) if use_shift else omega10
    g_half = 0.5 * (spectrum.width(1) if use_broadening else 0.0)
    wsq = w * w
    g_half_sq = g_half * g_half

    def integrand(u):
        eps = eval_eps_iu(model, u)
        up = u + g_half
        um = u - g_half
        return (
            (eps - 1.0)
            / (eps + 1.0)
            * w
            / (wsq + up * up)
            * (wsq + u * u + g_half_sq)
            / (wsq + um * um)
        )

    val = _quad_checked(integrand, 0.0, np.inf, rtol, "off-resonant force")
    f_excited = 3.0 * C / (math.pi * z**4) * val
    return f_excited if state == 1 else -f_excited
