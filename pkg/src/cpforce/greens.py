"""Equal-position scattering Green tensor of a semi-infinite half space.

The half space fills z < 0; the atom sits at height z > 0 in vacuum.  For
this geometry the scattering part of the electromagnetic Green tensor at
coincident points is diagonal, with equal xx and yy entries, and is
assembled from a single wavenumber integral over s- and p-polarized
reflection coefficients.  The z-dependence of the integrand is a pure
exponential, so the z-derivative (needed for forces) is obtained
analytically by differentiating under the integral.

Conventions:

* all frequencies in units of the medium resonance, lengths in units of
  the resonance wavelength (speed of light = 1/(2 pi), see units module);
* complex square roots are branch-selected by Im >= 0 explicitly, never
  by relying on the library default;
* at imaginary frequency the integration variable is the (real) decay
  constant b0 = |Im beta_0|, which makes the integrand smooth, positive
  decaying, and the tensor manifestly real.

The real-frequency propagating sector is integrated in the wavenumber
directly after the substitution q = (omega/c) sin(t); at the distances
this package targets (z well below the wavelength) the oscillatory
factor exp(2 i beta_0 z) completes only a fraction of a period, so no
special oscillatory machinery is warranted.  For z approaching the
wavelength scale the quadrature still converges but degrades; that
regime is outside the validity of the short-distance physics anyway.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, quad_vec

from .errors import DomainError, PoleError, QuadratureError
from .material import (
    MaterialModel,
    eval_eps,
    eval_eps_iu,
    eval_mu,
    eval_mu_iu,
)
from .units import C_LIGHT

#: relative tolerance of the imaginary-frequency quadrature
IU_RTOL = 1e-9
#: relative tolerance of the real-frequency quadrature
REAL_RTOL = 1e-8

_POLE_GUARD = 1e-12
# absolute floor so identically-underflowed integrands count as converged
_EPSABS_FLOOR = 1e-300


@dataclass(frozen=True)
class ReflectionPair:
    """s- and p-polarization reflection coefficients of the interface."""

    r_s: complex
    r_p: complex


@dataclass(frozen=True)
class GreenEval:
    """Equal-position scattering Green tensor and its height derivative.

    tensor    : 3x3, units of inverse length
    dz_tensor : d(tensor)/dz of the equal-position object (both arguments
                moved together), units of inverse length squared
    """

    tensor: np.ndarray
    dz_tensor: np.ndarray
    z: float
    omega: complex

    def contract(self, d_left, d_right) -> complex:
        """d_left . G . d_right for the diagonal planar tensor."""
        t = self.tensor
        return (
            t[0, 0] * (d_left[0] * d_right[0] + d_left[1] * d_right[1])
            + t[2, 2] * d_left[2] * d_right[2]
        )

    def contract_dz(self, d_left, d_right) -> complex:
        t = self.dz_tensor
        return (
            t[0, 0] * (d_left[0] * d_right[0] + d_left[1] * d_right[1])
            + t[2, 2] * d_left[2] * d_right[2]
        )


def _sqrt_up(w: complex) -> complex:
    """Complex square root with the Im >= 0 branch enforced."""
    r = cmath.sqrt(w)
    if r.imag < 0.0:
        r = -r
    return r


def reflection_coeffs(eps: complex, mu: complex, q: float, omega: complex) -> ReflectionPair:
    """Fresnel reflection coefficients at transverse wavenumber q.

    beta0^2 = omega^2/c^2 - q^2 and beta^2 = eps mu omega^2/c^2 - q^2,
    both square roots taken with Im >= 0.  A denominator within
    1e-12 * |eps beta0| of zero means a surface-mode pole sits on the
    integration path (lossless input); this is rejected rather than
    silently losing digits.
    """
    k2 = (omega / C_LIGHT) ** 2
    beta0 = _sqrt_up(k2 - q * q)
    beta = _sqrt_up(eps * mu * k2 - q * q)
    den_s = mu * beta0 + beta
    den_p = eps * beta0 + beta
    guard = _POLE_GUARD * abs(eps * beta0)
    if abs(den_p) <= guard or abs(den_s) <= guard:
        raise PoleError(
            "surface-mode pole on the integration path at q=%g" % q, location=q
        )
    return ReflectionPair(
        r_s=(mu * beta0 - beta) / den_s, r_p=(eps * beta0 - beta) / den_p
    )


def _zero_green(z: float, omega: complex) -> GreenEval:
    return GreenEval(
        tensor=np.zeros((3, 3), dtype=complex),
        dz_tensor=np.zeros((3, 3), dtype=complex),
        z=z,
        omega=omega,
    )


def _assemble(xx, zz, dxx, dzz, z, omega) -> GreenEval:
    tensor = np.diag([xx, xx, zz]).astype(complex)
    dz_tensor = np.diag([dxx, dxx, dzz]).astype(complex)
    return GreenEval(tensor=tensor, dz_tensor=dz_tensor, z=z, omega=omega)


def _quad_vec_checked(f, a, b, rtol, what, epsabs=_EPSABS_FLOOR):
    res, err, info = quad_vec(
        f, a, b, epsabs=epsabs, epsrel=rtol, norm="max", full_output=True
    )
    if not info.success:
        raise QuadratureError(
            "quadrature for %s did not converge (error bound %g)" % (what, err),
            estimate=res,
            error_bound=err,
        )
    return res


def _quad_checked(f, a, b, rtol, what, limit=200):
    """Scalar adaptive quadrature that raises instead of warning when the
    refinement budget is exhausted, carrying the achieved estimate."""
    out = quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=limit, full_output=1)
    if len(out) > 3 or not math.isfinite(out[0]):
        raise QuadratureError(
            "quadrature for %s did not converge: %s"
            % (what, out[3].strip() if len(out) > 3 else "non-finite result"),
            estimate=out[0],
            error_bound=out[1],
        )
    return out[0]


def green_scatter_iu(model: MaterialModel, z: float, u: float, rtol: float = IU_RTOL) -> GreenEval:
    """Scattering Green tensor at imaginary frequency i*u (u > 0).

    Integrates over the decay constant b0 from u/c upward; the factor
    exp(-2 b0 z) makes the integrand exponentially localized.  The
    result is real.
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if not u > 0.0:
        raise DomainError("imaginary-frequency coordinate u must be positive")
    if model.is_vacuum:
        return _zero_green(z, 1j * u)

    eps = eval_eps_iu(model, u)
    mu = eval_mu_iu(model, u)
    a = u / C_LIGHT
    a2 = a * a
    em1 = eps * mu - 1.0
    scale = z / 3.0  # brings the derivative rows onto the tensor rows' scale

    def f(b0):
        b0sq = b0 * b0
        b = math.sqrt(b0sq + em1 * a2)
        rs = (mu * b0 - b) / (mu * b0 + b)
        rp = (eps * b0 - b) / (eps * b0 + b)
        damp = math.exp(-2.0 * b0 * z)
        xx = (rs - rp * b0sq / a2) * damp
        zz = -2.0 * rp * (b0sq - a2) / a2 * damp
        return np.array([xx, zz, -2.0 * b0 * xx * scale, -2.0 * b0 * zz * scale])

    # analytic envelope of the integral (|r| <= 1 on the imaginary axis):
    # allows deep-tail evaluations, where the exponent has underflowed,
    # to converge on an absolute criterion without losing relative
    # accuracy anywhere the result is significant
    env = math.exp(-2.0 * a * z) * (
        0.5 / z + (a2 / (2.0 * z) + a / (2.0 * z**2) + 0.25 / z**3) / a2
    )
    epsabs = max(_EPSABS_FLOOR, 1e-3 * rtol * env)
    vec = _quad_vec_checked(
        f, a, np.inf, rtol, "G(z,z,iu)", epsabs=epsabs
    ) / (8.0 * math.pi)
    return _assemble(vec[0], vec[1], vec[2] / scale, vec[3] / scale, z, 1j * u)


def _green_real_propagating(eps, mu, z, omega, rtol):
    """Propagating sector (q < omega/c) after q = k0 sin(t)."""
    k0 = omega / C_LIGHT
    scale = max(z, 1.0 / (2.0 * k0))

    def f(t):
        st = math.sin(t)
        ct = math.cos(t)
        q = k0 * st
        beta0 = k0 * ct
        beta = _sqrt_up((eps * mu - st * st) * k0 * k0)
        den_s = mu * beta0 + beta
        den_p = eps * beta0 + beta
        guard = _POLE_GUARD * abs(eps * beta0)
        if abs(den_p) <= guard or abs(den_s) <= guard:
            raise PoleError("surface-mode pole at q=%g" % q, location=q)
        rs = (mu * beta0 - beta) / den_s
        rp = (eps * beta0 - beta) / den_p
        phase = cmath.exp(2j * beta0 * z)
        # measure: dq q / beta0 = k0 sin(t) dt
        w = k0 * st * phase
        xx = w * (rs - rp * ct * ct)
        zz = w * (2.0 * rp * st * st)
        dfac = 2j * beta0 * scale
        out = np.empty(8)
        vals = (xx, zz, xx * dfac, zz * dfac)
        for i, v in enumerate(vals):
            out[i] = v.real
            out[i + 4] = v.imag
        return out

    vec = _quad_vec_checked(f, 0.0, 0.5 * math.pi, rtol, "G propagating sector")
    cvec = vec[:4] + 1j * vec[4:]
    return 1j / (8.0 * math.pi) * np.array(
        [cvec[0], cvec[1], cvec[2] / scale, cvec[3] / scale]
    )


def _green_real_evanescent(eps, mu, z, omega, rtol):
    """Evanescent sector (q > omega/c) in the decay constant b0."""
    k0 = omega / C_LIGHT
    k0sq = k0 * k0
    emk = (eps * mu - 1.0) * k0sq
    scale = z / 3.0

    def f(b0):
        b0sq = b0 * b0
        beta0 = 1j * b0
        beta = _sqrt_up(emk - b0sq)
        den_s = mu * beta0 + beta
        den_p = eps * beta0 + beta
        guard = _POLE_GUARD * abs(eps * beta0)
        if abs(den_p) <= guard or abs(den_s) <= guard:
            raise PoleError(
                "surface-mode pole at b0=%g" % b0, location=math.sqrt(b0sq + k0sq)
            )
        rs = (mu * beta0 - beta) / den_s
        rp = (eps * beta0 - beta) / den_p
        damp = math.exp(-2.0 * b0 * z)
        xx = damp * (rs + rp * b0sq / k0sq)
        zz = damp * (2.0 * rp * (k0sq + b0sq) / k0sq)
        out = np.empty(8)
        vals = (xx, zz, -2.0 * b0 * xx * scale, -2.0 * b0 * zz * scale)
        for i, v in enumerate(vals):
            out[i] = v.real
            out[i + 4] = v.imag
        return out

    vec = _quad_vec_checked(f, 0.0, np.inf, rtol, "G evanescent sector")
    cvec = vec[:4] + 1j * vec[4:]
    return 1.0 / (8.0 * math.pi) * np.array(
        [cvec[0], cvec[1], cvec[2] / scale, cvec[3] / scale]
    )


def _green_complex_q(eps, mu, z, omega, rtol):
    """Direct q-integral for Im(omega) > 0 (no real-axis split needed)."""
    k2 = (omega / C_LIGHT) ** 2
    c2w2 = 1.0 / k2
    qc = 2.0 * abs(omega) / C_LIGHT
    scale = z / 3.0

    def f(q):
        qsq = q * q
        beta0 = _sqrt_up(k2 - qsq)
        beta = _sqrt_up(eps * mu * k2 - qsq)
        den_s = mu * beta0 + beta
        den_p = eps * beta0 + beta
        guard = _POLE_GUARD * abs(eps * beta0)
        if abs(den_p) <= guard or abs(den_s) <= guard:
            raise PoleError("surface-mode pole at q=%g" % q, location=q)
        rs = (mu * beta0 - beta) / den_s
        rp = (eps * beta0 - beta) / den_p
        w = (q / beta0) * cmath.exp(2j * beta0 * z)
        xx = w * (rs - rp * c2w2 * beta0 * beta0)
        zz = w * (rp * c2w2 * 2.0 * qsq)
        dfac = 2j * beta0 * scale
        out = np.empty(8)
        vals = (xx, zz, xx * dfac, zz * dfac)
        for i, v in enumerate(vals):
            out[i] = v.real
            out[i + 4] = v.imag
        return out

    vec = _quad_vec_checked(f, 0.0, qc, rtol, "G complex-frequency (inner)")
    vec = vec + _quad_vec_checked(f, qc, np.inf, rtol, "G complex-frequency (tail)")
    cvec = vec[:4] + 1j * vec[4:]
    return 1j / (8.0 * math.pi) * np.array(
        [cvec[0], cvec[1], cvec[2] / scale, cvec[3] / scale]
    )


def green_scatter(model: MaterialModel, z: float, omega: complex, rtol: float = REAL_RTOL) -> GreenEval:
    """Scattering Green tensor at real or upper-half-plane complex omega.

    For real omega the wavenumber integral is split at q = omega/c into
    the propagating and evanescent sectors; for Im(omega) > 0 the
    integrand is evaluated directly along the real q axis (it is analytic
    there and exponentially damped).
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    omega = complex(omega)
    if omega.imag < 0.0:
        raise DomainError("omega must lie in the closed upper half plane")
    if omega == 0.0:
        raise DomainError("omega must be nonzero")
    if model.is_vacuum:
        return _zero_green(z, omega)

    eps = eval_eps(model, omega)
    mu = eval_mu(model, omega)
    if omega.imag == 0.0:
        w = omega.real
        if w <= 0.0:
            raise DomainError("real frequencies must be positive")
        vec = _green_real_propagating(eps, mu, z, w, rtol)
        vec = vec + _green_real_evanescent(eps, mu, z, w, rtol)
    else:
        vec = _green_complex_q(eps, mu, z, omega, rtol)
    return _assemble(vec[0], vec[1], vec[2], vec[3], z, omega)


def green_scatter_real(model: MaterialModel, z: float, omega: float, rtol: float = REAL_RTOL) -> GreenEval:
    """Scattering Green tensor at real omega > 0 (propagating + evanescent)."""
    if complex(omega).imag != 0.0:
        raise DomainError("green_scatter_real expects a real frequency")
    return green_scatter(model, z, float(omega), rtol=rtol)


def green_curl_iu(model: MaterialModel, z: float, u: float, rtol: float = IU_RTOL) -> float:
    """Scalar amplitude of the coincident-point curl of the Green tensor
    at imaginary frequency.

    The curl with respect to the first argument, evaluated at
    coincidence, has the planar structure g_c(z, omega) (x)(y) - (y)(x);
    this returns g_c(z, iu), which is real.
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if not u > 0.0:
        raise DomainError("imaginary-frequency coordinate u must be positive")
    if model.is_vacuum:
        return 0.0
    eps = eval_eps_iu(model, u)
    mu = eval_mu_iu(model, u)
    a = u / C_LIGHT
    a2 = a * a
    em1 = eps * mu - 1.0

    def f(b0):
        b = math.sqrt(b0 * b0 + em1 * a2)
        rs = (mu * b0 - b) / (mu * b0 + b)
        rp = (eps * b0 - b) / (eps * b0 + b)
        return b0 * (rp - rs) * math.exp(-2.0 * b0 * z)

    env = 2.0 * math.exp(-2.0 * a * z) * (a / (2.0 * z) + 0.25 / z**2)
    val, err, info = quad_vec(
        f,
        a,
        np.inf,
        epsabs=max(_EPSABS_FLOOR, 1e-3 * rtol * env),
        epsrel=rtol,
        full_output=True,
    )
    if not info.success:
        raise QuadratureError(
            "curl quadrature did not converge", estimate=val, error_bound=err
        )
    return -val / (8.0 * math.pi)


def green_curl(model: MaterialModel, z: float, omega: complex, rtol: float = REAL_RTOL) -> complex:
    """Scalar curl amplitude g_c(z, omega) for real or complex omega."""
    if not z > 0.0:
        raise DomainError("height z must be positive")
    omega = complex(omega)
    if omega.imag < 0.0:
        raise DomainError("omega must lie in the closed upper half plane")
    if abs(omega) == 0.0:
        raise DomainError("omega must be nonzero")
    if model.is_vacuum:
        return 0.0
    eps = eval_eps(model, omega)
    mu = eval_mu(model, omega)

    def _coeff_diff(beta0, beta):
        den_s = mu * beta0 + beta
        den_p = eps * beta0 + beta
        guard = _POLE_GUARD * abs(eps * beta0)
        if abs(den_p) <= guard or abs(den_s) <= guard:
            raise PoleError("surface-mode pole on the path", location=beta0)
        return (eps * beta0 - beta) / den_p - (mu * beta0 - beta) / den_s

    if omega.imag == 0.0:
        w = omega.real
        if w <= 0.0:
            raise DomainError("real frequencies must be positive")
        k0 = w / C_LIGHT
        k0sq = k0 * k0
        emk = (eps * mu - 1.0) * k0sq

        def f_prop(t):
            st = math.sin(t)
            ct = math.cos(t)
            beta0 = k0 * ct
            beta = _sqrt_up((eps * mu - st * st) * k0sq)
            v = k0sq * st * ct * _coeff_diff(beta0, beta) * cmath.exp(2j * beta0 * z)
            return np.array([v.real, v.imag])

        def f_evan(b0):
            beta = _sqrt_up(emk - b0 * b0)
            v = b0 * _coeff_diff(1j * b0, beta) * math.exp(-2.0 * b0 * z)
            return np.array([v.real, v.imag])

        vec = _quad_vec_checked(f_prop, 0.0, 0.5 * math.pi, rtol, "curl propagating")
        vec = vec + _quad_vec_checked(f_evan, 0.0, np.inf, rtol, "curl evanescent")
    else:
        k2 = (omega / C_LIGHT) ** 2

        def f(q):
            beta0 = _sqrt_up(k2 - q * q)
            beta = _sqrt_up(eps * mu * k2 - q * q)
            v = q * _coeff_diff(beta0, beta) * cmath.exp(2j * beta0 * z)
            return np.array([v.real, v.imag])

        qc = 2.0 * abs(omega) / C_LIGHT
        vec = _quad_vec_checked(f, 0.0, qc, rtol, "curl (inner)")
        vec = vec + _quad_vec_checked(f, qc, np.inf, rtol, "curl (tail)")
    return -(vec[0] + 1j * vec[1]) / (8.0 * math.pi)


def short_distance_green_real(eps_at_omega: complex, z: float, omega: complex) -> GreenEval:
    """Closed-form short-distance (quasi-static) limit of the tensor.

    (c^2 / (32 pi omega^2 z^3)) (eps-1)/(eps+1) diag(1, 1, 2); valid for
    z sqrt(|eps mu|) |omega| / c << 1.  The z-gradient is -3/z times the
    tensor.  Magnetic corrections enter only at relative order z^2 and
    are not included.
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if abs(omega) == 0.0:
        raise DomainError("omega must be nonzero")
    if abs(eps_at_omega + 1.0) == 0.0:
        raise PoleError(
            "eps = -1: surface-mode divergence of the short-distance form",
            location=omega,
        )
    pref = (
        C_LIGHT**2
        / (32.0 * math.pi * omega**2 * z**3)
        * (eps_at_omega - 1.0)
        / (eps_at_omega + 1.0)
    )
    tensor = pref * np.diag([1.0, 1.0, 2.0]).astype(complex)
    return GreenEval(
        tensor=tensor, dz_tensor=(-3.0 / z) * tensor, z=z, omega=complex(omega)
    )


def short_distance_green_iu(model: MaterialModel, z: float, u: float) -> GreenEval:
    """Pointwise short-distance limit on the imaginary axis.

    -(c^2 / (32 pi z^3 u^2)) (eps(iu)-1)/(eps(iu)+1) diag(1, 1, 2).
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    if not u > 0.0:
        raise DomainError("imaginary-frequency coordinate u must be positive")
    eps = eval_eps_iu(model, u)
    pref = -(C_LIGHT**2) / (32.0 * math.pi * z**3 * u * u) * (eps - 1.0) / (eps + 1.0)
    tensor = pref * np.diag([1.0, 1.0, 2.0]).astype(complex)
    return GreenEval(
        tensor=tensor, dz_tensor=(-3.0 / z) * tensor, z=z, omega=1j * u
    )


def weighted_iu_short_distance(f, model, z: float, rtol: float = IU_RTOL) -> np.ndarray:
    """Short-distance form of the weighted imaginary-frequency integral
    of the Green tensor:

        integral_0^inf du f(u) G(z, z, iu)
          ~ -(c^2 / (32 pi z^3)) integral_0^inf du f(u)/u^2
            (eps(iu)-1)/(eps(iu)+1)  diag(1, 1, 2).

    ``model`` may be a material model or a bare callable u -> eps(iu).
    The weight must make f(u)/u^2 integrable at u = 0 and decaying at
    infinity; non-integrable weights are rejected with a diagnostic.
    """
    if not z > 0.0:
        raise DomainError("height z must be positive")
    eps_iu = model if callable(model) else (lambda u: eval_eps_iu(model, u))

    def integrand(u):
        eps = eps_iu(u)
        return f(u) / (u * u) * (eps - 1.0) / (eps + 1.0)

    out = quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=rtol, limit=200, full_output=1)
    val, abserr = out[0], out[1]
    if len(out) > 3 or not math.isfinite(val):
        raise DomainError(
            "weighted integral did not converge (%s); the weight f(u) must "
            "make f(u)/u^2 integrable at 0 and decaying at infinity"
            % (out[3].strip() if len(out) > 3 else "non-finite result")
        )
    pref = -(C_LIGHT**2) / (32.0 * math.pi * z**3)
    return pref * val * np.diag([1.0, 1.0, 2.0])
