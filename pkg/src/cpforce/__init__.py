"""Casimir-Polder forces on a multilevel atom near an absorbing,
dispersing magnetodielectric half space.

Core objects: a single-resonance material model, the planar scattering
Green tensor at real/imaginary/complex frequencies, body-induced level
shifts and widths (perturbative and self-consistent), the four-part
nonperturbative force decomposition, and Markovian internal-state
dynamics driving the time-dependent force.
"""

__version__ = "0.1.0"

from .atom import AtomSpec, PolarizabilityEval, alpha0, alpha0_scalar, alpha_generalized, dipole_vector
from .dynamics import DensityMatrix, ForceTrajectory, evolve_offdiagonal, evolve_populations, force_trajectory
from .errors import (
    ConfigError,
    ConvergenceError,
    CPForceError,
    DegeneracyError,
    DomainError,
    PoleError,
    QuadratureError,
    UnphysicalRegimeError,
)
from .force import (
    ForceBreakdown,
    PotentialEval,
    force_component_general,
    perturbative_force,
    two_level_offresonant_force,
    two_level_resonant_force,
    vdw_potential,
    vdw_potential_offres,
    vdw_potential_res,
)
from .greens import (
    GreenEval,
    ReflectionPair,
    green_curl,
    green_curl_iu,
    green_scatter,
    green_scatter_iu,
    green_scatter_real,
    reflection_coeffs,
    short_distance_green_iu,
    short_distance_green_real,
    weighted_iu_short_distance,
)
from .material import (
    DrudeLorentzParams,
    MaterialModel,
    eval_eps,
    eval_eps_iu,
    eval_mu,
    eval_mu_iu,
    surface_resonance,
)
from .spectra import (
    ChannelData,
    ShiftedSpectrum,
    assert_nondegenerate,
    bare_spectrum,
    build_spectrum_general,
    check_offresonant_bound,
    shift_channel_general,
    shift_channel_parts,
    solve_two_level_shift,
    two_level_perturbative,
    two_level_shift_roots,
    width_channel_general,
)
from .units import UnitSystem, coupling_C, coupling_C_from_dipole, reduced_C_over_hbar_z3

__all__ = [name for name in dir() if not name.startswith("_")]
