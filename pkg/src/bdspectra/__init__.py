"""Spectra of birth-and-death chains by shooting and type-driven bisection."""

from .chain_model import (
    BirthDeathChain,
    ChainSpec,
    WeightedPath,
    birth_death,
    bottleneck_path,
    ehrenfest,
    from_birth_death,
    metropolis_check,
    metropolis_hat,
    principal_subpath,
    simple_random_walk,
    uniform_path,
)
from .shooting import classify_type, rayleigh, shoot, shoot_clipped, shoot_reverse, sign_changes
from .solvers import (
    EigenEstimate,
    Spectrum,
    default_bracket,
    full_spectrum,
    iterate_L,
    locate_with_two_sided,
    solve_eigen_di,
    solve_gap_a1,
    solve_gap_a2,
)

__version__ = "0.1.0"
