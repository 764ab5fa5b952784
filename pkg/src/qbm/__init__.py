"""Exactly soluble quantum Brownian motion of a harmonic oscillator
coupled to a discretized bath, in the one-excitation sector.

The workflow is: build a bath (`build_bath`), diagonalize it through the
secular equation (`solve_spectrum`), then evaluate dynamics — survival
amplitude, transition probabilities, mean occupations, mean position and
the time-local Langevin coefficients — as spectral sums over the result.
"""

from . import errors
from .config import RunConfig, parse_config, serialize_config
from .evolution import (
    OccupationVector,
    ProbabilityMatrix,
    oscillator_population,
    population_decomposition,
    population_series,
    populations,
    survival_amplitude,
    survival_probability,
    transition_probabilities,
)
from .langevin import (
    CoefficientSample,
    GammaEstimate,
    LangevinInput,
    coefficient_series,
    coefficients,
    estimate_gamma,
    gamma_from_survival,
    golden_rule_rate,
    mean_position,
    moment_signal,
    recurrence_time,
)
from .model import (
    DiscretizedBath,
    InitialOccupations,
    ModelParams,
    bose_einstein,
    build_bath,
    hamiltonian_matrix,
    thermal_occupations,
)
from .series import TimeGrid, TimeSeries
from .spectrum import (
    Spectrum,
    dense_diagonalize_oracle,
    eigenvector_overlap,
    overlap_matrix,
    secular_residual,
    solve_spectrum,
)

__version__ = "0.1.0"
