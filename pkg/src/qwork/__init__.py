"""Quantum work statistics for driven spin-1/2 ladders.

Statevector simulation of an anisotropic two-leg ladder under a
triangular antisymmetric field ramp: Chebyshev-filtered initial states,
second-order split-step propagation, spectral densities from survival
amplitudes, and fluctuation-relation diagnostics of the work done.
"""

__version__ = "0.1.0"

from .chebyshev import (FilterParams, gaussian_filter, make_filter_params,
                        spectral_bound)
from .config import ExperimentConfig, config_hash, load_config, save_config
from .errors import (AliasingError, CapacityError, ConfigError,
                     DimensionError, FitError, MissingInputError,
                     NumericalError, QworkError, ResolutionError)
from .evolve import (IntegratorConfig, ProtocolResult, ProtocolTrace,
                     reverse_check, run_protocol, step_pf2)
from .lattice import (FieldProtocol, LadderSpec, apply_hamiltonian, bonds,
                      energy_expectation, site_bit, term_groups)
from .spectral import (AutocorrSeries, SpectralDensity, autocorrelation,
                       average_series, dos_estimate, find_peaks,
                       invert_series, ldos, moments)
from .statevec import (StateVector, basis_state, check_capacity,
                       expectation_sz_total, haar_random, inner,
                       load_checkpoint, save_checkpoint, wrap_state)
from .workstats import (BetaFit, ScalingReport, WorkReport, delta_shift,
                        excluded_mass, exp_work_average, finite_size_scan,
                        fit_beta, make_work_report, mean_work,
                        shifted_distribution, support_window)

__all__ = [
    "__version__",
    "AliasingError", "AutocorrSeries", "BetaFit", "CapacityError",
    "ConfigError", "DimensionError", "ExperimentConfig", "FieldProtocol",
    "FilterParams", "FitError", "IntegratorConfig", "LadderSpec",
    "MissingInputError", "NumericalError", "ProtocolResult",
    "ProtocolTrace", "QworkError", "ResolutionError", "ScalingReport",
    "SpectralDensity", "StateVector", "WorkReport",
    "apply_hamiltonian", "autocorrelation", "average_series",
    "basis_state", "bonds", "check_capacity", "config_hash",
    "delta_shift", "dos_estimate", "energy_expectation", "excluded_mass",
    "exp_work_average", "expectation_sz_total", "find_peaks",
    "finite_size_scan", "fit_beta", "gaussian_filter", "haar_random",
    "inner", "invert_series", "ldos", "load_checkpoint", "load_config",
    "make_filter_params", "make_work_report", "mean_work", "moments",
    "reverse_check", "run_protocol", "save_checkpoint", "save_config",
    "shifted_distribution", "site_bit", "spectral_bound", "step_pf2",
    "support_window", "term_groups", "wrap_state",
]
