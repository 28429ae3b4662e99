"""classblaser: class-B laser dynamics on the truncated Fock ladder.

Simulates the joint atom-photon occupation and the photon-number
distribution of a many-atom laser whose polarization is slaved by fast
dephasing: steady states, photon statistics, delayed correlations
g2(tau), and lasing thresholds across device sizes from a single atom to
the thermodynamic limit.
"""

__version__ = "0.1.0"

from .errors import ConfigError, NoSignalError, NumericalError
from .model import (DerivedParams, LaserState, ModelParams, StateDerivative,
                    adiabatic_rho_a, class_a_like_steady, derived_params,
                    rhs_class_a_like, rhs_class_b)
from .integrate import (EvolveResult, IntegrationOptions, SteadyStateResult,
                        evolve, initial_state, rk4_step, steady_state)
from .observables import (NO_SIGNAL_FLOOR, Observables,
                          detailed_balance_residual, g2_zero,
                          mean_photon_number, observables_of,
                          population_inversion, upper_occupation)
from .correlations import (CorrelationTrace, Extremum, LagReport, ThetaState,
                           conditional_upper_occupation, extrema_lag_analysis,
                           find_extrema, g2_tau, make_theta_initial)
from .analytics import (ClassAParams, ClassAThresholds, NumericThreshold,
                        ThresholdReport, class_a_exact_distribution,
                        class_a_like_threshold, class_a_thresholds,
                        class_b_threshold_estimate, numeric_threshold,
                        threshold_correction, xi_roots)
from .presets import PRESETS, RegimePreset, get_preset, preset_options
from .sweep import (CorrelationSpec, Manifest, SweepSpec, run_correlation,
                    run_sweep, run_threshold)

__all__ = [
    "ConfigError", "NoSignalError", "NumericalError",
    "ModelParams", "DerivedParams", "LaserState", "StateDerivative",
    "derived_params", "rhs_class_b", "rhs_class_a_like", "adiabatic_rho_a",
    "class_a_like_steady",
    "IntegrationOptions", "EvolveResult", "SteadyStateResult",
    "rk4_step", "evolve", "steady_state", "initial_state",
    "NO_SIGNAL_FLOOR", "Observables", "mean_photon_number", "g2_zero",
    "upper_occupation", "population_inversion", "detailed_balance_residual",
    "observables_of",
    "ThetaState", "CorrelationTrace", "Extremum", "LagReport",
    "make_theta_initial", "g2_tau", "conditional_upper_occupation",
    "find_extrema", "extrema_lag_analysis",
    "ThresholdReport", "NumericThreshold", "ClassAParams", "ClassAThresholds",
    "class_a_like_threshold", "xi_roots", "threshold_correction",
    "class_b_threshold_estimate", "numeric_threshold",
    "class_a_exact_distribution", "class_a_thresholds",
    "PRESETS", "RegimePreset", "get_preset", "preset_options",
    "SweepSpec", "CorrelationSpec", "Manifest", "run_sweep",
    "run_correlation", "run_threshold",
]
