"""Number-optimized quantum sensing of a saturable absorber with Gaussian probes."""

__version__ = "0.1.0"

from .errors import (BoundaryOptimum, BracketExcludesOptimum, InsufficientColumn,  # noqa: E402
                     IntegrationDidNotConverge, NegativeMagnitude, NegativePhotonNumber,
                     NoConvergence, NonFiniteField, NonPositiveVariance, SensingError)
from .state import (ProbeState, QuadratureStats, input_quadrature_stats,  # noqa: E402
                    mean_photon_number, validate_state)
from .medium import (Medium, Response, complex_response, output_quadrature_stats,  # noqa: E402
                     power_broadened_linewidth)
from .fisher import (FisherBreakdown, Target, fisher_information, gaussian_fisher,  # noqa: E402
                     model_derivatives, numeric_fi_oracle)
from .optimizer import (AdvantageResult, OptimizationResult, OptimizerConfig, Regime,  # noqa: E402
                        StateFamily, classify_regime, optimize, quantum_advantage)
