"""volmi: volume mutual information, monotone measures, and finite-task
truthful payment mechanisms."""

from .core import (ColumnStochasticMatrix, JointDistribution, SliceId,
                   StpCoords, apply_strategies, find_degrading_matrix,
                   from_stp, is_less_informative, left_multiply,
                   lower_set_vertices_binary, random_joint, random_stochastic,
                   same_slice, slice_id, to_stp)
from .errors import ConfigurationError, PreconditionError, VolmiError
from .estimators import (AveragedUStat, CompiledEstimator, FirstK, SampleBatch,
                         compile_ube, evaluate_ube, exact_expectation)
from .measures import MeasureSpec, bmi, dmi, dmi_squared_poly, fmi, qmi, smi
from .mechanisms import (AgentProfile, MechanismSpec, expected_payment,
                         run_mechanism, simulate, truthfulness_audit,
                         vmi_star_measure, vmi_star_payment)
from .optimizer import (EffortModel, EffortStrategy, PaymentScheme,
                        approximation_sweep, compute_vstar,
                        dmi_counterexample_check, example_effort_model,
                        find_equilibria, select_equilibrium,
                        substituted_threshold, threshold_payments)
from .polyalg import (MultiPoly, det_poly, integrate_out_T,
                      simplex_monomial_integral)
from .vmi import (DensitySpec, VmiClosedForm, convergence_probe,
                  dirichlet_density, sample_slice, slice_volume,
                  threshold_indicator, vmi_numeric, vmi_symbolic)
from .viz import (SliceGrid, density_heatmap_grid, emit, marching_squares,
                  slice_grid)

__version__ = "0.1.0"
