"""Reduced-order modeling workbench for the generalized Kuramoto-Sivashinsky
equation: full-order finite-difference simulation, snapshot campaigns,
POD/DEIM basis construction, reduced-system integration, and evaluation
metrics, with a CLI for the bundled experiment recipes."""

__version__ = "0.1.0"

from .deim import DeimOperator, build_deim_operator, deim_from_basis, deim_indices
from .errors import (ClockMismatchError, FormatError, GksRomError,
                     IntegrationFailureError, NumericalError, ValidationError)
from .initial import (BUILTIN_INITIAL_CONDITIONS, InitialConditionSpec,
                      builtin_initial_condition, evaluate_initial_condition,
                      sample_initial_condition)
from .integrate import ImexSolver, Trajectory, integrate_batch, simulate, step_imex
from .metrics import (ErrorSeries, PowerSpectrum, averaged_prediction_time,
                      power_spectrum, prediction_time, prediction_time_flagged,
                      relative_error_series)
from .operators import (LinearOperator, build_linear_operator, flux_divergence,
                        flux_midpoint, gks_symbol, nonlinear_term)
from .pde import GksParams, Grid, StabilityInfo, State, stability_info
from .pod import (PodBasis, RankRule, RankSelectionWarning, compute_pod_basis,
                  compute_svd_spectrum, cumulative_ratio, select_rank)
from .rom import (DEIM, GALERKIN, RomSystem, RomTrajectory, assemble_rom,
                  integrate_rom, reduced_nonlinear)
from .snapshots import (SnapshotMatrix, TrainingPlan, builtin_training_sets,
                        derive_seed, run_campaign, training_set)
