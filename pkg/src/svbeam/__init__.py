"""Singular-vector beam selection for downlink multiuser MIMO.

Per-user SVD candidates, exhaustive and greedy interference-aware subset
selection, link metrics, exact search-size analytics, and a reproducible
experiment harness with a CSV-emitting CLI.
"""

from .analytics import (
    bernoulli,
    gain_ratio_exact,
    gain_ratio_stirling,
    n_iter_exhaustive,
    n_iter_greedy_closed,
    n_iter_greedy_direct,
)
from .beamspace import (
    CandidateBeams,
    CorrelationMatrix,
    IndexSelection,
    candidate_correlation,
    decompose,
    interference_objective,
    selection_correlation,
)
from .channel import (
    ArrayGeometry,
    ChannelSet,
    SVChannelConfig,
    generate_sv_channels,
    load_channels,
    save_channels,
    steering_vector,
    sv_channel_from_paths,
)
from .errors import (
    BudgetExceededError,
    ChannelFormatError,
    ConfigurationError,
    NumericalError,
)
from .harness import (
    ExperimentConfig,
    RunRecord,
    report_iterations,
    run_experiment,
    sweep_gamma,
    sweep_grid,
)
from .metrics import (
    LinkBudget,
    interference_direct,
    interference_via_corr,
    pairwise_interference_terms,
    selection_identity_residual,
    spectral_efficiency,
)
from .selection import (
    DEFAULT_BUDGET,
    GainConstraint,
    SelectionResult,
    g_iosvb,
    iosvb,
    svbs,
)

__version__ = "0.1.0"
