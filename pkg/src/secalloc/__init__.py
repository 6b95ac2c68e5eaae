"""Secrecy-rate-optimal transmit power allocation for MIMO wiretap channels
with statistical eavesdropper CSI, for Gaussian and M-ary inputs.

Pipeline: a deterministic bound replaces the ergodic eavesdropper rate, the
dominating eavesdropper collapses to a scaled identity, a generalized SVD
reduces the matrix problem to scalar wiretap subchannels, a water-filling
allocator solves the Gaussian-input problem, and per-subchannel power caps
keep finite-alphabet secrecy rates from collapsing at high power.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DecompositionError,
    DegenerateInputError,
    InputError,
    NumericalError,
    SecallocError,
)
from .model import (
    ChannelInstance,
    Eavesdropper,
    EquivalentEavesdropper,
    gaussian_rate_destination,
    jensen_gap_montecarlo,
    surrogate_secrecy_objective,
    validate_covariance,
    worst_eavesdropper,
)
from .gsvd import (
    GsvdFactors,
    SubchannelSet,
    extract_subchannels,
    gsvd_decompose,
    reassemble_covariance,
    reconstruction_report,
)
from .allocator import (
    AllocationProblem,
    AllocationResult,
    budget_sweep,
    kkt_residual,
    solve_equal_weight,
    solve_gaussian,
    subchannel_objective,
)
from .finite_alphabet import (
    Constellation,
    QuadratureSpec,
    ScalarWiretap,
    beta_alpha_curve,
    builtin_constellation,
    exponential_mmse,
    find_popt,
    find_popt_from_mmse,
    gaussian_mmse,
    i_mmse_residual,
    mmse,
    mmse_inverse,
    mutual_information,
    mutual_information_mc,
    secrecy_rate_derivative,
    secrecy_rate_finite,
    subchannel_caps,
    sum_secrecy_finite,
)
from .config import ExperimentConfig, load_config, parse_config
from .harness import SweepRecord, emit_csv, emit_json, load_records, run_cases
