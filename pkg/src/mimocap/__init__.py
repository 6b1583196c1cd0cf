"""Capacity simulations for multi-antenna fading channels.

Monte Carlo estimation of ergodic capacity, outage capacity and
water-filling capacity for flat-fading and multitap spatial-multiplexing
channels, with reproducible counter-based random streams and a compiled
kernel backend (pure NumPy fallback selected automatically at import).
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .capacity import (
    PowerAllocation,
    SnrSpec,
    asymptotic_large_tx,
    capacity_csit,
    corr_model_mi,
    instant_capacity_flat,
    low_snr_capacity,
    ofdm_mi_uniform,
    per_tone_mi,
    waterfill,
)
from .channels import (
    AntennaConfig,
    CorrelationProfile,
    RngStream,
    TapSet,
    ToneGrid,
    build_correlation,
    correlation_roots,
    expdecay_tap_powers,
    freq_response,
    freq_response_all,
    sample_iid_cgaussian,
    sample_tap_channel,
    uniform_tap_powers,
)
from .errors import (
    CholeskyBreakdownError,
    DimensionMismatchError,
    EmptyDistributionError,
    IndefiniteInputError,
    InvalidProfileError,
    MimocapError,
    NoPositiveModesError,
    NotHermitianError,
    PowerBudgetExceededError,
    UsageError,
)
from .estimators import (
    CapacityEstimate,
    EmpiricalDistribution,
    SweepConfig,
    SweepTable,
    collect_distribution,
    ergodic_estimate,
    outage_capacity,
    snr_grid,
    snr_sweep,
)
from .linalg import (
    EigenSpectrum,
    as_complex_matrix,
    gram,
    herm_eigvals,
    hermitian_defect,
    logdet2_id_plus,
    psd_sqrt,
    require_hermitian,
)

__version__ = "0.1.0"

__all__ = [
    "AntennaConfig",
    "CapacityEstimate",
    "CholeskyBreakdownError",
    "CorrelationProfile",
    "DimensionMismatchError",
    "EigenSpectrum",
    "EmpiricalDistribution",
    "EmptyDistributionError",
    "IndefiniteInputError",
    "InvalidProfileError",
    "KERNEL_BACKEND",
    "MimocapError",
    "NoPositiveModesError",
    "NotHermitianError",
    "PowerAllocation",
    "PowerBudgetExceededError",
    "RngStream",
    "SnrSpec",
    "SweepConfig",
    "SweepTable",
    "TapSet",
    "ToneGrid",
    "UsageError",
    "as_complex_matrix",
    "asymptotic_large_tx",
    "build_correlation",
    "capacity_csit",
    "collect_distribution",
    "corr_model_mi",
    "correlation_roots",
    "ergodic_estimate",
    "expdecay_tap_powers",
    "freq_response",
    "freq_response_all",
    "gram",
    "herm_eigvals",
    "hermitian_defect",
    "instant_capacity_flat",
    "logdet2_id_plus",
    "low_snr_capacity",
    "ofdm_mi_uniform",
    "outage_capacity",
    "per_tone_mi",
    "psd_sqrt",
    "require_hermitian",
    "sample_iid_cgaussian",
    "sample_tap_channel",
    "snr_grid",
    "snr_sweep",
    "uniform_tap_powers",
    "waterfill",
    "__version__",
]
