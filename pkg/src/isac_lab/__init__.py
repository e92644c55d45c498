"""Simulation and estimation toolkit for synthetic space-time-frequency
sensing networks: slow-time observation synthesis under frequency hopping,
closed-form position/velocity bounds, concentrated maximum likelihood, and
two-stage information fusion."""

__version__ = "0.1.0"

from .errors import (
    BadSchedule,
    ConfigError,
    DegenerateGeometry,
    EmptyBox,
    EmptySpectrum,
    InsufficientPaths,
    IsacLabError,
    NotCentered,
    NotConverged,
    SingularGeometry,
    StepTooLarge,
    WindowMiss,
)
from .geometry import (
    NetworkLayout,
    PairingMode,
    PathGeometry,
    TargetState,
    delay_jacobian,
    doppler_shift,
    geometry_gradient_jacobian,
    path_geometries,
    radial_speed,
)
from .schedule import HopSchedule, ScheduleMoments, center, center_times, make_schedule, moments
from .waveform import (
    Constellation,
    OfdmSpec,
    WaveformSpec,
    draw_ofdm_beta,
    effective_bandwidth,
    flat_comb_beta,
    sigma_from_snr,
)
from .signal_model import SlowTimeObservation, steering_vector, synthesize
from .fisher import (
    CrlbResult,
    NetworkFim,
    PathWeights,
    PerPathFim,
    assemble_eta_fim,
    chain_to_state,
    crlb,
    data_averaged_crlb,
    eliminate_amplitude,
    geometry_weighted_sums,
    network_crlb,
    network_fim,
    numerical_fim,
    path_weights,
    per_path_fim,
    slow_fast_mean,
)
from .estimators import (
    GnConfig,
    PerPathEstimate,
    SearchBox,
    StageAWindow,
    StateEstimate,
    concentrated_objective,
    glrt_objective,
    mle_estimate,
    stage_a,
    stage_b,
    tsif_estimate,
)
from .kernels import HAS_COMPILED
