"""Interactive two-slit experiment platform.

Closed-form interference models, a deterministic tick engine, synthetic
agents, session analytics and fitting, append-only session recording, and
a realtime lockstep server with a CLI front end.
"""

from .agents import (
    AgentSpec,
    PlanningError,
    choose_slit,
    make_controller,
    plan_and_fly,
    reachable_channels,
    run_agent,
    sample_channel,
)
from .analytics import (
    ChannelHistogram,
    ContrastUndefinedError,
    EnsembleStats,
    InsufficientSessionsError,
    Session,
    UnclassifiableHistogramError,
    WaveClassification,
    build_histogram,
    classify_wave_like,
    compose_coherent,
    compose_from_approximation,
    compose_incoherent,
    contrast,
    curve_histogram,
    ensemble_stats,
    flag_artifact_channels,
    fringe_peak_channels,
    mask_interpolate,
    moving_average,
    normalize,
    slit_channels,
)
from .config import dump_config, load_config, resolve_data_dir
from .engine import Attempt, Engine, Phase, Steering, WorldConfig, set_warmup
from .fitting import (
    FitResult,
    FlatDataError,
    count_minima,
    fit_interference,
    lambda_bound_from_minima,
)
from .physics import (
    DegenerateDistributionError,
    Geometry,
    ModelParams,
    Screen,
    center_channel,
    channel_for_x,
    complex_amplitude,
    envelope_intensity,
    fringe_count,
    lambda_from_minima,
    model_intensity,
    one_slit_dip_intensity,
    predicted_channel_distribution,
    two_slit_intensity,
    validate_geometry,
    x_for_channel,
)
from .recording import (
    FORMAT_VERSION,
    ChecksumError,
    RecordError,
    ReplayMismatchError,
    SessionRecord,
    SessionWriter,
    SummaryMismatchError,
    VersionError,
    read_session,
    replay,
    write_session,
)

__version__ = "0.1.0"

__all__ = [
    "AgentSpec",
    "Attempt",
    "ChannelHistogram",
    "ChecksumError",
    "ContrastUndefinedError",
    "DegenerateDistributionError",
    "Engine",
    "EnsembleStats",
    "FORMAT_VERSION",
    "FitResult",
    "FlatDataError",
    "Geometry",
    "InsufficientSessionsError",
    "ModelParams",
    "Phase",
    "PlanningError",
    "RecordError",
    "ReplayMismatchError",
    "Screen",
    "Session",
    "SessionRecord",
    "SessionWriter",
    "Steering",
    "SummaryMismatchError",
    "UnclassifiableHistogramError",
    "VersionError",
    "WaveClassification",
    "WorldConfig",
    "build_histogram",
    "center_channel",
    "channel_for_x",
    "choose_slit",
    "classify_wave_like",
    "complex_amplitude",
    "compose_coherent",
    "compose_from_approximation",
    "compose_incoherent",
    "contrast",
    "count_minima",
    "curve_histogram",
    "dump_config",
    "ensemble_stats",
    "envelope_intensity",
    "fit_interference",
    "flag_artifact_channels",
    "fringe_count",
    "fringe_peak_channels",
    "lambda_bound_from_minima",
    "lambda_from_minima",
    "load_config",
    "make_controller",
    "mask_interpolate",
    "model_intensity",
    "moving_average",
    "normalize",
    "one_slit_dip_intensity",
    "plan_and_fly",
    "predicted_channel_distribution",
    "reachable_channels",
    "read_session",
    "replay",
    "resolve_data_dir",
    "run_agent",
    "sample_channel",
    "set_warmup",
    "slit_channels",
    "validate_geometry",
    "write_session",
    "x_for_channel",
]
