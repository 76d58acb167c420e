"""Bloom-filter signature random access over an OR multiple-access channel.

Library + CLI for dimensioning device signatures (length L, weight K),
decoding them at the base station, and comparing the resulting access
reservation protocol against the LTE-A-style baseline and the
random-signature reference scheme.
"""

from .codec import (
    Codebook,
    DeviceIdentity,
    build_codebook,
    distinct_rao_collision_prob,
    generate_signature,
    load_codebook,
    random_signature,
    save_codebook,
    shared_signature_prob,
    signature_space_size,
)
from .decoder import (
    DecodeResult,
    DecodeTrace,
    IterativeDecoder,
    OutOfOrderError,
    decode_full,
    decode_iterative,
    write_trace,
)
from .dimensioning import (
    DimensioningInput,
    DimensioningResult,
    FixedPointDivergence,
    InfeasibleTargetError,
    analytic_goodput,
    dimension,
    false_positive_probability,
    idle_probability,
    k_min,
    required_length,
    target_false_positive,
)
from .kernels import ACTIVE_KERNEL, available_kernels
from .ormac import (
    IDEAL_CHANNEL,
    ChannelParams,
    ObservationFrame,
    ShapeMismatchError,
    Signature,
    contains,
    superpose,
)
from .sim import (
    ExperimentSpec,
    RunMetrics,
    SimConfig,
    compute_metrics,
    run_baseline_arp,
    run_experiment,
    run_random_arp,
    run_signature_arp,
    sample_arrivals,
    write_results,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_KERNEL",
    "ChannelParams",
    "Codebook",
    "DecodeResult",
    "DecodeTrace",
    "DeviceIdentity",
    "DimensioningInput",
    "DimensioningResult",
    "ExperimentSpec",
    "FixedPointDivergence",
    "IDEAL_CHANNEL",
    "InfeasibleTargetError",
    "IterativeDecoder",
    "ObservationFrame",
    "OutOfOrderError",
    "RunMetrics",
    "ShapeMismatchError",
    "Signature",
    "SimConfig",
    "analytic_goodput",
    "available_kernels",
    "build_codebook",
    "compute_metrics",
    "contains",
    "decode_full",
    "decode_iterative",
    "dimension",
    "distinct_rao_collision_prob",
    "false_positive_probability",
    "generate_signature",
    "idle_probability",
    "k_min",
    "load_codebook",
    "random_signature",
    "required_length",
    "run_baseline_arp",
    "run_experiment",
    "run_random_arp",
    "run_signature_arp",
    "sample_arrivals",
    "save_codebook",
    "shared_signature_prob",
    "signature_space_size",
    "superpose",
    "target_false_positive",
    "write_results",
    "write_trace",
]
