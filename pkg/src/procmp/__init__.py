"""Matrix-profile anomaly detection for industrial process time series.

Discrete actuator channels (pumps, valves) are profiled with an exact
Hamming distance; continuous sensor channels use the z-normalized
Euclidean distance. Both share one self-join engine with an exclusion
zone, a brute-force reference implementation, and a detection and
evaluation layer driven from CSV logs or the bundled synthetic plant
analogs.
"""

from .dataio import (
    ProcessLog,
    concat,
    read_attacks,
    read_csv,
    slice_interval,
    write_attacks,
    write_csv,
)
from .detection import (
    AnomalyEvent,
    AttackInterval,
    DetectionReport,
    SweepPoint,
    match_attacks,
    sweep_thresholds,
    threshold_detect,
)
from .distances import (
    CONTINUOUS,
    DISCRETE,
    Channel,
    RollingStats,
    corr_to_distance,
    hamming_distance,
    pearson_corr,
    rolling_stats,
    znorm_distance,
)
from .errors import (
    DegenerateWindowError,
    InsufficientLengthError,
    InvalidDataError,
    InvalidWindowError,
    MetricMismatchError,
    ParseError,
    ProcmpError,
    SchemaError,
    SpecError,
    VerificationError,
)
from .profile import (
    HAMMING,
    ZNORM,
    MatrixProfile,
    compute_profile,
    default_exclusion,
    load_profile,
    mp_brute,
    mp_hamming_fast,
    mp_znorm_fast,
    save_profile,
    select_metric,
    verify_profile,
)
from .synth import (
    AttackSpec,
    ChannelSpec,
    SynthSpec,
    attack_intervals,
    generate,
    load_bundled_spec,
    load_spec,
    parse_spec,
)

__version__ = "0.1.0"

__all__ = [
    "AnomalyEvent",
    "AttackInterval",
    "AttackSpec",
    "CONTINUOUS",
    "Channel",
    "ChannelSpec",
    "DISCRETE",
    "DegenerateWindowError",
    "DetectionReport",
    "HAMMING",
    "InsufficientLengthError",
    "InvalidDataError",
    "InvalidWindowError",
    "MatrixProfile",
    "MetricMismatchError",
    "ParseError",
    "ProcessLog",
    "ProcmpError",
    "RollingStats",
    "SchemaError",
    "SpecError",
    "SweepPoint",
    "SynthSpec",
    "VerificationError",
    "ZNORM",
    "attack_intervals",
    "compute_profile",
    "concat",
    "corr_to_distance",
    "default_exclusion",
    "generate",
    "hamming_distance",
    "load_bundled_spec",
    "load_profile",
    "load_spec",
    "match_attacks",
    "mp_brute",
    "mp_hamming_fast",
    "mp_znorm_fast",
    "parse_spec",
    "pearson_corr",
    "read_attacks",
    "read_csv",
    "rolling_stats",
    "save_profile",
    "select_metric",
    "slice_interval",
    "sweep_thresholds",
    "threshold_detect",
    "verify_profile",
    "write_attacks",
    "write_csv",
]
