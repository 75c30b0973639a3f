"""cia_sim consts."""
from enum import StrEnum

DOMAIN = "cia_sim"
ENV_WORKERS = "CIA_SIM_WORKERS"


class PdpKind(StrEnum):
    """Supported power delay profile shapes."""

    UNIFORM = "uniform"
    EXPONENTIAL = "exponential"


class PrecoderKind(StrEnum):
    """Supported secondary precoders."""

    CIA = "cia"
    VFDM = "vfdm"
    NONUNITARY = "nonunitary"


class ResultFormat(StrEnum):
    """Supported result file formats."""

    CSV = "csv"
    JSON = "json"


# Preset name -> (kind, T_s/tau)
PDP_PRESETS = {
    "uniform": (PdpKind.UNIFORM, 1.0),
    "exp-slow": (PdpKind.EXPONENTIAL, 0.75),
    "exp-fast": (PdpKind.EXPONENTIAL, 2.0),
}

# Seed-derivation stream ids, one per link plus the baseline rotation
LINK_SS = 0
LINK_SP = 1
LINK_PS = 2
LINK_PP = 3
LINK_ROTATION = 4

CONF_N = "n"
CONF_CP = "cp"
CONF_TAPS = "taps"
CONF_PDP = "pdp"
CONF_PDP_KIND = "kind"
CONF_DECAY_RATIO = "decay_ratio"
CONF_PRECODERS = "precoders"
CONF_SNR = "snr"
CONF_SNR_START = "start"
CONF_SNR_STOP = "stop"
CONF_SNR_STEP = "step"
CONF_TRIALS = "trials"
CONF_SEED = "seed"
CONF_PRIMARY_INTERFERENCE = "with_primary_interference"
CONF_PRIMARY_POWER = "primary_power"
CONF_SECONDARY_POWER = "secondary_power"
CONF_NOISE_VARIANCE = "noise_variance"
CONF_WORKERS = "workers"
CONF_FORMAT = "format"
CONF_OUT = "out"

CONF_LOGGER = "logger"
CONF_LOGGER_DEFAULT = "default"
CONF_LOGGER_LOGS = "logs"

DEFAULT_N = 128
DEFAULT_CP = 32
DEFAULT_TAPS = 32
DEFAULT_PDP = "uniform"
DEFAULT_PRECODERS = (PrecoderKind.CIA, PrecoderKind.VFDM, PrecoderKind.NONUNITARY)
DEFAULT_SNR = "0:30:5"
DEFAULT_TRIALS = 500
DEFAULT_SEED = 1
DEFAULT_PRIMARY_POWER = 1.0
DEFAULT_SECONDARY_POWER = 1.0
DEFAULT_NOISE_VARIANCE = 1.0
DEFAULT_WORKERS = 1
DEFAULT_FORMAT = ResultFormat.CSV
DEFAULT_OUT = "results.csv"

# Relative tolerance for a "zero" singular value
KERNEL_RTOL = 1e-9
# Relative distance under which two channel roots are treated as one
ROOT_MERGE_RTOL = 1e-8
# Gram-Schmidt pivot under which the orthonormalization has underflowed
GS_PIVOT_TOL = 1e-12
# Residual share of a unit Vandermonde column under which it adds no usable stream
VFDM_PIVOT_RTOL = 1e-2

SNR_NOTE = (
    "SNR = P_s / sigma^2 in dB with P_s fixed and sigma^2 swept; "
    "spectral efficiency in bits/s/Hz normalized by N+L; "
    "channels reused across the SNR sweep (common random numbers)"
)

CSV_COLUMNS = [
    "snr_db",
    "precoder",
    "mean_se_bps_hz",
    "stderr_se",
    "trials",
    "failure_rate",
]
