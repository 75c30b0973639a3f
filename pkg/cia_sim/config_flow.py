"""Config flow for cia_sim experiments."""
import logging

import voluptuous as vol

from .const import (
    CONF_CP,
    CONF_DECAY_RATIO,
    CONF_FORMAT,
    CONF_N,
    CONF_NOISE_VARIANCE,
    CONF_OUT,
    CONF_PDP,
    CONF_PDP_KIND,
    CONF_PRECODERS,
    CONF_PRIMARY_INTERFERENCE,
    CONF_PRIMARY_POWER,
    CONF_SECONDARY_POWER,
    CONF_SEED,
    CONF_SNR,
    CONF_SNR_START,
    CONF_SNR_STEP,
    CONF_SNR_STOP,
    CONF_TAPS,
    CONF_TRIALS,
    CONF_WORKERS,
    DEFAULT_CP,
    DEFAULT_FORMAT,
    DEFAULT_N,
    DEFAULT_NOISE_VARIANCE,
    DEFAULT_OUT,
    DEFAULT_PDP,
    DEFAULT_PRECODERS,
    DEFAULT_PRIMARY_POWER,
    DEFAULT_SECONDARY_POWER,
    DEFAULT_SEED,
    DEFAULT_SNR,
    DEFAULT_TAPS,
    DEFAULT_TRIALS,
    DEFAULT_WORKERS,
    PDP_PRESETS,
    PdpKind,
    PrecoderKind,
    ResultFormat,
)
from .exceptions import InvalidConfig
from .signal_model import OfdmConfig, PdpModel
from .simulation import ExperimentConfig

_LOGGER = logging.getLogger(__name__)


def snr_range(value):
    """Coerce 'start:stop:step' or a mapping into an SNR range mapping."""
    if isinstance(value, dict):
        return SNR_SCHEMA(value)
    parts = str(value).split(":")
    if len(parts) != 3:
        raise vol.Invalid(f"SNR range must read start:stop:step, got {value!r}")
    try:
        start, stop, step = (float(part) for part in parts)
    except ValueError as err:
        raise vol.Invalid(f"SNR range must be numeric, got {value!r}") from err
    return SNR_SCHEMA({CONF_SNR_START: start, CONF_SNR_STOP: stop, CONF_SNR_STEP: step})


def precoder_list(value):
    """Coerce 'cia,vfdm' or a list into a tuple of precoder kinds."""
    if isinstance(value, str):
        value = [item.strip() for item in value.split(",") if item.strip()]
    try:
        kinds = tuple(dict.fromkeys(PrecoderKind(item) for item in value))
    except ValueError as err:
        raise vol.Invalid(f"Unknown precoder in {value!r}") from err
    if not kinds:
        raise vol.Invalid("At least one precoder is required")
    return kinds


SNR_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_SNR_START): vol.Coerce(float),
        vol.Required(CONF_SNR_STOP): vol.Coerce(float),
        vol.Required(CONF_SNR_STEP): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
    }
)

PDP_SCHEMA = vol.Any(
    vol.In(list(PDP_PRESETS)),
    vol.Schema(
        {
            vol.Required(CONF_PDP_KIND): vol.Coerce(PdpKind),
            vol.Optional(CONF_DECAY_RATIO, default=1.0): vol.All(
                vol.Coerce(float), vol.Range(min=0, min_included=False)
            ),
        }
    ),
)

DATA_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_N, default=DEFAULT_N): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_CP, default=DEFAULT_CP): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_TAPS, default=DEFAULT_TAPS): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(CONF_PDP, default=DEFAULT_PDP): PDP_SCHEMA,
        vol.Optional(CONF_PRECODERS, default=list(DEFAULT_PRECODERS)): precoder_list,
        vol.Optional(CONF_SNR, default=DEFAULT_SNR): snr_range,
        vol.Optional(CONF_TRIALS, default=DEFAULT_TRIALS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(CONF_PRIMARY_INTERFERENCE, default=False): vol.Boolean(),
        vol.Optional(CONF_PRIMARY_POWER, default=DEFAULT_PRIMARY_POWER): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Optional(CONF_SECONDARY_POWER, default=DEFAULT_SECONDARY_POWER): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_NOISE_VARIANCE, default=DEFAULT_NOISE_VARIANCE): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_WORKERS, default=DEFAULT_WORKERS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_FORMAT, default=str(DEFAULT_FORMAT)): vol.Coerce(ResultFormat),
        vol.Optional(CONF_OUT, default=DEFAULT_OUT): str,
    }
)


def validate_input(data: dict) -> tuple[ExperimentConfig, int]:
    """Validate an experiment mapping and build its configuration.

    Data has the keys from DATA_SCHEMA; returns the experiment and the worker
    count it asks for.
    """
    try:
        conf = DATA_SCHEMA(dict(data))
    except vol.Invalid as err:
        raise InvalidConfig(str(err)) from err

    pdp = conf[CONF_PDP]
    if isinstance(pdp, str):
        pdp_model = PdpModel.from_preset(pdp)
    else:
        pdp_model = PdpModel(pdp[CONF_PDP_KIND], pdp[CONF_DECAY_RATIO])

    snr = conf[CONF_SNR]
    experiment = ExperimentConfig(
        cfg=OfdmConfig(
            n=conf[CONF_N],
            cp=conf[CONF_CP],
            channel_order=conf[CONF_TAPS],
            primary_power=conf[CONF_PRIMARY_POWER],
            secondary_power=conf[CONF_SECONDARY_POWER],
            noise_variance=conf[CONF_NOISE_VARIANCE],
        ),
        pdp=pdp_model,
        precoders=conf[CONF_PRECODERS],
        snr_start=snr[CONF_SNR_START],
        snr_stop=snr[CONF_SNR_STOP],
        snr_step=snr[CONF_SNR_STEP],
        trials=conf[CONF_TRIALS],
        master_seed=conf[CONF_SEED],
        include_primary_interference=conf[CONF_PRIMARY_INTERFERENCE],
        output_path=conf[CONF_OUT],
        result_format=conf[CONF_FORMAT],
    )
    _LOGGER.debug("Validated experiment: %s", experiment.as_dict())
    return experiment, conf[CONF_WORKERS]
