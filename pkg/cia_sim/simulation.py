"""Monte Carlo driver for the secondary-link spectral efficiency sweep."""
from __future__ import annotations

import asyncio
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import pairwise

import numpy as np

from .const import (
    DEFAULT_WORKERS,
    LINK_PS,
    LINK_ROTATION,
    LINK_SP,
    LINK_SS,
    PdpKind,
    PrecoderKind,
    ResultFormat,
)
from .exceptions import CiaSimError, DegenerateChannel, InvalidConfig
from .metrics import precoded_spectral_efficiency
from .power_allocation import NoiseModel, active_streams, interference_covariance
from .precoders import (
    Precoder,
    cia_precoder,
    kernel_basis,
    nonunitary_baseline,
    vfdm_root_precoder,
)
from .signal_model import (
    OfdmConfig,
    PdpModel,
    derive_seed,
    generate_channel,
    reduced_channel,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    """One SNR sweep over a fixed channel model and set of precoders."""

    cfg: OfdmConfig
    pdp: PdpModel
    precoders: tuple[PrecoderKind, ...]
    snr_start: float
    snr_stop: float
    snr_step: float
    trials: int
    master_seed: int
    include_primary_interference: bool = False
    output_path: str = "results.csv"
    result_format: ResultFormat = ResultFormat.CSV

    def __post_init__(self):
        """Validate the sweep."""
        if self.trials < 1:
            raise InvalidConfig(f"At least one trial is required, got {self.trials}")
        if self.snr_step <= 0:
            raise InvalidConfig(f"SNR step must be positive, got {self.snr_step}")
        if self.snr_start > self.snr_stop:
            raise InvalidConfig(
                f"SNR start {self.snr_start} exceeds stop {self.snr_stop}"
            )
        if not self.precoders:
            raise InvalidConfig("At least one precoder is required")
        if self.master_seed < 0:
            raise InvalidConfig(f"Seed must be non-negative, got {self.master_seed}")
        if self.cfg.secondary_power <= 0:
            raise InvalidConfig("Secondary power must be positive to define the SNR")

    def snr_points(self) -> np.ndarray:
        """Return the swept SNR values in dB, stop included."""
        count = int(math.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return self.snr_start + self.snr_step * np.arange(count)

    def noise_variance(self, snr_db: float) -> float:
        """Return sigma^2 for SNR = P_s / sigma^2."""
        return self.cfg.secondary_power / 10 ** (snr_db / 10)

    def as_dict(self) -> dict:
        """Return a JSON-ready description of the experiment."""
        return {
            "cfg": asdict(self.cfg),
            "pdp": {"kind": str(self.pdp.kind), "decay_ratio": self.pdp.decay_ratio},
            "precoders": [str(kind) for kind in self.precoders],
            "snr_start": self.snr_start,
            "snr_stop": self.snr_stop,
            "snr_step": self.snr_step,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "include_primary_interference": self.include_primary_interference,
            "output_path": self.output_path,
            "result_format": str(self.result_format),
        }

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        """Rebuild an experiment from as_dict output."""
        return cls(
            cfg=OfdmConfig(**data["cfg"]),
            pdp=PdpModel(PdpKind(data["pdp"]["kind"]), data["pdp"]["decay_ratio"]),
            precoders=tuple(PrecoderKind(kind) for kind in data["precoders"]),
            snr_start=data["snr_start"],
            snr_stop=data["snr_stop"],
            snr_step=data["snr_step"],
            trials=data["trials"],
            master_seed=data["master_seed"],
            include_primary_interference=data["include_primary_interference"],
            output_path=data["output_path"],
            result_format=ResultFormat(data["result_format"]),
        )


@dataclass(frozen=True)
class ResultRow:
    """Aggregate of one (SNR, precoder) point."""

    snr_db: float
    precoder: PrecoderKind
    mean_se_bps_hz: float | None
    stderr_se: float
    trials: int
    failure_rate: float
    mean_active_streams: float | None


@dataclass(frozen=True)
class SimResult:
    """Outcome of an experiment, rows ordered by SNR then precoder."""

    config: ExperimentConfig
    rows: tuple[ResultRow, ...]

    def row(self, snr_db: float, precoder: PrecoderKind) -> ResultRow:
        """Return the row of a given point."""
        for row in self.rows:
            if row.precoder == precoder and math.isclose(row.snr_db, snr_db):
                return row
        raise KeyError((snr_db, precoder))

    def curve(self, precoder: PrecoderKind) -> list[float | None]:
        """Return the mean spectral efficiency of a precoder along the sweep."""
        return [row.mean_se_bps_hz for row in self.rows if row.precoder == precoder]

    def monotonicity_violations(self) -> list[tuple[PrecoderKind, float]]:
        """Return (precoder, snr) points where the mean rate decreased."""
        violations = []
        for kind in self.config.precoders:
            rows = [row for row in self.rows if row.precoder == kind]
            for previous, current in pairwise(rows):
                if (
                    previous.mean_se_bps_hz is not None
                    and current.mean_se_bps_hz is not None
                    and current.mean_se_bps_hz < previous.mean_se_bps_hz
                ):
                    violations.append((kind, current.snr_db))
        return violations


@dataclass
class TrialResult:
    """Rates of one channel draw; None marks a precoder that failed."""

    index: int
    rates: dict[tuple[int, PrecoderKind], float | None] = field(default_factory=dict)
    streams: dict[tuple[int, PrecoderKind], int] = field(default_factory=dict)
    vfdm_dropped: int = 0


def _fixed_precoders(ec: ExperimentConfig, index, h_sp, basis):
    """Build the precoders that do not depend on the noise level."""
    fixed: dict[PrecoderKind, Precoder | None] = {}
    if PrecoderKind.VFDM in ec.precoders:
        try:
            fixed[PrecoderKind.VFDM] = vfdm_root_precoder(h_sp, ec.cfg, basis)
        except CiaSimError as err:
            _LOGGER.debug("Trial %d: root-based precoder failed: %s", index, err)
            fixed[PrecoderKind.VFDM] = None
    if PrecoderKind.NONUNITARY in ec.precoders:
        fixed[PrecoderKind.NONUNITARY] = nonunitary_baseline(
            basis, derive_seed(ec.master_seed, index, LINK_ROTATION)
        )
    return fixed


def run_trial(ec: ExperimentConfig, index: int) -> TrialResult:
    """Draw the channels of one trial and evaluate every precoder at every SNR."""
    result = TrialResult(index)
    h_sp = generate_channel(ec.cfg, ec.pdp, derive_seed(ec.master_seed, index, LINK_SP))
    h_ss = generate_channel(ec.cfg, ec.pdp, derive_seed(ec.master_seed, index, LINK_SS))
    h_ps = generate_channel(ec.cfg, ec.pdp, derive_seed(ec.master_seed, index, LINK_PS))

    h_ss_reduced = reduced_channel(h_ss, ec.cfg)
    h_ps_reduced = reduced_channel(h_ps, ec.cfg)
    try:
        basis = kernel_basis(reduced_channel(h_sp, ec.cfg))
    except DegenerateChannel as err:
        _LOGGER.warning("Trial %d skipped: %s", index, err)
        for snr_index in range(len(ec.snr_points())):
            for kind in ec.precoders:
                result.rates[(snr_index, kind)] = None
        return result
    fixed = _fixed_precoders(ec, index, h_sp, basis)
    if fixed.get(PrecoderKind.VFDM) is not None:
        result.vfdm_dropped = fixed[PrecoderKind.VFDM].dropped_columns

    for snr_index, snr_db in enumerate(ec.snr_points()):
        cfg = ec.cfg.with_noise(ec.noise_variance(snr_db))
        noise = NoiseModel.from_config(cfg, ec.include_primary_interference)
        s_eta = interference_covariance(noise, h_ps_reduced, cfg)
        for kind in ec.precoders:
            if kind == PrecoderKind.CIA:
                precoder, _ = cia_precoder(basis, h_ss_reduced, s_eta)
            else:
                precoder = fixed[kind]
            if precoder is None:
                result.rates[(snr_index, kind)] = None
                continue
            loaded = precoded_spectral_efficiency(precoder, h_ss_reduced, s_eta, cfg.budget)
            result.rates[(snr_index, kind)] = loaded.spectral_efficiency.value
            result.streams[(snr_index, kind)] = active_streams(loaded.allocation)

    return result


def aggregate(ec: ExperimentConfig, trials: list[TrialResult]) -> SimResult:
    """Reduce trial results in index order with compensated summation."""
    trials = sorted(trials, key=lambda trial: trial.index)
    rows = []
    for snr_index, snr_db in enumerate(ec.snr_points()):
        for kind in ec.precoders:
            key = (snr_index, kind)
            rates = [trial.rates[key] for trial in trials if trial.rates[key] is not None]
            streams = [trial.streams[key] for trial in trials if key in trial.streams]
            count = len(rates)
            mean = math.fsum(rates) / count if count else None
            stderr = 0.0
            if count > 1:
                variance = math.fsum((rate - mean) ** 2 for rate in rates) / (count - 1)
                stderr = math.sqrt(variance / count)
            rows.append(
                ResultRow(
                    snr_db=float(snr_db),
                    precoder=kind,
                    mean_se_bps_hz=mean,
                    stderr_se=stderr,
                    trials=count,
                    failure_rate=(len(trials) - count) / len(trials),
                    mean_active_streams=math.fsum(streams) / len(streams) if streams else None,
                )
            )
    if PrecoderKind.VFDM in ec.precoders:
        _LOGGER.info(
            "Root-based precoder lost %.2f of %d streams per trial",
            math.fsum(trial.vfdm_dropped for trial in trials) / len(trials),
            ec.cfg.cp,
        )
    return SimResult(ec, tuple(rows))


async def async_run_experiment(ec: ExperimentConfig, workers: int = DEFAULT_WORKERS):
    """Run every trial on a worker pool and aggregate the results."""
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        trials = await asyncio.gather(
            *[
                loop.run_in_executor(executor, run_trial, ec, index)
                for index in range(ec.trials)
            ]
        )
    return aggregate(ec, list(trials))


def run_experiment(ec: ExperimentConfig, workers: int = DEFAULT_WORKERS) -> SimResult:
    """Run the experiment and log a summary."""
    _LOGGER.info(
        "Running %d trials, N=%d L=%d l=%d, %s PDP, precoders %s on %d workers",
        ec.trials,
        ec.cfg.n,
        ec.cfg.cp,
        ec.cfg.channel_order,
        ec.pdp.kind,
        ",".join(ec.precoders),
        workers,
    )
    result = asyncio.run(async_run_experiment(ec, workers))

    for kind, snr_db in result.monotonicity_violations():
        if kind == PrecoderKind.CIA and not ec.include_primary_interference:
            _LOGGER.error("CIA rate decreased at %.1f dB with noise-only covariance", snr_db)
        else:
            _LOGGER.warning("Mean %s rate decreased at %.1f dB", kind, snr_db)
    for row in result.rows:
        if row.precoder == PrecoderKind.VFDM and row.failure_rate > 0:
            _LOGGER.warning(
                "Root-based precoder failed on %.1f%% of trials at %.1f dB",
                100 * row.failure_rate,
                row.snr_db,
            )
            break
    return result
