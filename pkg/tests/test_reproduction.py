"""Desk-scale sweeps at N=128, L=l=32 comparing the three precoders.

These take minutes; run them with `pytest -m slow`.
"""
import pytest

from cia_sim.const import PrecoderKind
from cia_sim.signal_model import OfdmConfig, PdpModel
from cia_sim.simulation import ExperimentConfig, SimResult, run_experiment

pytestmark = pytest.mark.slow

DESK = OfdmConfig(n=128, cp=32, channel_order=32)
TRIALS = 500


def _sweep(preset: str) -> SimResult:
    ec = ExperimentConfig(
        cfg=DESK,
        pdp=PdpModel.from_preset(preset),
        precoders=tuple(PrecoderKind),
        snr_start=0.0,
        snr_stop=30.0,
        snr_step=5.0,
        trials=TRIALS,
        master_seed=1,
    )
    return run_experiment(ec, workers=8)


def _ratio(result: SimResult, kind: PrecoderKind, snr_db: float) -> float:
    row = result.row(snr_db, kind)
    assert row.mean_se_bps_hz is not None, f"{kind} failed on every trial"
    return row.mean_se_bps_hz / result.row(snr_db, PrecoderKind.CIA).mean_se_bps_hz


@pytest.fixture(scope="module")
def sweeps():
    """One sweep per power delay profile."""
    return {preset: _sweep(preset) for preset in ("uniform", "exp-slow", "exp-fast")}


def test_uniform_profile_root_precoder_matches_cia(sweeps, record_property):
    result = sweeps["uniform"]
    for snr_db in result.config.snr_points():
        ratio = _ratio(result, PrecoderKind.VFDM, snr_db)
        record_property(f"vfdm_uniform_{snr_db:g}dB", round(ratio, 4))
        assert 0.99 <= ratio <= 1.01


def test_uniform_profile_nonunitary_stays_close(sweeps, record_property):
    result = sweeps["uniform"]
    for snr_db in result.config.snr_points():
        ratio = _ratio(result, PrecoderKind.NONUNITARY, snr_db)
        record_property(f"nonunitary_uniform_{snr_db:g}dB", round(ratio, 4))
        assert 0.85 <= ratio < 1


@pytest.mark.xfail(
    strict=False,
    reason="a random kernel rotation loses a few percent at high SNR, "
    "the 30 dB ratio may land just under 0.90",
)
def test_uniform_profile_nonunitary_within_ten_percent(sweeps):
    result = sweeps["uniform"]
    for snr_db in result.config.snr_points():
        assert _ratio(result, PrecoderKind.NONUNITARY, snr_db) >= 0.90


def test_slow_decay_costs_root_precoder(sweeps, record_property):
    result = sweeps["exp-slow"]
    ratio = _ratio(result, PrecoderKind.VFDM, 30.0)
    record_property("vfdm_exp_slow_30dB", round(ratio, 4))
    record_property(
        "vfdm_exp_slow_failure_rate", result.row(30.0, PrecoderKind.VFDM).failure_rate
    )
    assert ratio <= 0.90
    for snr_db in result.config.snr_points():
        assert _ratio(result, PrecoderKind.NONUNITARY, snr_db) < 1


def test_fast_decay_cripples_root_precoder(sweeps, record_property):
    result = sweeps["exp-fast"]
    ratio = _ratio(result, PrecoderKind.VFDM, 30.0)
    record_property("vfdm_exp_fast_30dB", round(ratio, 4))
    record_property(
        "vfdm_exp_fast_failure_rate", result.row(30.0, PrecoderKind.VFDM).failure_rate
    )
    assert ratio <= 0.50


def test_cia_never_fails_at_desk_scale(sweeps):
    for result in sweeps.values():
        for row in result.rows:
            if row.precoder == PrecoderKind.CIA:
                assert row.failure_rate == 0.0


def test_selective_channels_carry_more(sweeps):
    rates = [
        sweeps[preset].row(30.0, PrecoderKind.CIA).mean_se_bps_hz
        for preset in ("uniform", "exp-slow", "exp-fast")
    ]
    assert rates[0] > rates[1] > rates[2]


def test_every_curve_has_cia_on_top(sweeps):
    for result in sweeps.values():
        assert not [v for v in result.monotonicity_violations() if v[0] == PrecoderKind.CIA]
        for row in result.rows:
            if row.precoder != PrecoderKind.CIA and row.mean_se_bps_hz is not None:
                cia = result.row(row.snr_db, PrecoderKind.CIA).mean_se_bps_hz
                assert row.mean_se_bps_hz <= cia + 1e-9
