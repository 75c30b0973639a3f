"""Tests for spectral efficiency and leakage."""
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg

from cia_sim.const import PrecoderKind
from cia_sim.exceptions import AllZeroEigenvalues, DimensionMismatch, InvalidConfig
from cia_sim.metrics import (
    diagonal_spectral_efficiency,
    precoded_spectral_efficiency,
    primary_leakage,
    primary_spectral_efficiency,
    primary_subcarrier_gains,
    secondary_spectral_efficiency,
)
from cia_sim.power_allocation import (
    NoiseModel,
    PowerAllocation,
    interference_covariance,
    waterfill,
    whiten,
)
from cia_sim.precoders import (
    Precoder,
    cia_precoder,
    combination_precoder,
    haar_unitary,
    kernel_basis,
    nonunitary_baseline,
    vfdm_root_precoder,
)
from cia_sim.signal_model import (
    ChannelRealization,
    OfdmConfig,
    conv_matrix,
    derive_seed,
    generate_channel,
    reduced_channel,
)

from .conftest import PDPS


def _draw(cfg, pdp, index, seed=21):
    return [
        generate_channel(cfg, pdp, derive_seed(seed, index, link)) for link in range(4)
    ]


def test_zero_power_gives_zero_rate(cfg, reduced, basis):
    precoder, _ = cia_precoder(basis, reduced[2], np.eye(cfg.n))
    allocation = PowerAllocation(np.zeros(cfg.cp), 0.0, 0.0)
    value = secondary_spectral_efficiency(reduced[2], precoder, allocation, np.eye(cfg.n))
    assert value.value == 0.0


def test_determinant_matches_full_size_form(cfg, reduced, basis):
    noise = NoiseModel(cfg.noise_variance, True, 1.0)
    s_eta = interference_covariance(noise, reduced[3], cfg)
    precoder = nonunitary_baseline(basis, 3)
    allocation = PowerAllocation(np.full(cfg.cp, cfg.budget / cfg.cp), 0.0, cfg.budget)
    w = whiten(s_eta)
    covariance = precoder.E @ np.diag(allocation.p) @ precoder.E.conj().T
    full = np.eye(cfg.n) + w @ reduced[2].matrix @ covariance @ reduced[2].matrix.conj().T @ w
    _, logdet = np.linalg.slogdet(full)
    expected = logdet / np.log(2) / cfg.block_length
    value = secondary_spectral_efficiency(reduced[2], precoder, allocation, s_eta).value
    assert_allclose(value, expected, rtol=1e-10)


def test_rate_checks_dimensions(cfg, reduced, basis):
    precoder, _ = cia_precoder(basis, reduced[2], np.eye(cfg.n))
    with pytest.raises(DimensionMismatch):
        secondary_spectral_efficiency(
            reduced[2], precoder, PowerAllocation(np.ones(cfg.cp + 1), 1.0, 1.0), np.eye(cfg.n)
        )
    with pytest.raises(DimensionMismatch):
        secondary_spectral_efficiency(
            reduced[2], precoder, PowerAllocation(np.ones(cfg.cp), 1.0, 1.0), np.eye(cfg.n + 1)
        )
    with pytest.raises(DimensionMismatch):
        secondary_spectral_efficiency(
            reduced[2],
            Precoder(np.eye(cfg.n), PrecoderKind.CIA),
            PowerAllocation(np.ones(cfg.n), 1.0, 1.0),
            np.eye(cfg.n),
        )


@pytest.mark.parametrize("with_primary", [False, True])
def test_determinant_equals_eigenmode_sum(with_primary):
    cfg = OfdmConfig(n=16, cp=4, channel_order=4, noise_variance=0.1)
    noise = NoiseModel(cfg.noise_variance, with_primary, cfg.primary_power)
    for index in range(1000):
        _, h_sp, h_ss, h_ps = _draw(cfg, PDPS[index % 3], index)
        h_ss_reduced = reduced_channel(h_ss, cfg)
        s_eta = interference_covariance(noise, reduced_channel(h_ps, cfg), cfg)
        basis = kernel_basis(reduced_channel(h_sp, cfg))
        precoder, eigenvalues = cia_precoder(basis, h_ss_reduced, s_eta)
        allocation = waterfill(eigenvalues, cfg.budget)
        determinant = secondary_spectral_efficiency(h_ss_reduced, precoder, allocation, s_eta)
        diagonal = diagonal_spectral_efficiency(eigenvalues, allocation, cfg.block_length)
        assert_allclose(determinant.value, diagonal.value, rtol=1e-9)


def test_cia_dominates_kernel_combinations(cfg):
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    rng = np.random.default_rng(17)
    for index in range(200):
        _, h_sp, h_ss, _ = _draw(cfg, PDPS[index % 3], index, seed=22)
        h_ss_reduced = reduced_channel(h_ss, cfg)
        basis = kernel_basis(reduced_channel(h_sp, cfg))
        cia, _ = cia_precoder(basis, h_ss_reduced, s_eta)
        best = precoded_spectral_efficiency(cia, h_ss_reduced, s_eta, cfg.budget)
        for draw in range(20):
            if draw % 2:
                gamma = haar_unitary(cfg.cp, derive_seed(22, index, 5, draw))
            else:
                gamma = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
                gamma /= linalg.norm(gamma, axis=0)
            other = precoded_spectral_efficiency(
                combination_precoder(basis, gamma), h_ss_reduced, s_eta, cfg.budget
            )
            assert (
                other.spectral_efficiency.value <= best.spectral_efficiency.value + 1e-9
            )


def test_cia_beats_random_semi_unitary_precoders():
    cfg = OfdmConfig(n=8, cp=2, channel_order=2, noise_variance=0.5)
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    rng = np.random.default_rng(5)
    for index in range(10):
        _, h_sp, h_ss, _ = _draw(cfg, PDPS[0], index, seed=23)
        h_ss_reduced = reduced_channel(h_ss, cfg)
        basis = kernel_basis(reduced_channel(h_sp, cfg))
        cia, _ = cia_precoder(basis, h_ss_reduced, s_eta)
        best = precoded_spectral_efficiency(cia, h_ss_reduced, s_eta, cfg.budget)
        gaussian = rng.standard_normal((10_000, 2, 2)) + 1j * rng.standard_normal((10_000, 2, 2))
        unitaries, _ = np.linalg.qr(gaussian)
        effective = whiten(s_eta) @ h_ss_reduced.matrix @ basis.V
        loaded = effective @ unitaries * np.sqrt(cfg.budget / 2)
        gram = np.eye(2) + np.conj(np.swapaxes(loaded, 1, 2)) @ loaded
        rates = np.linalg.slogdet(gram)[1] / np.log(2) / cfg.block_length
        assert np.all(rates <= best.spectral_efficiency.value + 1e-9)


def test_cia_rate_invariant_to_basis_rotation(cfg, reduced, basis):
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    base, _ = cia_precoder(basis, reduced[2], s_eta)
    rotated_basis = type(basis)(basis.V @ haar_unitary(cfg.cp, 99))
    rotated, _ = cia_precoder(rotated_basis, reduced[2], s_eta)
    first = precoded_spectral_efficiency(base, reduced[2], s_eta, cfg.budget)
    second = precoded_spectral_efficiency(rotated, reduced[2], s_eta, cfg.budget)
    assert_allclose(
        first.spectral_efficiency.value, second.spectral_efficiency.value, rtol=1e-9
    )


def test_loading_spends_the_budget(cfg, links, reduced, basis):
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    for precoder in (
        cia_precoder(basis, reduced[2], s_eta)[0],
        nonunitary_baseline(basis, 8),
        vfdm_root_precoder(links[1], cfg, basis),
    ):
        loaded = precoded_spectral_efficiency(precoder, reduced[2], s_eta, cfg.budget)
        covariance = loaded.precoder.E @ np.diag(loaded.allocation.p) @ loaded.precoder.E.conj().T
        assert_allclose(np.trace(covariance).real, cfg.budget, rtol=1e-9)
        assert loaded.precoder.kind == precoder.kind


def test_root_precoder_matches_cia_when_every_stream_survives(cfg, links, reduced, basis):
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    vfdm = vfdm_root_precoder(links[1], cfg, basis)
    assert vfdm.streams == cfg.cp
    cia, _ = cia_precoder(basis, reduced[2], s_eta)
    root_rate = precoded_spectral_efficiency(vfdm, reduced[2], s_eta, cfg.budget)
    cia_rate = precoded_spectral_efficiency(cia, reduced[2], s_eta, cfg.budget)
    assert_allclose(
        root_rate.spectral_efficiency.value, cia_rate.spectral_efficiency.value, rtol=1e-6
    )


@pytest.mark.parametrize("pdp", PDPS)
def test_every_precoder_is_invisible_to_primary(pdp):
    cfg = OfdmConfig(n=16, cp=4, channel_order=4, noise_variance=0.1)
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    for index in range(50):
        _, h_sp, h_ss, _ = _draw(cfg, pdp, index, seed=24)
        basis = kernel_basis(reduced_channel(h_sp, cfg))
        h_conv = conv_matrix(h_sp, cfg)
        for precoder in (
            cia_precoder(basis, reduced_channel(h_ss, cfg), s_eta)[0],
            nonunitary_baseline(basis, derive_seed(24, index, 4)),
            vfdm_root_precoder(h_sp, cfg),
        ):
            _, post_dft = primary_leakage(h_conv, precoder, cfg)
            assert post_dft < 1e-10 * linalg.norm(h_conv)


def test_unaligned_precoder_leaks(cfg, links):
    h_conv = conv_matrix(links[1], cfg)
    naive = Precoder(np.eye(cfg.block_length)[:, : cfg.cp], PrecoderKind.CIA)
    pre_dft, post_dft = primary_leakage(h_conv, naive, cfg)
    assert post_dft > 0
    assert_allclose(pre_dft, post_dft, rtol=1e-12)


def test_leakage_checks_dimensions(cfg, links):
    with pytest.raises(DimensionMismatch):
        primary_leakage(
            conv_matrix(links[1], cfg), Precoder(np.eye(cfg.n), PrecoderKind.CIA), cfg
        )


def test_flat_primary_channel_rate():
    cfg = OfdmConfig(n=4, cp=2, channel_order=0, noise_variance=1.0)
    h_pp = reduced_channel(ChannelRealization(np.array([1.0 + 0j])), cfg)
    assert_allclose(primary_subcarrier_gains(h_pp, cfg), np.ones(4), atol=1e-15)
    assert_allclose(primary_spectral_efficiency(h_pp, cfg).value, 4 / 6)


def test_primary_rate_vanishes_at_low_snr(cfg, reduced):
    quiet = cfg.with_noise(1e4)
    assert primary_spectral_efficiency(reduced[0], quiet).value < 1e-3


def test_primary_rate_untouched_by_aligned_secondary():
    cfg = OfdmConfig(n=16, cp=4, channel_order=4, noise_variance=0.1)
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    for index in range(200):
        h_pp, h_sp, h_ss, _ = _draw(cfg, PDPS[index % 3], index, seed=25)
        h_pp_reduced = reduced_channel(h_pp, cfg)
        h_sp_reduced = reduced_channel(h_sp, cfg)
        basis = kernel_basis(h_sp_reduced)
        precoder, eigenvalues = cia_precoder(basis, reduced_channel(h_ss, cfg), s_eta)
        allocation = waterfill(eigenvalues, cfg.budget)
        alone = primary_spectral_efficiency(h_pp_reduced, cfg)
        shared = primary_spectral_efficiency(
            h_pp_reduced, cfg, True, precoder, allocation, h_sp_reduced
        )
        assert shared.value == alone.value


def test_primary_rate_drops_under_unaligned_secondary(cfg, reduced):
    naive = Precoder(np.eye(cfg.block_length)[:, : cfg.cp], PrecoderKind.CIA)
    allocation = PowerAllocation(np.full(cfg.cp, 5.0), 0.0, 20.0)
    alone = primary_spectral_efficiency(reduced[0], cfg)
    shared = primary_spectral_efficiency(reduced[0], cfg, True, naive, allocation, reduced[1])
    assert shared.value < alone.value


def test_primary_rate_requires_secondary_inputs(cfg, reduced):
    with pytest.raises(InvalidConfig):
        primary_spectral_efficiency(reduced[0], cfg, with_secondary=True)


def test_waterfill_refuses_exactly_dead_modes(cfg, reduced, basis):
    precoder, _ = cia_precoder(basis, reduced[2], np.eye(cfg.n))
    silent = type(reduced[2])(np.zeros_like(reduced[2].matrix))
    with pytest.raises(AllZeroEigenvalues):
        precoded_spectral_efficiency(precoder, silent, np.eye(cfg.n), cfg.budget)


def test_nonunitary_loading_runs_on_unit_norm_eigenmodes(cfg, reduced, basis):
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    precoder = nonunitary_baseline(basis, derive_seed(25, 0, 4))
    loaded = precoded_spectral_efficiency(precoder, reduced[2], s_eta, cfg.budget)
    assert_allclose(linalg.norm(loaded.precoder.E, axis=0), np.ones(cfg.cp), rtol=1e-12)
    effective = whiten(s_eta) @ reduced[2].matrix @ loaded.precoder.E
    gram = effective.conj().T @ effective
    assert_allclose(gram, np.diag(loaded.gains), atol=1e-9 * loaded.gains.max())
    # the loaded columns still span the original precoder
    projector = precoder.E @ linalg.pinv(precoder.E)
    assert_allclose(projector @ loaded.precoder.E, loaded.precoder.E, atol=1e-10)


def test_semi_unitary_loading_keeps_cia_eigenvalues(cfg, reduced, basis):
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    precoder, eigenvalues = cia_precoder(basis, reduced[2], s_eta)
    loaded = precoded_spectral_efficiency(precoder, reduced[2], s_eta, cfg.budget)
    assert_allclose(loaded.gains, eigenvalues, rtol=1e-9, atol=1e-12 * eigenvalues[0])
    assert_allclose(loaded.allocation.p, waterfill(eigenvalues, cfg.budget).p, rtol=1e-9)


def test_nonunitary_rate_stays_below_cia():
    cfg = OfdmConfig(n=16, cp=4, channel_order=4, noise_variance=0.1)
    s_eta = cfg.noise_variance * np.eye(cfg.n)
    for index in range(30):
        _, h_sp, h_ss, _ = _draw(cfg, PDPS[index % 3], index, seed=26)
        h_ss_reduced = reduced_channel(h_ss, cfg)
        basis = kernel_basis(reduced_channel(h_sp, cfg))
        cia, _ = cia_precoder(basis, h_ss_reduced, s_eta)
        best = precoded_spectral_efficiency(cia, h_ss_reduced, s_eta, cfg.budget)
        other = precoded_spectral_efficiency(
            nonunitary_baseline(basis, derive_seed(26, index, 4)), h_ss_reduced, s_eta, cfg.budget
        )
        assert other.spectral_efficiency.value <= best.spectral_efficiency.value + 1e-9
