"""Spectral efficiency and interference leakage of the two tiers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DimensionMismatch, InvalidConfig
from .power_allocation import PowerAllocation, waterfill, whiten
from .precoders import Precoder
from .signal_model import OfdmConfig, ReducedChannel, cp_insertion_matrix, dft_matrix


@dataclass(frozen=True)
class SpectralEfficiency:
    """Achievable rate in bits/s/Hz, normalized per channel use by N + L."""

    value: float

    def __float__(self) -> float:
        """Return the rate as a float."""
        return self.value


@dataclass(frozen=True)
class LoadedPrecoder:
    """A precoder with its power loading and the rate it achieves."""

    precoder: Precoder
    allocation: PowerAllocation
    gains: np.ndarray
    spectral_efficiency: SpectralEfficiency


def secondary_spectral_efficiency(
    h_ss: ReducedChannel,
    precoder: Precoder,
    allocation: PowerAllocation,
    s_eta: np.ndarray,
) -> SpectralEfficiency:
    """Return 1/(N+L) log2 |I + S^-1/2 H_ss E P E^H H_ss^H S^-1/2|.

    The determinant is taken on the equivalent L x L form
    |I + P^1/2 G^H G P^1/2| with G = S^-1/2 H_ss E.
    """
    n, block_length = h_ss.shape
    if precoder.E.shape[0] != block_length:
        raise DimensionMismatch(
            f"Precoder {precoder.E.shape} cannot feed channel {h_ss.shape}"
        )
    if allocation.p.size != precoder.streams:
        raise DimensionMismatch(
            f"{allocation.p.size} powers for {precoder.streams} streams"
        )
    if s_eta.shape != (n, n):
        raise DimensionMismatch(f"Covariance {s_eta.shape} does not match {n} subcarriers")
    if allocation.total == 0:
        return SpectralEfficiency(0.0)

    effective = whiten(s_eta) @ h_ss.matrix @ precoder.E
    loaded = effective * np.sqrt(allocation.p)
    gram = np.eye(precoder.streams) + loaded.conj().T @ loaded
    _, logdet = np.linalg.slogdet(gram)
    return SpectralEfficiency(float(logdet / np.log(2) / block_length))


def diagonal_spectral_efficiency(
    eigenvalues: np.ndarray, allocation: PowerAllocation, block_length: int
) -> SpectralEfficiency:
    """Return 1/(N+L) sum_i log2(1 + p_i lambda_i) over parallel eigenmodes."""
    rates = np.log1p(allocation.p * np.asarray(eigenvalues)) / np.log(2)
    return SpectralEfficiency(float(rates.sum() / block_length))


def precoded_spectral_efficiency(
    precoder: Precoder, h_ss: ReducedChannel, s_eta: np.ndarray, budget: float
) -> LoadedPrecoder:
    """Load power on a precoder and return the rate it achieves.

    The precoder is rotated onto the eigenmodes of its whitened effective
    channel G = S^-1/2 H_ss E, with G = U S W^H. Mode i is sent along E w_i
    scaled to unit norm, so its gain is s_i^2 / |E w_i|^2 and the powers
    water-filled on these gains are the transmit powers. The covariance trace
    therefore equals the budget for every kind. Semi-unitary precoders have
    |E w_i| = 1 and keep the plain eigenmode gains.
    """
    effective = whiten(s_eta) @ h_ss.matrix @ precoder.E
    _, singular_values, vgh = linalg.svd(effective, full_matrices=False)
    modes = vgh.conj().T
    scale = 1 / linalg.norm(precoder.E @ modes, axis=0)
    gains = singular_values**2 * scale**2
    loaded = Precoder(
        precoder.E @ modes * scale,
        precoder.kind,
        None if precoder.rotation is None else precoder.rotation @ modes * scale,
        precoder.dropped_columns,
    )
    allocation = waterfill(gains, budget)
    return LoadedPrecoder(
        loaded,
        allocation,
        gains,
        secondary_spectral_efficiency(h_ss, loaded, allocation, s_eta),
    )


def primary_leakage(
    h_sp_conv: np.ndarray, precoder: Precoder, cfg: OfdmConfig
) -> tuple[float, float]:
    """Return the secondary leakage into the primary before and after the DFT.

    The first value is the norm of the last N rows of H_sp E, the second the
    norm of F B H_sp E. The first L rows (the K block) are discarded by the
    CP removal and not counted.
    """
    if h_sp_conv.shape != (cfg.block_length, cfg.block_length) or (
        precoder.E.shape[0] != cfg.block_length
    ):
        raise DimensionMismatch(
            f"Channel {h_sp_conv.shape} and precoder {precoder.E.shape} do not match the block"
        )
    received = (h_sp_conv @ precoder.E)[cfg.cp :]
    pre_dft = float(linalg.norm(received))
    post_dft = float(linalg.norm(dft_matrix(cfg.n) @ received))
    return pre_dft, post_dft


def primary_subcarrier_gains(h_pp: ReducedChannel, cfg: OfdmConfig) -> np.ndarray:
    """Return the N complex gains of the diagonalized primary link H_pp A F^-1."""
    equivalent = h_pp.matrix @ cp_insertion_matrix(cfg) @ dft_matrix(cfg.n).conj().T
    return np.diag(equivalent)


def primary_spectral_efficiency(
    h_pp: ReducedChannel,
    cfg: OfdmConfig,
    with_secondary: bool = False,
    precoder: Precoder | None = None,
    allocation: PowerAllocation | None = None,
    h_sp: ReducedChannel | None = None,
) -> SpectralEfficiency:
    """Return the OFDM rate of the primary link, decoded per subcarrier.

    With the secondary active, its post-processed interference power on each
    subcarrier is added to the noise.
    """
    gains = np.abs(primary_subcarrier_gains(h_pp, cfg)) ** 2
    noise = np.full(cfg.n, cfg.noise_variance)

    if with_secondary:
        if precoder is None or allocation is None or h_sp is None:
            raise InvalidConfig(
                "Secondary precoder, allocation and interference channel are required"
            )
        interference = h_sp.matrix @ precoder.E
        noise = noise + (np.abs(interference) ** 2) @ allocation.p

    rates = np.log1p(cfg.primary_power * gains / noise) / np.log(2)
    return SpectralEfficiency(float(rates.sum() / cfg.block_length))
