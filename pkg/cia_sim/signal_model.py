"""Transmission model of the two-tiered OFDM network.

Builds the deterministic matrices of the block transmission (cyclic prefix
insertion and removal, unitary DFT, channel convolution, reduced channels)
and draws Rayleigh channel realizations under the supported power delay
profiles.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .const import PDP_PRESETS, PdpKind
from .exceptions import InvalidConfig


SeedLike = int | np.random.SeedSequence


@dataclass(frozen=True)
class OfdmConfig:
    """Dimensions and power parameters of the OFDM block transmission.

    n is the number of subcarriers, cp the cyclic prefix length in samples and
    channel_order the order l of every link (l + 1 taps).
    """

    n: int
    cp: int
    channel_order: int
    primary_power: float = 1.0
    secondary_power: float = 1.0
    noise_variance: float = 1.0

    def __post_init__(self):
        """Validate the block dimensions."""
        if self.n < 1 or self.cp < 1 or self.channel_order < 0:
            raise InvalidConfig(
                f"Invalid dimensions n={self.n}, cp={self.cp}, order={self.channel_order}"
            )
        if self.cp < self.channel_order:
            raise InvalidConfig(
                f"Cyclic prefix {self.cp} shorter than channel order {self.channel_order}"
            )
        if self.n < self.cp:
            raise InvalidConfig(f"Subcarriers {self.n} fewer than cyclic prefix {self.cp}")
        if self.primary_power < 0 or self.secondary_power < 0:
            raise InvalidConfig("Transmit powers must be non-negative")
        if self.noise_variance <= 0:
            raise InvalidConfig("Noise variance must be positive")

    @property
    def block_length(self) -> int:
        """Return N + L, the transmitted samples per block."""
        return self.n + self.cp

    @property
    def budget(self) -> float:
        """Return the secondary power budget (N + L) * P_s."""
        return self.block_length * self.secondary_power

    def with_noise(self, noise_variance: float) -> OfdmConfig:
        """Return a copy of the config with another noise variance."""
        return OfdmConfig(
            self.n,
            self.cp,
            self.channel_order,
            self.primary_power,
            self.secondary_power,
            noise_variance,
        )


@dataclass(frozen=True)
class PdpModel:
    """Power delay profile of a link; decay_ratio is T_s / tau."""

    kind: PdpKind
    decay_ratio: float = 1.0

    def __post_init__(self):
        """Validate the profile."""
        if self.decay_ratio <= 0:
            raise InvalidConfig(f"Decay ratio must be positive, got {self.decay_ratio}")

    @classmethod
    def from_preset(cls, name: str) -> PdpModel:
        """Build a profile from its preset name."""
        try:
            kind, decay_ratio = PDP_PRESETS[name]
        except KeyError as err:
            raise InvalidConfig(f"Unknown PDP preset: {name}") from err
        return cls(kind, decay_ratio)

    def variances(self, order: int) -> np.ndarray:
        """Return the l + 1 tap variances, normalized to unit total power."""
        if self.kind == PdpKind.UNIFORM:
            return np.full(order + 1, 1.0 / (order + 1))
        profile = np.exp(-np.arange(order + 1) * self.decay_ratio)
        return profile / profile.sum()


@dataclass(frozen=True)
class ChannelRealization:
    """The l + 1 complex taps h_0..h_l of one link."""

    taps: np.ndarray
    pdp: PdpModel = field(default_factory=lambda: PdpModel(PdpKind.UNIFORM))

    @property
    def order(self) -> int:
        """Return the channel order l."""
        return self.taps.size - 1


@dataclass(frozen=True)
class ReducedChannel:
    """The N x (N + L) channel seen after CP removal and DFT."""

    matrix: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        """Return the matrix shape."""
        return self.matrix.shape


def derive_seed(master_seed: int, *path: int) -> np.random.SeedSequence:
    """Derive an independent stream from the master seed and an index path."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(path))


def generate_channel(
    cfg: OfdmConfig, pdp: PdpModel, rng_seed: SeedLike
) -> ChannelRealization:
    """Draw one Rayleigh channel realization with the given profile."""
    rng = np.random.default_rng(rng_seed)
    variances = pdp.variances(cfg.channel_order)
    size = variances.size
    taps = np.sqrt(variances / 2) * (
        rng.standard_normal(size) + 1j * rng.standard_normal(size)
    )
    return ChannelRealization(taps, pdp)


def cp_insertion_matrix(cfg: OfdmConfig) -> np.ndarray:
    """Return A, the (N + L) x N cyclic prefix insertion matrix."""
    identity = np.eye(cfg.n)
    return np.vstack([identity[cfg.n - cfg.cp :], identity])


def cp_removal_matrix(cfg: OfdmConfig) -> np.ndarray:
    """Return B = [0 | I_N], the N x (N + L) cyclic prefix removal matrix."""
    return np.hstack([np.zeros((cfg.n, cfg.cp)), np.eye(cfg.n)])


def dft_matrix(n: int) -> np.ndarray:
    """Return the unitary N x N DFT matrix."""
    return linalg.dft(n, scale="sqrtn")


def _check_order(ch: ChannelRealization, cfg: OfdmConfig) -> None:
    if ch.order > cfg.cp:
        raise InvalidConfig(
            f"Channel order {ch.order} exceeds cyclic prefix {cfg.cp}"
        )


def conv_matrix(ch: ChannelRealization, cfg: OfdmConfig) -> np.ndarray:
    """Return H_ab, the (N + L) x (N + L) channel convolution matrix.

    Row r carries sum_k h_k x[(r - k) mod (N + L)]; the wrap-around entries
    stand for the previous block under a block-invariant channel.
    """
    _check_order(ch, cfg)
    first_column = np.zeros(cfg.block_length, dtype=complex)
    first_column[: ch.taps.size] = ch.taps
    return linalg.circulant(first_column)


def cp_free_convolution(ch: ChannelRealization, cfg: OfdmConfig) -> np.ndarray:
    """Return B H_ab directly as the N x (N + L) banded Toeplitz matrix."""
    _check_order(ch, cfg)
    first_row = np.zeros(cfg.block_length, dtype=complex)
    first_row[cfg.cp - ch.order : cfg.cp + 1] = ch.taps[::-1]
    first_column = np.zeros(cfg.n, dtype=complex)
    first_column[0] = first_row[0]
    return linalg.toeplitz(first_column, first_row)


def reduced_channel(ch: ChannelRealization, cfg: OfdmConfig) -> ReducedChannel:
    """Return the reduced channel F B H_ab."""
    return ReducedChannel(dft_matrix(cfg.n) @ cp_free_convolution(ch, cfg))


def numerical_rank(matrix: np.ndarray, rtol: float) -> int:
    """Return the number of singular values above rtol times the largest."""
    singular_values = linalg.svdvals(matrix)
    if singular_values.size == 0 or singular_values[0] == 0:
        return 0
    return int(np.count_nonzero(singular_values > rtol * singular_values[0]))
