"""Interference-plus-noise covariance, whitening and water-filling."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import AllZeroEigenvalues, DimensionMismatch, NotPositiveDefinite
from .signal_model import OfdmConfig, ReducedChannel, cp_insertion_matrix, dft_matrix

_LOGGER = logging.getLogger(__name__)

BISECTION_ITERATIONS = 200


@dataclass(frozen=True)
class NoiseModel:
    """What the secondary receiver sees besides its own signal."""

    noise_variance: float
    include_primary_interference: bool = False
    primary_power: float = 1.0

    @classmethod
    def from_config(cls, cfg: OfdmConfig, include_primary_interference: bool):
        """Build the noise model of a given block configuration."""
        return cls(cfg.noise_variance, include_primary_interference, cfg.primary_power)


@dataclass(frozen=True)
class PowerAllocation:
    """Per-stream powers and the water level reaching them."""

    p: np.ndarray
    mu: float
    budget: float

    @property
    def total(self) -> float:
        """Return the allocated power."""
        return float(self.p.sum())


def primary_transmit_covariance(noise: NoiseModel, cfg: OfdmConfig) -> np.ndarray:
    """Return S_p, the covariance of x_p = A F^-1 s_p under uniform power."""
    precoder = cp_insertion_matrix(cfg) @ dft_matrix(cfg.n).conj().T
    return noise.primary_power * (precoder @ precoder.conj().T)


def interference_covariance(
    noise: NoiseModel, h_ps: ReducedChannel, cfg: OfdmConfig
) -> np.ndarray:
    """Return S_eta, the covariance of interference plus noise at the SUE."""
    s_eta = noise.noise_variance * np.eye(cfg.n, dtype=complex)
    if not noise.include_primary_interference or noise.primary_power == 0:
        return s_eta
    if h_ps.shape != (cfg.n, cfg.block_length):
        raise DimensionMismatch(
            f"Reduced channel {h_ps.shape} does not match block ({cfg.n}, {cfg.block_length})"
        )
    s_p = primary_transmit_covariance(noise, cfg)
    interference = h_ps.matrix @ s_p @ h_ps.matrix.conj().T
    s_eta = s_eta + interference
    # Symmetrize away rounding so downstream eigh sees an exactly Hermitian matrix
    return (s_eta + s_eta.conj().T) / 2


def whiten(s_eta: np.ndarray) -> np.ndarray:
    """Return the Hermitian inverse square root S_eta^-1/2."""
    eigenvalues, eigenvectors = linalg.eigh(s_eta)
    if eigenvalues[0] <= 0:
        raise NotPositiveDefinite(
            f"Covariance has minimum eigenvalue {eigenvalues[0]:.3e}"
        )
    return (eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.conj().T


def waterfill(eigenvalues: np.ndarray, budget: float) -> PowerAllocation:
    """Return the water-filling allocation p_i = [mu - 1/lambda_i]^+.

    The active set is found by sorting the gains and shrinking it until the
    weakest active channel sits below the water level.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    powers = np.zeros(eigenvalues.size)
    positive = np.flatnonzero(eigenvalues > 0)

    if positive.size == 0:
        if budget > 0:
            raise AllZeroEigenvalues("Every eigenvalue is zero, nowhere to pour power")
        return PowerAllocation(powers, 0.0, budget)

    order = positive[np.argsort(eigenvalues[positive])[::-1]]
    inverse = 1.0 / eigenvalues[order]
    cumulative = np.cumsum(inverse)

    active = order.size
    mu = (budget + cumulative[active - 1]) / active
    while active > 1 and mu < inverse[active - 1]:
        active -= 1
        mu = (budget + cumulative[active - 1]) / active

    powers[order[:active]] = np.maximum(mu - inverse[:active], 0.0)
    _LOGGER.debug(
        "Water level %.6g reaches %d of %d channels", mu, active, eigenvalues.size
    )
    return PowerAllocation(powers, float(mu), budget)


def waterfill_bisection(
    eigenvalues: np.ndarray, budget: float, tol: float = 1e-13
) -> PowerAllocation:
    """Return the water-filling allocation found by bisection on mu."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    positive = eigenvalues > 0
    if not positive.any():
        if budget > 0:
            raise AllZeroEigenvalues("Every eigenvalue is zero, nowhere to pour power")
        return PowerAllocation(np.zeros(eigenvalues.size), 0.0, budget)

    inverse = np.full(eigenvalues.size, np.inf)
    inverse[positive] = 1.0 / eigenvalues[positive]
    low = float(inverse[positive].min())
    high = low + budget
    for _ in range(BISECTION_ITERATIONS):
        mu = (low + high) / 2
        poured = np.maximum(mu - inverse, 0.0).sum()
        if poured > budget:
            high = mu
        else:
            low = mu
        if high - low <= tol * max(1.0, high):
            break
    mu = (low + high) / 2
    return PowerAllocation(np.maximum(mu - inverse, 0.0), float(mu), budget)


def active_streams(allocation: PowerAllocation) -> int:
    """Return the number of streams receiving power."""
    return int(np.count_nonzero(allocation.p > 0))
