"""Invariant suite run by `cia-sim validate` on small instances."""
from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .const import LINK_ROTATION, PDP_PRESETS
from .exceptions import CiaSimError
from .metrics import (
    diagonal_spectral_efficiency,
    precoded_spectral_efficiency,
    primary_leakage,
    primary_spectral_efficiency,
    secondary_spectral_efficiency,
)
from .power_allocation import (
    NoiseModel,
    interference_covariance,
    waterfill,
    waterfill_bisection,
    whiten,
)
from .precoders import (
    cia_precoder,
    column_normalized_gaussian,
    combination_precoder,
    haar_unitary,
    kernel_basis,
    nonunitary_baseline,
    vfdm_root_precoder,
)
from .signal_model import (
    OfdmConfig,
    PdpModel,
    conv_matrix,
    cp_insertion_matrix,
    cp_removal_matrix,
    derive_seed,
    dft_matrix,
    generate_channel,
    reduced_channel,
)

_LOGGER = logging.getLogger(__name__)

VALIDATION_CONFIG = OfdmConfig(n=16, cp=4, channel_order=4, noise_variance=0.1)
DOMINANCE_SLACK = 1e-9


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    key: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class InvariantCheck:
    """An invariant check and the name it is reported under."""

    key: str
    name: str
    run: Callable[[OfdmConfig, int, int], tuple[bool, str]]


def _links(cfg: OfdmConfig, seed: int, index: int, pdp: PdpModel):
    return [
        generate_channel(cfg, pdp, derive_seed(seed, index, link)) for link in range(4)
    ]


def _pdps():
    return [PdpModel.from_preset(name) for name in PDP_PRESETS]


def check_cp_transparency(cfg, seed, realizations):
    """B A is the identity."""
    error = linalg.norm(cp_removal_matrix(cfg) @ cp_insertion_matrix(cfg) - np.eye(cfg.n))
    return error == 0, f"||BA - I|| = {error:.3e}"


def check_dft_unitary(cfg, seed, realizations):
    """F F^H is the identity."""
    f = dft_matrix(cfg.n)
    error = linalg.norm(f @ f.conj().T - np.eye(cfg.n))
    return error < 1e-12, f"||FF^H - I|| = {error:.3e}"


def check_convolution(cfg, seed, realizations):
    """H x matches a direct circular convolution."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for index in range(realizations):
        ch = generate_channel(cfg, _pdps()[0], derive_seed(seed, index, 0))
        x = rng.standard_normal(cfg.block_length) + 1j * rng.standard_normal(cfg.block_length)
        direct = np.array(
            [
                sum(ch.taps[k] * x[(r - k) % cfg.block_length] for k in range(ch.taps.size))
                for r in range(cfg.block_length)
            ]
        )
        worst = max(worst, linalg.norm(conv_matrix(ch, cfg) @ x - direct) / linalg.norm(direct))
    return worst < 1e-12, f"worst relative error {worst:.3e}"


def check_kernel_dimension(cfg, seed, realizations):
    """Every reduced interference channel has rank N and an L-dimensional kernel."""
    for pdp in _pdps():
        for index in range(realizations):
            h_sp = _links(cfg, seed, index, pdp)[1]
            try:
                basis = kernel_basis(reduced_channel(h_sp, cfg))
            except CiaSimError as err:
                return False, f"{pdp.kind}/{pdp.decay_ratio} trial {index}: {err}"
            if basis.dimension != cfg.cp:
                return False, f"kernel dimension {basis.dimension} != {cfg.cp}"
    return True, f"{realizations} realizations per PDP"


def check_alignment(cfg, seed, realizations):
    """Every precoder is invisible to the primary after CP removal and DFT."""
    worst = 0.0
    for pdp in _pdps():
        for index in range(realizations):
            _, h_sp, h_ss, _ = _links(cfg, seed, index, pdp)
            basis = kernel_basis(reduced_channel(h_sp, cfg))
            precoders = [nonunitary_baseline(basis, derive_seed(seed, index, LINK_ROTATION))]
            precoders.append(
                cia_precoder(basis, reduced_channel(h_ss, cfg), np.eye(cfg.n))[0]
            )
            try:
                precoders.append(vfdm_root_precoder(h_sp, cfg))
            except CiaSimError:
                pass
            h_conv = conv_matrix(h_sp, cfg)
            for precoder in precoders:
                _, post_dft = primary_leakage(h_conv, precoder, cfg)
                worst = max(worst, post_dft / linalg.norm(h_conv))
    return worst < 1e-10, f"worst relative leakage {worst:.3e}"


def check_semi_unitary(cfg, seed, realizations):
    """CIA and root-based precoders have orthonormal columns."""
    worst = 0.0
    for index in range(realizations):
        _, h_sp, h_ss, _ = _links(cfg, seed, index, _pdps()[0])
        basis = kernel_basis(reduced_channel(h_sp, cfg))
        cia, _ = cia_precoder(basis, reduced_channel(h_ss, cfg), np.eye(cfg.n))
        precoders = [cia]
        try:
            precoders.append(vfdm_root_precoder(h_sp, cfg))
        except CiaSimError:
            pass
        for precoder in precoders:
            gram = precoder.E.conj().T @ precoder.E
            worst = max(worst, float(np.abs(gram - np.eye(precoder.streams)).max()))
    return worst < 1e-8, f"worst |E^H E - I| entry {worst:.3e}"


def check_dominance(cfg, seed, realizations):
    """No combination E = V Gamma beats the CIA precoder."""
    for pdp in _pdps():
        for index in range(realizations):
            _, h_sp, h_ss, _ = _links(cfg, seed, index, pdp)
            h_ss_reduced = reduced_channel(h_ss, cfg)
            s_eta = cfg.noise_variance * np.eye(cfg.n)
            basis = kernel_basis(reduced_channel(h_sp, cfg))
            cia, _ = cia_precoder(basis, h_ss_reduced, s_eta)
            best = precoded_spectral_efficiency(cia, h_ss_reduced, s_eta, cfg.budget)
            for draw in range(10):
                stream = derive_seed(seed, index, 5, draw)
                gamma = (
                    haar_unitary(cfg.cp, stream)
                    if draw % 2
                    else column_normalized_gaussian(cfg.cp, stream)
                )
                other = precoded_spectral_efficiency(
                    combination_precoder(basis, gamma), h_ss_reduced, s_eta, cfg.budget
                )
                if (
                    other.spectral_efficiency.value
                    > best.spectral_efficiency.value + DOMINANCE_SLACK
                ):
                    return False, f"trial {index} draw {draw} beats CIA"
    return True, f"{realizations} realizations x 10 combinations per PDP"


def check_waterfilling(cfg, seed, realizations):
    """Closed-form water-filling matches bisection on the water level."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(realizations * 10):
        eigenvalues = rng.exponential(size=cfg.cp) * (rng.random(cfg.cp) > 0.2)
        if not eigenvalues.any():
            continue
        budget = float(rng.uniform(0.1, 10.0))
        closed = waterfill(eigenvalues, budget)
        oracle = waterfill_bisection(eigenvalues, budget)
        worst = max(worst, float(np.abs(closed.p - oracle.p).max()))
    return worst < 1e-8, f"worst power gap {worst:.3e}"


def check_hadamard(cfg, seed, realizations):
    """The CIA determinant form equals the sum over eigenmodes."""
    worst = 0.0
    for index in range(realizations):
        _, h_sp, h_ss, h_ps = _links(cfg, seed, index, _pdps()[0])
        noise = NoiseModel(cfg.noise_variance, True, cfg.primary_power)
        s_eta = interference_covariance(noise, reduced_channel(h_ps, cfg), cfg)
        h_ss_reduced = reduced_channel(h_ss, cfg)
        basis = kernel_basis(reduced_channel(h_sp, cfg))
        cia, eigenvalues = cia_precoder(basis, h_ss_reduced, s_eta)
        allocation = waterfill(eigenvalues, cfg.budget)
        determinant = secondary_spectral_efficiency(h_ss_reduced, cia, allocation, s_eta).value
        diagonal = diagonal_spectral_efficiency(eigenvalues, allocation, cfg.block_length).value
        worst = max(worst, abs(determinant - diagonal) / diagonal)
    return worst < 1e-9, f"worst relative gap {worst:.3e}"


def check_primary_protection(cfg, seed, realizations):
    """The primary rate is unchanged by an aligned secondary."""
    for index in range(realizations):
        h_pp, h_sp, h_ss, _ = _links(cfg, seed, index, _pdps()[0])
        h_sp_reduced = reduced_channel(h_sp, cfg)
        h_ss_reduced = reduced_channel(h_ss, cfg)
        s_eta = cfg.noise_variance * np.eye(cfg.n)
        cia, eigenvalues = cia_precoder(kernel_basis(h_sp_reduced), h_ss_reduced, s_eta)
        allocation = waterfill(eigenvalues, cfg.budget)
        h_pp_reduced = reduced_channel(h_pp, cfg)
        alone = primary_spectral_efficiency(h_pp_reduced, cfg)
        shared = primary_spectral_efficiency(
            h_pp_reduced, cfg, True, cia, allocation, h_sp_reduced
        )
        if alone.value != shared.value:
            return False, f"trial {index}: {alone.value!r} != {shared.value!r}"
    return True, "primary rate bit-identical"


def check_whitening(cfg, seed, realizations):
    """S^-1/2 S S^-1/2 is the identity."""
    worst = 0.0
    for index in range(realizations):
        h_ps = _links(cfg, seed, index, _pdps()[0])[3]
        noise = NoiseModel(cfg.noise_variance, True, cfg.primary_power)
        s_eta = interference_covariance(noise, reduced_channel(h_ps, cfg), cfg)
        w = whiten(s_eta)
        worst = max(worst, float(linalg.norm(w @ s_eta @ w - np.eye(cfg.n))))
    return worst < 1e-9, f"worst ||W S W - I|| = {worst:.3e}"


CHECKS = [
    InvariantCheck("cp_transparency", "CP removal inverts insertion", check_cp_transparency),
    InvariantCheck("dft_unitary", "Unitary DFT", check_dft_unitary),
    InvariantCheck("convolution", "Convolution matrix oracle", check_convolution),
    InvariantCheck("kernel_dimension", "Kernel dimension L", check_kernel_dimension),
    InvariantCheck("alignment", "Interference alignment", check_alignment),
    InvariantCheck("semi_unitary", "Semi-unitary precoders", check_semi_unitary),
    InvariantCheck("dominance", "CIA optimality", check_dominance),
    InvariantCheck("waterfilling", "Water-filling vs bisection", check_waterfilling),
    InvariantCheck("hadamard", "Determinant vs eigenmode rate", check_hadamard),
    InvariantCheck("primary_protection", "Primary protection", check_primary_protection),
    InvariantCheck("whitening", "Whitening", check_whitening),
]


def run_validation(
    cfg: OfdmConfig = VALIDATION_CONFIG, seed: int = 0, realizations: int = 20
) -> dict:
    """Run every registered check and return a JSON-ready report."""
    results = []
    for check in CHECKS:
        try:
            passed, detail = check.run(cfg, seed, realizations)
        except CiaSimError as err:
            passed, detail = False, f"{err.key}: {err}"
        _LOGGER.debug("%s: %s (%s)", check.name, "ok" if passed else "FAILED", detail)
        if not passed:
            _LOGGER.error("Invariant check %s failed: %s", check.key, detail)
        results.append(CheckResult(check.key, bool(passed), detail))
    return {
        "ok": all(result.passed for result in results),
        "checks": [
            {"key": r.key, "passed": r.passed, "detail": r.detail} for r in results
        ],
    }
