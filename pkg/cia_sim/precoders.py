"""Secondary precoders confined to the kernel of the interference channel.

Three constructions are supported:

- the optimal cognitive interference alignment precoder E* = V V_g, where V
  is an orthonormal kernel basis and V_g the right singular vectors of the
  whitened effective channel;
- the root-based Vandermonde precoder, built from the roots of the
  interference channel polynomial and orthonormalized by Gram-Schmidt;
- a non-unitary baseline E = V Gamma with a random column-normalized Gamma.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

from .const import (
    GS_PIVOT_TOL,
    KERNEL_RTOL,
    ROOT_MERGE_RTOL,
    VFDM_PIVOT_RTOL,
    PrecoderKind,
)
from .exceptions import (
    DegenerateChannel,
    DimensionMismatch,
    InvalidConfig,
    RepeatedRoots,
    VfdmDegenerate,
)
from .power_allocation import whiten
from .signal_model import (
    ChannelRealization,
    OfdmConfig,
    ReducedChannel,
    SeedLike,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelBasis:
    """Orthonormal basis V of the interference channel kernel."""

    V: np.ndarray

    @property
    def dimension(self) -> int:
        """Return the kernel dimension."""
        return self.V.shape[1]


@dataclass(frozen=True)
class Precoder:
    """A secondary precoder E and the combination matrix it was built with.

    rotation is Gamma in E = V Gamma when the precoder is expressed on a
    kernel basis, None otherwise. dropped_columns counts root-based streams
    lost during orthonormalization.
    """

    E: np.ndarray
    kind: PrecoderKind
    rotation: np.ndarray | None = None
    dropped_columns: int = 0

    @property
    def streams(self) -> int:
        """Return the number of precoded streams."""
        return self.E.shape[1]


def kernel_basis(h_sp: ReducedChannel) -> KernelBasis:
    """Return an orthonormal basis of ker(H_sp) from its full SVD."""
    n, block_length = h_sp.shape
    _, singular_values, vh = linalg.svd(h_sp.matrix)
    rank = int(np.count_nonzero(singular_values > KERNEL_RTOL * singular_values[0]))
    if rank < n:
        raise DegenerateChannel(
            f"Interference channel rank {rank} below {n}, "
            f"kernel dimension {block_length - rank} exceeds {block_length - n}"
        )
    return KernelBasis(vh[n:].conj().T)


def cia_precoder(
    basis: KernelBasis, h_ss: ReducedChannel, s_eta: np.ndarray
) -> tuple[Precoder, np.ndarray]:
    """Return the optimal precoder E* = V V_g and the eigenvalues of G G^H.

    G = S_eta^-1/2 H_ss V; the eigenvalues are sorted descending so stream i
    rides the i-th strongest eigenmode.
    """
    if h_ss.shape[1] != basis.V.shape[0]:
        raise DimensionMismatch(
            f"Channel {h_ss.shape} cannot act on kernel basis {basis.V.shape}"
        )
    effective = whiten(s_eta) @ h_ss.matrix @ basis.V
    _, singular_values, vgh = linalg.svd(effective, full_matrices=False)
    rotation = vgh.conj().T
    return (
        Precoder(basis.V @ rotation, PrecoderKind.CIA, rotation),
        singular_values**2,
    )


def channel_roots(ch: ChannelRealization) -> np.ndarray:
    """Return the roots of p(z) = sum_k h_k z^(l-k) as companion eigenvalues."""
    if ch.order == 0:
        return np.zeros(0, dtype=complex)
    if ch.taps[0] == 0:
        raise DegenerateChannel("Leading tap h_0 is zero, channel polynomial degenerates")
    return linalg.eigvals(linalg.companion(ch.taps))


def root_multiplicities(roots: np.ndarray) -> np.ndarray:
    """Return, for each root, how many earlier roots coincide with it."""
    counts = np.zeros(roots.size, dtype=int)
    for i in range(roots.size):
        scale = max(1.0, abs(roots[i]))
        counts[i] = int(
            np.count_nonzero(np.abs(roots[:i] - roots[i]) < ROOT_MERGE_RTOL * scale)
        )
    return counts


def vandermonde_column(root: complex, size: int, derivative: int = 0) -> np.ndarray:
    """Return the unit-norm column C(n, d) a^(n-d), n = 0..size-1.

    Roots outside the unit circle are evaluated on the reversed, scaled powers
    so the column never overflows; scaling does not change its direction.
    """
    index = np.arange(size)
    binomial = special.comb(index, derivative)
    if abs(root) <= 1:
        powers = np.cumprod(np.r_[1.0 + 0j, np.full(size - 1, root)])
        shifted = np.clip(index - derivative, 0, None)
        column = np.where(index >= derivative, binomial * powers[shifted], 0)
    else:
        powers = np.cumprod(np.r_[1.0 + 0j, np.full(size - 1, 1 / root)])
        column = binomial * powers[size - 1 - index]
    return column / linalg.norm(column)


def gram_schmidt(
    columns: np.ndarray, pivot_tol: float = GS_PIVOT_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormalize columns by modified Gram-Schmidt with one re-pass.

    Returns the orthonormal columns and, for every input column, its pivot:
    the norm left after projecting out the columns kept so far, relative to
    its own norm. A column is kept when its pivot reaches pivot_tol.
    """
    basis: list[np.ndarray] = []
    pivots = np.zeros(columns.shape[1])

    for j in range(columns.shape[1]):
        w = columns[:, j].astype(complex)
        norm = linalg.norm(w)
        if norm == 0:
            continue
        for _ in range(2):
            for q in basis:
                w = w - (q.conj() @ w) * q
        pivots[j] = linalg.norm(w) / norm
        if pivots[j] >= pivot_tol:
            basis.append(w / linalg.norm(w))

    if not basis:
        return np.zeros((columns.shape[0], 0), dtype=complex), pivots
    return np.column_stack(basis), pivots


def vfdm_columns(
    ch: ChannelRealization, cfg: OfdmConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Return the normalized root-based kernel columns before orthonormalization.

    When l < L the first L - l samples are invisible after CP removal, so the
    matching unit vectors complete the l Vandermonde columns. The second
    value flags the confluent (derivative) columns of repeated roots.
    """
    roots = channel_roots(ch)
    multiplicity = root_multiplicities(roots)
    if multiplicity.any():
        _LOGGER.debug(
            "%d repeated roots, using confluent columns", int(np.count_nonzero(multiplicity))
        )
    padding = cfg.cp - ch.order
    columns = [np.eye(cfg.block_length)[:, k] for k in range(padding)]
    columns.extend(
        vandermonde_column(root, cfg.block_length, int(m))
        for root, m in zip(roots, multiplicity, strict=True)
    )
    confluent = np.r_[np.zeros(padding, dtype=bool), multiplicity > 0]
    return np.column_stack(columns), confluent


def vfdm_root_precoder(
    h_sp: ChannelRealization, cfg: OfdmConfig, basis: KernelBasis | None = None
) -> Precoder:
    """Return the orthonormal root-based Vandermonde precoder.

    Columns whose Gram-Schmidt pivot falls under VFDM_PIVOT_RTOL add no
    usable direction and are dropped, so the precoder may carry fewer than
    L streams. A pivot under GS_PIVOT_TOL means the orthonormalization
    underflowed and the realization is rejected.
    """
    if h_sp.order > cfg.cp:
        raise InvalidConfig(f"Channel order {h_sp.order} exceeds cyclic prefix {cfg.cp}")
    raw, confluent = vfdm_columns(h_sp, cfg)
    E, pivots = gram_schmidt(raw, VFDM_PIVOT_RTOL)
    underflow = pivots < GS_PIVOT_TOL

    if (confluent & underflow).any():
        raise RepeatedRoots("Confluent Vandermonde columns degenerated")
    if underflow.any():
        raise VfdmDegenerate(
            f"Gram-Schmidt pivot underflow on {int(np.count_nonzero(underflow))} "
            f"of {raw.shape[1]} root-based columns"
        )
    if E.shape[1] == 0:
        raise VfdmDegenerate(f"All {raw.shape[1]} root-based columns were discarded")

    dropped = raw.shape[1] - E.shape[1]
    if dropped:
        _LOGGER.debug(
            "Root-based precoder kept %d of %d streams, smallest pivot %.2e",
            E.shape[1],
            raw.shape[1],
            pivots.min(),
        )
    rotation = basis.V.conj().T @ E if basis is not None else None
    return Precoder(E, PrecoderKind.VFDM, rotation, dropped)


def column_normalized_gaussian(size: int, rng_seed: SeedLike) -> np.ndarray:
    """Return a size x size i.i.d. complex Gaussian matrix with unit-norm columns."""
    rng = np.random.default_rng(rng_seed)
    gamma = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    return gamma / linalg.norm(gamma, axis=0)


def haar_unitary(size: int, rng_seed: SeedLike) -> np.ndarray:
    """Return a Haar-distributed size x size unitary matrix."""
    rng = np.random.default_rng(rng_seed)
    gaussian = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    q, r = linalg.qr(gaussian)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def combination_precoder(
    basis: KernelBasis, rotation: np.ndarray, kind: PrecoderKind = PrecoderKind.NONUNITARY
) -> Precoder:
    """Return E = V Gamma for a given combination matrix."""
    if rotation.shape[0] != basis.dimension:
        raise DimensionMismatch(
            f"Combination matrix {rotation.shape} does not fit kernel dimension {basis.dimension}"
        )
    return Precoder(basis.V @ rotation, kind, rotation)


def nonunitary_baseline(basis: KernelBasis, rng_seed: SeedLike) -> Precoder:
    """Return the suboptimal baseline E = V Gamma with a random non-unitary Gamma."""
    return combination_precoder(
        basis, column_normalized_gaussian(basis.dimension, rng_seed)
    )
