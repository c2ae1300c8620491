"""Measurement operators of the three sampling architectures.

Each operator is a linear map from M x W matrices to length L = M * Omega
measurement vectors, flattened channel-major: entry (i, j) of the
measurement grid lands at y[i * Omega + j].

Variants
--------
- entry mask (Arch 1): each channel keeps Omega random time samples;
  equivalent to observing M * Omega matrix entries (matrix completion).
- demodulator (Arch 2): each channel is chipped by a +-1 sequence and
  block-integrated, y[i, j] = sum_{k in B_j} d_i[k] X[i, k].
- universal (Arch 3): orthogonal mixer + random all-pass filter applied
  first, then either inner variant.

Block partitions use contiguous blocks with floor-boundary edges, which
reduces to the exact uniform partition whenever Omega divides W.  Uniform
partitions give the demodulator Omega orthogonal rows of equal norm per
channel, hence operator norm sqrt(W/Omega) and a scalar A A^*; uneven
partitions keep A A^* diagonal (block sizes), which is all the solvers need.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .diversify import (
    FilterSpectrum,
    Mixer,
    ModulatorBank,
    gen_filter,
    gen_mixer,
    gen_modulator_bank,
    preprocess,
    preprocess_adjoint,
)
from .seeding import sub_rng

__all__ = [
    "SamplingMask",
    "BlockPartition",
    "MeasurementRecord",
    "gen_sampling_mask",
    "block_partition",
    "mask_forward",
    "mask_adjoint",
    "demod_forward",
    "demod_adjoint",
    "EntryMaskOp",
    "DemodulatorOp",
    "UniversalOp",
    "make_operator",
    "measure",
    "VARIANTS",
    "expectation_identity_check",
    "add_noise",
    "sigma_for_snr",
    "snr_db",
]


@dataclass(frozen=True)
class SamplingMask:
    """Per-channel sample sets T_m, each of exactly Omega distinct indices."""

    indices: np.ndarray  # M x Omega, each row sorted
    seed: int

    @property
    def M(self) -> int:
        return self.indices.shape[0]

    @property
    def omega(self) -> int:
        return self.indices.shape[1]


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous partition of {0..W-1} into Omega blocks.

    Edges are floor(j * W / Omega); blocks have size W // Omega when Omega
    divides W (the analytically clean case) and sizes differing by one
    otherwise.
    """

    W: int
    omega: int
    edges: np.ndarray = field(repr=False)

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def uniform(self) -> bool:
        return self.W % self.omega == 0

    @property
    def block_size(self) -> int:
        if not self.uniform:
            raise ValueError(f"partition W={self.W}, Omega={self.omega} is not uniform")
        return self.W // self.omega


@dataclass(frozen=True)
class MeasurementRecord:
    """A measurement vector plus everything needed to replay it.

    The operator is reconstructed from (variant, M, W, omega, op_seed);
    sigma/delta/noise_seed describe additive Gaussian noise (all zero when
    noiseless); ``truth`` optionally records how the measured ensemble was
    generated so a recovery run can report its relative error.
    """

    y: np.ndarray
    M: int
    W: int
    omega: int
    variant: str
    op_seed: int
    sigma: float = 0.0
    delta: float = 0.0
    noise_seed: int | None = None
    truth: dict | None = None

    @property
    def L(self) -> int:
        return self.M * self.omega


def gen_sampling_mask(M: int, W: int, omega: int, seed: int) -> SamplingMask:
    """Draw Omega of W time indices per channel, uniformly without replacement."""
    if not (1 <= omega <= W):
        raise ValueError(f"need 1 <= Omega <= W, got Omega={omega}, W={W}")
    rows = [
        np.sort(sub_rng(seed, "mask", m).choice(W, size=omega, replace=False))
        for m in range(M)
    ]
    return SamplingMask(indices=np.array(rows, dtype=np.int64), seed=int(seed))


def block_partition(W: int, omega: int) -> BlockPartition:
    if not (1 <= omega <= W):
        raise ValueError(f"need 1 <= Omega <= W, got Omega={omega}, W={W}")
    edges = (np.arange(omega + 1, dtype=np.int64) * W) // omega
    return BlockPartition(W=int(W), omega=int(omega), edges=edges)


def mask_forward(X: np.ndarray, mask: SamplingMask) -> np.ndarray:
    """y[(i, j)] = X[i, T_i[j]], channel-major, sorted within each channel."""
    X = np.asarray(X)
    if X.shape[0] != mask.M or X.shape[1] <= mask.indices.max(initial=-1):
        raise ValueError(f"mask does not fit matrix of shape {X.shape}")
    rows = np.arange(mask.M)[:, None]
    return X[rows, mask.indices].ravel().astype(float, copy=False)


def mask_adjoint(y: np.ndarray, mask: SamplingMask, W: int) -> np.ndarray:
    """Zero-filled transpose of entry sampling."""
    y = np.asarray(y, dtype=float)
    if y.size != mask.M * mask.omega:
        raise ValueError(f"expected {mask.M * mask.omega} samples, got {y.size}")
    X = np.zeros((mask.M, W))
    rows = np.arange(mask.M)[:, None]
    X[rows, mask.indices] = y.reshape(mask.M, mask.omega)
    return X


def demod_forward(X0: np.ndarray, bank: ModulatorBank, part: BlockPartition) -> np.ndarray:
    """Chip by the modulator signs, then sum each block: y_ij = sum_{k in B_j} d_i[k] X0[i,k]."""
    X0 = np.asarray(X0)
    if X0.shape != (bank.M, bank.W) or bank.W != part.W:
        raise ValueError(
            f"shape mismatch: X0 {X0.shape}, bank {bank.M}x{bank.W}, partition W={part.W}"
        )
    chipped = bank.signs * X0
    return np.add.reduceat(chipped, part.edges[:-1], axis=1).ravel()


def demod_adjoint(y: np.ndarray, bank: ModulatorBank, part: BlockPartition) -> np.ndarray:
    """A*(y) = sum_ij y_ij A_ij: block j of row i is y_ij times the local signs."""
    y = np.asarray(y, dtype=float)
    if y.size != bank.M * part.omega:
        raise ValueError(f"expected {bank.M * part.omega} samples, got {y.size}")
    spread = np.repeat(y.reshape(bank.M, part.omega), part.sizes, axis=1)
    return spread * bank.signs


class EntryMaskOp:
    """Arch 1: per-channel random time sampling (matrix completion operator)."""

    variant = "mask"

    def __init__(self, mask: SamplingMask, W: int, seed: int):
        self.mask = mask
        self.M = mask.M
        self.W = int(W)
        self.omega = mask.omega
        self.L = self.M * self.omega
        self.seed = int(seed)
        # distinct entries per measurement -> A A^* is exactly the identity
        self.gram_diag = np.ones(self.L)

    def forward(self, X: np.ndarray) -> np.ndarray:
        return mask_forward(X, self.mask)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return mask_adjoint(y, self.mask, self.W)


class DemodulatorOp:
    """Arch 2: random +-1 modulation followed by block integration."""

    variant = "demodulator"

    def __init__(self, bank: ModulatorBank, part: BlockPartition, seed: int):
        self.bank = bank
        self.part = part
        self.M = bank.M
        self.W = bank.W
        self.omega = part.omega
        self.L = self.M * self.omega
        self.seed = int(seed)
        # rows within a channel have disjoint support: A A^* = diag(block sizes)
        self.gram_diag = np.tile(part.sizes.astype(float), self.M)

    def forward(self, X: np.ndarray) -> np.ndarray:
        return demod_forward(X, self.bank, self.part)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return demod_adjoint(y, self.bank, self.part)


class UniversalOp:
    """Arch 3: orthogonal mixer + random filter, then an inner variant."""

    def __init__(self, mixer: Mixer, filt: FilterSpectrum, inner, seed: int):
        if mixer.M != inner.M or filt.W != inner.W:
            raise ValueError("preprocessing dimensions do not match inner operator")
        self.mixer = mixer
        self.filt = filt
        self.inner = inner
        self.M, self.W, self.omega, self.L = inner.M, inner.W, inner.omega, inner.L
        self.seed = int(seed)
        # preprocessing is orthogonal, so the gram diagonal is the inner one
        self.gram_diag = inner.gram_diag
        self.variant = f"universal-{inner.variant}"

    def forward(self, X: np.ndarray) -> np.ndarray:
        return self.inner.forward(preprocess(X, self.mixer, self.filt))

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return preprocess_adjoint(self.inner.adjoint(y), self.mixer, self.filt)


VARIANTS = ("mask", "demodulator", "universal-mask", "universal-demodulator")


def make_operator(variant: str, M: int, W: int, omega: int, seed: int):
    """Build any operator variant from its seed (archives replay through here)."""
    if variant == "mask":
        return EntryMaskOp(gen_sampling_mask(M, W, omega, seed), W, seed)
    if variant == "demodulator":
        return DemodulatorOp(gen_modulator_bank(M, W, seed), block_partition(W, omega), seed)
    if variant.startswith("universal-"):
        inner = make_operator(variant.removeprefix("universal-"), M, W, omega, seed)
        return UniversalOp(gen_mixer(M, seed), gen_filter(W, seed), inner, seed)
    raise ValueError(f"unknown operator variant {variant!r}; expected one of {VARIANTS}")


def measure(op, X: np.ndarray, truth: dict | None = None) -> MeasurementRecord:
    """Apply an operator and package the result for serialization."""
    return MeasurementRecord(
        y=op.forward(X), M=op.M, W=op.W, omega=op.omega,
        variant=op.variant, op_seed=op.seed, truth=truth,
    )


def expectation_identity_check(
    trials: int, M: int, W: int, omega: int, seed: int
) -> float:
    """Monte Carlo check of E[A^* A] = identity for the demodulator.

    Fixes one random X, averages A^*A(X) over fresh modulator draws, and
    returns ||avg - X||_F / ||X||_F (expected to shrink like 1/sqrt(trials)).
    """
    if trials < 1:
        raise ValueError("need trials >= 1")
    part = block_partition(W, omega)
    X = sub_rng(seed, "expectation-ref").standard_normal((M, W))
    acc = np.zeros_like(X)
    for t in range(trials):
        rng = sub_rng(seed, "expectation-draw", t)
        signs = rng.integers(0, 2, size=(M, W)) * 2 - 1
        bank = ModulatorBank(signs=signs, seed=0)
        acc += demod_adjoint(demod_forward(X, bank, part), bank, part)
    return float(np.linalg.norm(acc / trials - X) / np.linalg.norm(X))


def sigma_for_snr(y_clean: np.ndarray, snr_db_target: float) -> float:
    """Noise level hitting a target SNR in expectation: sigma = ||y|| 10^{-SNR/20} / sqrt(L)."""
    y = np.asarray(y_clean, dtype=float)
    scale = float(np.linalg.norm(y))
    if scale == 0.0:
        raise ValueError("SNR is undefined for an all-zero measurement")
    return scale * 10.0 ** (-snr_db_target / 20.0) / np.sqrt(y.size)


def snr_db(X0: np.ndarray, xi: np.ndarray) -> float:
    """Realized SNR, 10 log10(||X0||_F^2 / ||xi||_2^2)."""
    return float(10.0 * np.log10(np.linalg.norm(X0) ** 2 / np.linalg.norm(xi) ** 2))


def add_noise(rec: MeasurementRecord, sigma: float, seed: int) -> MeasurementRecord:
    """Add i.i.d. N(0, sigma^2) noise and attach the ball radius delta.

    delta = sigma * sqrt(L + sqrt(L)) upper-bounds ||xi||_2 with high
    probability (chi-square concentration), which is what the noisy recovery
    program wants for its constraint radius.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return replace(rec, sigma=0.0, delta=0.0, noise_seed=int(seed))
    L = rec.y.size
    xi = sigma * sub_rng(seed, "noise").standard_normal(L)
    delta = sigma * np.sqrt(L + np.sqrt(L))
    return replace(rec, y=rec.y + xi, sigma=float(sigma), delta=float(delta),
                   noise_seed=int(seed))
