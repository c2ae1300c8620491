"""Diversification components: modulators, random filters, mixers, integrator gains.

These are the "analog" randomizers applied before sampling: per-channel
Rademacher modulator banks, a random unit-modulus circulant filter, a Haar
orthogonal channel mixer, and the diagonal low-pass gain model of an
integrate-and-dump front end.  All generators are pure functions of their
seed (see :mod:`ensamp.seeding`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeding import sub_rng

__all__ = [
    "ModulatorBank",
    "FilterSpectrum",
    "Mixer",
    "LowpassGains",
    "gen_modulator_bank",
    "gen_filter",
    "apply_filter",
    "gen_mixer",
    "preprocess",
    "preprocess_adjoint",
    "lowpass_gains",
    "apply_integrator_model",
]


@dataclass(frozen=True)
class ModulatorBank:
    """M independent +-1 chipping sequences of length W, one per channel."""

    signs: np.ndarray
    seed: int

    @property
    def M(self) -> int:
        return self.signs.shape[0]

    @property
    def W(self) -> int:
        return self.signs.shape[1]


@dataclass(frozen=True)
class FilterSpectrum:
    """Unit-modulus, conjugate-symmetric frequency response of a real circulant filter."""

    gains: np.ndarray  # length W complex, DFT ordering
    seed: int

    @property
    def W(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class Mixer:
    """Haar-distributed M x M real orthogonal channel combiner."""

    A: np.ndarray
    seed: int

    @property
    def M(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class LowpassGains:
    """Diagonal integrator gains L[w] in DFT ordering; always invertible."""

    L: np.ndarray
    condition: float = field(default=float("nan"))

    @property
    def W(self) -> int:
        return self.L.size


def gen_modulator_bank(M: int, W: int, seed: int) -> ModulatorBank:
    """Draw an M x W bank of i.i.d. Rademacher signs.

    Channel m uses its own sub-seed derived from (seed, m), so any single
    channel's sequence can be regenerated without the others.
    """
    if M < 1 or W < 1:
        raise ValueError("need M, W >= 1")
    rows = [sub_rng(seed, "modulator", m).integers(0, 2, size=W) * 2 - 1 for m in range(M)]
    return ModulatorBank(signs=np.array(rows, dtype=np.int64), seed=int(seed))


def gen_filter(W: int, seed: int) -> FilterSpectrum:
    """Random all-pass filter: unit-modulus spectrum with real impulse response.

    For odd W the spectrum is a random sign at DC and independent uniform
    phases on the half band, mirrored conjugately.  Even W additionally pins
    a random sign at the Nyquist bin (both self-conjugate bins must be real).
    """
    if W < 2:
        raise ValueError("need W >= 2")
    rng = sub_rng(seed, "filter")
    gains = np.zeros(W, dtype=complex)
    gains[0] = 2.0 * rng.integers(0, 2) - 1.0
    half = (W - 1) // 2 if W % 2 else W // 2 - 1
    if W % 2 == 0:
        gains[W // 2] = 2.0 * rng.integers(0, 2) - 1.0
    theta = rng.uniform(0.0, 2.0 * np.pi, size=half)
    gains[1 : half + 1] = np.exp(1j * theta)
    gains[W - half :] = np.conj(gains[1 : half + 1][::-1])
    return FilterSpectrum(gains=gains, seed=int(seed))


def apply_filter(X: np.ndarray, h: FilterSpectrum) -> np.ndarray:
    """Circularly convolve every row of X with the filter.

    Computed in the frequency domain: DFT each row, multiply by the gains,
    inverse DFT.  The filter matrix H = F^H diag(gains) F is real orthogonal
    (unit-modulus symmetric spectrum), so row norms are preserved.
    """
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != h.W:
        raise ValueError(f"filter length {h.W} does not match row length {X.shape}")
    return np.fft.ifft(np.fft.fft(X, axis=1) * h.gains, axis=1).real


def gen_mixer(M: int, seed: int) -> Mixer:
    """Haar orthogonal matrix via QR of a Gaussian matrix.

    The QR factor is sign-corrected (column q_i multiplied by sign(r_ii)) to
    make the distribution exactly Haar rather than QR-convention dependent.
    """
    if M < 1:
        raise ValueError("need M >= 1")
    rng = sub_rng(seed, "mixer")
    G = rng.standard_normal((M, M))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Mixer(A=Q * signs, seed=int(seed))


def preprocess(X: np.ndarray, A: Mixer, h: FilterSpectrum) -> np.ndarray:
    """Universal diversification X_p = A X H^T.

    Both factors are orthogonal, so the singular values (hence the rank) of
    X are preserved exactly; the energy of any input spreads across all
    channels and time bins with high probability.
    """
    if A.M != np.shape(X)[0]:
        raise ValueError("mixer size does not match channel count")
    return A.A @ apply_filter(X, h)


def preprocess_adjoint(Z: np.ndarray, A: Mixer, h: FilterSpectrum) -> np.ndarray:
    """Adjoint (= inverse) of :func:`preprocess`: A^T Z H."""
    if A.M != np.shape(Z)[0]:
        raise ValueError("mixer size does not match channel count")
    conj = FilterSpectrum(gains=np.conj(h.gains), seed=h.seed)
    return A.A.T @ apply_filter(Z, conj)


def lowpass_gains(W: int) -> LowpassGains:
    """Integrator gain diagonal L[w] = (e^{j2pi w/W} - 1) / (j2pi w), L[0] = 1/W.

    Evaluated on the symmetric window w in {-B..B} (W = 2B+1) and stored in
    DFT ordering [0..B, -B..-1].  |L[w]| = |sin(pi w / W)| / (pi |w|) for
    w != 0, so the diagonal is well-conditioned: max|L|/min|L| < pi/2 + o(1).
    """
    if W < 1 or W % 2 == 0:
        raise ValueError(f"integrator model needs odd W, got {W}")
    w = np.fft.fftfreq(W, d=1.0 / W).round().astype(int)  # [0..B, -B..-1]
    L = np.empty(W, dtype=complex)
    L[0] = 1.0 / W
    nz = w != 0
    L[nz] = (np.exp(2j * np.pi * w[nz] / W) - 1.0) / (2j * np.pi * w[nz])
    mods = np.abs(L)
    return LowpassGains(L=L, condition=float(mods.max() / mods.min()))


def apply_integrator_model(C: np.ndarray) -> np.ndarray:
    """Integrate-and-dump samples X0 of a bandlimited ensemble.

    Scales the Fourier coefficients by the integrator gains and synthesizes:
    X0 = synth_from_fourier(C * L).  L is invertible, so rank(X0) equals the
    rank of C, and the coefficients are recovered exactly by the forward
    (analysis) DFT followed by entrywise division by L.
    """
    from .signal_model import synth_from_fourier

    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or C.shape[1] % 2 == 0:
        raise ValueError("coefficient matrix must be M x W with odd W")
    return synth_from_fourier(C * lowpass_gains(C.shape[1]).L)
