"""Correlated signal ensembles and their spectral structure.

An ensemble is an M x W real matrix X: rows are channels, columns are
Nyquist-grid time samples.  Bandlimited ensembles are synthesized from an
M x W complex Fourier-coefficient matrix C whose columns follow the DFT
frequency ordering [0, 1, ..., B, -B, ..., -1] (W = 2B + 1 odd) and satisfy
the conjugate symmetry C[:, W - w] = conj(C[:, w]) that makes the time
signals real.  Plain ndarrays are used for both objects; structured results
carry dataclasses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import sub_rng

SPEED_OF_LIGHT = 299792458.0

__all__ = [
    "SPEED_OF_LIGHT",
    "LowRankFactors",
    "SteeringVector",
    "synth_from_fourier",
    "fourier_from_samples",
    "random_symmetric_coeffs",
    "gen_lowrank_gaussian",
    "gen_correlated_bandlimited",
    "steering",
    "build_Raa",
    "effective_rank",
    "whiten_known",
    "factorize",
]


@dataclass(frozen=True)
class LowRankFactors:
    """Compact SVD X = U diag(S) V^T truncated at the numerical rank."""

    U: np.ndarray  # M x R, orthonormal columns
    S: np.ndarray  # length R, positive, nonincreasing
    V: np.ndarray  # W x R, orthonormal columns

    @property
    def rank(self) -> int:
        return self.S.size


@dataclass(frozen=True)
class SteeringVector:
    """Narrowband array response at one (angle, frequency) pair."""

    a: np.ndarray          # length M, complex, unit modulus
    theta: float           # arrival angle, radians
    f: float               # frequency, Hz
    positions: np.ndarray  # element offsets from array center, meters


def _check_symmetry(C: np.ndarray) -> None:
    W = C.shape[1]
    w = np.arange(1, W)
    resid = np.abs(C[:, W - w] - np.conj(C[:, w])).max(initial=0.0)
    resid = max(resid, np.abs(C[:, 0].imag).max(initial=0.0))
    if resid > 1e-8 * max(np.linalg.norm(C), 1e-300):
        raise ValueError(
            "Fourier coefficients violate conjugate symmetry "
            f"(residue {resid:.3e}); synthesized signal would not be real"
        )


def synth_from_fourier(coeffs: np.ndarray) -> np.ndarray:
    """Synthesize time samples X = C F^H from Fourier coefficients.

    F is the unitary DFT matrix, so X[m, n] = (1/sqrt(W)) * sum_k
    C[m, k] exp(j 2 pi k n / W) over the symmetric window k in {-B..B},
    and ||X||_F = ||C||_F.

    Parameters
    ----------
    coeffs : (M, W) complex ndarray
        Columns in DFT frequency order [0..B, -B..-1]; must be
        conjugate-symmetric (real signals).  W must be odd.

    Returns
    -------
    (M, W) real ndarray
    """
    C = np.asarray(coeffs, dtype=complex)
    if C.ndim != 2:
        raise ValueError("coefficient matrix must be 2-D")
    W = C.shape[1]
    if W % 2 == 0:
        raise ValueError(f"Fourier synthesis needs odd W = 2B+1, got W={W}")
    _check_symmetry(C)
    X = np.fft.ifft(C, axis=1) * np.sqrt(W)
    return X.real


def fourier_from_samples(samples: np.ndarray) -> np.ndarray:
    """Exact inverse of :func:`synth_from_fourier` (unitary analysis DFT)."""
    X = np.asarray(samples, dtype=float)
    return np.fft.fft(X, axis=1) / np.sqrt(X.shape[1])


def random_symmetric_coeffs(rows: int, B: int, rng: np.random.Generator) -> np.ndarray:
    """Draw rows of conjugate-symmetric Gaussian Fourier coefficients.

    DC is real N(0,1); each positive frequency gets an independent
    complex Gaussian with unit total variance; negative frequencies mirror.
    """
    W = 2 * B + 1
    C = np.zeros((rows, W), dtype=complex)
    C[:, 0] = rng.standard_normal(rows)
    if B > 0:
        z = (rng.standard_normal((rows, B)) + 1j * rng.standard_normal((rows, B))) / np.sqrt(2)
        C[:, 1 : B + 1] = z
        C[:, B + 1 :] = np.conj(z[:, ::-1])
    return C


def gen_lowrank_gaussian(M: int, W: int, R: int, seed: int) -> np.ndarray:
    """Rank-R ensemble X = G1 @ G2 with i.i.d. standard normal factors.

    Parameters
    ----------
    M, W : int
        Channel count and samples per channel (any parity).
    R : int
        Target rank, 1 <= R <= min(M, W).
    seed : int
        Deterministic; the same seed reproduces the matrix bit-exactly.
    """
    if not (1 <= R <= min(M, W)):
        raise ValueError(f"rank R={R} out of range [1, {min(M, W)}]")
    rng = sub_rng(seed, "lowrank-gaussian")
    G1 = rng.standard_normal((M, R))
    G2 = rng.standard_normal((R, W))
    return G1 @ G2


def gen_correlated_bandlimited(
    mixing: np.ndarray, R: int, B: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Correlated bandlimited ensemble: latent signals mixed across channels.

    Draws R latent rows of random symmetric Fourier coefficients at
    bandwidth B (W = 2B + 1), mixes them through the given M x R matrix,
    and synthesizes time samples.  The result has rank <= R.

    Returns
    -------
    (X, C) : ((M, W) real ndarray, (M, W) complex ndarray)
        Time samples and the mixed coefficient matrix.
    """
    mixing = np.asarray(mixing, dtype=float)
    if mixing.ndim != 2 or mixing.shape[1] != R:
        raise ValueError(f"mixing matrix must be M x {R}, got {mixing.shape}")
    rng = sub_rng(seed, "bandlimited-latent")
    latent = random_symmetric_coeffs(R, B, rng)
    C = mixing @ latent
    return synth_from_fourier(C), C


def steering(theta: float, f: float, M: int, half_wavelength_spacing_at: float) -> SteeringVector:
    """Steering vector of a centered uniform linear array.

    Elements sit at d_m = (m - (M+1)/2) * c / (2 f_c) for m = 1..M, i.e.
    spaced half a wavelength of the carrier ``half_wavelength_spacing_at``
    and centered on the array midpoint.  Entry m is
    exp(-j 2 pi f d_m sin(theta) / c).
    """
    f_c = half_wavelength_spacing_at
    m = np.arange(1, M + 1)
    d = (m - (M + 1) / 2) * SPEED_OF_LIGHT / (2 * f_c)
    a = np.exp(-2j * np.pi * f * d * np.sin(theta) / SPEED_OF_LIGHT)
    return SteeringVector(a=a, theta=float(theta), f=float(f), positions=d)


def build_Raa(
    theta: float, f_c: float, bandwidth: float, M: int, quad_points: int = 512
) -> np.ndarray:
    """Band-integrated steering covariance R_aa = int a(theta, f) a^H df.

    Midpoint-rule quadrature over [f_c - bandwidth/2, f_c + bandwidth/2];
    the rule is a sum of outer products, so the output is Hermitian PSD by
    construction and its diagonal equals the bandwidth exactly.
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if quad_points < 64:
        raise ValueError("need at least 64 quadrature points")
    df = bandwidth / quad_points
    freqs = f_c - bandwidth / 2 + (np.arange(quad_points) + 0.5) * df
    A = np.stack([steering(theta, f, M, f_c).a for f in freqs])
    return (A.conj().T @ A) * df


def effective_rank(eigs, ratio: float) -> int:
    """Count of eigenvalues within ``ratio`` of the largest.

    ``eigs`` must be nonincreasing and nonnegative; returns
    #{i : eigs[i] >= eigs[0] / ratio}.
    """
    e = np.asarray(eigs, dtype=float)
    if e.size == 0:
        raise ValueError("empty eigenvalue list")
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    return int(np.count_nonzero(e >= e[0] / ratio))


def whiten_known(U: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project an ensemble onto a known R-dimensional channel subspace.

    Returns (Y, X_hat) with Y = U^T X (R x W whitened ensemble) and
    X_hat = U Y.  When the column space of X lies in span(U), X_hat
    reproduces X exactly; otherwise X_hat is the orthogonal projection.
    """
    U = np.asarray(U, dtype=float)
    gram_err = np.linalg.norm(U.T @ U - np.eye(U.shape[1]))
    if gram_err > 1e-10:
        raise ValueError(f"U columns not orthonormal (||U^T U - I|| = {gram_err:.3e})")
    if U.shape[0] != X.shape[0]:
        raise ValueError("U and X channel counts differ")
    Y = U.T @ X
    return Y, U @ Y


def factorize(X: np.ndarray, rank_tol: float = 1e-8) -> LowRankFactors:
    """Compact SVD truncated at singular values >= rank_tol * sigma_1."""
    U, s, Vt = np.linalg.svd(np.asarray(X, dtype=float), full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise ValueError("zero matrix has no low-rank factorization")
    R = int(np.count_nonzero(s >= rank_tol * s[0]))
    return LowRankFactors(U=U[:, :R], S=s[:R], V=Vt[:R].T)
