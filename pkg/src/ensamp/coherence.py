"""Coherence statistics of low-rank ensembles.

The recovery guarantees are governed by how concentrated the singular
subspaces of the target matrix are on single channels, time bins, or
integration blocks.  With X = U diag(S) V^T of rank R and E = U V^T:

    mu1^2 = (M / R)       * max_i ||U^T e_i||^2         (channel spikiness)
    mu2^2 = (W / R)       * max_j ||V^T e_j||^2         (time spikiness)
    mu3^2 = (M Omega / R) * max_{i,j} sum_{k in B_j} E[i, k]^2
    mu0^2 = max(mu1^2, mu2^2, (M W / R) * max |E|^2)

All are >= 1, with maxima M/R, W/R, and MW/R reached by perfectly spiky
subspaces.  mu3 needs a uniform block partition and is omitted otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diversify import apply_filter, gen_filter, gen_mixer
from .operators import block_partition
from .seeding import seed_to_int
from .signal_model import factorize

__all__ = ["CoherenceReport", "compute_coherences", "lemma_check"]


@dataclass(frozen=True)
class CoherenceReport:
    mu0_sq: float
    mu1_sq: float
    mu2_sq: float
    mu3_sq: float | None
    R: int
    omega: int | None


def compute_coherences(
    X: np.ndarray, omega: int | None = None, rank_tol: float = 1e-8
) -> CoherenceReport:
    """Coherences of X at its numerical rank (singular values >= rank_tol * sigma_1).

    ``omega`` selects the block rate for mu3; it must divide W (otherwise
    mu3 is reported as None, since the block coherence is only defined for
    uniform partitions).
    """
    X = np.asarray(X, dtype=float)
    if not np.any(X):
        raise ValueError("coherence of the zero matrix is undefined")
    M, W = X.shape
    f = factorize(X, rank_tol)
    R = f.rank
    E = f.U @ f.V.T
    mu1_sq = (M / R) * float(np.max(np.sum(f.U**2, axis=1)))
    mu2_sq = (W / R) * float(np.max(np.sum(f.V**2, axis=1)))
    mu0_sq = max(mu1_sq, mu2_sq, (M * W / R) * float(np.max(E**2)))
    mu3_sq = None
    if omega is not None and W % omega == 0:
        part = block_partition(W, omega)
        blocks = np.add.reduceat(E**2, part.edges[:-1], axis=1)
        mu3_sq = (M * omega / R) * float(np.max(blocks))
    return CoherenceReport(
        mu0_sq=mu0_sq, mu1_sq=mu1_sq, mu2_sq=mu2_sq, mu3_sq=mu3_sq,
        R=R, omega=omega,
    )


def lemma_check(
    U_spiky: np.ndarray,
    V_spiky: np.ndarray,
    draws: int,
    seed: int,
    omega: int | None = None,
    C: float = 10.0,
    identity_debug: bool = False,
) -> dict[str, float]:
    """Empirical check that diversification flattens arbitrary subspaces.

    For each draw a Haar mixer A and a random all-pass filter H are applied
    to the (deliberately spiky) orthonormal inputs, U_p = A U and V_p = H V,
    and four incoherence bounds are tested with constant ``C``:

    1. max_i ||U_p^T e_i||^2            <= C max(R, log M) / M
    2. max_j ||V_p^T e_j||^2            <= C max(R, log W) / W
    3. max (U_p V_p^T)_{ij}^2           <= C log W max(R, log M) / (M W)
    4. max_{i,j} block sum of (3)       <= C log W max(R, log M) / (M Omega)

    Returns the empirical pass fraction per bound.  ``identity_debug``
    replaces A and H by identities — with spiky inputs the bounds then fail,
    confirming the check has teeth.
    """
    U = np.asarray(U_spiky, dtype=float)
    V = np.asarray(V_spiky, dtype=float)
    if draws < 1:
        raise ValueError("need draws >= 1")
    for Q, name in ((U, "U"), (V, "V")):
        if np.linalg.norm(Q.T @ Q - np.eye(Q.shape[1])) > 1e-10:
            raise ValueError(f"{name} does not have orthonormal columns")
    M, R = U.shape
    W = V.shape[0]
    if omega is None:
        omega = max(W // 4, 1)
    if W % omega != 0:
        raise ValueError(f"Omega={omega} must divide W={W} for the block bound")
    edges = block_partition(W, omega).edges
    logM, logW = np.log(M), np.log(W)
    bounds = np.array([
        C * max(R, logM) / M,
        C * max(R, logW) / W,
        C * logW * max(R, logM) / (M * W),
        C * logW * max(R, logM) / (M * omega),
    ])
    passes = np.zeros(4, dtype=int)
    for t in range(draws):
        if identity_debug:
            Up, Vp = U, V
        else:
            draw_seed = seed_to_int(seed, "lemma-draw", t)
            Up = gen_mixer(M, draw_seed).A @ U
            # H V computed column-wise: apply_filter acts on rows
            Vp = apply_filter(V.T, gen_filter(W, draw_seed)).T
        E = Up @ Vp.T
        stats = np.array([
            np.max(np.sum(Up**2, axis=1)),
            np.max(np.sum(Vp**2, axis=1)),
            np.max(E**2),
            np.max(np.add.reduceat(E**2, edges[:-1], axis=1)),
        ])
        passes += stats <= bounds
    frac = passes / draws
    return {"u_rows": float(frac[0]), "v_rows": float(frac[1]),
            "entry": float(frac[2]), "block": float(frac[3])}
