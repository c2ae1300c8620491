"""Low-rank recovery programs.

Three estimators against any measurement operator ``op`` exposing
``forward``/``adjoint``/``gram_diag`` (the diagonal of A A^*, which is what
makes the per-iteration subproblems exact):

- ``solve_nuclear_equality``: min ||X||_* subject to A(X) = y (ADMM).
- ``solve_nuclear_noisy``: min ||X||_* subject to ||y - A(X)||_2 <= delta
  (ADMM with an extra residual split projected onto the ball).
- ``klt_estimate``: the closed-form minimizer svt(A^*(y), lambda/2) of
  ||X||_F^2 - 2 <y, A(X)> + lambda ||X||_*.

Both ADMM solvers normalize the data to unit ||y||_2 internally and rescale
the result, so solutions are exactly positively homogeneous in y and the
rho/tolerance knobs are scale-free.  rho is fixed per solve (no adaptive
scheme), keeping runs deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SolverConfig",
    "RecoveryResult",
    "svt",
    "nuclear_norm",
    "klt_estimate",
    "solve_nuclear_equality",
    "solve_nuclear_noisy",
    "relative_error",
    "oversampling_factor",
]


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    tol_primal: float = 1e-8
    tol_dual: float = 1e-8
    admm_rho: float = 1.0
    lam: float = 0.0     # KLT / Lasso regularization weight
    delta: float = 0.0   # noise ball radius

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise ValueError("tolerances must be positive")
        if self.admm_rho <= 0:
            raise ValueError("admm_rho must be positive")
        if self.lam < 0 or self.delta < 0:
            raise ValueError("lam and delta must be nonnegative")


@dataclass(frozen=True)
class RecoveryResult:
    X_hat: np.ndarray
    rel_error: float | None
    iters: int
    converged: bool
    objective: float


def nuclear_norm(X: np.ndarray) -> float:
    return float(np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False).sum())


def svt(Y: np.ndarray, tau: float) -> np.ndarray:
    """Singular value soft thresholding: shrink every sigma_i by tau, floor at zero.

    This is the proximal map of tau * nuclear norm; values exactly at the
    threshold shrink to zero.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    U, s, Vt = np.linalg.svd(np.asarray(Y, dtype=float), full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    return (U * s) @ Vt


def relative_error(X_hat: np.ndarray, X0: np.ndarray) -> float:
    """Frobenius ratio ||X_hat - X0||_F / ||X0||_F."""
    X_hat = np.asarray(X_hat, dtype=float)
    X0 = np.asarray(X0, dtype=float)
    if X_hat.shape != X0.shape:
        raise ValueError(f"shape mismatch {X_hat.shape} vs {X0.shape}")
    denom = np.linalg.norm(X0)
    if denom == 0:
        raise ValueError("relative error undefined for zero ground truth")
    return float(np.linalg.norm(X_hat - X0) / denom)


def oversampling_factor(M: int, omega: int, R: int, W: int) -> float:
    """eta = M Omega / (R (W + M - R)): total samples over degrees of freedom."""
    if R < 1:
        raise ValueError("rank must be >= 1")
    if R >= W + M:
        raise ValueError("rank exceeds the degrees-of-freedom denominator")
    return M * omega / (R * (W + M - R))


def _result(Z, scale, it, conv, X_true):
    X_hat = Z * scale
    rel = None if X_true is None else relative_error(X_hat, X_true)
    return RecoveryResult(X_hat=X_hat, rel_error=rel, iters=it, converged=conv,
                          objective=nuclear_norm(X_hat))


def klt_estimate(op, y: np.ndarray, lam: float, X_true: np.ndarray | None = None) -> RecoveryResult:
    """Closed-form estimator svt(A^*(y), lambda/2).

    Minimizes ||X||_F^2 - 2 <y, A(X)> + lambda ||X||_*: completing the
    square gives ||X - A^*(y)||_F^2 + lambda ||X||_* up to a constant, whose
    minimizer is the nuclear prox of A^*(y) at threshold lambda/2.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    X_hat = svt(op.adjoint(np.asarray(y, dtype=float)), lam / 2.0)
    rel = None if X_true is None else relative_error(X_hat, X_true)
    return RecoveryResult(X_hat=X_hat, rel_error=rel, iters=0, converged=True,
                          objective=nuclear_norm(X_hat))


def solve_nuclear_equality(
    op, y: np.ndarray, cfg: SolverConfig | None = None,
    X_true: np.ndarray | None = None,
) -> RecoveryResult:
    """min ||X||_* subject to A(X) = y, by ADMM on the splitting X = Z.

    The X-update projects Z - U onto the affine constraint set; because
    A A^* = diag(gram_diag) this projection is exact:
    X = V + A^*((y - A(V)) / gram).  The Z-update is one SVT, and the
    iteration stops when the relative splitting residual ||X - Z||_F and
    the relative dual residual rho ||Z_k - Z_{k-1}||_F both drop below the
    configured tolerances.  Returns the final Z.
    """
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=float)
    shape = (op.M, op.W)
    scale = float(np.linalg.norm(y))
    if scale == 0.0:
        return _result(np.zeros(shape), 1.0, 0, True, X_true)
    yn = y / scale
    gram = op.gram_diag
    rho = cfg.admm_rho
    Z = np.zeros(shape)
    U = np.zeros(shape)
    conv = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        V = Z - U
        X = V + op.adjoint((yn - op.forward(V)) / gram)
        Z_new = svt(X + U, 1.0 / rho)
        dual = rho * np.linalg.norm(Z_new - Z) / max(np.linalg.norm(Z_new), 1.0)
        Z = Z_new
        U = U + X - Z
        primal = np.linalg.norm(X - Z) / max(np.linalg.norm(Z), 1.0)
        if primal <= cfg.tol_primal and dual <= cfg.tol_dual:
            conv = True
            break
    return _result(Z, scale, it, conv, X_true)


def solve_nuclear_noisy(
    op, y: np.ndarray, cfg: SolverConfig,
    X_true: np.ndarray | None = None,
) -> RecoveryResult:
    """min ||X||_* subject to ||y - A(X)||_2 <= delta.

    ADMM with two splits, Z = X (nuclear prox) and v = A(X) (projection of
    y - v onto the delta-ball, i.e. v onto the ball around y).  The X-update
    solves (I + A^*A) X = (Z - U1) + A^*(v - U2) exactly via the Woodbury
    identity with A A^* = diag(gram_diag).  delta = 0 degenerates to the
    equality program; delta >= ||y||_2 admits the zero matrix, returned
    immediately.
    """
    y = np.asarray(y, dtype=float)
    shape = (op.M, op.W)
    scale = float(np.linalg.norm(y))
    if cfg.delta < 0:
        raise ValueError("delta must be nonnegative")
    if scale == 0.0 or cfg.delta >= scale:
        # zero is feasible and no matrix has smaller nuclear norm
        return _result(np.zeros(shape), 1.0, 0, True, X_true)
    yn = y / scale
    dn = cfg.delta / scale
    gram = op.gram_diag
    rho = cfg.admm_rho
    Z = np.zeros(shape)
    v = yn.copy()
    U1 = np.zeros(shape)
    U2 = np.zeros(y.size)
    conv = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        rhs = (Z - U1) + op.adjoint(v - U2)
        X = rhs - op.adjoint(op.forward(rhs) / (1.0 + gram))
        AX = op.forward(X)
        Z_new = svt(X + U1, 1.0 / rho)
        w = AX + U2
        r = w - yn
        nr = np.linalg.norm(r)
        v_new = yn + r * (dn / nr) if nr > dn else w
        dual = rho * np.hypot(np.linalg.norm(Z_new - Z), np.linalg.norm(v_new - v)) \
            / max(np.hypot(np.linalg.norm(Z_new), np.linalg.norm(v_new)), 1.0)
        Z, v = Z_new, v_new
        U1 = U1 + X - Z
        U2 = U2 + AX - v
        primal = np.hypot(np.linalg.norm(X - Z), np.linalg.norm(AX - v)) \
            / max(np.hypot(np.linalg.norm(X), np.linalg.norm(AX)), 1.0)
        if primal <= cfg.tol_primal and dual <= cfg.tol_dual:
            conv = True
            break
    return _result(Z, scale, it, conv, X_true)
