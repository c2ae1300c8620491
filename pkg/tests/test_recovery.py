import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensamp.operators import make_operator, measure
from ensamp.recovery import (
    RecoveryResult,
    SolverConfig,
    klt_estimate,
    nuclear_norm,
    oversampling_factor,
    relative_error,
    solve_nuclear_equality,
    solve_nuclear_noisy,
    svt,
)
from ensamp.seeding import sub_rng
from ensamp.signal_model import gen_lowrank_gaussian


def test_svt_diagonal_case():
    Y = np.diag([3.0, 1.0, 0.2])
    out = svt(Y, 0.5)
    assert np.allclose(out, np.diag([2.5, 0.5, 0.0]), atol=1e-12)


def test_svt_kills_everything_beyond_top_singular_value():
    Y = sub_rng(0, "svt-kill").standard_normal((4, 6))
    top = np.linalg.svd(Y, compute_uv=False)[0]
    assert np.allclose(svt(Y, top * 1.0001), 0.0)


def test_svt_reduces_rank():
    X = gen_lowrank_gaussian(6, 9, 3, seed=1)
    s = np.linalg.svd(X, compute_uv=False)
    out = svt(X, (s[1] + s[2]) / 2)
    assert np.linalg.matrix_rank(out, tol=1e-10) == 2


@given(tau=st.floats(0.0, 3.0), seed=st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_svt_is_nonexpansive(tau, seed):
    rng = sub_rng(seed, "nonexp")
    A = rng.standard_normal((5, 7))
    B = rng.standard_normal((5, 7))
    assert np.linalg.norm(svt(A, tau) - svt(B, tau)) <= np.linalg.norm(A - B) + 1e-12
    assert np.allclose(svt(A, 0.0), A, atol=1e-12)


def test_svt_matches_cvxpy_prox():
    cp = pytest.importorskip("cvxpy")
    rng = sub_rng(3, "cvx-prox")
    for t in range(3):
        Y = rng.standard_normal((5, 6))
        tau = 0.7
        X = cp.Variable((5, 6))
        prob = cp.Problem(cp.Minimize(
            0.5 * cp.sum_squares(X - Y) + tau * cp.normNuc(X)))
        prob.solve(solver=cp.SCS, eps=1e-9, max_iters=20000)
        assert np.linalg.norm(X.value - svt(Y, tau)) <= 1e-6 * (1 + np.linalg.norm(Y))


def test_nuclear_norm_and_relative_error():
    X = np.diag([2.0, 1.0])
    assert nuclear_norm(X) == pytest.approx(3.0)
    assert relative_error(X, X) == 0.0
    assert relative_error(np.zeros_like(X), X) == pytest.approx(1.0)


def test_oversampling_factor_formula():
    assert oversampling_factor(32, 40, 2, 128) == pytest.approx(
        32 * 40 / (2 * (128 + 32 - 2)))
    with pytest.raises(ValueError):
        oversampling_factor(4, 2, 0, 8)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(admm_rho=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(delta=-0.5)


def test_klt_estimate_is_thresholded_backprojection():
    op = make_operator("mask", 4, 12, 5, seed=6)
    X0 = gen_lowrank_gaussian(4, 12, 1, seed=6)
    y = op.forward(X0)
    res = klt_estimate(op, y, lam=0.8, X_true=X0)
    assert isinstance(res, RecoveryResult)
    assert np.allclose(res.X_hat, svt(op.adjoint(y), 0.4), atol=1e-12)
    assert res.converged
    assert res.rel_error is not None
    # lam -> 0 degenerates to plain backprojection
    res0 = klt_estimate(op, y, lam=0.0)
    assert np.allclose(res0.X_hat, op.adjoint(y), atol=1e-12)
    assert res0.rel_error is None


def test_klt_estimate_scale_equivariance():
    op = make_operator("demodulator", 3, 16, 4, seed=2)
    y = op.forward(gen_lowrank_gaussian(3, 16, 1, seed=2))
    a = klt_estimate(op, 2.0 * y, lam=1.0).X_hat
    b = 2.0 * klt_estimate(op, y, lam=0.5).X_hat
    assert np.allclose(a, b, atol=1e-12)


# an instance whose nuclear-norm minimizer IS the planted matrix (confirmed
# against an interior-point solve); not every low-dimensional instance is —
# at this scale the program itself has spurious minimizers now and then
EASY = dict(variant="demodulator", M=16, W=32, R=1, omega=24, seed=40)


def _easy_problem():
    X0 = gen_lowrank_gaussian(EASY["M"], EASY["W"], EASY["R"], seed=EASY["seed"])
    op = make_operator(EASY["variant"], EASY["M"], EASY["W"], EASY["omega"],
                       seed=EASY["seed"])
    return X0, op, op.forward(X0)


def test_equality_solver_recovers_easy_instance():
    X0, op, y = _easy_problem()
    cfg = SolverConfig(max_iters=8000, admm_rho=5.0)
    res = solve_nuclear_equality(op, y, cfg, X_true=X0)
    assert res.converged
    assert res.rel_error <= 1e-6
    assert np.linalg.norm(op.forward(res.X_hat) - y) <= 1e-6 * np.linalg.norm(y)
    assert res.objective <= nuclear_norm(X0) * (1 + 1e-6)


def test_equality_solver_scale_equivariance():
    X0, op, y = _easy_problem()
    cfg = SolverConfig(max_iters=3000, admm_rho=5.0)
    a = solve_nuclear_equality(op, 5.0 * y, cfg).X_hat
    b = 5.0 * solve_nuclear_equality(op, y, cfg).X_hat
    assert np.linalg.norm(a - b) <= 1e-10 * np.linalg.norm(b)


def test_equality_solver_zero_measurement():
    _, op, _ = _easy_problem()
    res = solve_nuclear_equality(op, np.zeros(op.L), SolverConfig())
    assert res.converged and res.iters == 0
    assert np.array_equal(res.X_hat, np.zeros((op.M, op.W)))


def test_equality_solver_matches_cvxpy_program():
    cp = pytest.importorskip("cvxpy")
    X0 = gen_lowrank_gaussian(6, 8, 1, seed=14)
    op = make_operator("mask", 6, 8, 6, seed=14)
    y = op.forward(X0)
    res = solve_nuclear_equality(op, y, SolverConfig(max_iters=20000, admm_rho=5.0))

    X = cp.Variable((6, 8))
    rows = np.repeat(np.arange(6), 6)
    cols = op.mask.indices.ravel()
    prob = cp.Problem(cp.Minimize(cp.normNuc(X)), [X[rows, cols] == y])
    prob.solve(solver=cp.SCS, eps=1e-9, max_iters=50000)
    assert res.objective == pytest.approx(prob.value, abs=1e-5)
    assert np.linalg.norm(res.X_hat - X.value) <= 1e-4 * (1 + np.linalg.norm(X.value))


def test_noisy_solver_respects_ball_and_improves_on_zero():
    X0, op, y = _easy_problem()
    rng = sub_rng(5, "noise")
    y_noisy = y + 0.01 * np.linalg.norm(y) / np.sqrt(y.size) * rng.standard_normal(y.size)
    delta = 1.1 * np.linalg.norm(y_noisy - y)
    cfg = SolverConfig(max_iters=8000, admm_rho=5.0, delta=delta)
    res = solve_nuclear_noisy(op, y_noisy, cfg, X_true=X0)
    assert res.converged
    # the consensus iterate sits within solver tolerance of the ball
    assert np.linalg.norm(op.forward(res.X_hat) - y_noisy) <= delta * (1 + 1e-4)
    assert res.rel_error <= 0.05
    assert res.objective <= nuclear_norm(X0) * (1 + 1e-6)


def test_noisy_solver_tiny_delta_matches_equality():
    X0, op, y = _easy_problem()
    eq = solve_nuclear_equality(op, y, SolverConfig(max_iters=12000, admm_rho=5.0))
    nz = solve_nuclear_noisy(op, y, SolverConfig(max_iters=12000, admm_rho=5.0,
                                                 delta=1e-9 * np.linalg.norm(y)))
    assert np.linalg.norm(nz.X_hat - eq.X_hat) <= 1e-4 * np.linalg.norm(eq.X_hat)


def test_noisy_solver_huge_delta_returns_zero():
    _, op, y = _easy_problem()
    res = solve_nuclear_noisy(op, y, SolverConfig(delta=2 * np.linalg.norm(y)))
    assert np.array_equal(res.X_hat, np.zeros((op.M, op.W)))
    assert res.converged and res.objective == 0.0


def test_noisy_solver_zero_radius_degenerates_to_equality():
    X0, op, y = _easy_problem()
    res = solve_nuclear_noisy(op, y, SolverConfig(max_iters=12000, admm_rho=5.0,
                                                  delta=0.0), X_true=X0)
    assert res.converged
    assert res.rel_error <= 1e-5


def test_results_report_iterations_monotone_tolerance():
    # a looser tolerance cannot need more iterations
    X0, op, y = _easy_problem()
    tight = solve_nuclear_equality(op, y, SolverConfig(
        max_iters=8000, admm_rho=5.0, tol_primal=1e-10, tol_dual=1e-10))
    loose = solve_nuclear_equality(op, y, SolverConfig(
        max_iters=8000, admm_rho=5.0, tol_primal=1e-6, tol_dual=1e-6))
    assert loose.iters <= tight.iters
