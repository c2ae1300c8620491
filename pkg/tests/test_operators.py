import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensamp.diversify import preprocess
from ensamp.operators import (
    VARIANTS,
    add_noise,
    block_partition,
    expectation_identity_check,
    gen_sampling_mask,
    make_operator,
    measure,
    sigma_for_snr,
    snr_db,
)
from ensamp.seeding import sub_rng


def test_block_partition_uniform():
    part = block_partition(12, 4)
    assert list(part.edges) == [0, 3, 6, 9, 12]
    assert part.uniform and part.block_size == 3
    assert list(part.sizes) == [3, 3, 3, 3]


def test_block_partition_near_uniform():
    part = block_partition(128, 40)
    assert not part.uniform
    assert part.sizes.sum() == 128
    assert set(part.sizes) == {3, 4}
    assert np.all(np.diff(part.edges) >= 1)
    with pytest.raises(ValueError):
        part.block_size  # undefined when blocks are ragged


def test_block_partition_validates():
    with pytest.raises(ValueError):
        block_partition(8, 0)
    with pytest.raises(ValueError):
        block_partition(8, 9)


def test_sampling_mask_shape_and_determinism():
    mask = gen_sampling_mask(5, 30, 7, seed=3)
    assert mask.indices.shape == (5, 7)
    for row in mask.indices:
        assert len(set(row.tolist())) == 7
        assert np.all(np.diff(row) > 0)
        assert row.min() >= 0 and row.max() < 30
    assert np.array_equal(mask.indices, gen_sampling_mask(5, 30, 7, seed=3).indices)


def test_mask_forward_hand_case():
    op = make_operator("mask", 2, 4, 2, seed=12)
    X = np.arange(8, dtype=float).reshape(2, 4)
    idx = op.mask.indices
    y = op.forward(X)
    assert np.array_equal(y, np.array([X[0, idx[0, 0]], X[0, idx[0, 1]],
                                       X[1, idx[1, 0]], X[1, idx[1, 1]]]))
    back = op.adjoint(y)
    assert np.count_nonzero(back) == len(set(idx[0])) + len(set(idx[1]))
    assert back[0, idx[0, 0]] == X[0, idx[0, 0]]


def test_demodulator_hand_case():
    # handmade bank so the expected values can be written down exactly
    from ensamp.diversify import ModulatorBank
    from ensamp.operators import DemodulatorOp

    signs = np.array([[1, -1, 1, 1]])
    op = DemodulatorOp(bank=ModulatorBank(signs=signs, seed=0),
                       part=block_partition(4, 2), seed=0)
    X = np.array([[1.0, 2.0, 3.0, 4.0]])
    assert np.array_equal(op.forward(X), np.array([1.0 - 2.0, 3.0 + 4.0]))
    assert np.array_equal(op.adjoint(np.array([1.0, 2.0])),
                          np.array([[1.0, -1.0, 2.0, 2.0]]))


@pytest.mark.parametrize("variant", VARIANTS)
def test_adjoint_identity(variant):
    op = make_operator(variant, 5, 24, 6, seed=9)
    rng = sub_rng(9, "adjoint", variant)
    for _ in range(25):
        X = rng.standard_normal((5, 24))
        y = rng.standard_normal(op.L)
        lhs = float(np.dot(op.forward(X), y))
        rhs = float(np.sum(X * op.adjoint(y)))
        assert abs(lhs - rhs) <= 1e-12 * np.linalg.norm(X) * np.linalg.norm(y)


def _dense(op):
    cols = []
    for i in range(op.M * op.W):
        e = np.zeros(op.M * op.W)
        e[i] = 1.0
        cols.append(op.forward(e.reshape(op.M, op.W)))
    return np.array(cols).T


@pytest.mark.parametrize("variant", VARIANTS)
def test_gram_diag_matches_dense_operator(variant):
    op = make_operator(variant, 3, 12, 4, seed=5)
    G = _dense(op)
    assert np.allclose(np.diag(G @ G.T), op.gram_diag, atol=1e-10)
    # AA* is diagonal for every variant - the solvers rely on this
    assert np.linalg.norm(G @ G.T - np.diag(op.gram_diag)) <= 1e-10


def test_mask_gram_is_identity():
    op = make_operator("mask", 4, 10, 3, seed=1)
    assert np.array_equal(op.gram_diag, np.ones(12))


def test_demodulator_norm_is_sqrt_compression():
    for W, omega in ((4, 2), (16, 4)):
        op = make_operator("demodulator", 3, W, omega, seed=2)
        top = np.linalg.svd(_dense(op), compute_uv=False)[0]
        assert top == pytest.approx(np.sqrt(W / omega), abs=1e-10)


def test_universal_norm_matches_inner():
    # the orthogonal front end cannot change singular values
    op = make_operator("universal-demodulator", 3, 16, 4, seed=2)
    top = np.linalg.svd(_dense(op), compute_uv=False)[0]
    assert top == pytest.approx(np.sqrt(16 / 4), abs=1e-10)


def test_universal_is_composition():
    op = make_operator("universal-mask", 4, 18, 5, seed=33)
    rng = sub_rng(33, "compose")
    X = rng.standard_normal((4, 18))
    direct = op.forward(X)
    via = op.inner.forward(preprocess(X, op.mixer, op.filt))
    assert np.allclose(direct, via, atol=1e-12)
    assert op.variant == "universal-mask"


def test_expectation_identity_converges():
    dev = expectation_identity_check(3000, 4, 16, 4, seed=0)
    assert dev <= 0.10
    assert expectation_identity_check(3000, 4, 16, 4, seed=0) == dev


@given(M=st.integers(1, 5), omega=st.integers(1, 8), seed=st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_adjoint_identity_property(M, omega, seed):
    W = 16
    op = make_operator("demodulator", M, W, omega, seed=seed)
    rng = sub_rng(seed, "prop")
    X = rng.standard_normal((M, W))
    y = rng.standard_normal(op.L)
    lhs = float(np.dot(op.forward(X), y))
    rhs = float(np.sum(X * op.adjoint(y)))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(X) * np.linalg.norm(y))


def test_make_operator_validates():
    with pytest.raises(ValueError):
        make_operator("nope", 2, 8, 2, seed=0)
    with pytest.raises(ValueError):
        make_operator("mask", 2, 8, 9, seed=0)


def test_measure_record_and_noise():
    op = make_operator("demodulator", 3, 16, 4, seed=7)
    rng = sub_rng(7, "meas")
    X0 = rng.standard_normal((3, 16))
    rec = measure(op, X0, truth={"kind": "dense", "seed": 1})
    assert rec.L == 12 and rec.variant == "demodulator" and rec.op_seed == 7
    assert rec.sigma == 0.0 and rec.delta == 0.0
    noisy = add_noise(rec, sigma=0.1, seed=99)
    assert noisy.sigma == 0.1
    assert noisy.delta == pytest.approx(0.1 * np.sqrt(12 + np.sqrt(12)))
    assert not np.array_equal(noisy.y, rec.y)
    assert np.array_equal(add_noise(rec, 0.0, seed=99).y, rec.y)


def test_sigma_for_snr_hits_target_on_average():
    op = make_operator("mask", 4, 32, 8, seed=11)
    rng = sub_rng(11, "snr")
    X0 = rng.standard_normal((4, 32))
    y = op.forward(X0)
    target = 25.0
    sigma = sigma_for_snr(y, target)
    realized = []
    for t in range(400):
        xi = sigma * sub_rng(t, "xi").standard_normal(y.size)
        realized.append(snr_db(y.reshape(4, -1), xi))
    assert np.mean(realized) == pytest.approx(target, abs=0.5)


def test_sigma_for_snr_rejects_zero_signal():
    with pytest.raises(ValueError):
        sigma_for_snr(np.zeros(4), 20.0)
