import numpy as np
import pytest

from clipopt import RngStream, TrialAbort, gaussian_noise, make_toy
from clipopt.core import ensure_finite

SEED = 1234


def test_identical_streams_reproduce_bit_exactly():
    a = RngStream(SEED, 77).generator().standard_normal(1000)
    b = RngStream(SEED, 77).generator().standard_normal(1000)
    assert np.array_equal(a, b)


def test_distinct_streams_differ_and_children_are_stable():
    root = RngStream(SEED)
    a = root.child(0)
    b = root.child(1)
    assert a.stream_id != b.stream_id
    assert root.child(0) == a  # derivation is a pure function
    xa = a.generator().standard_normal(500)
    xb = b.generator().standard_normal(500)
    assert abs(np.corrcoef(xa, xb)[0, 1]) < 0.15


def test_distinct_stream_draws_are_statistically_independent():
    # mean of products of paired draws from 200 child streams ~ 0
    root = RngStream(SEED)
    prods = []
    for i in range(200):
        x = root.child(i).generator().standard_normal(100)
        y = root.child(i + 1000).generator().standard_normal(100)
        prods.append(float(x @ y) / 100)
    assert abs(np.mean(prods)) < 4 / np.sqrt(200 * 100)


def test_minibatch_m1_equals_single_sample():
    toy = make_toy(6, gaussian_noise(6))
    x = np.arange(6, dtype=float)
    g1 = toy.sample_gradient(x, RngStream(SEED, 5))
    g2 = toy.minibatch_gradient(x, 1, RngStream(SEED, 5))
    assert np.array_equal(g1, g2)


def test_minibatch_zero_noise_returns_full_gradient():
    toy = make_toy(5)
    x = np.linspace(-1, 1, 5)
    for m in (1, 3, 17):
        assert np.array_equal(toy.minibatch_gradient(x, m, RngStream(0)), x)


def test_minibatch_rejects_m_zero():
    toy = make_toy(3, gaussian_noise(3))
    with pytest.raises(ValueError):
        toy.minibatch_gradient(np.zeros(3), 0, RngStream(0))


def test_sampled_gradient_unbiased():
    # ||mean of 1e5 draws - grad f|| <= 5 sigma sqrt(n / 1e5)
    n, draws = 16, 100_000
    toy = make_toy(n, gaussian_noise(n))
    x = np.ones(n)
    gen = RngStream(SEED, 9).generator()
    mean = toy._draw_gradients(x, draws, gen).mean(axis=0)
    err = np.linalg.norm(mean - toy.full_gradient(x))
    assert err <= 5 * np.sqrt(toy.variance_bound) * np.sqrt(n / draws)


def test_sampled_gradient_variance_contract():
    # empirical E||g - grad f||^2 <= 1.1 sigma^2 over 1e5 draws
    n, draws = 16, 100_000
    toy = make_toy(n, gaussian_noise(n))
    x = np.zeros(n)
    gen = RngStream(SEED, 10).generator()
    dev = toy._draw_gradients(x, draws, gen) - x
    msq = float(np.einsum("ij,ij->i", dev, dev).mean())
    assert msq <= 1.1 * toy.variance_bound
    assert msq >= 0.9 * toy.variance_bound


@pytest.mark.parametrize("m", [1, 4, 16])
def test_minibatch_variance_scales_inversely_with_m(m):
    # oracle: the per-batch squared deviation averaged over 1e4 batches
    n, batches = 8, 10_000
    toy = make_toy(n, gaussian_noise(n))
    x = np.zeros(n)
    gen = RngStream(SEED, 20 + m).generator()
    sq = np.empty(batches)
    for b in range(batches):
        g = toy.minibatch_gradient(x, m, gen)
        sq[b] = float(g @ g)
    expected = toy.variance_bound / m
    assert abs(sq.mean() - expected) <= 0.10 * expected


def test_full_gradient_matches_central_finite_differences():
    # independent oracle: (f(x + h e_i) - f(x - h e_i)) / 2h
    n = 7
    toy = make_toy(n, gaussian_noise(n))
    gen = np.random.default_rng(3)
    for _ in range(5):
        x = gen.standard_normal(n) * 3
        h = 1e-6 * (1 + np.linalg.norm(x))
        fd = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd[i] = (toy.value(x + e) - toy.value(x - e)) / (2 * h)
        g = toy.full_gradient(x)
        assert np.allclose(g, fd, rtol=1e-5, atol=1e-8)


def test_dimension_mismatch_raises():
    toy = make_toy(4)
    with pytest.raises(ValueError):
        toy.value(np.zeros(5))
    with pytest.raises(ValueError):
        toy.full_gradient(np.zeros(3))


def test_non_finite_point_rejected():
    toy = make_toy(2)
    with pytest.raises(ValueError):
        toy.value(np.array([np.nan, 0.0]))


def test_ensure_finite_aborts_with_step():
    with pytest.raises(TrialAbort) as err:
        ensure_finite(np.array([1.0, np.inf]), "iterate", step=42)
    assert err.value.step == 42
