import io
import math

import numpy as np
import pytest

from clipopt import (
    RngStream,
    burr_noise,
    gaussian_noise,
    load_libsvm,
    make_logreg,
    make_toy,
    parse_libsvm,
    serialize_libsvm,
    solve_reference,
    weibull_noise,
)
from clipopt.problems import load_cached_optimum, save_cached_optimum


# ----------------------------------------------------------------------
# toy problem
# ----------------------------------------------------------------------

def test_toy_values():
    toy = make_toy(6)
    assert toy.value(np.zeros(6)) == 0.0
    x = np.array([3.0, 4.0, 0.0, 0.0, 0.0, 0.0])
    assert toy.value(x) == 12.5
    assert np.array_equal(toy.full_gradient(x), x)


def test_toy_construction_contract():
    toy = make_toy(100, gaussian_noise(100))
    assert toy.smoothness == 1.0
    assert toy.strong_convexity == 1.0
    assert toy.variance_bound == 100.0  # E||xi||^2 = n
    assert np.array_equal(toy.optimum, np.zeros(100))
    assert toy.optimal_value == 0.0


def test_toy_zero_noise_sample_is_exact():
    toy = make_toy(3)
    x = np.array([1.0, -1.0, 2.0])
    assert np.array_equal(toy.sample_gradient(x, RngStream(0)), x)


def test_toy_noise_dimension_checked():
    with pytest.raises(ValueError):
        make_toy(5, gaussian_noise(4))
    with pytest.raises(ValueError):
        make_toy(0)


def test_toy_noise_second_moment_all_families():
    # E||g - x||^2 = n exactly; a fixed seed keeps the heavy-tail sampling
    # noise of this estimate (which can reach tens of percent for Burr)
    # reproducible
    n, draws = 100, 100_000
    for make in (gaussian_noise, weibull_noise, burr_noise):
        toy = make_toy(n, make(n))
        gen = RngStream(1000).child(0).generator()
        dev = toy._draw_gradients(np.zeros(n), draws, gen)
        msq = float(np.einsum("ij,ij->i", dev, dev).mean())
        assert abs(msq - n) <= 0.15 * n, make.__name__
        assert abs(dev.mean()) <= 0.05


# ----------------------------------------------------------------------
# LIBSVM parsing
# ----------------------------------------------------------------------

def test_parse_basic_line():
    data = parse_libsvm("1 1:0.5 3:-1.2\n")
    assert data.n_rows == 1
    assert data.labels[0] == 1.0
    assert data.rows[0] == [(0, 0.5), (2, -1.2)]
    assert data.dimension == 3


def test_parse_zero_one_labels_map_to_signs():
    data = parse_libsvm("0 2:1\n1 1:1\n")
    assert list(data.labels) == [-1.0, 1.0]


def test_parse_from_stream():
    data = parse_libsvm(io.StringIO("+1 1:2\n-1 2:3\n"))
    assert list(data.labels) == [1.0, -1.0]


def test_parse_rejects_malformed_input():
    with pytest.raises(ValueError, match="label"):
        parse_libsvm("abc 1:1\n")
    with pytest.raises(ValueError, match="token"):
        parse_libsvm("1 1:x\n")
    with pytest.raises(ValueError, match="increasing"):
        parse_libsvm("1 2:1 2:2\n")
    with pytest.raises(ValueError, match="increasing"):
        parse_libsvm("1 3:1 2:2\n")
    with pytest.raises(ValueError, match="empty"):
        parse_libsvm("\n\n")
    with pytest.raises(ValueError, match="label set"):
        parse_libsvm("1 1:1\n2 1:1\n3 1:1\n")


def test_serialize_parse_roundtrip_random():
    gen = np.random.default_rng(11)
    lines = []
    for _ in range(100):
        label = gen.choice([-1, 1])
        idxs = sorted(gen.choice(30, size=gen.integers(1, 6), replace=False) + 1)
        feats = " ".join(f"{i}:{float(gen.standard_normal())!r}" for i in idxs)
        lines.append(f"{label} {feats}")
    text = "\n".join(lines) + "\n"
    first = parse_libsvm(text)
    second = parse_libsvm(serialize_libsvm(first), dimension=first.dimension)
    assert first.rows == second.rows
    assert np.array_equal(first.labels, second.labels)
    assert first.dimension == second.dimension


# ----------------------------------------------------------------------
# logistic regression
# ----------------------------------------------------------------------

def _synthetic_dataset(r=60, n=5, seed=2):
    gen = np.random.default_rng(seed)
    w = gen.standard_normal(n)
    X = gen.standard_normal((r, n))
    y = np.where(X @ w + 0.8 * gen.standard_normal(r) > 0, 1, -1)
    lines = [
        f"{y[i]} " + " ".join(f"{j + 1}:{float(X[i, j])!r}" for j in range(n))
        for i in range(r)
    ]
    return parse_libsvm("\n".join(lines) + "\n")


def test_logreg_smoothness_identity_matrix():
    data = parse_libsvm("1 1:1\n1 2:1\n")
    prob = make_logreg(data)
    assert prob.smoothness == pytest.approx(1.0 / 8.0, rel=1e-6)


def test_logreg_smoothness_single_row():
    data = parse_libsvm("1 1:2 2:0\n")
    prob = make_logreg(data)
    assert prob.smoothness == pytest.approx(1.0, rel=1e-6)  # lambda_max = ||a||^2


def test_logreg_value_at_origin_is_ln2():
    prob = make_logreg(_synthetic_dataset())
    assert prob.value(np.zeros(prob.dimension)) == pytest.approx(math.log(2), rel=1e-12)


def test_logreg_balanced_identical_rows_zero_gradient():
    data = parse_libsvm("1 1:1 2:2\n-1 1:1 2:2\n")
    prob = make_logreg(data)
    assert np.allclose(prob.full_gradient(np.zeros(2)), 0.0, atol=1e-15)


def test_component_gradient_matches_finite_differences():
    prob = make_logreg(_synthetic_dataset())
    gen = np.random.default_rng(5)
    x = gen.standard_normal(prob.dimension)
    h = 1e-6
    for i in (0, 7, 33):
        g = prob.component_gradient(i, x)
        fd = np.empty(prob.dimension)
        for j in range(prob.dimension):
            e = np.zeros(prob.dimension)
            e[j] = h
            fd[j] = (prob.component_value(i, x + e) - prob.component_value(i, x - e)) / (2 * h)
        assert np.allclose(g, fd, rtol=1e-6, atol=1e-9)


def test_full_gradient_is_mean_of_components():
    prob = make_logreg(_synthetic_dataset())
    x = np.linspace(-1, 1, prob.dimension)
    mean = np.mean([prob.component_gradient(i, x) for i in range(prob.n_samples)], axis=0)
    assert np.allclose(prob.full_gradient(x), mean, rtol=1e-12)


def test_sample_gradient_is_random_component():
    prob = make_logreg(_synthetic_dataset())
    x = np.zeros(prob.dimension)
    g = prob.sample_gradient(x, RngStream(4))
    components = [prob.component_gradient(i, x) for i in range(prob.n_samples)]
    assert any(np.allclose(g, c, rtol=1e-12) for c in components)


def test_smoothness_certificate_random_pairs():
    # ||grad f(x) - grad f(y)|| <= 1.0001 L ||x - y|| over 1e3 random pairs
    prob = make_logreg(_synthetic_dataset())
    L = prob.smoothness
    gen = np.random.default_rng(17)
    for _ in range(1000):
        x = gen.standard_normal(prob.dimension) * 2
        y = gen.standard_normal(prob.dimension) * 2
        lhs = np.linalg.norm(prob.full_gradient(x) - prob.full_gradient(y))
        assert lhs <= 1.0001 * L * np.linalg.norm(x - y)


def test_variance_bound_estimate_positive_and_covers_origin():
    prob = make_logreg(_synthetic_dataset())
    sigma2 = prob.estimate_variance_bound()
    assert sigma2 > 0
    g = prob.full_gradient(np.zeros(prob.dimension))
    comps = np.array([prob.component_gradient(i, np.zeros(prob.dimension))
                      for i in range(prob.n_samples)])
    direct = float(np.mean(np.sum((comps - g) ** 2, axis=1)))
    assert sigma2 >= direct * (1 - 1e-9)


def test_make_logreg_rejects_empty():
    from clipopt.problems import SparseDataset

    with pytest.raises(ValueError):
        make_logreg(SparseDataset(rows=[], labels=np.array([]), dimension=2))


# ----------------------------------------------------------------------
# reference solve
# ----------------------------------------------------------------------

def test_solve_reference_toy_exact():
    toy = make_toy(4)
    sol = solve_reference(toy, tol=1e-10)
    assert np.allclose(sol.x, 0.0)
    assert sol.f_star == 0.0
    assert sol.converged


def test_solve_reference_separable_reports_stop():
    # one positive sample: the infimum is at infinity, the gradient still
    # drops below tol at large x, and the result records the stop reason
    prob = make_logreg(parse_libsvm("1 1:1\n"))
    sol = solve_reference(prob, tol=1e-6, max_iter=50_000)
    assert sol.grad_norm <= 1e-6
    assert sol.stop_reason == "gradient norm"
    assert sol.f_star < 1e-4


def test_solve_reference_synthetic_certificate_and_cache(tmp_path):
    data = _synthetic_dataset()
    prob = make_logreg(data)
    sol = solve_reference(prob, tol=1e-8)
    assert sol.converged and sol.grad_norm <= 1e-8
    path = tmp_path / "synth.libsvm"
    path.write_text(serialize_libsvm(data))
    save_cached_optimum(path, sol)
    loaded = load_cached_optimum(path)
    assert loaded is not None
    assert np.allclose(loaded.x, sol.x)
    assert loaded.f_star == sol.f_star
    assert loaded.tol == sol.tol


def test_load_libsvm_roundtrip(tmp_path):
    data = _synthetic_dataset()
    path = tmp_path / "d.libsvm"
    path.write_text(serialize_libsvm(data))
    again = load_libsvm(path)
    assert again.n_rows == data.n_rows
    assert np.array_equal(again.labels, data.labels)


def test_solve_reference_rejects_bad_tol():
    with pytest.raises(ValueError):
        solve_reference(make_toy(2), tol=0.0)
