import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import central_difference, generic_cloud
from topodense.persistence import death_times
from topodense.regularizer import (
    connectivity_loss,
    connectivity_loss_and_grad,
    connectivity_loss_backward,
    one_sided_connectivity_loss,
)

LINE = [np.array([[0.0], [0.5], [2.0]])]


def test_line_example():
    assert connectivity_loss(LINE, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert one_sided_connectivity_loss(LINE, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert connectivity_loss(LINE * 2, 1.0) == pytest.approx(2.0, abs=1e-15)


def test_all_deaths_at_beta_give_zero_loss_and_gradient():
    square = np.array([[[0, 0], [1, 0], [0, 1], [1, 1]]], dtype=float)
    assert connectivity_loss(square, 1.0) == 0.0
    np.testing.assert_array_equal(connectivity_loss_backward(square, 1.0), np.zeros_like(square))


def test_two_point_gradients():
    far = np.array([[[0.0, 0.0], [3.0, 4.0]]])
    g = connectivity_loss_backward(far, 1.0)
    np.testing.assert_allclose(g[0], [[-0.6, -0.8], [0.6, 0.8]], atol=1e-15)
    near = np.array([[[0.0, 0.0], [0.5, 0.0]]])
    g = connectivity_loss_backward(near, 1.0)
    np.testing.assert_allclose(g[0], [[1.0, 0.0], [-1.0, 0.0]], atol=1e-15)  # push apart


def test_one_sided_matches_two_sided_above_beta():
    rng = np.random.default_rng(0)
    batch = rng.normal(size=(3, 5, 2)) * 10
    assert np.all(np.concatenate([death_times(s) for s in batch]) > 0.1)
    assert one_sided_connectivity_loss(batch, 0.1) == pytest.approx(connectivity_loss(batch, 0.1))
    assert one_sided_connectivity_loss(batch * 1e-3, 100.0) == 0.0


def test_list_input_returns_list():
    g = connectivity_loss_backward([np.zeros((2, 2)) + [[0, 0], [0, 3]], np.eye(3)], 1.0)
    assert isinstance(g, list) and [x.shape for x in g] == [(2, 2), (3, 3)]


@pytest.mark.parametrize("bad", [[np.zeros((1, 2))], []])
def test_invalid_batches(bad):
    with pytest.raises(ValueError):
        connectivity_loss(bad, 1.0)


def test_nonpositive_beta():
    with pytest.raises(ValueError):
        connectivity_loss(LINE, 0.0)


def test_degenerate_flag():
    _, _, degenerate = connectivity_loss_and_grad([np.zeros((3, 2))], 1.0)
    assert degenerate


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("one_sided", [False, True])
def test_gradient_matches_finite_differences(seed, one_sided):
    rng = np.random.default_rng(seed)
    batch = np.stack([generic_cloud(rng, 5, 3) for _ in range(3)])
    beta = 0.9
    deaths = np.concatenate([death_times(s) for s in batch])
    assert np.min(np.abs(deaths - beta)) > 1e-4

    def f(x):
        return connectivity_loss_and_grad(x, beta, one_sided)[0]

    g = connectivity_loss_backward(batch, beta, one_sided)
    fd = central_difference(f, batch)
    assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(fd), 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.integers(1, 4))
def test_invariants(seed, b, n):
    rng = np.random.default_rng(seed)
    batch = rng.normal(size=(n, b, 3))
    beta = float(rng.uniform(0.1, 3))
    loss = connectivity_loss(batch, beta)
    assert loss >= 0
    shuffled = np.stack([s[rng.permutation(b)] for s in batch[rng.permutation(n)]])
    assert connectivity_loss(shuffled, beta) == pytest.approx(loss, rel=1e-12, abs=1e-12)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    moved = np.stack([s @ q + rng.normal(size=3) for s in batch])
    assert connectivity_loss(moved, beta) == pytest.approx(loss, rel=1e-9, abs=1e-9)


@given(st.floats(0.05, 5.0), st.floats(0.1, 3.0))
def test_descent_on_two_points(d, beta):
    if abs(d - beta) < 1e-3:
        return
    z = np.array([[[0.0, 0.0], [d, 0.0]]])
    g = connectivity_loss_backward(z, beta)
    eta = 1e-4
    d_new = float(death_times((z - eta * g)[0])[0])
    assert abs(d_new - beta) < abs(d - beta)
