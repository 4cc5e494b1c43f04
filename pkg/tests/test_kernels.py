"""Kernel-level tests: numpy/numba agreement, exact masking, backend switching."""

import numpy as np
import pytest

from tokensieve import kernels


def _random_scores(rng, heads=4, n=17):
    return rng.normal(size=(heads, n, n)) * 3.0


@pytest.fixture()
def numpy_backend():
    """Run a test under the numpy backend, restoring the prior one after."""
    before = kernels.active_backend()
    kernels.set_backend("numpy")
    yield
    kernels.set_backend(before)


def test_available_backends_contains_numpy():
    assert "numpy" in kernels.available_backends()


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.set_backend("gpu")


def test_set_backend_roundtrip():
    before = kernels.active_backend()
    try:
        kernels.set_backend("numpy")
        assert kernels.active_backend() == "numpy"
    finally:
        kernels.set_backend(before)


def test_masked_softmax_rows_sum_to_one(rng):
    scores = _random_scores(rng)
    for causal in (False, True):
        probs = kernels.backend_impl("numpy")["masked_softmax"](scores, causal)
        np.testing.assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-12)


def test_masked_softmax_causal_zeros_are_exact(rng):
    """Future columns must be exactly 0.0, not merely tiny."""
    scores = _random_scores(rng, n=11)
    for name in kernels.available_backends():
        probs = kernels.backend_impl(name)["masked_softmax"](scores, True)
        n = scores.shape[-1]
        future = np.triu(np.ones((n, n), dtype=bool), k=1)
        assert (probs[:, future] == 0.0).all(), f"{name}: future attention leaked"


def test_masked_softmax_causal_ignores_future_values(rng):
    """Changing a future column must not change any earlier row at all."""
    scores = _random_scores(rng, n=9)
    bumped = scores.copy()
    bumped[:, :, -1] += 1e6  # visible only to the final row
    for name in kernels.available_backends():
        fn = kernels.backend_impl(name)["masked_softmax"]
        a = fn(scores, True)
        b = fn(bumped, True)
        assert (a[:, :-1, :] == b[:, :-1, :]).all()
        assert not np.allclose(a[:, -1, :], b[:, -1, :])


def test_layer_norm_matches_direct_formula(rng):
    x = rng.normal(size=(7, 16))
    g = rng.normal(size=16)
    b = rng.normal(size=16)
    y, xhat, rstd = kernels.backend_impl("numpy")["layer_norm"](x, g, b)
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    expected = (x - mu) / np.sqrt(var + kernels.LN_EPS) * g + b
    np.testing.assert_allclose(y, expected, atol=1e-12)
    np.testing.assert_allclose(xhat * g + b, y, atol=1e-12)
    np.testing.assert_allclose(rstd, 1.0 / np.sqrt(var[:, 0] + kernels.LN_EPS), atol=1e-12)


@pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not importable")
class TestBackendEquivalence:
    """The compiled kernels must agree with the reference numpy path."""

    def test_masked_softmax(self, rng):
        scores = _random_scores(rng, heads=3, n=23)
        for causal in (False, True):
            a = kernels.backend_impl("numpy")["masked_softmax"](scores, causal)
            b = kernels.backend_impl("numba")["masked_softmax"](scores, causal)
            np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)

    def test_softmax_grad(self, rng):
        probs = kernels.backend_impl("numpy")["masked_softmax"](_random_scores(rng), False)
        dprobs = rng.normal(size=probs.shape)
        a = kernels.backend_impl("numpy")["softmax_grad"](probs, dprobs)
        b = kernels.backend_impl("numba")["softmax_grad"](probs, dprobs)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_layer_norm(self, rng):
        x = rng.normal(size=(13, 32))
        g = rng.normal(size=32)
        b = rng.normal(size=32)
        ya, xha, ra = kernels.backend_impl("numpy")["layer_norm"](x, g, b)
        yb, xhb, rb = kernels.backend_impl("numba")["layer_norm"](x, g, b)
        np.testing.assert_allclose(ya, yb, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(xha, xhb, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(ra, rb, rtol=1e-12, atol=1e-14)

    def test_layer_norm_grad(self, rng):
        x = rng.normal(size=(13, 32))
        g = rng.normal(size=32)
        b = rng.normal(size=32)
        dy = rng.normal(size=(13, 32))
        _, xhat, rstd = kernels.backend_impl("numpy")["layer_norm"](x, g, b)
        outs_np = kernels.backend_impl("numpy")["layer_norm_grad"](dy, xhat, rstd, g)
        outs_nb = kernels.backend_impl("numba")["layer_norm_grad"](dy, xhat, rstd, g)
        for a, b_ in zip(outs_np, outs_nb):
            np.testing.assert_allclose(a, b_, rtol=1e-12, atol=1e-14)


def test_module_level_wrappers_respect_active_backend(rng, numpy_backend):
    scores = _random_scores(rng, heads=1, n=5)
    direct = kernels.backend_impl("numpy")["masked_softmax"](scores, False)
    np.testing.assert_array_equal(kernels.masked_softmax(scores, False), direct)


def test_softmax_grad_matches_jacobian(rng):
    """Check against the explicit softmax Jacobian on a single row."""
    row = rng.normal(size=(1, 1, 6))
    probs = kernels.backend_impl("numpy")["masked_softmax"](row, False)
    dprobs = rng.normal(size=row.shape)
    got = kernels.backend_impl("numpy")["softmax_grad"](probs, dprobs)
    p = probs[0, 0]
    jac = np.diag(p) - np.outer(p, p)
    np.testing.assert_allclose(got[0, 0], jac @ dprobs[0, 0], atol=1e-12)


def test_layer_norm_grad_finite_difference(rng):
    """Finite-difference check of the layer-norm backward pass."""
    x = rng.normal(size=(3, 8))
    g = rng.normal(size=8)
    b = rng.normal(size=8)
    dy = rng.normal(size=(3, 8))
    impl = kernels.backend_impl("numpy")
    _, xhat, rstd = impl["layer_norm"](x, g, b)
    dx, dg, db = impl["layer_norm_grad"](dy, xhat, rstd, g)

    def loss(x_, g_, b_):
        y, _, _ = impl["layer_norm"](x_, g_, b_)
        return float((y * dy).sum())

    h = 1e-6
    for arr, grad in ((x, dx), (g, dg), (b, db)):
        flat = arr.reshape(-1)
        for idx in range(0, flat.size, max(1, flat.size // 5)):
            orig = flat[idx]
            flat[idx] = orig + h
            up = loss(x, g, b)
            flat[idx] = orig - h
            down = loss(x, g, b)
            flat[idx] = orig
            num = (up - down) / (2 * h)
            assert abs(num - grad.reshape(-1)[idx]) < 1e-5
