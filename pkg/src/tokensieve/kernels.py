"""Hot numeric kernels: numba-compiled loops with a pure-numpy fallback.

The transformer only calls four reduction-shaped kernels here (masked softmax
forward/backward, layer norm forward/backward); matrix products stay on
numpy/BLAS where they belong.  The active backend is chosen at import time from
the environment variable ``TOKENSIEVE_BACKEND`` ("numba" or "numpy"; default
numba when importable) and can be switched at runtime with `set_backend`, which
benchmarks and tests use to compare both paths.

Both backends are deterministic (no parallel reductions, no fastmath), so a
given backend reproduces bit-identical results run to run.
"""

from __future__ import annotations

import os

import numpy as np

LN_EPS = 1e-5

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def _np_masked_softmax(scores: np.ndarray, causal: bool) -> np.ndarray:
    """Row softmax over the last axis of [heads, n, n] scores.

    With causal=True, row i only sees columns j <= i; masked columns come out
    exactly 0.0 so masked positions cannot leak into any output.
    """
    if causal:
        n = scores.shape[-1]
        block = np.triu(np.full((n, n), -np.inf), k=1)
        scores = scores + block
    m = scores.max(axis=-1, keepdims=True)
    e = np.exp(scores - m)  # exp(-inf) == 0.0 exactly
    return e / e.sum(axis=-1, keepdims=True)


def _np_softmax_grad(probs: np.ndarray, dprobs: np.ndarray) -> np.ndarray:
    dot = np.sum(probs * dprobs, axis=-1, keepdims=True)
    return probs * (dprobs - dot)


def _np_layer_norm(x: np.ndarray, g: np.ndarray, b: np.ndarray):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = np.mean(xc * xc, axis=-1)
    rstd = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * rstd[:, None]
    return xhat * g + b, xhat, rstd


def _np_layer_norm_grad(dy: np.ndarray, xhat: np.ndarray, rstd: np.ndarray, g: np.ndarray):
    dxhat = dy * g
    m1 = dxhat.mean(axis=-1, keepdims=True)
    m2 = np.mean(dxhat * xhat, axis=-1, keepdims=True)
    dx = rstd[:, None] * (dxhat - m1 - xhat * m2)
    dg = np.sum(dy * xhat, axis=0)
    db = np.sum(dy, axis=0)
    return dx, dg, db


_NUMPY_IMPL = {
    "masked_softmax": _np_masked_softmax,
    "softmax_grad": _np_softmax_grad,
    "layer_norm": _np_layer_norm,
    "layer_norm_grad": _np_layer_norm_grad,
}


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _nb_masked_softmax(scores, causal):
        h, n, _ = scores.shape
        out = np.empty_like(scores)
        for a in range(h):
            for i in range(n):
                lim = i + 1 if causal else n
                m = scores[a, i, 0]
                for j in range(1, lim):
                    v = scores[a, i, j]
                    if v > m:
                        m = v
                s = 0.0
                for j in range(lim):
                    v = np.exp(scores[a, i, j] - m)
                    out[a, i, j] = v
                    s += v
                inv = 1.0 / s
                for j in range(lim):
                    out[a, i, j] *= inv
                for j in range(lim, n):
                    out[a, i, j] = 0.0
        return out

    @numba.njit(cache=True, nogil=True)
    def _nb_softmax_grad(probs, dprobs):
        h, n, _ = probs.shape
        out = np.empty_like(probs)
        for a in range(h):
            for i in range(n):
                dot = 0.0
                for j in range(n):
                    dot += probs[a, i, j] * dprobs[a, i, j]
                for j in range(n):
                    out[a, i, j] = probs[a, i, j] * (dprobs[a, i, j] - dot)
        return out

    @numba.njit(cache=True, nogil=True)
    def _nb_layer_norm(x, g, b):
        n, d = x.shape
        y = np.empty_like(x)
        xhat = np.empty_like(x)
        rstd = np.empty(n)
        for i in range(n):
            mu = 0.0
            for j in range(d):
                mu += x[i, j]
            mu /= d
            var = 0.0
            for j in range(d):
                c = x[i, j] - mu
                var += c * c
            var /= d
            r = 1.0 / np.sqrt(var + LN_EPS)
            rstd[i] = r
            for j in range(d):
                xh = (x[i, j] - mu) * r
                xhat[i, j] = xh
                y[i, j] = xh * g[j] + b[j]
        return y, xhat, rstd

    @numba.njit(cache=True, nogil=True)
    def _nb_layer_norm_grad(dy, xhat, rstd, g):
        n, d = dy.shape
        dx = np.empty_like(dy)
        dg = np.zeros(d)
        db = np.zeros(d)
        for i in range(n):
            m1 = 0.0
            m2 = 0.0
            for j in range(d):
                dxh = dy[i, j] * g[j]
                m1 += dxh
                m2 += dxh * xhat[i, j]
            m1 /= d
            m2 /= d
            r = rstd[i]
            for j in range(d):
                dxh = dy[i, j] * g[j]
                dx[i, j] = r * (dxh - m1 - xhat[i, j] * m2)
                dg[j] += dy[i, j] * xhat[i, j]
                db[j] += dy[i, j]
        return dx, dg, db

    _NUMBA_IMPL = {
        "masked_softmax": _nb_masked_softmax,
        "softmax_grad": _nb_softmax_grad,
        "layer_norm": _nb_layer_norm,
        "layer_norm_grad": _nb_layer_norm_grad,
    }
else:  # pragma: no cover
    _NUMBA_IMPL = None

_BACKENDS = {"numpy": _NUMPY_IMPL}
if _NUMBA_IMPL is not None:
    _BACKENDS["numba"] = _NUMBA_IMPL


def _default_backend() -> str:
    requested = os.environ.get("TOKENSIEVE_BACKEND", "").strip().lower()
    if requested:
        if requested not in ("numpy", "numba"):
            raise ValueError(f"TOKENSIEVE_BACKEND must be 'numpy' or 'numba', got {requested!r}")
        if requested == "numba" and not HAVE_NUMBA:
            raise ValueError("TOKENSIEVE_BACKEND=numba but numba is not importable")
        return requested
    return "numba" if HAVE_NUMBA else "numpy"


_ACTIVE = _default_backend()


def active_backend() -> str:
    return _ACTIVE


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str) -> None:
    """Switch kernel implementations at runtime (used by tests/benchmarks)."""
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    global _ACTIVE
    _ACTIVE = name


def masked_softmax(scores: np.ndarray, causal: bool) -> np.ndarray:
    return _BACKENDS[_ACTIVE]["masked_softmax"](scores, causal)


def softmax_grad(probs: np.ndarray, dprobs: np.ndarray) -> np.ndarray:
    return _BACKENDS[_ACTIVE]["softmax_grad"](probs, dprobs)


def layer_norm(x: np.ndarray, g: np.ndarray, b: np.ndarray):
    return _BACKENDS[_ACTIVE]["layer_norm"](x, g, b)


def layer_norm_grad(dy: np.ndarray, xhat: np.ndarray, rstd: np.ndarray, g: np.ndarray):
    return _BACKENDS[_ACTIVE]["layer_norm_grad"](dy, xhat, rstd, g)


def backend_impl(name: str) -> dict:
    """Expose a specific backend's kernel table (for equivalence tests/benchmarks)."""
    return _BACKENDS[name]
