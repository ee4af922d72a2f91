"""Numeric inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``GDPRAUDIT_DISABLE_NUMBA`` is
unset (or ``0``/``false``). Both paths perform the same floating-point
operations in the same order up to summation order inside dot products, so
they agree to round-off; tests check them against each other.

Sparse matrices are passed as raw CSR triples ``(indptr, indices, data)``.
"""

from __future__ import annotations

import os

import numpy as np

_RESCALE_BELOW = 1e-9

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def _env_disabled() -> bool:
    return os.environ.get("GDPRAUDIT_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


HAVE_NUMBA = numba is not None
BACKEND = "numba" if HAVE_NUMBA and not _env_disabled() else "numpy"


def set_backend(name: str) -> None:
    """Select ``"numba"`` or ``"numpy"`` for subsequent kernel calls."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    BACKEND = name


# -- pure numpy ---------------------------------------------------------------


def _sgd_numpy(indptr, indices, data, y, order, rates, l2, weights, bias):
    n_labels = weights.shape[0]
    scale = 1.0
    g = np.empty(n_labels)
    for epoch in range(order.shape[0]):
        lr = rates[epoch]
        decay = 1.0 - lr * l2
        for i in order[epoch]:
            lo, hi = indptr[i], indptr[i + 1]
            cols = indices[lo:hi]
            vals = data[lo:hi]
            block = weights[:, cols]
            z = scale * (block @ vals) + bias
            z -= z.max()
            p = np.exp(z)
            p /= p.sum()
            g[:] = p
            g[y[i]] -= 1.0
            scale *= decay
            weights[:, cols] = block - np.outer(g, vals) * (lr / scale)
            bias -= lr * g
            if scale < _RESCALE_BELOW:
                weights *= scale
                scale = 1.0
    weights *= scale


def _scores_numpy(indptr, indices, data, weights, bias):
    n = indptr.shape[0] - 1
    out = np.tile(bias, (n, 1))
    if data.size:
        rows = np.repeat(np.arange(n), np.diff(indptr))
        np.add.at(out, rows, (weights[:, indices] * data).T)
    return out


def _confusion_numpy(true_idx, pred_idx, n_labels):
    out = np.zeros((n_labels, n_labels), dtype=np.int64)
    np.add.at(out, (true_idx, pred_idx), 1)
    return out


# -- numba ----------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _sgd_numba(indptr, indices, data, y, order, rates, l2, weights, bias):
        n_labels = weights.shape[0]
        scale = 1.0
        z = np.empty(n_labels)
        for epoch in range(order.shape[0]):
            lr = rates[epoch]
            decay = 1.0 - lr * l2
            for t in range(order.shape[1]):
                i = order[epoch, t]
                lo = indptr[i]
                hi = indptr[i + 1]
                zmax = -np.inf
                for k in range(n_labels):
                    acc = 0.0
                    for j in range(lo, hi):
                        acc += weights[k, indices[j]] * data[j]
                    z[k] = scale * acc + bias[k]
                    if z[k] > zmax:
                        zmax = z[k]
                total = 0.0
                for k in range(n_labels):
                    z[k] = np.exp(z[k] - zmax)
                    total += z[k]
                scale *= decay
                step = lr / scale
                for k in range(n_labels):
                    gk = z[k] / total
                    if k == y[i]:
                        gk -= 1.0
                    for j in range(lo, hi):
                        weights[k, indices[j]] -= gk * data[j] * step
                    bias[k] -= lr * gk
                if scale < 1e-9:
                    weights *= scale
                    scale = 1.0
        weights *= scale

    @numba.njit(cache=True)
    def _scores_numba(indptr, indices, data, weights, bias):
        n = indptr.shape[0] - 1
        n_labels = weights.shape[0]
        out = np.empty((n, n_labels))
        for i in range(n):
            for k in range(n_labels):
                acc = bias[k]
                for j in range(indptr[i], indptr[i + 1]):
                    acc += weights[k, indices[j]] * data[j]
                out[i, k] = acc
        return out

    @numba.njit(cache=True)
    def _confusion_numba(true_idx, pred_idx, n_labels):
        out = np.zeros((n_labels, n_labels), dtype=np.int64)
        for t in range(true_idx.shape[0]):
            out[true_idx[t], pred_idx[t]] += 1
        return out


# -- dispatch ---------------------------------------------------------------------


def sgd_softmax(indptr, indices, data, y, order, rates, l2, weights, bias):
    """Per-sample SGD on L2-regularized softmax cross-entropy, in place.

    ``order`` is an ``(epochs, n)`` array of sample indices and ``rates`` the
    per-epoch learning rate. Each step applies weight decay
    ``(1 - lr * l2)`` to all weights (lazily, through a shared scale factor)
    and then the gradient of the sample's cross-entropy. The bias is not
    regularized.
    """
    args = (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(data, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64),
        np.ascontiguousarray(order, dtype=np.int64),
        np.ascontiguousarray(rates, dtype=np.float64),
        float(l2),
        weights,
        bias,
    )
    if BACKEND == "numba":
        _sgd_numba(*args)
    else:
        _sgd_numpy(*args)


def linear_scores(indptr, indices, data, weights, bias) -> np.ndarray:
    """Row-wise ``weights @ x + bias`` for a CSR batch; returns ``(n, labels)``."""
    args = (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(data, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(bias, dtype=np.float64),
    )
    if BACKEND == "numba":
        return _scores_numba(*args)
    return _scores_numpy(*args)


def confusion_counts(true_idx, pred_idx, n_labels: int) -> np.ndarray:
    true_idx = np.ascontiguousarray(true_idx, dtype=np.int64)
    pred_idx = np.ascontiguousarray(pred_idx, dtype=np.int64)
    if BACKEND == "numba":
        return _confusion_numba(true_idx, pred_idx, n_labels)
    return _confusion_numpy(true_idx, pred_idx, n_labels)
