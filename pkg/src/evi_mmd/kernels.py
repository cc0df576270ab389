"""Kernel evaluations, Gram matrices, and analytic kernel gradients.

Everything here is pure and deterministic: pairwise terms are computed with
chunked broadcasting (no BLAS dispatch), so results are bit-identical across
runs and thread settings.  Gram matrices are materialized in full; particle
counts in this package stay in the hundreds, so O(N^2 d) is fine.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, UnsupportedOperationError
from .model import GAUSSIAN, NEGATIVE_EUCLIDEAN, KernelConfig

# Rows per broadcasting chunk; bounds transient memory at ~chunk * M * d floats.
_CHUNK = 256


def _check_vector(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return x


def _check_matrix(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a 2-d matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return x


def _check_bandwidth(h) -> float:
    h = float(h)
    if not np.isfinite(h) or h <= 0:
        raise InvalidArgumentError(f"bandwidth must be > 0, got {h!r}")
    return h


def gauss_eval(x, y, h) -> float:
    """Gaussian kernel exp(-|x - y|^2 / (2 h^2)); value in (0, 1]."""
    x = _check_vector(x, "x")
    y = _check_vector(y, "y")
    h = _check_bandwidth(h)
    sq = float(np.sum((x - y) ** 2))
    return float(np.exp(-sq / (2.0 * h * h)))


def gauss_grad_x(x, y, h) -> np.ndarray:
    """Gradient of the Gaussian kernel in its first argument:
    -(x - y) / h^2 * exp(-|x - y|^2 / (2 h^2))."""
    x = _check_vector(x, "x")
    y = _check_vector(y, "y")
    h = _check_bandwidth(h)
    diff = x - y
    val = np.exp(-float(np.sum(diff**2)) / (2.0 * h * h))
    return -diff / (h * h) * val


def neg_euclid_eval(x, y) -> float:
    """Energy-distance generator -|x - y|_2 (non-positive, 0 iff x == y)."""
    x = _check_vector(x, "x")
    y = _check_vector(y, "y")
    sq = float(np.sum((x - y) ** 2))
    return -float(np.sqrt(max(sq, 0.0)))


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All pairwise squared Euclidean distances between rows of a and b.

    Chunked over rows of ``a`` so memory stays bounded for large row counts.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[0]
    out = np.empty((n, b.shape[0]), dtype=float)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        diff = a[start:stop, None, :] - b[None, :, :]
        out[start:stop] = np.einsum("ijd,ijd->ij", diff, diff)
    return out


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances, computed as sqrt of squared norms
    clamped at zero so round-off cannot leak under the sqrt."""
    return np.sqrt(np.maximum(squared_distances(a, b), 0.0))


def _kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: KernelConfig) -> np.ndarray:
    if kernel.kind == GAUSSIAN:
        sq = squared_distances(a, b)
        return np.exp(-sq / (2.0 * kernel.bandwidth**2))
    if kernel.kind == NEGATIVE_EUCLIDEAN:
        return -pairwise_distances(a, b)
    raise UnsupportedOperationError(f"unknown kernel kind {kernel.kind!r}")


def gram(points, kernel: KernelConfig) -> np.ndarray:
    """Full kernel matrix K[i, j] = K(x_i, x_j); exactly symmetric, and the
    Gaussian case has a unit diagonal."""
    points = _check_matrix(points, "points")
    out = _kernel_matrix(points, points, kernel)
    if kernel.kind == GAUSSIAN:
        np.fill_diagonal(out, 1.0)
    else:
        np.fill_diagonal(out, 0.0)
    return out


def cross_gram(a, b, kernel: KernelConfig) -> np.ndarray:
    """Rectangular kernel matrix C[i, j] = K(a_i, b_j)."""
    a = _check_matrix(a, "a")
    b = _check_matrix(b, "b")
    if a.shape[1] != b.shape[1]:
        raise InvalidArgumentError(
            f"dimension mismatch: a has d={a.shape[1]}, b has d={b.shape[1]}"
        )
    return _kernel_matrix(a, b, kernel)
