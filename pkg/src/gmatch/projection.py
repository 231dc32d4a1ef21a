"""Projection onto the (partial) doubly stochastic polytope.

The partial case n x n' (n >= n') is padded with n - n' zero slack
columns, projected onto the n x n Birkhoff polytope by alternating the
two closed-form projections

    affine:       D 1 = 1, D^T 1 = 1
    nonnegative:  D >= 0

and cropped back to its first n' columns.
"""
import numpy as np

from gmatch._kernels import alternating_sweeps
from gmatch.core import SoftAssignment, ValidationError, as_matrix

DEFAULT_EPS2 = 1e-4
DEFAULT_MAX_INNER = 300


def _square(y, name="y"):
    y = as_matrix(y, name)
    if y.shape[0] != y.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {y.shape}")
    return y


def affine_project(y) -> np.ndarray:
    """Nearest matrix (Frobenius) with all row and column sums equal to one.

    Uses Y + (1/n + 1^T Y 1 / n^2) 11^T - (1/n) Y 11^T - (1/n) 11^T Y,
    evaluated through the row and column sums in O(n^2).
    """
    y = _square(y)
    n = y.shape[0]
    if n == 0:
        return y.copy()
    r = y.sum(axis=1)
    c = y.sum(axis=0)
    out = y + (1.0 / n + r.sum() / n**2)
    out -= r[:, None] / n
    out -= c[None, :] / n
    return out


def nonneg_project(y) -> np.ndarray:
    """Elementwise max(Y, 0), i.e. (Y + |Y|) / 2."""
    return np.maximum(as_matrix(y, "y"), 0.0)


def doubly_stochastic_project(
    y, eps2: float = DEFAULT_EPS2, max_inner: int = DEFAULT_MAX_INNER, return_sweeps: bool = False
):
    """Successive affine/nonnegative projections of a square matrix.

    A sweep is one affine step followed by one clamp.  Iteration stops
    after ``max_inner`` sweeps, or once a sweep changes no entry by
    ``eps2`` or more and all row/column sums are within ``eps2`` of one.
    """
    y = _square(y)
    if not eps2 > 0:
        raise ValidationError("eps2 must be positive")
    if max_inner < 1:
        raise ValidationError("max_inner must be at least 1")
    out = y.copy()
    sweeps = alternating_sweeps(out, float(eps2), int(max_inner)) if out.size else 0
    return (out, sweeps) if return_sweeps else out


def pad_slack(x: np.ndarray) -> np.ndarray:
    """Slack matrix: ``x`` in the leading columns, zeros in the rest."""
    n, n_prime = x.shape
    y = np.zeros((n, n))
    y[:, :n_prime] = x
    return y


def partial_ds_project(
    x, eps2: float = DEFAULT_EPS2, max_inner: int = DEFAULT_MAX_INNER
) -> SoftAssignment:
    """Project an n x n' matrix (n >= n') onto the partial doubly stochastic set."""
    x = as_matrix(x, "x")
    n, n_prime = x.shape
    if n < n_prime:
        raise ValidationError(f"need n >= n', got {n}x{n_prime}")
    y = doubly_stochastic_project(pad_slack(x), eps2, max_inner)
    return SoftAssignment(np.ascontiguousarray(y[:, :n_prime]))
