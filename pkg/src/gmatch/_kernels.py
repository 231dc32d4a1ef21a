"""Fused O(n^2) inner loops for the projection and the softassign step.

Both solvers spend most of their time in these sweeps, so each one is a
single pass over the matrix.  Reductions are reordered by ``fastmath``;
results are still deterministic for a given build.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def alternating_sweeps(y, eps2, max_inner):
    """Alternate the affine and nonnegativity projections in place.

    Stops once a full sweep moves no entry by ``eps2`` or more and every
    row/column sum is within ``eps2`` of one.  Returns the sweep count.
    """
    n = y.shape[0]
    inv_n = 1.0 / n
    r = np.zeros(n)
    c = np.zeros(n)
    for i in range(n):
        for j in range(n):
            r[i] += y[i, j]
            c[j] += y[i, j]
    shift = np.empty(n)
    r_new = np.empty(n)
    c_new = np.empty(n)
    sweeps = 0
    for it in range(max_inner):
        sweeps = it + 1
        s = 0.0
        for i in range(n):
            s += r[i]
        base = inv_n + s * inv_n * inv_n
        for j in range(n):
            shift[j] = base - c[j] * inv_n
            c_new[j] = 0.0
        change = 0.0
        for i in range(n):
            ri = r[i] * inv_n
            acc = 0.0
            dm = 0.0
            row = y[i]
            for j in range(n):
                old = row[j]
                v = max(old + shift[j] - ri, 0.0)
                dm = max(dm, abs(v - old))
                row[j] = v
                acc += v
                c_new[j] += v
            r_new[i] = acc
            change = max(change, dm)
        r, r_new = r_new, r
        c, c_new = c_new, c
        if change < eps2:
            off = 0.0
            for i in range(n):
                off = max(off, abs(r[i] - 1.0), abs(c[i] - 1.0))
            if off < eps2:
                break
    return sweeps


@njit(cache=True, fastmath=True)
def log_sinkhorn(logk, eps2, max_inner):
    """Scale exp(logk) to a doubly stochastic matrix in the log domain.

    Each log-sum-exp subtracts its running maximum before exponentiating.
    Returns ``(p, sweeps)``; stops when no entry of p moves by ``eps2``.
    """
    n = logk.shape[0]
    f = np.zeros(n)
    g = np.zeros(n)
    p = np.full((n, n), 1.0 / n)
    colmax = np.empty(n)
    colsum = np.empty(n)
    sweeps = 0
    for it in range(max_inner):
        sweeps = it + 1
        for i in range(n):
            m = -np.inf
            for j in range(n):
                m = max(m, logk[i, j] + g[j])
            s = 0.0
            for j in range(n):
                s += math.exp(logk[i, j] + g[j] - m)
            f[i] = -(m + math.log(s))
        for j in range(n):
            colmax[j] = -np.inf
            colsum[j] = 0.0
        for i in range(n):
            for j in range(n):
                colmax[j] = max(colmax[j], logk[i, j] + f[i])
        for i in range(n):
            for j in range(n):
                colsum[j] += math.exp(logk[i, j] + f[i] - colmax[j])
        for j in range(n):
            g[j] = -(colmax[j] + math.log(colsum[j]))
        change = 0.0
        for i in range(n):
            for j in range(n):
                v = math.exp(logk[i, j] + f[i] + g[j])
                change = max(change, abs(v - p[i, j]))
                p[i, j] = v
        if change < eps2:
            break
    return p, sweeps
