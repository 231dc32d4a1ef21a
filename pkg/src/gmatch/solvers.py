"""Iterative graph matchers: FastPFP, Projected Gradient and FastGA.

All three start from the uniform matrix 11^T / (n n') and stop at the
first iteration whose residual max|X(t+1) - X(t)| drops below ``eps1``,
or after ``max_outer`` iterations.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from gmatch._kernels import log_sinkhorn
from gmatch.core import (
    MatchProblem,
    SoftAssignment,
    SolveReport,
    ValidationError,
    as_matrix,
    edge_error,
    total_error,
)
from gmatch.discretize import greedy_discretize
from gmatch.projection import (
    DEFAULT_EPS2,
    DEFAULT_MAX_INNER,
    doubly_stochastic_project,
    pad_slack,
    partial_ds_project,
)

DEGENERATE_MAX = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.5
    eps1: float = 1e-4
    max_outer: int = 300
    eps2: float = DEFAULT_EPS2
    max_inner: int = DEFAULT_MAX_INNER
    beta0: float = 0.5
    beta_rate: float = 1.075
    beta_max: float = 10.0
    rescale: bool = True
    carry_slack: bool = True
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ValidationError("eps1 and eps2 must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValidationError("max_outer and max_inner must be at least 1")
        if not (self.beta0 > 0 and self.beta_rate > 1 and self.beta_max >= self.beta0):
            raise ValidationError("need beta0 > 0, beta_rate > 1 and beta_max >= beta0")

    def as_dict(self) -> dict:
        return asdict(self)


def _initial(p: MatchProblem) -> np.ndarray:
    n, n_prime = p.shape
    return np.full((n, n_prime), 1.0 / (n * n_prime))


def _finish(p, x, name, residuals, objectives, t0, converged, degenerate=False):
    a = greedy_discretize(x)
    wall = time.perf_counter() - t0
    try:
        tot = total_error(p, a)
    except ValidationError:
        tot = float("nan")
    report = SolveReport(
        iterations=len(residuals),
        residuals=residuals,
        objective_trace=objectives,
        wall_time=wall,
        edge_error=edge_error(p, a),
        total_error=tot,
        converged=converged,
        degenerate=degenerate,
        solver=name,
    )
    return SoftAssignment(x), report


def fastpfp(p: MatchProblem, cfg: SolverConfig = SolverConfig(), callback=None):
    """Fast projected fixed-point matching.

    Iterates X <- (1 - alpha) X + alpha Pd(A X A' + lam K) and, unless
    ``cfg.rescale`` is off, divides X by its largest entry after every
    step.  Residuals are measured on the rescaled iterate.

    When n > n' the slack columns of the projected n x n matrix start at
    zero and, with ``cfg.carry_slack``, are kept from one outer iteration
    to the next; only the leading n' columns are overwritten by the
    gradient.  With ``carry_slack=False`` every step applies the
    stateless projection :func:`~gmatch.projection.partial_ds_project`.
    """
    A, Ap, K, lam = p.g.adjacency, p.g_prime.adjacency, p.affinity, p.lam
    n, n_prime = p.shape
    alpha = cfg.alpha
    t0 = time.perf_counter()
    x = _initial(p)
    y = np.zeros((n, n))
    residuals, objectives = [], []
    converged = degenerate = False
    for _ in range(cfg.max_outer):
        axa = A @ x @ Ap
        objectives.append(float(0.5 * np.vdot(x, axa) + lam * np.vdot(x, K)))
        if cfg.carry_slack:
            y[:, :n_prime] = axa + lam * K
            y = doubly_stochastic_project(y, cfg.eps2, cfg.max_inner)
            z = y[:, :n_prime]
        else:
            z = partial_ds_project(axa + lam * K, cfg.eps2, cfg.max_inner).x
        x_new = (1.0 - alpha) * x + alpha * z
        if cfg.rescale:
            top = x_new.max()
            if top <= DEGENERATE_MAX:
                degenerate = True
            else:
                x_new /= top
        res = float(np.abs(x_new - x).max())
        residuals.append(res)
        x = x_new
        if callback is not None:
            callback(len(residuals), x)
        if degenerate:
            break
        if res < cfg.eps1:
            converged = True
            break
    return _finish(p, x, "fastpfp", residuals, objectives, t0, converged, degenerate)


def projected_gradient(p: MatchProblem, cfg: SolverConfig = SolverConfig(), callback=None):
    """Projected gradient ascent X <- Pd(X + alpha (A X A' + lam K)).

    There is no rescaling, so when the inner projection is cut off before
    reaching the polytope the surplus mass compounds from one step to the
    next.  A non-finite step ends the run with ``report.degenerate`` set.
    """
    A, Ap, K, lam = p.g.adjacency, p.g_prime.adjacency, p.affinity, p.lam
    t0 = time.perf_counter()
    x = _initial(p)
    residuals, objectives = [], []
    converged = degenerate = False
    for _ in range(cfg.max_outer):
        axa = A @ x @ Ap
        objectives.append(float(0.5 * np.vdot(x, axa) + lam * np.vdot(x, K)))
        step = x + cfg.alpha * (axa + lam * K)
        if not np.isfinite(step).all():
            degenerate = True
            break
        x_new = partial_ds_project(step, cfg.eps2, cfg.max_inner).x
        if not np.isfinite(x_new).all():
            degenerate = True
            break
        res = float(np.abs(x_new - x).max())
        residuals.append(res)
        x = x_new
        if callback is not None:
            callback(len(residuals), x)
        if res < cfg.eps1:
            converged = True
            break
    return _finish(p, x, "pg", residuals, objectives, t0, converged, degenerate)


def fastga_exponent(p: MatchProblem, x, beta: float) -> np.ndarray:
    """beta * (A X A' + lam K): the softassign exponent in O(n^3).

    With compatibilities C[a, i, b, j] = A[i, j] A'[a, b] the O(n^4) sum
    Q[i, a] = sum_{j, b} X[j, b] C[a, i, b, j] collapses to (A X A')[i, a].
    """
    x = np.asarray(x, dtype=np.float64)
    return beta * (p.g.adjacency @ x @ p.g_prime.adjacency + p.lam * p.affinity)


def stable_exp(z) -> tuple[np.ndarray, float]:
    """exp(z - max z) and the subtracted maximum."""
    z = np.asarray(z, dtype=np.float64)
    top = float(z.max()) if z.size else 0.0
    return np.exp(z - top), top


def fastga(p: MatchProblem, cfg: SolverConfig = SolverConfig(), callback=None):
    """Graduated assignment with the O(n^3) product-compatibility update.

    Each step raises beta by ``beta_rate`` and replaces X with the
    Sinkhorn-balanced exp(beta (A X A' + lam K)), slack columns taking
    exponent 0.  Balancing runs in the log domain.
    """
    n, n_prime = p.shape
    A, Ap, K, lam = p.g.adjacency, p.g_prime.adjacency, p.affinity, p.lam
    t0 = time.perf_counter()
    x = _initial(p)
    residuals, objectives = [], []
    converged = False
    beta = cfg.beta0
    while len(residuals) < cfg.max_outer and beta <= cfg.beta_max:
        axa = A @ x @ Ap
        objectives.append(float(0.5 * np.vdot(x, axa) + lam * np.vdot(x, K)))
        logk = pad_slack(beta * (axa + lam * K))
        balanced, _ = log_sinkhorn(logk, cfg.eps2, cfg.max_inner)
        x_new = np.ascontiguousarray(balanced[:, :n_prime])
        res = float(np.abs(x_new - x).max())
        residuals.append(res)
        x = x_new
        if callback is not None:
            callback(len(residuals), x)
        beta *= cfg.beta_rate
        if res < cfg.eps1:
            converged = True
            break
    return _finish(p, x, "fastga", residuals, objectives, t0, converged)


SOLVERS = {"fastpfp": fastpfp, "fastga": fastga, "pg": projected_gradient}


def solve(p: MatchProblem, solver: str = "fastpfp", cfg: SolverConfig = SolverConfig(), callback=None):
    """Run a solver by name.  ``callback(t, x)`` sees every iterate."""
    try:
        fn = SOLVERS[solver]
    except KeyError:
        raise ValidationError(f"unknown solver {solver!r}; choose from {sorted(SOLVERS)}") from None
    return fn(p, cfg, callback)


def _spectral_norm(a: np.ndarray, tol: float, max_iter: int) -> float:
    if not a.any():
        return 0.0
    v = np.random.default_rng(0).standard_normal(a.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = a @ v
        new = float(np.linalg.norm(w))
        if new == 0.0:
            # start vector fell in the null space; restart off-axis
            v = np.ones(a.shape[0]) / np.sqrt(a.shape[0])
            continue
        v = w / new
        if abs(new - est) <= tol * new:
            return new
        est = new
    return est


def spectral_norm_bound(a, a_prime, tol: float = 1e-8, max_iter: int = 100_000) -> float:
    """||A kron A'||_2 = ||A||_2 ||A'||_2, each factor by power iteration."""
    a = as_matrix(a, "a")
    a_prime = as_matrix(a_prime, "a_prime")
    return _spectral_norm(a, tol, max_iter) * _spectral_norm(a_prime, tol, max_iter)
