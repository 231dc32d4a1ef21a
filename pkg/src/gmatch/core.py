"""Domain types, the relaxed matching objective and error metrics.

Every solver maximizes

    f(X) = 1/2 tr(X^T A X A') + lam * tr(X^T K)

over n x n' matrices X with n >= n'.  On partial permutations this is
equivalent to minimizing 1/2 ||A - X A' X^T||_F^2 + lam ||B - X B'||_F^2
with K = B B'^T.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

TOL_FEAS = 1e-6


class ValidationError(ValueError):
    """Raised when a graph, problem or assignment violates its invariants."""


def as_matrix(a, name: str = "matrix", ndim: int = 2) -> np.ndarray:
    """Return ``a`` as a C-contiguous float64 array, rejecting NaN/inf."""
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise ValidationError(f"{name} has a non-finite entry at {tuple(int(i) for i in bad)}")
    return arr


def check_symmetric(a: np.ndarray, name: str = "adjacency") -> None:
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    diff = a != a.T
    if diff.any():
        i, j = np.argwhere(diff)[0]
        raise ValidationError(
            f"{name} is not symmetric: [{i}][{j}]={a[i, j]!r} but [{j}][{i}]={a[j, i]!r}"
        )


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph with optional node attributes."""

    adjacency: np.ndarray
    attributes: Optional[np.ndarray] = None

    def __post_init__(self):
        adj = as_matrix(self.adjacency, "adjacency")
        check_symmetric(adj)
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        if self.attributes is not None:
            attrs = as_matrix(self.attributes, "attributes")
            if attrs.shape[0] != adj.shape[0]:
                raise ValidationError(
                    f"attributes has {attrs.shape[0]} rows for a graph of {adj.shape[0]} nodes"
                )
            attrs.setflags(write=False)
            object.__setattr__(self, "attributes", attrs)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def k(self) -> int:
        return 0 if self.attributes is None else self.attributes.shape[1]


@dataclass(frozen=True, eq=False)
class MatchProblem:
    g: Graph
    g_prime: Graph
    affinity: np.ndarray
    lam: float = 1.0

    def __post_init__(self):
        if self.g.n < self.g_prime.n:
            raise ValidationError("host graph must be at least as large as g_prime (n >= n')")
        aff = as_matrix(self.affinity, "affinity")
        if aff.shape != (self.g.n, self.g_prime.n):
            raise ValidationError(
                f"affinity must be {self.g.n}x{self.g_prime.n}, got {aff.shape}"
            )
        if not self.lam >= 0:
            raise ValidationError(f"lambda must be nonnegative, got {self.lam}")
        aff.setflags(write=False)
        object.__setattr__(self, "affinity", aff)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n(self) -> int:
        return self.g.n

    @property
    def n_prime(self) -> int:
        return self.g_prime.n

    @property
    def shape(self) -> tuple[int, int]:
        return self.g.n, self.g_prime.n


@dataclass(frozen=True, eq=False)
class SoftAssignment:
    """A relaxed n x n' assignment matrix.

    Feasibility is not enforced at construction: solver outputs may be
    rescaled (FastPFP divides by max(X)), so use :meth:`is_feasible`.
    """

    x: np.ndarray

    def violation(self) -> float:
        """Largest violation of the partial doubly stochastic constraints."""
        x = self.x
        if x.size == 0:
            return 0.0
        return float(
            max(
                np.abs(x.sum(axis=0) - 1.0).max(),
                max(x.sum(axis=1).max() - 1.0, 0.0),
                max(-x.min(), 0.0),
            )
        )

    def is_feasible(self, tol: float = TOL_FEAS) -> bool:
        return self.violation() <= tol


@dataclass(frozen=True, eq=False)
class Assignment:
    """Injective map from the n' nodes of g_prime into the n nodes of g.

    ``map[j] = i`` matches node j of g_prime to node i of g.
    """

    map: np.ndarray
    n: int

    def __post_init__(self):
        m = np.asarray(self.map, dtype=np.int64).reshape(-1)
        if m.size and (m.min() < 0 or m.max() >= self.n):
            raise ValidationError(f"assignment indices must lie in [0, {self.n})")
        if np.unique(m).size != m.size:
            raise ValidationError("assignment is not injective")
        m.setflags(write=False)
        object.__setattr__(self, "map", m)
        object.__setattr__(self, "n", int(self.n))

    @property
    def n_prime(self) -> int:
        return self.map.size

    def to_matrix(self) -> np.ndarray:
        p = np.zeros((self.n, self.n_prime))
        p[self.map, np.arange(self.n_prime)] = 1.0
        return p

    @classmethod
    def from_matrix(cls, p) -> "Assignment":
        p = np.asarray(p)
        n, n_prime = p.shape
        if not np.isin(p, (0, 1)).all():
            raise ValidationError("assignment matrix must be 0/1")
        if not (p.sum(axis=0) == 1).all() or (p.sum(axis=1) > 1).any():
            raise ValidationError("matrix is not a partial permutation")
        return cls(np.argmax(p, axis=0), n)

    def transpose(self) -> "Assignment":
        """Inverse map, for n == n'.  Used to undo a host/guest swap."""
        if self.n != self.n_prime:
            raise ValidationError("only square assignments can be transposed")
        inv = np.empty(self.n, dtype=np.int64)
        inv[self.map] = np.arange(self.n)
        return Assignment(inv, self.n)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.map, other.map)

    def __hash__(self):
        return hash((self.n, self.map.tobytes()))


@dataclass
class SolveReport:
    iterations: int
    residuals: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)
    wall_time: float = 0.0
    edge_error: float = float("nan")
    total_error: float = float("nan")
    excess_error: Optional[float] = None
    converged: bool = False
    degenerate: bool = False
    solver: str = ""

    def __post_init__(self):
        if len(self.residuals) != self.iterations:
            raise ValidationError("residuals must have one entry per iteration")
        if self.wall_time < 0:
            raise ValidationError("wall_time must be nonnegative")


def make_problem(g: Graph, g_prime: Graph, lam: float = 1.0) -> tuple[MatchProblem, bool]:
    """Order the pair so the host graph is the larger one and build K = B B'^T.

    Returns ``(problem, swapped)``; when ``swapped`` is true the caller
    must map the resulting assignment back (see :meth:`Assignment.transpose`).
    """
    if g.attributes is not None and g_prime.attributes is not None and g.k != g_prime.k:
        raise ValidationError(f"attribute dimensions differ: {g.k} vs {g_prime.k}")
    swapped = g.n < g_prime.n
    if swapped:
        g, g_prime = g_prime, g
    if g.attributes is not None and g_prime.attributes is not None:
        affinity = g.attributes @ g_prime.attributes.T
    else:
        affinity = np.zeros((g.n, g_prime.n))
    return MatchProblem(g, g_prime, affinity, lam), swapped


def _check_x(p: MatchProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != p.shape:
        raise ValidationError(f"expected a {p.n}x{p.n_prime} matrix, got {x.shape}")
    return x


def objective(p: MatchProblem, x) -> float:
    x = _check_x(p, x)
    axa = p.g.adjacency @ x @ p.g_prime.adjacency
    return float(0.5 * np.vdot(x, axa) + p.lam * np.vdot(x, p.affinity))


def gradient(p: MatchProblem, x) -> np.ndarray:
    x = _check_x(p, x)
    return p.g.adjacency @ x @ p.g_prime.adjacency + p.lam * p.affinity


def _check_assignment(p: MatchProblem, a: Assignment) -> None:
    if a.n != p.n or a.n_prime != p.n_prime:
        raise ValidationError(
            f"assignment is {a.n}x{a.n_prime} but problem is {p.n}x{p.n_prime}"
        )


def edge_error(p: MatchProblem, a: Assignment) -> float:
    """||A - P A' P^T||_F^2 for the partial permutation P of ``a``."""
    _check_assignment(p, a)
    A = p.g.adjacency
    m = a.map
    # P A' P^T equals A' scattered onto rows/cols m and zero elsewhere
    inner = A[np.ix_(m, m)] - p.g_prime.adjacency
    return float(np.sum(A * A) - np.sum(A[np.ix_(m, m)] ** 2) + np.sum(inner * inner))


def total_error(p: MatchProblem, a: Assignment) -> float:
    """1/2 ||A - P A' P^T||_F^2 + lam ||B - P B'||_F^2."""
    _check_assignment(p, a)
    err = 0.5 * edge_error(p, a)
    if p.lam == 0:
        return err
    B, Bp = p.g.attributes, p.g_prime.attributes
    if B is None or Bp is None:
        if np.any(p.affinity):
            raise ValidationError("total_error with lambda > 0 needs attributes on both graphs")
        return err
    PBp = np.zeros_like(B)
    PBp[a.map] = Bp
    return float(err + p.lam * np.sum((B - PBp) ** 2))


def excess_error(p: MatchProblem, a: Assignment, ground_truth: Assignment) -> float:
    """Edge error of ``a`` minus that of the planted matching; may be negative."""
    return edge_error(p, a) - edge_error(p, ground_truth)
