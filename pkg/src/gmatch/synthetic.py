"""Random-graph matching instances with a planted ground truth.

Randomness comes from numpy's PCG64 bit generator (``np.random.default_rng``).
Draw order is part of the contract, so an instance is fully determined by
its recipe:

1. ``random_graph``: one uniform draw per upper-triangle pair (i < j),
   row-major; the edge exists when the draw is below ``density``.
2. ``make_instance``: a permutation of range(n) whose first
   floor(deletion_fraction * n) entries are the deleted nodes; then
   ``edit_edges`` on the surviving subgraph (survivors kept in
   increasing order); then a permutation of the survivors that fixes the
   labels of g_prime.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gmatch.core import Assignment, Graph, MatchProblem, ValidationError

RNG_NAME = "numpy-pcg64"
GENERATOR_VERSION = 1


@dataclass(frozen=True)
class Recipe:
    n: int
    density: float
    edits: int
    deletion_fraction: float
    seed: int

    def __str__(self):
        return (
            f"n={self.n};density={self.density:g};edits={self.edits};"
            f"deletion={self.deletion_fraction:g};seed={self.seed};"
            f"rng={RNG_NAME}-v{GENERATOR_VERSION}"
        )


@dataclass(frozen=True, eq=False)
class SyntheticInstance:
    problem: MatchProblem
    ground_truth: Assignment
    recipe: Recipe


def _upper_pairs(n):
    return np.triu_indices(n, k=1)


def _random_adjacency(n, density, rng):
    iu, ju = _upper_pairs(n)
    draws = rng.random(iu.size)
    adj = np.zeros((n, n))
    adj[iu, ju] = draws < density
    return adj + adj.T


def random_graph(n: int, density: float = 0.5, seed: int = 0) -> Graph:
    """Unweighted graph, each of the n(n-1)/2 possible edges present with prob. ``density``."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    if not 0.0 < density < 1.0:
        raise ValidationError(f"density must lie in (0, 1), got {density}")
    return Graph(_random_adjacency(n, density, np.random.default_rng(seed)))


def _flip(adj, k, rng):
    n = adj.shape[0]
    iu, ju = _upper_pairs(n)
    if not 0 <= k <= iu.size:
        raise ValidationError(f"cannot edit {k} edges of a {n}-node graph ({iu.size} pairs)")
    pick = rng.choice(iu.size, size=k, replace=False)
    out = adj.copy()
    i, j = iu[pick], ju[pick]
    out[i, j] = 1.0 - out[i, j]
    out[j, i] = out[i, j]
    return out


def edit_edges(g: Graph, k: int, seed: int = 0) -> Graph:
    """Flip ``k`` distinct node pairs (edge <-> non-edge), keeping symmetry."""
    return Graph(_flip(g.adjacency, k, np.random.default_rng(seed)), g.attributes)


def make_instance(
    n: int, density: float = 0.5, edits: int = 0, deletion_fraction: float = 0.0, seed: int = 0
) -> SyntheticInstance:
    """Host graph G plus a relabelled, optionally pruned and edited copy G'.

    ``ground_truth.map[j]`` is the node of G that node j of G' came from.
    The problem is purely structural (lambda = 0, zero affinity).
    """
    if not 0.0 <= deletion_fraction < 1.0:
        raise ValidationError(f"deletion_fraction must lie in [0, 1), got {deletion_fraction}")
    if edits < 0:
        raise ValidationError("edits must be nonnegative")
    recipe = Recipe(n, density, edits, deletion_fraction, seed)
    rng = np.random.default_rng(seed)
    if n < 1:
        raise ValidationError("n must be at least 1")
    if not 0.0 < density < 1.0:
        raise ValidationError(f"density must lie in (0, 1), got {density}")
    adj = _random_adjacency(n, density, rng)

    n_del = int(np.floor(deletion_fraction * n))
    order = rng.permutation(n)
    survivors = np.sort(order[n_del:])
    sub = _flip(adj[np.ix_(survivors, survivors)], edits, rng)
    relabel = rng.permutation(survivors.size)
    sub = sub[np.ix_(relabel, relabel)]

    g = Graph(adj)
    g_prime = Graph(sub)
    problem = MatchProblem(g, g_prime, np.zeros((n, survivors.size)), 0.0)
    return SyntheticInstance(problem, Assignment(survivors[relabel], n), recipe)


CASES = {
    "iso": dict(edits=False, deletion_fraction=0.0),
    "edit": dict(edits=True, deletion_fraction=0.0),
    "subiso": dict(edits=False, deletion_fraction=0.1),
    "subiso-edit": dict(edits=True, deletion_fraction=0.1),
}


def case_instance(case: str, n: int, seed: int, density: float = 0.5) -> SyntheticInstance:
    """One of the four benchmark cases; edit cases flip n pairs."""
    try:
        params = CASES[case]
    except KeyError:
        raise ValidationError(f"unknown case {case!r}; choose from {sorted(CASES)}") from None
    edits = n if params["edits"] else 0
    return make_instance(n, density, edits, params["deletion_fraction"], seed)
