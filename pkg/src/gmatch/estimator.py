"""scikit-learn style front end for the matchers."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from gmatch.core import Assignment, Graph, make_problem
from gmatch.discretize import greedy_discretize
from gmatch.solvers import SOLVERS, SolverConfig, solve


def check_graph(g, attributes=None) -> Graph:
    """Accept a Graph or an adjacency array (plus optional attributes)."""
    if isinstance(g, Graph):
        if attributes is not None:
            return Graph(g.adjacency, attributes)
        return g
    return Graph(np.asarray(g, dtype=np.float64), attributes)


class GraphMatcher(BaseEstimator):
    """Match the nodes of two undirected graphs.

    Parameters mirror :class:`gmatch.solvers.SolverConfig`; ``lam``
    weights the node-attribute term.  After :meth:`fit`:

    ``soft_assignment_``
        relaxed n x n' solution (host graph = the larger one),
    ``assignment_``
        node correspondence from the *second* graph passed to ``fit`` into
        the first (or the reverse when the first is the smaller graph, see
        ``swapped_``),
    ``report_``
        the :class:`~gmatch.core.SolveReport`.

    Examples
    --------
    >>> import numpy as np
    >>> a = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], dtype=float)
    >>> m = GraphMatcher().fit(a, a[[2, 0, 1]][:, [2, 0, 1]])
    >>> m.predict().tolist()
    [2, 0, 1]
    """

    def __init__(
        self,
        solver="fastpfp",
        alpha=0.5,
        lam=1.0,
        eps1=1e-4,
        max_outer=300,
        eps2=1e-4,
        max_inner=300,
        beta0=0.5,
        beta_rate=1.075,
        beta_max=10.0,
        rescale=True,
    ):
        self.solver = solver
        self.alpha = alpha
        self.lam = lam
        self.eps1 = eps1
        self.max_outer = max_outer
        self.eps2 = eps2
        self.max_inner = max_inner
        self.beta0 = beta0
        self.beta_rate = beta_rate
        self.beta_max = beta_max
        self.rescale = rescale

    def _config(self) -> SolverConfig:
        return SolverConfig(
            alpha=self.alpha,
            eps1=self.eps1,
            max_outer=self.max_outer,
            eps2=self.eps2,
            max_inner=self.max_inner,
            beta0=self.beta0,
            beta_rate=self.beta_rate,
            beta_max=self.beta_max,
            rescale=self.rescale,
        )

    def fit(self, g, g_prime, attributes=None, attributes_prime=None):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {sorted(SOLVERS)}")
        g = check_graph(g, attributes)
        g_prime = check_graph(g_prime, attributes_prime)
        self.problem_, self.swapped_ = make_problem(g, g_prime, self.lam)
        soft, self.report_ = solve(self.problem_, self.solver, self._config())
        self.soft_assignment_ = soft.x
        self.assignment_ = self._discretize()
        return self

    def _discretize(self) -> Assignment:
        return greedy_discretize(self.soft_assignment_)

    def predict(self, g=None, g_prime=None) -> np.ndarray:
        """Correspondence map; refits first if graphs are given."""
        if g is not None:
            self.fit(g, g_prime)
        check_is_fitted(self, "assignment_")
        return np.array(self.assignment_.map)

    def fit_predict(self, g, g_prime, attributes=None, attributes_prime=None) -> np.ndarray:
        return self.fit(g, g_prime, attributes, attributes_prime).predict()

    def score(self, g=None, g_prime=None) -> float:
        """Negative total matching error of the fitted (or refitted) solution."""
        if g is not None:
            self.fit(g, g_prime)
        check_is_fitted(self, "report_")
        return -self.report_.total_error
