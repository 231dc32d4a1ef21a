import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmatch import (
    Graph,
    MatchProblem,
    SoftAssignment,
    SolverConfig,
    ValidationError,
    edge_error,
    fastga,
    fastpfp,
    greedy_discretize,
    projected_gradient,
    solve,
    spectral_norm_bound,
)
from gmatch.solvers import fastga_exponent, stable_exp
from gmatch.synthetic import case_instance, random_graph
from oracles import fastga_quadruple, injections, random_problem, random_symmetric


def structural(a, a_prime):
    g, gp = Graph(a), Graph(a_prime)
    return MatchProblem(g, gp, np.zeros((g.n, gp.n)), 0.0)


# --- config -------------------------------------------------------------------

@pytest.mark.parametrize(
    "kw",
    [dict(alpha=1.5), dict(alpha=-0.1), dict(eps1=0), dict(eps2=-1), dict(max_outer=0),
     dict(max_inner=0), dict(beta0=0), dict(beta_rate=1.0), dict(beta0=5, beta_max=1)],
)
def test_config_validation(kw):
    with pytest.raises(ValidationError):
        SolverConfig(**kw)


def test_unknown_solver():
    p = structural(np.zeros((1, 1)), np.zeros((1, 1)))
    with pytest.raises(ValidationError, match="unknown solver"):
        solve(p, "hungarian")


# --- trivial instances ----------------------------------------------------------

@pytest.mark.parametrize("fn", [fastpfp, projected_gradient, fastga])
def test_single_node(fn):
    p = structural(np.zeros((1, 1)), np.zeros((1, 1)))
    soft, report = fn(p)
    np.testing.assert_allclose(soft.x, [[1.0]])
    assert report.iterations <= 2 and report.converged
    assert report.edge_error == 0.0


@pytest.mark.parametrize("fn", [fastpfp, fastga])
@pytest.mark.parametrize("n", [3, 5, 8])
def test_self_match_reaches_zero_error(fn, n):
    rng = np.random.default_rng(n)
    a = np.triu(rng.random((n, n)), 1)
    a = a + a.T
    p = structural(a, a)
    if n <= 6:
        assert min(edge_error(p, q) for q in injections(n, n)) == 0.0
    _, report = fn(p)
    assert report.edge_error == 0.0


def test_fastpfp_recovers_planted_isomorphism():
    inst = case_instance("iso", 100, seed=0)
    soft, report = fastpfp(inst.problem)
    a = greedy_discretize(soft.x)
    assert edge_error(inst.problem, a) == edge_error(inst.problem, inst.ground_truth) == 0.0
    assert report.converged


def test_pg_completes_on_isomorphic_pair():
    inst = case_instance("iso", 100, seed=0)
    soft, report = projected_gradient(inst.problem)
    assert report.iterations >= 1 and np.isfinite(report.edge_error)


# --- report contract ---------------------------------------------------------------

@pytest.mark.parametrize("name", ["fastpfp", "fastga", "pg"])
def test_report_shape_and_stopping_rule(name):
    p = random_problem(np.random.default_rng(1), 7, 5)
    cfg = SolverConfig(max_outer=40)
    soft, report = solve(p, name, cfg)
    assert report.solver == name
    assert len(report.residuals) == len(report.objective_trace) == report.iterations >= 1
    assert report.wall_time >= 0
    res = report.residuals
    assert all(r >= cfg.eps1 for r in res[:-1])
    if report.converged:
        assert res[-1] < cfg.eps1
    elif name != "fastga":
        assert report.iterations == cfg.max_outer or report.degenerate


@pytest.mark.parametrize("name", ["fastpfp", "fastga", "pg"])
def test_deterministic(name):
    p = random_problem(np.random.default_rng(2), 9, 6)
    s1, r1 = solve(p, name)
    s2, r2 = solve(p, name)
    np.testing.assert_array_equal(s1.x, s2.x)
    assert r1.residuals == r2.residuals and r1.objective_trace == r2.objective_trace
    assert (r1.iterations, r1.edge_error, r1.total_error) == (r2.iterations, r2.edge_error, r2.total_error)


def test_callback_sees_every_iterate():
    p = random_problem(np.random.default_rng(3), 6, 4)
    seen = []
    _, report = fastpfp(p, callback=lambda t, x: seen.append((t, x.copy())))
    assert [t for t, _ in seen] == list(range(1, report.iterations + 1))


def test_zero_graphs_stay_uniform():
    p = structural(np.zeros((4, 4)), np.zeros((1, 1)))
    soft, report = fastpfp(p)
    assert not report.degenerate
    np.testing.assert_allclose(soft.x, np.ones((4, 1)))


def test_degenerate_guard(monkeypatch):
    import gmatch.solvers as solvers

    monkeypatch.setattr(solvers, "partial_ds_project", lambda x, *a: SoftAssignment(np.zeros_like(x)))
    p = structural(np.zeros((3, 3)), np.zeros((2, 2)))
    soft, report = fastpfp(p, SolverConfig(alpha=1.0, carry_slack=False))
    assert report.degenerate and not report.converged
    assert report.iterations == 1
    assert not soft.x.any()


def _raw_iterates(p, alpha=0.5):
    cfg = SolverConfig(alpha=alpha, rescale=False, carry_slack=False, eps2=1e-9, max_inner=100_000, max_outer=40)
    xs = []
    fastpfp(p, cfg, callback=lambda t, x: xs.append(x.copy()))
    return xs


@pytest.mark.xfail(strict=True, reason="the uniform start 11^T/(nn') has column sums 1/n', outside the polytope")
def test_rescale_off_iterates_are_feasible():
    p = random_problem(np.random.default_rng(4), 6, 4)
    assert all(SoftAssignment(x).is_feasible() for x in _raw_iterates(p))


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0])
def test_rescale_off_iterates_mix_start_with_feasible_points(alpha):
    # X(t) = (1 - a)^t X(0) + (1 - (1 - a)^t) * (convex combination of Pd outputs)
    rng = np.random.default_rng(4)
    for n, m in [(5, 5), (6, 4), (8, 3)]:
        p = random_problem(rng, n, m)
        x0 = np.full((n, m), 1.0 / (n * m))
        for t, x in enumerate(_raw_iterates(p, alpha), 1):
            w = (1 - alpha) ** t
            assert SoftAssignment((x - w * x0) / (1 - w)).is_feasible()


def test_pg_iterates_feasible_on_small_instances():
    rng = np.random.default_rng(5)
    for n, m in [(4, 4), (6, 3)]:
        p = random_problem(rng, n, m)
        cfg = SolverConfig(eps2=1e-9, max_inner=100_000, max_outer=30, alpha=0.1)
        xs = []
        projected_gradient(p, cfg, callback=lambda t, x: xs.append(x.copy()))
        assert all(SoftAssignment(x).is_feasible() for x in xs)


def test_fastpfp_rescaled_output_has_unit_max():
    p = random_problem(np.random.default_rng(6), 6, 4)
    soft, _ = fastpfp(p)
    assert soft.x.max() == pytest.approx(1.0)


# --- FastGA internals -------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_fastga_reduction_matches_quadruple_loop(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    m = int(rng.integers(1, n + 1))
    p = structural(random_symmetric(rng, n), random_symmetric(rng, m))
    x = rng.random((n, m))
    beta = rng.uniform(0.1, 2)
    np.testing.assert_allclose(np.exp(fastga_exponent(p, x, beta)), fastga_quadruple(p.g.adjacency, p.g_prime.adjacency, x, beta), rtol=1e-10)


def test_stable_exp_no_overflow():
    e, top = stable_exp(np.array([1000.0, 999.0]))
    assert top == 1000.0
    np.testing.assert_allclose(e, [1.0, np.exp(-1.0)])


def test_fastga_output_is_balanced():
    p = random_problem(np.random.default_rng(7), 6, 4)
    soft, _ = fastga(p, SolverConfig(eps2=1e-10, max_inner=10_000))
    assert soft.is_feasible(1e-8)


# --- spectral norm -----------------------------------------------------------------

def test_spectral_norm_examples():
    assert spectral_norm_bound(np.eye(3), np.eye(2)) == pytest.approx(1.0)
    assert spectral_norm_bound(2 * np.eye(3), 3 * np.eye(2)) == pytest.approx(6.0)
    assert spectral_norm_bound(np.zeros((3, 3)), np.eye(2)) == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_spectral_norm_matches_eigensolve(seed):
    rng = np.random.default_rng(seed)
    a, b = random_symmetric(rng, 5, zero_diag=False), random_symmetric(rng, 5, zero_diag=False)
    want = np.abs(np.linalg.eigvalsh(a)).max() * np.abs(np.linalg.eigvalsh(b)).max()
    assert spectral_norm_bound(a, b) == pytest.approx(want, rel=1e-6)
    np.testing.assert_allclose(np.linalg.norm(np.kron(a, b), 2), want, rtol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_linear_rate_on_random_scaled_instances(n, seed):
    # raw recursion with ||A kron A'|| = 0.5 contracts at 1 - a + a * 0.5
    g = random_graph(n, 0.5, seed=seed)
    perm = np.random.default_rng(seed).permutation(n)
    a = g.adjacency
    s = spectral_norm_bound(a, a)
    if s == 0:
        return
    a = a * np.sqrt(0.5 / s)
    p = structural(a, a[np.ix_(perm, perm)])
    cfg = SolverConfig(rescale=False, carry_slack=False, eps1=1e-13, eps2=1e-14, max_inner=200_000, max_outer=200)
    xs = []
    fastpfp(p, cfg, callback=lambda t, x: xs.append(x.copy()))
    diffs = [np.linalg.norm(xs[t + 1] - xs[t]) for t in range(len(xs) - 1)]
    for t in range(5, len(diffs)):
        if diffs[t - 1] < 1e-12:
            break
        assert diffs[t] / diffs[t - 1] <= 0.80
