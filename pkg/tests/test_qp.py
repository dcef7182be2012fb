"""Solver checks against closed forms and an active-set brute-force oracle."""

import itertools

import numpy as np
import pytest

from orlsim.qp import InfeasibleDetected, QpProblem, QpSettings, OperatorSplittingQp, solve_qp


def brute_force_active_set(P, q, A, l, u):
    """Enumerate active constraint sets and solve the KKT systems.

    Returns the best feasible stationary point: the global optimum for a
    convex QP with few constraints.  Test oracle only.
    """
    n, m = len(q), A.shape[0]
    best, best_val = None, np.inf
    rows = list(range(m))
    for r in range(0, m + 1):
        for subset in itertools.combinations(rows, r):
            for signs in itertools.product((0, 1), repeat=r):
                # 0: active at lower bound, 1: at upper
                Aa = A[list(subset)]
                ba = np.array(
                    [u[i] if sgn else l[i] for i, sgn in zip(subset, signs)]
                )
                if np.any(~np.isfinite(ba)):
                    continue
                K = np.block(
                    [[P, Aa.T], [Aa, np.zeros((r, r))]]
                )
                rhs = np.concatenate([-q, ba])
                try:
                    sol = np.linalg.solve(K, rhs)
                except np.linalg.LinAlgError:
                    continue
                x = sol[:n]
                res = A @ x
                if np.any(res < l - 1e-8) or np.any(res > u + 1e-8):
                    continue
                val = 0.5 * x @ P @ x + q @ x
                if val < best_val - 1e-12:
                    best_val, best = val, x
    return best


def test_unconstrained_quadratic(rng):
    b = rng.normal(size=5)
    res = solve_qp(np.eye(5), -b)
    assert res.status == "solved"
    assert np.max(np.abs(res.x - b)) < 1e-6


def test_scalar_active_bound():
    # min u^2 - 2u  s.t. u <= 0.5  ->  u = 0.5
    res = solve_qp(
        np.array([[2.0]]), np.array([-2.0]),
        A=np.array([[1.0]]), l=np.array([-np.inf]), u=np.array([0.5]),
    )
    assert res.status == "solved"
    assert res.x[0] == pytest.approx(0.5, abs=1e-6)


def test_equality_constraint():
    # min ||x||^2 s.t. x0 + x1 = 1
    res = solve_qp(
        2 * np.eye(2), np.zeros(2),
        A=np.array([[1.0, 1.0]]), l=np.array([1.0]), u=np.array([1.0]),
    )
    assert np.allclose(res.x, [0.5, 0.5], atol=1e-6)


def test_matches_active_set_oracle(rng):
    for trial in range(25):
        n = rng.integers(2, 7)
        m = rng.integers(1, 7)
        L = rng.normal(size=(n, n))
        P = L @ L.T + 0.5 * np.eye(n)
        q = rng.normal(size=n)
        A = rng.normal(size=(m, n))
        c = rng.uniform(0.5, 2.0, size=m)
        l = -c
        u = c * rng.uniform(0.5, 1.5, size=m)
        # tight residual tolerance so iterate accuracy reaches the 1e-6 bar
        res = solve_qp(P, q, A, l, u, settings=QpSettings(eps_abs=1e-9))
        assert res.status == "solved"
        x_ref = brute_force_active_set(P, q, A, l, u)
        assert x_ref is not None
        assert np.max(np.abs(res.x - x_ref)) < 1e-6


def test_solution_feasibility(rng):
    for _ in range(10):
        n, m = 8, 12
        L = rng.normal(size=(n, n))
        P = L @ L.T + 0.1 * np.eye(n)
        q = rng.normal(size=n)
        A = rng.normal(size=(m, n))
        l = rng.uniform(-2, -0.5, m)
        u = rng.uniform(0.5, 2, m)
        res = solve_qp(P, q, A, l, u)
        v = A @ res.x
        assert np.all(v >= l - 1e-5)
        assert np.all(v <= u + 1e-5)


def test_warm_start_resolve_fast(rng):
    n, m = 12, 16
    L = rng.normal(size=(n, n))
    P = L @ L.T + 0.1 * np.eye(n)
    q = rng.normal(size=n)
    A = rng.normal(size=(m, n))
    l = np.full(m, -1.0)
    u = np.full(m, 1.0)
    prob = QpProblem(P, q, A, l, u)
    solver = OperatorSplittingQp()
    first = solver.solve(prob)
    assert first.status == "solved"
    again = solver.solve(prob, x0=first.x, y0=first.y)
    assert again.status == "solved"
    assert again.iterations <= 5
    assert np.max(np.abs(again.x - first.x)) < 1e-5


def test_max_iterations_status():
    res = solve_qp(
        np.eye(2), np.array([1.0, 1.0]),
        A=np.eye(2), l=-np.ones(2), u=np.ones(2),
        settings=QpSettings(max_iterations=1),
    )
    assert res.status == "max_iterations"
    assert res.iterations == 1


def test_primal_infeasible_detected():
    # x >= 1 and x <= -1 simultaneously
    with pytest.raises(InfeasibleDetected):
        solve_qp(
            np.array([[1.0]]), np.array([0.0]),
            A=np.array([[1.0], [1.0]]),
            l=np.array([1.0, -np.inf]),
            u=np.array([np.inf, -1.0]),
        )


def test_dual_infeasible_detected():
    # unbounded descent direction: zero curvature along x with q < 0
    with pytest.raises(InfeasibleDetected):
        solve_qp(
            np.diag([0.0, 1.0]), np.array([-1.0, 0.0]),
            A=np.array([[0.0, 1.0]]), l=np.array([-1.0]), u=np.array([1.0]),
        )


def test_bound_validation():
    with pytest.raises(ValueError):
        QpProblem(np.eye(1), np.zeros(1), np.eye(1), np.array([1.0]), np.array([0.0]))
