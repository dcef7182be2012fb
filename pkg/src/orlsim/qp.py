"""First-order operator-splitting solver for box-constrained QPs.

Solves

    minimize    1/2 x^T P x + q^T x
    subject to  l <= A x <= u

by ADMM with over-relaxation: alternating a regularized KKT solve with a
projection onto the constraint interval and scaled dual updates.  The
penalty starts at rho = 0.1 (equality rows stiffened 1000x) and is
rebalanced against the primal/dual residual ratio every 25 iterations;
the dense KKT factorization is reused between rebalances, which makes
warm-started re-solves nearly free.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve


class InfeasibleDetected(Exception):
    """A divergence certificate of primal or dual infeasibility was found."""


@dataclass
class QpProblem:
    P: np.ndarray
    q: np.ndarray
    A: np.ndarray
    l: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.q = np.asarray(self.q, dtype=float).reshape(-1)
        self.A = np.asarray(self.A, dtype=float).reshape(-1, self.q.size)
        m = self.A.shape[0]
        self.l = np.asarray(self.l, dtype=float).reshape(m)
        self.u = np.asarray(self.u, dtype=float).reshape(m)
        if np.any(self.l > self.u + 1e-12):
            raise ValueError("constraint bounds must satisfy l <= u")


@dataclass
class QpResult:
    x: np.ndarray
    y: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    status: str  # "solved" | "max_iterations"
    solve_time: float


@dataclass
class QpSettings:
    rho: float = 0.1
    sigma: float = 1e-6
    alpha: float = 1.6
    eps_abs: float = 1e-6
    eps_rel: float = 0.0
    max_iterations: int = 4000
    adapt_interval: int = 25
    adapt_threshold: float = 5.0
    eps_infeasible: float = 1e-8
    check_interval: int = 3  # residual checks: every iter through 5, then spaced


class OperatorSplittingQp:
    """Reusable solver instance; owns the KKT factorization and rho state."""

    def __init__(self, settings: QpSettings | None = None):
        self.settings = settings or QpSettings()
        self._rho_vec = None
        self._factor = None
        self._shape = None

    def _rho_for(self, prob: QpProblem) -> np.ndarray:
        eq = prob.u - prob.l < 1e-12
        rho = np.full(prob.A.shape[0], self.settings.rho)
        rho[eq] *= 1e3
        return rho

    def _factorize(self, prob: QpProblem, rho_vec: np.ndarray):
        # Schur-complement form of the regularized KKT system: the n x n
        # matrix P + sigma I + A^T diag(rho) A is SPD, so one Cholesky per
        # rho change replaces an (n+m) LU
        n = prob.q.size
        M = prob.P + self.settings.sigma * np.eye(n)
        if prob.A.shape[0]:
            M = M + (prob.A.T * rho_vec) @ prob.A
        self._factor = cho_factor(M)
        self._shape = (n, prob.A.shape[0])

    def solve(self, prob: QpProblem, x0=None, y0=None) -> QpResult:
        t0 = time.perf_counter()
        s = self.settings
        n, m = prob.q.size, prob.A.shape[0]
        x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
        y = np.zeros(m) if y0 is None else np.asarray(y0, dtype=float).copy()
        z = np.clip(prob.A @ x, prob.l, prob.u)

        rho = self._rho_for(prob)
        self._factorize(prob, rho)

        r_prim = r_dual = np.inf
        status = "max_iterations"
        it = 0
        for it in range(1, s.max_iterations + 1):
            x_prev, z_prev, y_prev = x, z, y
            rhs = s.sigma * x - prob.q
            if m:
                rhs = rhs + prob.A.T @ (rho * z - y)
            x_tilde = cho_solve(self._factor, rhs)
            z_tilde = prob.A @ x_tilde if m else np.zeros(0)

            x = s.alpha * x_tilde + (1.0 - s.alpha) * x_prev
            z_relaxed = s.alpha * z_tilde + (1.0 - s.alpha) * z_prev
            z = np.clip(z_relaxed + y / rho, prob.l, prob.u)
            y = y + rho * (z_relaxed - z)

            if it > 5 and it % s.check_interval and it % s.adapt_interval:
                continue

            Ax = prob.A @ x
            Px = prob.P @ x
            Aty = prob.A.T @ y if m else np.zeros(n)
            r_prim = np.max(np.abs(Ax - z)) if m else 0.0
            r_dual = np.max(np.abs(Px + prob.q + Aty))
            eps_prim = s.eps_abs + s.eps_rel * max(
                np.max(np.abs(Ax)) if m else 0.0, np.max(np.abs(z)) if m else 0.0
            )
            eps_dual = s.eps_abs + s.eps_rel * max(
                np.max(np.abs(Px)), np.max(np.abs(prob.q)),
                np.max(np.abs(Aty)) if m else 0.0,
            )
            if r_prim <= eps_prim and r_dual <= eps_dual:
                status = "solved"
                break

            self._check_certificates(prob, x - x_prev, y - y_prev)

            if it % s.adapt_interval == 0 and m:
                scale_p = max(np.max(np.abs(Ax)), np.max(np.abs(z)), 1e-12)
                scale_d = max(
                    np.max(np.abs(Px)), np.max(np.abs(prob.q)),
                    np.max(np.abs(Aty)), 1e-12,
                )
                ratio = np.sqrt((r_prim / scale_p) / max(r_dual / scale_d, 1e-16))
                if ratio > s.adapt_threshold or ratio < 1.0 / s.adapt_threshold:
                    rho = np.clip(rho * ratio, 1e-6, 1e6)
                    self._factorize(prob, rho)

        return QpResult(
            x=x,
            y=y,
            iterations=it,
            primal_residual=float(r_prim),
            dual_residual=float(r_dual),
            status=status,
            solve_time=time.perf_counter() - t0,
        )

    @staticmethod
    def _support(bounds: np.ndarray, w: np.ndarray) -> float:
        """sum_i bounds_i * w_i skipping w_i == 0 (so inf * 0 contributes 0)."""
        mask = w != 0.0
        if not np.any(mask):
            return 0.0
        vals = bounds[mask] * w[mask]
        return float(np.sum(vals)) if np.all(np.isfinite(vals)) else float(np.inf)

    def _check_certificates(self, prob: QpProblem, dx: np.ndarray, dy: np.ndarray):
        eps = self.settings.eps_infeasible
        m = prob.A.shape[0]
        # primal infeasibility: A^T dy ~ 0 with negative support function
        if m:
            ny = np.max(np.abs(dy))
            if ny > 1e-14:
                dyn = dy / ny
                if np.max(np.abs(prob.A.T @ dyn)) <= eps:
                    sup = self._support(prob.u, np.maximum(dyn, 0.0)) + self._support(
                        prob.l, np.minimum(dyn, 0.0)
                    )
                    if sup < -eps:
                        raise InfeasibleDetected("primal infeasibility certificate")
        # dual infeasibility: descent ray with P dx ~ 0 kept feasible
        nx = np.max(np.abs(dx))
        if nx > 1e-14:
            dxn = dx / nx
            if np.max(np.abs(prob.P @ dxn)) <= eps and prob.q @ dxn < -eps:
                Adx = prob.A @ dxn if m else np.zeros(0)
                lo_ok = np.all((prob.l == -np.inf) | (Adx >= -eps))
                hi_ok = np.all((prob.u == np.inf) | (Adx <= eps))
                if lo_ok and hi_ok:
                    raise InfeasibleDetected("dual infeasibility certificate")


def solve_qp(P, q, A=None, l=None, u=None, x0=None, y0=None,
             settings: QpSettings | None = None) -> QpResult:
    """One-shot convenience wrapper around OperatorSplittingQp."""
    q = np.asarray(q, dtype=float).reshape(-1)
    if A is None:
        A = np.zeros((0, q.size))
        l = np.zeros(0)
        u = np.zeros(0)
    prob = QpProblem(P=P, q=q, A=A, l=l, u=u)
    return OperatorSplittingQp(settings).solve(prob, x0=x0, y0=y0)
