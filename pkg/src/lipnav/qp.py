"""Dense strictly convex QP solver (dual active-set, Goldfarb-Idnani).

Problem form::

    minimize    0.5 u'Hu + g'u
    subject to  lower_i <= a_i'u <= upper_i

Two-sided rows are split into one-sided constraints internally; rows with
``lower == upper`` are treated as equalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constraints import LinearRow

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max_iterations"

REGULARIZATION = 1e-9
FEAS_TOL = 1e-10
DUAL_TOL = 1e-10
# accepted primal residual of a returned Optimal point
VERIFY_TOL = 1e-9


@dataclass
class DenseQP:
    hessian: np.ndarray
    gradient: np.ndarray
    rows: list[LinearRow] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.gradient)

    def objective(self, u: np.ndarray) -> float:
        return float(0.5 * u @ self.hessian @ u + self.gradient @ u)

    def matrix(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.rows:
            return np.zeros((0, self.n)), np.zeros(0), np.zeros(0)
        A = np.vstack([r.coeffs for r in self.rows])
        lo = np.array([r.lower for r in self.rows], dtype=float)
        hi = np.array([r.upper for r in self.rows], dtype=float)
        return A, lo, hi


@dataclass
class QpSolution:
    u_star: np.ndarray
    objective: float
    status: str
    active_set: list[int]
    kkt_residual: float
    multipliers: np.ndarray  # signed per row: > 0 at the lower bound, < 0 at the upper
    iterations: int = 0
    warm_started: bool = False
    slack: np.ndarray | None = None
    active_sides: list[tuple[int, int]] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def max_slack(self) -> float:
        if self.slack is None or len(self.slack) == 0:
            return 0.0
        return float(self.slack.max())


def _one_sided(A: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Split rows into C x >= b form; returns C, b, owner row, side (+1 lower, -1 upper), equality mask."""
    C, b, owner, side, eq = [], [], [], [], []
    for i in range(len(lo)):
        if math.isfinite(lo[i]) and math.isfinite(hi[i]) and lo[i] == hi[i]:
            C.append(A[i]); b.append(lo[i]); owner.append(i); side.append(1); eq.append(True)
            continue
        if math.isfinite(lo[i]):
            C.append(A[i]); b.append(lo[i]); owner.append(i); side.append(1); eq.append(False)
        if math.isfinite(hi[i]):
            C.append(-A[i]); b.append(-hi[i]); owner.append(i); side.append(-1); eq.append(False)
    n = A.shape[1]
    return (
        np.array(C).reshape(-1, n),
        np.array(b, dtype=float),
        np.array(owner, dtype=int),
        np.array(side, dtype=int),
        np.array(eq, dtype=bool),
    )


def _solve_eqp(H, g, N, bN):
    """Stationary point with the columns of N held active: H x + g = N lam, N'x = bN."""
    n, q = H.shape[0], N.shape[1]
    K = np.zeros((n + q, n + q))
    K[:n, :n] = H
    K[:n, n:] = -N
    K[n:, :n] = N.T
    rhs = np.concatenate([-g, bN])
    sol = np.linalg.solve(K, rhs)
    return sol[:n], sol[n:]


class _DualActiveSet:
    def __init__(self, H, g, C, b, eq, max_iterations):
        self.H = H
        self.g = g
        self.C = C
        self.b = b
        self.eq = eq
        self.max_iterations = max_iterations
        # raises LinAlgError when H is not positive definite
        L = np.linalg.cholesky(H)
        Linv = np.linalg.inv(L)
        self.Hinv = Linv.T @ Linv
        self.iterations = 0

    def _hinv(self, v):
        return self.Hinv @ v

    def _directions(self, active, normal):
        n = self.H.shape[0]
        q = len(active)
        if q == 0:
            return self.Hinv @ normal, np.zeros(0)
        # range-space form: r = (N'H^-1 N)^-1 N'H^-1 n,  z = H^-1 (n - N r)
        N = self.C[active].T
        HN = self.Hinv @ N
        r = np.linalg.solve(N.T @ HN, HN.T @ normal)
        z = self.Hinv @ normal - HN @ r
        return z, r

    def run(self, x, active, u):
        """Iterate from a dual-feasible (x, active, u); returns status, x, active, u."""
        C, b, eq = self.C, self.b, self.eq
        active = list(active)
        u = list(u)
        # equalities must be active before inequality work starts
        pending_eq = [i for i in np.flatnonzero(eq) if i not in active]
        while True:
            if pending_eq:
                p = pending_eq.pop(0)
                sign = -1.0 if C[p] @ x - b[p] > 0 else 1.0
            else:
                s = C @ x - b if len(b) else np.zeros(0)
                if len(active):
                    s[active] = 0.0
                scale = 1.0 + np.abs(b)
                viol = s / scale
                if len(viol) == 0 or viol.min() >= -FEAS_TOL:
                    return OPTIMAL, x, active, u
                p = int(np.argmin(viol))
                sign = 1.0
            normal = sign * C[p]
            rhs = sign * b[p]
            up = 0.0
            ref = float(normal @ self._hinv(normal))
            while True:
                self.iterations += 1
                if self.iterations > self.max_iterations:
                    return MAX_ITERATIONS, x, active, u
                z, r = self._directions(active, normal)
                t1, k_drop = math.inf, None
                for j, idx in enumerate(active):
                    if eq[idx]:
                        continue
                    if r[j] > 1e-12:
                        ratio = u[j] / r[j]
                        if ratio < t1:
                            t1, k_drop = ratio, j
                zn = float(z @ normal)
                if zn <= 1e-12 * ref:
                    if k_drop is None:
                        return INFEASIBLE, x, active, u
                    for j in range(len(u)):
                        u[j] -= t1 * r[j]
                    up += t1
                    del active[k_drop], u[k_drop]
                    continue
                t2 = (rhs - normal @ x) / zn
                t = min(t1, t2)
                x = x + t * z
                for j in range(len(u)):
                    u[j] -= t * r[j]
                up += t
                if t2 <= t1:
                    if sign < 0:
                        # equality entered with flipped normal; store with the row's own orientation
                        up = -up
                    active.append(p)
                    u.append(up)
                    break
                del active[k_drop], u[k_drop]


def _finish(qp: DenseQP, A, lo, hi, C, b, owner, side, eq, x, active, u, status, iters, warm):
    m = len(qp.rows)
    lam = np.zeros(m)
    if status == OPTIMAL and active:
        # polish on the unregularized Hessian when it is positive definite
        try:
            np.linalg.cholesky(qp.hessian)
            N = C[active].T
            xp, up = _solve_eqp(qp.hessian, qp.gradient, N, b[active])
            up_ok = all(eq[a] or up[j] >= -DUAL_TOL for j, a in enumerate(active))
            if up_ok and np.all(C @ xp - b >= -FEAS_TOL * (1.0 + np.abs(b))):
                x, u = xp, list(up)
        except np.linalg.LinAlgError:
            pass
    elif status == OPTIMAL:
        try:
            x = np.linalg.solve(qp.hessian, -qp.gradient)
        except np.linalg.LinAlgError:
            pass
    for j, a in enumerate(active):
        lam[owner[a]] += side[a] * u[j]
    resid = qp.hessian @ x + qp.gradient - (A.T @ lam if m else 0.0)
    kkt = float(np.max(np.abs(resid))) if len(resid) else 0.0
    if m:
        v = A @ x
        with np.errstate(invalid="ignore"):
            comp = np.where(lam > 0, lam * (v - lo), np.where(lam < 0, lam * (v - hi), 0.0))
        comp = np.nan_to_num(comp, nan=0.0, posinf=0.0, neginf=0.0)
        kkt = max(kkt, float(np.max(np.abs(comp))))
    rows_active = sorted({int(owner[a]) for a in active})
    sides = sorted((int(owner[a]), int(side[a])) for a in active)
    return QpSolution(
        u_star=x,
        objective=qp.objective(x),
        status=status,
        active_set=rows_active,
        kkt_residual=kkt,
        multipliers=lam,
        iterations=iters,
        warm_started=warm,
        active_sides=sides,
    )


def solve(
    qp: DenseQP, max_iterations: int = 200, warm_start: Sequence[tuple[int, int]] | None = None
) -> QpSolution:
    """Solve ``qp``; ``warm_start`` is a list of (row, side) pairs guessed active."""
    n = qp.n
    H = 0.5 * (qp.hessian + qp.hessian.T) + REGULARIZATION * np.eye(n)
    g = np.asarray(qp.gradient, dtype=float)
    A, lo, hi = qp.matrix()
    C, b, owner, side, eq = _one_sided(A, lo, hi)
    solver = _DualActiveSet(H, g, C, b, eq, max_iterations)

    x = solver._hinv(-g)
    active: list[int] = []
    u: list[float] = []
    warm = False
    if warm_start:
        lookup = {(int(owner[i]), int(side[i])): i for i in range(len(owner))}
        guess = sorted({lookup[w] for w in warm_start if tuple(w) in lookup})
        if guess and len(guess) <= n:
            try:
                xw, uw = _solve_eqp(H, g, C[guess].T, b[guess])
                if all(eq[a] or uw[j] >= 0.0 for j, a in enumerate(guess)):
                    x, active, u, warm = xw, guess, list(uw), True
            except np.linalg.LinAlgError:
                pass
    status, x, active, u = solver.run(x, active, u)
    sol = _finish(qp, A, lo, hi, C, b, owner, side, eq, x, active, u, status, solver.iterations, warm)
    if sol.optimal and _row_violation(A, lo, hi, sol.u_star) > VERIFY_TOL:
        # a near-singular active set can leave active rows unsatisfied
        if warm:
            return solve(qp, max_iterations)
        sol.status = INFEASIBLE
    return sol


def _row_violation(A: np.ndarray, lo: np.ndarray, hi: np.ndarray, x: np.ndarray) -> float:
    """Largest bound violation, scaled like the feasibility test."""
    if len(lo) == 0:
        return 0.0
    v = A @ x
    with np.errstate(invalid="ignore"):
        below = np.where(np.isfinite(lo), (lo - v) / (1.0 + np.abs(lo)), -np.inf)
        above = np.where(np.isfinite(hi), (v - hi) / (1.0 + np.abs(hi)), -np.inf)
    return float(max(below.max(), above.max(), 0.0))


def solve_with_slack(
    qp: DenseQP,
    soft_rows: Sequence[int],
    penalty: float = 1e4,
    max_iterations: int = 200,
    warm_start: Sequence[tuple[int, int]] | None = None,
) -> QpSolution:
    """Relax the lower bounds of ``soft_rows`` with penalized nonnegative slacks.

    The penalty is ``penalty * (s + s**2)`` per slack: the linear part makes the
    relaxation exact whenever the original problem is feasible and the row
    multiplier stays below ``penalty``.
    """
    if penalty <= 0:
        raise ValueError("penalty must be positive")
    soft = list(soft_rows)
    if not soft:
        return solve(qp, max_iterations, warm_start)
    n, ns = qp.n, len(soft)
    Hs = np.zeros((n + ns, n + ns))
    Hs[:n, :n] = qp.hessian
    Hs[n:, n:] = 2.0 * penalty * np.eye(ns)
    gs = np.concatenate([qp.gradient, penalty * np.ones(ns)])
    pos = {r: j for j, r in enumerate(soft)}
    rows = []
    for i, row in enumerate(qp.rows):
        coeffs = np.zeros(n + ns)
        coeffs[:n] = row.coeffs
        if i in pos:
            if math.isfinite(row.upper):
                # only the lower side is relaxed; keep the upper side exact
                rows.append(LinearRow(coeffs.copy(), -math.inf, row.upper, row.label + ":upper"))
            coeffs[n + pos[i]] = 1.0
            rows.append(LinearRow(coeffs, row.lower, math.inf, row.label))
        else:
            rows.append(LinearRow(coeffs, row.lower, row.upper, row.label))
    row_map = []
    for i, row in enumerate(qp.rows):
        if i in pos and math.isfinite(row.upper):
            row_map.append(i)
        row_map.append(i)
    first_of = {}
    for j, i in enumerate(row_map):
        first_of.setdefault(i, j)
    for j in range(ns):
        e = np.zeros(n + ns)
        e[n + j] = 1.0
        rows.append(LinearRow(e, 0.0, math.inf, f"slack[{j}]"))
    aug = DenseQP(Hs, gs, rows)
    ws = None
    if warm_start:
        ws = [(first_of[r] + (1 if r in pos and math.isfinite(qp.rows[r].upper) and s > 0 else 0), s)
              for r, s in warm_start if r in first_of]
    sol = solve(aug, max_iterations, ws)
    u = sol.u_star[:n]
    slack = np.maximum(sol.u_star[n:], 0.0)
    lam = np.zeros(len(qp.rows))
    for j, i in enumerate(row_map):
        lam[i] += sol.multipliers[j]
    active = sorted({row_map[j] for j in sol.active_set if j < len(row_map)})
    sides = sorted({(row_map[j], s) for j, s in sol.active_sides if j < len(row_map)})
    A, lo, hi = qp.matrix()
    resid = qp.hessian @ u + qp.gradient - (A.T @ lam if len(qp.rows) else 0.0)
    kkt = float(np.max(np.abs(resid))) if n else 0.0
    return QpSolution(
        u_star=u,
        objective=qp.objective(u),
        status=sol.status,
        active_set=active,
        kkt_residual=max(kkt, sol.kkt_residual),
        multipliers=lam,
        iterations=sol.iterations,
        warm_started=sol.warm_started,
        slack=slack,
        active_sides=sides,
    )
