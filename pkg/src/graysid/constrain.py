"""State-matrix re-estimation under an LMI eigenvalue-region constraint.

Given an initial estimate ``A*`` and a region ``D``, solve

    minimize    ||A* P - Q||_F^2
    subject to  lam (x) P + beta (x) Q + beta^T (x) Q^T  >= 0
                P = P^T >= p_min I

and return ``A_hat = Q P^-1``, whose eigenvalues lie in ``D``. The cost is
jointly homogeneous in ``(P, Q)``, so ``P >= p_min I`` fixes the scale
without restricting the achievable ``A_hat``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from .regions import LmiRegion

__all__ = [
    "SdpProblem",
    "SdpSolution",
    "VerificationReport",
    "InfeasibleError",
    "build_constraint",
    "solve_constrained",
    "verify_solution",
]


class InfeasibleError(RuntimeError):
    """The region constraint admits no solution."""


@dataclass
class SdpProblem:
    a_star: np.ndarray
    region: LmiRegion
    p_min: float = 1.0
    margin: float = 0.0
    p_max: float | None = None
    solver: str = "CLARABEL"
    tol_feas: float = 1e-8
    tol_gap: float = 1e-8
    max_iter: int = 200
    accept_tol: float = 1e-6

    def __post_init__(self):
        self.a_star = np.atleast_2d(np.asarray(self.a_star, dtype=float))
        n = self.a_star.shape[0]
        if n < 1 or self.a_star.shape != (n, n):
            raise ValueError(f"A* must be a nonempty square matrix, got {self.a_star.shape}")
        if not self.p_min > 0:
            raise ValueError("p_min must be positive")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        if self.p_max is not None and not self.p_max > self.p_min:
            raise ValueError("p_max must exceed p_min")

    @property
    def n(self) -> int:
        return self.a_star.shape[0]

    def to_dict(self) -> dict:
        return {
            "a_star": self.a_star.tolist(),
            "region": self.region.to_dict(),
            "p_min": self.p_min,
            "margin": self.margin,
            "p_max": self.p_max,
            "solver": self.solver,
            "tol_feas": self.tol_feas,
            "tol_gap": self.tol_gap,
            "max_iter": self.max_iter,
            "accept_tol": self.accept_tol,
        }


@dataclass
class SdpSolution:
    p: np.ndarray | None
    q: np.ndarray | None
    a_hat: np.ndarray | None
    objective: float
    status: str  # "optimal", "infeasible" or "max-iterations"
    iterations: int = 0
    p_condition: float = float("nan")
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        as_list = lambda m: None if m is None else np.asarray(m).tolist()  # noqa: E731
        return {
            "status": self.status,
            "objective": self.objective,
            "iterations": self.iterations,
            "p_condition": self.p_condition,
            "p": as_list(self.p),
            "q": as_list(self.q),
            "a_hat": as_list(self.a_hat),
        }


def build_constraint(region: LmiRegion, p, q) -> np.ndarray:
    """``lam (x) P + beta (x) Q + beta^T (x) Q^T`` as an exactly symmetric matrix."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if p.shape != q.shape or p.shape[0] != p.shape[1]:
        raise ValueError(f"P and Q must be square of equal size, got {p.shape} and {q.shape}")
    m = np.kron(region.lam, p) + np.kron(region.beta, q) + np.kron(region.beta.T, q.T)
    return 0.5 * (m + m.T)


def _solver_options(problem: SdpProblem):
    name = problem.solver.upper()
    if name == "CLARABEL":
        return {
            "tol_feas": problem.tol_feas,
            "tol_gap_abs": problem.tol_gap,
            "tol_gap_rel": problem.tol_gap,
            "max_iter": problem.max_iter,
        }
    if name == "CVXOPT":
        return {
            "feastol": problem.tol_feas,
            "abstol": problem.tol_gap,
            "reltol": problem.tol_gap,
            "max_iters": problem.max_iter,
        }
    if name == "SCS":
        return {"eps_abs": problem.tol_feas, "eps_rel": problem.tol_gap, "max_iters": 100 * problem.max_iter}
    return {}


_STATUS = {
    cp.OPTIMAL: "optimal",
    cp.INFEASIBLE: "infeasible",
    cp.INFEASIBLE_INACCURATE: "infeasible",
}


def solve_constrained(problem: SdpProblem) -> SdpSolution:
    """Solve the epigraph form ``min t s.t. ||A* P - Q||_F <= t`` plus the LMIs."""
    n = problem.n
    region = problem.region
    P = cp.Variable((n, n), symmetric=True)
    Q = cp.Variable((n, n))
    t = cp.Variable(nonneg=True)
    M = cp.kron(region.lam, P) + cp.kron(region.beta, Q) + cp.kron(region.beta.T, Q.T)
    mn = M.shape[0]
    constraints = [
        0.5 * (M + M.T) >> problem.margin * np.eye(mn),
        P >> problem.p_min * np.eye(n),
        cp.norm(problem.a_star @ P - Q, "fro") <= t,
    ]
    if problem.p_max is not None:
        constraints.append(P << problem.p_max * np.eye(n))
    prob = cp.Problem(cp.Minimize(t), constraints)
    try:
        with warnings.catch_warnings():
            # inaccurate solutions are classified below instead
            warnings.filterwarnings("ignore", "Solution may be inaccurate", UserWarning)
            prob.solve(solver=problem.solver, **_solver_options(problem))
    except cp.error.SolverError as exc:
        return SdpSolution(None, None, None, float("nan"), "max-iterations", trace=[{"error": str(exc)}])

    stats = prob.solver_stats
    iters = int(stats.num_iters or 0) if stats is not None else 0
    status = _STATUS.get(prob.status, "max-iterations")
    if status == "infeasible" or P.value is None:
        trace = [{"iteration": iters, "solver_status": prob.status}]
        return SdpSolution(None, None, None, float("nan"), status, iters, trace=trace)

    p = 0.5 * (P.value + P.value.T)
    q = np.array(Q.value)
    # undo a small shortfall in P >= p_min I; the problem is homogeneous in (P, Q)
    low = float(np.linalg.eigvalsh(p)[0])
    if 0 < low < problem.p_min:
        p, q = p * (problem.p_min / low), q * (problem.p_min / low)
    a_hat = np.linalg.solve(p, q.T).T
    resid = float(np.linalg.norm(problem.a_star @ p - q, "fro"))
    lmi_res = max(0.0, problem.margin - float(np.linalg.eigvalsh(build_constraint(region, p, q))[0]))
    p_res = max(0.0, problem.p_min - float(np.linalg.eigvalsh(p)[0]))
    trace = [{
        "iteration": iters,
        "solver_status": prob.status,
        "lmi_residual": lmi_res,
        "p_residual": p_res,
        "epigraph_gap": float(t.value) - float(np.linalg.norm(problem.a_star @ P.value - Q.value, "fro")),
    }]
    # The infimum is often approached only as P grows without bound along
    # some directions, and the solver stops just short of its gap tolerance.
    # Such a point is kept if it satisfies the LMIs to accept_tol.
    if prob.status == cp.OPTIMAL_INACCURATE:
        scale = max(1.0, float(np.linalg.norm(p, 2)))
        if lmi_res <= problem.accept_tol * scale and p_res <= problem.accept_tol * problem.p_min:
            status = "optimal"
    return SdpSolution(p, q, a_hat, resid**2, status, iters, float(np.linalg.cond(p)), trace)


@dataclass
class VerificationReport:
    eigenvalues: np.ndarray
    inside: np.ndarray
    lmi_min_eig: float
    p_min_eig: float
    residual: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(np.all(self.inside)) and self.lmi_min_eig >= -self.tol and self.p_min_eig > 0

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "inside": [bool(b) for b in self.inside],
            "lmi_min_eig": self.lmi_min_eig,
            "p_min_eig": self.p_min_eig,
            "residual": self.residual,
            "tol": self.tol,
        }


def verify_solution(sol: SdpSolution, region: LmiRegion, a_star=None, tol: float = 1e-6) -> VerificationReport:
    """Check an optimal solution independently of the solver.

    ``residual`` is ``||A* P - Q||_F`` when ``a_star`` is given, else NaN.
    """
    if sol.status != "optimal" or sol.a_hat is None:
        raise ValueError(f"can only verify optimal solutions, got status {sol.status!r}")
    eig = np.linalg.eigvals(sol.a_hat)
    inside = np.atleast_1d(region.contains(eig, tol))
    lmi = float(np.linalg.eigvalsh(build_constraint(region, sol.p, sol.q))[0])
    pmin = float(np.linalg.eigvalsh(sol.p)[0])
    res = float("nan") if a_star is None else float(np.linalg.norm(np.asarray(a_star) @ sol.p - sol.q, "fro"))
    return VerificationReport(eig, inside, lmi, pmin, res, tol)
