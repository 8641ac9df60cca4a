import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graysid.constrain import (SdpProblem, SdpSolution, build_constraint, solve_constrained,
                               verify_solution)
from graysid.regions import (cardioid_ellipse_conservative, circle_region, conic_region, intersect,
                             stability_circle)


def scalar_grid_oracle(a, region, p_hi=4.0):
    # brute-force minimum of (a p - q)^2 over the feasible (p, q) grid
    ps = np.linspace(1.0, p_hi, 301)
    qs = np.linspace(-p_hi, p_hi, 2401)
    P, Q = np.meshgrid(ps, qs)
    feasible = np.array([[region.min_eig(q / p) >= -1e-12 for p, q in zip(pr, qr)] for pr, qr in zip(P, Q)])
    cost = np.where(feasible, (a * P - Q) ** 2, np.inf)
    k = np.unravel_index(np.argmin(cost), cost.shape)
    return cost[k], Q[k] / P[k]


class TestBuildConstraint:
    def test_block_structure(self):
        reg = intersect([stability_circle(), conic_region(0.5)])
        m = build_constraint(reg, np.eye(2), 0.5 * np.eye(2))
        assert m.shape == (8, 8)
        np.testing.assert_allclose(m[:4, 4:], 0)

    def test_stability_slice(self):
        a = np.array([[0.5, 0.2], [0.0, 0.3]])
        m = build_constraint(stability_circle(), np.eye(2), a)
        assert (np.linalg.eigvalsh(m)[0] >= 0) == (np.linalg.norm(a, 2) <= 1)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            build_constraint(stability_circle(), np.eye(2), np.eye(3))


class TestSolve:
    def test_scalar_unstable(self):
        sol = solve_constrained(SdpProblem([[1.2]], stability_circle()))
        assert sol.status == "optimal"
        assert sol.a_hat[0, 0] == pytest.approx(1.0, abs=1e-3)
        assert sol.objective == pytest.approx(0.04, abs=1e-5)
        rep = verify_solution(sol, stability_circle(), [[1.2]])
        assert rep.ok
        assert rep.lmi_min_eig == pytest.approx(0.0, abs=1e-6)

    def test_scalar_against_grid(self):
        reg = intersect([circle_region(0.3, 0.4), conic_region(1.0)])
        cost, a_hat = scalar_grid_oracle(-0.5, reg)
        sol = solve_constrained(SdpProblem([[-0.5]], reg))
        assert sol.objective <= cost + 1e-6
        assert sol.a_hat[0, 0] == pytest.approx(a_hat, abs=5e-3)

    def test_already_inside(self):
        a = np.array([[0.5, 0.1], [-0.1, 0.4]])
        sol = solve_constrained(SdpProblem(a, stability_circle()))
        assert sol.objective <= 1e-10
        np.testing.assert_allclose(sol.a_hat, a, atol=1e-6)
        rep = verify_solution(sol, stability_circle(), a)
        assert rep.ok and rep.residual <= 1e-5

    def test_infeasible_conflict(self):
        reg = intersect([circle_region(0.5, 0.1), circle_region(-0.5, 0.1)])
        sol = solve_constrained(SdpProblem([[0.0]], reg))
        assert sol.status == "infeasible"
        with pytest.raises(ValueError):
            verify_solution(sol, reg)

    def test_pmax_bound(self):
        reg = intersect([cardioid_ellipse_conservative(0.36)[0], conic_region(0.381)])
        a = np.array([[1.1, 0.5], [-0.4, 0.9]])
        sol = solve_constrained(SdpProblem(a, reg, p_max=100.0, margin=1e-6))
        assert sol.status == "optimal"
        assert np.linalg.eigvalsh(sol.p)[-1] <= 100 + 1e-5
        assert verify_solution(sol, reg, a).ok

    @settings(max_examples=15)
    @given(st.lists(st.floats(-1.5, 1.5), min_size=4, max_size=4))
    def test_random_inside_region(self, entries):
        reg = intersect([cardioid_ellipse_conservative(0.36)[0], conic_region(0.381)])
        a = np.reshape(entries, (2, 2))
        sol = solve_constrained(SdpProblem(a, reg, p_max=100.0, margin=1e-6))
        assert sol.status == "optimal"
        assert np.all(reg.contains(np.linalg.eigvals(sol.a_hat), 1e-6))

    def test_problem_validation(self):
        with pytest.raises(ValueError):
            SdpProblem(np.ones((2, 3)), stability_circle())
        with pytest.raises(ValueError):
            SdpProblem([[1.0]], stability_circle(), p_min=0)
        with pytest.raises(ValueError):
            SdpProblem([[1.0]], stability_circle(), p_max=0.5)
        with pytest.raises(ValueError):
            SdpProblem([[1.0]], stability_circle(), margin=-1)


class TestVerify:
    def test_corrupted_q(self):
        a = np.array([[0.5, 0.0], [0.0, 0.2]])
        sol = solve_constrained(SdpProblem(a, stability_circle()))
        bad = SdpSolution(sol.p, sol.q + 5 * np.eye(2), np.linalg.solve(sol.p, (sol.q + 5 * np.eye(2)).T).T,
                          sol.objective, "optimal")
        rep = verify_solution(bad, stability_circle(), a)
        assert not rep.ok
        assert rep.lmi_min_eig < 0
        assert not rep.inside.all()

    def test_report_dict(self):
        sol = solve_constrained(SdpProblem([[0.5]], stability_circle()))
        d = verify_solution(sol, stability_circle()).to_dict()
        assert d["ok"] is True and d["eigenvalues"] == [[pytest.approx(0.5, abs=1e-6), 0.0]]
