"""Objective oracles: closed-form derivatives, constants, FD checks."""

import json

import numpy as np
import pytest

from saddle_escape.geometry import contains
from saddle_escape.oracles import (
    COUNTEREXAMPLE_F_MIN,
    OracleConstants,
    Problem,
    bundled_problems,
    counterexample_oracle,
    counterexample_problem,
    fd_check_gradient,
    fd_check_hessian,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    quad1d_problem,
    quadratic_oracle,
    save_problem,
)

SADDLE_HESSIAN = np.array([[0.0, -1.0], [-1.0, 1.0]])


class TestCounterexampleOracle:
    def test_gradient_vanishes_at_origin(self):
        g = counterexample_oracle().grad([0.0, 0.0])
        np.testing.assert_array_equal(g, [0.0, 0.0])

    def test_hessian_at_origin(self):
        H = counterexample_oracle().hess([0.0, 0.0])
        np.testing.assert_array_equal(H, SADDLE_HESSIAN)

    def test_negative_curvature_direction(self):
        H = counterexample_oracle().hess([0.0, 0.0])
        v = np.array([-1.0, -1.0])
        assert float(v @ H @ v) == -1.0

    def test_value(self):
        o = counterexample_oracle()
        assert o.eval([0.0, 0.0]) == 0.0
        x, y = 0.5, -0.5
        expect = -x * y * np.exp(-0.5) + 0.5 * y * y
        assert abs(o.eval([x, y]) - expect) < 1e-15

    def test_hessian_symmetric_everywhere(self, rng):
        o = counterexample_oracle()
        for _ in range(50):
            H = o.hess(rng.normal(size=2) * 1.5)
            assert np.max(np.abs(H - H.T)) <= 1e-10

    def test_bounded_below_on_feasible_samples(self, rng):
        problem = counterexample_problem()
        vals = []
        for _ in range(2000):
            x = rng.uniform(-3, 3, size=2)
            if contains(problem.feasible_set, x):
                vals.append(problem.oracle.eval(x))
        vals = np.array(vals)
        assert vals.min() >= -0.5           # empirical floor
        assert vals.min() >= COUNTEREXAMPLE_F_MIN

    def test_sampled_smoothness_constants_hold(self, rng):
        o = counterexample_oracle()
        c = o.constants
        pts = rng.uniform(-3, 3, size=(60, 2))
        for x in pts:
            assert np.linalg.norm(o.grad(x)) <= c.g_max * (1 + 1e-6)
            assert np.linalg.norm(o.hess(x), 2) <= c.H_max * (1 + 1e-6)
        for x, y in zip(pts[::2], pts[1::2]):
            dxy = np.linalg.norm(x - y)
            assert np.linalg.norm(o.grad(x) - o.grad(y)) <= c.L * dxy * (1 + 1e-6)
            assert np.linalg.norm(o.hess(x) - o.hess(y), 2) <= c.rho * dxy * (1 + 1e-6)


class TestQuadraticOracle:
    def test_one_dimensional(self):
        o = quadratic_oracle(np.array([[2.0]]))
        x = np.array([0.5])
        assert o.eval(x) == 0.25
        np.testing.assert_array_equal(o.grad(x), [1.0])
        np.testing.assert_array_equal(o.hess(x), [[2.0]])

    def test_all_ones_scaled(self):
        o = quadratic_oracle(0.5 * np.ones((3, 3)))
        assert abs(o.eval(np.array([1.0, 0.0, 0.0])) - 0.25) < 1e-15

    def test_indefinite_two_by_two(self):
        Q = np.array([[0.5, -1.0], [-1.0, 0.5]])
        o = quadratic_oracle(Q)
        x = np.array([1.0, 1.0]) / np.sqrt(2.0)
        assert abs(float(x @ Q @ x) + 0.5) < 1e-12
        assert abs(o.eval(x) + 0.25) < 1e-12

    def test_constants(self):
        Q = np.diag([2.0, -1.0])
        o = quadratic_oracle(Q, c=[1.0, 0.0], x_bound=3.0)
        assert o.constants.L == o.constants.H_max == 2.0
        assert o.constants.rho == 0.0
        assert abs(o.constants.g_max - (2.0 * 3.0 + 1.0)) < 1e-12

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            quadratic_oracle(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestFiniteDifferences:
    def test_counterexample_gradient(self):
        o = counterexample_oracle()
        assert fd_check_gradient(o, np.array([0.3, -0.7]), 1e-5) <= 1e-5
        assert fd_check_gradient(o, np.array([0.0, 0.0]), 1e-5) <= 1e-5

    def test_counterexample_hessian(self):
        o = counterexample_oracle()
        assert fd_check_hessian(o, np.array([0.0, 0.0]), 1e-5) <= 1e-4
        assert fd_check_hessian(o, np.array([0.5, -0.5]), 1e-5) <= 1e-4

    def test_quadratic_nearly_exact(self, rng):
        o = quadratic_oracle(np.array([[2.0, 0.3], [0.3, -1.0]]), c=[0.1, -0.4])
        x = rng.normal(size=2)
        assert fd_check_gradient(o, x, 1e-5) <= 1e-9
        assert fd_check_hessian(o, x, 1e-5) <= 1e-8

    def test_positive_step_required(self):
        o = counterexample_oracle()
        with pytest.raises(ValueError):
            fd_check_gradient(o, np.zeros(2), 0.0)

    def test_all_bundled_oracles(self, rng):
        for name, problem in bundled_problems().items():
            tested = 0
            while tested < 25:
                x = problem.x0 + rng.normal(size=problem.x0.shape[0])
                if not contains(problem.feasible_set, x):
                    continue
                tested += 1
                assert fd_check_gradient(problem.oracle, x, 1e-5) <= 1e-5, name
                assert fd_check_hessian(problem.oracle, x, 1e-5) <= 1e-4, name


class TestProblem:
    def test_infeasible_start_rejected(self):
        with pytest.raises(ValueError, match="feasible"):
            counterexample_problem(x0=(1.0, 1.0))

    def test_quad1d(self):
        problem = quad1d_problem()
        assert problem.f_min == 0.0
        assert problem.oracle.eval(problem.x0) == 0.25

    def test_json_round_trip(self, tmp_path):
        problem = counterexample_problem()
        path = tmp_path / "problem.json"
        save_problem(problem, path)
        loaded = load_problem(path)
        np.testing.assert_array_equal(loaded.x0, problem.x0)
        assert loaded.kind == "counterexample"
        assert loaded.f_min == problem.f_min
        np.testing.assert_array_equal(loaded.feasible_set.A, problem.feasible_set.A)

    def test_dict_schema_quadratic(self):
        data = {
            "kind": "quadratic",
            "Q": [[2.0]],
            "c": [0.0],
            "A": [[1.0], [-1.0]],
            "b": [1.0, 1.0],
            "x0": [0.5],
            "f_min": 0.0,
        }
        problem = problem_from_dict(data)
        assert problem.oracle.eval(np.array([0.5])) == 0.25
        out = problem_to_dict(problem)
        assert out["Q"] == [[2.0]]
        assert json.dumps(out)  # serializable

    def test_constants_override(self):
        data = {
            "kind": "quadratic", "Q": [[2.0]], "x0": [0.0], "f_min": 0.0,
            "A": [[1.0], [-1.0]], "b": [1.0, 1.0],
            "constants": {"L": 9.0, "rho": 1.0, "g_max": 9.0, "H_max": 9.0},
        }
        problem = problem_from_dict(data)
        assert problem.oracle.constants.L == 9.0
        assert problem.oracle.constants.rho == 1.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            problem_from_dict({"kind": "cubic"})

    def test_negative_constant_rejected(self):
        with pytest.raises(ValueError):
            OracleConstants(L=-1.0, rho=0.0, g_max=1.0, H_max=1.0)
