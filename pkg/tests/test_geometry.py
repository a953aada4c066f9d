"""Polytope primitives: slacks, membership, projections, slices."""

import numpy as np
import pytest

from saddle_escape.geometry import (
    ActiveSet,
    EmptyPolytopeError,
    Polytope,
    box,
    contains,
    orthant,
    project_halfspace,
    project_polytope,
    residual,
    slice_polytope,
    unconstrained,
)

HALFPLANE = Polytope([[1.0, 1.0]], [0.0])


class TestPolytope:
    def test_rejects_zero_row(self):
        with pytest.raises(ValueError, match="nonzero"):
            Polytope([[0.0, 0.0], [1.0, 0.0]], [1.0, 1.0])

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            Polytope([[1.0, 0.0]], [1.0, 2.0])

    def test_empty_constraint_system_allowed(self):
        P = unconstrained(3)
        assert P.m == 0 and P.n == 3
        assert contains(P, np.ones(3))

    def test_arrays_are_immutable(self):
        P = box([0.0], [1.0])
        with pytest.raises(ValueError):
            P.A[0, 0] = 5.0

    def test_dict_round_trip(self):
        P = box([-1.0, 0.0], [2.0, 3.0])
        Q = Polytope.from_dict(P.to_dict())
        np.testing.assert_array_equal(P.A, Q.A)
        np.testing.assert_array_equal(P.b, Q.b)


class TestResidualContains:
    def test_boundary_point(self):
        np.testing.assert_array_equal(residual(HALFPLANE, [0.0, 0.0]), [0.0])

    def test_on_line(self):
        np.testing.assert_array_equal(residual(HALFPLANE, [0.5, -0.5]), [0.0])

    def test_direct_arithmetic(self):
        P = Polytope([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        np.testing.assert_allclose(residual(P, [0.25, -0.5]), [0.75, 1.5])

    def test_contains_examples(self):
        assert contains(HALFPLANE, [0.5, -0.5], tol=0.0)
        assert not contains(HALFPLANE, [0.5, -0.4], tol=1e-9)
        assert contains(orthant(3), [0.0, 0.0, 0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            residual(HALFPLANE, [1.0, 2.0, 3.0])

    def test_negative_tol_rejected(self):
        with pytest.raises(ValueError):
            contains(HALFPLANE, [0.0, 0.0], tol=-1.0)


class TestProjectHalfspace:
    def test_symmetric_projection(self):
        np.testing.assert_allclose(project_halfspace([1.0, 1.0], 0.0, [1.0, 1.0]),
                                   [0.0, 0.0])

    def test_already_feasible(self):
        z = np.array([-1.0, -1.0])
        out = project_halfspace([1.0, 1.0], 0.0, z)
        np.testing.assert_array_equal(out, z)

    def test_online_projection_update(self):
        # projecting a raw gradient point whose coordinate sum is s
        # subtracts s/2 from each coordinate
        z = np.array([0.7, -0.2])  # sum 0.5
        out = project_halfspace([1.0, 1.0], 0.0, z)
        np.testing.assert_allclose(out, [0.7 - 0.25, -0.2 - 0.25], atol=1e-15)
        assert abs(out.sum()) < 1e-15

    def test_zero_normal_rejected(self):
        with pytest.raises(ValueError):
            project_halfspace([0.0, 0.0], 0.0, [1.0, 1.0])


class TestProjectPolytope:
    def test_single_halfspace_matches_closed_form(self):
        z = np.array([1.3, 0.4])
        np.testing.assert_array_equal(
            project_polytope(HALFPLANE, z),
            project_halfspace([1.0, 1.0], 0.0, z))

    def test_box_clamp(self):
        P = box([0.0, 0.0], [1.0, 1.0])
        np.testing.assert_allclose(project_polytope(P, [2.0, -1.0]), [1.0, 0.0])

    def test_feasible_point_returned_exactly(self, rng):
        P = box([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
        for _ in range(20):
            z = rng.uniform(-1.0, 1.0, size=3)
            out = project_polytope(P, z)
            assert np.array_equal(out, z)

    def test_variational_inequality(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 4))
            A = rng.normal(size=(m, n))
            A = A[np.linalg.norm(A, axis=1) > 1e-6]
            if len(A) == 0:
                continue
            inner = rng.normal(size=n) * 0.5
            b = A @ inner + rng.uniform(0.1, 1.0, size=len(A))
            P = Polytope(A, b)
            z = inner + rng.normal(size=n) * 3.0
            p = project_polytope(P, z)
            assert contains(P, p)
            for _ in range(40):
                y = inner + rng.normal(size=n)
                if contains(P, y, 0.0):
                    assert float((z - p) @ (y - p)) <= 1e-8

    def test_matches_grid_oracle_2d(self, rng):
        for _ in range(10):
            A = rng.normal(size=(2, 2))
            if np.any(np.linalg.norm(A, axis=1) < 1e-6):
                continue
            inner = rng.normal(size=2) * 0.3
            b = A @ inner + rng.uniform(0.1, 0.8, size=2)
            P = Polytope(A, b)
            z = inner + rng.normal(size=2) * 2.0
            p = project_polytope(P, z)
            # dense feasible grid around the relevant region
            span = np.linspace(-4.0, 4.0, 321)
            X, Y = np.meshgrid(span, span, indexing="ij")
            pts = np.stack([X.ravel(), Y.ravel()], axis=1)
            feas = np.all(A @ pts.T <= b[:, None] + 1e-12, axis=0)
            pts = pts[feas]
            d2 = ((pts - z) ** 2).sum(axis=1)
            assert float(((p - z) ** 2).sum()) <= d2.min() + 1e-6

    def test_nonexpansive(self, rng):
        P = Polytope([[1.0, 1.0], [-1.0, 0.5]], [0.5, 1.0])
        for _ in range(50):
            z1 = rng.normal(size=2) * 3
            z2 = rng.normal(size=2) * 3
            p1, p2 = project_polytope(P, z1), project_polytope(P, z2)
            assert np.linalg.norm(p1 - p2) <= np.linalg.norm(z1 - z2) + 1e-9

    def test_empty_polytope_detected(self):
        P = Polytope([[1.0], [-1.0]], [-1.0, -1.0])  # x <= -1 and x >= 1
        with pytest.raises(EmptyPolytopeError):
            project_polytope(P, np.array([0.0]))

    def test_enumeration_cap(self):
        A = np.vstack([np.eye(13), ])
        P = Polytope(A, np.ones(13))
        with pytest.raises(ValueError, match="cap"):
            project_polytope(P, np.full(13, 2.0))


class TestSlice:
    def test_empty_active_set(self):
        sl = slice_polytope(HALFPLANE, [0.5, -0.5], ActiveSet())
        np.testing.assert_array_equal(sl.d0, [0.0, 0.0])
        np.testing.assert_array_equal(sl.Z, np.eye(2))
        assert sl.radius == 1.0

    def test_single_equality(self):
        sl = slice_polytope(HALFPLANE, [0.0, 0.0], ActiveSet(rows=(0,)))
        np.testing.assert_allclose(sl.d0, [0.0, 0.0], atol=1e-14)
        assert sl.Z.shape == (2, 1)
        np.testing.assert_allclose(np.abs(sl.Z[:, 0]), [1 / np.sqrt(2)] * 2)

    def test_slice_outside_ball(self):
        P = Polytope([[1.0, 1.0]], [3.0])
        x = np.zeros(2)
        # forcing the row active needs d0 = (1.5, 1.5), norm > 1
        assert slice_polytope(P, x, ActiveSet(rows=(0,))) is None

    def test_inconsistent_system(self):
        P = Polytope([[1.0, 0.0], [1.0, 0.0]], [0.0, 0.5])
        assert slice_polytope(P, [0.0, 0.0], ActiveSet(rows=(0, 1))) is None

    def test_dependent_rows_dropped(self):
        P = Polytope([[1.0, 0.0], [2.0, 0.0]], [0.0, 0.0])
        sl = slice_polytope(P, [0.0, 0.0], ActiveSet(rows=(0, 1)))
        assert sl is not None and sl.Z.shape == (2, 1)

    def test_equality_residual_property(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 4))
            A = rng.normal(size=(m, n))
            x = rng.normal(size=n) * 0.2
            b = A @ x + rng.uniform(0.0, 0.3, size=m)
            P = Polytope(A, b)
            S = ActiveSet(rows=tuple(
                i for i in range(m) if rng.random() < 0.6))
            sl = slice_polytope(P, x, S)
            if sl is None or not S.rows:
                continue
            idx = list(S.rows)
            assert np.allclose(sl.Z.T @ sl.Z, np.eye(sl.dim), atol=1e-10)
            assert np.max(np.abs(sl.Z.T @ sl.d0), initial=0.0) <= 1e-10
            for _ in range(5):
                u = rng.normal(size=sl.dim)
                pt = x + sl.point(u)
                assert np.max(np.abs(P.A[idx] @ pt - P.b[idx])) <= 1e-9

    def test_gradient_row(self):
        g = np.array([1.0, 2.0])
        sl = slice_polytope(unconstrained(2), [0.3, 0.3], ActiveSet(grad=True), g)
        assert sl.dim == 1
        assert abs(float(g @ sl.point([0.7]))) <= 1e-10

    def test_grad_marker_requires_vector(self):
        with pytest.raises(ValueError, match="gradient row"):
            slice_polytope(unconstrained(2), [0.0, 0.0], ActiveSet(grad=True))


class TestActiveSet:
    def test_sorted_and_deduplicated(self):
        assert ActiveSet(rows=(3, 1)).rows == (1, 3)
        with pytest.raises(ValueError):
            ActiveSet(rows=(1, 1))

    def test_str(self):
        assert str(ActiveSet(rows=(0, 2), grad=True)) == "{0,2,grad}"
