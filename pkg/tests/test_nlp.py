"""SQP solver regression suite on problems with independently known answers."""

import io

import numpy as np
import pytest
import scipy.sparse as sp

from tribody import nlp


def _dense_problem(n, m, f, g, c, J, lb, ub, cl, cu, **kw):
    return nlp.NlpProblem(
        n=n,
        m=m,
        objective=f,
        gradient=g,
        constraints=c,
        jacobian=lambda z: sp.csr_matrix(np.atleast_2d(J(z))),
        lb=np.asarray(lb, dtype=float),
        ub=np.asarray(ub, dtype=float),
        cl=np.asarray(cl, dtype=float),
        cu=np.asarray(cu, dtype=float),
        **kw,
    )


def equality_qp():
    """min 0.5 z'Qz - b'z  s.t. A z = rhs, with the KKT system as oracle."""
    Q = np.array([[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]])
    b = np.array([1.0, -2.0, 0.5])
    A = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, 0.0]])
    rhs = np.array([1.0, 0.3])
    kkt = np.block([[Q, A.T], [A, np.zeros((2, 2))]])
    # KKT: Q z - b + A' lam = 0, A z = rhs, matching the solver convention
    # grad f + J' lam + w = 0
    sol = np.linalg.solve(kkt, np.concatenate([b, rhs]))
    z_star, lam_star = sol[:3], sol[3:]
    prob = _dense_problem(
        3,
        2,
        lambda z: 0.5 * z @ Q @ z - b @ z,
        lambda z: Q @ z - b,
        lambda z: A @ z,
        lambda z: A,
        lb=-10 * np.ones(3),
        ub=10 * np.ones(3),
        cl=rhs,
        cu=rhs,
    )
    return prob, z_star, lam_star


def test_equality_qp_solution_and_multipliers():
    prob, z_star, lam_star = equality_qp()
    out = nlp.solve(prob, np.zeros(3))
    assert out.status == "optimal"
    np.testing.assert_allclose(out.z, z_star, atol=1e-7)
    # sign convention: g + J' lam + w = 0 at the solution
    np.testing.assert_allclose(out.multipliers, lam_star, atol=1e-6)
    assert out.feasibility <= 1e-8
    assert out.stationarity <= 1e-8


def hs071():
    """Classic four-variable nonconvex benchmark with published optimum."""

    def f(z):
        return z[0] * z[3] * (z[0] + z[1] + z[2]) + z[2]

    def g(z):
        x1, x2, x3, x4 = z
        return np.array(
            [
                x4 * (2 * x1 + x2 + x3),
                x1 * x4,
                x1 * x4 + 1.0,
                x1 * (x1 + x2 + x3),
            ]
        )

    def c(z):
        return np.array([np.prod(z), z @ z])

    def J(z):
        x1, x2, x3, x4 = z
        return np.array(
            [
                [x2 * x3 * x4, x1 * x3 * x4, x1 * x2 * x4, x1 * x2 * x3],
                [2 * x1, 2 * x2, 2 * x3, 2 * x4],
            ]
        )

    return _dense_problem(
        4,
        2,
        f,
        g,
        c,
        J,
        lb=np.ones(4),
        ub=5 * np.ones(4),
        cl=[25.0, 40.0],
        cu=[np.inf, 40.0],
    )


def test_hs071_known_solution():
    out = nlp.solve(hs071(), np.array([1.0, 5.0, 5.0, 1.0]))
    assert out.status == "optimal"
    expect = np.array([1.0, 4.74299963, 3.82114998, 1.37940829])
    np.testing.assert_allclose(out.z, expect, atol=1e-5)
    assert out.objective == pytest.approx(17.0140173, abs=1e-5)


def circle_rosenbrock():
    """Rosenbrock restricted to the unit circle; oracle via independent solver."""

    def f(z):
        return (1 - z[0]) ** 2 + 100 * (z[1] - z[0] ** 2) ** 2

    def g(z):
        return np.array(
            [
                -2 * (1 - z[0]) - 400 * z[0] * (z[1] - z[0] ** 2),
                200 * (z[1] - z[0] ** 2),
            ]
        )

    return _dense_problem(
        2,
        1,
        f,
        g,
        lambda z: np.array([z @ z]),
        lambda z: 2 * z[None, :],
        lb=[-2, -2],
        ub=[2, 2],
        cl=[1.0],
        cu=[1.0],
    )


def test_circle_rosenbrock_against_independent_backend():
    prob = circle_rosenbrock()
    ref = nlp.solve(prob, np.array([0.5, 0.5]))
    cross = nlp.solve(prob, np.array([0.5, 0.5]), backend="scipy-trust-constr")
    assert ref.status == "optimal"
    assert cross.status == "optimal"
    np.testing.assert_allclose(ref.z, cross.z, atol=1e-6)
    assert ref.objective == pytest.approx(cross.objective, abs=1e-8)


def test_bound_multiplier_sign():
    # min (z-2)^2 with z <= 1: minimizer at the bound, w = -g = 2
    prob = _dense_problem(
        1,
        0,
        lambda z: float((z[0] - 2.0) ** 2),
        lambda z: np.array([2 * (z[0] - 2.0)]),
        lambda z: np.zeros(0),
        lambda z: np.zeros((0, 1)),
        lb=[-5.0],
        ub=[1.0],
        cl=[],
        cu=[],
    )
    out = nlp.solve(prob, np.array([0.0]))
    assert out.status == "optimal"
    assert out.z[0] == pytest.approx(1.0, abs=1e-8)
    assert out.bound_multipliers[0] == pytest.approx(2.0, abs=1e-6)


def test_infeasible_rows_reported():
    # c1: z >= 1 and c2: z <= 0 cannot both hold
    prob = _dense_problem(
        1,
        2,
        lambda z: float(z[0] ** 2),
        lambda z: np.array([2 * z[0]]),
        lambda z: np.array([z[0], z[0]]),
        lambda z: np.array([[1.0], [1.0]]),
        lb=[-5.0],
        ub=[5.0],
        cl=[1.0, -np.inf],
        cu=[np.inf, 0.0],
    )
    out = nlp.solve(prob, np.array([0.3]))
    assert out.status in ("infeasible", "numerical-failure", "max-iterations")
    assert out.status != "optimal"
    assert out.feasibility > 1e-3


def test_restart_determinism():
    prob = hs071()
    z0 = np.array([1.0, 5.0, 5.0, 1.0])
    a = nlp.solve(prob, z0)
    b = nlp.solve(prob, z0)
    assert len(a.log) == len(b.log)
    for ra, rb in zip(a.log, b.log):
        assert ra == rb  # bit-identical iterate history
    np.testing.assert_array_equal(a.z, b.z)


def test_iteration_log_stream_and_fields():
    buf = io.StringIO()
    prob, _, _ = equality_qp()
    out = nlp.solve(prob, np.zeros(3), nlp.SolverOptions(log_stream=buf))
    assert out.log, "expected at least one log row"
    row = out.log[0]
    for key in ("iter", "objective", "feasibility", "stationarity", "step_norm"):
        assert key in row
    assert "feas=" in buf.getvalue()


def test_max_iterations_status():
    out = nlp.solve(
        hs071(),
        np.array([1.0, 5.0, 5.0, 1.0]),
        nlp.SolverOptions(max_iterations=2),
    )
    assert out.status == "max-iterations"


def test_unknown_backend():
    prob, _, _ = equality_qp()
    with pytest.raises(KeyError):
        nlp.solve(prob, np.zeros(3), backend="nope")
    assert "reference" in nlp.available_backends()


def test_finite_difference_mode_matches_analytic():
    prob = hs071()
    z = np.array([1.2, 4.3, 3.1, 1.5])
    g_an, J_an = nlp.derivatives(prob, z, "analytic-forward")
    g_fd, J_fd = nlp.derivatives(prob, z, "finite-difference")
    np.testing.assert_allclose(g_fd, g_an, rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(J_fd.toarray(), J_an.toarray(), rtol=1e-6, atol=1e-8)


def test_fd_solve_agrees_on_small_problem():
    prob, z_star, _ = equality_qp()
    out = nlp.solve(prob, np.zeros(3), nlp.SolverOptions(derivative_mode="finite-difference"))
    assert out.status == "optimal"
    np.testing.assert_allclose(out.z, z_star, atol=1e-6)


def test_crossing_bounds_rejected():
    with pytest.raises(ValueError):
        _dense_problem(
            1,
            0,
            lambda z: 0.0,
            lambda z: np.zeros(1),
            lambda z: np.zeros(0),
            lambda z: np.zeros((0, 1)),
            lb=[1.0],
            ub=[0.0],
            cl=[],
            cu=[],
        )


def test_partitioned_hessian_on_separable_problem():
    # two independent pairs; elements declared per pair
    def f(z):
        return (z[0] - 1) ** 2 + z[0] * z[1] + z[1] ** 2 + (z[2] + 2) ** 2 + z[2] * z[3] + z[3] ** 2

    def g(z):
        return np.array(
            [2 * (z[0] - 1) + z[1], z[0] + 2 * z[1], 2 * (z[2] + 2) + z[3], z[2] + 2 * z[3]]
        )

    prob = _dense_problem(
        4,
        0,
        f,
        g,
        lambda z: np.zeros(0),
        lambda z: np.zeros((0, 4)),
        lb=-10 * np.ones(4),
        ub=10 * np.ones(4),
        cl=[],
        cu=[],
        hess_elements=[np.array([0, 1]), np.array([2, 3])],
    )
    out = nlp.solve(prob, np.zeros(4))
    assert out.status == "optimal"
    # unconstrained optimum solves the two 2x2 systems
    expect = np.concatenate(
        [
            np.linalg.solve([[2, 1], [1, 2]], [2, 0]),
            np.linalg.solve([[2, 1], [1, 2]], [-4, 0]),
        ]
    )
    np.testing.assert_allclose(out.z, expect, atol=1e-7)
