"""Gauss-Newton and finite differences against closed-form answers."""

import numpy as np
import pytest

from bowlab.solve import (
    MaxItersExceeded,
    SolveConfig,
    SolveResult,
    finite_diff_jacobian,
    gauss_newton,
)

from conftest import cgauss


def test_inconsistent_linear_system_stops_at_lstsq_answer(rng):
    # an inconsistent overdetermined linear residual cannot reach the
    # tolerance; the solver must raise, carrying (nearly) the
    # normal-equation minimizer as its best iterate
    a = cgauss(rng, 6, 3)
    b = cgauss(rng, 6, 1)[:, 0]
    with pytest.raises(MaxItersExceeded) as exc:
        gauss_newton(lambda x: a @ x - b, np.zeros(3), jacobian=lambda x: a)
    expect, *_ = np.linalg.lstsq(a, b, rcond=None)
    assert np.linalg.norm(exc.value.x - expect) < 1e-6
    assert abs(exc.value.residual_norm - np.linalg.norm(a @ expect - b)) < 1e-8


def test_linear_consistent_system(rng):
    a = cgauss(rng, 4, 4)
    x_true = cgauss(rng, 4, 1)[:, 0]
    b = a @ x_true
    res = gauss_newton(lambda x: a @ x - b, np.zeros(4), jacobian=lambda x: a)
    assert res.converged
    assert np.linalg.norm(res.x - x_true) < 1e-8


def test_complex_square_root():
    target = 2.0 + 1.5j
    res = gauss_newton(lambda z: z * z - target, np.array([1.0 + 0.5j]))
    assert res.converged
    assert abs(res.x[0] ** 2 - target) < 1e-10


def test_matrix_commutator_system(rng):
    # solve [X, A] = 0 with X constrained by an affine pin; residual is
    # polynomial, exactly the shape of the moment equations downstream
    a = cgauss(rng, 2, 2)

    def residual(x):
        m = x.reshape(2, 2)
        comm = m @ a - a @ m
        pin = m[0, 0] - 1.0  # rule out the zero solution
        return np.concatenate([comm.ravel(), [pin]])

    res = gauss_newton(residual, cgauss(rng, 4, 1)[:, 0])
    assert res.converged
    m = res.x.reshape(2, 2)
    assert np.linalg.norm(m @ a - a @ m) < 1e-10


def test_no_solution_raises_with_best_iterate():
    # |z^2 + 1|^2 + 1 > 0 always: residual cannot vanish
    with pytest.raises(MaxItersExceeded) as exc:
        gauss_newton(lambda z: np.array([z[0] ** 2 + 1.0, 1.0]),
                     np.array([0.3 + 0.1j]),
                     cfg=SolveConfig(max_iters=50))
    assert exc.value.residual_norm >= 1.0
    assert exc.value.x.shape == (1,)


def test_determinism(rng):
    a = cgauss(rng, 5, 5)
    b = cgauss(rng, 5, 1)[:, 0]
    x0 = cgauss(rng, 5, 1)[:, 0]
    r1 = gauss_newton(lambda x: a @ x - b, x0)
    r2 = gauss_newton(lambda x: a @ x - b, x0)
    assert np.array_equal(r1.x, r2.x)
    assert r1.iterations == r2.iterations


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolveConfig(damping_down=1.5)


def test_finite_diff_matches_analytic_polynomial(rng):
    a = cgauss(rng, 3, 3)

    def f(z):
        return np.array([z[0] ** 2 + a[0, 1] * z[1],
                         z[1] * z[2],
                         a[2, 2] * z[0] + z[2] ** 3])

    z = cgauss(rng, 3, 1)[:, 0]
    jac = finite_diff_jacobian(f, z)
    expect = np.array([
        [2 * z[0], a[0, 1], 0],
        [0, z[2], z[1]],
        [a[2, 2], 0, 3 * z[2] ** 2],
    ])
    assert np.max(np.abs(jac - expect)) < 1e-7
