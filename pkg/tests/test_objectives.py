import math

import numpy as np
import pytest

from leadopt.errors import NonFiniteValue
from leadopt.linalg import finite_diff_gradient
from leadopt.objectives import (
    NoiseModel,
    Quadratic,
    easgd_counterexample_f,
    easgd_counterexample_system,
    matrix_completion_problem,
    quadratic_with_condition,
    sinc2d,
    stochastic_gradient,
    stochastic_value,
)
from leadopt.rng import Rng

# One representative instance of every objective family, with a sensible
# sampling scale for test points.
def _all_objectives():
    rng = Rng(99)
    return [
        (0, "quadratic_iso", Quadratic(np.eye(3)), 2.0),
        (1, "quadratic_kappa50", quadratic_with_condition(6, 50.0, rng.child(0)), 2.0),
        (2, "matrix_completion", matrix_completion_problem(8, 2, rng.child(1)), 1.0),
        (3, "sinc2d", sinc2d(), 8.0),
        (4, "easgd_counterexample", easgd_counterexample_f(), 3.0),
    ]


@pytest.mark.parametrize("idx,name,obj,scale", _all_objectives(),
                         ids=[n for _, n, _, _ in _all_objectives()])
def test_gradient_matches_finite_differences_100_points(idx, name, obj, scale):
    rng = Rng(2024, (idx,))
    worst = 0.0
    for _ in range(100):
        x = scale * rng.standard_normal(obj.dim)
        g = obj.gradient(x)
        gfd = finite_diff_gradient(obj.value, x)
        denom = max(1.0, float(np.max(np.abs(g))))
        worst = max(worst, float(np.max(np.abs(g - gfd))) / denom)
    assert worst < 1e-5, f"{name}: worst relative gradient error {worst:.2e}"


@pytest.mark.parametrize("idx,name,obj,scale", _all_objectives(),
                         ids=[n for _, n, _, _ in _all_objectives()])
def test_value_and_grad_consistent(idx, name, obj, scale):
    rng = Rng(17, (idx,))
    x = scale * rng.standard_normal(obj.dim)
    v, g = obj.value_and_grad(x)
    assert v == pytest.approx(obj.value(x), rel=1e-12, abs=1e-9)
    assert np.allclose(g, obj.gradient(x), atol=1e-9)
    many = obj.value_and_grad_many([x, 0.5 * x])
    assert many[0][0] == pytest.approx(v, rel=1e-12, abs=1e-9)
    assert np.allclose(many[0][1], g, atol=1e-9)


def test_quadratic_hand_values():
    # f(x) = 1/2 x^T diag(1,4) x
    q = Quadratic(np.diag([1.0, 4.0]))
    x = np.array([2.0, 1.0])
    assert q.value(x) == 0.5 * (4.0 + 4.0)
    assert np.array_equal(q.gradient(x), [2.0, 4.0])
    assert q.strong_convexity == 1.0 and q.lipschitz == 4.0
    assert q.condition_number == 4.0


def test_quadratic_with_condition_spectrum():
    q = quadratic_with_condition(5, 100.0, Rng(1).child(0))
    ev = np.linalg.eigvalsh(q.A)
    assert ev[0] == pytest.approx(1.0, rel=1e-9)
    assert ev[-1] == pytest.approx(100.0, rel=1e-9)
    assert q.condition_number == pytest.approx(100.0, rel=1e-9)


def test_matrix_completion_minimum_at_factor():
    obj = matrix_completion_problem(10, 3, Rng(5).child(0))
    at_factor = obj.value(obj.factor.ravel())
    assert abs(at_factor) < 1e-8 * obj.value(np.zeros(obj.dim))
    assert np.max(np.abs(obj.gradient(obj.factor.ravel()))) < 1e-7


def test_matrix_completion_value_matches_residual_form():
    obj = matrix_completion_problem(7, 2, Rng(6).child(0))
    x = Rng(6).child(1).standard_normal(obj.dim)
    X = x.reshape(7, 2)
    R = X @ X.T - obj.M
    assert obj.value(x) == pytest.approx(0.25 * np.sum(R * R), rel=1e-12)


def test_matrix_completion_batched_matches_loop():
    obj = matrix_completion_problem(9, 4, Rng(8).child(0))
    xs = [Rng(8).child(1 + i).standard_normal(obj.dim) for i in range(5)]
    batched = obj.value_and_grad_many(xs)
    for x, (v, g) in zip(xs, batched):
        v1, g1 = obj.value_and_grad(x)
        assert v == pytest.approx(v1, rel=1e-12)
        assert np.allclose(g, g1, atol=1e-10)


def test_sinc_landmark_values():
    obj = sinc2d()
    # at the origin the limit is 1
    assert obj.value(np.zeros(2)) == pytest.approx(1.0)
    # zero on the unit circle (rho = 1)
    assert obj.value(np.array([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    # global minimum ~ -0.2172 in the first negative ring (rho ~ 1.43)
    rho = 1.4303
    assert obj.value(np.array([rho, 0.0])) == pytest.approx(-0.21723, abs=1e-4)
    # second negative lobe ~ -0.0913 near rho ~ 3.47
    assert obj.value(np.array([3.4709, 0.0])) == pytest.approx(-0.09133, abs=1e-4)
    # gradient vanishes at the origin by symmetry
    assert np.allclose(obj.gradient(np.zeros(2)), 0.0)


def test_counterexample_polynomial_satisfies_constraints():
    A, b = easgd_counterexample_system()
    obj = easgd_counterexample_f()
    assert np.max(np.abs(A @ obj.coefficients - b)) < 1e-10


def test_counterexample_smooth_at_seams():
    obj = easgd_counterexample_f()
    for t in (-1.0, 1.0):
        eps = 1e-6
        inside = obj.scalar_value(t - math.copysign(eps, t))
        outside = obj.scalar_value(t + math.copysign(eps, t))
        assert abs(inside - outside) < 1e-5
        d_in = obj.scalar_derivative(t - math.copysign(eps, t))
        d_out = obj.scalar_derivative(t + math.copysign(eps, t))
        assert abs(d_in - d_out) < 1e-5
    assert obj.scalar_derivative(0.0) == pytest.approx(1.0, abs=1e-12)


def test_counterexample_tails():
    obj = easgd_counterexample_f()
    assert obj.scalar_value(-3.0) == pytest.approx(math.exp(-2.0))
    assert obj.scalar_value(3.0) == pytest.approx(math.exp(-2.0))
    assert obj.scalar_derivative(-3.0) == pytest.approx(math.exp(-2.0))
    assert obj.scalar_derivative(3.0) == pytest.approx(-math.exp(-2.0))


def test_noiseless_gradient_is_bitwise_exact():
    obj = Quadratic(np.diag([1.0, 3.0]))
    x = np.array([0.4, -1.2])
    g = stochastic_gradient(obj, x, Rng(0).child(0))
    assert np.array_equal(g, obj.gradient(x))
    v = stochastic_value(obj, x, Rng(0).child(0))
    assert v == obj.value(x)


def test_gradient_noise_variance():
    obj = Quadratic(np.diag([1.0, 2.0, 3.0])).with_noise(
        NoiseModel(sigma2=0.5, nu=0.25))
    x = np.array([1.0, -1.0, 2.0])
    g_exact = obj.gradient(x)
    target = 0.5 + 0.25 * float(g_exact @ g_exact)
    rng = Rng(123).child(0)
    n = 20000
    err2 = np.empty(n)
    for i in range(n):
        d = stochastic_gradient(obj, x, rng) - g_exact
        err2[i] = float(d @ d)
    mean = float(np.mean(err2))
    se = float(np.std(err2, ddof=1) / math.sqrt(n))
    assert abs(mean - target) < 4.0 * se


def test_value_noise_variance():
    obj = Quadratic(np.eye(2)).with_noise(NoiseModel(sigma_f=0.3))
    x = np.array([1.0, 1.0])
    rng = Rng(77).child(0)
    samples = np.array([stochastic_value(obj, x, rng) for _ in range(20000)])
    assert abs(np.mean(samples) - obj.value(x)) < 4.0 * 0.3 / math.sqrt(20000)
    assert abs(np.std(samples) - 0.3) < 0.01


def test_noise_model_exact_flag():
    assert NoiseModel().exact
    assert not NoiseModel(sigma2=0.1).exact
    assert not NoiseModel(nu=0.1).exact
