import math

import numpy as np
import pytest

from leadopt.objectives import Quadratic, quadratic_with_condition, NoiseModel
from leadopt.rng import Rng
from leadopt.steps import StepParams, set_fault_injection
from leadopt.theory import (
    BoundReport,
    CSV_HEADER,
    check_angle_improvement,
    check_easgd_counterexample,
    check_one_step_descent,
    check_psi_minimizer,
    check_stochastic_leader_bounds,
    default_checks,
    large_angle_shell_point,
    run_checks,
    sample_sublevel_ellipsoid,
    solve_elastic_fixed_point,
    step_size_preconditions,
)


def test_bound_report_pass_fail_logic():
    assert BoundReport.evaluate("a", 1.0, 2.0).passed
    assert not BoundReport.evaluate("b", 2.0, 1.0).passed
    # Monte Carlo margin: lhs within 4 SE of rhs passes
    assert BoundReport.evaluate("c", 1.3, 1.0, mc_std_error=0.1).passed
    assert not BoundReport.evaluate("d", 1.5, 1.0, mc_std_error=0.1).passed
    # deterministic tolerance
    assert BoundReport.evaluate("e", 1.0 + 1e-12, 1.0, tolerance=1e-9).passed
    inap = BoundReport.inapplicable("f", "reason")
    assert not inap.applicable


def test_bound_report_csv_row_matches_header():
    row = BoundReport.evaluate("x", 0.5, 1.0, mc_std_error=0.01, trials=100).csv_row()
    assert len(row.split(",")) == len(CSV_HEADER.split(","))
    assert row.startswith("x,0.5,1,")
    assert row.endswith(",pass")


def test_step_size_preconditions_hand_case():
    # isotropic quadratic: m = M = kappa = 1; conditions are
    # eta <= 1/2, eta*lam <= 1/2, eta*sqrt(lam) <= 1/sqrt(2)
    obj = Quadratic(np.eye(2))
    assert step_size_preconditions(obj, 0.25, 0.5)
    assert not step_size_preconditions(obj, 0.6, 0.5)
    assert not step_size_preconditions(obj, 0.25, 3.0)


def test_one_step_descent_exact_hand_case():
    # f = ||x||^2/2, x = e_1, z = 0, eta = 1/4, lam = 1/2.
    # pull coefficient eta*lam = 1/8: x+ = x - (1/4)x - (1/8)x = (5/8)e_1
    # lhs = f(x+) = 25/128; rhs = (3/4)(1/2) - (1/8)(1/2) = 5/16
    obj = Quadratic(np.eye(2))
    rep = check_one_step_descent(obj, np.array([1.0, 0.0]), np.zeros(2),
                                 StepParams(eta=0.25, lam=0.5), 1, Rng(0).child(0))
    assert rep.lhs == pytest.approx(25.0 / 128.0, abs=1e-15)
    assert rep.rhs == pytest.approx(5.0 / 16.0, abs=1e-15)
    assert rep.passed


def test_one_step_descent_inapplicable_when_preconditions_fail():
    obj = Quadratic(np.eye(2))
    rep = check_one_step_descent(obj, np.ones(2), np.zeros(2),
                                 StepParams(eta=0.9, lam=0.5), 1, Rng(0).child(0))
    assert not rep.applicable


def test_psi_minimizer_1d_hand_case():
    # f = x^2/2 (m=1), z=2, lam=1: w = lam*z/(1+lam) = 1
    # value: f(w)=1/2 <= (1/2)*f(z)=1; distance: w^2=1 <= (1/2)*z^2=2
    obj = Quadratic(np.array([[1.0]]))
    value, dist = check_psi_minimizer(obj, np.array([2.0]), 1.0)
    assert value.lhs == pytest.approx(0.5) and value.rhs == pytest.approx(1.0)
    assert dist.lhs == pytest.approx(1.0) and dist.rhs == pytest.approx(2.0)
    assert value.passed and dist.passed


def test_psi_minimizer_large_lambda_approaches_z():
    obj = quadratic_with_condition(4, 20.0, Rng(2).child(0))
    z = Rng(2).child(1).standard_normal(4)
    value, dist = check_psi_minimizer(obj, z, 1e8)
    assert value.passed and dist.passed
    assert value.lhs == pytest.approx(obj.value(z), rel=1e-5)


def test_stochastic_leader_bounds_zero_noise_selects_truth():
    reps = check_stochastic_leader_bounds(4, np.array([0.0, 1.0, 2.0, 3.0]),
                                          0.0, 1000, Rng(3).child(0))
    assert reps[0].lhs == 0.0  # always picks the true best
    assert all(r.passed for r in reps)


def test_elastic_fixed_point_solves_equation():
    for lam in (0.1, 0.5, 1.0):
        y = solve_elastic_fixed_point(lam)
        assert y >= 1.0
        assert abs(math.exp(1.0 - y) - lam * y) < 1e-10
    with pytest.raises(ValueError):
        solve_elastic_fixed_point(0.0)
    with pytest.raises(ValueError):
        solve_elastic_fixed_point(1.5)


def test_counterexample_check_passes_and_has_teeth():
    reps = check_easgd_counterexample(0.5)
    assert all(r.passed for r in reps)
    # the nonstationarity floor is genuinely positive
    assert reps[1].lhs > 0.4


def test_sublevel_sampler_stays_inside():
    A = np.diag([1.0, 9.0])
    z = sample_sublevel_ellipsoid(A, 4.0, 2000, Rng(5).child(0))
    q = np.einsum("ij,jk,ik->i", z, A, z)
    assert np.all(q <= 4.0 + 1e-9)
    # the box corners are rejected: fill fraction well below 1
    assert z.shape == (2000, 2)


def test_shell_point_has_advertised_angle():
    evals = np.array([1.0, 200.0])
    x = large_angle_shell_point(evals)
    A = np.diag(evals)
    ax = A @ x
    cos = float(x @ ax) / (np.linalg.norm(x) * np.linalg.norm(ax))
    kappa = 200.0
    expect = 2.0 / (math.sqrt(kappa) + 1.0 / math.sqrt(kappa))
    assert cos == pytest.approx(expect, rel=1e-12)


def test_angle_improvement_inapplicable_outside_admissible_range():
    # kappa = 100 puts the max-angle shell point outside the admissible
    # range for the any-lambda branch
    A = np.diag([1.0, 100.0])
    x = large_angle_shell_point(np.array([1.0, 100.0]))
    rep = check_angle_improvement(A, x, 1.0, 1000, Rng(6).child(0),
                                  branch="any_lambda")
    assert not rep.applicable


def test_run_checks_filter():
    reports = run_checks(filter_pattern="thm2")
    assert reports and all("thm2" in r.name for r in reports)
    assert all(r.passed for r in reports)


def test_default_checks_names_are_unique():
    names = [name for name, _ in default_checks()]
    assert len(names) == len(set(names))


def test_fault_injection_breaks_the_descent_check():
    # mutation sanity: a sign-flipped gradient must turn the Monte
    # Carlo descent check red
    obj = quadratic_with_condition(6, 30.0, Rng(7).child(0)).with_noise(
        NoiseModel(sigma2=0.5))
    x = Rng(7).child(1).standard_normal(6)
    clean = check_one_step_descent(obj, x, 0.1 * x, StepParams(eta=1e-3, lam=1.0),
                                   2000, Rng(7).child(2))
    assert clean.passed
    try:
        set_fault_injection(True)
        broken = check_one_step_descent(obj, x, 0.1 * x,
                                        StepParams(eta=1e-3, lam=1.0),
                                        2000, Rng(7).child(2))
    finally:
        set_fault_injection(False)
    assert not broken.passed
