"""Executable checks of the convergence bounds, counterexample, and
angle-improvement volume statements, each reported with measured slack.

Monte Carlo checks pass when lhs <= rhs + (multiplier * standard
error); deterministic checks use a fixed tolerance.  A check whose
step-size preconditions fail is reported as inapplicable, not failed:
the bounds are conditional statements.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from . import cluster
from .cluster import ClusterConfig, run, run_synchronous
from .objectives import (
    NoiseModel,
    Quadratic,
    easgd_counterexample_f,
    quadratic_with_condition,
    stochastic_gradient,
)
from .rng import Rng
from .steps import StepParams, lsgd_step

PASS = "pass"
FAIL = "fail"
INAPPLICABLE = "inapplicable"


@dataclass
class BoundReport:
    name: str
    lhs: float
    rhs: float
    mc_std_error: Optional[float] = None
    trials: int = 1
    status: str = PASS
    se_multiplier: float = 4.0
    tolerance: float = 0.0

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return self.status == PASS

    @property
    def applicable(self):
        return self.status != INAPPLICABLE

    @classmethod
    def evaluate(cls, name, lhs, rhs, mc_std_error=None, trials=1,
                 se_multiplier=4.0, tolerance=0.0):
        margin = tolerance
        if mc_std_error is not None:
            margin += se_multiplier * mc_std_error
        status = PASS if lhs <= rhs + margin else FAIL
        return cls(name, float(lhs), float(rhs), mc_std_error, trials,
                   status, se_multiplier, tolerance)

    @classmethod
    def inapplicable(cls, name, reason=""):
        r = cls(name, math.nan, math.nan, None, 0, INAPPLICABLE)
        r.reason = reason
        return r

    def csv_row(self):
        fmt = cluster.format_float
        se = "" if self.mc_std_error is None else fmt(self.mc_std_error)
        lhs = "" if math.isnan(self.lhs) else fmt(self.lhs)
        rhs = "" if math.isnan(self.rhs) else fmt(self.rhs)
        slack = "" if math.isnan(self.lhs) else fmt(self.slack)
        return f"{self.name},{lhs},{rhs},{slack},{se},{self.trials},{self.status}"


CSV_HEADER = "name,lhs,rhs,slack,std_error,trials,status"


def step_size_preconditions(obj, eta, lam, nu=0.0):
    """The three conditions under which the one-step descent bound and
    its consequences apply."""
    m, M = obj.strong_convexity, obj.lipschitz
    kappa = M / m
    return (
        eta <= 1.0 / (2.0 * M * (nu + 1.0))
        and eta * lam <= 1.0 / (2.0 * kappa)
        and eta * math.sqrt(lam) <= 1.0 / (kappa * math.sqrt(2.0 * m))
    )


def check_one_step_descent(obj, x, z, p, trials, rng, name="one_step_descent"):
    """Monte Carlo check of the expected descent inequality

        E f(x+) - f* <= (1 - m*eta)(f(x) - f*) - eta*lam*(f(x) - f(z))
                        + (eta^2 M / 2) sigma^2

    for the iteration x+ = x - eta*(g~ + lam*(x - z)).
    """
    eta, lam = p.eta, p.lam
    noise = obj.noise
    if not step_size_preconditions(obj, eta, lam, nu=noise.nu):
        return BoundReport.inapplicable(name, "step-size preconditions violated")
    m, M = obj.strong_convexity, obj.lipschitz
    fx, fz = obj.value(x), obj.value(z)
    fstar = 0.0  # quadratics in this suite are minimized at the origin

    # The iteration's pull coefficient is eta*lam; routed through the
    # production step rule.
    iter_params = StepParams(eta=eta, lam=eta * lam)
    fplus = np.empty(trials)
    for t in range(trials):
        g = stochastic_gradient(obj, x, rng)
        fplus[t] = obj.value(lsgd_step(x, g, z, z, iter_params))

    lhs = float(np.mean(fplus)) - fstar
    rhs = (1.0 - m * eta) * (fx - fstar) - eta * lam * (fx - fz) \
        + 0.5 * eta * eta * M * noise.sigma2
    se = float(np.std(fplus, ddof=1) / math.sqrt(trials)) if trials > 1 else None
    return BoundReport.evaluate(name, lhs, rhs, mc_std_error=se, trials=trials,
                                tolerance=1e-12)


def check_stale_leader(obj, x, z, p, trials, rng, name="stale_leader"):
    """If f(x) <= f(z), then E f(x+) <= f(z) + eta^2*M*sigma^2/2."""
    eta, lam = p.eta, p.lam
    noise = obj.noise
    if not (eta * lam <= 1.0 and step_size_preconditions(obj, eta, lam, nu=noise.nu)):
        return BoundReport.inapplicable(name, "step-size preconditions violated")
    fx, fz = obj.value(x), obj.value(z)
    if fx > fz:
        return BoundReport.inapplicable(name, "requires f(x) <= f(z)")
    iter_params = StepParams(eta=eta, lam=eta * lam)
    fplus = np.empty(trials)
    for t in range(trials):
        g = stochastic_gradient(obj, x, rng)
        fplus[t] = obj.value(lsgd_step(x, g, z, z, iter_params))
    lhs = float(np.mean(fplus))
    rhs = fz + 0.5 * eta * eta * obj.lipschitz * noise.sigma2
    se = float(np.std(fplus, ddof=1) / math.sqrt(trials)) if trials > 1 else None
    return BoundReport.evaluate(name, lhs, rhs, mc_std_error=se, trials=trials)


def check_psi_minimizer(obj, z, lam, name="psi_minimizer"):
    """The minimizer w of psi(x) = f(x) + lam/2 ||x - z||^2 satisfies

        f(w) - f* <= lam/(m+lam) (f(z) - f*)
        ||w - x*||^2 <= lam^2 / (m(m+lam)) ||z - x*||^2

    For quadratics w = (A + lam I)^{-1} (lam z) in closed form.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    z = np.asarray(z, dtype=np.float64)
    m = obj.strong_convexity
    w = np.linalg.solve(obj.A + lam * np.eye(obj.dim), lam * z)
    fw, fz = obj.value(w), obj.value(z)
    value = BoundReport.evaluate(
        f"{name}_value", fw, lam / (m + lam) * fz, tolerance=1e-9)
    dist = BoundReport.evaluate(
        f"{name}_distance", float(w @ w),
        lam * lam / (m * (m + lam)) * float(z @ z), tolerance=1e-9)
    return [value, dist]


def check_stochastic_leader_bounds(p, gaps, sigma_f, trials, rng,
                                   name="stochastic_leader"):
    """One noisy sample per candidate; verify the expectation bound
    E[mu~ - mu_1] <= 4 sqrt(p) sigma and the tail bound
    Pr(mu~ >= mu_1 + a) <= 4 sigma^2 p / a^2 at a = 2 sqrt(p) sigma.
    """
    gaps = np.asarray(gaps, dtype=np.float64)
    if gaps[0] != 0.0 or np.any(np.diff(gaps) < 0):
        raise ValueError("gaps must be nondecreasing with gaps[0] = 0")
    mus = gaps
    samples = mus + sigma_f * rng.standard_normal((trials, p))
    picked = mus[np.argmin(samples, axis=1)]

    exp_lhs = float(np.mean(picked))
    exp_rhs = 4.0 * math.sqrt(p) * sigma_f
    exp_se = float(np.std(picked, ddof=1) / math.sqrt(trials)) if trials > 1 else None
    exp_rep = BoundReport.evaluate(f"{name}_expectation", exp_lhs, exp_rhs,
                                   mc_std_error=exp_se, trials=trials)

    a = 2.0 * math.sqrt(p) * sigma_f if sigma_f > 0 else 1.0
    tail_hat = float(np.mean(picked >= a))
    tail_rhs = min(1.0, 4.0 * sigma_f ** 2 * p / a ** 2)
    tail_se = math.sqrt(max(tail_hat * (1 - tail_hat), 1e-12) / trials)
    tail_rep = BoundReport.evaluate(f"{name}_tail", tail_hat, tail_rhs,
                                    mc_std_error=tail_se, trials=trials)
    return [exp_rep, tail_rep]


def check_limsup_steady_state(obj, eta, sigma2, seeds, steps, base_seed=0,
                              name="limsup_steady_state"):
    """Long-run mean optimality gap under constant-step SGD stays below
    eta*kappa*sigma^2/2 (the leader term only helps)."""
    if not step_size_preconditions(obj, eta, 0.0):
        return BoundReport.inapplicable(name, "step size too large")
    kappa = obj.condition_number
    tails = []
    for s in range(seeds):
        config = ClusterConfig(
            n=1, l=1, method="sgd", step=StepParams(eta=eta),
            noise=NoiseModel(sigma2=sigma2), seed=base_seed + s,
            max_total_steps=steps,
        )
        x0 = [np.zeros(obj.dim)]
        _, events = run(config, obj, x0)
        values = [e.f_value for e in events if e.kind == "grad_step"]
        tails.append(float(np.mean(values[steps // 2:])))
    lhs = float(np.mean(tails))
    se = float(np.std(tails, ddof=1) / math.sqrt(seeds))
    rhs = 0.5 * eta * kappa * sigma2
    return BoundReport.evaluate(name, lhs, rhs, mc_std_error=se, trials=seeds)


def check_rate_1_over_k(config, obj, seeds=20, name="rate_one_over_k",
                        tail_from=500):
    """With eta_k = Theta(1/k), the statistic k * E[f(x_k) - f*] must
    stay bounded: no statistically significant upward trend over the
    tail (one-sided Spearman test at 5%)."""
    steps = config.max_total_steps
    gaps = np.zeros(steps)
    for s in range(seeds):
        cfg = ClusterConfig(
            n=config.n, l=config.l, method=config.method, step=config.step,
            noise=config.noise, eta_schedule=config.eta_schedule,
            lambda_schedule=config.lambda_schedule,
            seed=config.seed + s, max_total_steps=steps, tau=config.tau,
        )
        x0 = [np.zeros(obj.dim) for _ in range(cfg.n_workers)]
        _, events = run(cfg, obj, x0)
        gaps += np.array([e.f_value for e in events if e.kind == "grad_step"])
    gaps /= seeds
    ks = np.arange(tail_from, steps)
    stat = ks * gaps[tail_from:]
    rho, pvalue = stats.spearmanr(ks, stat)
    increasing = rho > 0 and pvalue / 2.0 < 0.05
    return BoundReport(name, float(rho), 0.0, None, seeds,
                       FAIL if increasing else PASS)


def solve_elastic_fixed_point(lam, tol=1e-12):
    """Bisect e^{1-y} = lam*y for y >= 1 (exists for 0 < lam <= 1)."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must be in (0, 1]")

    def g(y):
        return math.exp(1.0 - y) - lam * y

    lo, hi = 1.0, max(2.0, 2.0 / lam)
    if g(lo) == 0.0:
        return lo
    if g(lo) < 0.0 or g(hi) > 0.0:
        raise ValueError(f"bisection bracket failure on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_easgd_counterexample(lam, name=None):
    """The point (-y, y, 0) with e^{1-y} = lam*y is stationary for the
    two-worker elastic-averaging objective, yet none of its coordinates
    is a stationary point of f itself."""
    name = name or f"easgd_counterexample_lam_{lam:g}"
    f = easgd_counterexample_f()
    y = solve_elastic_fixed_point(lam)

    c1 = f.scalar_derivative(-y) + lam * (-y - 0.0)
    c2 = f.scalar_derivative(y) + lam * (y - 0.0)
    c3 = lam * (0.0 - (-y)) + lam * (0.0 - y)
    stationary = BoundReport.evaluate(
        f"{name}_stationary", max(abs(c1), abs(c2), abs(c3)), 0.0, tolerance=1e-9)

    fmin = min(abs(f.scalar_derivative(-y)), abs(f.scalar_derivative(y)),
               abs(f.scalar_derivative(0.0)))
    floor = lam * min(1.0, y) * (1.0 - 1e-9)
    nonstationary = BoundReport.evaluate(f"{name}_nonstationary_f", floor, fmin)
    return [stationary, nonstationary]


def _angle_cos(u, v):
    return float(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))


def sample_sublevel_ellipsoid(A, radius2, count, rng, batch=None):
    """Uniform samples of {z: z^T A z <= radius2} by rejection in the
    eigenbasis bounding box.  Fine for the low dimensions used here."""
    evals, evecs = np.linalg.eigh(A)
    half_widths = np.sqrt(radius2 / evals)
    batch = batch or max(4 * count, 10000)
    out = []
    have = 0
    while have < count:
        u = rng.uniform(-1.0, 1.0, size=(batch, len(evals))) * half_widths
        keep = u[(u * u) @ evals <= radius2]
        out.append(keep)
        have += len(keep)
    u = np.concatenate(out)[:count]
    return u @ evecs.T


def angle_set_fraction(A, x, lam, samples, rng):
    """Monte Carlo fraction of the candidate set E = {z: f(z) <= f(x)}
    whose pull rotates the step direction at least as close to the
    Newton direction as plain gradient descent."""
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    ax = A @ x
    cos_x = _angle_cos(ax, x)  # theta(-Ax, -x) == theta(Ax, x)
    z = sample_sublevel_ellipsoid(A, float(x @ ax), samples, rng)
    d = -(ax[None, :] + lam * (x[None, :] - z))
    cos_d = (d @ -x) / (np.linalg.norm(d, axis=1) * np.linalg.norm(x))
    frac = float(np.mean(cos_d >= cos_x * (1.0 - 1e-12) - 1e-15))
    return frac, cos_x


def check_angle_improvement(A, x, lam, samples, rng, branch="limit", name=None):
    """Volume checks: the improvement set covers at least half the
    candidate ellipsoid, either in the small-pull limit (`limit`) or,
    for points on the large-angle shell with admissible r, at any pull
    strength (`any_lambda`)."""
    name = name or f"angle_improvement_{branch}_lam_{lam:g}"
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    evals = np.linalg.eigvalsh(A)
    kappa = evals[-1] / evals[0]
    cos_x = _angle_cos(A @ x, x)
    theta_x = math.acos(min(1.0, max(-1.0, cos_x)))

    if branch == "limit" and theta_x <= 1e-6:
        return BoundReport.inapplicable(name, "theta_x below threshold")
    if branch == "any_lambda":
        r = math.sqrt(kappa) * cos_x
        if r / math.sqrt(kappa) + r ** 1.5 / kappa ** 0.25 > 1.0:
            return BoundReport.inapplicable(name, f"r={r:.4g} outside admissible range")

    frac, _ = angle_set_fraction(A, x, lam, samples, rng)
    se = math.sqrt(max(frac * (1 - frac), 1e-12) / samples)
    return BoundReport.evaluate(name, 0.5, frac, mc_std_error=se,
                                trials=samples, se_multiplier=3.0)


def large_angle_shell_point(evals, scale=1.0):
    """A point achieving cos(theta) = 2/(sqrt(kappa)+1/sqrt(kappa)) for
    a diagonal spectrum: mass split between the extreme eigenvectors."""
    n = len(evals)
    x = np.zeros(n)
    a1, an = evals[0], evals[-1]
    x[0] = math.sqrt(an / (a1 + an))
    x[-1] = math.sqrt(a1 / (a1 + an))
    return scale * x


def check_stationary_consistency(obj, n_workers, eta, lam, seed=0,
                                 name="stationary_point_consistency"):
    """If lockstep leader descent converges (step norms < 1e-10), the
    leader sits at a stationary point of f (gradient norm < 1e-8)."""
    config = ClusterConfig(
        n=1, l=n_workers, method="lgd", step=StepParams(eta=eta, lam=lam),
        seed=seed, max_total_steps=200000,
    )
    rng = Rng(seed, (77,))
    init = [rng.standard_normal(obj.dim) for _ in range(n_workers)]
    result = run_synchronous(config, obj, init, max_rounds=200000, tol=1e-10)
    if not result.converged:
        return BoundReport.inapplicable(name, "did not converge within budget")
    leader = result.state.params[result.best_ids[-1]]
    gnorm = float(np.linalg.norm(obj.gradient(leader)))
    return BoundReport.evaluate(name, gnorm, 1e-8)


def check_leader_gradient_vanishing(obj, n_workers, eta, lam, tau, rounds,
                                    seed=0, name="leader_gradient_vanishing"):
    """With any fixed period schedule and eta < 2/M, the recorded
    leader-gradient norms dip below 1e-6 within the budget."""
    if obj.lipschitz is not None and eta >= 2.0 / obj.lipschitz:
        return BoundReport.inapplicable(name, "step size >= 2/M")
    config = ClusterConfig(
        n=1, l=n_workers, method="lgd", step=StepParams(eta=eta, lam=lam),
        tau=tau, seed=seed, max_total_steps=rounds,
    )
    rng = Rng(seed, (78,))
    init = [rng.standard_normal(obj.dim) for _ in range(n_workers)]
    result = run_synchronous(config, obj, init, max_rounds=rounds)
    min_gnorm = min(result.leader_grad_norms)
    return BoundReport.evaluate(name, min_gnorm, 1e-6)


def default_checks(seed=2026):
    """The named check suite behind the `verify` command."""
    rng = Rng(seed)
    checks = []

    def add(name, thunk):
        checks.append((name, thunk))

    # One-step descent: exact hand case, then Monte Carlo with noise.
    iso = Quadratic(np.eye(2))
    add("thm1_descent_noiseless", lambda: check_one_step_descent(
        iso, np.array([1.0, 0.0]), np.zeros(2), StepParams(eta=0.25, lam=0.5),
        trials=1, rng=rng.child(1), name="thm1_descent_noiseless"))

    quad100 = quadratic_with_condition(10, 100.0, rng.child(2))
    noisy100 = quad100.with_noise(NoiseModel(sigma2=1.0, nu=0.5))
    xz_rng = rng.child(3)
    x0 = xz_rng.standard_normal(10)
    z0 = 0.5 * xz_rng.standard_normal(10)
    add("thm1_descent_mc", lambda: check_one_step_descent(
        noisy100, x0, z0, StepParams(eta=1.0 / 300.0, lam=1.5),
        trials=100000, rng=rng.child(4), name="thm1_descent_mc"))

    quad10 = quadratic_with_condition(4, 10.0, rng.child(5))
    add("thm1_limsup_steady_state", lambda: check_limsup_steady_state(
        quad10, eta=0.01, sigma2=1.0, seeds=24, steps=3000,
        base_seed=seed, name="thm1_limsup_steady_state"))

    add("stale_leader_safety", lambda: check_stale_leader(
        noisy100, 0.2 * x0, x0, StepParams(eta=1.0 / 300.0, lam=1.5),
        trials=100000, rng=rng.child(6), name="stale_leader_safety"))

    one_d = Quadratic(np.array([[1.0]]))

    def psi_checks():
        reports = check_psi_minimizer(one_d, np.array([2.0]), 1.0,
                                      name="thm2_psi_1d")
        quad6 = quadratic_with_condition(6, 50.0, rng.child(7))
        zr = rng.child(8).standard_normal(6)
        reports += check_psi_minimizer(quad6, zr, 0.5, name="thm2_psi_lam_0.5")
        reports += check_psi_minimizer(quad6, zr, 1e6, name="thm2_psi_lam_1e6")
        return reports

    add("thm2_psi_minimizer", psi_checks)

    add("lemma_y_bounds", lambda: check_stochastic_leader_bounds(
        8, np.arange(8.0), 0.5, 100000, rng.child(9), name="lemma_y"))

    rate_cfg = ClusterConfig(
        n=1, l=1, method="sgd", step=StepParams(eta=0.5),
        noise=NoiseModel(sigma2=1.0), eta_schedule="theta_one_over_k",
        seed=seed + 100, max_total_steps=5000,
    )
    rate_obj = quadratic_with_condition(2, 5.0, rng.child(10))
    add("thm3_rate_one_over_k", lambda: check_rate_1_over_k(
        rate_cfg, rate_obj, seeds=20, name="thm3_rate_one_over_k"))

    quad3 = quadratic_with_condition(3, 8.0, rng.child(11))
    add("thm4_stationary_consistency", lambda: check_stationary_consistency(
        quad3, n_workers=4, eta=0.1, lam=0.5, seed=seed,
        name="thm4_stationary_consistency"))
    add("thm5_leader_gradient_vanishing", lambda: check_leader_gradient_vanishing(
        quad3, n_workers=4, eta=0.1, lam=0.5, tau=8, rounds=5000, seed=seed,
        name="thm5_leader_gradient_vanishing"))

    for lam in (0.1, 0.25, 0.5, 0.75, 1.0):
        add(f"prop1_easgd_counterexample_lam_{lam:g}",
            lambda lam=lam: check_easgd_counterexample(
                lam, name=f"prop1_easgd_counterexample_lam_{lam:g}"))

    A6 = np.diag([1.0, 100.0])
    x_rand = np.array([0.7, 0.4])
    add("thm6_angle_limit", lambda: check_angle_improvement(
        A6, x_rand, 1e-6, 100000, rng.child(12), branch="limit",
        name="thm6_angle_limit_lam_1e-06"))

    A7 = np.diag([1.0, 200.0])
    x_shell = large_angle_shell_point(np.array([1.0, 200.0]))
    for lam in (0.01, 1.0, 100.0):
        add(f"thm7_angle_any_lambda_{lam:g}",
            lambda lam=lam: check_angle_improvement(
                A7, x_shell, lam, 100000, rng.child(13),
                branch="any_lambda", name=f"thm7_angle_lam_{lam:g}"))

    return checks


def run_checks(filter_pattern=None, seed=2026):
    """Run (a filtered subset of) the default suite; returns the flat
    list of reports."""
    reports = []
    for name, thunk in default_checks(seed=seed):
        if filter_pattern and filter_pattern not in name:
            continue
        result = thunk()
        reports.extend(result if isinstance(result, list) else [result])
    return reports
