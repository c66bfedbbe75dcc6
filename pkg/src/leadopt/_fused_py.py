"""Pure-numpy fallback for the fused per-step update kernels.

Expression order matches leadopt._fused elementwise, so both lanes
produce bitwise-identical results.
"""

BACKEND = "numpy"


def lsgd_update(x, g, xl, xg, eta, lam, lam_g):
    return x - eta * g - lam * (x - xl) - lam_g * (x - xg)


def sgd_update(x, g, eta):
    return x - eta * g


def pull_update(x, leader, coeff):
    return x - coeff * (x - leader)


def eagd_worker_update(x, g, center, eta, lam):
    keep = 1.0 - eta * lam
    mix = eta * lam
    return keep * x + mix * center - eta * g


def eagd_center_update(center, worker_mean, rate):
    keep = 1.0 - rate
    return keep * center + rate * worker_mean
