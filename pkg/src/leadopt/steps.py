"""Single-step update rules, as pure functions from state to state.

All rules delegate the elementwise arithmetic to the selected kernel
lane (see leadopt.kernels).
"""

from dataclasses import dataclass

from . import kernels
from .errors import DimensionMismatch
from .linalg import as_vector

# Test-only fault injection: flips the gradient sign in lsgd_step so a
# mutation run can prove the verification suite has teeth.
_FLIP_GRADIENT_SIGN = False


def set_fault_injection(enabled):
    global _FLIP_GRADIENT_SIGN
    _FLIP_GRADIENT_SIGN = bool(enabled)


@dataclass
class StepParams:
    """Learning rate and pull strengths.

    `beta` is the elastic-averaging coefficient of the deep-learning
    configs; it converts to the per-step coefficient alpha = beta / p
    (worker count), applied as ``x+ = x - eta*g - alpha*(x - center)``.
    """

    eta: float
    lam: float = 0.0
    lam_g: float = 0.0
    beta: float = None

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError(f"learning rate must be positive, got {self.eta}")
        if self.lam < 0 or self.lam_g < 0:
            raise ValueError("pull coefficients must be nonnegative")

    def elastic_lambda(self, p):
        """Per-step elastic pull for EAGD with `p` workers.

        Returns lam directly when set; otherwise converts beta via
        alpha = beta/p = eta*lambda, i.e. lambda = beta / (p * eta).
        """
        if self.beta is not None:
            return self.beta / (p * self.eta)
        return self.lam


def _check_dims(*vectors):
    dim = vectors[0].shape[0]
    for i, v in enumerate(vectors[1:], start=1):
        if v.shape[0] != dim:
            raise DimensionMismatch(
                f"argument {i} has dim {v.shape[0]}, expected {dim}", index=i
            )


def lsgd_step(x, g, local_leader, global_leader, p):
    """x - eta*g - lam*(x - local_leader) - lam_g*(x - global_leader).

    With lam = lam_g = 0 this is bitwise identical to a plain gradient
    step, and it reduces to one whenever x is itself the leader.
    """
    x = as_vector(x)
    g = as_vector(g)
    local_leader = as_vector(local_leader)
    global_leader = as_vector(global_leader)
    _check_dims(x, g, local_leader, global_leader)
    if _FLIP_GRADIENT_SIGN:
        g = -g
    return kernels.lsgd_update(x, g, local_leader, global_leader, p.eta, p.lam, p.lam_g)


def sgd_step(x, g, eta):
    x = as_vector(x)
    g = as_vector(g)
    _check_dims(x, g)
    return kernels.sgd_update(x, g, eta)


def pull_only_step(x, leader, coeff):
    """Move x toward the leader: x - coeff*(x - leader).

    coeff is clamped to [0, 1] by contract; anything larger would
    overshoot the leader, which no configuration in this package uses.
    """
    if not 0.0 <= coeff <= 1.0:
        raise ValueError(f"pull coefficient must be in [0, 1], got {coeff}")
    x = as_vector(x)
    leader = as_vector(leader)
    _check_dims(x, leader)
    return kernels.pull_update(x, leader, coeff)


def eagd_worker_step(x, g, center, p, lam=None):
    """(1 - eta*lam)*x + eta*lam*center - eta*g."""
    lam = p.lam if lam is None else lam
    if p.eta * lam > 1.0:
        raise ValueError(f"eta*lambda = {p.eta * lam} > 1 diverges")
    x = as_vector(x)
    g = as_vector(g)
    center = as_vector(center)
    _check_dims(x, g, center)
    return kernels.eagd_worker_update(x, g, center, p.eta, lam)


def eagd_center_step(center, workers, p, lam=None):
    """(1 - p*eta*lam)*center + p*eta*lam*mean(workers)."""
    lam = p.lam if lam is None else lam
    nworkers = len(workers)
    rate = nworkers * p.eta * lam
    if rate > 1.0:
        raise ValueError(f"p*eta*lambda = {rate} > 1 diverges")
    center = as_vector(center)
    workers = [as_vector(w) for w in workers]
    _check_dims(center, *workers)
    mean = sum(workers) / nworkers
    return kernels.eagd_center_update(center, mean, rate)


def downpour_exchange(worker_grad_accum, center, eta):
    """Push the accumulated gradient to the center, pull parameters.

    Returns (new_center, new_worker); the caller resets the
    accumulator.
    """
    accum = as_vector(worker_grad_accum)
    center = as_vector(center)
    _check_dims(accum, center)
    new_center = kernels.sgd_update(center, accum, eta)
    return new_center, new_center.copy()
