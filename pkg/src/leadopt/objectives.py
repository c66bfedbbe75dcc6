"""Test objectives with exact gradients, plus stochastic estimators.

All objectives operate on flat 1-D float64 parameter vectors; matrix
variables are flattened row-major so every optimizer in the package is
dimension-agnostic.
"""

import copy
import math

import numpy as np

from .linalg import as_vector, random_rotation, solve_small_linear


class NoiseModel:
    """Variance parameters of the stochastic estimators.

    sigma2  additive gradient variance (total, not per coordinate)
    nu      relative gradient variance
    sigma_f standard deviation of the function-value estimator
    """

    __slots__ = ("sigma2", "nu", "sigma_f")

    def __init__(self, sigma2=0.0, nu=0.0, sigma_f=0.0):
        if sigma2 < 0 or nu < 0 or sigma_f < 0:
            raise ValueError("noise parameters must be nonnegative")
        self.sigma2 = float(sigma2)
        self.nu = float(nu)
        self.sigma_f = float(sigma_f)

    @property
    def exact(self):
        return self.sigma2 == 0.0 and self.nu == 0.0 and self.sigma_f == 0.0

    def __repr__(self):
        return f"NoiseModel(sigma2={self.sigma2}, nu={self.nu}, sigma_f={self.sigma_f})"


class Objective:
    """A differentiable scalar field with exact value/gradient.

    Subclasses set `dim`, `kind` and implement `value` / `gradient`;
    `strong_convexity` (m) and `lipschitz` (M) are set when known.
    """

    kind = "abstract"
    strong_convexity = None
    lipschitz = None

    def __init__(self, dim, noise=None):
        self.dim = int(dim)
        self.noise = noise if noise is not None else NoiseModel()

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def value_and_grad(self, x):
        return self.value(x), self.gradient(x)

    def value_and_grad_many(self, xs):
        """Evaluate a batch of points; subclasses may vectorize."""
        return [self.value_and_grad(x) for x in xs]

    def with_noise(self, noise):
        obj = copy.copy(self)
        obj.noise = noise
        return obj

    @property
    def condition_number(self):
        if self.strong_convexity and self.lipschitz:
            return self.lipschitz / self.strong_convexity
        return None


class Quadratic(Objective):
    """f(x) = 1/2 x^T A x with symmetric positive definite A.

    Minimizer is the origin with value 0.
    """

    kind = "quadratic"

    def __init__(self, A, eigenvalues=None, noise=None):
        A = np.asarray(A, dtype=np.float64)
        super().__init__(A.shape[0], noise)
        self.A = (A + A.T) / 2.0
        if eigenvalues is None:
            eigenvalues = np.linalg.eigvalsh(self.A)
        self.eigenvalues = np.sort(np.asarray(eigenvalues, dtype=np.float64))
        self.strong_convexity = float(self.eigenvalues[0])
        self.lipschitz = float(self.eigenvalues[-1])

    def value(self, x):
        x = as_vector(x)
        return 0.5 * float(x @ (self.A @ x))

    def gradient(self, x):
        return self.A @ as_vector(x)

    def value_and_grad(self, x):
        x = as_vector(x)
        ax = self.A @ x
        return 0.5 * float(x @ ax), ax


def quadratic_with_condition(dim, kappa, rng):
    """Quadratic with spectrum log-uniformly spaced in [1, kappa],
    conjugated by a seeded random rotation."""
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if kappa < 1:
        raise ValueError(f"condition number must be >= 1, got {kappa}")
    spectrum = np.geomspace(1.0, float(kappa), dim)
    q = random_rotation(dim, rng)
    A = (q * spectrum) @ q.T
    return Quadratic(A, eigenvalues=spectrum)


class MatrixCompletion(Objective):
    """F(X) = 1/4 ||M - X X^T||_F^2 over flattened X in R^{d x r}.

    The gradient is (X X^T - M) X.  When M = U U^T with U of shape
    (d, r), the global minimum value is 0, attained at X = U.
    """

    kind = "matrix_completion"

    def __init__(self, M, d, r, noise=None):
        super().__init__(d * r, noise)
        self.M = np.asarray(M, dtype=np.float64)
        if self.M.shape != (d, d):
            raise ValueError(f"M must be {d}x{d}, got {self.M.shape}")
        self.d = int(d)
        self.r = int(r)
        self._m2 = float(np.sum(self.M * self.M))

    def _reshape(self, x):
        return as_vector(x).reshape(self.d, self.r)

    # ||M - X X^T||^2 expands to ||X^T X||^2 - 2 tr(X^T M X) + ||M||^2,
    # so value and gradient only ever touch d x r matrices.
    def value(self, x):
        X = self._reshape(x)
        XtX = X.T @ X
        return 0.25 * float(np.sum(XtX * XtX) - 2.0 * np.sum(X * (self.M @ X))
                            + self._m2)

    def gradient(self, x):
        X = self._reshape(x)
        return (X @ (X.T @ X) - self.M @ X).ravel()

    def value_and_grad(self, x):
        X = self._reshape(x)
        XtX = X.T @ X
        MX = self.M @ X
        val = 0.25 * float(np.sum(XtX * XtX) - 2.0 * np.sum(X * MX) + self._m2)
        return val, (X @ XtX - MX).ravel()

    def value_and_grad_many(self, xs):
        # batched matmuls over all points instead of a python loop
        Xs = np.stack([self._reshape(x) for x in xs])
        XtX = Xs.transpose(0, 2, 1) @ Xs
        MX = self.M @ Xs
        vals = 0.25 * (np.sum(XtX * XtX, axis=(1, 2))
                       - 2.0 * np.sum(Xs * MX, axis=(1, 2)) + self._m2)
        grads = (Xs @ XtX - MX).reshape(len(xs), -1)
        return [(float(v), g) for v, g in zip(vals, grads)]


def matrix_completion_problem(d, r, rng):
    """Sample M = U U^T with U having i.i.d. standard normal entries."""
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={d}")
    U = rng.standard_normal((d, r))
    obj = MatrixCompletion(U @ U.T, d, r)
    obj.factor = U
    return obj


class Sinc2D(Objective):
    """L(x, y) = sin(pi*rho) / (pi*rho) with rho = sqrt(x^2 + y^2).

    The removable singularity at the origin is extended continuously:
    value 1, gradient (0, 0).
    """

    kind = "sinc2d"

    def __init__(self, noise=None):
        super().__init__(2, noise)

    def value(self, x):
        x = as_vector(x)
        rho = math.hypot(x[0], x[1])
        if rho == 0.0:
            return 1.0
        return math.sin(math.pi * rho) / (math.pi * rho)

    def gradient(self, x):
        x = as_vector(x)
        rho = math.hypot(x[0], x[1])
        if rho == 0.0:
            return np.zeros(2)
        # dL/drho, then chain rule through rho.
        dld_rho = (math.cos(math.pi * rho) * math.pi * rho - math.sin(math.pi * rho)) / (
            math.pi * rho * rho
        )
        return dld_rho * (x / rho)


def sinc2d():
    return Sinc2D()


# Twice-differentiable-matching conditions for the polynomial middle
# piece: value, first and second derivative at +/-1 (matching e^{x+1}
# on the left and e^{-x+1} on the right), slope 1 at the origin, and
# p(0) = 0 as a normalization.  A degree-6 polynomial cannot satisfy
# these: constraints at +/-1 of equal order decouple by coefficient
# parity, leaving four equations for the three odd coefficients.
# Degree 7 gives two invertible 4x4 parity blocks.
_PIECE_CONSTRAINTS = [
    (1.0, 0, 1.0),   # p(1) = 1
    (1.0, 1, -1.0),  # p'(1) = -1
    (1.0, 2, 1.0),   # p''(1) = 1
    (-1.0, 0, 1.0),  # p(-1) = 1
    (-1.0, 1, 1.0),  # p'(-1) = 1
    (-1.0, 2, 1.0),  # p''(-1) = 1
    (0.0, 1, 1.0),   # p'(0) = 1
    (0.0, 0, 0.0),   # p(0) = 0
]


def _poly_constraint_row(t, order, ncoef=8):
    row = np.zeros(ncoef)
    for k in range(order, ncoef):
        c = 1.0
        for j in range(order):
            c *= k - j
        row[k] = c * t ** (k - order)
    return row


class EasgdCounterexample(Objective):
    """1-D piecewise function: e^{x+1} for x < -1, a degree-7
    polynomial on [-1, 1], and e^{-x+1} for x > 1.

    The polynomial coefficients solve the eight matching constraints
    that make the function twice continuously differentiable with
    slope 1 at the origin; see `easgd_counterexample_system`.
    """

    kind = "easgd_counterexample_f"

    def __init__(self, noise=None):
        super().__init__(1, noise)
        A, b = easgd_counterexample_system()
        self.coefficients = solve_small_linear(A, b)

    def _poly(self, t, order=0):
        return float(_poly_constraint_row(t, order) @ self.coefficients)

    def scalar_value(self, t):
        if t < -1.0:
            return math.exp(t + 1.0)
        if t > 1.0:
            return math.exp(-t + 1.0)
        return self._poly(t)

    def scalar_derivative(self, t):
        if t < -1.0:
            return math.exp(t + 1.0)
        if t > 1.0:
            return -math.exp(-t + 1.0)
        return self._poly(t, order=1)

    def value(self, x):
        return self.scalar_value(float(as_vector(x)[0]))

    def gradient(self, x):
        return np.array([self.scalar_derivative(float(as_vector(x)[0]))])


def easgd_counterexample_system():
    """The 8x8 linear system fixing the middle polynomial."""
    A = np.array([_poly_constraint_row(t, order) for t, order, _ in _PIECE_CONSTRAINTS])
    b = np.array([rhs for _, _, rhs in _PIECE_CONSTRAINTS])
    return A, b


def easgd_counterexample_f():
    return EasgdCounterexample()


def stochastic_gradient(obj, x, rng):
    """Unbiased gradient estimate with total variance exactly
    sigma2 + nu * ||grad f(x)||^2 (Gaussian, spread evenly over
    coordinates).  Noiseless models return the exact gradient bitwise.
    """
    g = obj.gradient(x)
    noise = obj.noise
    if noise.sigma2 == 0.0 and noise.nu == 0.0:
        return g
    total_var = noise.sigma2 + noise.nu * float(g @ g)
    scale = math.sqrt(total_var / obj.dim)
    return g + scale * rng.standard_normal(obj.dim)


def stochastic_value(obj, x, rng):
    """Unbiased value estimate f(x) + N(0, sigma_f^2)."""
    v = obj.value(x)
    if obj.noise.sigma_f == 0.0:
        return v
    return v + obj.noise.sigma_f * float(rng.standard_normal())
