"""Small dense linear algebra: combinations, the finite-difference
gradient oracle, and a pivoted solver for the tiny systems used by the
piecewise-polynomial counterexample construction.

Parameter vectors are plain 1-D float64 numpy arrays throughout the
package; matrices are 2-D float64 arrays (row-major).
"""

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue, SingularMatrix

MAX_SOLVE_DIM = 16


def as_vector(x):
    """Coerce to a float64 1-D array (copies only when needed)."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        v = v.ravel()
    return v


def axpy_combine(coeffs, vectors):
    """Return sum_i coeffs[i] * vectors[i]."""
    if len(coeffs) == 0 or len(coeffs) != len(vectors):
        raise DimensionMismatch(
            f"need equally many coefficients and vectors, got {len(coeffs)} and {len(vectors)}"
        )
    vecs = [as_vector(v) for v in vectors]
    dim = vecs[0].shape[0]
    for i, v in enumerate(vecs):
        if v.shape[0] != dim:
            raise DimensionMismatch(
                f"vector {i} has dim {v.shape[0]}, expected {dim}", index=i
            )
    out = np.zeros(dim)
    for c, v in zip(coeffs, vecs):
        out += c * v
    return out


def finite_diff_gradient(f, x, h=1e-5):
    """Central-difference gradient oracle: (f(x+h e_i) - f(x-h e_i)) / 2h.

    `f` is called with a 1-D array and must return a finite scalar.
    """
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    x = as_vector(x)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp = f(xp)
        fm = f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteValue(
                f"non-finite objective value at coordinate {i}", index=i
            )
        grad[i] = (fp - fm) / (2.0 * h)
    return grad


def solve_small_linear(A, b, pivot_tol=1e-12):
    """Solve A x = b by Gaussian elimination with partial pivoting.

    Only intended for tiny systems (dim <= 16).  Raises SingularMatrix
    when the best available pivot falls below `pivot_tol`.
    """
    A = np.array(A, dtype=np.float64)
    b = as_vector(b).copy()
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise DimensionMismatch(f"matrix must be square, got shape {A.shape}")
    if b.shape[0] != n:
        raise DimensionMismatch(f"rhs has dim {b.shape[0]}, expected {n}")
    if n > MAX_SOLVE_DIM:
        raise DimensionMismatch(f"solver limited to dim {MAX_SOLVE_DIM}, got {n}")

    smallest_pivot = np.inf
    for col in range(n):
        p = col + int(np.argmax(np.abs(A[col:, col])))
        pivot = A[p, col]
        smallest_pivot = min(smallest_pivot, abs(pivot))
        if abs(pivot) <= pivot_tol:
            raise SingularMatrix(
                f"singular to tolerance: pivot {pivot:.3e} in column {col}",
                smallest_pivot=abs(pivot),
            )
        if p != col:
            A[[col, p]] = A[[p, col]]
            b[[col, p]] = b[[p, col]]
        for row in range(col + 1, n):
            factor = A[row, col] / pivot
            A[row, col:] -= factor * A[col, col:]
            b[row] -= factor * b[col]

    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - A[row, row + 1:] @ x[row + 1:]) / A[row, row]
    return x


def random_rotation(dim, rng):
    """Seeded random orthogonal matrix (QR of a Gaussian, sign-fixed)."""
    g = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))
