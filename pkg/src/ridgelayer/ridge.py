"""Closed-form ridge regression as a differentiable layer.

The forward pass solves

    min_w ||X w - y||^2 + lam ||w||^2

either through the D x D primal system ``(X^T X + lam I) w = X^T y`` or the
N x N dual system ``w = X^T (X X^T + lam I)^{-1} y``. Both give the same
``w`` (Woodbury identity); the dual is cheaper whenever D > N.

The backward pass differentiates the normal equations. With upstream
gradient ``g = dL/dw`` and ``v = (X^T X + lam I)^{-1} g``::

    dL/dy = X v
    dL/dX = (y - X w) v^T - (X v) w^T

On the dual path ``v`` is recovered from the cached N x N factorization via
``v = (g - X^T u) / lam`` with ``u = (X X^T + lam I)^{-1} X g``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, EmptyProblem, InvalidConfig
from .tensor import as_matrix, as_vector, spd_factor, spd_solve_factored

DEFAULT_LAMBDA = 0.1


class SolverPath(str, enum.Enum):
    AUTO = "auto"
    PRIMAL = "primal"
    DUAL = "dual"


@dataclass(frozen=True)
class RidgeConfig:
    lam: float = DEFAULT_LAMBDA
    path: SolverPath = SolverPath.AUTO

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InvalidConfig(f"lambda must be > 0, got {self.lam}")
        object.__setattr__(self, "path", SolverPath(self.path))


def choose_path(n, d, path=SolverPath.AUTO):
    """Resolve ``path``; AUTO takes the dual system iff ``d > n``."""
    path = SolverPath(path)
    if path is SolverPath.AUTO:
        return SolverPath.DUAL if d > n else SolverPath.PRIMAL
    return path


@dataclass(frozen=True)
class SolveRecord:
    """Result of :func:`ridge_forward`, holding what the backward pass needs."""

    w: np.ndarray
    path_taken: SolverPath
    factor: tuple = field(repr=False)
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    lam: float = DEFAULT_LAMBDA

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]


@dataclass(frozen=True)
class RidgeGradients:
    d_x: np.ndarray
    d_y: np.ndarray


def _shifted_gram(x, lam, path):
    # x @ x.T on the same buffer is dispatched to BLAS syrk by numpy.
    g = x.T @ x if path is SolverPath.PRIMAL else x @ x.T
    g[np.diag_indices_from(g)] += lam
    return g


def ridge_forward(x, y, cfg=None):
    """Solve the ridge problem for ``w`` and keep the factorization."""
    cfg = cfg or RidgeConfig()
    x = as_matrix(x, "x")
    y = as_vector(y, "y")
    n, d = x.shape
    if n == 0 or d == 0:
        raise EmptyProblem(f"ridge problem needs N, D > 0, got {x.shape}")
    if y.shape[0] != n:
        raise ContractViolation(f"y has length {y.shape[0]}, expected {n}")

    path = choose_path(n, d, cfg.path)
    factor = spd_factor(_shifted_gram(x, cfg.lam, path))
    if path is SolverPath.PRIMAL:
        w = spd_solve_factored(factor, x.T @ y)
    else:
        w = x.T @ spd_solve_factored(factor, y)
    return SolveRecord(w=w, path_taken=path, factor=factor, x=x, y=y,
                       lam=cfg.lam)


def apply_inverse(rec, g):
    """Return ``(X^T X + lam I)^{-1} g`` using the cached factorization."""
    if rec.path_taken is SolverPath.PRIMAL:
        return spd_solve_factored(rec.factor, g)
    u = spd_solve_factored(rec.factor, rec.x @ g)
    return (g - rec.x.T @ u) / rec.lam


def ridge_backward(rec, g_w):
    """Vector-Jacobian product of the ridge solution w.r.t. ``x`` and ``y``."""
    g_w = as_vector(g_w, "g_w")
    if g_w.shape[0] != rec.d:
        raise ContractViolation(
            f"g_w has length {g_w.shape[0]}, expected {rec.d}")
    v = apply_inverse(rec, g_w)
    xv = rec.x @ v
    residual = rec.y - rec.x @ rec.w
    d_x = np.outer(residual, v) - np.outer(xv, rec.w)
    return RidgeGradients(d_x=d_x, d_y=xv)


def predict(z, w):
    """Regression values ``Z w`` for the rows of ``z``."""
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if z.ndim != 2 or w.ndim != 1 or z.shape[1] != w.shape[0]:
        raise ContractViolation(
            f"predict dimension mismatch: z {z.shape}, w {w.shape}")
    return z @ w


def objective(x, y, w, lam):
    """The ridge objective ``||X w - y||^2 + lam ||w||^2``."""
    r = x @ w - y
    return float(r @ r + lam * (w @ w))


def normal_residual(rec):
    """Relative residual of the primal normal equations for ``rec``.

    Returns ``||(X^T X + lam I) w - X^T y||_inf / (1 + ||X^T y||_inf)``,
    computed without forming ``X^T X``.
    """
    x, y, w = rec.x, rec.y, rec.w
    xty = x.T @ y
    lhs = x.T @ (x @ w) + rec.lam * w
    return float(np.max(np.abs(lhs - xty)) / (1.0 + np.max(np.abs(xty))))
