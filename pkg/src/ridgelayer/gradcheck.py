"""Central finite differences for checking analytic gradients."""

import numpy as np

from .loss import LossKind, ShrinkageParams, evaluate_loss
from .ridge import RidgeConfig, SolverPath, predict, ridge_backward, ridge_forward


def numerical_grad(f, x, eps=1e-6):
    """Central-difference gradient of scalar ``f`` at array ``x``."""
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f(x)
        flat[i] = orig - eps
        fm = f(x)
        flat[i] = orig
        g[i] = (fp - fm) / (2.0 * eps)
    return grad


def max_rel_error(analytic, numeric):
    """Largest entrywise deviation, relative to the gradient's scale.

    ``max |a - n| / max(||n||_inf, 1e-12)``. Normalizing by the largest entry
    keeps near-zero entries from amplifying finite-difference round-off.
    """
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    scale = max(float(np.max(np.abs(numeric), initial=0.0)), 1e-12)
    return float(np.max(np.abs(analytic - numeric), initial=0.0) / scale)


def layer_problem(n, d, seed=0):
    """Unit-scale random ``(x, y, z, y_test)`` for gradient checks."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    y = rng.uniform(0.0, 1.0, n)
    z = rng.standard_normal((n, d))
    y_test = rng.uniform(0.0, 1.0, n)
    return x, y, z, y_test


def end_to_end_check(n=10, d=6, loss=LossKind.MODIFIED, seed=0,
                     path=SolverPath.AUTO, lam=0.1, eps=1e-6, params=None):
    """Compare analytic and numerical gradients of ``loss(Z w(X, y))``.

    Returns a dict of maximum relative errors for ``x``, ``y`` and ``z`` plus
    the path the solver took.
    """
    x, y, z, y_test = layer_problem(n, d, seed)
    cfg = RidgeConfig(lam, path)
    params = params or ShrinkageParams()

    def scalar(x_, y_, z_):
        w = ridge_forward(x_, y_, cfg).w
        return evaluate_loss(loss, predict(z_, w), y_test, params)[0]

    rec = ridge_forward(x, y, cfg)
    _, d_pred = evaluate_loss(loss, predict(z, rec.w), y_test, params)
    grads = ridge_backward(rec, z.T @ d_pred)
    d_z = np.outer(d_pred, rec.w)

    return {
        "path": rec.path_taken.value,
        "x": max_rel_error(grads.d_x, numerical_grad(lambda a: scalar(a, y, z), x, eps)),
        "y": max_rel_error(grads.d_y, numerical_grad(lambda a: scalar(x, a, z), y, eps)),
        "z": max_rel_error(d_z, numerical_grad(lambda a: scalar(x, y, a), z, eps)),
    }
