"""Differentiating through the solver.

The backward pass reuses the forward Cholesky factor. Here it is checked
against central differences, first for the layer alone and then for the
full chain embedding -> solve -> predict -> loss.
"""
import numpy as np

from ridgelayer import (LossKind, RidgeConfig, SolverPath, ridge_backward,
                        ridge_forward)
from ridgelayer.gradcheck import end_to_end_check, max_rel_error, numerical_grad

rng = np.random.default_rng(1)
x = rng.standard_normal((6, 9))
y = rng.standard_normal(6)
g_w = rng.standard_normal(9)

for path in (SolverPath.PRIMAL, SolverPath.DUAL):
    cfg = RidgeConfig(0.1, path)
    grads = ridge_backward(ridge_forward(x, y, cfg), g_w)
    num = numerical_grad(lambda a: g_w @ ridge_forward(a, y, cfg).w, x)
    print(f"layer {path.value:6s} d_x error {max_rel_error(grads.d_x, num):.1e}")

for loss in LossKind:
    for path in (SolverPath.PRIMAL, SolverPath.DUAL):
        errs = end_to_end_check(n=10, d=6, loss=loss, path=path)
        worst = max(errs["x"], errs["y"], errs["z"])
        print(f"end-to-end {loss.value:8s} {path.value:6s} worst error {worst:.1e}")
