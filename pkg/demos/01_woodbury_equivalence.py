"""Primal vs dual ridge solves.

The two paths give the same weights. Which one is cheaper depends on
whether there are more samples or more feature dimensions.
"""
import time

import numpy as np

from ridgelayer import RidgeConfig, SolverPath, normal_residual, ridge_forward

rng = np.random.default_rng(0)

# a wide problem (more dims than samples) and a tall one
for n, d in [(64, 512), (512, 64)]:
    x = rng.standard_normal((n, d)) / np.sqrt(d)
    y = rng.standard_normal(n)
    primal = ridge_forward(x, y, RidgeConfig(0.1, SolverPath.PRIMAL))
    dual = ridge_forward(x, y, RidgeConfig(0.1, SolverPath.DUAL))
    auto = ridge_forward(x, y)
    print(f"N={n:4d} D={d:4d}  max|w_primal - w_dual| = "
          f"{np.max(np.abs(primal.w - dual.w)):.2e}  auto picks {auto.path_taken.value}"
          f"  residual {normal_residual(auto):.1e}")

# the tracker's operating point: 961 samples, 1024 dims
x = rng.standard_normal((961, 1024)) / 32
y = rng.standard_normal(961)
for path in (SolverPath.PRIMAL, SolverPath.DUAL):
    t0 = time.perf_counter()
    ridge_forward(x, y, RidgeConfig(0.1, path))
    print(f"961 x 1024 {path.value:6s} {1e3 * (time.perf_counter() - t0):7.1f} ms")
