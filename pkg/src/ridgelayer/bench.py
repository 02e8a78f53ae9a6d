"""Wall-clock comparison of the primal and dual ridge solves."""

import time
from typing import NamedTuple

import numpy as np

from .ridge import RidgeConfig, SolverPath, choose_path, ridge_forward


class BenchRow(NamedTuple):
    n: int
    d: int
    path: str
    median_s: float
    auto: bool


def time_solve(x, y, path, reps=5, lam=0.1):
    """Median wall time of a full forward solve (Gram, factorization, solve)."""
    cfg = RidgeConfig(lam, path)
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        ridge_forward(x, y, cfg)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def bench(n_list, d_list, reps=5, seed=0, lam=0.1,
          paths=(SolverPath.PRIMAL, SolverPath.DUAL)):
    """One row per ``(n, d, path)``; ``auto`` marks the path AUTO would take."""
    rows = []
    for n in n_list:
        for d in d_list:
            rng = np.random.default_rng([seed, n, d])
            x = rng.standard_normal((n, d)) / np.sqrt(d)
            y = rng.standard_normal(n)
            ridge_forward(x, y, RidgeConfig(lam))  # warm-up
            auto = choose_path(n, d)
            for path in paths:
                t = time_solve(x, y, path, reps, lam)
                rows.append(BenchRow(n, d, SolverPath(path).value, t,
                                     SolverPath(path) is auto))
    return rows


def format_rows(rows):
    lines = ["n\td\tpath\tmedian_s\tauto"]
    lines += ["%d\t%d\t%s\t%.6e\t%d" % (r.n, r.d, r.path, r.median_s, r.auto)
              for r in rows]
    return lines
