"""Exit criteria for the package, one test per criterion.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (visible with
``pytest -s`` or in the terminal summary). Criterion 7 is soft: a miss is
reported and written to the report directory but does not fail the run.
"""

import json
import os
import time
import warnings
from dataclasses import replace

import numpy as np
import pytest

from ridgelayer import cli
from ridgelayer.bench import time_solve
from ridgelayer.gradcheck import max_rel_error, numerical_grad
from ridgelayer.loss import (LossKind, Reduction, ShrinkageParams,
                             shrinkage_modified, shrinkage_origin,
                             shrinkage_weight)
from ridgelayer.ridge import (RidgeConfig, SolverPath, choose_path,
                              normal_residual, ridge_backward, ridge_forward)
from ridgelayer.sampling import (SyntheticSequence, gaussian_labels, make_grid,
                                 region_size_for, synthetic_features)
from ridgelayer.tracker import TrackerConfig, drift_trajectory, init, track, update
from ridgelayer.train import (LinearEmbedding, TaskConfig, TrainConfig,
                              TrainPair, compare_losses,
                              pair_loss_and_grad, sigma_for_positive_fraction)

pytestmark = pytest.mark.acceptance

PRIMAL, DUAL = SolverPath.PRIMAL, SolverPath.DUAL
REPORT_DIR = os.environ.get(
    "RIDGELAYER_REPORT_DIR",
    os.path.join(os.path.dirname(os.path.dirname(__file__)), "acceptance_reports"))

RESULTS = []


def verdict(number, ok, detail):
    line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def write_report(name, lines):
    os.makedirs(REPORT_DIR, exist_ok=True)
    path = os.path.join(REPORT_DIR, name)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


# 1 and 2 share one sweep of forward solves.

@pytest.fixture(scope="module")
def woodbury_sweep():
    rng = np.random.default_rng(1)
    lams = [1e-3, 0.1, 10.0]
    configs = [(1, 1), (1, 1024), (961, 1), (961, 1024), (961, 961), (512, 512)]
    configs = [(n, d, lam) for n, d in configs for lam in lams]
    configs += [(int(rng.integers(1, 962)), int(rng.integers(1, 1025)),
                 float(rng.choice(lams))) for _ in range(100)]
    t0 = time.perf_counter()
    rows = []
    for n, d, lam in configs:
        x = rng.standard_normal((n, d))
        y = rng.standard_normal(n)
        p = ridge_forward(x, y, RidgeConfig(lam, PRIMAL))
        q = ridge_forward(x, y, RidgeConfig(lam, DUAL))
        a = ridge_forward(x, y, RidgeConfig(lam))
        rows.append(dict(
            n=n, d=d, lam=lam,
            gap=float(np.max(np.abs(p.w - q.w))),
            bound=1e-8 * (1 + float(np.max(np.abs(p.w)))),
            residuals=[normal_residual(r) for r in (p, q, a)]))
    return rows, time.perf_counter() - t0


def test_1_woodbury_equivalence(woodbury_sweep):
    rows, elapsed = woodbury_sweep
    bad = [r for r in rows if r["gap"] > r["bound"]]
    worst = max(r["gap"] / r["bound"] for r in rows)
    ok = len(rows) >= 100 and not bad and elapsed < 120
    verdict(1, ok, f"{len(rows)} configs, worst gap/bound {worst:.2e}, "
                   f"{elapsed:.1f}s (< 120s)")
    assert ok, bad[:3]


def test_2_normal_equation_residual(woodbury_sweep):
    rows, _ = woodbury_sweep
    worst = max(max(r["residuals"]) for r in rows)
    ok = worst <= 1e-8
    verdict(2, ok, f"{3 * len(rows)} solves, worst relative residual {worst:.2e} (<= 1e-8)")
    assert ok


def test_3_implicit_differentiation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    layer = {}
    for shape in [(5, 8), (12, 7), (8, 8)]:
        for path in (PRIMAL, DUAL):
            x = rng.standard_normal(shape)
            y = rng.standard_normal(shape[0])
            g_w = rng.standard_normal(shape[1])
            cfg = RidgeConfig(0.1, path)
            f = lambda x_, y_: float(g_w @ ridge_forward(x_, y_, cfg).w)
            grads = ridge_backward(ridge_forward(x, y, cfg), g_w)
            layer[(shape, path.value)] = max(
                max_rel_error(grads.d_x, numerical_grad(lambda a: f(a, y), x)),
                max_rel_error(grads.d_y, numerical_grad(lambda a: f(x, a), y)))

    e2e = {}
    for loss in LossKind:
        for path, d_out in ((PRIMAL, 4), (DUAL, 4), (DUAL, 12)):
            pair = TrainPair(rng.standard_normal((10, 6)), rng.uniform(0, 1, 10),
                             rng.standard_normal((10, 6)), rng.uniform(0, 1, 10))
            cfg = TrainConfig(loss=loss, path=path)
            w = LinearEmbedding.init(6, d_out, seed=int(rng.integers(1 << 30))).weight
            _, grad = pair_loss_and_grad(w, pair, cfg)
            num = numerical_grad(lambda a: pair_loss_and_grad(a, pair, cfg)[0], w)
            e2e[(loss.value, path.value, d_out)] = max_rel_error(grad, num)
    elapsed = time.perf_counter() - t0
    worst_layer = max(layer.values())
    worst_e2e = max(e2e.values())
    ok = worst_layer <= 1e-5 and worst_e2e <= 1e-4 and elapsed < 60
    verdict(3, ok, f"layer worst {worst_layer:.1e} (<= 1e-5) over {len(layer)} cases; "
                   f"end-to-end worst {worst_e2e:.1e} (<= 1e-4) over {len(e2e)} cases; "
                   f"{elapsed:.1f}s")
    assert ok, (layer, e2e)


@pytest.mark.slow
def test_4_complexity_behaviour():
    # Ratios carry the stated +-20% tolerance: dual < 3 * 1.2, primal > 10 * 0.8.
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    times = {}
    for d in (512, 4096):
        x = rng.standard_normal((256, d)) / np.sqrt(d)
        y = rng.standard_normal(256)
        ridge_forward(x, y)
        times[("dual", d)] = time_solve(x, y, DUAL, reps=15)
        times[("primal", d)] = time_solve(x, y, PRIMAL, reps=5 if d > 1000 else 15)
    x = rng.standard_normal((961, 1024)) / 32
    y = rng.standard_normal(961)
    ridge_forward(x, y)
    op_dual = time_solve(x, y, DUAL, reps=9)
    op_primal = time_solve(x, y, PRIMAL, reps=9)
    elapsed = time.perf_counter() - t0

    dual_ratio = times[("dual", 4096)] / times[("dual", 512)]
    primal_ratio = times[("primal", 4096)] / times[("primal", 512)]
    auto = choose_path(961, 1024)
    checks = {
        "dual_ratio<3.6": dual_ratio < 3.0 * 1.2,
        "primal_ratio>8": primal_ratio > 10.0 * 0.8,
        "auto_is_dual": auto is DUAL,
        "dual_faster_at_961x1024": op_dual < op_primal,
        "runtime<300s": elapsed < 300,
    }
    ok = all(checks.values())
    detail = (f"N=256 D 512->4096: dual x{dual_ratio:.2f}, primal x{primal_ratio:.1f}; "
              f"N=961 D=1024: auto={auto.value}, dual {op_dual * 1e3:.1f}ms vs "
              f"primal {op_primal * 1e3:.1f}ms; failed: "
              f"{[k for k, v in checks.items() if not v] or 'none'}")
    verdict(4, ok, detail)
    write_report("criterion4_bench.tsv",
                 ["key\tvalue"] + [f"{k[0]}_{k[1]}\t{v:.6e}" for k, v in times.items()]
                 + [f"dual_961x1024\t{op_dual:.6e}", f"primal_961x1024\t{op_primal:.6e}",
                    f"dual_ratio\t{dual_ratio:.4f}", f"primal_ratio\t{primal_ratio:.4f}"])
    assert ok, detail


def test_5_shrinkage_properties():
    rng = np.random.default_rng(5)
    s = ShrinkageParams(reduction=Reduction.SUM)
    y = rng.uniform(0, 1, 200)
    pos = y + rng.uniform(0, 2, 200)
    (lm, gm), (lo, go) = shrinkage_modified(pos, y, s), shrinkage_origin(pos, y, s)
    equal = bool(lm == lo and np.array_equal(gm, go))
    r = np.array([-s.c])
    larger = shrinkage_modified(r, np.zeros(1), s)[0] > shrinkage_origin(r, np.zeros(1), s)[0]
    grid = np.linspace(0, 3, 1001)
    monotone = bool(np.all(np.diff(shrinkage_weight(grid, s.a, s.c)) > 0))
    pred = y + rng.choice([-1, 1], 200) * rng.uniform(0.05, 1.0, 200)
    grad_err = 0.0
    for fn in (shrinkage_modified, shrinkage_origin):
        _, g = fn(pred, y, s)
        grad_err = max(grad_err, max_rel_error(g, numerical_grad(lambda v: fn(v, y, s)[0], pred)))
    ok = equal and larger and monotone and grad_err <= 1e-6
    verdict(5, ok, f"equal on r>=0: {equal}; modified>origin at r=-c: {larger}; "
                   f"weight monotone: {monotone}; gradient error {grad_err:.1e} (<= 1e-6)")
    assert ok


def test_6_default_hyperparameters(capsys):
    found = {
        "lambda": RidgeConfig().lam,
        "a": ShrinkageParams().a,
        "c": ShrinkageParams().c,
        "delta": TrackerConfig().delta,
        "N": TrackerConfig().grid_side ** 2,
        "lr": TrainConfig().lr,
    }
    want = {"lambda": 0.1, "a": 10.0, "c": 0.2, "delta": 0.01, "N": 961, "lr": 0.005}

    def echoed(argv):
        cli.main(argv)
        err = capsys.readouterr().err
        line = next(l for l in err.splitlines() if l.startswith("# config "))
        return json.loads(line[len("# config "):])

    tr = echoed(["track", "--static", "--n-frames", "2", "--dim", "8"])
    tn = echoed(["train", "--steps", "1", "--checkpoint-every", "0", "--n-train", "2",
                 "--n-val", "1", "--out", os.path.join(REPORT_DIR, "c6_train")])
    echo = {"lambda": tn["lam"], "a": tn["shrink_a"], "c": tn["shrink_c"],
            "delta": tr["delta"], "N": tr["grid_side"] ** 2, "lr": tn["lr"]}
    ok = found == want and echo == want and tr["lam"] == 0.1
    with capsys.disabled():
        verdict(6, ok, f"defaults {found}; echoed {echo}")
    assert ok


@pytest.mark.slow
def test_7_shrinkage_convergence_soft():
    lines = ["seed\tloss\tsteps_to_threshold\tfinal_val_error"]
    outcome = []
    for seed in (0, 1, 2):
        rep = compare_losses(cfg=TrainConfig(seed=seed, steps=400), n_train=32,
                             n_val=32, threshold=1.0)
        for k, log in rep.logs.items():
            s = rep.steps_to_threshold[k]
            lines.append(f"{seed}\t{k}\t{'never' if s is None else s}\t{log.val_errors[-1]:.4f}")
        mod, ms = rep.steps_to_threshold["modified"], rep.steps_to_threshold["mse"]
        outcome.append(mod is not None and (ms is None or mod <= ms))
        lines.append(f"# seed {seed} easy_fraction {rep.easy_fraction:.4f} "
                     f"modified_within_mse_steps {outcome[-1]}")

    # label-balance ablation, report only
    task = TaskConfig()
    balanced = replace(task, sigma_factor=sigma_for_positive_fraction(
        0.5, task.grid_side, task.easy_threshold, task.region_scale))
    rep = compare_losses(balanced, TrainConfig(seed=0, steps=400), n_train=32,
                         n_val=32, threshold=1.0)
    lines.append(f"# ablation 50/50 balance: easy_fraction {rep.easy_fraction:.4f} "
                 f"steps_to_threshold {rep.steps_to_threshold}")
    path = write_report("criterion7_convergence.tsv", lines)

    ok = all(outcome)
    verdict(7, ok, f"modified within MSE's steps on {sum(outcome)}/3 seeds "
                   f"(soft; report {path})")
    if not ok:
        warnings.warn(f"soft criterion 7 not met on every seed; see {path}")


def test_8_tracker_loop():
    t0 = time.perf_counter()
    start, target = (240.0, 240.0), (32.0, 32.0)
    traj = drift_trajectory(start, 100, 2.0, seed=8)
    run = track(SyntheticSequence(traj, 64, noise=0.05, seed=8), start, target)
    mean_err = float(run.center_errors(traj)[1:].mean())

    grid = make_grid(start, region_size_for(target), target, 31)
    x1 = synthetic_features(grid, start, 64, 0.05, seed=8, frame=0)
    x2 = synthetic_features(grid, start, 64, 0.05, seed=8, frame=1)
    y = gaussian_labels(grid, start)
    frozen = update(init(x1, y, TrackerConfig(delta=0.0)), x2).x_accum
    replaced = update(init(x1, y, TrackerConfig(delta=1.0)), x2).x_accum
    degenerate = frozen.tobytes() == x1.tobytes() and replaced.tobytes() == x2.tobytes()
    elapsed = time.perf_counter() - t0
    ok = mean_err < 1.0 and degenerate and elapsed < 60
    verdict(8, ok, f"mean centre error {mean_err:.3f} cells (< 1) over 99 localized "
                   f"frames; delta 0/1 exact: {degenerate}; {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_9_cli_determinism(tmp_path, capsys, rng):
    from ridgelayer.tensor import write_tensor
    write_tensor(tmp_path / "x.rlt", rng.standard_normal((20, 30)))
    write_tensor(tmp_path / "y.rlt", rng.standard_normal(20))

    def bench_structure(out):
        # the timing column is a measurement, not data; compare the rest
        return [l.split("\t")[:3] + l.split("\t")[4:] for l in out.splitlines()]

    commands = {
        "solve": (["solve", tmp_path / "x.rlt", tmp_path / "y.rlt"], None),
        "gradcheck": (["gradcheck", "--n", "8", "--d", "12"], None),
        "bench": (["bench", "--n-list", "32", "--d-list", "16,64", "--reps", "1"],
                  bench_structure),
        "track": (["track", "--n-frames", "20"], None),
        "train": (["train", "--steps", "20"], None),
        "compare-losses": (["compare-losses", "--steps", "10", "--n-train", "8",
                            "--n-val", "4"], None),
    }
    same = {}
    for name, (argv, view) in commands.items():
        outputs = []
        for rep in range(2):
            out_dir = tmp_path / f"{name}_{rep}"
            code = cli.main([str(a) for a in argv] + ["--seed", "7", "--out", str(out_dir)])
            assert code == 0
            stdout = capsys.readouterr().out.replace(str(out_dir), "<out>")
            files = {}
            if out_dir.exists():
                for f in sorted(out_dir.iterdir()):
                    if f.name != "timing.tsv":
                        files[f.name] = f.read_bytes()
            outputs.append((view(stdout) if view else stdout, files))
        same[name] = outputs[0] == outputs[1]
    ok = all(same.values())
    with capsys.disabled():
        verdict(9, ok, f"byte-identical reruns: {same}")
    assert ok


def test_zz_summary(capsys):
    with capsys.disabled():
        print("\n" + "\n".join(RESULTS))
