"""Command-line interface: ``ridgelayer <command> [options]``.

Exit codes: 0 success, 2 input or format error, 3 numerical error,
4 gradient check failure. Data goes to stdout as tab-separated text; the
resolved configuration is echoed to stderr.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import bench as bench_mod
from .errors import ContractViolation, FormatError, SingularSystem
from .gradcheck import end_to_end_check
from .loss import LossKind, Reduction, ShrinkageParams
from .ridge import RidgeConfig, SolverPath, normal_residual, ridge_forward
from .sampling import FileSequence, LabelConfig, SyntheticSequence
from .tensor import read_tensor, write_tensor
from .tracker import TrackerConfig, drift_trajectory, track
from .train import (LinearEmbedding, TaskConfig, TrainConfig, batch_loss_and_grad,
                    compare_losses, make_task, sigma_for_positive_fraction,
                    train)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4
GRADCHECK_TOL = 1e-4

log = logging.getLogger("ridgelayer")


class InputError(Exception):
    pass


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _emit(lines):
    sys.stdout.write("\n".join(lines) + "\n")


def _read(path, what):
    if not os.path.exists(path):
        raise InputError(f"{what} file not found: {path}")
    return read_tensor(path)


def cmd_solve(args):
    x = _read(args.x_file, "x")
    y = _read(args.y_file, "y")
    if x.ndim != 2 or y.ndim != 1:
        raise InputError(f"x must be a matrix and y a vector, got ranks {x.ndim}, {y.ndim}")
    rec = ridge_forward(x, y, RidgeConfig(args.lam, args.path))
    out = args.w_out or _out_path(args, "w.rlt")
    write_tensor(out, rec.w)
    _emit([f"path\t{rec.path_taken.value}",
           f"n\t{rec.n}", f"d\t{rec.d}",
           f"residual\t{normal_residual(rec):.6e}",
           f"w\t{out}"])
    return EXIT_OK


def cmd_gradcheck(args):
    res = end_to_end_check(args.n, args.d, args.loss, args.seed, args.path,
                           args.lam, params=_shrink_params(args))
    worst = max(res["x"], res["y"], res["z"])
    ok = worst <= GRADCHECK_TOL
    _emit([f"path\t{res['path']}", f"loss\t{LossKind(args.loss).value}",
           f"max_rel_error_x\t{res['x']:.3e}",
           f"max_rel_error_y\t{res['y']:.3e}",
           f"max_rel_error_z\t{res['z']:.3e}",
           f"max_rel_error\t{worst:.3e}",
           f"tolerance\t{GRADCHECK_TOL:.0e}",
           f"result\t{'PASS' if ok else 'FAIL'}"])
    return EXIT_OK if ok else EXIT_CHECK


def cmd_bench(args):
    rows = bench_mod.bench(args.n_list, args.d_list, args.reps, args.seed,
                           args.lam)
    _emit(bench_mod.format_rows(rows))
    return EXIT_OK


def _read_gt(path):
    if not os.path.exists(path):
        raise InputError(f"ground-truth file not found: {path}")
    try:
        gt = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise InputError(f"bad ground-truth file {path}: {exc}")
    if gt.shape[1] != 2:
        raise InputError(f"ground truth needs two columns 'cx cy', got {gt.shape[1]}")
    return gt


def cmd_track(args):
    cfg = TrackerConfig(lam=args.lam, delta=args.delta, path=args.path,
                        grid_side=args.grid_side,
                        labels=LabelConfig(args.sigma_factor))
    target_size = tuple(args.target_size)
    start = tuple(args.init_center)
    gt = None
    if args.frames:
        if not os.path.isdir(args.frames):
            raise InputError(f"frames directory not found: {args.frames}")
        provider = FileSequence(args.frames)
        recenter = False
    else:
        step = 0.0 if args.static else args.step
        gt = drift_trajectory(start, args.n_frames, step, args.seed)
        provider = SyntheticSequence(gt, args.dim, args.noise, args.seed)
        recenter = True
    if args.gt:
        gt = _read_gt(args.gt)

    run = track(provider, start, target_size, cfg=cfg, recenter=recenter)
    errors = run.center_errors(gt) if gt is not None else None
    lines = ["frame\tcx\tcy\tindex\tscore" + ("\terror_cells" if gt is not None else "")]
    for i, f in enumerate(run.frames):
        row = "%d\t%.17g\t%.17g\t%d\t%.17g" % (f.frame, f.center[0], f.center[1],
                                                 f.index, f.score)
        if errors is not None:
            row += "\t%.17g" % errors[i]
        lines.append(row)
    if errors is not None and len(errors) > 1:
        lines.append("# mean_center_error_cells\t%.17g" % errors[1:].mean())
    _emit(lines)
    if args.out:
        write_tensor(_out_path(args, "x_accum.rlt"), run.state.x_accum)
        write_tensor(_out_path(args, "w.rlt"), run.state.w)
        with open(_out_path(args, "trajectory.tsv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def _task(args):
    task = TaskConfig()
    if args.positive_fraction is not None:
        sigma = sigma_for_positive_fraction(args.positive_fraction, task.grid_side,
                                            task.easy_threshold, task.region_scale)
        task = replace(task, sigma_factor=sigma)
    return task


def _train_cfg(args):
    return TrainConfig(lr=args.lr, steps=args.steps, batch=args.batch,
                       loss=args.loss, seed=args.seed, lam=args.lam,
                       path=args.path, shrinkage=_shrink_params(args))


def cmd_train(args):
    task = _task(args)
    cfg = _train_cfg(args)
    pairs = make_task(task, args.n_train, seed=cfg.seed)
    val = make_task(task, args.n_val, seed=cfg.seed + 10_000)
    ckpt = args.out if args.checkpoint_every else None
    if ckpt:
        os.makedirs(ckpt, exist_ok=True)
    emb0 = LinearEmbedding.init(task.d_in, task.d_out, cfg.seed)
    emb, tlog = train(pairs, cfg, task.d_out, val, emb=emb0, checkpoint_dir=ckpt,
                      checkpoint_every=args.checkpoint_every)
    before = batch_loss_and_grad(emb0.weight, pairs, cfg)[0]
    after = batch_loss_and_grad(emb.weight, pairs, cfg)[0]
    with open(_out_path(args, "metrics.tsv"), "w") as fh:
        fh.write("\n".join(tlog.metrics_lines()) + "\n")
    with open(_out_path(args, "timing.tsv"), "w") as fh:
        fh.write("\n".join(tlog.timing_lines()) + "\n")
    write_tensor(_out_path(args, "embedding_final.rlt"), emb.weight)
    _emit([f"loss\t{cfg.loss.value}", f"steps\t{cfg.steps}",
           "initial_train_loss\t%.17g" % before,
           "final_train_loss\t%.17g" % after,
           "loss_ratio\t%.17g" % (after / before),
           "final_val_error_cells\t%.17g" % tlog.val_errors[-1]])
    return EXIT_OK


def cmd_compare_losses(args):
    task = _task(args)
    report = compare_losses(task, _train_cfg(args), n_train=args.n_train,
                            n_val=args.n_val, threshold=args.threshold)
    lines = report.summary_lines() + report.table_lines()
    with open(_out_path(args, "curves.tsv"), "w") as fh:
        fh.write("\n".join(report.table_lines()) + "\n")
    _emit(lines)
    return EXIT_OK


def _common(out_default="ridgelayer_out"):
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=out_default, help="output directory")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _solver():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--path", type=SolverPath, choices=list(SolverPath),
                   metavar=_choices(SolverPath),
                   default=SolverPath.AUTO)
    return p


def _choices(enum):
    return "{" + ",".join(m.value for m in enum) + "}"


def _shrinkage():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--shrink-a", type=float, default=10.0,
                   help="shrinkage speed a")
    p.add_argument("--shrink-c", type=float, default=0.2,
                   help="shrinkage localization c")
    p.add_argument("--reduction", type=Reduction, choices=list(Reduction),
                   metavar=_choices(Reduction),
                   default=Reduction.MEAN)
    return p


def _shrink_params(args):
    return ShrinkageParams(args.shrink_a, args.shrink_c, args.reduction)


def _training(steps):
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--steps", type=int, default=steps)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--loss", type=LossKind, choices=list(LossKind),
                   metavar=_choices(LossKind),
                   default=LossKind.MODIFIED)
    p.add_argument("--n-train", type=int, default=32)
    p.add_argument("--n-val", type=int, default=32)
    p.add_argument("--positive-fraction", type=float, default=None,
                   help="label-balance knob: share of non-easy samples")
    return p


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ridgelayer",
        description="Differentiable closed-form ridge regression toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[_common(), _solver()],
                       help="solve a ridge problem from RLT1 files")
    p.add_argument("x_file")
    p.add_argument("y_file")
    p.add_argument("--w-out", default=None, help="output path for w")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gradcheck", parents=[_common(), _solver(), _shrinkage()],
                       help="finite-difference check of the backward pass")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--d", type=int, default=6)
    p.add_argument("--loss", type=LossKind, choices=list(LossKind),
                   metavar=_choices(LossKind),
                   default=LossKind.MODIFIED)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("bench", parents=[_common(), _solver()],
                       help="median solve times per path")
    p.add_argument("--n-list", type=_int_list, default=[256])
    p.add_argument("--d-list", type=_int_list, default=[512, 1024, 2048, 4096])
    p.add_argument("--reps", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("track", parents=[_common(None), _solver()],
                       help="run the online tracker")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--frames", help="directory of per-frame RLT1 matrices")
    src.add_argument("--synthetic", action="store_true", default=True,
                     help="synthetic drifting target (default)")
    p.add_argument("--gt", help="ground truth, one 'cx cy' per line")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--grid-side", type=int, default=31)
    p.add_argument("--sigma-factor", type=float, default=0.1)
    p.add_argument("--target-size", type=float, nargs=2, default=[32.0, 32.0])
    p.add_argument("--init-center", type=float, nargs=2, default=[240.0, 240.0])
    p.add_argument("--n-frames", type=int, default=100)
    p.add_argument("--step", type=float, default=2.0,
                   help="synthetic target speed, pixels per frame")
    p.add_argument("--static", action="store_true",
                   help="synthetic target does not move")
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--dim", type=int, default=64)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("train", parents=[_common(), _solver(), _shrinkage(),
                                            _training(200)],
                       help="train a linear embedding end to end")
    p.add_argument("--checkpoint-every", type=int, default=50)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare-losses", parents=[_common(), _solver(), _shrinkage(),
                                                     _training(400)],
                       help="train under each loss and compare convergence")
    p.add_argument("--threshold", type=float, default=1.0,
                   help="validation localization error, grid cells")
    p.set_defaults(func=cmd_compare_losses)
    return parser


def _config_dict(args):
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        out[k] = v.value if hasattr(v, "value") else v
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s")
    print("# config " + json.dumps(_config_dict(args), sort_keys=True),
          file=sys.stderr)
    threads = os.environ.get("RIDGELAYER_THREADS")
    try:
        if threads:
            from threadpoolctl import threadpool_limits
            with threadpool_limits(limits=int(threads)):
                return args.func(args)
        return args.func(args)
    except (InputError, FormatError, ContractViolation, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularSystem, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
