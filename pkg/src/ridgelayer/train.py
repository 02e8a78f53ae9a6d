"""Toy end-to-end training of a linear embedding through the ridge layer.

Each training pair holds raw features of a training image and a test
image. The embedding ``W`` maps both to ``X = x_raw W`` and ``Z = z_raw W``;
a ridge model fit on ``(X, y_train)`` predicts ``Z w`` and the loss against
``y_test`` is back-propagated through the solver into ``W``.
"""

import os
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import ContractViolation, InvalidConfig
from .loss import LossKind, ShrinkageParams, evaluate_loss
from .ridge import DEFAULT_LAMBDA, RidgeConfig, SolverPath, predict, ridge_backward, ridge_forward
from .sampling import (LabelConfig, SyntheticAppearance, gaussian_labels,
                       make_grid, region_size_for)
from .tensor import write_tensor

DEFAULT_LR = 0.005
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def adam_update(param, grad, m, v, step, lr=DEFAULT_LR, beta1=ADAM_BETA1,
                beta2=ADAM_BETA2, eps=ADAM_EPS):
    """One bias-corrected ADAM step.

    ``step`` is the 1-based index of this update. Returns the new
    ``(param, m, v)``; inputs are not modified.
    """
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** step)
    v_hat = v / (1.0 - beta2 ** step)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


@dataclass(frozen=True)
class LinearEmbedding:
    weight: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def init(cls, d_in, d_out, seed=0, scale=None):
        """Zero-mean Gaussian weights, std ``1/sqrt(d_in)`` by default."""
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(d_in) if scale is None else scale
        w = scale * rng.standard_normal((d_in, d_out))
        return cls(w, np.zeros_like(w), np.zeros_like(w), 0)

    def apply(self, raw):
        return np.asarray(raw, dtype=np.float64) @ self.weight


@dataclass(frozen=True)
class TrainConfig:
    lr: float = DEFAULT_LR
    steps: int = 200
    batch: int = 4
    loss: LossKind = LossKind.MODIFIED
    seed: int = 0
    lam: float = DEFAULT_LAMBDA
    path: SolverPath = SolverPath.AUTO
    shrinkage: ShrinkageParams = field(default_factory=ShrinkageParams)
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    def __post_init__(self):
        if not self.lr >= 0:
            raise InvalidConfig(f"lr must be >= 0, got {self.lr}")
        if self.batch < 1:
            raise InvalidConfig(f"batch must be >= 1, got {self.batch}")
        object.__setattr__(self, "loss", LossKind(self.loss))

    @property
    def ridge(self):
        return RidgeConfig(self.lam, self.path)


class TrainPair(NamedTuple):
    x_raw: np.ndarray
    y_train: np.ndarray
    z_raw: np.ndarray
    y_test: np.ndarray


def pair_forward(weight, pair, cfg):
    """Predictions on the test samples of ``pair`` and the solve record."""
    rec = ridge_forward(pair.x_raw @ weight, pair.y_train, cfg.ridge)
    return predict(pair.z_raw @ weight, rec.w), rec


def pair_loss_and_grad(weight, pair, cfg):
    """Loss of one pair and its gradient w.r.t. the embedding weight."""
    if pair.x_raw.shape[1] != weight.shape[0] or pair.z_raw.shape[1] != weight.shape[0]:
        raise ContractViolation(
            f"raw features must have {weight.shape[0]} columns")
    pred, rec = pair_forward(weight, pair, cfg)
    loss, d_pred = evaluate_loss(cfg.loss, pred, pair.y_test, cfg.shrinkage)
    z = pair.z_raw @ weight
    grads = ridge_backward(rec, z.T @ d_pred)
    d_z = np.outer(d_pred, rec.w)
    d_weight = pair.x_raw.T @ grads.d_x + pair.z_raw.T @ d_z
    return loss, d_weight


def batch_loss_and_grad(weight, pairs, cfg):
    """Mean loss and gradient over ``pairs``, accumulated in order."""
    total = 0.0
    grad = np.zeros_like(weight)
    for pair in pairs:
        loss, g = pair_loss_and_grad(weight, pair, cfg)
        total += loss
        grad += g
    return total / len(pairs), grad / len(pairs)


def train_step(emb, pairs, cfg):
    """Forward, backward and one ADAM update. Returns ``(emb', loss)``.

    ``pairs`` is a single :class:`TrainPair` or a sequence of them.
    """
    if isinstance(pairs, TrainPair):
        pairs = [pairs]
    loss, grad = batch_loss_and_grad(emb.weight, pairs, cfg)
    step = emb.step + 1
    w, m, v = adam_update(emb.weight, grad, emb.m, emb.v, step, cfg.lr,
                          cfg.beta1, cfg.beta2, cfg.eps)
    return replace(emb, weight=w, m=m, v=v, step=step), loss, grad


@dataclass(frozen=True)
class TaskConfig:
    """Synthetic tracking-pair task.

    Raw features are ``d_signal`` appearance channels followed by
    ``d_noise`` channels of pure noise (scale ``noise_scale``), so a useful
    embedding has to suppress the noise channels.
    """

    d_signal: int = 16
    d_noise: int = 16
    d_out: int = 8
    grid_side: int = 11
    region_scale: float = 2.0
    target_size: tuple = (32.0, 32.0)
    sigma_factor: float = 0.1
    max_shift: float = 0.5
    feature_noise: float = 0.05
    noise_scale: float = 1.0
    easy_threshold: float = 0.1

    @property
    def d_in(self):
        return self.d_signal + self.d_noise


def sigma_for_positive_fraction(fraction, grid_side, threshold=0.1,
                                region_scale=5.0):
    """``sigma_factor`` giving about ``fraction`` labels above ``threshold``.

    Used as the label-balance knob: the share of samples above the
    threshold is the share of non-easy samples.
    """
    grid = make_grid((0.0, 0.0), region_scale, (1.0, 1.0), grid_side)
    d = np.sort(np.linalg.norm(grid.centers, axis=1))
    k = min(max(int(round(fraction * grid.n)), 1), grid.n) - 1
    radius = max(d[k], grid.spacing / 2)
    return radius / np.sqrt(2.0 * np.log(1.0 / threshold))


def make_pair(task, rng, obj_seed):
    appearance = SyntheticAppearance(task.d_signal, seed=obj_seed)
    size = region_size_for(task.target_size, task.region_scale)
    center = np.zeros(2)
    grid = make_grid(center, size, task.target_size, task.grid_side)
    labels = LabelConfig(task.sigma_factor)
    shift = rng.uniform(-task.max_shift, task.max_shift, 2) * np.asarray(task.target_size)

    def raw(target):
        sig = appearance.features(grid, target)
        sig = sig + task.feature_noise * rng.standard_normal(sig.shape)
        noise = task.noise_scale * rng.standard_normal((grid.n, task.d_noise))
        return np.hstack([sig, noise])

    return TrainPair(raw(center), gaussian_labels(grid, center, labels),
                     raw(shift), gaussian_labels(grid, shift, labels))


def make_task(task, n_pairs, seed=0):
    """``n_pairs`` seeded training pairs, one synthetic object per pair."""
    rng = np.random.default_rng(seed)
    obj_seeds = rng.integers(0, 2**31, size=n_pairs)
    return [make_pair(task, rng, int(s)) for s in obj_seeds]


def easy_fraction(pairs, threshold=0.1):
    y = np.concatenate([p.y_test for p in pairs])
    return float(np.mean(y < threshold))


def validation_error(weight, pairs, cfg):
    """Mean over pairs of the argmax distance to the label peak, in cells."""
    errs = []
    for pair in pairs:
        pred, _ = pair_forward(weight, pair, cfg)
        side = int(round(np.sqrt(pred.size)))
        got = np.array(divmod(int(np.argmax(pred)), side))
        want = np.array(divmod(int(np.argmax(pair.y_test)), side))
        errs.append(np.linalg.norm(got - want))
    return float(np.mean(errs))


def _batches(n_items, batch, rng):
    while True:
        order = rng.permutation(n_items)
        for i in range(0, n_items - batch + 1, batch):
            yield order[i:i + batch]


@dataclass
class TrainLog:
    steps: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    val_errors: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)

    def metrics_lines(self):
        lines = ["step\tloss\tgrad_norm\tval_error"]
        for row in zip(self.steps, self.losses, self.grad_norms, self.val_errors):
            lines.append("%d\t%.17g\t%.17g\t%.17g" % row)
        return lines

    def timing_lines(self):
        lines = ["step\twall_time_s"]
        lines += ["%d\t%.6f" % r for r in zip(self.steps, self.wall_times)]
        return lines


def train(train_pairs, cfg, d_out, val_pairs=(), emb=None, checkpoint_dir=None,
          checkpoint_every=0):
    """Train an embedding for ``cfg.steps`` ADAM steps.

    Row ``k`` of the returned log holds the loss and validation error of the
    weights *before* step ``k + 1``; a final row after the last step carries
    the validation error of the trained weights and a NaN loss.
    """
    d_in = train_pairs[0].x_raw.shape[1]
    emb = emb or LinearEmbedding.init(d_in, d_out, cfg.seed)
    rng = np.random.default_rng([cfg.seed, 1])
    batch = min(cfg.batch, len(train_pairs))
    batches = _batches(len(train_pairs), batch, rng)
    log = TrainLog()
    val = (lambda w: validation_error(w, val_pairs, cfg)) if val_pairs else (
        lambda w: float("nan"))

    for k in range(cfg.steps):
        idx = next(batches)
        t0 = time.perf_counter()
        val_err = val(emb.weight)
        emb, loss, grad = train_step(emb, [train_pairs[i] for i in idx], cfg)
        log.steps.append(k)
        log.losses.append(loss)
        log.grad_norms.append(float(np.linalg.norm(grad)))
        log.val_errors.append(val_err)
        log.wall_times.append(time.perf_counter() - t0)
        if checkpoint_dir and checkpoint_every and (k + 1) % checkpoint_every == 0:
            write_tensor(os.path.join(checkpoint_dir, f"embedding_{k + 1:06d}.rlt"),
                         emb.weight)
    log.steps.append(cfg.steps)
    log.losses.append(float("nan"))
    log.grad_norms.append(float("nan"))
    log.val_errors.append(val(emb.weight))
    log.wall_times.append(0.0)
    return emb, log


def steps_to_threshold(values, threshold):
    """First step whose value is ``<= threshold``, or None."""
    for k, v in enumerate(values):
        if v <= threshold:
            return k
    return None


@dataclass
class LossComparison:
    logs: dict
    steps_to_threshold: dict
    threshold: float
    easy_fraction: float

    def table_lines(self):
        kinds = list(self.logs)
        header = ["step"] + [f"{k}_loss\t{k}_val" for k in kinds]
        lines = ["\t".join(header)]
        n = len(self.logs[kinds[0]].steps)
        for i in range(n):
            row = [str(self.logs[kinds[0]].steps[i])]
            for k in kinds:
                row.append("%.17g\t%.17g" % (self.logs[k].losses[i],
                                             self.logs[k].val_errors[i]))
            lines.append("\t".join(row))
        return lines

    def summary_lines(self):
        lines = [f"# easy_fraction\t{self.easy_fraction:.4f}",
                 f"# val_threshold\t{self.threshold}"]
        for k, s in self.steps_to_threshold.items():
            lines.append(f"# steps_to_threshold\t{k}\t{'never' if s is None else s}")
        return lines


def compare_losses(task=None, cfg=None, n_train=32, n_val=16, threshold=0.5,
                   kinds=(LossKind.MODIFIED, LossKind.ORIGIN, LossKind.MSE)):
    """Train identically seeded embeddings under each loss and compare.

    ``threshold`` is the validation localization error (grid cells) used for
    steps-to-threshold.
    """
    task = task or TaskConfig()
    cfg = cfg or TrainConfig()
    train_pairs = make_task(task, n_train, seed=cfg.seed)
    val_pairs = make_task(task, n_val, seed=cfg.seed + 10_000)
    logs, reached = {}, {}
    for kind in kinds:
        run_cfg = replace(cfg, loss=LossKind(kind))
        _, log = train(train_pairs, run_cfg, task.d_out, val_pairs)
        logs[LossKind(kind).value] = log
        reached[LossKind(kind).value] = steps_to_threshold(log.val_errors, threshold)
    return LossComparison(logs, reached, threshold,
                          easy_fraction(train_pairs, task.easy_threshold))
