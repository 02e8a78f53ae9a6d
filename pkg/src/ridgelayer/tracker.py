"""Online tracking loop: train, update the data matrix, localize by argmax."""

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import ContractViolation, InvalidConfig
from .ridge import DEFAULT_LAMBDA, RidgeConfig, SolverPath, predict, ridge_forward
from .sampling import (DEFAULT_GRID_SIDE, DEFAULT_REGION_SCALE, LabelConfig,
                       gaussian_labels, make_grid, region_size_for)
from .tensor import as_matrix, as_vector

DEFAULT_DELTA = 0.01


@dataclass(frozen=True)
class TrackerConfig:
    lam: float = DEFAULT_LAMBDA
    delta: float = DEFAULT_DELTA
    path: SolverPath = SolverPath.AUTO
    grid_side: int = DEFAULT_GRID_SIDE
    region_scale: float = DEFAULT_REGION_SCALE
    labels: LabelConfig = field(default_factory=LabelConfig)

    def __post_init__(self):
        # 0 and 1 are accepted so the degenerate update rates can be exercised.
        if not 0.0 <= self.delta <= 1.0:
            raise InvalidConfig(f"delta must lie in [0, 1], got {self.delta}")

    @property
    def ridge(self):
        return RidgeConfig(self.lam, self.path)


@dataclass(frozen=True)
class TrackerState:
    x_accum: np.ndarray
    labels: np.ndarray
    w: np.ndarray
    delta: float
    frame_index: int
    current_estimate: tuple
    config: TrackerConfig = field(default_factory=TrackerConfig, repr=False)


class Localization(NamedTuple):
    index: int
    score: float
    center: tuple


def init(first_frame_features, labels, cfg=None, center=(0.0, 0.0)):
    """Start tracking: the first frame's matrix becomes the training data."""
    cfg = cfg or TrackerConfig()
    x = as_matrix(first_frame_features, "first_frame_features").copy()
    labels = as_vector(labels, "labels")
    rec = ridge_forward(x, labels, cfg.ridge)
    return TrackerState(x_accum=x, labels=labels, w=rec.w, delta=cfg.delta,
                        frame_index=1, current_estimate=tuple(center),
                        config=cfg)


def blend(x_prev, x_new, delta):
    """``(1 - delta) x_prev + delta x_new``, exact at delta in {0, 1}."""
    if delta == 1.0:
        return x_new.copy()
    # lerp form keeps x_prev bit-exact when x_new == x_prev
    return x_prev + delta * (x_new - x_prev)


def update(state, new_features, estimate=None):
    """Blend a new frame into the data matrix and re-solve the model."""
    x_new = as_matrix(new_features, "new_features")
    if x_new.shape != state.x_accum.shape:
        raise ContractViolation(
            f"new_features has shape {x_new.shape}, "
            f"expected {state.x_accum.shape}")
    x = blend(state.x_accum, x_new, state.delta)
    rec = ridge_forward(x, state.labels, state.config.ridge)
    return replace(
        state, x_accum=x, w=rec.w, frame_index=state.frame_index + 1,
        current_estimate=(state.current_estimate if estimate is None
                          else tuple(estimate)))


def localize(state, search_features, grid):
    """Score every search sample and return the best one.

    Ties resolve to the lowest index.
    """
    z = as_matrix(search_features, "search_features")
    if z.shape[0] != grid.n:
        raise ContractViolation(
            f"search_features has {z.shape[0]} rows, grid has {grid.n}")
    scores = predict(z, state.w)
    i = int(np.argmax(scores))
    return Localization(i, float(scores[i]), tuple(grid.centers[i]))


@dataclass
class FrameResult:
    frame: int
    center: tuple
    index: int
    score: float


@dataclass
class TrackRun:
    frames: list
    state: TrackerState
    spacing: float

    @property
    def trajectory(self):
        return np.array([f.center for f in self.frames])

    def center_errors(self, ground_truth):
        """Per-frame distance to ``ground_truth`` in grid cells."""
        gt = np.asarray(ground_truth, dtype=np.float64)[:len(self.frames)]
        return np.linalg.norm(self.trajectory - gt, axis=1) / self.spacing


def track(provider, init_center, target_size, n_frames=None, cfg=None,
          recenter=True,
          refine: Optional[Callable[[TrackerState, Localization, object],
                                    Optional[tuple]]] = None):
    """Run the tracker over ``n_frames`` frames of ``provider``.

    Frame 0 initializes the model at ``init_center``. In each later frame the
    search grid is centred on the previous estimate (or left fixed when
    ``recenter`` is false), the argmax sample becomes the new estimate, and
    features sampled around it are blended into the data matrix.

    ``refine`` is an optional post-localization hook returning a corrected
    centre, or None to keep the argmax centre.
    """
    cfg = cfg or TrackerConfig()
    if n_frames is None:
        n_frames = len(provider)
    size = region_size_for(target_size, cfg.region_scale)
    grid = make_grid(init_center, size, target_size, cfg.grid_side)
    labels = gaussian_labels(grid, grid.region_center, cfg.labels)
    state = init(provider.features(grid, 0), labels, cfg, grid.region_center)
    frames = [FrameResult(0, grid.region_center, grid.center_index, float("nan"))]

    for t in range(1, n_frames):
        search = grid.recentered(state.current_estimate) if recenter else grid
        loc = localize(state, provider.features(search, t), search)
        center = loc.center
        if refine is not None:
            center = refine(state, loc, search) or center
        frames.append(FrameResult(t, tuple(center), loc.index, loc.score))
        train_grid = search.recentered(center) if recenter else grid
        state = update(state, provider.features(train_grid, t), center)
    return TrackRun(frames=frames, state=state, spacing=grid.spacing)


def drift_trajectory(start, n_frames, step, seed=0, turn=0.3):
    """Seeded smooth random walk: fixed speed ``step``, wandering heading."""
    rng = np.random.default_rng(seed)
    heading = rng.uniform(0.0, 2 * np.pi)
    pts = [np.asarray(start, dtype=np.float64)]
    for _ in range(n_frames - 1):
        heading += turn * rng.standard_normal()
        pts.append(pts[-1] + step * np.array([np.cos(heading), np.sin(heading)]))
    return np.array(pts)
