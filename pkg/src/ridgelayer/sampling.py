"""Sample-grid geometry, Gaussian labels and feature providers.

Samples are target-sized boxes whose centres form a uniform
``grid_side x grid_side`` lattice over a square region. Sample ``i`` sits at
row ``i // grid_side`` (y) and column ``i % grid_side`` (x).
"""

import abc
import os
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InvalidConfig
from .tensor import read_tensor

DEFAULT_GRID_SIDE = 31
DEFAULT_REGION_SCALE = 5.0
DEFAULT_SIGMA_FACTOR = 0.1


@dataclass(frozen=True)
class SampleGrid:
    grid_side: int
    region_center: tuple
    region_size: float
    target_size: tuple
    centers: np.ndarray

    @property
    def n(self):
        return self.grid_side * self.grid_side

    @property
    def spacing(self):
        """Distance between adjacent sample centres (one grid cell)."""
        return self.region_size / max(self.grid_side - 1, 1)

    @property
    def center_index(self):
        return self.n // 2

    def recentered(self, region_center):
        return make_grid(region_center, self.region_size, self.target_size,
                         self.grid_side)


def region_size_for(target_size, scale=DEFAULT_REGION_SCALE):
    """Side of a square region with ``scale**2`` times the target area."""
    tw, th = target_size
    return scale * float(np.sqrt(tw * th))


def make_grid(region_center, region_size, target_size,
              grid_side=DEFAULT_GRID_SIDE):
    if grid_side < 1 or grid_side % 2 == 0:
        raise InvalidConfig(f"grid_side must be odd and >= 1, got {grid_side}")
    if not region_size > 0:
        raise InvalidConfig(f"region_size must be > 0, got {region_size}")
    if min(target_size) <= 0:
        raise InvalidConfig(f"target_size must be positive, got {target_size}")
    cx, cy = (float(v) for v in region_center)
    half = (grid_side - 1) // 2
    step = region_size / max(grid_side - 1, 1)
    offsets = (np.arange(grid_side) - half) * step
    gy, gx = np.meshgrid(cy + offsets, cx + offsets, indexing="ij")
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    return SampleGrid(grid_side=grid_side, region_center=(cx, cy),
                      region_size=float(region_size),
                      target_size=tuple(float(v) for v in target_size),
                      centers=centers)


@dataclass(frozen=True)
class LabelConfig:
    sigma_factor: float = DEFAULT_SIGMA_FACTOR

    def __post_init__(self):
        if not self.sigma_factor > 0:
            raise InvalidConfig(
                f"sigma_factor must be > 0, got {self.sigma_factor}")


def label_sigma(target_size, cfg):
    tw, th = target_size
    return cfg.sigma_factor * float(np.sqrt(tw * th))


def gaussian_labels(grid, target_center, cfg=None):
    """Gaussian regression targets ``exp(-d^2 / (2 sigma^2))``.

    ``d`` is the Euclidean distance (pixels) from each sample centre to
    ``target_center``; no cyclic wrap-around is applied.
    """
    cfg = cfg or LabelConfig()
    sigma = label_sigma(grid.target_size, cfg)
    d2 = np.sum((grid.centers - np.asarray(target_center, float)) ** 2, axis=1)
    return np.exp(-d2 / (2.0 * sigma * sigma))


class FeatureProvider(abc.ABC):
    """Maps the sample centres of a grid to an ``N x dim`` feature matrix."""

    dim: int

    @abc.abstractmethod
    def features(self, grid, frame=0):
        """Feature matrix for ``grid`` in frame ``frame``."""


class SyntheticAppearance:
    """Seeded random encoder standing in for a CNN feature extractor.

    A sample's displacement from the target, in units of
    ``sqrt(target_w * target_h)`` (the same scale as the label bandwidth), is
    encoded by ``dim // 2`` Gaussian bumps (one centred on the target, the
    rest at random anchors) and random Fourier features for background
    texture. The encoding is then mixed by a fixed random orthogonal matrix.
    """

    texture_scale = 0.5

    def __init__(self, dim, seed=0, gain=3.0, peak_width=0.1):
        if dim < 2:
            raise InvalidConfig(f"feature dim must be >= 2, got {dim}")
        rng = np.random.default_rng(seed)
        self.dim = dim
        self.seed = seed
        self.gain = gain
        n_bump = dim // 2
        n_tex = dim - n_bump
        anchors = rng.uniform(-1.5, 1.5, size=(n_bump, 2))
        anchors[0] = 0.0
        widths = rng.uniform(0.08, 0.3, size=n_bump)
        widths[0] = peak_width
        self.anchors = anchors
        self.widths = widths
        self.freqs = rng.standard_normal((n_tex, 2)) / self.texture_scale
        self.phases = rng.uniform(0.0, 2 * np.pi, size=n_tex)
        q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
        self.mixing = q * np.sign(np.diag(r))

    def encode(self, displacement):
        """Unmixed encoding of an ``(M, 2)`` array of displacements."""
        d = np.atleast_2d(np.asarray(displacement, dtype=np.float64))
        sq = np.sum((d[:, None, :] - self.anchors[None]) ** 2, axis=2)
        bumps = np.exp(-sq / (2.0 * self.widths ** 2))
        texture = np.cos(d @ self.freqs.T + self.phases)
        return np.hstack([bumps, texture])

    def features(self, grid, target_center, noise=0.0, frame=0):
        unit = np.sqrt(grid.target_size[0] * grid.target_size[1])
        disp = (grid.centers - np.asarray(target_center, float)) / unit
        x = self.gain * (self.encode(disp) @ self.mixing)
        if noise:
            # keyed on the grid position so distinct grids get independent draws
            where = np.asarray(grid.region_center, np.float64).view(np.uint64)
            rng = np.random.default_rng([self.seed, frame, *map(int, where)])
            x = x + noise * rng.standard_normal(x.shape)
        return x


def synthetic_features(grid, target_center, dim, noise=0.0, seed=0, frame=0):
    """``N x dim`` synthetic features for a target at ``target_center``.

    ``seed`` fixes the encoder; ``(seed, frame, grid position)`` fixes the
    noise draw.
    """
    return SyntheticAppearance(dim, seed).features(grid, target_center,
                                                   noise, frame)


class SyntheticSequence(FeatureProvider):
    """Synthetic provider following a known target trajectory."""

    def __init__(self, trajectory, dim, noise=0.0, seed=0):
        self.trajectory = np.asarray(trajectory, dtype=np.float64)
        self.appearance = SyntheticAppearance(dim, seed)
        self.dim = dim
        self.noise = noise

    def __len__(self):
        return len(self.trajectory)

    def features(self, grid, frame=0):
        return self.appearance.features(grid, self.trajectory[frame],
                                        self.noise, frame)


class FileSequence(FeatureProvider):
    """Per-frame RLT1 feature matrices read from a directory.

    Files are taken in sorted filename order; the grid passed to
    :meth:`features` is only used to check the row count.
    """

    suffix = ".rlt"

    def __init__(self, directory):
        self.directory = os.fspath(directory)
        if not os.path.isdir(self.directory):
            raise FileNotFoundError(self.directory)
        self.paths = sorted(
            os.path.join(self.directory, f) for f in os.listdir(self.directory)
            if f.endswith(self.suffix))
        if not self.paths:
            raise FileNotFoundError(
                f"no *{self.suffix} frames in {self.directory}")
        self.dim = self._load(0).shape[1]

    def __len__(self):
        return len(self.paths)

    def _load(self, frame):
        x = read_tensor(self.paths[frame])
        if x.ndim != 2:
            raise ContractViolation(f"{self.paths[frame]} is not a matrix")
        return x

    def features(self, grid, frame=0):
        x = self._load(frame)
        if x.shape != (grid.n, self.dim):
            raise ContractViolation(
                f"{self.paths[frame]} has shape {x.shape}, "
                f"expected {(grid.n, self.dim)}")
        return x
