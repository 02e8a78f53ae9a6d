"""Differentiable closed-form ridge regression for discriminative tracking."""

from .errors import (ContractViolation, EmptyProblem, FormatError,
                     InvalidConfig, RidgeLayerError, SingularSystem)
from .loss import (LossKind, Reduction, ShrinkageParams, evaluate_loss, mse,
                   shrinkage_modified, shrinkage_origin, shrinkage_weight)
from .ridge import (RidgeConfig, RidgeGradients, SolveRecord, SolverPath,
                    normal_residual, predict, ridge_backward,
                    ridge_forward)
from .sampling import (FeatureProvider, FileSequence, LabelConfig, SampleGrid,
                       SyntheticSequence, gaussian_labels, make_grid,
                       synthetic_features)
from .tensor import matmul, read_tensor, spd_solve, write_tensor
from .tracker import (TrackerConfig, TrackerState, drift_trajectory, init,
                      localize, track, update)
from .train import (LinearEmbedding, TrainConfig, adam_update, compare_losses,
                    train_step)

__version__ = "0.1.0"
