"""Online tracking on a synthetic sequence.

Each frame trains a ridge model on the running data matrix, scores a grid of
samples around the previous estimate and moves to the argmax. The data
matrix is blended with the newest frame at rate delta.
"""
import numpy as np

from ridgelayer import SyntheticSequence, TrackerConfig, drift_trajectory, track

start, target = (240.0, 240.0), (32.0, 32.0)
truth = drift_trajectory(start, 100, step=2.0, seed=3)
frames = SyntheticSequence(truth, dim=64, noise=0.05, seed=3)

for delta in (0.0, 0.01, 0.2):
    run = track(frames, start, target, cfg=TrackerConfig(delta=delta))
    err = run.center_errors(truth)
    print(f"delta={delta:4.2f}  mean error {err[1:].mean():.3f} cells  "
          f"worst {err.max():.2f} cells")

est = np.asarray(run.trajectory)
print("last estimate", est[-1].round(1), "truth", np.asarray(truth[-1]).round(1))
