"""What the shrinkage losses do to easy samples.

Residuals below ``c`` get their penalty damped by a sigmoid gate. The
modified loss gates on |r|, so a prediction that falls *below* its label is
damped the same way as one above it. The original form only looks at r.
"""
import numpy as np

from ridgelayer import (Reduction, ShrinkageParams, mse, shrinkage_modified,
                        shrinkage_origin, shrinkage_weight)

p = ShrinkageParams(reduction=Reduction.SUM)
y = np.zeros(1)

print(" r      weight   modified  origin    mse")
for r in [-0.6, -0.2, -0.05, 0.0, 0.05, 0.2, 0.6]:
    pred = np.array([r])
    print(f"{r:5.2f}  {shrinkage_weight(abs(r), p.a, p.c):7.4f}  "
          f"{shrinkage_modified(pred, y, p)[0]:8.5f}  "
          f"{shrinkage_origin(pred, y, p)[0]:8.5f}  "
          f"{mse(pred, y, Reduction.SUM)[0]:8.5f}")
