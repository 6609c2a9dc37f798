"""
Edges versus small targets
==========================

A plain centre-surround contrast lights up along any strong edge.  The
directional minimum only fires where the centre is brighter than *all*
eight neighbour cells, so a straight edge, which always leaves some
neighbour at the same level, is wiped out.
"""

import numpy as np

from admd import aagd, admd_efficient
from admd.synth import GaussianTarget, SceneSpec, StepEdge, render

# Two-level scene: dark 50 left of column 40, bright 200 from column 40 on.
spec = SceneSpec(96, 64, 50.0, [StepEdge("vertical", 40, 200.0)])
img, _ = render(spec)

a = aagd(img, 3)
d = admd_efficient(img, 3)
print("step edge, cell 3")
print("  AAGD peak   :", a.max(), " (9/64 * 150^2 =", 9 / 64 * 150 ** 2, ")")
print("  ADMD peak   :", d.max())

# The AAGD profile across one row: two ridges hugging the edge.
print("  AAGD row 32, columns 34..45:", np.round(a[32, 34:46]).astype(int).tolist())

# Now plant a faint blob on the bright side, well away from the edge.
spec.elements.append(GaussianTarget(70, 30, 1.5, 40.0))
img, gt = render(spec)
a = aagd(img, 3)
d = admd_efficient(img, 3)
for name, sal in (("AAGD", a), ("ADMD", d)):
    y, x = np.unravel_index(sal.argmax(), sal.shape)
    print(f"{name}: strongest response at (x={x}, y={y}), value {sal.max():.1f}")
print("target box:", gt.targets[0])
