"""Encode one pixel frustum three ways and compare with sampling.

Prints, per octave, the x-axis cosine feature from the exact volume
integral, from the Gaussian cone approximation, and from a Monte Carlo
average over uniform samples inside the frustum.
"""

import numpy as np

from exact_ipe import CameraPose, cone_moments, eipe_frustum, frustum_from_pixel, gaussian_ipe
from exact_ipe.geometry import rotation_matrix
from exact_ipe.oracle import mc_encoding

L = 8
pose = CameraPose(rotation_matrix([1.0, -0.5, 0.3], 0.7), [0.2, -0.1, 0.4], 0.05)
direction = [0.1, -0.2, 1.0]
t0, t1 = 2.0, 3.5

frustum = frustum_from_pixel(pose, direction, t0, t1)
exact = eipe_frustum(frustum, L)
# the cone shares the pixel's central ray; its radius grows by omega per unit depth
ray = pose.R @ np.asarray(direction)
gauss = gaussian_ipe(cone_moments(ray, pose.o, pose.omega, t0, t1), L)
mc = mc_encoding(frustum, L, 1_000_000, seed=0)
mc_cos = mc.mean[3 * L :].reshape(L, 3)
se_cos = mc.std_error[3 * L :].reshape(L, 3)

print(f"{'l':>2} {'exact':>10} {'gaussian':>10} {'sampled':>10} {'+-se':>8}")
for l in range(L):
    print(f"{l:>2} {exact.cos[l, 0]:10.6f} {gauss.cos[l, 0]:10.6f} {mc_cos[l, 0]:10.6f} {se_cos[l, 0]:8.1e}")
