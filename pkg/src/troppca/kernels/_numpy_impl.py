"""Pure-numpy reference implementation of the hot kernels.

This is the fallback backend; `troppca.kernels._speedups` implements the
same four functions in Cython. Both must return bit-identical results on
float64 input (max/min/add only, no reassociation), which the test suite
checks.
"""

import numpy as np


def tropical_distance(v, w):
    d = v - w
    return float(d.max() - d.min())


def project_point(vertices, point):
    diff = point[np.newaxis, :] - vertices          # (s, e)
    lam = diff.min(axis=1)                          # (s,)
    proj = (lam[:, np.newaxis] + vertices).max(axis=0)
    return proj, lam


def project_batch(vertices, points):
    diff = points[:, np.newaxis, :] - vertices[np.newaxis, :, :]   # (n, s, e)
    lam = diff.min(axis=2)                                         # (n, s)
    proj = (lam[:, :, np.newaxis] + vertices[np.newaxis, :, :]).max(axis=1)
    return proj, lam


def residual_batch(vertices, points):
    proj, _ = project_batch(vertices, points)
    d = points - proj
    return d.max(axis=1) - d.min(axis=1)
