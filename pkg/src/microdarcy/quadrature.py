"""Quadrature rules on the reference tetrahedron and triangle.

Rules are built as conical (Duffy-collapsed) Gauss products, so exactness up
to the requested degree is guaranteed by construction rather than by a
transcribed table.  Reference elements:

* tetrahedron: vertices (0,0,0), (1,0,0), (0,1,0), (0,0,1), volume 1/6
* triangle:    vertices (0,0), (1,0), (0,1), area 1/2

Weights include the reference measure, i.e. they sum to 1/6 resp. 1/2.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


def _gauss01(n, alpha):
    """Gauss-Jacobi nodes/weights for weight (1-x)^alpha on [0, 1]."""
    if alpha == 0:
        x, w = roots_legendre(n)
    else:
        x, w = roots_jacobi(n, alpha, 0.0)
    # map [-1, 1] -> [0, 1]; Jacobi weight (1-x)^a picks up 2^-(a+1) per unit
    x01 = 0.5 * (x + 1.0)
    w01 = w * 0.5 ** (alpha + 1)
    return x01, w01


@lru_cache(maxsize=None)
def tet_rule(degree):
    """Points (nq, 3) and weights (nq,) exact for polynomials of total degree <= degree."""
    n = max(1, (degree + 2) // 2)
    u, wu = _gauss01(n, 2)
    v, wv = _gauss01(n, 1)
    t, wt = _gauss01(n, 0)
    U, V, T = np.meshgrid(u, v, t, indexing="ij")
    WU, WV, WT = np.meshgrid(wu, wv, wt, indexing="ij")
    x = U
    y = V * (1.0 - U)
    z = T * (1.0 - U) * (1.0 - V)
    pts = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
    w = (WU * WV * WT).ravel()
    return pts, w


@lru_cache(maxsize=None)
def tri_rule(degree):
    """Points (nq, 2) and weights (nq,) exact for total degree <= degree on the reference triangle."""
    n = max(1, (degree + 2) // 2)
    u, wu = _gauss01(n, 1)
    v, wv = _gauss01(n, 0)
    U, V = np.meshgrid(u, v, indexing="ij")
    WU, WV = np.meshgrid(wu, wv, indexing="ij")
    x = U
    y = V * (1.0 - U)
    pts = np.stack([x.ravel(), y.ravel()], axis=1)
    w = (WU * WV).ravel()
    return pts, w
