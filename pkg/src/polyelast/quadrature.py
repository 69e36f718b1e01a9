"""Quadrature rules on segments, triangles, and tetrahedra.

Cells and faces of a polytopal mesh are integrated by fanning them into
simplices from their centroids; this module provides the reference simplex
rules and the vectorised mapping to batches of physical simplices.

Rules are built by collapsing tensor-product Gauss(-Jacobi) rules onto the
reference simplex, which gives exactness for any requested total polynomial
degree without hardcoded point tables.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


def _gauss_01(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    return (x + 1.0) / 2.0, w / 2.0


def _jacobi_01(npts: int, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi rule on [0, 1] against the weight (1 - t)**alpha."""
    x, w = roots_jacobi(npts, alpha, 0.0)
    # t = (x + 1)/2 maps [-1, 1] -> [0, 1]; (1 - x)**alpha = 2**alpha (1 - t)**alpha
    return (x + 1.0) / 2.0, w / 2.0 ** (alpha + 1)


@lru_cache(maxsize=None)
def segment_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule on [0, 1], exact for polynomials of degree <= degree.

    Returns (points (n, 1), weights (n,)); weights sum to 1.
    """
    n = max(degree, 0) // 2 + 1
    t, w = _gauss_01(n)
    return t.reshape(-1, 1), w


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule on the unit triangle {x, y >= 0, x + y <= 1}, exact to total degree.

    Collapsed product of a Gauss-Legendre rule and a Gauss-Jacobi rule
    absorbing the (1 - eta) volume factor. Weights sum to 1/2.
    """
    n = max(degree, 0) // 2 + 1
    xi, wxi = _gauss_01(n)
    eta, weta = _jacobi_01(n, 1)
    X = np.outer(xi, 1.0 - eta).ravel()
    Y = np.tile(eta, n)
    W = np.outer(wxi, weta).ravel()
    return np.column_stack([X, Y]), W


@lru_cache(maxsize=None)
def tetrahedron_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule on the unit tetrahedron, exact to total degree. Weights sum to 1/6."""
    n = max(degree, 0) // 2 + 1
    xi, wxi = _gauss_01(n)
    eta, weta = _jacobi_01(n, 1)
    zeta, wzeta = _jacobi_01(n, 2)
    X = np.einsum("i,j,k->ijk", xi, 1.0 - eta, 1.0 - zeta).ravel()
    Y = np.einsum("j,k->jk", eta, 1.0 - zeta)[None, :, :].repeat(n, axis=0).ravel()
    Z = np.tile(zeta, (n, n, 1)).ravel()
    W = np.einsum("i,j,k->ijk", wxi, weta, wzeta).ravel()
    return np.column_stack([X, Y, Z]), W


def simplex_rule(sdim: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Reference rule for a simplex of dimension sdim in {1, 2, 3}."""
    if sdim == 1:
        return segment_rule(degree)
    if sdim == 2:
        return triangle_rule(degree)
    if sdim == 3:
        return tetrahedron_rule(degree)
    raise ValueError(f"unsupported simplex dimension {sdim}")


def map_to_simplices(verts: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Map a reference rule onto a batch of physical simplices.

    verts has shape (ns, sdim + 1, gdim): each simplex is given by its
    vertices; sdim may be lower than gdim (segments in 2D, triangles in 3D).
    Returns points (ns * npts, gdim) and weights (ns * npts,), so that
    sum(w * f(x)) integrates f over the union of the simplices.
    """
    ns, nvert, gdim = verts.shape
    sdim = nvert - 1
    ref_pts, ref_wts = simplex_rule(sdim, degree)
    edges = verts[:, 1:, :] - verts[:, :1, :]  # (ns, sdim, gdim)
    # points: v0 + xi @ edges
    pts = verts[:, None, 0, :] + np.einsum("qs,nsg->nqg", ref_pts, edges)
    if sdim == gdim:
        scale = np.abs(np.linalg.det(edges))
    else:
        gram = np.einsum("nsg,ntg->nst", edges, edges)
        scale = np.sqrt(np.abs(np.linalg.det(gram)))
    wts = scale[:, None] * ref_wts[None, :]
    return pts.reshape(-1, gdim), wts.ravel()
