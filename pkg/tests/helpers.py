"""Shared test utilities: small meshes and an independent evaluation of the
bilinear form straight from its definition (reconstruction + face quadrature),
used as the oracle for the assembled matrices."""

from __future__ import annotations

import numpy as np

from polyelast import DiscreteDisplacement, from_polygons, gradient_stress, reconstruct
from polyelast.fespace import boundary_differences
from polyelast.quadrature import map_to_simplices


def unit_square_cell():
    """Single-cell mesh: the unit square."""
    return from_polygons([(0, 0), (1, 0), (1, 1), (0, 1)], [[0, 1, 2, 3]])


def right_triangle_cell():
    return from_polygons([(0, 0), (1, 0), (0, 1)], [[0, 1, 2]])


def bilinear_form_value(w: DiscreteDisplacement, v: DiscreteDisplacement, mat,
                        consistency: str, g=None) -> float:
    """a(w, v) evaluated from the definition, independent of the kernels.

    Consistency by exact cell integrals of the constant gradients, the jump
    penalty by quadrature of the affine jumps on each face, the stabilisation
    from boundary differences.
    """
    mesh = w.dofmap.mesh
    d = mesh.dim
    fw = reconstruct(w)
    fv = reconstruct(v)

    sig = gradient_stress(fw.grads, mat, consistency)
    cons = float((mesh.cell_measure * np.einsum("cij,cij->c", sig, fv.grads)).sum())

    # jump term by explicit quadrature on each face
    jump = 0.0
    simps, owner = mesh.face_simplices()
    pts, wts = map_to_simplices(simps, 4)
    per = pts.shape[0] // simps.shape[0]
    owners = np.repeat(owner, per)
    for f in range(mesh.n_faces):
        sel = owners == f
        xq, wq = pts[sel], wts[sel]
        c1, c2 = mesh.face_cells[f]
        jw = fw.evaluate(np.full(len(xq), c1), xq)
        jv = fv.evaluate(np.full(len(xq), c1), xq)
        if c2 >= 0:
            jw = jw - fw.evaluate(np.full(len(xq), c2), xq)
            jv = jv - fv.evaluate(np.full(len(xq), c2), xq)
        elif g is not None:
            jw = jw - np.asarray(g(xq), dtype=float)
        jump += float((wq * (jw * jv).sum(axis=1)).sum()) / mesh.face_size[f]

    dw = boundary_differences(w)
    dv = boundary_differences(v)
    ws = mesh.face_measure[mesh.cell_faces] / mesh.face_size[mesh.cell_faces]
    stab = float((ws * (dw * dv).sum(axis=1)).sum())

    return cons + 2.0 * mat.mu * (jump + stab)
