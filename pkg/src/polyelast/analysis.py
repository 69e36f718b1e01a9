"""Error measures, seminorms, convergence orders, and consistency diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import SparseSystem
from .fespace import (DiscreteDisplacement, boundary_differences, cell_means,
                      interpolate, reconstruct)
from .mesh import Mesh


@dataclass
class ErrorReport:
    """One refinement level of a convergence study."""

    mesh_id: str
    h: float
    n_dofs: int
    nnz: int
    energy_error: float
    l2_error: float
    energy_eoc: float | None = None
    l2_eoc: float | None = None
    balance_residual: float | None = None
    equilibrium_residual: float | None = None
    seminorm_breakdown: "SeminormBreakdown | None" = None


@dataclass
class SeminormBreakdown:
    """Strain / jump / stabilisation split of the triple bar norm."""

    strain: float
    jump: float
    stabilisation: float

    @property
    def triple(self) -> float:
        return math.sqrt(self.strain ** 2 + self.jump ** 2 + self.stabilisation ** 2)


def energy_error(u_h: DiscreteDisplacement, u_exact, system: SparseSystem,
                 degree: int = 10) -> float:
    """Energy norm (through the assembled matrix) of u_h minus the
    interpolant of the exact solution, over the reduced dofs."""
    ih = interpolate(u_exact, system.mesh, u_h.dofmap, degree)
    e = u_h.coeffs - ih.coeffs
    return math.sqrt(max(float(e @ (system.A @ e)), 0.0))


def l2_error(u_h: DiscreteDisplacement, u_exact, mesh: Mesh, degree: int = 10) -> float:
    """L2 distance between the piecewise-constant cell field and the cell
    means of the exact solution."""
    diff = u_h.cell_values() - cell_means(mesh, u_exact, degree)
    return math.sqrt(float((mesh.cell_measure[:, None] * diff ** 2).sum()))


def seminorms(u: DiscreteDisplacement, g=None, degree: int = 10) -> SeminormBreakdown:
    """Strain, jump, and stabilisation seminorms of a discrete field.

    Boundary faces contribute the trace of the reconstruction to the jump
    seminorm (minus the boundary data g when given).
    """
    mesh = u.dofmap.mesh
    field = reconstruct(u)
    sym = field.sym_grads()
    strain2 = float((mesh.cell_measure * (sym ** 2).sum(axis=(1, 2))).sum())

    # jump: value at the centroid plus the gradient against the face moment
    fc = mesh.face_cells
    c1 = fc[:, 0]
    interior = fc[:, 1] >= 0
    xf = mesh.face_centroid
    val = field.evaluate(c1, xf)
    grad = field.grads[c1].copy()
    c2 = fc[interior, 1]
    val[interior] -= field.evaluate(c2, xf[interior])
    grad[interior] -= field.grads[c2]
    jump2_faces = (mesh.face_measure * (val ** 2).sum(axis=1)
                   + np.einsum("fij,fjk,fik->f", grad, mesh.face_moment, grad))
    if g is not None:
        # quadrature version of |p - g|^2 on boundary faces
        bmask = ~interior
        pts, wts, owner = mesh.face_quadrature(degree)
        keep = np.isin(owner, np.nonzero(bmask)[0])
        pts, wts, owner = pts[keep], wts[keep], owner[keep]
        pv = field.evaluate(c1[owner], pts)
        gv = np.asarray(g(pts), dtype=float)
        per_face = np.zeros(mesh.n_faces)
        np.add.at(per_face, owner, wts * ((pv - gv) ** 2).sum(axis=1))
        jump2_faces = np.where(bmask, per_face, jump2_faces)
    jump2 = float((jump2_faces / mesh.face_size).sum())

    delta = boundary_differences(u)
    w = mesh.face_measure[mesh.cell_faces] / mesh.face_size[mesh.cell_faces]
    stab2 = float((w * (delta ** 2).sum(axis=1)).sum())
    return SeminormBreakdown(math.sqrt(strain2), math.sqrt(jump2), math.sqrt(stab2))


def eoc(errors, hs) -> list[float | None]:
    """Estimated orders of convergence between consecutive refinements.

    Entry i relates levels i and i+1; None where an error is not positive.
    """
    errors = [float(e) for e in errors]
    hs = [float(h) for h in hs]
    if len(errors) != len(hs) or len(errors) < 2:
        raise ValueError("need matching error/h sequences of length >= 2")
    if any(h2 >= h1 for h1, h2 in zip(hs, hs[1:])):
        raise ValueError("mesh sizes must be strictly decreasing")
    out: list[float | None] = []
    for e1, e2, h1, h2 in zip(errors, errors[1:], hs, hs[1:]):
        if e1 <= 0.0 or e2 <= 0.0:
            out.append(None)
        else:
            out.append((math.log(e1) - math.log(e2)) / (math.log(h1) - math.log(h2)))
    return out


def consistency_residual(u_exact, system: SparseSystem, degree: int = 10) -> float:
    """Dual norm (in the assembled inner product) of the residual of the
    interpolated exact solution: sqrt(r^T A^{-1} r) with r = b - A I(u)."""
    from .solver import solve

    ih = interpolate(u_exact, system.mesh, system.dofmap, degree)
    r = system.b - system.A @ ih.coeffs
    y, _ = solve(system, rhs=r)
    return math.sqrt(max(float(r @ y.coeffs), 0.0))
