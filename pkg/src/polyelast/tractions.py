"""Numerical tractions, local force balances, and interface equilibrium.

For every (cell, face) pair the scheme defines a constant traction vector
with three additive parts: the consistent flux of the variant's stress-like
tensor, a jump-penalty part, and a stabilisation part.  They satisfy, exactly
at the algebraic level,

  a(w, v) = sum_T sum_F |F| Phi_TF(w) . (v_T - v_F),

so at the discrete solution every cell balances its boundary tractions
against its load integral and interface tractions are equal and opposite.
Besides the mean of the reconstruction jump on each face, the jump part
requires its first moment about the face centroid; both are evaluated exactly
for affine jumps (and by quadrature for the non-polynomial boundary data of
lifted problems).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import MaterialParams, SparseSystem, gradient_stress
from .fespace import DiscreteDisplacement, boundary_differences, reconstruct
from .mesh import Mesh


class TractionField:
    """Constant traction vectors per (cell, face) incidence, with parts.

    Arrays are aligned with ``mesh.cell_faces``: entry k belongs to the k-th
    (cell, face) incidence.  ``total = consistency + jump_part + stab_part``
    with the shear coefficient already folded into the penalty parts.
    """

    def __init__(self, mesh: Mesh, consistency, jump_part, stab_part,
                 flux_scale: float = 0.0):
        self.mesh = mesh
        self.consistency = consistency
        self.jump_part = jump_part
        self.stab_part = stab_part
        self.total = consistency + jump_part + stab_part
        # magnitude of the lambda-weighted intermediates in the flux
        # evaluation; the balance/equilibrium residuals are floored by
        # machine epsilon times this quantity, so the relative checks
        # normalise against it as well
        self.flux_scale = float(flux_scale)
        self._owner = np.repeat(np.arange(mesh.n_cells),
                                np.diff(mesh.cell_face_offsets))

    def incidence(self, cell: int, face: int) -> int:
        lo, hi = self.mesh.cell_face_offsets[cell], self.mesh.cell_face_offsets[cell + 1]
        pos = np.nonzero(self.mesh.cell_faces[lo:hi] == face)[0]
        if pos.size == 0:
            raise KeyError(f"face {face} is not a face of cell {cell}")
        return int(lo + pos[0])

    def value(self, cell: int, face: int) -> np.ndarray:
        return self.total[self.incidence(cell, face)]

    def parts(self, cell: int, face: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        k = self.incidence(cell, face)
        return self.consistency[k], self.jump_part[k], self.stab_part[k]

    def write_csv(self, path: str) -> None:
        d = self.mesh.dim
        comp = "xyz"[:d]
        with open(path, "w") as fh:
            head = ["cell_id", "face_id"]
            for tag in ("phi", "consistency", "jump", "stab"):
                head += [f"{tag}_{c}" for c in comp]
            fh.write(",".join(head) + "\n")
            for k in range(self.total.shape[0]):
                row = [str(int(self._owner[k])), str(int(self.mesh.cell_faces[k]))]
                for arr in (self.total, self.consistency, self.jump_part, self.stab_part):
                    row += [f"{v:.17e}" for v in arr[k]]
                fh.write(",".join(row) + "\n")


def _jump_moments(u: DiscreteDisplacement, g=None, degree: int = 10):
    """Per face: integral of the reconstruction jump and its first moment
    about the face centroid, (nf, d) and (nf, d, d).  With boundary data g
    the jump on a boundary face is the trace minus g."""
    mesh = u.dofmap.mesh
    field = reconstruct(u)
    fc = mesh.face_cells
    c1 = fc[:, 0]
    interior = fc[:, 1] >= 0
    xf = mesh.face_centroid

    val = field.evaluate(c1, xf)
    grad = field.grads[c1].copy()
    c2 = fc[interior, 1]
    val[interior] -= field.evaluate(c2, xf[interior])
    grad[interior] -= field.grads[c2]

    j0 = mesh.face_measure[:, None] * val
    j1 = np.einsum("fil,flk->fik", grad, mesh.face_moment)
    if g is not None:
        bnd = np.nonzero(~interior)[0]
        pts, wts, owner = mesh.face_quadrature(degree)
        keep = np.isin(owner, bnd)
        pts, wts, owner = pts[keep], wts[keep], owner[keep]
        gv = np.asarray(g(pts), dtype=float)
        np.subtract.at(j0, owner, wts[:, None] * gv)
        rel = pts - xf[owner]
        np.subtract.at(j1, owner, wts[:, None, None] * gv[:, :, None] * rel[:, None, :])
    return j0, j1


def numerical_tractions(u: DiscreteDisplacement, mat: MaterialParams,
                        consistency: str = "navier", g=None,
                        degree: int = 10) -> TractionField:
    """Evaluate the traction field of a discrete displacement."""
    mesh = u.dofmap.mesh
    d = mesh.dim
    field = reconstruct(u)

    cf = mesh.cell_faces
    owner = np.repeat(np.arange(mesh.n_cells), np.diff(mesh.cell_face_offsets))
    n_out = mesh.face_normal[cf] * mesh.cell_face_sign[:, None]
    eps = mesh.cell_face_sign  # n_TF . n_F

    # consistent flux  -stress(grad p_T) n_TF
    sig = gradient_stress(field.grads, mat, consistency)
    cons_part = -np.einsum("kij,kj->ki", sig[owner], n_out)

    j0, j1 = _jump_moments(u, g=g, degree=degree)
    hF = mesh.face_size
    # per-cell accumulator of the interior contribution of the reconstruction:
    #   sum_G (eps_G / size_G) [ J_G (xbar_G - xbar_T)^T + Jmom_G ]
    wj = eps / hF[cf]
    relc = mesh.face_centroid[cf] - mesh.cell_centroid[owner]
    KL = wj[:, None, None] * (j0[cf][:, :, None] * relc[:, None, :] + j1[cf])
    KLsum = np.zeros((mesh.n_cells, d, d))
    np.add.at(KLsum, owner, KL)
    jump_part = (wj[:, None] / mesh.face_measure[cf][:, None]) * j0[cf] \
        - np.einsum("kij,kj->ki", KLsum[owner], n_out) / mesh.cell_measure[owner][:, None]

    delta = boundary_differences(u)
    ws = mesh.face_measure[cf] / hF[cf]
    Z = ws[:, None, None] * delta[:, :, None] * (-relc)[:, None, :]
    Zsum = np.zeros((mesh.n_cells, d, d))
    np.add.at(Zsum, owner, Z)
    stab_part = delta / hF[cf][:, None] \
        + np.einsum("kij,kj->ki", Zsum[owner], n_out) / mesh.cell_measure[owner][:, None]

    gmax = float(np.sqrt((field.grads ** 2).sum(axis=(1, 2))).max())
    flux_scale = (2.0 * mat.mu + d * abs(mat.lam)) * gmax
    return TractionField(mesh, cons_part,
                         2.0 * mat.mu * jump_part, 2.0 * mat.mu * stab_part,
                         flux_scale=flux_scale)


def traction_form_value(tr: TractionField, v: DiscreteDisplacement) -> float:
    """Evaluate sum_T sum_F |F| Phi_TF . (v_T - v_F) for a test field."""
    mesh = tr.mesh
    cf = mesh.cell_faces
    vc = v.cell_values()
    vf = v.face_values()
    diff = vc[tr._owner] - vf[cf]
    return float((mesh.face_measure[cf] * (tr.total * diff).sum(axis=1)).sum())


@dataclass
class BalanceReport:
    max_residual: float
    rel_residual: float
    scale: float
    ok: bool
    worst_cell: int

    def __str__(self) -> str:
        tag = "OK" if self.ok else "FAIL"
        return (f"local balance {tag}: max residual {self.max_residual:.3e} "
                f"({self.rel_residual:.3e} relative, worst cell {self.worst_cell})")


@dataclass
class EquilibriumReport:
    max_residual: float
    rel_residual: float
    scale: float
    ok: bool
    worst_face: int

    def __str__(self) -> str:
        tag = "OK" if self.ok else "FAIL"
        return (f"traction equilibrium {tag}: max residual {self.max_residual:.3e} "
                f"({self.rel_residual:.3e} relative, worst face {self.worst_face})")


def check_local_balance(tr: TractionField, system: SparseSystem,
                        rel_tol: float = 1e-8) -> BalanceReport:
    """Per-cell residual of sum_F |F| Phi_TF against the assembled load."""
    mesh = tr.mesh
    sums = np.zeros((mesh.n_cells, mesh.dim))
    np.add.at(sums, tr._owner, mesh.face_measure[mesh.cell_faces][:, None] * tr.total)
    resid = np.linalg.norm(sums - system.cell_loads, axis=1)
    scale = max(float(np.linalg.norm(system.cell_loads, axis=1).max()),
                float((mesh.face_measure[mesh.cell_faces][:, None]
                       * np.abs(tr.total)).max()),
                tr.flux_scale * float(mesh.face_measure.max()))
    scale = max(scale, 1e-300)
    worst = int(resid.argmax())
    rel = float(resid[worst]) / scale
    return BalanceReport(float(resid[worst]), rel, scale, rel <= rel_tol, worst)


def check_equilibrium(tr: TractionField, rel_tol: float = 1e-8) -> EquilibriumReport:
    """Per interior face residual of Phi_T1F + Phi_T2F."""
    mesh = tr.mesh
    sums = np.zeros((mesh.n_faces, mesh.dim))
    np.add.at(sums, mesh.cell_faces, tr.total)
    interior = mesh.interior_faces
    resid = np.linalg.norm(sums[interior], axis=1)
    scale = max(float(np.abs(tr.total).max()), tr.flux_scale, 1e-300)
    worst = int(resid.argmax())
    rel = float(resid[worst]) / scale
    return EquilibriumReport(float(resid[worst]), rel, scale,
                             rel <= rel_tol, int(interior[worst]))
