"""Global assembly of the discrete bilinear form and right-hand side.

The operator splits into material-independent pieces assembled once per mesh:

  base: 0.5 * (grad p, grad p) + boundary-difference stabilisation
  sym : 0.5 * (grad p, grad p^T)   (completing the symmetric-strain term)
  div : (div p, div p)
  jump: jump penalisation over all faces

and is combined for given Lame-like coefficients in one of two variants:

  navier    : 2*mu*(base + jump) + (mu + lambda)*div
  symmetric : 2*mu*(base + sym + jump) + lambda*div

The 'navier' split discretises the operator -mu*Lap - (mu+lambda)*grad div
componentwise and reproduces the reference convergence tables; 'symmetric'
discretises the strain-stress law sigma(sym grad) literally.  Both are
consistent, coercive for 2*mu - d*max(-lambda, 0) > 0, and identical in
sparsity.  Penalty weights use the measure-based face size |F|^(1/(d-1)).

``assemble`` integrates the load, applies the Dirichlet condition by
eliminating boundary-face dofs (with a lifting when the data is nonzero), and
returns the reduced symmetric system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .fespace import DofMap, boundary_difference, face_means
from .mesh import Mesh

CONSISTENCY_VARIANTS = ("navier", "symmetric")


@dataclass
class MaterialParams:
    """Isotropic linear material: stress(tau) = 2*mu*tau + lambda*tr(tau)*I."""

    mu: float
    lam: float

    @property
    def lam_neg(self) -> float:
        return 0.5 * (abs(self.lam) - self.lam)

    def alpha(self, dim: int) -> float:
        """Coercivity margin 2*mu - dim*max(-lambda, 0)."""
        return 2.0 * self.mu - dim * self.lam_neg

    def validate(self, dim: int) -> None:
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.alpha(dim) <= 0.0:
            raise ValueError(f"material not coercive: 2*mu - d*lam_neg = "
                             f"{self.alpha(dim)} <= 0 (mu={self.mu}, lambda={self.lam})")


def stress(tau: np.ndarray, mat: MaterialParams) -> np.ndarray:
    """Apply the strain-stress law to a symmetric d x d tensor."""
    tau = np.asarray(tau, dtype=float)
    scale = max(np.abs(tau).max(), 1.0)
    if np.abs(tau - tau.T).max() > 1e-12 * scale:
        raise ValueError("stress law requires a symmetric tensor")
    d = tau.shape[0]
    return 2.0 * mat.mu * tau + mat.lam * np.trace(tau) * np.eye(d)


def gradient_stress(grad: np.ndarray, mat: MaterialParams, consistency: str) -> np.ndarray:
    """Stress-like flux tensor applied to a full gradient, per variant.

    symmetric: sigma(sym(grad)); navier: mu*grad + (mu+lambda)*tr(grad)*I.
    """
    grad = np.asarray(grad, dtype=float)
    d = grad.shape[-1]
    eye = np.eye(d)
    tr = np.trace(grad, axis1=-2, axis2=-1)
    if consistency == "navier":
        return mat.mu * grad + (mat.mu + mat.lam) * tr[..., None, None] * eye
    if consistency == "symmetric":
        sym = 0.5 * (grad + np.swapaxes(grad, -1, -2))
        return 2.0 * mat.mu * sym + mat.lam * tr[..., None, None] * eye
    raise ValueError(f"unknown consistency variant '{consistency}'")


@dataclass
class FullForms:
    """Material-independent form matrices over the full dof set."""

    base: sp.csr_matrix
    sym: sp.csr_matrix
    div: sp.csr_matrix
    jump: sp.csr_matrix
    mesh: Mesh
    dofmap: DofMap

    def combine(self, mat: MaterialParams, consistency: str) -> sp.csr_matrix:
        if consistency == "navier":
            return 2.0 * mat.mu * (self.base + self.jump) + (mat.mu + mat.lam) * self.div
        if consistency == "symmetric":
            return 2.0 * mat.mu * (self.base + self.sym + self.jump) + mat.lam * self.div
        raise ValueError(f"unknown consistency variant '{consistency}'")


def assemble_forms(mesh: Mesh, dofmap: DofMap | None = None) -> FullForms:
    """Assemble the material-independent form matrices (one pass per mesh)."""
    dm = dofmap if dofmap is not None else DofMap(mesh)
    d = mesh.dim
    nc, nf = mesh.n_cells, mesh.n_faces

    rows, cols, base, symv, divv = kernels.cell_triplets(
        d, nc, mesh.cell_face_offsets, mesh.cell_faces, mesh.cell_face_sign,
        mesh.face_measure, mesh.face_size, mesh.face_normal,
        mesh.face_centroid, mesh.cell_measure, mesh.cell_centroid)
    rows_f, cols_f, jumpv = kernels.face_triplets(
        d, nc, nf, mesh.cell_face_offsets, mesh.cell_faces, mesh.cell_face_sign,
        mesh.face_measure, mesh.face_size, mesh.face_normal,
        mesh.face_centroid, mesh.face_moment, mesh.face_cells,
        mesh.cell_measure, mesh.cell_centroid)

    n = dm.n_full
    build = lambda v, r, c: sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
    return FullForms(build(base, rows, cols), build(symv, rows, cols),
                     build(divv, rows, cols), build(jumpv, rows_f, cols_f),
                     mesh, dm)


def local_stabilisation(mesh: Mesh, cell: int, w_cell, w_faces, v_cell, v_faces) -> float:
    """Boundary-difference stabilisation s_T(w, v) on one cell."""
    fids = mesh.cell_face_ids(cell)
    w = mesh.face_measure[fids] / mesh.face_size[fids]
    total = 0.0
    for k, f in enumerate(fids):
        dw = boundary_difference(mesh, cell, f, w_cell, w_faces)
        dv = boundary_difference(mesh, cell, f, v_cell, v_faces)
        total += w[k] * float(dw @ dv)
    return total


@dataclass
class UnreducedSystem:
    """Assembled system over the full dof set, before boundary elimination."""

    A_full: sp.csr_matrix
    b_full: np.ndarray
    cell_loads: np.ndarray
    mesh: Mesh
    dofmap: DofMap
    mat: MaterialParams
    consistency: str
    quad_degree: int


class SparseSystem:
    """Reduced (boundary-eliminated) symmetric system A x = b."""

    def __init__(self, A, b, dofmap, mat, cell_loads, boundary_values, lifting,
                 consistency: str = "navier"):
        self.A = A
        self.b = b
        self.dofmap = dofmap
        self.mat = mat
        self.cell_loads = cell_loads
        self.boundary_values = boundary_values
        self.lifting = lifting
        self.consistency = consistency
        self._check_symmetry()

    @property
    def mesh(self) -> Mesh:
        return self.dofmap.mesh

    @property
    def n_dofs(self) -> int:
        return self.A.shape[0]

    @property
    def nnz(self) -> int:
        return self.A.nnz

    def _check_symmetry(self) -> None:
        diff = abs(self.A - self.A.T)
        dev = diff.max() if diff.nnz else 0.0
        scale = abs(self.A).max()
        if dev > 1e-12 * scale:
            raise AssertionError(f"assembled matrix is not symmetric: "
                                 f"max |A - A^T| = {dev:.3e} vs scale {scale:.3e}")

    def dump_matrix(self, path: str) -> None:
        """MatrixMarket coordinate format, 1-based indices."""
        coo = self.A.tocoo()
        with open(path, "w") as fh:
            fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
            fh.write(f"% elasticity operator ({self.consistency}), "
                     f"mu={self.mat.mu!r} lambda={self.mat.lam!r}\n")
            mask = coo.row >= coo.col  # lower triangle carries the symmetric matrix
            fh.write(f"{self.A.shape[0]} {self.A.shape[1]} {int(mask.sum())}\n")
            for i, j, v in zip(coo.row[mask], coo.col[mask], coo.data[mask]):
                fh.write(f"{i + 1} {j + 1} {v!r}\n")


def integrate_loads(mesh: Mesh, f, degree: int) -> np.ndarray:
    """Per-cell load integrals int_T f, shape (nc, d)."""
    pts, wts, owner = mesh.cell_quadrature(degree)
    vals = np.asarray(f(pts), dtype=float)
    loads = np.zeros((mesh.n_cells, mesh.dim))
    np.add.at(loads, owner, wts[:, None] * vals)
    return loads


def assemble(mesh: Mesh, mat: MaterialParams, case, quad_degree: int = 10,
             forms: FullForms | None = None,
             consistency: str = "navier") -> SparseSystem:
    """Assemble the reduced system for a test case (forcing + boundary data).

    ``forms`` allows reuse of the material-independent matrices across several
    (mu, lambda) pairs on the same mesh; ``consistency`` selects the variant.
    """
    if consistency not in CONSISTENCY_VARIANTS:
        raise ValueError(f"unknown consistency variant '{consistency}'")
    mat.validate(mesh.dim)
    if forms is None:
        forms = assemble_forms(mesh)
    dm = forms.dofmap
    A_full = forms.combine(mat, consistency)

    cell_loads = integrate_loads(mesh, case.f, quad_degree)
    b_full = np.zeros(dm.n_full)
    b_full[:mesh.n_cells * mesh.dim] = cell_loads.ravel()

    ur = UnreducedSystem(A_full, b_full, cell_loads, mesh, dm, mat,
                         consistency, quad_degree)
    g = None if getattr(case, "g", None) is None else case.g
    return apply_dirichlet(ur, g)


def _boundary_jump_rhs(mesh: Mesh, dm: DofMap, mat: MaterialParams, g,
                       degree: int) -> np.ndarray:
    """Right-hand-side contribution of the boundary data in the jump penalty:
    for each boundary face, 2*mu/size_F * int_F g . (trace of the test
    function's reconstruction)."""
    d = mesh.dim
    rhs = np.zeros(dm.n_full)
    bset = set(int(f) for f in mesh.boundary_faces)
    pts, wts, owner = mesh.face_quadrature(degree)
    mask = np.isin(owner, mesh.boundary_faces)
    pts, wts, owner = pts[mask], wts[mask], owner[mask]
    gv = np.asarray(g(pts), dtype=float)
    m0 = np.zeros((mesh.n_faces, d))
    m1 = np.zeros((mesh.n_faces, d, d))
    np.add.at(m0, owner, wts[:, None] * gv)
    rel = pts - mesh.face_centroid[owner]
    np.add.at(m1, owner, wts[:, None, None] * gv[:, :, None] * rel[:, None, :])

    for c in range(mesh.n_cells):
        fids = mesh.cell_face_ids(c)
        if not any(int(f) in bset for f in fids):
            continue
        n_out = mesh.outward_normals(c)
        coef = mesh.face_measure[fids] / mesh.cell_measure[c]
        S = np.empty((d, fids.shape[0] + 1))
        S[:, 1:] = (coef[:, None] * n_out).T
        S[:, 0] = -S[:, 1:].sum(axis=1)
        rel_c = mesh.face_centroid[fids] - mesh.cell_centroid[c]
        q = rel_c @ n_out.T
        P = np.empty((fids.shape[0], fids.shape[0] + 1))
        P[:, 1:] = q * coef[None, :]
        P[:, 0] = 1.0 - P[:, 1:].sum(axis=1)
        ids = np.concatenate([[c], mesh.n_cells + fids])
        for k, f in enumerate(fids):
            if int(f) not in bset:
                continue
            w = 2.0 * mat.mu / mesh.face_size[f]
            # rhs[(a, i)] += w * (P[k, a] * m0[f, i] + sum_j S[j, a] * m1[f, i, j])
            contrib = w * (P[k][:, None] * m0[f][None, :] + S.T @ m1[f].T)
            for a, sid in enumerate(ids):
                rhs[sid * d:(sid + 1) * d] += contrib[a]
    return rhs


def apply_dirichlet(ur: UnreducedSystem, g=None) -> SparseSystem:
    """Fix boundary-face dofs to the face means of g (zero when g is None),
    move their couplings to the right-hand side, and drop their rows/columns."""
    mesh, dm, mat = ur.mesh, ur.dofmap, ur.mat
    d = mesh.dim
    if g is None:
        xb = np.zeros((dm.n_boundary, d))
        b_full = ur.b_full
    else:
        fm = face_means(mesh, g, ur.quad_degree)
        xb = fm[dm.boundary]
        b_full = ur.b_full + _boundary_jump_rhs(mesh, dm, mat, g, ur.quad_degree)

    kept = dm.reduced_to_full
    bnd = dm.boundary_full
    A_csr = ur.A_full.tocsr()
    A = A_csr[kept][:, kept].tocsr()
    if dm.n_boundary and (g is not None):
        lifting = -(A_csr[kept][:, bnd] @ xb.ravel())
    else:
        lifting = np.zeros(kept.shape[0])
    b = b_full[kept] + lifting
    return SparseSystem(A, b, dm, mat, ur.cell_loads, xb, lifting, ur.consistency)
