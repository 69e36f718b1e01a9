"""Discrete unknowns (one constant vector per cell and per face), the affine
displacement reconstruction, interpolation, boundary differences, and jumps.

Global dof numbering: all cell dofs first (cell-major, component-minor), then
interior-face dofs in face order.  Boundary-face dofs are eliminated from the
unknown vector; their values, when a problem carries nonzero boundary data,
live in ``DiscreteDisplacement.boundary_values``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh


class DofMap:
    """Index map between mesh entities and global dofs."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.dim = mesh.dim
        d = mesh.dim
        self.n_cell = mesh.n_cells
        self.interior = mesh.interior_faces
        self.boundary = mesh.boundary_faces
        self.n_interior = self.interior.shape[0]
        self.n_boundary = self.boundary.shape[0]
        self.n_dofs = d * (self.n_cell + self.n_interior)

        nf = mesh.n_faces
        # rank of each face among interior (or boundary) faces, -1 otherwise
        self.face_rank = np.full(nf, -1, dtype=np.int64)
        self.face_rank[self.interior] = np.arange(self.n_interior)
        self.bface_rank = np.full(nf, -1, dtype=np.int64)
        self.bface_rank[self.boundary] = np.arange(self.n_boundary)

        # "full" scalar numbering used internally by assembly: cells then all
        # faces (interior and boundary, in face order)
        self.n_full = d * (self.n_cell + nf)
        full_scalar_to_reduced = np.full(self.n_cell + nf, -1, dtype=np.int64)
        full_scalar_to_reduced[:self.n_cell] = np.arange(self.n_cell)
        full_scalar_to_reduced[self.n_cell + self.interior] = self.n_cell + self.face_rank[self.interior]
        rep = np.repeat(full_scalar_to_reduced, d)
        comp = np.tile(np.arange(d), self.n_cell + nf)
        self.full_to_reduced = np.where(rep >= 0, rep * d + comp, -1)
        self.reduced_to_full = np.nonzero(self.full_to_reduced >= 0)[0]
        self.boundary_full = np.nonzero(self.full_to_reduced < 0)[0]

    def cell_dof(self, c: int, comp: int) -> int:
        return c * self.dim + comp

    def face_dof(self, f: int, comp: int) -> int:
        r = self.face_rank[f]
        if r < 0:
            raise KeyError(f"face {f} is a boundary face; its dofs are eliminated")
        return (self.n_cell + r) * self.dim + comp


@dataclass
class DiscreteDisplacement:
    """Coefficients over the reduced dofs, plus optional boundary face values
    (one d-vector per boundary face, in boundary-face order)."""

    dofmap: DofMap
    coeffs: np.ndarray
    boundary_values: np.ndarray | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.dofmap.n_dofs,):
            raise ValueError(f"coefficient vector has length {self.coeffs.shape}, "
                             f"expected ({self.dofmap.n_dofs},)")

    def full_vector(self) -> np.ndarray:
        """Vector over cells + all faces, boundary values filled in (or zero)."""
        dm = self.dofmap
        full = np.zeros(dm.n_full)
        full[dm.reduced_to_full] = self.coeffs
        if self.boundary_values is not None:
            full[dm.boundary_full] = np.asarray(self.boundary_values, float).ravel()
        return full

    def cell_values(self) -> np.ndarray:
        d = self.dofmap.dim
        return self.coeffs[:self.dofmap.n_cell * d].reshape(-1, d)

    def face_values(self) -> np.ndarray:
        """Values on all faces (nf, d); boundary rows from boundary_values."""
        dm = self.dofmap
        d = dm.dim
        out = np.zeros((dm.mesh.n_faces, d))
        out[dm.interior] = self.coeffs[dm.n_cell * d:].reshape(-1, d)
        if self.boundary_values is not None:
            out[dm.boundary] = np.asarray(self.boundary_values, float).reshape(-1, d)
        return out


# -- means and interpolation -----------------------------------------------------

def cell_means(mesh: Mesh, func, degree: int = 10) -> np.ndarray:
    """Cell averages of a vector function; func maps (N, d) -> (N, k)."""
    pts, wts, owner = mesh.cell_quadrature(degree)
    vals = np.asarray(func(pts), dtype=float)
    acc = np.zeros((mesh.n_cells, vals.shape[1]))
    np.add.at(acc, owner, wts[:, None] * vals)
    return acc / mesh.cell_measure[:, None]


def face_means(mesh: Mesh, func, degree: int = 10) -> np.ndarray:
    """Face averages of a vector function."""
    pts, wts, owner = mesh.face_quadrature(degree)
    vals = np.asarray(func(pts), dtype=float)
    acc = np.zeros((mesh.n_faces, vals.shape[1]))
    np.add.at(acc, owner, wts[:, None] * vals)
    return acc / mesh.face_measure[:, None]


def interpolate(func, mesh: Mesh, dofmap: DofMap | None = None,
                degree: int = 10) -> DiscreteDisplacement:
    """Interpolation onto the discrete space: cell means and face means.

    Boundary face means are stored as boundary values (the lifting data of a
    nonhomogeneous Dirichlet problem); interior means become dofs.
    """
    dm = dofmap if dofmap is not None else DofMap(mesh)
    d = dm.dim
    cm = cell_means(mesh, func, degree)
    fm = face_means(mesh, func, degree)
    coeffs = np.concatenate([cm.ravel(), fm[dm.interior].ravel()])
    return DiscreteDisplacement(dm, coeffs, boundary_values=fm[dm.boundary].copy())


# -- affine reconstruction ---------------------------------------------------------

class AffineField:
    """Per-cell affine vector fields x -> value + G (x - cell centroid).

    ``values`` has shape (nc, d) and equals the cell mean of the field;
    ``grads`` has shape (nc, d, d) with grads[c, i, j] = d_j p_i on cell c.
    """

    def __init__(self, mesh: Mesh, values: np.ndarray, grads: np.ndarray):
        self.mesh = mesh
        self.values = np.asarray(values, dtype=float)
        self.grads = np.asarray(grads, dtype=float)

    def evaluate(self, cells, points) -> np.ndarray:
        """Evaluate on given cells at given points; both arrays broadcast."""
        cells = np.atleast_1d(np.asarray(cells, dtype=np.int64))
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rel = points - self.mesh.cell_centroid[cells]
        return self.values[cells] + np.einsum("cij,cj->ci", self.grads[cells], rel)

    def sym_grads(self) -> np.ndarray:
        return 0.5 * (self.grads + np.swapaxes(self.grads, 1, 2))


def reconstruct_cell(mesh: Mesh, cell: int, u_cell: np.ndarray,
                     u_faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Affine reconstruction on one cell from its cell dof and face dofs.

    ``u_faces`` holds one d-vector per face of the cell, in the cell's face
    order.  Returns (value, gradient) with value the cell mean.
    """
    u_cell = np.asarray(u_cell, dtype=float)
    u_faces = np.asarray(u_faces, dtype=float)
    fids = mesh.cell_face_ids(cell)
    if u_faces.shape[0] != fids.shape[0]:
        raise ValueError(f"cell {cell} has {fids.shape[0]} faces, "
                         f"got {u_faces.shape[0]} face dofs")
    n_out = mesh.outward_normals(cell)
    w = mesh.face_measure[fids] / mesh.cell_measure[cell]
    grad = np.einsum("f,fi,fj->ij", w, u_faces - u_cell[None, :], n_out)
    return u_cell, grad


def reconstruct(u: DiscreteDisplacement) -> AffineField:
    """Affine reconstruction on every cell (vectorised over incidences)."""
    mesh = u.dofmap.mesh
    d = mesh.dim
    uc = u.cell_values()
    uf = u.face_values()
    cf = mesh.cell_faces
    owner = np.repeat(np.arange(mesh.n_cells), np.diff(mesh.cell_face_offsets))
    n_out = mesh.face_normal[cf] * mesh.cell_face_sign[:, None]
    w = mesh.face_measure[cf] / mesh.cell_measure[owner]
    diff = uf[cf] - uc[owner]
    contrib = w[:, None, None] * diff[:, :, None] * n_out[:, None, :]
    grads = np.zeros((mesh.n_cells, d, d))
    np.add.at(grads, owner, contrib)
    return AffineField(mesh, uc.copy(), grads)


def elliptic_project(func, mesh: Mesh, degree: int = 10) -> AffineField:
    """Per-cell affine field with gradient equal to the cell mean of the
    gradient of func and matching cell mean.

    The mean gradient is evaluated as a surface integral of func against the
    outward normals (the two are identical for the exact integrals), which
    makes this field coincide with reconstruct(interpolate(func)) up to
    roundoff for any quadrature degree.
    """
    fm = face_means(mesh, func, degree)
    cm = cell_means(mesh, func, degree)
    d = mesh.dim
    cf = mesh.cell_faces
    owner = np.repeat(np.arange(mesh.n_cells), np.diff(mesh.cell_face_offsets))
    n_out = mesh.face_normal[cf] * mesh.cell_face_sign[:, None]
    w = mesh.face_measure[cf] / mesh.cell_measure[owner]
    diff = fm[cf] - cm[owner]
    contrib = w[:, None, None] * diff[:, :, None] * n_out[:, None, :]
    grads = np.zeros((mesh.n_cells, d, d))
    np.add.at(grads, owner, contrib)
    return AffineField(mesh, cm, grads)


def boundary_difference(mesh: Mesh, cell: int, face: int, u_cell: np.ndarray,
                        u_faces: np.ndarray) -> np.ndarray:
    """Face mean of the reconstruction minus the face dof, for one (cell, face).

    The face mean of an affine field is its value at the face centroid.
    """
    fids = mesh.cell_face_ids(cell)
    pos = np.nonzero(fids == face)[0]
    if pos.size == 0:
        raise ValueError(f"face {face} does not belong to cell {cell}")
    value, grad = reconstruct_cell(mesh, cell, u_cell, u_faces)
    rel = mesh.face_centroid[face] - mesh.cell_centroid[cell]
    return value + grad @ rel - np.asarray(u_faces, float)[pos[0]]


def boundary_differences(u: DiscreteDisplacement) -> np.ndarray:
    """delta vectors for every (cell, face) incidence, aligned with
    mesh.cell_faces; shape (n_incidences, d)."""
    mesh = u.dofmap.mesh
    field = reconstruct(u)
    uf = u.face_values()
    cf = mesh.cell_faces
    owner = np.repeat(np.arange(mesh.n_cells), np.diff(mesh.cell_face_offsets))
    rel = mesh.face_centroid[cf] - mesh.cell_centroid[owner]
    p_at_face = field.values[owner] + np.einsum("kij,kj->ki", field.grads[owner], rel)
    return p_at_face - uf[cf]


# -- jumps -------------------------------------------------------------------------

@dataclass
class FaceJump:
    """Affine function on a face: value at the face centroid plus a gradient.

    For an interior face this is the difference of the two reconstructions
    (first incident cell minus second); on a boundary face it is the trace of
    the single reconstruction, or trace minus the Dirichlet data when given.
    """

    centroid: np.ndarray
    value: np.ndarray
    gradient: np.ndarray

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self.value + (points - self.centroid) @ self.gradient.T


def face_jump(field: AffineField, face: int, g=None) -> FaceJump:
    """Jump of a per-cell affine field across (or trace on) a face.

    ``g`` is optional boundary data; on boundary faces the jump is the trace
    minus g evaluated at the face centroid (keeping the affine gradient of the
    reconstruction, which is what enters the penalty at lowest order).
    """
    mesh = field.mesh
    c1, c2 = field.mesh.face_cells[face]
    xf = mesh.face_centroid[face]
    v1 = field.evaluate([c1], [xf])[0]
    g1 = field.grads[c1]
    if c2 >= 0:
        v2 = field.evaluate([c2], [xf])[0]
        return FaceJump(xf, v1 - v2, g1 - field.grads[c2])
    if g is not None:
        v1 = v1 - np.asarray(g(xf[None, :]), dtype=float)[0]
    return FaceJump(xf, v1, g1.copy())
