import numpy as np
import pytest
import scipy.sparse as sp

from polyelast import MeshFamilySpec, build_mesh
from polyelast.kernels import BACKEND, _pykernels, cell_triplets, face_triplets

compiled = pytest.mark.skipif(BACKEND != "cython",
                              reason="compiled kernels not available")


def _args(mesh):
    c = (mesh.dim, mesh.n_cells, mesh.cell_face_offsets, mesh.cell_faces,
         mesh.cell_face_sign, mesh.face_measure, mesh.face_size,
         mesh.face_normal, mesh.face_centroid, mesh.cell_measure,
         mesh.cell_centroid)
    f = (mesh.dim, mesh.n_cells, mesh.n_faces, mesh.cell_face_offsets,
         mesh.cell_faces, mesh.cell_face_sign, mesh.face_measure,
         mesh.face_size, mesh.face_normal, mesh.face_centroid,
         mesh.face_moment, mesh.face_cells, mesh.cell_measure,
         mesh.cell_centroid)
    return c, f


@compiled
@pytest.mark.parametrize("spec", [
    MeshFamilySpec("structured-triangular", n=3),
    MeshFamilySpec("distorted-quadrangular", n=4),
    MeshFamilySpec("cartesian", n=2, dim=3),
    MeshFamilySpec("cube-to-tet", n=2, dim=3),
    MeshFamilySpec("lshape", n=2),
])
def test_backend_parity(spec):
    mesh = build_mesh(spec)
    cargs, fargs = _args(mesh)
    rc = cell_triplets(*cargs)
    rp = _pykernels.cell_triplets(*cargs)
    assert np.array_equal(rc[0], rp[0]) and np.array_equal(rc[1], rp[1])
    for a, b in zip(rc[2:], rp[2:]):
        assert np.abs(a - b).max() < 1e-13 * max(np.abs(b).max(), 1.0)

    n = (mesh.n_cells + mesh.n_faces) * mesh.dim
    fc = face_triplets(*fargs)
    fp = _pykernels.face_triplets(*fargs)
    Ac = sp.coo_matrix((fc[2], (fc[0], fc[1])), shape=(n, n)).tocsr()
    Ap = sp.coo_matrix((fp[2], (fp[0], fp[1])), shape=(n, n)).tocsr()
    assert abs(Ac - Ap).max() < 1e-13 * abs(Ap).max()


def test_triplet_streams_deterministic():
    mesh = build_mesh(MeshFamilySpec("structured-triangular", n=3))
    cargs, fargs = _args(mesh)
    a = cell_triplets(*cargs)
    b = cell_triplets(*cargs)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    a = face_triplets(*fargs)
    b = face_triplets(*fargs)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
