"""Benchmark the compiled assembly kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--levels 16,32,64] [--dim 2]

Times the material-independent form assembly (the hot path) per backend and
prints a table with the speedup.  The compiled backend is skipped when the
extension is not built.
"""

import argparse
import time

import numpy as np

from polyelast import MeshFamilySpec, build_mesh
from polyelast.kernels import BACKEND, _pykernels

try:
    from polyelast.kernels import _ckernels
except ImportError:
    _ckernels = None


def kernel_args(mesh):
    cell = (mesh.dim, mesh.n_cells, mesh.cell_face_offsets, mesh.cell_faces,
            mesh.cell_face_sign, mesh.face_measure, mesh.face_size,
            mesh.face_normal, mesh.face_centroid, mesh.cell_measure,
            mesh.cell_centroid)
    face = (mesh.dim, mesh.n_cells, mesh.n_faces, mesh.cell_face_offsets,
            mesh.cell_faces, mesh.cell_face_sign, mesh.face_measure,
            mesh.face_size, mesh.face_normal, mesh.face_centroid,
            mesh.face_moment, mesh.face_cells, mesh.cell_measure,
            mesh.cell_centroid)
    return cell, face


def time_backend(mod, mesh, repeat=3):
    cell, face = kernel_args(mesh)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        mod.cell_triplets(*cell)
        mod.face_triplets(*face)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--levels", default="8,16,32")
    ap.add_argument("--dim", type=int, default=2, choices=(2, 3))
    args = ap.parse_args()
    levels = [int(t) for t in args.levels.split(",")]
    family = "structured-triangular" if args.dim == 2 else "cartesian"

    print(f"active backend: {BACKEND}")
    print(f"{'mesh':>24} {'cells':>8} {'python [s]':>12} {'cython [s]':>12} {'speedup':>8}")
    for n in levels:
        mesh = build_mesh(MeshFamilySpec(family, n=n, dim=args.dim))
        t_py = time_backend(_pykernels, mesh, repeat=1 if mesh.n_cells > 5000 else 3)
        if _ckernels is not None:
            t_cy = time_backend(_ckernels, mesh)
            print(f"{family + '-n%d' % n:>24} {mesh.n_cells:>8} {t_py:>12.4f} "
                  f"{t_cy:>12.4f} {t_py / t_cy:>8.1f}x")
        else:
            print(f"{family + '-n%d' % n:>24} {mesh.n_cells:>8} {t_py:>12.4f} "
                  f"{'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
