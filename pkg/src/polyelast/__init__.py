"""Lowest-order hybrid discretisation of linear elasticity on general
polygonal and polyhedral meshes, with jump-penalised stabilisation,
equilibrated numerical tractions, and a convergence-study driver."""

from .analysis import (ErrorReport, SeminormBreakdown, consistency_residual,
                       energy_error, eoc, l2_error, seminorms)
from .assembly import (CONSISTENCY_VARIANTS, FullForms, MaterialParams,
                       SparseSystem, UnreducedSystem, apply_dirichlet,
                       assemble, assemble_forms, gradient_stress,
                       local_stabilisation, stress)
from .cases import TestCase, case_names, get_case
from .cli import RunConfig, export_vtk, run_study
from .fespace import (AffineField, DiscreteDisplacement, DofMap, FaceJump,
                      boundary_difference, cell_means, elliptic_project,
                      face_jump, face_means, interpolate, reconstruct,
                      reconstruct_cell)
from .kernels import BACKEND as KERNEL_BACKEND
from .mesh import (Mesh, MeshError, MeshFamilySpec, MeshFileError, MeshReport,
                   build_mesh, compute_geometry, from_polygons, from_polyhedra,
                   read_mesh_file, validate_mesh, write_mesh_file)
from .solver import NotPositiveDefiniteError, SolveReport, SolverError, solve
from .tractions import (BalanceReport, EquilibriumReport, TractionField,
                        check_equilibrium, check_local_balance,
                        numerical_tractions, traction_form_value)

__version__ = "0.1.0"
