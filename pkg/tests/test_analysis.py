import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from helpers import bilinear_form_value
from polyelast import (DiscreteDisplacement, MaterialParams, MeshFamilySpec,
                       assemble, build_mesh, consistency_residual, energy_error,
                       eoc, get_case, interpolate, l2_error, seminorms, solve)
from polyelast.fespace import cell_means


def test_eoc_reference_values():
    # printed orders come from unrounded errors, so allow 0.01
    assert abs(eoc([3.82, 1.96], [1.0, 0.5])[0] - 0.97) <= 0.01
    assert abs(eoc([2.08e-1, 6.97e-2], [1.0, 0.5])[0] - 1.58) <= 0.005
    assert_allclose(eoc([4.0, 1.0], [1.0, 0.5])[0], 2.0, rtol=1e-12)


def test_eoc_edge_cases():
    assert eoc([1.0, 0.0], [1.0, 0.5]) == [None]
    with pytest.raises(ValueError):
        eoc([1.0], [1.0])
    with pytest.raises(ValueError):
        eoc([1.0, 0.5], [0.5, 1.0])


def test_energy_error_zero_at_interpolant(tri4):
    case = get_case("brenner2d")
    system = assemble(tri4, MaterialParams(1.0, 1.0), case)
    ih = interpolate(case.u, tri4, system.dofmap)
    u_h = DiscreteDisplacement(system.dofmap, ih.coeffs.copy())
    assert energy_error(u_h, case.u, system) < 1e-12


def test_l2_error_zero_at_cell_means(tri4):
    case = get_case("brenner2d")
    dm = assemble(tri4, MaterialParams(1.0, 1.0), case).dofmap
    coeffs = np.zeros(dm.n_dofs)
    coeffs[:tri4.n_cells * 2] = cell_means(tri4, case.u).ravel()
    u_h = DiscreteDisplacement(dm, coeffs)
    assert l2_error(u_h, case.u, tri4) < 1e-14


def test_energy_error_matches_term_by_term(tri4, rng):
    # matrix-based energy equals the definitional evaluation of a(e, e)
    case = get_case("brenner2d")
    mat = MaterialParams(1.0, 1.0)
    for consistency in ("navier", "symmetric"):
        system = assemble(tri4, mat, case, consistency=consistency)
        u_h, _ = solve(system)
        ih = interpolate(case.u, tri4, system.dofmap)
        e = DiscreteDisplacement(system.dofmap, u_h.coeffs - ih.coeffs)
        direct = bilinear_form_value(e, e, mat, consistency)
        via = energy_error(u_h, case.u, system) ** 2
        assert abs(via - direct) <= 1e-10 * max(abs(direct), 1.0)


def test_seminorm_decomposition(tri4, rng):
    dm = assemble(tri4, MaterialParams(1.0, 1.0), get_case("brenner2d")).dofmap
    u = DiscreteDisplacement(dm, rng.standard_normal(dm.n_dofs))
    sb = seminorms(u)
    assert sb.strain >= 0 and sb.jump >= 0 and sb.stabilisation >= 0
    total = math.sqrt(sb.strain ** 2 + sb.jump ** 2 + sb.stabilisation ** 2)
    assert_allclose(sb.triple, total, rtol=1e-12)


def test_seminorms_of_rigid_body(cart4):
    R = np.array([[0.0, 1.0], [-1.0, 0.0]])
    u = interpolate(lambda x: x @ R.T + 0.5, cart4)
    sb = seminorms(u)
    assert sb.strain < 1e-12
    assert sb.stabilisation < 1e-12


def test_jump_seminorm_decays_at_first_order():
    case = get_case("brenner2d")
    vals, hs = [], []
    for n in (4, 8, 16, 32):
        mesh = build_mesh(MeshFamilySpec("structured-triangular", n=n))
        sb = seminorms(interpolate(case.u, mesh))
        vals.append(sb.jump)
        hs.append(mesh.h)
    rates = eoc(vals, hs)
    assert abs(rates[-1] - 1.0) < 0.2


def test_consistency_residual_affine_exact():
    mesh = build_mesh(MeshFamilySpec("cartesian", n=3, dim=2))
    A = np.array([[1.0, 0.3], [-0.2, 2.0]])
    w = lambda x: x @ A.T + 1.0

    class Case:
        u = staticmethod(w)
        f = staticmethod(lambda x: np.zeros_like(np.asarray(x, dtype=float)))
        g = staticmethod(w)

    system = assemble(mesh, MaterialParams(1.0, 1.0), Case())
    assert consistency_residual(w, system) < 1e-9


@pytest.mark.parametrize("family", ["structured-triangular", "cartesian"])
def test_consistency_residual_decays_at_first_order(family):
    case = get_case("brenner2d", lam=1.0)
    mat = MaterialParams(1.0, 1.0)
    vals, hs = [], []
    for n in (4, 8, 16, 32):
        mesh = build_mesh(MeshFamilySpec(family, n=n))
        system = assemble(mesh, mat, case)
        vals.append(consistency_residual(case.u, system))
        hs.append(mesh.h)
    rates = eoc(vals, hs)
    assert abs(rates[-1] - 1.0) < 0.15


def test_distorted_family_rates():
    # the distorted quadrangular family keeps first/second order convergence
    case = get_case("brenner2d", lam=1.0)
    mat = MaterialParams(1.0, 1.0)
    ees, les, hs = [], [], []
    for n in (4, 8, 16, 32):
        mesh = build_mesh(MeshFamilySpec("distorted-quadrangular", n=n))
        system = assemble(mesh, mat, case)
        u_h, _ = solve(system)
        ees.append(energy_error(u_h, case.u, system))
        les.append(l2_error(u_h, case.u, mesh))
        hs.append(mesh.h)
    assert abs(eoc(ees, hs)[-1] - 1.0) < 0.2
    assert abs(eoc(les, hs)[-1] - 2.0) < 0.25


def test_lambda_robust_energy_on_cartesian():
    # errors at lambda = 1e3 and 1e6 agree to three significant figures
    rows = {}
    for lam in (1e3, 1e6):
        case = get_case("brenner2d", lam=lam)
        mesh = build_mesh(MeshFamilySpec("cartesian", n=8))
        system = assemble(mesh, MaterialParams(1.0, lam), case)
        u_h, _ = solve(system)
        rows[lam] = (energy_error(u_h, case.u, system), l2_error(u_h, case.u, mesh))
    for a, b in zip(rows[1e3], rows[1e6]):
        assert abs(a - b) <= 5e-4 * abs(a)
