import numpy as np
import pytest
from numpy.testing import assert_allclose

from polyelast import get_case, case_names
from polyelast.cases import _SING_G, _SING_KAPPA, _SING_L, _SING_Q


def fd_div_sigma(u, mu, lam, x, h=1e-5):
    """-div sigma(sym grad u) by second-order central differences."""
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    eye = np.eye(d)
    out = np.zeros((n, d))

    def sigma_at(p):
        G = np.zeros((len(p), d, d))
        for j in range(d):
            G[:, :, j] = (u(p + h * eye[j]) - u(p - h * eye[j])) / (2 * h)
        S = 0.5 * (G + np.swapaxes(G, 1, 2))
        tr = np.trace(S, axis1=1, axis2=2)
        return 2 * mu * S + lam * tr[:, None, None] * np.eye(d)

    for j in range(d):
        sp = sigma_at(x + h * eye[j])
        sm = sigma_at(x - h * eye[j])
        out += (sp[:, :, j] - sm[:, :, j]) / (2 * h)
    return -out


def test_registry():
    assert set(case_names()) == {"brenner2d", "singular2d", "cube3d"}
    with pytest.raises(KeyError):
        get_case("nope")
    with pytest.raises(ValueError):
        get_case("singular2d", mu=2.0)


def test_quasi_incompressible_point_value():
    case = get_case("brenner2d", lam=1.0)
    u = case.u(np.array([[0.25, 0.25]]))[0]
    assert_allclose(u, [-0.75, 1.25], atol=1e-14)


def test_quasi_incompressible_boundary_zero():
    case = get_case("brenner2d", lam=37.0)
    t = np.linspace(0.0, 1.0, 13)
    for pts in (np.column_stack([t, np.zeros_like(t)]),
                np.column_stack([np.ones_like(t), t]),
                np.column_stack([t, np.ones_like(t)]),
                np.column_stack([np.zeros_like(t), t])):
        assert np.abs(case.u(pts)).max() < 1e-14


@pytest.mark.parametrize("name,kw", [
    ("brenner2d", dict(lam=1.0)),
    ("brenner2d", dict(lam=1e3)),
    ("cube3d", dict(mu=1.0, lam=1.0)),
    ("cube3d", dict(mu=2.0, lam=0.5)),
])
def test_forcing_matches_divergence_of_stress(name, kw, rng):
    case = get_case(name, **kw)
    x = rng.uniform(0.1, 0.9, size=(100, case.dim))
    fd = fd_div_sigma(case.u, case.mu, case.lam, x)
    fv = case.f(x)
    assert np.abs(fd - fv).max() <= 1e-4 * np.abs(fv).max()


def test_near_incompressibility_of_exact_field(rng):
    # |div u| at lambda = 1e6 is tiny compared to the lambda = 0 divergence
    x = rng.uniform(0.05, 0.95, size=(100, 2))
    h = 1e-6

    def div(case, p):
        d1 = (case.u(p + [h, 0]) - case.u(p - [h, 0]))[:, 0] / (2 * h)
        d2 = (case.u(p + [0, h]) - case.u(p - [0, h]))[:, 1] / (2 * h)
        return d1 + d2

    div_big = div(get_case("brenner2d", lam=1e6), x)
    div_zero = div(get_case("brenner2d", lam=0.0), x)
    assert np.all(np.abs(div_big) <= 1e-3 * np.abs(div_zero) + 1e-6)


def test_cube_case_values():
    case = get_case("cube3d")
    assert_allclose(case.u(np.array([[0.5, 0.5, 0.5]]))[0], [1.0, 1.0, 1.0], atol=1e-14)
    pts = np.array([[0.0, 0.3, 0.7], [0.2, 1.0, 0.5], [0.9, 0.1, 0.0]])
    assert np.abs(case.u(pts)).max() < 1e-14


def test_singular_case_values():
    case = get_case("singular2d")
    assert case.singular
    assert_allclose(case.u(np.array([[0.0, 0.0]]))[0], [0.0, 0.0], atol=1e-14)
    assert np.abs(case.f(np.random.default_rng(0).uniform(-0.5, 0.5, (20, 2)))).max() == 0.0
    L, Q, G, kappa = _SING_L, _SING_Q, _SING_G, _SING_KAPPA
    expected1 = (kappa - Q * (L + 1) - L) / (2 * G)
    u = case.u(np.array([[1.0, 0.0]]))[0]
    assert_allclose(u, [expected1, 0.0], atol=1e-14)


def test_singular_symmetry():
    # first component even under reflection across the x-axis, second odd
    case = get_case("singular2d")
    pts = np.array([[0.3, 0.2], [0.1, -0.7], [-0.1, 0.05]])
    refl = pts * np.array([1.0, -1.0])
    up, ur = case.u(pts), case.u(refl)
    assert_allclose(ur[:, 0], up[:, 0], atol=1e-13)
    assert_allclose(ur[:, 1], -up[:, 1], atol=1e-13)


def test_mesh_spec_family_check():
    case = get_case("brenner2d")
    with pytest.raises(ValueError):
        case.mesh_spec("lshape", 4)
    spec = case.mesh_spec(None, 8)
    assert spec.family == "structured-triangular"
