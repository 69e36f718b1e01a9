"""Manufactured and singular test cases with exact solutions and forcings.

All closures are vectorised: they take points of shape (N, d) and return
(N, d) arrays.  Forcing terms are the exact analytic divergence of the stress
of the exact solution, so every smooth case satisfies the strong equation
pointwise (this is asserted by a finite-difference check in the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .mesh import MeshFamilySpec


@dataclass
class TestCase:
    name: str
    dim: int
    mu: float
    lam: float
    u: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray] | None  # None: homogeneous Dirichlet
    singular: bool = False
    families: tuple[str, ...] = ()
    default_family: str = ""

    def mesh_spec(self, family: str | None, n: int, path: str | None = None) -> MeshFamilySpec:
        family = family or self.default_family
        if self.families and family not in self.families and family != "file":
            raise ValueError(f"case '{self.name}' does not run on family '{family}' "
                             f"(expected one of {self.families} or 'file')")
        return MeshFamilySpec(family=family, n=n, dim=self.dim, path=path)


def case_2d_quasi_incompressible(lam: float = 1.0, mu: float = 1.0) -> TestCase:
    """Unit-square plane problem with an exact solution whose divergence is
    O(1/(1+lambda)); homogeneous Dirichlet data."""
    pi = np.pi
    c = 1.0 / (1.0 + lam)

    def u(x):
        x1, x2 = x[:, 0], x[:, 1]
        bump = c * np.sin(pi * x1) * np.sin(pi * x2)
        return np.column_stack([
            (np.cos(2 * pi * x1) - 1.0) * np.sin(2 * pi * x2) + bump,
            (1.0 - np.cos(2 * pi * x2)) * np.sin(2 * pi * x1) + bump,
        ])

    def f(x):
        x1, x2 = x[:, 0], x[:, 1]
        s1, s2 = np.sin(pi * x1), np.sin(pi * x2)
        cross = (lam + mu) * c * np.cos(pi * (x1 + x2))
        f1 = mu * (4.0 * np.sin(2 * pi * x2) * (2.0 * np.cos(2 * pi * x1) - 1.0)
                   + 2.0 * c * s1 * s2) - cross
        f2 = mu * (4.0 * np.sin(2 * pi * x1) * (1.0 - 2.0 * np.cos(2 * pi * x2))
                   + 2.0 * c * s1 * s2) - cross
        return pi ** 2 * np.column_stack([f1, f2])

    return TestCase("brenner2d", 2, mu, lam, u, f, g=None,
                    families=("structured-triangular", "cartesian", "distorted-quadrangular"),
                    default_family="structured-triangular")


# mode-1 corner singularity exponents and elastic constants
_SING_L = 0.5444837367825
_SING_Q = 0.5430755788367
_SING_G = 5.0 / 13.0
_SING_KAPPA = 9.0 / 5.0


def case_2d_singular() -> TestCase:
    """Slit-like domain with a 270-degree re-entrant corner at the origin;
    zero forcing, Dirichlet data taken from the exact singular field.

    The angle is measured from the positive x-axis, so theta spans
    (-3*pi/4, 3*pi/4) on the domain and the field is single-valued (the first
    component is even in theta, the second odd).
    """
    L, Q, G, kappa = _SING_L, _SING_Q, _SING_G, _SING_KAPPA

    def u(x):
        r = np.hypot(x[:, 0], x[:, 1])
        th = np.arctan2(x[:, 1], x[:, 0])
        rl = r ** L
        u1 = rl / (2 * G) * ((kappa - Q * (L + 1)) * np.cos(L * th)
                             - L * np.cos((L - 2) * th))
        u2 = rl / (2 * G) * ((kappa + Q * (L + 1)) * np.sin(L * th)
                             + L * np.sin((L - 2) * th))
        return np.column_stack([u1, u2])

    def f(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return TestCase("singular2d", 2, mu=0.65, lam=0.975, u=u, f=f, g=u,
                    singular=True, families=("lshape",), default_family="lshape")


def case_3d(mu: float = 1.0, lam: float = 1.0) -> TestCase:
    """Unit-cube problem with u_i = sin(pi x1) sin(pi x2) sin(pi x3)."""
    pi = np.pi

    def u(x):
        w = np.sin(pi * x[:, 0]) * np.sin(pi * x[:, 1]) * np.sin(pi * x[:, 2])
        return np.column_stack([w, w, w])

    def f(x):
        s1, s2, s3 = (np.sin(pi * x[:, k]) for k in range(3))
        sss = s1 * s2 * s3
        f1 = mu * (2 * sss - s2 * np.cos(pi * (x[:, 2] + x[:, 0]))
                   - s3 * np.cos(pi * (x[:, 0] + x[:, 1])))
        f2 = mu * (2 * sss - s3 * np.cos(pi * (x[:, 0] + x[:, 1]))
                   - s1 * np.cos(pi * (x[:, 1] + x[:, 2])))
        f3 = mu * (2 * sss - s1 * np.cos(pi * (x[:, 1] + x[:, 2]))
                   - s2 * np.cos(pi * (x[:, 2] + x[:, 0])))
        g1 = sss - np.cos(pi * x[:, 0]) * np.sin(pi * (x[:, 1] + x[:, 2]))
        g2 = sss - np.cos(pi * x[:, 1]) * np.sin(pi * (x[:, 2] + x[:, 0]))
        g3 = sss - np.cos(pi * x[:, 2]) * np.sin(pi * (x[:, 0] + x[:, 1]))
        return pi ** 2 * (np.column_stack([f1, f2, f3])
                          + lam * np.column_stack([g1, g2, g3]))

    return TestCase("cube3d", 3, mu, lam, u, f, g=None,
                    families=("cartesian", "cube-to-tet"),
                    default_family="cartesian")


_REGISTRY = {
    "brenner2d": case_2d_quasi_incompressible,
    "singular2d": case_2d_singular,
    "cube3d": case_3d,
}


def case_names() -> tuple[str, ...]:
    return tuple(_REGISTRY)


def get_case(name: str, mu: float | None = None, lam: float | None = None) -> TestCase:
    """Look up a case by id; mu/lambda overrides apply to the parametric cases."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown case '{name}'; available: {', '.join(_REGISTRY)}")
    if name == "singular2d":
        case = _REGISTRY[name]()
        if mu is not None or lam is not None:
            raise ValueError("singular2d has fixed material parameters")
        return case
    kwargs = {}
    if mu is not None:
        kwargs["mu"] = mu
    if lam is not None:
        kwargs["lam"] = lam
    return _REGISTRY[name](**kwargs)
