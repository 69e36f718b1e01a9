import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polyelast import MeshFamilySpec, build_mesh


@pytest.fixture(scope="session")
def tri4():
    return build_mesh(MeshFamilySpec("structured-triangular", n=4))


@pytest.fixture(scope="session")
def cart4():
    return build_mesh(MeshFamilySpec("cartesian", n=4, dim=2))


@pytest.fixture(scope="session")
def cube2():
    return build_mesh(MeshFamilySpec("cartesian", n=2, dim=3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
