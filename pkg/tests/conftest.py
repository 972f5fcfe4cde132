import math

import pytest

from speclab.assembly import ProblemSpec
from speclab.mesh import annulus, cap, disk, ellipse, gen_domain, square
from speclab.verify import Study


@pytest.fixture(scope="session")
def disk_coarse():
    return gen_domain(disk(1.0), 0.25)


@pytest.fixture(scope="session")
def disk_mesh():
    return gen_domain(disk(1.0), 0.1)


@pytest.fixture(scope="session")
def annulus_coarse():
    return gen_domain(annulus(0.5, 1.0), 0.2)


@pytest.fixture(scope="session")
def square_coarse():
    return gen_domain(square(1.0), 0.2)


@pytest.fixture(scope="session")
def ellipse_coarse():
    return gen_domain(ellipse(1.0, 0.6), 0.2)


@pytest.fixture(scope="session")
def cap_coarse():
    return gen_domain(cap(math.pi / 2), 0.25)


def generated_pencils():
    """Every pencil family of the suite on coarse meshes (all at most 1500 DOFs)."""
    meshes = {
        "disk": gen_domain(disk(1.0), 0.25),
        "annulus": gen_domain(annulus(0.5, 1.0), 0.25),
        "square": gen_domain(square(1.0), 0.25),
        "ellipse": gen_domain(ellipse(1.0, 0.6), 0.25),
        "cap": gen_domain(cap(math.pi / 3), 0.25),
    }
    out = []
    for name, m in meshes.items():
        for prob in ("dirichlet", "neumann", "robin", "dtn", "bs", "dtn_dual"):
            for p in (0, 1, 2):
                if prob in ("dtn", "dtn_dual") and p == 2:
                    continue
                out.append((f"{name}-{prob}-{p}", m, ProblemSpec(prob, p, 1.0 if prob == "robin" else None)))
        out.append((f"{name}-harmonic-0", m, "harmonic"))
    return out


# refinement studies at the acceptance mesh size, shared across test files
_STUDIES = {}


def study_for(tag, h=0.1):
    key = (str(tag), h)
    if key not in _STUDIES:
        _STUDIES[key] = Study(tag, h, levels=3)
    return _STUDIES[key]


@pytest.fixture(scope="session")
def disk_study():
    return study_for(disk(1.0))


@pytest.fixture(scope="session")
def hemisphere_study():
    return study_for(cap(math.pi / 2))


@pytest.fixture(scope="session")
def cap60_study():
    return study_for(cap(math.pi / 3))


@pytest.fixture(scope="session")
def annulus_study():
    return study_for(annulus(0.5, 1.0))


@pytest.fixture(scope="session")
def ellipse_study():
    return study_for(ellipse(1.0, 0.6))


@pytest.fixture(scope="session")
def square_study():
    return study_for(square(1.0))
