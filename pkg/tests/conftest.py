import numpy as np
import pytest

from polyrigid import instances, mesh


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def octa_tri():
    return instances.octahedron_triangulation(1.2)


@pytest.fixture(scope="session")
def bump_tri():
    m, cells = instances.bump_octahedron()
    return mesh.triangulate_cellulation(mesh.validate_cellulation(m, cells))


@pytest.fixture(scope="session")
def reflex_tri():
    m, cells = instances.reflex_bipyramid()
    return mesh.triangulate_cellulation(mesh.validate_cellulation(m, cells))


@pytest.fixture(scope="session")
def bipyramid_tri():
    m, cells = instances.hyperideal_bipyramid()
    return mesh.triangulate_cellulation(mesh.validate_cellulation(m, cells))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
