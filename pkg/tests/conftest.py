import math

import pytest

from hardycut import geometry as geo
from hardycut import slitmesh as sm


@pytest.fixture(scope="session")
def circle_geom():
    return geo.build_circle_cut(64, [(0.0, math.pi)])


@pytest.fixture(scope="session")
def circle_geom_fine():
    return geo.build_circle_cut(4096, [(0.0, math.pi)])


@pytest.fixture(scope="session")
def rect_geom():
    return geo.build_rectangle_slit(2.0, 1.0, (-0.5, 0.5))


@pytest.fixture(scope="session")
def rect_geom_full():
    return geo.build_rectangle_slit(2.0, 1.0, (-1.0, 1.0))


@pytest.fixture(scope="session")
def circle_forms(circle_geom):
    mesh = sm.generate_mesh(circle_geom, box_scale=2.0, resolution=32)
    return sm.assemble(mesh)


@pytest.fixture(scope="session")
def tiny_forms():
    # below 300 unknowns so dense oracles stay cheap
    g = geo.build_circle_cut(16, [(0.0, math.pi)])
    mesh = sm.generate_mesh(g, box_scale=2.0, resolution=16)
    forms = sm.assemble(mesh)
    assert forms.n_dofs <= 300
    return forms


@pytest.fixture(scope="session")
def rect_forms(rect_geom):
    mesh = sm.generate_mesh(rect_geom, box_scale=2.0, resolution=24)
    return sm.assemble(mesh)
