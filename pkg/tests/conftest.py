"""Shared fixtures: session-scoped models and small bases.

Basis construction is the expensive step, so anything reused across
test modules is built once here at the smallest size that still
exercises the code path under test.
"""

import pytest
from hypothesis import settings

import secgeom.ensembles as ens
import secgeom.hilbert as hil
import secgeom.models as geo

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def disk():
    return geo.punctured_disk()


@pytest.fixture(scope="session")
def sphere():
    return geo.fubini_study_sphere(1)


@pytest.fixture(scope="session")
def sphere2():
    return geo.fubini_study_sphere(2)


@pytest.fixture(scope="session")
def cusped():
    return geo.cusped_sphere(1)


@pytest.fixture(scope="session")
def disk_basis_p4(disk):
    return hil.build_basis(disk, 4, truncation=30, working_radius=0.7)


@pytest.fixture(scope="session")
def sphere_basis_p6(sphere):
    return hil.build_basis(sphere, 6)


@pytest.fixture(scope="session")
def sphere_basis_p8(sphere):
    return hil.build_basis(sphere, 8)


@pytest.fixture(scope="session")
def cusped_basis_p6(cusped):
    return hil.build_basis(cusped, 6)


@pytest.fixture(scope="session")
def gaussian():
    return ens.complex_gaussian()


@pytest.fixture(scope="session")
def unit_disk_ensemble():
    return ens.uniform_disk(radius_rule=("constant", 1.0))


@pytest.fixture(scope="session")
def seed():
    return ens.SeedSpec(master=12345)
