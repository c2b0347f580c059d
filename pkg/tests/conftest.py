import json

import numpy as np
import pytest
from shapely.geometry import box

from ridcoverage.geo import BuildingFootprint, CityData, RegionOfInterest, load_city
from ridcoverage.synthetic import write_synthetic_city


@pytest.fixture(scope="session")
def city_files(tmp_path_factory):
    return write_synthetic_city(tmp_path_factory.mktemp("city"))


@pytest.fixture(scope="session")
def city(city_files):
    return load_city(
        city_files["buildings"],
        city_files["vendors"],
        city_files["residential"],
        city_files["roi"],
        n_customers=500,
        rng=5,
    )


def make_one_building_world(customers=None) -> CityData:
    """1 km square, one 100 m building in the middle, vendors/customers on the left/right edges."""
    roi = RegionOfInterest.from_boundary(box(-500, -500, 500, 500))
    building = BuildingFootprint(box(-50, -50, 50, 50), 60.0)
    vendors = np.array([[-400.0, 0.0], [-400.0, 200.0]])
    if customers is None:
        customers = np.array([[400.0, 0.0], [400.0, -200.0], [400.0, 300.0]])
    residential = [box(350, -450, 450, 450)]
    return CityData((0.0, 0.0), roi, [building], vendors, np.asarray(customers, float), residential, 10.0)


@pytest.fixture
def one_building_world():
    return make_one_building_world()


@pytest.fixture
def write_json(tmp_path):
    def _write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return p

    return _write


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
