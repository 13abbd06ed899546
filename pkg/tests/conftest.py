"""Shared flagship objects; the expensive ones are built once per session."""

import pytest

from obstrukt import data
from obstrukt.etale import Curve, EtaleElement
from obstrukt.surface import QuadricModel, build_quadrics


@pytest.fixture(scope="session")
def curve():
    return Curve.from_factors(data.FLAGSHIP_FACTORS)


@pytest.fixture(scope="session")
def delta(curve):
    return EtaleElement.from_coeffs(data.FLAGSHIP_DELTA, curve)


@pytest.fixture(scope="session")
def printed_delta(curve):
    return EtaleElement.from_coeffs(data.FLAGSHIP_DELTA_PRINTED, curve)


@pytest.fixture(scope="session")
def model(curve, delta):
    return build_quadrics(curve, delta)


@pytest.fixture(scope="session")
def printed_model():
    return QuadricModel.from_vectors(data.FLAGSHIP_QUADRICS)


@pytest.fixture(scope="session")
def lattice():
    from obstrukt.lines import gram_and_rank

    return gram_and_rank()


@pytest.fixture(scope="session")
def algebra(curve, delta, model):
    from obstrukt.quaternion import build_algebra

    return build_algebra(curve, delta, model)


@pytest.fixture(scope="session")
def fiber83(model):
    from obstrukt.surface import enumerate_fiber

    return enumerate_fiber(model, 83)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
