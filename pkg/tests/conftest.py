import numpy as np
import pytest

from gleason.collar import collar_cover, interior_cover
from gleason.domains import make_domain


@pytest.fixture(scope="session")
def ball():
    return make_domain("ball", {"n": 2})


@pytest.fixture(scope="session")
def ball_cover(ball):
    return collar_cover(ball)


@pytest.fixture(scope="session")
def ellipsoid():
    return make_domain("ellipsoid", {"weights": [1.0, 4.0]})


@pytest.fixture(scope="session")
def ellipsoid_cover(ellipsoid):
    return collar_cover(ellipsoid, patch_budget=48, radius_factor=1.05)


@pytest.fixture(scope="session")
def grange():
    return make_domain("grange", {}, epsilon=0.1)


@pytest.fixture(scope="session")
def grange_cover(grange):
    return collar_cover(grange, require_lemma1=False)


@pytest.fixture(scope="session")
def annulus():
    return make_domain("annulus_product", {"inner": 0.5, "outer": 1.0})


@pytest.fixture(scope="session")
def shifted_annulus():
    return make_domain("annulus_product", {"inner": 0.5, "outer": 1.0, "center": 0.75})


@pytest.fixture(scope="session")
def shifted_annulus_cover(shifted_annulus):
    return interior_cover(shifted_annulus, 0.02)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""

    def record(number: str, title: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append((number, f"{'PASS' if ok else 'FAIL'}  [{number}] {title}: {detail}"))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda item: (int(item[0].rstrip("ab")), item[0])):
            terminalreporter.write_line(line)
