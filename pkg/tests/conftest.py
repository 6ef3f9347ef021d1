import numpy as np
import pytest

from bosonic_eps import PlanePoint, Topology, params_from_plane

ALL_TOPOLOGIES = list(Topology)
NON_PYRAMID = [t for t in Topology if t is not Topology.FIVE_MODE_PYRAMID]


def random_plane_points(rng, count, gamma_plus=(0.0, 0.3), zeta_floor=1e-3):
    """Uniform points with |k| <= 1.5, |g-| <= 1.5, away from |zeta| < zeta_floor."""
    out = []
    while len(out) < count:
        k, g = rng.uniform(-1.5, 1.5, size=2)
        if abs(1 - k * k) ** 0.5 < zeta_floor:
            continue
        out.append(PlanePoint(float(k), float(g), float(rng.choice(gamma_plus))))
    return out


def random_params(rng, topology, count, **kw):
    eps = kw.pop("epsilon", 1.0)
    return [params_from_plane(topology, eps, p) for p in random_plane_points(rng, count, **kw)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def record_acceptance(number, ok, text):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
