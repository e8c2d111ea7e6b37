import numpy as np
import pytest

from knotpack.generators import gen_circle, gen_helix_composite, gen_spiral, gen_torus_knot


@pytest.fixture(scope="session")
def trefoil():
    return gen_torus_knot(2, 3, 3.0, 1.0, 2048)


@pytest.fixture(scope="session")
def trefoil32():
    # same knot type, embedded with 3 tube turns and 2 axis turns
    return gen_torus_knot(3, 2, 3.0, 1.0, 2048)


@pytest.fixture(scope="session")
def circle():
    return gen_circle(1.0, 512)


@pytest.fixture(scope="session")
def spiral200():
    return gen_spiral(200.0)


@pytest.fixture(scope="session")
def helix5():
    return gen_helix_composite(5)


def segment_distance(curve, x0):
    """Smallest distance from ``x0`` to the polygon, segments included."""
    V = curve.vertices
    W = np.roll(V, -1, axis=0) if curve.closed else V[1:]
    P = V[: len(W)]
    e = W - P
    t = np.clip(np.einsum("ij,ij->i", x0 - P, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
    return float(np.linalg.norm(P + t[:, None] * e - x0, axis=1).min())


def placed(curve, x0, distance=2.0):
    """Scale ``curve`` about ``x0`` so that it comes exactly ``distance`` close."""
    x0 = np.asarray(x0, dtype=np.float64)
    k = distance / segment_distance(curve, x0)
    return curve.transformed(scale=k, shift=(1 - k) * x0)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# -- acceptance reporting ------------------------------------------------------

_CRITERIA = {}
_DIAGNOSTICS = []


@pytest.fixture(scope="session")
def diagnostics():
    """Lines printed after the run, for reported but unasserted numbers."""
    return _DIAGNOSTICS


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    number, title = mark.args
    ok = call.excinfo is None
    prev = _CRITERIA.get(number)
    if prev is not None:
        ok = ok and prev[1]
        duration = prev[2] + call.duration
    else:
        duration = call.duration
    _CRITERIA[number] = (title, ok, duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, duration = _CRITERIA[number]
        tr.write_line(f"criterion {number:2d}  {'PASS' if ok else 'FAIL'}  {duration:7.2f}s  {title}")
    if _DIAGNOSTICS:
        tr.section("diagnostics")
        for line in _DIAGNOSTICS:
            tr.write_line(line)
