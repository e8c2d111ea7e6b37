"""
Acceptance suite. One test class per numbered criterion; the terminal
summary prints a PASS/FAIL line for each number with its wall time.
"""

import math
import time

import numpy as np
import pytest

from conftest import placed
from knotpack.bounds import (
    check_illumination, check_main_theorem, check_oscillation, check_packing,
    check_thickness_consequences,
)
from knotpack.curve import SampledCurve, build_arc_table
from knotpack.generators import (
    CurveSpec, gen_circle, gen_fourier_random, gen_helix_composite, gen_line_segment, gen_spiral,
    gen_tangent_wedge, gen_torus_knot, make_curve,
)
from knotpack.invariants import (
    NEAR_COEFFICIENT, acn, check_embedded, compute_invariants, illumination,
    projection_crossing_oracle, thickness_info, total_curvature,
)
from knotpack.shells import (
    construct_extremal_string, count_jumps, count_low_substrings, estimate_shell_exponent,
    shell_labels, shell_profile, string_energy,
)
from test_shells import exhaustive_jumps, random_walk_labels

TWO_PI = 2 * math.pi
TORUS_Q = tuple(range(3, 16, 2))
HELIX_N = (5, 9, 13)
# closed path with right-angle corners
BOX_PATH = [[0, 0, 0], [3, 0, 0], [3, 2, 0], [3, 2, 2], [0, 2, 2], [0, 0, 2]]


class Budget:
    """Wall-clock limit for a block of work."""

    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


def by_name(certs):
    return {c.name: c for c in certs}


def fourier_loops(count, samples=512, seed0=0):
    return [gen_fourier_random(3 + s % 5, seed0 + s, samples) for s in range(count)]


@pytest.fixture(scope="module")
def closed_knots():
    """Torus knots (2, q) and helix composites at 2048 samples."""
    out = {f"torus(2,{q})": gen_torus_knot(2, q, 3.0, 1.0, 2048) for q in TORUS_Q}
    out.update({f"helix{n}": gen_helix_composite(n, samples=2048) for n in HELIX_N})
    return out


@pytest.fixture(scope="module")
def fourier_knots():
    knots = [gen_fourier_random(5, 1000 + s, 2048) for s in range(50)]
    for k in knots:
        check_embedded(k)
    return knots


@pytest.fixture(scope="module")
def basepoint_curves():
    """Curves paired with a basepoint at distance at least 2."""
    rng = np.random.default_rng(7)
    out = {
        "spiral": (gen_spiral(200.0), np.zeros(3)),
        "ray": (gen_line_segment([2, 0, 0], [40, 0, 0], 200), np.zeros(3)),
        "trefoil": (placed(gen_torus_knot(2, 3, 3.0, 1.0, 1024), np.zeros(3)), np.zeros(3)),
        "helix5": (placed(gen_helix_composite(5, samples=1024), [0.7, 0.4, 0.3]), np.array([0.7, 0.4, 0.3])),
    }
    for s in range(20):
        x0 = rng.normal(size=3) * 0.5
        out[f"fourier{s}"] = (placed(gen_fourier_random(5, s, 256), x0), x0)
    return out


@pytest.mark.criterion(1, "illumination exact cases")
class TestC01IlluminationExact:
    def test_radial_and_tangent(self):
        with Budget(1.0):
            ray = gen_line_segment([2, 0, 0], [1e4, 0, 0], 4000, focus=[0, 0, 0])
            line = gen_line_segment([-1e4, 2, 0], [1e4, 2, 0], 4000, focus=[0, 0, 0])
            assert illumination(ray, np.zeros(3)).value == pytest.approx(0.5, abs=1e-3)
            assert illumination(line, np.zeros(3)).value == pytest.approx(math.pi / 2, abs=1e-3)


@pytest.mark.criterion(2, "spiral illumination ratio near 1/3")
class TestC02Spiral:
    def test_ratio(self):
        with Budget(5.0):
            c = gen_spiral(200.0)
            ratio = illumination(c, np.zeros(3)).value / total_curvature(c)
            assert ratio == pytest.approx(1 / 3, rel=0.05)


@pytest.mark.criterion(3, "closed curves turn at least 2 pi, trefoil more than 4 pi")
class TestC03TotalCurvature:
    def test_fenchel_and_knotted(self):
        with Budget(30.0):
            kappas = np.array([total_curvature(c) for c in fourier_loops(200)])
            assert kappas.min() >= TWO_PI - 1e-6
            assert total_curvature(gen_torus_knot(2, 3, 3.0, 1.0, 2048)) > 2 * TWO_PI


@pytest.mark.criterion(4, "packing inequality on every family")
class TestC04Packing:
    def test_suite(self):
        with Budget(30.0):
            curves = fourier_loops(200)
            specs = [
                CurveSpec("torus_knot", {"p": 2, "q": 5}, 1024),
                CurveSpec("helix_composite", {"n": 5}, 1024),
                CurveSpec("spiral", {"theta_max": 50.0}, 2048),
                CurveSpec("rounded_polygon", {"vertices": BOX_PATH, "corner_radius": 0.3, "closed": True}, 512),
                CurveSpec("fourier_random", {"modes": 4, "seed": 9}, 512),
                CurveSpec("circle", {"radius": 2.0}, 512),
                CurveSpec("line_segment", {"start": [0, 0, 0], "end": [1, 2, 3]}, 16),
            ]
            curves += [make_curve(s) for s in specs]
            failures = [i for i, c in enumerate(curves)
                        if not all(x.passed for x in check_packing(c) if x.name == "packing")]
            assert failures == []
            eq = by_name(check_packing(gen_circle(1.0, 2048)))["packing_closed"]
            assert abs(eq.lhs - eq.rhs) <= 1e-6 * eq.rhs


def out_and_back(rng):
    a = rng.uniform(1.0, 4.0)
    b = a + rng.uniform(0.3, 3.0)

    def point(r):
        u = rng.normal(size=3)
        return r * u / np.linalg.norm(u)

    inner = [point(rng.uniform(a, b)) for _ in range(int(rng.integers(0, 4)))]
    outer = [point(rng.uniform(a, b)) for _ in range(int(rng.integers(0, 4)))]
    v = np.array([point(a), *inner, point(b), *outer, point(a)])
    return SampledCurve(v), a, b


@pytest.mark.criterion(5, "oscillation inequality and its equality case")
class TestC05Oscillation:
    @pytest.mark.parametrize("a,b", [(2, 3), (2, 4), (3, 5)])
    def test_tangent_wedge(self, a, b):
        with Budget(10.0):
            sharp = by_name(check_oscillation(gen_tangent_wedge(a, b), a, b))["oscillation_arcsin"]
            assert sharp.passed and abs(sharp.margin) < 1e-6
            rounded = gen_tangent_wedge(a, b, corner_radius=1e-4)
            c = by_name(check_oscillation(rounded, a, b))["oscillation_arcsin"]
            assert c.passed and abs(c.margin) < 1e-4

    def test_random_out_and_back(self):
        rng = np.random.default_rng(55)
        with Budget(10.0):
            seen = set()
            for _ in range(100):
                arc, a, b = out_and_back(rng)
                certs = check_oscillation(arc, a, b)
                seen |= {c.name for c in certs}
                assert all(c.passed for c in certs), [c.to_dict() for c in certs if not c.passed]
            assert seen == {"oscillation_arcsin", "oscillation_sqrt", "oscillation_simple"}


@pytest.mark.criterion(6, "illumination bound with positive margin")
class TestC06IlluminationBound:
    def test_curves(self, basepoint_curves):
        with Budget(30.0):
            cases = list(basepoint_curves.values())
            cases.append((gen_line_segment([2, 0, 0], [1e4, 0, 0], 4000, focus=[0, 0, 0]), np.zeros(3)))
            cases.append((gen_line_segment([-1e4, 2, 0], [1e4, 2, 0], 4000, focus=[0, 0, 0]), np.zeros(3)))
            rng = np.random.default_rng(66)
            for s in range(200):
                x0 = rng.normal(size=3)
                cases.append((placed(gen_fourier_random(3 + s % 5, 500 + s, 256), x0), x0))
            for curve, x0 in cases:
                cert = check_illumination(curve, x0)[0]
                assert cert.passed and cert.margin > 0


@pytest.mark.criterion(7, "shell-label suite")
class TestC07Shells:
    def test_curves(self, basepoint_curves):
        with Budget(60.0):
            for name, (curve, x0) in basepoint_curves.items():
                L = build_arc_table(curve).length
                ls = shell_labels(curve, x0, int(L / 0.5) + 1)
                assert np.all(np.abs(np.diff(ls.labels)) <= 1), name
                assert shell_profile(ls).ok, name
                star = construct_extremal_string(ls)
                assert string_energy(ls) <= string_energy(star) < 16 + 43 * ls.kappa, name
                for n in range(2, int(ls.labels.max()) + 1):
                    jumps = count_jumps(ls, n)
                    # with kappa = 0 there is no turning, hence no jump
                    assert jumps == 0 or jumps < 0.5 * ls.kappa * math.sqrt(n + 1), (name, n)
                    assert count_low_substrings(ls, n) <= ls.kappa, (name, n)
                    assert count_low_substrings(ls, n, shift=1) <= ls.kappa, (name, n)

    def test_greedy_vs_exhaustive(self):
        rng = np.random.default_rng(77)
        with Budget(60.0):
            for _ in range(1000):
                a = random_walk_labels(rng, int(rng.integers(1, 21)))
                for n in range(2, 6):
                    assert count_jumps(a, n) == exhaustive_jumps(a, n), (a, n)


@pytest.mark.criterion(8, "main theorem on knot families")
class TestC08MainTheorem:
    def _check(self, curve):
        certs = check_main_theorem(curve, refine=True)
        main = by_name(certs)["main_theorem"]
        assert main.passed and main.margin > main.tolerance_used
        assert by_name(certs)["near_bound"].passed
        # near / L <= b1 once R = 1, i.e. near <= b1 E_L
        assert by_name(certs)["near_bound"].rhs == pytest.approx(
            NEAR_COEFFICIENT * compute_invariants(curve).ropelength, rel=1e-12)
        assert by_name(check_thickness_consequences(curve))["near_integrand"].passed

    def test_families(self, closed_knots, fourier_knots):
        with Budget(300.0):
            for curve in closed_knots.values():
                self._check(curve)
            for curve in fourier_knots:
                self._check(curve)


@pytest.mark.criterion(9, "Gauss integral against the projection oracle")
class TestC09Oracle:
    def test_trefoil_and_helices(self, trefoil, trefoil32):
        with Budget(120.0):
            res = projection_crossing_oracle(trefoil, directions=2000, seed=0)
            assert acn(trefoil).value == pytest.approx(res.mean, rel=0.02)
            assert projection_crossing_oracle(trefoil32, directions=2000, seed=0).min_observed == 3
            for n in (5, 9):
                h = gen_helix_composite(n, samples=2048)
                assert projection_crossing_oracle(h, directions=2000, seed=0).min_observed == n


def brute_force_thickness(V, band=4, block=512):
    """min(smallest circumradius, half the smallest doubly critical vertex
    distance) by dense numpy evaluation."""
    n = len(V)
    a, b, c = np.roll(V, 1, axis=0), V, np.roll(V, -1, axis=0)
    la = np.linalg.norm(b - a, axis=1)
    lb = np.linalg.norm(c - b, axis=1)
    lc = np.linalg.norm(a - c, axis=1)
    area2 = np.linalg.norm(np.cross(b - a, c - a), axis=1)
    min_rad = np.min(la * lb * lc / (2 * area2))
    idx = np.arange(n)
    best = np.inf
    for i0 in range(0, n, block):
        rows = np.arange(i0 - 1, min(i0 + block, n) + 1) % n
        D = np.linalg.norm(V[rows][:, None, :] - V[None, :, :], axis=2)
        core = D[1:-1]
        local = ((core <= D[:-2]) & (core <= D[2:])
                 & (core <= np.roll(core, 1, axis=1)) & (core <= np.roll(core, -1, axis=1)))
        gap = np.abs(rows[1:-1, None] - idx[None, :])
        gap = np.minimum(gap, n - gap)
        local &= gap > band
        if local.any():
            best = min(best, core[local].min())
    return min(min_rad, best / 2)


@pytest.mark.criterion(10, "thickness consequences and thickness oracle")
class TestC10Thickness:
    def test_pointwise(self, closed_knots, fourier_knots):
        with Budget(60.0):
            for curve in [*closed_knots.values(), *fourier_knots, gen_circle(1.0, 2048)]:
                c = by_name(check_thickness_consequences(curve))
                assert c["curvature_bound"].passed and c["gap_bound"].passed

    def test_trefoil_oracle(self, trefoil):
        with Budget(60.0):
            fine = gen_torus_knot(2, 3, 3.0, 1.0, 4 * len(trefoil))
            oracle = brute_force_thickness(fine.vertices)
            assert thickness_info(trefoil).radius == pytest.approx(oracle, rel=0.02)


@pytest.mark.criterion(11, "acn kernel speed and worker determinism")
class TestC11Performance:
    def test_4096(self):
        c = gen_torus_knot(2, 3, 3.0, 1.0, 4096)
        acn(gen_torus_knot(2, 3, 3.0, 1.0, 64))  # compile outside the timing
        with Budget(10.0):
            first = acn(c, workers=1).value
        for w in (2, 8):
            assert acn(c, workers=w).value == first


@pytest.mark.criterion(12, "diagnostics table (reported only)")
class TestC12Diagnostics:
    def test_table(self, closed_knots, diagnostics):
        diagnostics.append(f"{'curve':14s} {'acn':>9s} {'E_L':>9s} {'acn/E_L^(4/3)':>14s}")
        for name, curve in closed_knots.items():
            rep = compute_invariants(curve)
            diagnostics.append(f"{name:14s} {rep.acn:9.4f} {rep.ropelength:9.3f} "
                               f"{rep.acn / rep.ropelength ** (4 / 3):14.6f}")
        diagnostics.append("")
        diagnostics.append(f"{'curve':14s} {'beta_hat':>9s} {'clamped':>8s} {'regime':>8s}")
        shells = {**closed_knots, **{f"fourier{s}": gen_fourier_random(3, s, 1024) for s in range(3)}}
        for name, curve in shells.items():
            fit = estimate_shell_exponent(curve, basepoints=4, seed=0)
            diagnostics.append(f"{name:14s} {fit.beta_hat:9.3f} {fit.beta_clamped:8.3f} {fit.regime:>8s}")
