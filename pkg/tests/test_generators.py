import math

import numpy as np
import pytest
from scipy.integrate import quad

from knotpack.curve import build_arc_table, min_enclosing_ball
from knotpack.exceptions import CurveError
from knotpack.generators import (
    FAMILIES, CurveSpec, gen_circle, gen_fourier_random, gen_helix_composite, gen_line_segment,
    gen_rounded_polygon, gen_spiral, gen_tangent_wedge, gen_torus_knot, make_curve, piece_vertices,
)
from knotpack.invariants import illumination, projection_crossing_oracle, total_curvature


def _param_kappa(d1, d2, t0, t1):
    """Total curvature of a parametrised curve by adaptive quadrature of
    |x' x x''| / |x'|^2."""
    def f(t):
        a, b = d1(t), d2(t)
        return np.linalg.norm(np.cross(a, b)) / (a @ a)
    return quad(f, t0, t1, limit=500)[0]


def _torus_derivs(p, q, R, r):
    def d1(t):
        rho, drho = R + r * math.cos(p * t), -r * p * math.sin(p * t)
        c, s = math.cos(q * t), math.sin(q * t)
        return np.array([drho * c - rho * q * s, drho * s + rho * q * c, r * p * math.cos(p * t)])

    def d2(t):
        rho, drho = R + r * math.cos(p * t), -r * p * math.sin(p * t)
        ddrho = -r * p * p * math.cos(p * t)
        c, s = math.cos(q * t), math.sin(q * t)
        return np.array([ddrho * c - 2 * drho * q * s - rho * q * q * c,
                         ddrho * s + 2 * drho * q * c - rho * q * q * s,
                         -r * p * p * math.sin(p * t)])
    return d1, d2


class TestTorus:
    def test_unknot_close_to_smooth(self):
        c = gen_torus_knot(1, 1, 3.0, 1.0, 1024)
        exact = _param_kappa(*_torus_derivs(1, 1, 3.0, 1.0), 0, 2 * math.pi)
        assert total_curvature(c) == pytest.approx(exact, rel=0.02)
        assert total_curvature(c) >= 2 * math.pi

    def test_trefoil_exceeds_4pi(self, trefoil):
        assert total_curvature(trefoil) > 4 * math.pi

    def test_trefoil_matches_smooth(self, trefoil):
        exact = _param_kappa(*_torus_derivs(2, 3, 3.0, 1.0), 0, 2 * math.pi)
        k = total_curvature(trefoil)
        assert k <= exact
        assert k == pytest.approx(exact, rel=1e-3)

    @pytest.mark.parametrize("q", [3, 5])
    def test_long_thin_limit(self, q):
        ratios = [total_curvature(gen_torus_knot(1, q, 3.0, r, 2048)) / (2 * math.pi * q)
                  for r in (1.0, 0.3, 0.05)]
        assert abs(ratios[-1] - 1) < 0.05
        assert abs(ratios[-1] - 1) <= abs(ratios[0] - 1)

    @pytest.mark.parametrize("args", [(2, 4), (0, 3), (3, 3)])
    def test_bad_pq(self, args):
        with pytest.raises(CurveError):
            gen_torus_knot(*args)

    def test_bad_radii(self):
        with pytest.raises(CurveError):
            gen_torus_knot(2, 3, 1.0, 1.0)


class TestHelixComposite:
    def test_n3_crossing_number(self):
        c = gen_helix_composite(3)
        res = projection_crossing_oracle(c, directions=500, seed=5)
        values, counts = np.unique(res.counts, return_counts=True)
        assert res.min_observed == 3
        assert values[np.argmax(counts)] == 3

    def test_helix_curvature_decreases(self):
        k5 = total_curvature(piece_vertices(gen_helix_composite(5), "H"))
        k11 = total_curvature(piece_vertices(gen_helix_composite(11), "H"))
        assert k11 < k5

    def test_helix_curvature_matches_formula(self):
        # kappa(H) = n pi / sqrt(1 + n^4) for the unit-radius helix
        for n in (3, 5, 9):
            k = total_curvature(piece_vertices(gen_helix_composite(n), "H"))
            exact = n * math.pi / math.sqrt(1 + n ** 4)
            assert k <= exact + 1e-9
            assert k == pytest.approx(exact, rel=0.01)

    def test_axis_straight(self, helix5):
        assert total_curvature(piece_vertices(helix5, "A")) == pytest.approx(0.0, abs=1e-12)

    def test_connectors_near_2pi(self, helix5):
        for name, k in helix5.meta["connector_curvature"].items():
            assert 2 * math.pi - 0.1 < k < 2 * math.pi + 0.5, name

    def test_exponent_exposed(self):
        k = total_curvature(piece_vertices(gen_helix_composite(5, exponent=1.5), "H"))
        exact = 5 * math.pi / math.sqrt(1 + 5 ** 3)
        assert k == pytest.approx(exact, rel=0.01)

    @pytest.mark.parametrize("n", [4, 1])
    def test_bad_n(self, n):
        with pytest.raises(CurveError):
            gen_helix_composite(n)


class TestSpiral:
    def test_radius_range(self, spiral200):
        r = np.linalg.norm(spiral200.vertices, axis=1)
        assert r.min() >= 2 - 1e-12 and r.max() < 3
        assert np.all(spiral200.vertices[:, 2] == 0)

    def test_curvature_vs_polar_quadrature(self):
        def f(th):
            r, r1, r2 = 3 - 1 / th, th ** -2, -2 * th ** -3
            return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1)
        exact = quad(f, 1, 50, limit=500)[0]
        assert total_curvature(gen_spiral(50.0)) == pytest.approx(exact, rel=0.02)

    def test_bad_theta(self):
        with pytest.raises(CurveError):
            gen_spiral(1.0)


class TestRoundedPolygon:
    def test_l_shape(self):
        c = gen_rounded_polygon([[0, 0, 0], [4, 0, 0], [4, 4, 0]], 0.5)
        assert total_curvature(c) == pytest.approx(math.pi / 2, abs=1e-6)

    def test_staircase(self):
        pts = [[0, 0, 0], [3, 0, 0], [3, 3, 0], [6, 3, 0], [6, 6, 0], [9, 6, 0]]
        c = gen_rounded_polygon(pts, 0.4)
        e = len(pts) - 1
        assert total_curvature(c) == pytest.approx((e - 1) * math.pi / 2, abs=1e-6)
        assert np.all(c.vertices[:, 2] == 0)

    def test_straight_parts_on_edges(self):
        c = gen_rounded_polygon([[0, 0, 0], [4, 0, 0], [4, 4, 0]], 0.5)
        v = c.vertices
        first = v[v[:, 0] <= 3.5]
        assert np.all(np.abs(first[:, 1]) < 1e-12)

    def test_illumination_per_edge(self):
        pts = [[3, -5, 0], [3, 5, 0], [8, 5, 0], [8, 12, 0]]
        c = gen_rounded_polygon(pts, 0.3, samples=4096)
        assert illumination(c, np.zeros(3)).value < 3 * math.pi / 2

    def test_not_orthogonal(self):
        with pytest.raises(CurveError):
            gen_rounded_polygon([[0, 0, 0], [4, 0, 0], [8, 1, 0]], 0.5)

    def test_radius_too_big(self):
        with pytest.raises(CurveError):
            gen_rounded_polygon([[0, 0, 0], [1, 0, 0], [1, 4, 0]], 0.6)


class TestTangentWedge:
    @pytest.mark.parametrize("a,b", [(2, 3), (2, 4), (3, 5)])
    def test_sharp_equality(self, a, b):
        c = gen_tangent_wedge(a, b)
        assert total_curvature(c) == pytest.approx(math.pi - 2 * math.asin(a / b), abs=1e-6)
        d = np.linalg.norm(c.vertices, axis=1)
        assert d[0] == pytest.approx(a) and d[-1] == pytest.approx(a)
        assert d.max() == pytest.approx(b)

    def test_rounded_reaches_b(self):
        c = gen_tangent_wedge(2, 3, corner_radius=0.05)
        assert np.linalg.norm(c.vertices, axis=1).max() == pytest.approx(3.0, abs=1e-6)


class TestFourier:
    def test_deterministic(self):
        a, b = gen_fourier_random(5, 42), gen_fourier_random(5, 42)
        assert a.vertices.tobytes() == b.vertices.tobytes()
        assert a.vertices.tobytes() != gen_fourier_random(5, 43).vertices.tobytes()

    def test_unit_ball(self):
        _, r = min_enclosing_ball(gen_fourier_random(4, 1))
        assert r == pytest.approx(1.0, rel=1e-9)

    def test_ellipse_curvature(self):
        c = gen_fourier_random(1, 3, 2048)
        a, b = np.array(c.meta["coefficients"][0])
        d1 = lambda t: -a * math.sin(t) + b * math.cos(t)
        d2 = lambda t: -a * math.cos(t) - b * math.sin(t)
        exact = _param_kappa(d1, d2, 0, 2 * math.pi)
        assert total_curvature(c) == pytest.approx(exact, rel=0.01)
        assert exact == pytest.approx(2 * math.pi, rel=1e-6)

    def test_fenchel_ensemble(self):
        ks = [total_curvature(gen_fourier_random(5, s, 512)) for s in range(200)]
        assert min(ks) >= 2 * math.pi - 1e-6


class TestSpecs:
    def test_families_listed(self):
        assert set(FAMILIES) == {"torus_knot", "helix_composite", "spiral", "rounded_polygon",
                                 "fourier_random", "circle", "line_segment"}

    @pytest.mark.parametrize("spec", [
        CurveSpec("torus_knot", {"p": 2, "q": 5}, 512),
        CurveSpec("helix_composite", {"n": 3}, 512),
        CurveSpec("spiral", {"theta_max": 20.0}, 512),
        CurveSpec("rounded_polygon", {"vertices": [[0, 0, 0], [2, 0, 0], [2, 2, 0]], "corner_radius": 0.2}, 256),
        CurveSpec("fourier_random", {"modes": 3, "seed": 1}, 256),
        CurveSpec("circle", {"radius": 2.0}, 64),
        CurveSpec("line_segment", {"start": [0, 0, 0], "end": [1, 0, 0]}, 16),
    ])
    def test_every_family_builds(self, spec):
        c1, c2 = make_curve(spec), make_curve(spec)
        assert c1.vertices.tobytes() == c2.vertices.tobytes()
        assert c1.meta["spec"] == spec.to_dict()

    def test_unknown_family(self):
        with pytest.raises(CurveError, match="unknown family"):
            CurveSpec("trefoil")

    def test_unknown_param(self):
        with pytest.raises(CurveError, match="does not take"):
            make_curve(CurveSpec("circle", {"p": 2}))

    def test_with_param(self):
        s = CurveSpec("torus_knot", {"p": 2}, 100).with_param("q", 7).with_param("samples", 300)
        assert s.params == {"p": 2, "q": 7} and s.samples == 300


class TestLineSegment:
    def test_graded_spacing(self):
        c = gen_line_segment([-100, 2, 0], [100, 2, 0], 200, focus=[0, 0, 0])
        e = np.linalg.norm(c.edges(), axis=1)
        mid = np.argmin(np.abs(c.vertices[:-1, 0]))
        assert e[mid] < e[0] / 10
        assert build_arc_table(c).length == pytest.approx(200.0)

    def test_circle_planar(self):
        assert np.all(gen_circle(1.0, 32).vertices[:, 2] == 0)
