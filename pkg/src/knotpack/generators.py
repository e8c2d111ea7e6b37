"""
Curve families.

Smooth families are first traced as dense polylines and then sampled so
that vertices are spread over a mix of arclength and turning; long,
nearly straight stretches get fewer vertices than tight bends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .curve import SampledCurve
from .exceptions import CurveError

__all__ = [
    "FAMILIES",
    "CurveSpec",
    "make_curve",
    "gen_circle",
    "gen_line_segment",
    "gen_torus_knot",
    "gen_helix_composite",
    "gen_spiral",
    "gen_rounded_polygon",
    "gen_fourier_random",
    "gen_tangent_wedge",
    "piece_vertices",
]

FAMILIES = (
    "torus_knot",
    "helix_composite",
    "spiral",
    "rounded_polygon",
    "fourier_random",
    "circle",
    "line_segment",
)

_FINE = 40


def _turning(points):
    e = np.diff(points, axis=0)
    e = e / np.linalg.norm(e, axis=1)[:, None]
    cross = np.linalg.norm(np.cross(e[:-1], e[1:]), axis=1)
    dot = np.einsum("ij,ij->i", e[:-1], e[1:])
    return np.arctan2(cross, dot)


def _measure(points, length_scale, turn_scale, turn_weight):
    """Cumulative sampling measure along a dense open polyline."""
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    turn = np.zeros_like(seg)
    turn[1:] = _turning(points)
    w = (1.0 - turn_weight) * seg / length_scale + turn_weight * turn / turn_scale
    return np.concatenate([[0.0], np.cumsum(w)])


def _sample_pieces(pieces, samples, closed, turn_weight=0.5):
    """Sample consecutive dense pieces into one polygon.

    Each piece is an (m, 3) dense polyline whose last point is the first
    point of the next piece (cyclically when closed). Every piece start
    becomes a vertex. Returns (vertices, piece index ranges).
    """
    total_len = sum(float(np.sum(np.linalg.norm(np.diff(p, axis=0), axis=1))) for p in pieces)
    total_turn = sum(float(np.sum(_turning(p))) for p in pieces if len(p) > 2)
    # include the turning at the joins so corners between pieces count
    total_turn = max(total_turn, 1e-12)
    meas = [_measure(p, total_len, total_turn, turn_weight if total_turn > 1e-9 else 0.0) for p in pieces]
    mass = np.array([m[-1] for m in meas])
    budget = samples if closed else samples - 1
    alloc = np.maximum(1, np.floor(budget * mass / mass.sum()).astype(int))
    while alloc.sum() < budget:
        alloc[int(np.argmax(budget * mass / mass.sum() - alloc))] += 1
    while alloc.sum() > budget:
        alloc[int(np.argmax(np.where(alloc > 1, alloc, -1)))] -= 1
    out = []
    ranges = []
    start = 0
    for p, m, k in zip(pieces, meas, alloc):
        targets = np.arange(k) * (m[-1] / k)
        idx = np.clip(np.searchsorted(m, targets, side="right") - 1, 0, len(p) - 2)
        span = m[idx + 1] - m[idx]
        frac = np.where(span > 0, (targets - m[idx]) / np.where(span > 0, span, 1.0), 0.0)
        pts = p[idx] + frac[:, None] * (p[idx + 1] - p[idx])
        pts[0] = p[0]
        out.append(pts)
        ranges.append((start, start + k))
        start += k
    if not closed:
        out.append(pieces[-1][-1:])
        ranges[-1] = (ranges[-1][0], ranges[-1][1] + 1)
    return np.vstack(out), ranges


def piece_vertices(curve: SampledCurve, name: str) -> SampledCurve:
    """Open sub-curve covering a named piece recorded in ``meta['pieces']``."""
    i0, i1 = curve.meta["pieces"][name]
    idx = np.arange(i0, i1 + 1) % len(curve)
    return SampledCurve(curve.vertices[idx], closed=False)


# -- families ----------------------------------------------------------------

def gen_circle(radius: float = 1.0, samples: int = 512) -> SampledCurve:
    if radius <= 0:
        raise CurveError("radius must be positive")
    t = 2 * np.pi * np.arange(samples) / samples
    v = np.column_stack([radius * np.cos(t), radius * np.sin(t), np.zeros(samples)])
    return SampledCurve(v, True, {"family": "circle", "radius": radius})


def gen_line_segment(start, end, samples: int = 2, focus=None) -> SampledCurve:
    """Straight open segment.

    With ``focus`` the spacing is graded: fine near the point of the line
    closest to ``focus`` and growing geometrically away from it, on the
    length scale of the focus distance.
    """
    a = np.asarray(start, dtype=np.float64)
    b = np.asarray(end, dtype=np.float64)
    length = float(np.linalg.norm(b - a))
    if length == 0:
        raise CurveError("segment endpoints coincide")
    if samples < 2:
        raise CurveError("a segment needs at least 2 samples")
    u = (b - a) / length
    if focus is None:
        s = np.linspace(0.0, length, samples)
    else:
        f = np.asarray(focus, dtype=np.float64)
        foot = float(np.clip((f - a) @ u, 0.0, length))
        scale = float(np.linalg.norm(a + foot * u - f))
        if scale == 0:
            raise CurveError("focus lies on the segment")
        sig = np.linspace(np.arcsinh(-foot / scale), np.arcsinh((length - foot) / scale), samples)
        s = foot + scale * np.sinh(sig)
        s[0], s[-1] = 0.0, length
    v = a + s[:, None] * u
    if len(v) < 3:
        v = np.vstack([a, 0.5 * (a + b), b])
    return SampledCurve(v, False, {"family": "line_segment"})


def gen_torus_knot(p: int = 2, q: int = 3, major_radius: float = 3.0, minor_radius: float = 1.0,
                   samples: int = 2048) -> SampledCurve:
    """(p, q) torus curve: p turns around the tube, q turns around the central axis."""
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise CurveError(f"torus knot needs coprime p, q >= 1, got ({p}, {q})")
    if not 0 < minor_radius < major_radius:
        raise CurveError("need 0 < minor_radius < major_radius")
    t = 2 * np.pi * np.arange(samples) / samples
    rho = major_radius + minor_radius * np.cos(p * t)
    v = np.column_stack([rho * np.cos(q * t), rho * np.sin(q * t), minor_radius * np.sin(p * t)])
    meta = {"family": "torus_knot", "p": p, "q": q,
            "major_radius": major_radius, "minor_radius": minor_radius}
    return SampledCurve(v, True, meta)


def _hermite5(p0, v0, p1, v1, m):
    t = np.linspace(0.0, 1.0, m)[:, None]
    t3, t4, t5 = t**3, t**4, t**5
    h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    h1 = t - 6 * t3 + 8 * t4 - 3 * t5
    h4 = -4 * t3 + 7 * t4 - 3 * t5
    h5 = 10 * t3 - 15 * t4 + 6 * t5
    return h0 * p0 + h1 * v0 + h4 * v1 + h5 * p1


def _arc_xz(cx, cz, r, phi0, phi1, m):
    phi = np.linspace(phi0, phi1, m)
    return np.column_stack([cx + r * np.cos(phi), np.zeros(m), cz + r * np.sin(phi)])


def _line(a, b, m=2):
    return np.linspace(np.asarray(a, float), np.asarray(b, float), m)


def gen_helix_composite(n: int = 5, exponent: float = 2.0, samples: int = 2048,
                        turn_weight: float = 0.5) -> SampledCurve:
    """Knot made of a steep helix H, its axis A and two planar connectors.

    H is ``(cos t, sin t, n**exponent * t)`` for ``t`` in ``[0, n pi]``.
    Connector C1 runs from the top of H around the left side down to the
    bottom of A; C2 runs from the top of A around the right side to the
    bottom of H. Both lie in the plane y = 0 apart from short quintic
    Hermite blends that match the helix tangent at its ends.
    """
    if n < 3 or n % 2 == 0:
        raise CurveError(f"helix composite needs odd n >= 3, got {n}")
    if exponent <= 1.0:
        raise CurveError("exponent must exceed 1")
    c = float(n) ** exponent
    T = c * n * math.pi
    F = 200 * n
    t = np.linspace(0.0, n * math.pi, F)
    H = np.column_stack([np.cos(t), np.sin(t), c * t])
    up = np.array([0.0, 0.0, 1.0])
    tan_start = np.array([0.0, 1.0, c]) / math.hypot(1.0, c)
    tan_end = np.array([-math.sin(n * math.pi), math.cos(n * math.pi), c]) / math.hypot(1.0, c)
    hb, rho_top, zb = 1.0, 1.0, -2.0
    m = 400

    top_h = H[-1]
    blend1 = _hermite5(top_h, hb * tan_end, top_h + hb * up, hb * up, m)
    x_down = top_h[0] - 2 * rho_top
    C1 = np.vstack([
        blend1,
        _arc_xz(top_h[0] - rho_top, T + hb, rho_top, 0.0, math.pi, m)[1:],
        _line([x_down, 0, T + hb], [x_down, 0, zb])[1:],
        _arc_xz(x_down / 2, zb, -x_down / 2, math.pi, 2 * math.pi, m)[1:],
        _line([0, 0, zb], [0, 0, 0])[1:],
    ])
    A = _line([0, 0, 0], [0, 0, T], 2)
    x_right = 2 * rho_top
    bottom_h = H[0]
    blend2 = _hermite5(bottom_h - hb * up, hb * up, bottom_h, hb * tan_start, m)
    C2 = np.vstack([
        _line([0, 0, T], [0, 0, T + hb]),
        _arc_xz(rho_top, T + hb, rho_top, math.pi, 0.0, m)[1:],
        _line([x_right, 0, T + hb], [x_right, 0, zb])[1:],
        _arc_xz((x_right + 1) / 2, zb, (x_right - 1) / 2, 0.0, -math.pi, m)[1:],
        _line([1, 0, zb], [1, 0, -hb])[1:],
        blend2[1:],
    ])
    pieces = [H, C1, A, C2]
    v, ranges = _sample_pieces(pieces, samples, closed=True, turn_weight=turn_weight)
    names = ("H", "C1", "A", "C2")
    spans = {name: [r0, r1] for name, (r0, r1) in zip(names, ranges)}
    meta = {"family": "helix_composite", "n": n, "exponent": exponent, "pieces": spans}
    curve = SampledCurve(v, True, meta)
    from .invariants import total_curvature

    meta["connector_curvature"] = {
        name: total_curvature(piece_vertices(curve, name)) for name in ("C1", "C2")
    }
    return SampledCurve(v, True, meta)


def gen_spiral(theta_max: float = 50.0, samples: int = 4096) -> SampledCurve:
    """Planar spiral r = 3 - 1/theta for theta in [1, theta_max]."""
    if theta_max <= 1:
        raise CurveError("theta_max must exceed 1")
    th = np.linspace(1.0, theta_max, samples)
    r = 3.0 - 1.0 / th
    v = np.column_stack([r * np.cos(th), r * np.sin(th), np.zeros(samples)])
    return SampledCurve(v, False, {"family": "spiral", "theta_max": theta_max})


def _round_corner(v, a, b, radius, m):
    """Dense circular arc replacing the corner at ``v`` between unit
    directions ``a`` (incoming) and ``b`` (outgoing)."""
    ext = math.atan2(np.linalg.norm(np.cross(a, b)), a @ b)
    back = radius * math.tan(ext / 2)
    p0 = v - back * a
    n = b - (b @ a) * a
    n /= np.linalg.norm(n)
    center = p0 + radius * n
    phi = np.linspace(0.0, ext, m)
    return center - radius * np.cos(phi)[:, None] * n + radius * np.sin(phi)[:, None] * a, back


def _rounded_path(vertices, radius, closed, m=_FINE * 10):
    P = np.asarray(vertices, dtype=np.float64)
    k = P.shape[0]
    e = (np.roll(P, -1, axis=0) - P) if closed else np.diff(P, axis=0)
    lens = np.linalg.norm(e, axis=1)
    if np.any(lens == 0):
        raise CurveError("consecutive polygon vertices coincide")
    d = e / lens[:, None]
    corners = range(k) if closed else range(1, k - 1)
    arcs = {}
    for i in corners:
        arcs[i] = _round_corner(P[i], d[i - 1], d[i], radius, m)
    pieces = []
    if closed:
        for i in range(k):
            arc, back = arcs[i]
            nxt_arc, nxt_back = arcs[(i + 1) % k]
            pieces.append(arc[:-1])
            pieces.append(_line(arc[-1], nxt_arc[0])[:-1])
        pts = np.vstack(pieces)
    else:
        cur = P[0]
        for i in range(1, k - 1):
            arc, back = arcs[i]
            pieces.append(_line(cur, arc[0])[:-1])
            pieces.append(arc[:-1])
            cur = arc[-1]
        pieces.append(_line(cur, P[-1]))
        pts = np.vstack(pieces)
    return pts


def _sample_dense(pts, samples, closed, turn_weight=0.5):
    if closed:
        pts = np.vstack([pts, pts[:1]])
    v, _ = _sample_pieces([pts], samples, closed, turn_weight)
    return v


def gen_rounded_polygon(vertices, corner_radius: float, samples: int = 1024,
                        closed: bool = False) -> SampledCurve:
    """Right-angled polygonal path with every corner replaced by a quarter circle."""
    P = np.asarray(vertices, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != 3 or P.shape[0] < (3 if closed else 2):
        raise CurveError("rounded polygon needs an (n, 3) vertex array")
    e = (np.roll(P, -1, axis=0) - P) if closed else np.diff(P, axis=0)
    lens = np.linalg.norm(e, axis=1)
    d = e / lens[:, None]
    pairs = range(len(d)) if closed else range(1, len(d))
    for i in pairs:
        c = abs(float(d[i - 1] @ d[i]))
        if c > 1e-9:
            raise CurveError(f"corner {i} is not a right angle (|cos| = {c:.3e})")
    if not 0 < corner_radius < 0.5 * lens.min():
        raise CurveError("corner_radius must be positive and below half the shortest edge")
    if P.shape[0] == 2 and not closed:
        return gen_line_segment(P[0], P[1], samples)
    v = _sample_dense(_rounded_path(P, corner_radius, closed), samples, closed)
    return SampledCurve(v, closed, {"family": "rounded_polygon", "corner_radius": corner_radius,
                                    "edges": int(len(d))})


def gen_tangent_wedge(a: float, b: float, corner_radius: float = 0.0, samples: int = 512,
                      leg: float | None = None) -> SampledCurve:
    """Two straight edges tangent to the sphere of radius ``a`` about the
    origin, meeting at a corner whose farthest point lies on radius ``b``.

    With ``corner_radius = 0`` the corner is sharp and sits on radius ``b``;
    otherwise the corner is pushed out just far enough that the rounded
    arc touches radius ``b``. Endpoints are the tangency points on radius
    ``a``.
    """
    if not 0 < a < b:
        raise CurveError("need 0 < a < b")
    c = float(corner_radius)
    apex = (b - c) / (1 - c / a) if c > 0 else b
    half = math.asin(a / apex)
    z = np.array([apex, 0.0, 0.0])
    cos_h = a / apex
    p = np.array([a * cos_h, a * math.sqrt(1 - cos_h**2), 0.0])
    q = np.array([p[0], -p[1], 0.0])
    if c > 0:
        d_in = (z - p) / np.linalg.norm(z - p)
        d_out = (q - z) / np.linalg.norm(q - z)
        arc, back = _round_corner(z, d_in, d_out, c, 2000)
        pts = np.vstack([_line(p, arc[0], 400)[:-1], arc[:-1], _line(arc[-1], q, 400)])
    else:
        pts = np.vstack([_line(p, z, 200)[:-1], _line(z, q, 200)])
    v = _sample_dense(pts, samples, False)
    # the farthest point (the sharp corner, or the middle of the rounded
    # one) lies on the x axis at distance b; keep it as an exact vertex
    peak = np.array([b, 0.0, 0.0])
    k = int(np.argmin(np.linalg.norm(v - peak, axis=1)))
    v[k] = peak
    return SampledCurve(v, False, {"family": "tangent_wedge", "a": a, "b": b,
                                   "corner_radius": c, "apex": apex, "half_angle": half})


def gen_fourier_random(modes: int = 3, seed: int = 0, samples: int = 1024) -> SampledCurve:
    """Closed trigonometric curve with seeded Gaussian coefficients.

    Coefficients of mode ``k`` are drawn from ``N(0, 1/k^2)`` using numpy's
    PCG64 generator; the curve is then centred and scaled so that its
    minimum enclosing ball has radius 1.
    """
    if modes < 1:
        raise CurveError("modes must be >= 1")
    from .curve import min_enclosing_ball

    rng = np.random.Generator(np.random.PCG64(seed))
    coef = rng.normal(size=(modes, 2, 3)) / np.arange(1, modes + 1)[:, None, None]
    t = 2 * np.pi * np.arange(samples) / samples
    k = np.arange(1, modes + 1)[:, None] * t[None, :]
    v = np.einsum("kt,kd->td", np.cos(k), coef[:, 0]) + np.einsum("kt,kd->td", np.sin(k), coef[:, 1])
    center, radius = min_enclosing_ball(v)
    v = (v - center) / radius
    return SampledCurve(v, True, {"family": "fourier_random", "modes": modes, "seed": seed,
                                  "coefficients": coef.tolist()})


# -- declarative specs -------------------------------------------------------

@dataclass(frozen=True)
class CurveSpec:
    family: str
    params: Mapping[str, Any] = field(default_factory=dict)
    samples: int = 1024

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise CurveError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.samples < 3:
            raise CurveError("samples must be >= 3")

    def with_param(self, name, value):
        params = dict(self.params)
        if name == "samples":
            return CurveSpec(self.family, params, int(value))
        params[name] = value
        return CurveSpec(self.family, params, self.samples)

    def to_dict(self):
        return {"family": self.family, "params": dict(self.params), "samples": self.samples}


_BUILDERS = {
    "torus_knot": (gen_torus_knot, ("p", "q", "major_radius", "minor_radius")),
    "helix_composite": (gen_helix_composite, ("n", "exponent", "turn_weight")),
    "spiral": (gen_spiral, ("theta_max",)),
    "rounded_polygon": (gen_rounded_polygon, ("vertices", "corner_radius", "closed")),
    "fourier_random": (gen_fourier_random, ("modes", "seed")),
    "circle": (gen_circle, ("radius",)),
    "line_segment": (gen_line_segment, ("start", "end", "focus")),
}


def make_curve(spec: CurveSpec) -> SampledCurve:
    fn, allowed = _BUILDERS[spec.family]
    unknown = set(spec.params) - set(allowed)
    if unknown:
        raise CurveError(f"{spec.family} does not take parameter(s): {', '.join(sorted(unknown))}")
    curve = fn(samples=spec.samples, **spec.params)
    meta = dict(curve.meta)
    meta["spec"] = spec.to_dict()
    return SampledCurve(curve.vertices, curve.closed, meta)
