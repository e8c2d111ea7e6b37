"""
Continuous invariants of polygonal curves.

Double integrals use the segment midpoint rule. Pairs of segments that
share a vertex are left out of every sum; what they could contribute on a
curve of thickness R is bounded analytically and reported as error, never
added to the value.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .curve import SampledCurve, build_arc_table, subdivide
from .exceptions import CurveError, SelfIntersectionError

__all__ = [
    "Estimate",
    "NearFar",
    "ThicknessInfo",
    "OracleResult",
    "InvariantReport",
    "NEAR_INTEGRAND_BOUND",
    "NEAR_COEFFICIENT",
    "near_integrand_bound",
    "total_curvature",
    "check_embedded",
    "thickness_info",
    "thickness_radius",
    "ropelength",
    "acn",
    "writhe",
    "near_far_split",
    "illumination",
    "mobius_energy",
    "projection_crossing_oracle",
    "compute_invariants",
]

# sup of the Gauss integrand on the near band of a unit-thickness curve
NEAR_INTEGRAND_BOUND = (math.pi / 4) * (math.pi / 2) ** 2
# inner-integral bound over arc(x, y) <= pi
NEAR_COEFFICIENT = 2 * math.pi * NEAR_INTEGRAND_BOUND


class Estimate(NamedTuple):
    value: float
    error: float


class NearFar(NamedTuple):
    near: float
    far: float
    error: float


class ThicknessInfo(NamedTuple):
    radius: float
    min_rad: float
    min_rad_vertex: int
    dcsd: float
    dcsd_pair: tuple


class OracleResult(NamedTuple):
    mean: float
    min_observed: int
    counts: np.ndarray
    retries: int


def total_curvature(curve: SampledCurve) -> float:
    """Sum of exterior angles between consecutive edge tangents."""
    t = build_arc_table(curve).tangents
    if curve.closed:
        a, b = t, np.roll(t, -1, axis=0)
    else:
        a, b = t[:-1], t[1:]
    cross = np.linalg.norm(np.cross(a, b), axis=1)
    dot = np.einsum("ij,ij->i", a, b)
    return float(np.sum(np.arctan2(cross, dot)))


def check_embedded(curve: SampledCurve, rtol: float = 1e-10) -> float:
    """Raise SelfIntersectionError if non-adjacent segments come within
    ``rtol * L`` of each other. Returns the smallest such distance."""
    V = np.ascontiguousarray(curve.vertices)
    d, i, j = K.min_nonadjacent_distance(V, curve.closed)
    L = build_arc_table(curve).length
    if i >= 0 and d <= rtol * L:
        raise SelfIntersectionError((i, j), d)
    return float(d)


def _require_closed(curve, what):
    if not curve.closed:
        raise CurveError(f"{what} is only defined here for closed curves")


def thickness_info(curve: SampledCurve, band: int = 2) -> ThicknessInfo:
    """Polygonal thickness: min(minRad, dcsd / 2) with its two witnesses.

    minRad is the smallest circumradius over consecutive vertex triples.
    The doubly-critical self distance is seeded from local minima of the
    vertex-pair distance (index gap > ``band``) and refined over segment
    parameters.
    """
    _require_closed(curve, "thickness")
    check_embedded(curve)
    V = np.ascontiguousarray(curve.vertices)
    radii = K.circumradii(V, True)
    k = int(np.argmin(radii))
    min_rad = float(radii[k])
    ii, jj, _ = K.vertex_local_minima(V, True, band)
    if ii.size:
        dist, sa, sb = K.refine_seeds(V, True, ii, jj, 16)
        m = int(np.argmin(dist))
        dcsd = float(dist[m])
        pair = (int(sa[m]), int(sb[m]))
    else:
        dcsd, pair = math.inf, (-1, -1)
    return ThicknessInfo(min(min_rad, dcsd / 2.0), min_rad, k, dcsd, pair)


def thickness_radius(curve: SampledCurve) -> float:
    return thickness_info(curve).radius


def ropelength(curve: SampledCurve) -> float:
    return build_arc_table(curve).length / thickness_radius(curve)


def _segments(curve):
    table = build_arc_table(curve)
    V = curve.vertices
    mid = 0.5 * (V + (np.roll(V, -1, axis=0) if curve.closed else np.vstack([V[1:], V[-1:]])))
    mid = np.ascontiguousarray(mid[: table.edge_lengths.shape[0]])
    smid = np.concatenate([[0.0], np.cumsum(table.edge_lengths)])[:-1] + 0.5 * table.edge_lengths
    return table, mid, np.ascontiguousarray(table.tangents), np.ascontiguousarray(table.edge_lengths), smid


def _gauss_sums(curve, near_cut, workers):
    table, mid, tan, seglen, smid = _segments(curve)
    rows = K.run_rows(
        K.gauss_rows, mid.shape[0], 4,
        (mid, tan, seglen, smid, table.length, curve.closed, near_cut),
        workers,
    )
    return [float(K.tree_sum(np.ascontiguousarray(rows[:, c]))) for c in range(4)]


def _band_pairs(seglen):
    """Sum of l_i l_j over ordered pairs sharing a vertex (closed curve)."""
    nxt = np.roll(seglen, -1)
    return float(np.sum(seglen * seglen) + 2.0 * np.sum(seglen * nxt))


def near_integrand_bound(theta):
    """Bound on the Gauss integrand (times R^2) for pairs at arc distance theta*R.

    Equals (pi/4) theta^2 / (2 - 2 cos theta), increasing on [0, pi] up to
    NEAR_INTEGRAND_BOUND.
    """
    theta = min(max(theta, 1e-8), math.pi)
    return (math.pi / 4) * theta**2 / (2.0 - 2.0 * math.cos(theta))


def _gauss(curve, workers, refine, near_cut=None, R=None):
    _require_closed(curve, "the Gauss crossing integral")
    if R is None:
        R = thickness_radius(curve)
    cut = math.pi * R if near_cut is None else near_cut
    sums = _gauss_sums(curve, cut, workers)
    seglen = build_arc_table(curve).edge_lengths
    # shared-vertex pairs lie within arc distance 2 * max edge of each other
    band = _band_pairs(seglen) * near_integrand_bound(2 * seglen.max() / R) / R**2
    quad = np.zeros(4)
    if refine:
        fine = _gauss_sums(subdivide(curve, 2), cut, workers)
        quad = 4.0 / 3.0 * np.abs(np.array(fine) - np.array(sums))
    return sums, band, quad


def acn(curve: SampledCurve, refine: bool = False, workers=None) -> Estimate:
    """Average crossing number from the Gauss-type double integral.

    With ``refine`` the error also carries a Richardson term from a 2x
    subdivision of every edge.
    """
    sums, band, quad = _gauss(curve, workers, refine)
    return Estimate(sums[0] / (4 * math.pi), (band + quad[0]) / (4 * math.pi))


def writhe(curve: SampledCurve, refine: bool = False, workers=None) -> Estimate:
    sums, band, quad = _gauss(curve, workers, refine)
    return Estimate(sums[1] / (4 * math.pi), (band + quad[1]) / (4 * math.pi))


def near_far_split(curve: SampledCurve, refine: bool = False, workers=None) -> NearFar:
    """Split the un-normalised acn double integral at arc distance pi*R."""
    sums, band, quad = _gauss(curve, workers, refine)
    return NearFar(sums[2], sums[3], band + quad[2] + quad[3])


def illumination(curve: SampledCurve, basepoint, min_distance: float = 1e-9) -> Estimate:
    """Line integral of 1/|y - x0|^2 over the curve (midpoint rule).

    The error is the Richardson estimate from halving every edge.
    """
    x0 = np.asarray(basepoint, dtype=np.float64)
    V = curve.vertices
    e = curve.edges()
    W = V[: e.shape[0]]
    lengths = np.linalg.norm(e, axis=1)
    dv = np.linalg.norm(V - x0, axis=1)
    # closest approach of every segment to x0
    t = np.clip(np.einsum("ij,ij->i", x0 - W, e) / lengths**2, 0.0, 1.0)
    dseg = np.linalg.norm(W + t[:, None] * e - x0, axis=1)
    if min(dv.min(), dseg.min()) < min_distance:
        raise CurveError(f"basepoint lies on the curve (distance {min(dv.min(), dseg.min()):.3e})")
    m1 = lengths / np.sum((W + 0.5 * e - x0) ** 2, axis=1)
    q1 = W + 0.25 * e - x0
    q2 = W + 0.75 * e - x0
    m2 = 0.5 * lengths * (1.0 / np.sum(q1 * q1, axis=1) + 1.0 / np.sum(q2 * q2, axis=1))
    value = float(K.tree_sum(np.ascontiguousarray(m1)))
    err = float(np.sum(np.abs(m1 - m2))) * 4.0 / 3.0
    return Estimate(value, err)


def _mobius_band_density(theta):
    # sup of (1/|x-y|^2 - 1/arc^2) * R^2 at arc = theta R under curvature <= 1/R
    theta = min(max(theta, 1e-6), math.pi)
    return 1.0 / (4.0 * math.sin(theta / 2) ** 2) - 1.0 / theta**2


def _mobius_sum(curve, workers):
    table, mid, tan, seglen, smid = _segments(curve)
    rows = K.run_rows(K.mobius_rows, mid.shape[0], 1, (mid, seglen, smid, table.length, curve.closed), workers)
    return float(K.tree_sum(np.ascontiguousarray(rows[:, 0])))


def mobius_energy(curve: SampledCurve, refine: bool = False, workers=None) -> Estimate:
    """Regularised Möbius energy: double integral of 1/|x-y|^2 - 1/arc(x,y)^2."""
    _require_closed(curve, "Möbius energy")
    return _mobius(curve, refine, workers, thickness_radius(curve))


def _mobius(curve, refine, workers, R):
    value = _mobius_sum(curve, workers)
    seglen = build_arc_table(curve).edge_lengths
    band = _band_pairs(seglen) * _mobius_band_density(2 * seglen.max() / R) / R**2
    err = band
    if refine:
        err += 4.0 / 3.0 * abs(_mobius_sum(subdivide(curve, 2), workers) - value)
    return Estimate(value, err)


# -- projection oracle -------------------------------------------------------

def _plane_basis(d):
    e = np.zeros(3)
    e[int(np.argmin(np.abs(d)))] = 1.0
    u = np.cross(d, e)
    u /= np.linalg.norm(u)
    return u, np.cross(d, u)


def _rotate(d, axis, angle):
    # Rodrigues rotation of d about a unit axis
    return (d * math.cos(angle) + np.cross(axis, d) * math.sin(angle)
            + axis * (axis @ d) * (1 - math.cos(angle)))


def projection_crossing_oracle(curve: SampledCurve, directions: int = 1000, seed: int = 0,
                               max_retries: int = 8) -> OracleResult:
    """Average crossing count over seeded uniformly random projection directions."""
    _require_closed(curve, "the projection oracle")
    if directions < 1:
        raise ValueError("directions must be >= 1")
    check_embedded(curve)
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(directions, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    V = curve.vertices - curve.vertices.mean(axis=0)
    h = build_arc_table(curve).edge_lengths.mean()
    eps = 1e-9 * h * h
    counts = np.empty(directions, dtype=np.int64)
    retries = 0
    for k, d in enumerate(dirs):
        for attempt in range(max_retries + 1):
            u, v = _plane_basis(d)
            P = np.ascontiguousarray(np.column_stack([V @ u, V @ v]))
            c = K.count_crossings(P, True, eps)
            if c >= 0:
                break
            retries += 1
            d = _rotate(d, u, 1e-6)
        else:
            raise CurveError(f"projection direction {k} stayed degenerate after {max_retries} perturbations")
        counts[k] = c
    return OracleResult(float(counts.mean()), int(counts.min()), counts, retries)


# -- report -----------------------------------------------------------------

@dataclass
class InvariantReport:
    length: float
    total_curvature: float
    thickness: float
    ropelength: float
    acn: float
    writhe: float
    mobius_energy: float
    near: float
    far: float
    error_estimates: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, obj):
        return cls(**obj)

    CSV_FIELDS = ("length", "total_curvature", "thickness", "ropelength", "acn",
                  "writhe", "mobius_energy", "near", "far")

    def csv_row(self):
        return [getattr(self, f) for f in self.CSV_FIELDS]


def compute_invariants(curve: SampledCurve, refine: bool = False, workers=None) -> InvariantReport:
    """All invariants of a closed embedded curve in one report."""
    _require_closed(curve, "the invariant report")
    L = build_arc_table(curve).length
    R = thickness_radius(curve)
    sums, band, quad = _gauss(curve, workers, refine, near_cut=math.pi * R, R=R)
    mob = _mobius(curve, refine, workers, R)
    errors = {
        "acn": (band + quad[0]) / (4 * math.pi),
        "writhe": (band + quad[1]) / (4 * math.pi),
        "near_far": band + quad[2] + quad[3],
        "mobius_energy": mob.error,
    }
    return InvariantReport(
        length=L,
        total_curvature=total_curvature(curve),
        thickness=R,
        ropelength=L / R,
        acn=sums[0] / (4 * math.pi),
        writhe=sums[1] / (4 * math.pi),
        mobius_energy=mob.value,
        near=sums[2],
        far=sums[3],
        error_estimates=errors,
    )
