"""
Inequality certificates.

Every check returns a list of :class:`BoundCertificate`, one per form of
the inequality that applies to the input. A certificate passes when
``lhs <= rhs + tolerance_used``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .curve import SampledCurve, build_arc_table, min_enclosing_ball, resample
from .exceptions import PreconditionError
from .invariants import (
    NEAR_COEFFICIENT,
    NEAR_INTEGRAND_BOUND,
    _segments,
    compute_invariants,
    illumination,
    thickness_info,
    total_curvature,
)

__all__ = [
    "BoundCertificate",
    "ILLUMINATION_C1",
    "ILLUMINATION_C2",
    "MAIN_CONSTANT",
    "assembled_constant",
    "check_packing",
    "check_oscillation",
    "check_illumination",
    "check_main_theorem",
    "check_thickness_consequences",
    "all_passed",
]

ILLUMINATION_C1 = 16.0
ILLUMINATION_C2 = 43.0
MAIN_CONSTANT = 4.0


def assembled_constant(b1=NEAR_COEFFICIENT, c1=ILLUMINATION_C1, c2=ILLUMINATION_C2):
    """Constant c in acn <= c L kappa obtained from Near <= b1 L and
    Far <= c1 L + c2 L kappa together with kappa >= 2 pi."""
    a, b = b1 + c1, c2
    return (b + a / (2 * math.pi)) / (4 * math.pi)


@dataclass(frozen=True)
class BoundCertificate:
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    tolerance_used: float
    inputs_digest: str

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
            "tolerance_used": self.tolerance_used,
            "inputs_digest": self.inputs_digest,
        }

    CSV_FIELDS = ("name", "lhs", "rhs", "margin", "pass")

    def csv_row(self):
        return [self.name, self.lhs, self.rhs, self.margin, self.passed]


def _certificate(name, lhs, rhs, tol, provenance):
    lhs, rhs, tol = float(lhs), float(rhs), float(tol)
    return BoundCertificate(name, lhs, rhs, rhs - lhs, bool(lhs <= rhs + tol), tol, provenance)


def all_passed(certs):
    return all(c.passed for c in certs)


def _prov(curve, *notes):
    return ";".join([f"sha256:{curve.digest()}", "kappa=polygon exterior angles", *notes])


def check_packing(curve: SampledCurve, rho=None, center=None):
    """L <= rho (kappa + 2) for any curve in a ball of radius rho, and
    L <= rho kappa for closed curves. Adds the corollary
    L >= 3 rho  =>  kappa >= 1 when its hypothesis holds."""
    if rho is None or center is None:
        c0, r0 = min_enclosing_ball(curve)
        center = c0 if center is None else np.asarray(center, dtype=np.float64)
        rho = r0 if rho is None else float(rho)
    center = np.asarray(center, dtype=np.float64)
    far = float(np.max(np.linalg.norm(curve.vertices - center, axis=1)))
    if far > rho * (1 + 1e-9):
        raise PreconditionError(f"curve leaves the ball: vertex at distance {far:.6g} > rho = {rho:.6g}")
    L = build_arc_table(curve).length
    kappa = total_curvature(curve)
    tol = 1e-12 * L
    prov = _prov(curve, f"rho={rho!r}")
    certs = [_certificate("packing", L, rho * (kappa + 2), tol, prov)]
    if curve.closed:
        certs.append(_certificate("packing_closed", L, rho * kappa, tol, prov))
    if L >= 3 * rho:
        certs.append(_certificate("packing_corollary", 1.0, kappa, 0.0, prov))
    return certs


def check_oscillation(arc: SampledCurve, a: float, b: float, center=(0.0, 0.0, 0.0),
                      endpoint_rtol: float = 1e-6):
    """Curvature lower bounds for an arc that starts and ends on the sphere
    of radius ``a`` and reaches the sphere of radius ``b``.

    kappa is measured on the polygon; the change under a 4x resampling is
    attached as tolerance.
    """
    a, b = float(a), float(b)
    if not 0 < a < b:
        raise PreconditionError(f"need 0 < a < b, got a={a}, b={b}")
    x0 = np.asarray(center, dtype=np.float64)
    dist = np.linalg.norm(arc.vertices - x0, axis=1)
    for name, d in (("start", dist[0]), ("end", dist[-1])):
        if abs(d - a) > endpoint_rtol * a:
            raise PreconditionError(f"arc {name} is at distance {d:.9g}, not on the sphere of radius {a}")
    if dist.max() < b * (1 - 1e-12):
        raise PreconditionError(f"arc reaches only distance {dist.max():.9g} < b = {b}")
    kappa = total_curvature(arc)
    fine = resample(arc, 4 * (len(arc) - 1) + 1)
    delta = abs(total_curvature(fine) - kappa)
    tol = delta + 1e-12
    prov = _prov(arc, f"a={a!r}", f"b={b!r}", f"refinement_delta={delta:.3e}")
    certs = [_certificate("oscillation_arcsin", math.pi - 2 * math.asin(a / b), kappa, tol, prov)]
    if b >= a + 1:
        certs.append(_certificate("oscillation_sqrt", 2 * math.sqrt(2) / math.sqrt(a + 1), kappa, tol, prov))
        if a >= 2:
            certs.append(_certificate("oscillation_simple", 2 / math.sqrt(a), kappa, tol, prov))
    return certs


def _check_far_enough(curve, x0, min_distance):
    e = curve.edges()
    W = curve.vertices[: e.shape[0]]
    t = np.clip(np.einsum("ij,ij->i", x0 - W, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
    d = np.linalg.norm(W + t[:, None] * e - x0, axis=1)
    k = int(np.argmin(d))
    if d[k] < min_distance * (1 - 1e-12):
        raise PreconditionError(f"segment {k} comes within {d[k]:.9g} of the basepoint (need >= {min_distance})")


def check_illumination(curve: SampledCurve, basepoint, min_distance: float = 2.0):
    """Illumination of ``basepoint`` by a curve staying at distance >= 2
    is at most 16 + 43 kappa."""
    x0 = np.asarray(basepoint, dtype=np.float64)
    _check_far_enough(curve, x0, min_distance)
    est = illumination(curve, x0)
    kappa = total_curvature(curve)
    prov = _prov(curve, f"basepoint={x0.tolist()}", "illumination=midpoint rule")
    return [_certificate("illumination", est.value, ILLUMINATION_C1 + ILLUMINATION_C2 * kappa, est.error, prov)]


def check_main_theorem(curve: SampledCurve, refine: bool = False, workers=None, report=None):
    """acn < 4 E_L kappa, plus the sharper assembled constant and the
    Near / Far pieces it is built from."""
    rep = report if report is not None else compute_invariants(curve, refine=refine, workers=workers)
    acn, EL, kappa = rep.acn, rep.ropelength, rep.total_curvature
    err = rep.error_estimates["acn"]
    nf_err = rep.error_estimates["near_far"]
    c = assembled_constant()
    a, b = NEAR_COEFFICIENT + ILLUMINATION_C1, ILLUMINATION_C2
    prov = _prov(curve, f"R={rep.thickness!r}", "acn=midpoint rule", f"refine={bool(refine)}")
    return [
        _certificate("main_theorem", acn, MAIN_CONSTANT * EL * kappa, err, prov),
        _certificate("main_theorem_assembled", acn, c * EL * kappa, err, prov + f";c={c!r}"),
        _certificate("near_far_sum", acn, (a + b * kappa) * EL / (4 * math.pi), err, prov),
        _certificate("near_bound", rep.near, NEAR_COEFFICIENT * EL, nf_err, prov),
        _certificate("far_bound", rep.far, (ILLUMINATION_C1 + ILLUMINATION_C2 * kappa) * EL, nf_err, prov),
        _certificate("ropelength_lower_bound", acn / (MAIN_CONSTANT * kappa), EL,
                     err / (MAIN_CONSTANT * kappa), prov),
    ]


def check_thickness_consequences(curve: SampledCurve, rtol: float = 1e-3):
    """Pointwise facts about curves of thickness R, checked on all pairs.

    * every consecutive-triple circumradius is >= R
    * arc >= pi R  implies  chord >= 2R              (vertex pairs)
    * arc <= pi R  implies  chord >= R sqrt(2 - 2 cos(arc/R))   (vertex pairs)
    * the Gauss integrand times R^2 stays below (pi/4)(pi/2)^2 on the near band

    The polygon only approximates a curve of thickness R, so the last three
    carry a discretisation tolerance of ``rtol`` plus (h/R)^2, h the
    longest edge.
    """
    info = thickness_info(curve)
    R = info.radius
    table, mid, tan, seglen, smid = _segments(curve)
    V = np.ascontiguousarray(curve.vertices)
    cum = np.ascontiguousarray(table.cumulative)
    gap_min, schur_min, near_max = K.pair_extremes(V, cum, table.length, curve.closed, R, mid, tan, seglen, smid)
    disc = rtol + (seglen.max() / R) ** 2
    prov = _prov(curve, f"R={R!r}", f"discretisation_tol={disc:.3e}")
    radii = K.circumradii(V, curve.closed)
    return [
        _certificate("curvature_bound", R, float(radii.min()), 0.0, prov),
        _certificate("gap_bound", 2.0, gap_min if np.isfinite(gap_min) else math.inf, 2.0 * disc, prov),
        _certificate("schur_chord", 0.0, schur_min, disc, prov),
        _certificate("near_integrand", near_max, NEAR_INTEGRAND_BOUND, NEAR_INTEGRAND_BOUND * disc, prov),
    ]
