"""
Polygonal space curves.

Every curve in knotpack is an inscribed polygon: an ordered array of 3D
vertices plus a flag saying whether the last vertex connects back to the
first. Tangents live on edges; turning lives on vertices.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .exceptions import CurveError

__all__ = [
    "SampledCurve",
    "ArcTable",
    "build_arc_table",
    "arc_distance",
    "resample",
    "subdivide",
    "min_enclosing_ball",
    "load_curve",
    "save_curve",
    "curve_to_json",
    "curve_from_json",
]


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Ordered 3D vertex sequence, open or closed.

    For a closed curve the closing edge ``vertices[-1] -> vertices[0]`` is
    implicit; the first vertex must not be repeated at the end.
    """

    vertices: np.ndarray
    closed: bool = False
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[1] != 3:
            raise CurveError(f"vertices must have shape (n, 3), got {v.shape}")
        if v.shape[0] < 3:
            raise CurveError(f"a curve needs at least 3 vertices, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            bad = int(np.argmax(~np.all(np.isfinite(v), axis=1)))
            raise CurveError(f"vertex {bad} has a non-finite coordinate")
        edges = np.diff(v, axis=0)
        if self.closed:
            edges = np.vstack([edges, v[:1] - v[-1:]])
        lengths = np.sqrt(np.einsum("ij,ij->i", edges, edges))
        if np.any(lengths == 0.0):
            k = int(np.argmax(lengths == 0.0))
            if self.closed and k == len(lengths) - 1:
                raise CurveError("closed curve repeats its first vertex at the end")
            raise CurveError(f"edge {k} has zero length")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "closed", bool(self.closed))
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self):
        return self.vertices.shape[0]

    @property
    def n_edges(self):
        return len(self) if self.closed else len(self) - 1

    def edges(self):
        """Edge vectors, including the closing edge for closed curves."""
        v = self.vertices
        if self.closed:
            return np.roll(v, -1, axis=0) - v
        return v[1:] - v[:-1]

    def transformed(self, scale=1.0, rotation=None, shift=None):
        """Return ``scale * R @ v + shift`` applied to every vertex."""
        v = self.vertices * float(scale)
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=np.float64).T
        if shift is not None:
            v = v + np.asarray(shift, dtype=np.float64)
        return SampledCurve(v, self.closed, self.meta)

    def digest(self):
        h = hashlib.sha256()
        h.update(b"closed" if self.closed else b"open")
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class ArcTable:
    """Cumulative arclength at each vertex, total length, unit edge tangents."""

    cumulative: np.ndarray
    length: float
    tangents: np.ndarray
    edge_lengths: np.ndarray
    closed: bool


def build_arc_table(curve: SampledCurve) -> ArcTable:
    edges = curve.edges()
    lengths = np.sqrt(np.einsum("ij,ij->i", edges, edges))
    if np.any(lengths <= 0.0) or not np.all(np.isfinite(lengths)):
        raise CurveError("curve has a degenerate or non-finite edge")
    tangents = edges / lengths[:, None]
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = float(cum[-1])
    # per-vertex table; for closed curves the last entry (back at vertex 0) is L
    vertex_cum = cum[: len(curve)] if curve.closed else cum
    for arr in (vertex_cum, tangents, lengths):
        arr.setflags(write=False)
    return ArcTable(vertex_cum, total, tangents, lengths, curve.closed)


def arc_distance(table: ArcTable, i: int, j: int) -> float:
    """Intrinsic distance between vertices ``i`` and ``j``.

    Closed curves take the shorter of the two routes.
    """
    n = table.cumulative.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"vertex index out of range for {n} vertices: {i}, {j}")
    d = abs(float(table.cumulative[i]) - float(table.cumulative[j]))
    if table.closed:
        d = min(d, table.length - d)
    return d


def _points_at(curve: SampledCurve, s: np.ndarray) -> np.ndarray:
    v = curve.vertices
    table = build_arc_table(curve)
    knots = np.concatenate([table.cumulative, [table.length]]) if curve.closed else table.cumulative
    pts = np.vstack([v, v[:1]]) if curve.closed else v
    return np.column_stack([np.interp(s, knots, pts[:, k]) for k in range(3)])


def resample(curve: SampledCurve, n: int) -> SampledCurve:
    """Place ``n`` vertices at equal arclength spacing along ``curve``.

    Open curves keep both endpoints; closed curves start at vertex 0.
    """
    if n < 3:
        raise CurveError(f"resample needs n >= 3, got {n}")
    L = build_arc_table(curve).length
    if curve.closed:
        s = np.arange(n) * (L / n)
    else:
        s = np.linspace(0.0, L, n)
    pts = _points_at(curve, s)
    if not curve.closed:
        pts[0] = curve.vertices[0]
        pts[-1] = curve.vertices[-1]
    return SampledCurve(pts, curve.closed, curve.meta)


def subdivide(curve: SampledCurve, k: int = 2) -> SampledCurve:
    """Split every edge into ``k`` equal pieces; the polygon is unchanged."""
    v = curve.vertices
    e = curve.edges()
    frac = np.arange(k) / k
    pts = (v[: e.shape[0], None, :] + frac[None, :, None] * e[:, None, :]).reshape(-1, 3)
    if not curve.closed:
        pts = np.vstack([pts, v[-1:]])
    return SampledCurve(pts, curve.closed, curve.meta)


# -- minimum enclosing ball (Welzl, move-to-front free iterative form) ------

def _ball_two(a, b):
    c = 0.5 * (a + b)
    return c, float(np.linalg.norm(a - c))


def _ball_three(a, b, c):
    ab, ac = b - a, c - a
    n = np.cross(ab, ac)
    nn = float(n @ n)
    scale = max(float(ab @ ab), float(ac @ ac))
    if nn <= 1e-24 * scale * scale:
        # collinear: the diameter ball of the extreme pair
        pairs = [(a, b), (a, c), (b, c)]
        p, q = max(pairs, key=lambda pq: float(np.sum((pq[0] - pq[1]) ** 2)))
        return _ball_two(p, q)
    center = a + (float(ac @ ac) * np.cross(n, ab) + float(ab @ ab) * np.cross(ac, n)) / (2.0 * nn)
    return center, float(np.linalg.norm(a - center))


def _ball_four(a, b, c, d):
    A = 2.0 * np.array([b - a, c - a, d - a])
    rhs = np.array([b @ b - a @ a, c @ c - a @ a, d @ d - a @ a])
    if abs(np.linalg.det(A)) > 1e-14 * np.max(np.abs(A)) ** 3:
        center = np.linalg.solve(A, rhs)
        return center, float(np.linalg.norm(a - center))
    # coplanar support set: fall back on the best 3-point ball holding all four
    pts = [a, b, c, d]
    best = None
    for skip in range(4):
        tri = [p for k, p in enumerate(pts) if k != skip]
        cen, r = _ball_three(*tri)
        if np.linalg.norm(pts[skip] - cen) <= r * (1 + 1e-12) and (best is None or r < best[1]):
            best = (cen, r)
    if best is None:
        best = max((_ball_three(*[p for k, p in enumerate(pts) if k != s]) for s in range(4)),
                   key=lambda cr: cr[1])
    return best


def _ball_of(support):
    if len(support) == 1:
        return support[0].copy(), 0.0
    if len(support) == 2:
        return _ball_two(*support)
    if len(support) == 3:
        return _ball_three(*support)
    return _ball_four(*support)


def _welzl(P, m, support, tol):
    if support:
        c, r = _ball_of(support)
        k = 0
    else:
        c, r = P[0].copy(), 0.0
        k = 1
    while k < m:
        d = np.sqrt(np.sum((P[k:m] - c) ** 2, axis=1))
        out = np.flatnonzero(d > r + tol)
        if out.size == 0:
            break
        k += int(out[0])
        new_support = support + [P[k]]
        if len(new_support) == 4:
            c, r = _ball_of(new_support)
        else:
            c, r = _welzl(P, k, new_support, tol)
        k += 1
    return c, r


def min_enclosing_ball(curve_or_points) -> tuple[np.ndarray, float]:
    """Smallest ball containing every vertex. Returns ``(center, radius)``."""
    if isinstance(curve_or_points, SampledCurve):
        pts = curve_or_points.vertices
    else:
        pts = np.asarray(curve_or_points, dtype=np.float64)
    pts = np.unique(pts, axis=0)
    origin = pts.mean(axis=0)
    P = pts - origin
    # fixed permutation keeps results reproducible
    P = P[np.random.default_rng(0x5EED).permutation(P.shape[0])]
    scale = float(np.max(np.abs(P))) if P.size else 1.0
    tol = 1e-12 * max(scale, 1e-300)
    c, r = _welzl(P, P.shape[0], [], tol)
    # radius from the farthest point guards against tolerance drift
    r = float(np.max(np.sqrt(np.sum((P - c) ** 2, axis=1))))
    return c + origin, r


# -- JSON interchange --------------------------------------------------------

def curve_to_json(curve: SampledCurve) -> dict:
    out = {"closed": curve.closed, "vertices": curve.vertices.tolist()}
    if curve.meta:
        out["meta"] = dict(curve.meta)
    return out


def curve_from_json(obj: Mapping[str, Any]) -> SampledCurve:
    if not isinstance(obj, Mapping):
        raise CurveError("curve JSON must be an object")
    if "vertices" not in obj or "closed" not in obj:
        raise CurveError("curve JSON needs 'closed' and 'vertices' keys")
    if not isinstance(obj["closed"], bool):
        raise CurveError("'closed' must be a boolean")
    verts = obj["vertices"]
    if not isinstance(verts, list) or not all(isinstance(p, list) and len(p) == 3 for p in verts):
        raise CurveError("'vertices' must be an array of [x, y, z] triples")
    meta = obj.get("meta", {})
    if not isinstance(meta, Mapping):
        raise CurveError("'meta' must be an object")
    return SampledCurve(np.array(verts, dtype=np.float64), obj["closed"], meta)


def save_curve(curve: SampledCurve, path) -> None:
    text = json.dumps(curve_to_json(curve), sort_keys=True)
    Path(path).write_text(text + "\n")


def load_curve(path) -> SampledCurve:
    """Read a curve file. Malformed JSON raises CurveError with line/column."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CurveError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return curve_from_json(obj)
