"""
Shell-label combinatorics for the illumination bound.

A curve seen from a basepoint is cut into M sub-arcs of equal length
eps < 1 and each sub-arc gets the index n of the spherical shell
S[n, n+1] it occupies. Everything after that is counting on strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import SampledCurve, build_arc_table, resample
from .exceptions import PreconditionError
from .invariants import thickness_radius, total_curvature

__all__ = [
    "LabelString",
    "ShellProfile",
    "ExponentFit",
    "beta_bound",
    "shell_labels",
    "shell_profile",
    "count_jumps",
    "count_low_substrings",
    "construct_extremal_string",
    "string_energy",
    "extremal_energy_bound",
    "estimate_shell_exponent",
    "classify_regime",
]

_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LabelString:
    """Shell labels with the sub-arc length and curvature they came from.

    ``weights`` is None for a plain string (every symbol counts once).
    Strings produced by the extremal construction carry real weights
    because the target counts are not integers.
    """

    labels: np.ndarray
    epsilon: float
    kappa: float
    basepoint: np.ndarray = field(default_factory=lambda: np.zeros(3))
    weights: np.ndarray | None = None

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64).ravel()
        if lab.size and lab.min() < 2:
            raise ValueError(f"labels must be >= 2, got {int(lab.min())}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        w = self.weights
        if w is None:
            if lab.size > 1 and np.any(np.abs(np.diff(lab)) > 1):
                k = int(np.argmax(np.abs(np.diff(lab)) > 1))
                raise ValueError(f"labels are not contiguous at position {k}: {lab[k]} -> {lab[k + 1]}")
        else:
            w = np.asarray(w, dtype=np.float64).ravel()
            if w.shape != lab.shape or np.any(w < 0):
                raise ValueError("weights must be non-negative and match labels")
            w.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "basepoint", np.asarray(self.basepoint, dtype=np.float64))

    def __len__(self):
        return self.labels.shape[0]

    def counts(self):
        """Mapping label -> (weighted) number of symbols."""
        w = np.ones(len(self)) if self.weights is None else self.weights
        top = int(self.labels.max()) if len(self) else 1
        phi = np.bincount(self.labels, weights=w, minlength=top + 1)
        return {n: float(phi[n]) for n in range(2, top + 1)}


def beta_bound(n, kappa, epsilon):
    """8 kappa n^{3/2} / eps + 6 n / eps, un-rounded."""
    n = np.asarray(n, dtype=np.float64)
    return 8.0 * kappa * n ** 1.5 / epsilon + 6.0 * n / epsilon


@dataclass(frozen=True)
class ShellProfile:
    phi: dict
    Phi: dict
    beta: dict

    @property
    def violations(self):
        return [n for n in self.Phi if self.Phi[n] >= self.beta[n]]

    @property
    def ok(self):
        return not self.violations


# -- labelling ---------------------------------------------------------------

def _segment_min_distance(P, Q, x0):
    e = Q - P
    ee = np.einsum("ij,ij->i", e, e)
    t = np.clip(np.einsum("ij,ij->i", x0 - P, e) / np.where(ee > 0, ee, 1.0), 0.0, 1.0)
    return np.linalg.norm(P + t[:, None] * e - x0, axis=1)


def shell_labels(curve: SampledCurve, basepoint, M: int) -> LabelString:
    """Cut ``curve`` into ``M`` equal sub-arcs and label each one.

    A sub-arc inside S[n, n+1] gets label n; one that crosses the sphere of
    radius n gets n. Closed curves are read as the arc starting and ending
    at vertex 0.
    """
    x0 = np.asarray(basepoint, dtype=np.float64)
    table = build_arc_table(curve)
    L = table.length
    M = int(M)
    if M <= L:
        raise PreconditionError(f"need M > L so that eps < 1: M={M}, L={L:.6g}")
    V = curve.vertices
    if curve.closed:
        V = np.vstack([V, V[:1]])
    cum = np.concatenate([table.cumulative, [L]]) if curve.closed else table.cumulative
    dist_v = np.linalg.norm(V - x0, axis=1)
    if dist_v.min() < 2.0 * (1 - 1e-12):
        k = int(np.argmin(dist_v))
        raise PreconditionError(f"vertex {k % len(curve)} is at distance {dist_v[k]:.9g} < 2 from the basepoint")
    eps = L / M
    # breakpoints at multiples of eps, merged with the vertices
    cuts = np.arange(1, M) * eps
    s_all = np.union1d(cum, cuts)
    P = np.column_stack([np.interp(s_all, cum, V[:, k]) for k in range(3)])
    d_pts = np.linalg.norm(P - x0, axis=1)
    seg_min = _segment_min_distance(P[:-1], P[1:], x0)
    seg_max = np.maximum(d_pts[:-1], d_pts[1:])
    # sub-arc of each piece, from the piece midpoint
    piece_mid = 0.5 * (s_all[:-1] + s_all[1:])
    owner = np.minimum((piece_mid / eps).astype(np.int64), M - 1)
    dmin = np.full(M, np.inf)
    dmax = np.zeros(M)
    np.minimum.at(dmin, owner, seg_min)
    np.maximum.at(dmax, owner, seg_max)
    if dmin.min() < 2.0 * (1 - 1e-12):
        i = int(np.argmin(dmin))
        raise PreconditionError(f"sub-arc {i} comes within {dmin[i]:.9g} < 2 of the basepoint")
    labels = np.floor(dmin + _BOUNDARY_TOL).astype(np.int64)
    labels = np.maximum(labels, 2)
    crosses = dmax > labels + 1 + _BOUNDARY_TOL
    labels[crosses] += 1
    over = dmax > labels + 1 + _BOUNDARY_TOL
    if np.any(over):
        i = int(np.argmax(over))
        raise AssertionError(f"sub-arc {i} crosses two spheres ({dmin[i]:.6g} .. {dmax[i]:.6g})")
    return LabelString(labels, eps, total_curvature(curve), x0)


def shell_profile(ls: LabelString, top=None) -> ShellProfile:
    """phi, Phi and beta for n = 2 .. top (default: the largest label, but
    never below M + 1 for plain strings)."""
    phi = ls.counts()
    hi = max(phi) if phi else 2
    if top is None:
        top = hi if ls.weights is not None else max(hi, len(ls) + 1)
    ns = range(2, int(top) + 1)
    phi = {n: phi.get(n, 0.0) for n in ns}
    Phi, acc = {}, 0.0
    for n in ns:
        acc += phi[n]
        Phi[n] = acc
    beta = {n: float(beta_bound(n, ls.kappa, ls.epsilon)) for n in ns}
    return ShellProfile(phi, Phi, beta)


# -- string constraints --------------------------------------------------------

def count_jumps(ls_or_labels, n: int) -> int:
    """Largest number of non-overlapping jumps <n .. n+2 .. n>.

    Two jumps may share one endpoint. Greedy by earliest right endpoint.
    """
    if n < 2:
        raise ValueError("jump level must be >= 2")
    labels = ls_or_labels.labels if isinstance(ls_or_labels, LabelString) else ls_or_labels
    count = 0
    have_start = False
    have_peak = False
    for a in np.asarray(labels).tolist():
        if a == n:
            if have_peak:
                count += 1
                have_peak = False
            have_start = True
        elif a == n + 2 and have_start:
            have_peak = True
    return count


def count_low_substrings(ls: LabelString, n: int, shift: int = 0) -> int:
    """Largest number of pairwise disjoint substrings of length
    3(n+1+shift)/eps whose entries are all <= n + shift."""
    q = math.ceil(3.0 * (n + 1 + shift) / ls.epsilon)
    low = np.asarray(ls.labels) <= n + shift
    total = 0
    run = 0
    for flag in low.tolist():
        if flag:
            run += 1
        else:
            total += run // q
            run = 0
    return total + run // q


# -- extremal string -----------------------------------------------------------

def string_energy(ls: LabelString, offset: int = 1) -> float:
    """E(L) = sum over symbols of eps / (label - offset)^2.

    ``offset=1`` is the energy that bounds the illumination of any arc;
    ``offset=0`` is the shell sum used when the distance to the basepoint
    is monotone along the arc.
    """
    w = np.ones(len(ls)) if ls.weights is None else ls.weights
    return float(np.sum(w * ls.epsilon / (ls.labels - float(offset)) ** 2))


def extremal_energy_bound(kappa):
    return 16.0 + 43.0 * kappa


def construct_extremal_string(ls: LabelString, check_steps: bool = False) -> LabelString:
    """Relabel ``ls`` into the energy-maximising string L*.

    Pads with top-level symbols until Phi(M+1) = beta(M+1), then for each
    level m = 2, 3, ... lowers the nearest higher symbols to m until
    Phi(m) = beta(m). Counts are real, so a symbol may be split. With
    ``check_steps`` every elementary move is checked to not lower energy.
    """
    prof = shell_profile(ls)
    if not prof.ok:
        raise PreconditionError(f"Phi(n) >= beta(n) at n = {prof.violations[:5]}")
    top = max(prof.Phi)
    eps, kappa = ls.epsilon, ls.kappa
    # weighted multiset of labels; order is irrelevant to phi and energy
    mass = {n: prof.phi[n] for n in range(2, top + 1)}
    beta = {n: float(beta_bound(n, kappa, eps)) for n in range(2, top + 1)}

    def energy():
        return sum(w * eps / (k - 1.0) ** 2 for k, w in mass.items())

    last = energy()
    mass[top] += beta[top] - prof.Phi[top]
    if check_steps:
        e = energy()
        assert e >= last - 1e-12 * abs(e), "padding lowered the energy"
        last = e
    Phi = 0.0
    for m in range(2, top):
        need = beta[m] - (Phi + mass[m])
        src = m + 1
        while need > 0 and src <= top:
            take = min(need, mass[src])
            if take > 0:
                mass[src] -= take
                mass[m] += take
                need -= take
                if check_steps:
                    e = energy()
                    assert e >= last - 1e-12 * abs(e), f"moving {src} -> {m} lowered the energy"
                    last = e
            src += 1
        Phi += mass[m]
    labels = np.array([k for k in mass if mass[k] > 0], dtype=np.int64)
    weights = np.array([mass[k] for k in labels.tolist()])
    return LabelString(labels, eps, kappa, ls.basepoint, weights)


# -- shell exponent diagnostic -------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    beta_hat: float
    beta_clamped: float
    in_range: bool
    regime: str
    per_point: list

    def to_dict(self):
        return {"beta_hat": self.beta_hat, "beta_clamped": self.beta_clamped,
                "in_range": self.in_range, "regime": self.regime, "per_point": self.per_point}


def classify_regime(beta_hat, band=0.15):
    if beta_hat < 1 - band:
        return "linear"
    if beta_hat <= 1 + band:
        return "log"
    return "power"


def shell_lengths(curve: SampledCurve, x0, step: float = 0.05):
    """Arclength of ``curve`` inside each shell S[n, n+1] about ``x0``,
    by midpoint assignment on a fine resampling. Index n of the result
    holds shell n."""
    L = build_arc_table(curve).length
    fine = resample(curve, max(len(curve), int(math.ceil(L / step)) + 1))
    e = fine.edges()
    mids = fine.vertices[: e.shape[0]] + 0.5 * e
    lens = np.linalg.norm(e, axis=1)
    shell = np.floor(np.linalg.norm(mids - x0, axis=1)).astype(np.int64)
    return np.bincount(shell, weights=lens)


def _fit_slope(lengths, min_shells=3):
    n = np.arange(lengths.shape[0])
    keep = (n >= 1) & (lengths > 0)
    if keep.sum() < min_shells:
        raise PreconditionError(f"only {int(keep.sum())} populated shells, need {min_shells} for a fit")
    x, y = np.log(n[keep]), np.log(lengths[keep])
    A = np.column_stack([x, np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(res[0] / keep.sum())) if res.size else 0.0
    return float(coef[0]), resid, int(keep.sum())


def estimate_shell_exponent(curve: SampledCurve, basepoints: int = 8, seed: int = 0, step: float = 0.05):
    """Fit arclength-per-shell ~ n^beta around points of the curve.

    The curve is rescaled to unit thickness first. Returns an
    :class:`ExponentFit` whose ``per_point`` rows hold the basepoint index,
    slope, rms residual and number of shells used.
    """
    R = thickness_radius(curve)
    unit = curve.transformed(scale=1.0 / R)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(unit), size=min(basepoints, len(unit)), replace=False))
    rows = []
    for i in idx.tolist():
        slope, resid, used = _fit_slope(shell_lengths(unit, unit.vertices[i], step))
        rows.append({"vertex": i, "slope": slope, "residual": resid, "shells": used})
    beta_hat = float(np.mean([r["slope"] for r in rows]))
    clamped = min(max(beta_hat, 0.0), 2.0)
    return ExponentFit(beta_hat, clamped, clamped == beta_hat, classify_regime(clamped), rows)
