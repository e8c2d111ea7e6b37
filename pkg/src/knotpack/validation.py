"""Input coercion shared by the estimators and the CLI."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .curve import SampledCurve, curve_from_json
from .exceptions import CurveError

__all__ = ["check_curve", "check_curves"]


def check_curve(obj, closed=None, require_closed=False) -> SampledCurve:
    """Turn ``obj`` into a SampledCurve.

    Accepts a SampledCurve, an (n, 3) array-like, or a curve JSON mapping.
    ``closed`` sets the flag for raw arrays (default True).
    """
    if isinstance(obj, SampledCurve):
        curve = obj
    elif isinstance(obj, Mapping):
        curve = curve_from_json(obj)
    else:
        arr = np.asarray(obj, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise CurveError(f"expected an (n, 3) vertex array, got shape {arr.shape}")
        curve = SampledCurve(arr, True if closed is None else bool(closed))
    if require_closed and not curve.closed:
        raise CurveError("a closed curve is required")
    return curve


def check_curves(X, **kw) -> list:
    """Validate a batch. A single curve or a single (n, 3) array is not a batch."""
    if isinstance(X, (SampledCurve, Mapping)):
        raise CurveError("expected a sequence of curves, got a single curve")
    if isinstance(X, np.ndarray) and X.ndim == 2:
        raise CurveError("expected a sequence of curves, got a single (n, 3) array")
    out = []
    for k, item in enumerate(X):
        try:
            out.append(check_curve(item, **kw))
        except CurveError as exc:
            raise CurveError(f"curve {k}: {exc}") from exc
    if not out:
        raise CurveError("empty batch")
    return out
