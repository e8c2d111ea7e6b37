"""
scikit-learn wrappers.

``InvariantTransformer`` maps a batch of curves to a feature matrix of
invariants, so curves can go straight into a Pipeline. ``MainTheoremCertifier``
predicts whether acn < 4 E_L kappa is certified for each curve.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bounds import check_main_theorem
from .invariants import InvariantReport, compute_invariants
from .validation import check_curves

__all__ = ["InvariantTransformer", "MainTheoremCertifier"]


class InvariantTransformer(TransformerMixin, BaseEstimator):
    """Curves in, one row of invariants per curve out.

    Parameters
    ----------
    features : tuple of str or None
        Columns to emit, from ``InvariantReport.CSV_FIELDS``. None keeps all.
    refine : bool
        Add Richardson terms to the error estimates.
    workers : int or None
        Threads for the pairwise kernels.
    """

    def __init__(self, features=None, refine=False, workers=None):
        self.features = features
        self.refine = refine
        self.workers = workers

    def fit(self, X, y=None):
        check_curves(X, require_closed=True)
        names = InvariantReport.CSV_FIELDS if self.features is None else tuple(self.features)
        bad = [f for f in names if f not in InvariantReport.CSV_FIELDS]
        if bad:
            raise ValueError(f"unknown feature(s): {', '.join(bad)}")
        self.feature_names_out_ = np.array(names, dtype=object)
        self.n_features_out_ = len(names)
        return self

    def transform(self, X):
        check_is_fitted(self, "feature_names_out_")
        curves = check_curves(X, require_closed=True)
        self.reports_ = [compute_invariants(c, refine=self.refine, workers=self.workers) for c in curves]
        return np.array([[getattr(r, f) for f in self.feature_names_out_] for r in self.reports_],
                        dtype=np.float64)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_out_")
        return self.feature_names_out_.copy()


class MainTheoremCertifier(BaseEstimator):
    """Per-curve certification of acn < c E_L kappa.

    ``constant`` picks the headline form (``"headline"``, c = 4) or the
    assembled constant (``"assembled"``). There is nothing to learn;
    ``fit`` only validates.
    """

    def __init__(self, constant="headline", refine=False, workers=None):
        self.constant = constant
        self.refine = refine
        self.workers = workers

    def _name(self):
        names = {"headline": "main_theorem", "assembled": "main_theorem_assembled"}
        if self.constant not in names:
            raise ValueError(f"constant must be 'headline' or 'assembled', got {self.constant!r}")
        return names[self.constant]

    def fit(self, X, y=None):
        self._name()
        check_curves(X, require_closed=True)
        self.fitted_ = True
        return self

    def certificates(self, X):
        check_is_fitted(self, "fitted_")
        name = self._name()
        out = []
        for c in check_curves(X, require_closed=True):
            certs = check_main_theorem(c, refine=self.refine, workers=self.workers)
            out.append(next(x for x in certs if x.name == name))
        return out

    def decision_function(self, X):
        """Margin left after subtracting the quadrature tolerance."""
        return np.array([c.margin - c.tolerance_used for c in self.certificates(X)])

    def predict(self, X):
        return np.array([c.passed for c in self.certificates(X)], dtype=bool)

    def score(self, X, y=None):
        """Fraction of curves certified (or agreement with ``y`` if given)."""
        pred = self.predict(X)
        if y is None:
            return float(pred.mean())
        return float(np.mean(pred == np.asarray(y, dtype=bool)))
