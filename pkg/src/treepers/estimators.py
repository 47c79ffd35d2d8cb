"""scikit-learn adapters.

Rows of ``X`` are sampled fields on a path graph over ``[0, 1]`` (all rows
share the grid).  The transformers only wrap the functional API, so they fit
into pipelines and grid searches without owning any of the computation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._errors import InvalidInputError
from .barcode import barcode_from_field, pers_p, persistence_index
from .domain import ScalarField, path_graph
from .tree import build_merge_tree


def _fields(X) -> list[ScalarField]:
    X = check_array(X, dtype=float)
    if X.shape[1] < 2:
        raise InvalidInputError("fields need at least two samples")
    g = path_graph(X.shape[1], 1.0 / (X.shape[1] - 1))
    return [ScalarField(g, row) for row in X]


class BarcodeTransformer(TransformerMixin, BaseEstimator):
    """Map each field to its H0 superlevel barcode (a list of ``Diagram``)."""

    def __init__(self, method="tree"):
        self.method = method

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return [barcode_from_field(f, self.method) for f in _fields(X)]


class PersistenceNorms(TransformerMixin, BaseEstimator):
    """Features ``Pers_p`` of each field's barcode for every ``p`` in ``ps``."""

    def __init__(self, ps=(1.0, 2.0, np.inf)):
        self.ps = ps

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        self.ps_ = tuple(float(p) for p in self.ps)
        if not self.ps_ or min(self.ps_) < 1:
            raise InvalidInputError("every p must be >= 1")
        return self

    def transform(self, X):
        check_is_fitted(self, "ps_")
        out = [[pers_p(barcode_from_field(f), p) for p in self.ps_] for f in _fields(X)]
        return np.array(out, dtype=float)


class PersistenceIndexEstimator(BaseEstimator):
    """Fractal index of each field from the leaf counts of its trimmed tree.

    ``fit`` stores the per-row estimates; ``index_`` is their median and
    ``estimates_`` keeps the full regression records.
    """

    def __init__(self, eps_grid=None):
        self.eps_grid = eps_grid

    def fit(self, X, y=None):
        fields = _fields(X)
        self.n_features_in_ = len(fields[0])
        self.estimates_ = [persistence_index(build_merge_tree(f), self.eps_grid)
                           for f in fields]
        self.index_ = float(np.median([e.index for e in self.estimates_]))
        return self

    def transform(self, X):
        check_is_fitted(self, "estimates_")
        return np.array([[persistence_index(build_merge_tree(f), self.eps_grid).index]
                         for f in _fields(X)])

    def fit_transform(self, X, y=None):
        self.fit(X)
        return np.array([[e.index] for e in self.estimates_])
