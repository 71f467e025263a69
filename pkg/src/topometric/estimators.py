"""scikit-learn style wrappers.

Inputs ``X`` are sequences of points (tuples or literals) of the estimator's
space; outputs are float arrays of bracket midpoints, with the exact
brackets available from ``brackets``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .approximation import urysohn
from .functions import parse_function
from .regularity import FunctionFamily, rescale_embedding, theta_data
from .tietze import tietze_extend
from .validation import check_box_union, check_points, check_rational


class _PointFunction(BaseEstimator, TransformerMixin):
    def transform(self, X):
        check_is_fitted(self, "function_")
        return self.predict(X).reshape(-1, 1)

    def predict(self, X):
        check_is_fitted(self, "function_")
        pts = check_points(self.space, X)
        return np.array([float(self.function_.eval(x, self.prec).mid) for x in pts])

    def brackets(self, X):
        check_is_fitted(self, "function_")
        return [self.function_.eval(x, self.prec) for x in check_points(self.space, X)]


class UrysohnFunction(_PointFunction):
    """1-Lipschitz ``f`` with ``f = 0`` on ``F``, ``f = r`` on ``G``, values in ``[0, r]``."""

    def __init__(self, space=None, F=None, G=None, r="1/2", prec=6):
        self.space = space
        self.F = F
        self.G = G
        self.r = r
        self.prec = prec

    def fit(self, X=None, y=None):
        F = check_box_union(self.space, self.F, "F")
        G = check_box_union(self.space, self.G, "G")
        r = check_rational(self.r, "r", positive=True)
        self.function_ = urysohn(self.space, F, G, r, self.prec)
        self.distance_ = self.space.dist_sets(F, G)
        return self


class TietzeExtension(_PointFunction):
    """Continuous ``cprime``-Lipschitz extension of a ``c``-Lipschitz ``f: Y -> [0,1]``."""

    def __init__(self, space=None, Y=None, f=None, c=1, cprime=2, prec=6):
        self.space = space
        self.Y = Y
        self.f = f
        self.c = c
        self.cprime = cprime
        self.prec = prec

    def fit(self, X=None, y=None):
        Y = check_box_union(self.space, self.Y, "Y")
        f = parse_function(self.space, self.f) if isinstance(self.f, str) else self.f
        self.function_ = tietze_extend(self.space, Y, f, check_rational(self.c, "c", positive=True),
                                       check_rational(self.cprime, "cprime", positive=True), self.prec)
        return self


class ThetaEmbedding(BaseEstimator, TransformerMixin):
    """``x -> (f(x))_f`` over a family; ``rescale`` shifts columns to start at 0 on the fitted points."""

    def __init__(self, space=None, family=None, rescale=False, prec=12):
        self.space = space
        self.family = family
        self.rescale = rescale
        self.prec = prec

    def fit(self, X, y=None):
        fam = self.family if isinstance(self.family, FunctionFamily) else FunctionFamily(self.family)
        if not fam.members():
            raise ValueError("empty family")
        pts = check_points(self.space, X)
        data = theta_data(fam, pts, self.prec)
        self.family_ = fam
        self.shifts_ = rescale_embedding(data).shifts if self.rescale else tuple(0 for _ in fam.members())
        self.n_features_out_ = len(fam.members())
        return self

    def transform_exact(self, X):
        check_is_fitted(self, "family_")
        pts = check_points(self.space, X)
        data = theta_data(self.family_, pts, self.prec)
        return [tuple(v - s for v, s in zip(data.images[x], self.shifts_)) for x in pts]

    def transform(self, X):
        return np.array([[float(v) for v in row] for row in self.transform_exact(X)])
