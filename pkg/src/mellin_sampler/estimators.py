"""scikit-learn wrappers around the lattice series.

``LinKernelFeatures`` maps positive inputs to the shifted lin-kernel basis
``x^{-c} prod_i sinc(T log x_i - k_i)`` for ``k`` in ``[-N/2, N/2]^n``.
``ExponentialSamplingRegressor`` fits the coefficients of that basis by
(optionally ridge-regularised) least squares and exposes the fitted
``LatticeFunction``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .core import LatticeFunction, SpaceParams, lattice_indices, sinc
from .errors import DomainError

__all__ = ["LinKernelFeatures", "ExponentialSamplingRegressor"]


def _positive(X):
    if np.any(X <= 0):
        raise DomainError("inputs must be positive reals")
    return X


def _design(X, keys, T, c):
    logs = np.log(X)
    kern = np.prod(sinc(T * logs[:, None, :] - keys[None, :, :]), axis=2)
    return kern * np.exp(-logs @ c)[:, None]


class LinKernelFeatures(TransformerMixin, BaseEstimator):
    """Lin-kernel features on the lattice ``[-N/2, N/2]^n``.

    Parameters
    ----------
    T : float
        Lattice density; nodes sit at ``e^{k/T}``.
    c : float or sequence of float
        Weight exponent, broadcast over coordinates.
    N : int
        Lattice width.
    """

    def __init__(self, T=1.0, c=0.0, N=10):
        self.T = T
        self.c = c
        self.N = N

    def fit(self, X, y=None):
        X = _positive(validate_data(self, X, dtype=np.float64))
        self.params_ = SpaceParams(X.shape[1], self.c, self.T)
        self.keys_ = lattice_indices(X.shape[1], self.N)
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = _positive(validate_data(self, X, dtype=np.float64, reset=False))
        return _design(X, self.keys_, self.params_.T, self.params_.c_array)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self)
        return np.array(["lin_" + "_".join(str(int(v)) for v in k) for k in self.keys_],
                        dtype=object)


class ExponentialSamplingRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of a lattice series to scattered samples.

    With samples at the lattice nodes themselves the fit is exact
    interpolation; with random samples it is the discrete least-squares
    problem whose stability the frame inequality controls.

    Parameters
    ----------
    T, c, N :
        As for ``LinKernelFeatures``.
    alpha : float, default 0
        Ridge penalty on the weighted amplitudes.
    """

    def __init__(self, T=1.0, c=0.0, N=10, alpha=0.0):
        self.T = T
        self.c = c
        self.N = N
        self.alpha = alpha

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64, y_numeric=True)
        _positive(X)
        params = SpaceParams(X.shape[1], self.c, self.T)
        keys = lattice_indices(X.shape[1], self.N)
        A = _design(X, keys, params.T, params.c_array)
        if self.alpha > 0:
            A = np.vstack([A, np.sqrt(self.alpha) * np.eye(A.shape[1])])
            y = np.concatenate([y, np.zeros(keys.shape[0])])
        amps, _, rank, sv = np.linalg.lstsq(A, y, rcond=None)
        self.coef_ = amps
        self.rank_ = int(rank)
        self.singular_values_ = sv
        self.lattice_function_ = LatticeFunction(
            params, keys=keys, values=amps * np.exp(-(keys @ params.c_array) / params.T))
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = _positive(check_array(X, dtype=np.float64))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return np.real(self.lattice_function_(X))
