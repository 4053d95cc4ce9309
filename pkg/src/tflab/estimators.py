"""scikit-learn style wrappers around the fit/transform-shaped parts of the lab.

Signals are rows of a complex array of shape (n_signals, n); the grid length
``n`` is learned from ``X`` in ``fit``.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import TFLabError, check_power_of_two, check_signal_batch
from .gabor import CoefArray, GaborSystem, analysis, dual_window, frame_bounds, parse_lattice, synthesis
from .grid import SampledSignal, make_grid
from .ops import localization_matrix, tau_quantization_matrix
from .spectral import DEFAULT_FLOOR, DEFAULT_GAMMA_GRID, fit_envelope, hermitian_eig
from .specs import parse_symbol, parse_window


class GaborTransformer(TransformerMixin, BaseEstimator):
    """Gabor analysis on a lattice; ``inverse_transform`` synthesizes with the canonical dual."""

    def __init__(self, window="gauss", lattice="lat:a=4,b=4", L=None):
        self.window = window
        self.lattice = lattice
        self.L = L

    def fit(self, X, y=None):
        X = check_signal_batch(X)
        n = check_power_of_two(X.shape[1])
        self.grid_ = make_grid(n, self.L)
        self.system_ = GaborSystem(parse_window(self.window, self.grid_), parse_lattice(self.lattice, self.grid_))
        self.frame_bounds_ = frame_bounds(self.system_)
        self.dual_window_ = dual_window(self.system_)
        self.n_features_in_ = n
        return self

    def transform(self, X):
        check_is_fitted(self, "system_")
        X = check_signal_batch(X, self.n_features_in_)
        return np.stack([analysis(SampledSignal(self.grid_, row), self.system_).values.ravel() for row in X])

    def inverse_transform(self, C):
        check_is_fitted(self, "system_")
        lat = self.system_.lattice
        C = np.atleast_2d(np.asarray(C, dtype=complex))
        if C.shape[1] != np.prod(lat.shape):
            raise TFLabError(f"expected {np.prod(lat.shape)} coefficients per row, got {C.shape[1]}")
        out = [synthesis(CoefArray(lat, row.reshape(lat.shape)), self.dual_window_).samples for row in C]
        return np.stack(out)


class LocalizationOperatorEstimator(TransformerMixin, BaseEstimator):
    """Eigen-decomposes a localization operator (or Op_tau when ``tau`` is set).

    ``transform`` returns the L2 coordinates of signals in the leading
    eigenvectors, ``inverse_transform`` maps them back and ``predict`` applies
    the operator itself.
    """

    def __init__(self, symbol="gauss2d:sx=1,sw=1", phi1="gauss", phi2="gauss",
                 tau=None, n_components=6, L=None):
        self.symbol = symbol
        self.phi1 = phi1
        self.phi2 = phi2
        self.tau = tau
        self.n_components = n_components
        self.L = L

    def fit(self, X, y=None):
        X = check_signal_batch(X)
        n = check_power_of_two(X.shape[1])
        grid = make_grid(n, self.L)
        sigma = parse_symbol(self.symbol)
        if self.tau is None:
            op = localization_matrix(sigma, parse_window(self.phi1, grid), parse_window(self.phi2, grid))
        else:
            op = tau_quantization_matrix(sigma, self.tau, grid)
        if not 1 <= self.n_components <= n:
            raise TFLabError(f"n_components must lie in [1, {n}], got {self.n_components}")
        pairs = hermitian_eig(op)[: self.n_components]
        self.grid_ = grid
        self.operator_ = op
        self.eigenvalues_ = np.array([p.value for p in pairs])
        self.components_ = np.stack([p.vector.samples for p in pairs])
        self.n_features_in_ = n
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_signal_batch(X, self.n_features_in_)
        return self.grid_.dx * X @ self.components_.conj().T

    def inverse_transform(self, C):
        check_is_fitted(self, "components_")
        return np.atleast_2d(np.asarray(C, dtype=complex)) @ self.components_

    def predict(self, X):
        check_is_fitted(self, "operator_")
        X = check_signal_batch(X, self.n_features_in_)
        return X @ self.operator_.action_matrix().T


class DecayEnvelopeRegressor(RegressorMixin, BaseEstimator):
    """Fits ``|y| ~ C exp(-k |r|^(1/gamma))`` with gamma chosen from ``gamma_grid``.

    ``score`` is the R^2 of the log-envelope, matching ``r2_``.
    """

    def __init__(self, gamma_grid=DEFAULT_GAMMA_GRID, floor=DEFAULT_FLOOR, r_min=0.0):
        self.gamma_grid = gamma_grid
        self.floor = floor
        self.r_min = r_min

    def fit(self, X, y):
        r = self._radii(X)
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != r.shape[0]:
            raise TFLabError(f"X has {r.shape[0]} rows but y has {y.shape[0]} values")
        fit = fit_envelope(r, y, tuple(self.gamma_grid), self.floor, self.r_min)
        self.fit_ = fit
        self.gamma_hat_, self.k_hat_, self.logC_, self.r2_ = fit.gamma_hat, fit.k_hat, fit.logC, fit.r2
        self.decaying_ = fit.decaying
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        r = self._radii(X)
        return np.exp(self.logC_ - self.k_hat_ * r ** (1.0 / self.gamma_hat_))

    def score(self, X, y, sample_weight=None):
        check_is_fitted(self, "fit_")
        r = self._radii(X)
        y = np.abs(np.asarray(y, dtype=float).ravel())
        keep = (y > self.floor * y.max()) & (r > self.r_min)
        logy = np.log(y[keep])
        resid = logy - np.log(self.predict(r[keep]))
        tss = float(np.sum((logy - logy.mean()) ** 2))
        return 1.0 - float(np.sum(resid**2)) / tss if tss > 0 else 0.0

    @staticmethod
    def _radii(X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise TFLabError(f"expected one feature (the radius), got {X.shape[1]}")
            X = X[:, 0]
        if X.ndim != 1 or not np.all(np.isfinite(X)):
            raise TFLabError("radii must be a finite 1-D array or an (n, 1) column")
        return np.abs(X)
