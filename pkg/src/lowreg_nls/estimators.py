"""scikit-learn compatible wrappers.

:class:`NLSIntegrator` is a transformer mapping batches of initial data to the
numerical solution at ``T``; :class:`ConvergenceOrderRegressor` fits
``error ~ C tau^p`` (optionally with a ``|log tau|^q`` factor removed).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field_batch, check_positive, check_tau_ladder
from .experiments import scheme_config
from .filters import CutoffProfile, FilterParams
from .integrators import SCHEMES, BlowUpError, SchemeConfig, Stepper
from .spectral import Grid, fft, ifft


class NLSIntegrator(TransformerMixin, BaseEstimator):
    """Advance initial data ``u0`` to ``T`` with one of the NLS steppers.

    Parameters
    ----------
    d, n, length : grid dimension, points per axis and torus period.
    scheme : one of ``lri-filtered``, ``lri-unfiltered``, ``lie``,
        ``lie-filtered``, ``strang``.
    tau : step size; ``T`` must be a multiple of it.
    K : explicit filter scale.  When ``None`` filtered schemes couple
        ``K = tau^(-alpha/2)``.
    alpha : coupling exponent; ``None`` picks the dimension-optimal value for
        ``lri-filtered`` and ``1`` for ``lie-filtered``.
    chi : ``"smooth"`` or ``"sharp"`` cutoff.
    mu : ``+1`` defocusing, ``-1`` focusing.

    ``transform`` accepts one field or a batch, in physical representation,
    and returns data of the same shape.
    """

    def __init__(self, d=1, n=256, length=2 * np.pi, scheme="lri-filtered", tau=2.0**-6, T=1.0,
                 K=None, alpha=None, chi="smooth", mu=1):
        self.d = d
        self.n = n
        self.length = length
        self.scheme = scheme
        self.tau = tau
        self.T = T
        self.K = K
        self.alpha = alpha
        self.chi = chi
        self.mu = mu

    def _build_config(self) -> SchemeConfig:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        tau = check_positive("tau", self.tau)
        T = float(self.T)
        steps = int(round(T / tau))
        if T < 0 or abs(steps * tau - T) > 1e-9 * max(1.0, T):
            raise ValueError(f"T={T} must be a non-negative multiple of tau={tau}")
        profile = CutoffProfile(self.chi)
        if self.K is not None and self.scheme in ("lri-filtered", "lie-filtered"):
            return SchemeConfig(self.scheme, tau, steps, FilterParams(float(self.K)), self.mu, profile)
        return scheme_config(self.scheme, tau, steps, self.d, self.alpha, profile, self.mu)

    def fit(self, X=None, y=None):
        self.grid_ = Grid(self.d, self.n, self.length)
        self.config_ = self._build_config()
        self.n_features_in_ = self.grid_.size
        if X is not None:
            check_field_batch(X, self.grid_)
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        batch, shape = check_field_batch(X, self.grid_)
        stepper = Stepper(self.grid_, self.config_)
        v = stepper.initialize(fft(batch, self.grid_.d))
        for k in range(1, self.config_.steps + 1):
            v = stepper.step(v)
            if not np.all(np.isfinite(v)):
                raise BlowUpError(k, self.config_.scheme)
        return ifft(v, self.grid_.d).reshape(shape)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "grid_")
        return np.asarray([f"u{i}" for i in range(self.grid_.size)], dtype=object)


class ConvergenceOrderRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``log(e / |log tau|^log_power) = log C + p log tau``.

    After ``fit(taus, errors)``: ``order_`` is ``p``, ``constant_`` is ``C``
    and ``residual_`` the RMS residual in log space.  ``predict`` returns the
    fitted errors.
    """

    def __init__(self, log_power=0.0):
        self.log_power = log_power

    def _features(self, taus):
        t = np.asarray(taus, dtype=float)
        if t.ndim == 2:
            if t.shape[1] != 1:
                raise ValueError("expected a single feature column of step sizes")
            t = t[:, 0]
        return t

    def fit(self, X, y):
        taus = check_tau_ladder(self._features(X))
        errors = np.asarray(y, dtype=float).ravel()
        if errors.shape != taus.shape:
            raise ValueError("taus and errors must have the same length")
        if np.any(errors <= 0) or not np.all(np.isfinite(errors)):
            raise ValueError("errors must be positive and finite")
        target = np.log(errors) - self.log_power * np.log(np.abs(np.log(taus)))
        A = np.vstack([np.log(taus), np.ones_like(taus)]).T
        (slope, intercept), *_ = np.linalg.lstsq(A, target, rcond=None)
        self.order_ = float(slope)
        self.constant_ = float(np.exp(intercept))
        self.residual_ = float(np.sqrt(np.mean((target - A @ np.array([slope, intercept])) ** 2)))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "order_")
        t = self._features(X)
        return self.constant_ * t**self.order_ * np.abs(np.log(t)) ** self.log_power
