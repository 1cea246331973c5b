"""scikit-learn estimators wrapping the selection procedures.

Each selector is a regressor (``fit``/``predict``/``score``) and a
transformer: ``transform`` returns the raw columns of the selected effects,
so a selector can feed a downstream model in a :class:`~sklearn.pipeline.Pipeline`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .criteria import CriterionKind
from .data_gen import Dataset
from .forward import effect_matrix, iform, two_stage_forward
from .lasso import iform_lasso, two_stage_lasso
from .model_space import EffectId


def _names(effects, input_features):
    def name(j):
        return str(input_features[j]) if input_features is not None else f"x{j}"

    return np.array([name(e.j) if e.is_main else f"{name(e.j)} {name(e.k)}" for e in effects], dtype=object)


class _SelectorBase(RegressorMixin, TransformerMixin, BaseEstimator):
    def _criterion(self):
        return CriterionKind(self.criterion, self.gamma_e)

    def _select(self, data):
        raise NotImplementedError

    def fit(self, X, y):
        names = getattr(X, "columns", None)
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        if X.shape[0] < 3:
            raise ValueError("need at least 3 samples")
        self.n_features_in_ = X.shape[1]
        if names is not None:
            self.feature_names_in_ = np.asarray(names, dtype=object)
        self.result_ = self._select(Dataset(X, y))
        self.effects_ = list(self.result_.selected)
        self.coef_ = np.array([self.result_.coefficients[e] for e in self.effects_])
        self.intercept_ = float(self.result_.intercept)
        return self

    def _check_X(self, X):
        check_is_fitted(self, "result_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def predict(self, X):
        X = self._check_X(X)
        return effect_matrix(X, self.effects_) @ self.coef_ + self.intercept_

    def transform(self, X):
        return effect_matrix(self._check_X(X), self.effects_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "result_")
        if input_features is None:
            input_features = getattr(self, "feature_names_in_", None)
        return _names(self.effects_, input_features)

    @property
    def selected_mains_(self):
        check_is_fitted(self, "result_")
        return sorted(self.result_.selected_mains)

    @property
    def selected_interactions_(self):
        check_is_fitted(self, "result_")
        return sorted(self.result_.selected_interactions)


class IFORMRegressor(_SelectorBase):
    """Forward selection with candidates grown under the marginality principle.

    Parameters
    ----------
    criterion : {"ebic", "bic"}
    gamma_e : float
        EBIC strength in [0, 1].
    max_steps : int or None
        Path length cap; ``min(n // 4, 50)`` by default.
    """

    def __init__(self, criterion="ebic", gamma_e=1.0, max_steps=None):
        self.criterion = criterion
        self.gamma_e = gamma_e
        self.max_steps = max_steps

    def _select(self, data):
        return iform(data, self._criterion(), self.max_steps)


class TwoStageForwardRegressor(_SelectorBase):
    """Forward selection of mains, then of interactions among the selected mains."""

    def __init__(self, criterion="ebic", gamma_e=1.0, max_steps_main=None, max_steps_interaction=None):
        self.criterion = criterion
        self.gamma_e = gamma_e
        self.max_steps_main = max_steps_main
        self.max_steps_interaction = max_steps_interaction

    def _select(self, data):
        return two_stage_forward(data, self._criterion(), (self.max_steps_main, self.max_steps_interaction))


class IFORMLassoRegressor(_SelectorBase):
    """LASSO path over a candidate set grown under the marginality principle."""

    def __init__(self, criterion="ebic", gamma_e=1.0, n_lambda=100, max_support=None):
        self.criterion = criterion
        self.gamma_e = gamma_e
        self.n_lambda = n_lambda
        self.max_support = max_support

    def _select(self, data):
        return iform_lasso(data, criterion=self._criterion(), n_lambda=self.n_lambda, max_support=self.max_support)


class TwoStageLassoRegressor(_SelectorBase):
    def __init__(self, criterion="ebic", gamma_e=1.0, n_lambda=100, max_support=None):
        self.criterion = criterion
        self.gamma_e = gamma_e
        self.n_lambda = n_lambda
        self.max_support = max_support

    def _select(self, data):
        return two_stage_lasso(data, criterion=self._criterion(), n_lambda=self.n_lambda, max_support=self.max_support)


class InteractionExpander(TransformerMixin, BaseEstimator):
    """All mains followed by every product ``X_j X_k`` with ``j <= k``.

    Column order is canonical (see :class:`~hierlin.model_space.EffectId`).
    """

    def __init__(self, include_squares=True):
        self.include_squares = include_squares

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        p = X.shape[1]
        self.n_features_in_ = p
        start = 0 if self.include_squares else 1
        self.effects_ = [EffectId(j) for j in range(p)] + [
            EffectId(j, k) for j in range(p) for k in range(j + start, p)
        ]
        return self

    def transform(self, X):
        check_is_fitted(self, "effects_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return effect_matrix(X, self.effects_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "effects_")
        return _names(self.effects_, input_features)
