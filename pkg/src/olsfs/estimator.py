"""scikit-learn compatible front end to the greedy selectors."""

from numbers import Integral

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils._param_validation import Interval, StrOptions
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

from .dataset import (
    CATEGORICAL,
    DISCRETIZE_SCHEMES,
    NUMERIC,
    FeatureMatrix,
    encode_response_multinomial,
    feature_blocks,
)
from .oracle import definition_greedy_select
from .selector import select_categorical, select_multinomial


class OLSFeatureSelector(SelectorMixin, BaseEstimator):
    """Greedy feature selection by squared orthogonal correlation.

    The class labels are dummy encoded (``c - 1`` columns, reference class
    last in order of appearance) and features are added one at a time,
    each step taking the feature whose part orthogonal to the already
    selected ones correlates best with the response. The cumulative score
    of the selected set equals the sum of its squared canonical
    correlations with the encoded labels.

    Parameters
    ----------
    n_features_to_select : int, default=1
        Number of features to keep.

    method : {"ols", "definition"}, default="ols"
        ``"ols"`` uses the orthogonalised fast path; ``"definition"``
        rebuilds the canonical correlations for every candidate set. Both
        give the same selection on inputs without ties.

    categorical_features : array-like of int or None, default=None
        Columns to dummy encode as categorical features. Their distinct
        values are coded in order of first appearance.

    discretize : {"mean-std-4", "mean-std-3"} or None, default=None
        Bin every numeric column by its mean and standard deviation and
        dummy encode the bins.

    Attributes
    ----------
    selected_features_ : ndarray of shape (n_features_to_select,)
        Selected column indices in selection order.

    scores_ : ndarray of shape (n_features_to_select,)
        Criterion gain of each step.

    cumulative_scores_ : ndarray of shape (n_features_to_select,)
        Running sum of ``scores_``.

    report_ : SelectionReport
        Full record of the run.

    classes_ : ndarray
        Class labels in encoding order; the last one is the reference.

    n_features_in_ : int
        Number of features seen during :term:`fit`.

    Examples
    --------
    >>> import numpy as np
    >>> from olsfs import OLSFeatureSelector
    >>> X = np.array([[5.1, 3.5, 1.4, 0.2], [4.9, 3.0, 1.4, 0.2],
    ...               [7.0, 3.2, 4.7, 1.4], [6.4, 3.2, 4.5, 1.5],
    ...               [6.3, 3.3, 6.0, 2.5], [5.8, 2.7, 5.1, 1.9],
    ...               [7.1, 3.0, 5.9, 2.1]])
    >>> y = ["setosa"] * 2 + ["versicolor"] * 2 + ["virginica"] * 3
    >>> sel = OLSFeatureSelector(n_features_to_select=3).fit(X, y)
    >>> sel.selected_features_
    array([2, 3, 1])
    >>> sel.get_support()
    array([False,  True,  True,  True])
    """

    _parameter_constraints = {
        "n_features_to_select": [Interval(Integral, 1, None, closed="left")],
        "method": [StrOptions({"ols", "definition"})],
        "categorical_features": ["array-like", None],
        "discretize": [StrOptions(set(DISCRETIZE_SCHEMES)), None],
    }

    def __init__(
        self,
        n_features_to_select=1,
        *,
        method="ols",
        categorical_features=None,
        discretize=None,
    ):
        self.n_features_to_select = n_features_to_select
        self.method = method
        self.categorical_features = categorical_features
        self.discretize = discretize

    def fit(self, X, y):
        """Run the greedy selection.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features)
        y : array-like of shape (n_samples,)
            Class labels, at least two distinct values.

        Returns
        -------
        self : object
        """
        self._validate_params()
        X, y = validate_data(self, X, y, dtype=np.float64, ensure_min_samples=2)
        check_classification_targets(y)
        n_features = X.shape[1]
        if self.n_features_to_select > n_features:
            raise ValueError(
                f"n_features_to_select={self.n_features_to_select} must be <= "
                f"n_features={n_features}."
            )
        Y = encode_response_multinomial(y)
        self.classes_ = np.asarray(Y.classes)

        cat = np.zeros(n_features, dtype=bool)
        if self.categorical_features is not None:
            idx = np.asarray(self.categorical_features, dtype=np.int64).ravel()
            if idx.size and (idx.min() < 0 or idx.max() >= n_features):
                raise ValueError("categorical_features index out of range")
            cat[idx] = True

        t = int(self.n_features_to_select)
        names = [f"x{j}" for j in range(n_features)]
        if cat.any() or self.discretize is not None:
            values = X.copy()
            for j in np.flatnonzero(cat):
                _, first, codes = np.unique(values[:, j], return_index=True, return_inverse=True)
                order = np.argsort(np.argsort(first))
                values[:, j] = order[codes]
            kinds = [CATEGORICAL if c else NUMERIC for c in cat]
            fm = FeatureMatrix(values, tuple(names), tuple(kinds))
            blocks = feature_blocks(fm, self.discretize)
            if self.method == "ols":
                report = select_categorical(blocks, Y, t, names=names)
            else:
                report = definition_greedy_select(blocks, Y, t, names=names)
        elif self.method == "ols":
            report = select_multinomial(X, Y, t, names=names)
        else:
            report = definition_greedy_select(X, Y, t, names=names)

        self.report_ = report
        self.selected_features_ = np.array(report.indices, dtype=np.int64)
        self.scores_ = report.gains
        self.cumulative_scores_ = np.array([s.cumulative for s in report.steps])
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "selected_features_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.selected_features_] = True
        return mask

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.target_tags.required = True
        return tags
