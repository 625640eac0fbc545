"""Randomised cross-checks between the OLS quantities and their definitions."""

from typing import NamedTuple

import numpy as np

from .dataset import encode_response_multinomial
from .linalg import center_columns
from .oracle import cca_eigen, lda_fisher, multiple_correlation_definition, ols_intercept_check
from .socc import canonical_sq_sum_via_socc, multiple_correlation_sq_via_socc

TOLERANCES = {
    "multiple-correlation": 1e-8,
    "canonical-correlation": 1e-8,
    "lda-fisher": 1e-6,
    "intercept": 1e-9,
}

DESCRIPTIONS = {
    "multiple-correlation": "sum of SOCCs vs normal-equation R^2",
    "canonical-correlation": "double sum of SOCCs vs CCA eigenvalue sum",
    "lda-fisher": "LDA criteria vs R^2/(1-R^2) of canonical correlations (relative)",
    "intercept": "intercepted least squares vs centred solution",
}


class IdentityResult(NamedTuple):
    name: str
    max_discrepancy: float
    tolerance: float
    instances: int

    @property
    def passed(self):
        return bool(self.max_discrepancy <= self.tolerance)


def _design(rng, N, n, degenerate):
    scales = np.exp(rng.normal(0.0, 0.5, size=n))
    X = rng.standard_normal((N, n)) * scales + rng.normal(0.0, 2.0, size=n)
    if degenerate:
        X = np.hstack([X, X[:, :1]])
    return X


def _labels(rng, N, c):
    # every class present at least twice
    base = np.repeat(np.arange(c), 2)
    return rng.permutation(np.concatenate([base, rng.integers(0, c, size=N - base.size)]))


def check_multiple_correlation(trials, seed=0, max_n=10, max_N=50, degenerate=False):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, max_n + 1))
        N = int(rng.integers(n + 3, max(n + 4, max_N + 1)))
        X = _design(rng, N, n, degenerate)
        y = X[:, : min(2, n)] @ rng.normal(size=min(2, n)) + rng.standard_normal(N)
        Xc = center_columns(X)
        yc = y - y.mean()
        a = multiple_correlation_sq_via_socc(Xc, yc)
        b = multiple_correlation_definition(Xc, yc, pseudo=degenerate)
        worst = max(worst, abs(a - b))
    return IdentityResult("multiple-correlation", worst, TOLERANCES["multiple-correlation"], trials)


def check_canonical_correlation(trials, seed=0, max_n=10, max_m=4, max_N=50, degenerate=False):
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(1, max_m + 1))
        N = int(rng.integers(n + m + 3, max(n + m + 4, max_N + 1)))
        X = _design(rng, N, n, degenerate)
        Y = X[:, : min(2, n)] @ rng.normal(size=(min(2, n), m)) + rng.standard_normal((N, m))
        a = canonical_sq_sum_via_socc(center_columns(X), center_columns(Y))
        b = cca_eigen(X, Y, pseudo=degenerate).eigenvalues.sum()
        worst = max(worst, abs(a - b))
    return IdentityResult("canonical-correlation", worst, TOLERANCES["canonical-correlation"], trials)


def check_lda_fisher(trials, seed=0, max_n=10, max_m=4, max_N=50, degenerate=False):
    """Compare Fisher's criteria with canonical correlations of c-1 dummy labels.

    The discrepancy is ``|J - R^2/(1-R^2)| / max(1, |J|)`` after sorting
    both in descending order.
    """
    rng = np.random.default_rng(seed + 2)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, max_n + 1))
        c = int(rng.integers(2, max_m + 2))
        N = int(rng.integers(n + 2 * c + 2, max(n + 2 * c + 3, max_N + 1)))
        labels = _labels(rng, N, c)
        X = _design(rng, N, n, False)
        X[:, 0] += 0.8 * labels
        if degenerate:
            # duplicate after the shift, or the label vector enters span(X)
            X = np.hstack([X, X[:, :1]])
        J = lda_fisher(X, labels, pseudo=degenerate).fisher_criteria
        Y = encode_response_multinomial(labels).matrix
        R2 = cca_eigen(X, Y, pseudo=degenerate).eigenvalues
        k = min(J.size, R2.size)
        with np.errstate(divide="ignore"):
            mapped = R2[:k] / (1.0 - R2[:k])
        gap = np.abs(J[:k] - mapped) / np.maximum(1.0, np.abs(J[:k]))
        worst = max(worst, float(gap.max(initial=0.0)))
    return IdentityResult("lda-fisher", worst, TOLERANCES["lda-fisher"], trials)


def check_intercept(trials, seed=0, max_n=10, max_N=50, degenerate=False):
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, max_n + 1))
        N = int(rng.integers(n + 3, max(n + 4, max_N + 1)))
        X = _design(rng, N, n, degenerate)
        y = 3.0 + X @ rng.normal(size=X.shape[1]) + rng.standard_normal(N)
        worst = max(worst, ols_intercept_check(X, y, pseudo=degenerate).max_discrepancy)
    return IdentityResult("intercept", worst, TOLERANCES["intercept"], trials)


def run_all(trials=200, seed=0, max_n=10, max_m=4, degenerate=False):
    return [
        check_multiple_correlation(trials, seed, max_n, degenerate=degenerate),
        check_canonical_correlation(trials, seed, max_n, max_m, degenerate=degenerate),
        check_lda_fisher(trials, seed, max_n, max_m, degenerate=degenerate),
        check_intercept(trials, seed, max_n, degenerate=degenerate),
    ]
