"""Synthetic recovery experiments with logistic responses.

Features are multivariate normal with a Wishart-sampled covariance; the
response depends on a few active features through a binomial or
multinomial logistic model. A trial succeeds when the selector returns
exactly the active set.

Randomness comes from numpy's PCG64. Trial ``k`` of a run with seed ``s``
draws from the stream ``SeedSequence(s, spawn_key=(k,))``, so trials are
independent, reproducible and can run in any order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .dataset import BINOMIAL_DUMMY, C1_DUMMY, EncodedResponse, FeatureMatrix, feature_blocks
from .oracle import definition_greedy_select
from .selector import select_binomial, select_categorical, select_multinomial

BINOMIAL = "binomial"
MULTINOMIAL = "multinomial"
METHODS = ("ols", "olsd", "definition")


@dataclass(frozen=True)
class SyntheticConfig:
    """Generator settings. ``active`` holds 1-based feature indices."""

    N: int = 600
    n: int = 100
    active: tuple = (5, 10, 15)
    coefficients: tuple = ((-2.0, -3.0, 4.0),)
    seed: int = 0
    trials: int = 100
    mode: str = BINOMIAL
    mean_sd: float = 0.1

    def __post_init__(self):
        if len(set(self.active)) != len(self.active):
            raise ValueError("active indices must be distinct")
        if any(not 1 <= a <= self.n for a in self.active):
            raise ValueError(f"active indices must lie in 1..{self.n}")
        for row in self.coefficients:
            if len(row) != len(self.active):
                raise ValueError("each coefficient row needs one entry per active feature")
        if self.mode not in (BINOMIAL, MULTINOMIAL):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == BINOMIAL and len(self.coefficients) != 1:
            raise ValueError("binomial mode takes exactly one coefficient row")

    @classmethod
    def binomial(cls, **kw):
        return cls(**kw)

    @classmethod
    def multinomial(cls, **kw):
        base = dict(N=900, coefficients=((-1.0, -1.0, 1.0), (1.0, -1.0, -1.0)), mode=MULTINOMIAL)
        base.update(kw)
        return cls(**base)

    @property
    def active_index(self):
        return np.asarray(self.active, dtype=np.int64) - 1

    def with_(self, **kw):
        return replace(self, **kw)


def config_from_text(text, base=None):
    """Parse ``key = value`` lines (``#`` comments allowed) into a config."""
    kw = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ("N", "n", "seed", "trials"):
            kw[key] = int(value)
        elif key == "mean_sd":
            kw[key] = float(value)
        elif key == "mode":
            kw[key] = value
        elif key == "active":
            kw[key] = tuple(int(v) for v in value.replace(",", " ").split())
        elif key == "coefficients":
            kw[key] = tuple(
                tuple(float(v) for v in row.replace(",", " ").split())
                for row in value.split(";") if row.strip()
            )
        else:
            raise ValueError(f"unknown config key {key!r}")
    mode = kw.get("mode", base.mode if base else BINOMIAL)
    if base is None:
        base = SyntheticConfig.multinomial() if mode == MULTINOMIAL else SyntheticConfig()
    return replace(base, **kw)


def trial_rng(seed, trial):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def wishart_bartlett(scale_diag, df, rng):
    """Draw ``W ~ Wishart(diag(scale_diag), df)`` by the Bartlett decomposition."""
    d = np.asarray(scale_diag, dtype=np.float64)
    p = d.size
    if df < p:
        raise ValueError(f"Wishart needs df >= dimension, got df={df}, p={p}")
    A = np.zeros((p, p))
    A[np.diag_indices(p)] = np.sqrt(rng.chisquare(df - np.arange(p)))
    rows, cols = np.tril_indices(p, -1)
    A[rows, cols] = rng.standard_normal(rows.size)
    LA = np.sqrt(d)[:, None] * A
    return LA @ LA.T


def gen_features(cfg, rng=None, return_params=False):
    """Sample an ``N x n`` feature matrix.

    The mean entries are normal with standard deviation ``cfg.mean_sd``;
    the covariance is ``Wishart(Sigma_W, N) / N`` with ``Sigma_W`` diagonal
    and its diagonal uniform on (0, 1).
    """
    if cfg.N <= cfg.n:
        raise ValueError(f"need N > n for the Wishart covariance, got N={cfg.N}, n={cfg.n}")
    if rng is None:
        rng = trial_rng(cfg.seed, 0)
    mu = rng.normal(0.0, cfg.mean_sd, size=cfg.n)
    scale = rng.uniform(0.0, 1.0, size=cfg.n)
    cov = wishart_bartlett(scale, cfg.N, rng) / cfg.N
    L = np.linalg.cholesky(cov)
    X = mu + rng.standard_normal((cfg.N, cfg.n)) @ L.T
    fm = FeatureMatrix.from_array(X, names=[f"x{j + 1}" for j in range(cfg.n)])
    if return_params:
        return fm, mu, cov
    return fm


def _values(X):
    return X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)


def linear_predictors(X, cfg):
    """``N x rows`` matrix of the logistic linear terms."""
    A = _values(X)[:, cfg.active_index]
    return A @ np.asarray(cfg.coefficients, dtype=np.float64).T


def binomial_probabilities(X, cfg):
    eta = linear_predictors(X, cfg)[:, 0]
    return 1.0 / (1.0 + np.exp(-eta))


def multinomial_probabilities(X, cfg):
    """Class probabilities with the last class as the baseline of the odds ratios."""
    ratios = np.exp(linear_predictors(X, cfg))
    base = 1.0 / (1.0 + ratios.sum(axis=1))
    return np.column_stack([ratios * base[:, None], base])


def gen_binomial_response(X, cfg, rng=None):
    """Bernoulli draws from the logistic model, encoded as a 0/1 column."""
    if rng is None:
        rng = trial_rng(cfg.seed, 0)
    y = (rng.uniform(size=_values(X).shape[0]) < binomial_probabilities(X, cfg)).astype(float)
    return EncodedResponse(y[:, None], (1, 0), BINOMIAL_DUMMY)


def gen_multinomial_response(X, cfg, rng=None):
    """Categorical draws; the first indicator column is removed.

    Classes are numbered 1..c. With the first column of the one-hot
    matrix removed, class 1 becomes the all-zero reference and is listed
    last in ``classes``.
    """
    if rng is None:
        rng = trial_rng(cfg.seed, 0)
    P = multinomial_probabilities(X, cfg)
    c = P.shape[1]
    u = rng.uniform(size=P.shape[0])
    cls = (u[:, None] >= np.cumsum(P, axis=1)[:, :-1]).sum(axis=1)
    onehot = np.zeros_like(P)
    onehot[np.arange(P.shape[0]), cls] = 1.0
    classes = tuple(range(2, c + 1)) + (1,)
    return EncodedResponse(onehot[:, 1:], classes, C1_DUMMY)


class RecoveryResult(NamedTuple):
    successes: int
    trials: int
    selected: list
    failures: list


def _one_trial(cfg, method, trial):
    rng = trial_rng(cfg.seed, trial)
    X = gen_features(cfg, rng)
    if cfg.mode == BINOMIAL:
        Y = gen_binomial_response(X, cfg, rng)
    else:
        Y = gen_multinomial_response(X, cfg, rng)
    t = len(cfg.active)
    if method == "ols" and cfg.mode == BINOMIAL:
        report = select_binomial(X, Y, t)
    elif method == "ols":
        report = select_multinomial(X, Y, t)
    elif method == "olsd":
        report = select_categorical(feature_blocks(X, "mean-std-4"), Y, t)
    else:
        report = definition_greedy_select(X, Y, t)
    return tuple(i + 1 for i in report.indices)


def run_recovery_trials(cfg, method="ols", threads=1):
    """Repeat generation and selection ``cfg.trials`` times.

    Returns a :class:`RecoveryResult`; ``selected`` holds the 1-based
    selected indices of every trial and ``failures`` the trial numbers
    whose selected set differs from ``cfg.active``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    run = lambda k: _one_trial(cfg, method, k)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            selected = list(pool.map(run, range(cfg.trials)))
    else:
        selected = [run(k) for k in range(cfg.trials)]
    target = set(cfg.active)
    failures = [k for k, s in enumerate(selected) if set(s) != target]
    return RecoveryResult(cfg.trials - len(failures), cfg.trials, selected, failures)
