"""Greedy orthogonal least squares feature selection.

Each step scores every remaining candidate by the SOCC of its residual
(after projection onto the already selected, orthogonalised features)
against the orthogonalised centred response, and moves the best one into
the basis. Residuals are carried between steps, so a step only projects
out the vectors added in the previous step.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import EncodedResponse, FeatureBlock, FeatureMatrix
from .linalg import (
    RANK_TOL,
    _needs_second_pass,
    _project_out,
    center_columns,
    gram_schmidt_self,
    orthogonalize_columns,
)

COMPLETE = "complete"
UNDER_SELECTED = "under-selected"

# scores this close to the maximum count as tied, so the lowest index wins
# regardless of which path rounded last
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SelectionStep:
    index: int
    name: str
    gain: float
    cumulative: float


@dataclass
class SelectionReport:
    """Ordered outcome of a greedy run.

    ``elapsed`` holds per-step wall time in seconds, ``total_elapsed`` the
    whole run including set-up. ``dropped`` lists candidates found to be
    linearly dependent on the selected features (or constant).
    """

    steps: list
    method: str
    requested: int
    elapsed: list = field(default_factory=list)
    total_elapsed: float = 0.0
    dropped: list = field(default_factory=list)
    status: str = COMPLETE

    @property
    def indices(self):
        return [s.index for s in self.steps]

    @property
    def names(self):
        return [s.name for s in self.steps]

    @property
    def gains(self):
        return np.array([s.gain for s in self.steps])

    @property
    def criterion(self):
        return self.steps[-1].cumulative if self.steps else 0.0

    def to_dict(self):
        return {
            "method": self.method,
            "steps": [
                {"index": s.index, "name": s.name, "gain": s.gain, "cumulative": s.cumulative}
                for s in self.steps
            ],
            "dropped": list(self.dropped),
            "elapsed_ms": {
                "steps": [1e3 * e for e in self.elapsed],
                "total": 1e3 * self.total_elapsed,
            },
        }


def pick_best(scores):
    """Index of the maximum score, preferring the lowest index among ties.

    ``-inf`` entries are never chosen unless every entry is ``-inf``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    top = scores.max()
    tied = scores >= top - TIE_RTOL * max(abs(top), 1.0)
    return int(np.argmax(tied))


def _check_t(t, n):
    if isinstance(t, bool) or not isinstance(t, (int, np.integer)):
        raise TypeError(f"number of features must be an integer, got {t!r}")
    if not 1 <= t <= n:
        raise ValueError(f"number of features must lie in 1..{n}, got {t}")


def _features(X, names):
    if isinstance(X, FeatureMatrix):
        return X.values, list(names or X.names)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("X must be two-dimensional")
    return X, list(names) if names is not None else [f"x{j}" for j in range(X.shape[1])]


def _response(Y, n_samples):
    M = Y.matrix if isinstance(Y, EncodedResponse) else np.asarray(Y, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    if M.shape[0] != n_samples:
        raise ValueError(f"response has {M.shape[0]} rows, features have {n_samples}")
    return M


def _response_basis(M):
    V = gram_schmidt_self(center_columns(M))
    if len(V) == 0:
        raise ValueError("response is constant; nothing to correlate with")
    return V


def _project_all(C, basis_vecs):
    B = np.column_stack(basis_vecs)
    nb = np.einsum("ij,ij->j", B, B)
    R = _project_out(C, B, nb)
    redo = _needs_second_pass(R, np.einsum("ij,ij->j", R, R), B, nb)
    if np.any(redo):
        R[:, redo] = _project_out(R[:, redo], B, nb)
    return R


def _join(basis_vecs, w):
    # keep the basis orthogonal to working precision before it is reused
    if basis_vecs:
        B = np.column_stack(basis_vecs)
        nb = np.einsum("ij,ij->j", B, B)
        ww = np.einsum("ij,ij->j", w, w)
        if np.any(_needs_second_pass(w, ww, B, nb)):
            w = _project_out(w, B, nb)
    basis_vecs.extend(w.T.copy())
    return w


def _greedy_columns(X, M, t, names, method, recompute, rank_tol):
    t_start = time.perf_counter()
    n = X.shape[1]
    _check_t(t, n)
    V = _response_basis(M)
    Xc = center_columns(X).values
    orig = np.einsum("ij,ij->j", Xc, Xc)
    R = Xc.copy()
    r_sq = orig.copy()
    remaining = np.ones(n, dtype=bool)
    flagged = np.zeros(n, dtype=bool)
    basis_vecs = []
    steps, elapsed = [], []
    status = COMPLETE
    cumulative = 0.0

    for k in range(t):
        t0 = time.perf_counter()
        dead = (orig == 0.0) | (r_sq < rank_tol ** 2 * orig)
        flagged |= dead & remaining
        eligible = remaining & ~dead
        if not eligible.any():
            status = UNDER_SELECTED
            break
        # whole-matrix products avoid copying the residuals through fancy indexing
        proj = V.vectors.T @ R
        with np.errstate(invalid="ignore", divide="ignore"):
            scores = np.einsum("ij,ij->j", proj / V.sq_norms[:, None], proj) / r_sq
        scores[~eligible] = -np.inf
        best = pick_best(scores)
        gain = float(scores[best])
        cumulative += gain
        steps.append(SelectionStep(best, names[best], gain, cumulative))
        remaining[best] = False

        if k + 1 < t:
            w = _join(basis_vecs, R[:, best:best + 1])
            if recompute:
                rest = np.flatnonzero(remaining)
                R[:, rest] = _project_all(Xc[:, rest], basis_vecs)
            else:
                coef = (w[:, 0] @ Xc) / (w[:, 0] @ w[:, 0])
                R -= np.outer(w[:, 0], coef)
            r_sq = np.einsum("ij,ij->j", R, R)
        elapsed.append(time.perf_counter() - t0)

    return SelectionReport(
        steps, method, t, elapsed, time.perf_counter() - t_start,
        sorted(np.flatnonzero(flagged).tolist()), status,
    )


def select_binomial(X, y, t, names=None, recompute=False, rank_tol=RANK_TOL):
    """Greedy OLS selection of ``t`` features for a two-class response.

    Parameters
    ----------
    X : FeatureMatrix or array-like of shape (N, n)
    y : EncodedResponse or array-like of shape (N,)
        Any two distinct values; the selection does not depend on them.
    t : int
        Number of features to select, ``1 <= t <= n``.
    recompute : bool
        Re-orthogonalise every candidate against the whole basis at each
        step instead of updating residuals in place. Slower; meant for
        numerical comparison.

    Returns
    -------
    SelectionReport
    """
    values, names = _features(X, names)
    M = _response(y, values.shape[0])
    if M.shape[1] != 1:
        raise ValueError(f"binomial selection needs a single response column, got {M.shape[1]}")
    return _greedy_columns(values, M, t, names, "ols", recompute, rank_tol)


def select_multinomial(X, Y, t, names=None, recompute=False, rank_tol=RANK_TOL):
    """Greedy OLS selection of ``t`` features against a dummy-encoded response matrix.

    The per-step gain is the squared multiple correlation of the candidate
    residual with the orthogonalised response, so the cumulative criterion
    equals the sum of squared canonical correlations of the selected set.
    """
    values, names = _features(X, names)
    M = _response(Y, values.shape[0])
    return _greedy_columns(values, M, t, names, "ols", recompute, rank_tol)


def _block_arrays(blocks, n_samples):
    out = []
    for b in blocks:
        a = b.columns if isinstance(b, FeatureBlock) else np.asarray(b, dtype=np.float64)
        if a.ndim == 1:
            a = a[:, None]
        if a.shape[0] != n_samples:
            raise ValueError(f"block has {a.shape[0]} rows, response has {n_samples}")
        out.append(np.asarray(a, dtype=np.float64))
    return out


def select_categorical(blocks, Y, t, names=None, recompute=False, rank_tol=RANK_TOL,
                       method="olsd"):
    """Greedy OLS selection over matrix-encoded features.

    Each candidate is a block of columns (a numeric feature is a width-1
    block). A block's residual has its own columns orthogonalised against
    each other before scoring, and its score is the double sum of SOCCs
    over block columns and response basis vectors. All surviving columns of
    the winning block join the basis.
    """
    if isinstance(Y, EncodedResponse):
        n_samples = Y.matrix.shape[0]
    else:
        n_samples = np.asarray(Y).shape[0]
    arrays = _block_arrays(blocks, n_samples)
    n = len(arrays)
    if names is None:
        names = [f"x{getattr(b, 'source', j)}" for j, b in enumerate(blocks)]
    names = list(names)
    t_start = time.perf_counter()
    _check_t(t, n)
    M = _response(Y, n_samples)
    V = _response_basis(M)

    centred = [center_columns(a).values for a in arrays]
    orig = [np.einsum("ij,ij->j", B, B) for B in centred]
    resid = [B.copy() for B in centred]
    remaining = np.ones(n, dtype=bool)
    flagged = np.zeros(n, dtype=bool)
    basis_vecs = []
    steps, elapsed = [], []
    status = COMPLETE
    cumulative = 0.0

    for _ in range(t):
        t0 = time.perf_counter()
        scores = np.full(n, -np.inf)
        winners = {}
        for i in np.flatnonzero(remaining):
            W, ww, dead = orthogonalize_columns(resid[i], orig[i], rank_tol=rank_tol)
            if np.all(dead):
                flagged[i] = True
                continue
            live = ~dead
            proj = V.vectors.T @ W[:, live]
            scores[i] = float(np.sum(proj * proj / (V.sq_norms[:, None] * ww[live][None, :])))
            winners[i] = W[:, live]
        if not winners:
            status = UNDER_SELECTED
            break
        best = pick_best(scores)
        gain = float(scores[best])
        cumulative += gain
        steps.append(SelectionStep(best, names[best], gain, cumulative))
        remaining[best] = False

        Wnew = _join(basis_vecs, winners[best])
        nn = np.einsum("ij,ij->j", Wnew, Wnew)
        for i in np.flatnonzero(remaining):
            if recompute:
                resid[i] = _project_all(centred[i], basis_vecs)
            else:
                coef = (Wnew.T @ centred[i]) / nn[:, None]
                resid[i] = resid[i] - Wnew @ coef
        elapsed.append(time.perf_counter() - t0)

    return SelectionReport(
        steps, method, t, elapsed, time.perf_counter() - t_start,
        sorted(np.flatnonzero(flagged).tolist()), status,
    )
