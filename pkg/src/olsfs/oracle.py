"""Definition-based reference computations.

Nothing here orthogonalises anything: multiple correlation comes from the
normal equations, canonical correlations from the correlation-matrix
eigenproblem, Fisher's criteria from the scatter-matrix eigenproblem. These
are the independent routes the OLS quantities are checked against, and the
slow baseline the OLS selector is timed against.
"""

import math
import time
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .dataset import EncodedResponse, FeatureBlock, FeatureMatrix
from .linalg import RANK_TOL, CenteredMatrix, DegenerateInputError, pearson
from .selector import COMPLETE, UNDER_SELECTED, SelectionReport, SelectionStep, pick_best

IMAG_TOL = 1e-9
PINV_RTOL = 1e-12
MAX_SUBSETS = 10 ** 6


class SingularMatrixError(ValueError):
    """A Gram, correlation or scatter matrix is singular."""


class CcaResult(NamedTuple):
    eigenvalues: np.ndarray
    directions: np.ndarray
    matrix: np.ndarray

    @property
    def count(self):
        return self.eigenvalues.size


class LdaResult(NamedTuple):
    fisher_criteria: np.ndarray
    S_w: np.ndarray
    S_b: np.ndarray


class InterceptCheck(NamedTuple):
    intercept: float
    coef: np.ndarray
    max_discrepancy: float


def _values(X):
    if isinstance(X, CenteredMatrix):
        X = X.values
    elif isinstance(X, FeatureMatrix):
        X = X.values
    elif isinstance(X, EncodedResponse):
        X = X.matrix
    X = np.asarray(X, dtype=np.float64)
    return X[:, None] if X.ndim == 1 else X


def _centre(X):
    X = _values(X)
    return X - X.mean(axis=0)


def _dependent_columns(A):
    """Indices of columns lying in the span of the columns before them."""
    out = []
    rank = 0
    for j in range(A.shape[1]):
        r = np.linalg.matrix_rank(A[:, : j + 1])
        if r == rank:
            out.append(j)
        rank = r
    return out


def _correlation(A, B):
    # pairwise Pearson coefficients between the columns of A and of B
    Ac = A - A.mean(axis=0)
    Bc = B - B.mean(axis=0)
    na = np.sqrt(np.einsum("ij,ij->j", Ac, Ac))
    nb = np.sqrt(np.einsum("ij,ij->j", Bc, Bc))
    return (Ac.T @ Bc) / np.outer(na, nb)


def _inv(A, pseudo, what):
    # round-off leaves dependent columns with eigenvalues near 1e-15, which a
    # default-tolerance pseudo-inverse would amplify; cut them explicitly
    if pseudo:
        return np.linalg.pinv(A, rtol=PINV_RTOL, hermitian=True)
    if np.linalg.matrix_rank(A) < A.shape[0]:
        bad = _dependent_columns(A)
        raise SingularMatrixError(f"{what} is singular; dependent columns {bad}")
    return np.linalg.inv(A)


def _rank(A, pseudo):
    if pseudo:
        s = np.linalg.svd(A, compute_uv=False)
        return int(np.sum(s > PINV_RTOL * s.max())) if s.size else 0
    return int(np.linalg.matrix_rank(A))


def _real_eigvals(M, what):
    vals, vecs = np.linalg.eig(M)
    if np.any(np.abs(vals.imag) > IMAG_TOL):
        raise SingularMatrixError(
            f"{what} has complex eigenvalues (max |imag| {np.abs(vals.imag).max():.3g})"
        )
    vals = vals.real
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs.real[:, order]


def multiple_correlation_definition(X, y_c, pseudo=False):
    """Squared multiple correlation from the normal equations.

    Solves ``(Xc' Xc) beta = Xc' yc`` and returns ``r(Xc beta, yc)**2``.
    With ``pseudo=True`` a singular Gram matrix is handled by the
    minimum-norm solution instead of raising.
    """
    Xc = _centre(X)
    yc = _centre(y_c)[:, 0]
    G = Xc.T @ Xc
    rhs = Xc.T @ yc
    if np.linalg.matrix_rank(G) < G.shape[0]:
        if not pseudo:
            raise SingularMatrixError(
                f"Gram matrix is singular; dependent columns {_dependent_columns(Xc)}"
            )
        beta = np.linalg.lstsq(Xc, yc, rcond=None)[0]
    else:
        beta = np.linalg.solve(G, rhs)
    y_hat = Xc @ beta
    try:
        return pearson(y_hat, yc) ** 2
    except DegenerateInputError:
        return 0.0


def cca_eigen(X, Y, pseudo=False):
    """Squared canonical correlations from the correlation-matrix eigenproblem.

    Solves ``Rxx^-1 Rxy Ryy^-1 Ryx a = R^2 a`` and keeps the
    ``min(rank X, rank Y)`` largest eigenvalues, clipped to ``[0, 1]``.
    Constant columns make the correlations undefined and raise, unless
    ``pseudo=True``, in which case they are ignored and singular
    correlation matrices are pseudo-inverted.
    """
    A = _values(X)
    B = _values(Y)
    for name, M in (("X", A), ("Y", B)):
        const = np.flatnonzero(np.ptp(M, axis=0) == 0)
        if const.size:
            if not pseudo:
                raise DegenerateInputError(f"{name} has constant columns {const.tolist()}")
    if pseudo:
        A = A[:, np.ptp(A, axis=0) > 0]
        B = B[:, np.ptp(B, axis=0) > 0]
        if A.shape[1] == 0 or B.shape[1] == 0:
            return CcaResult(np.zeros(0), np.zeros((A.shape[1], 0)), np.zeros((0, 0)))
    Rxx = _correlation(A, A)
    Rxy = _correlation(A, B)
    Ryy = _correlation(B, B)
    M = _inv(Rxx, pseudo, "R_XX") @ Rxy @ _inv(Ryy, pseudo, "R_YY") @ Rxy.T
    vals, vecs = _real_eigvals(M, "CCA product matrix")
    keep = min(_rank(Rxx, pseudo), _rank(Ryy, pseudo))
    return CcaResult(np.clip(vals[:keep], 0.0, 1.0), vecs[:, :keep], M)


def _groups(labels):
    labels = list(np.asarray(labels).ravel().tolist())
    classes = []
    for lab in labels:
        if lab not in classes:
            classes.append(lab)
    labels = np.array(labels, dtype=object)
    return classes, [np.flatnonzero(labels == c) for c in classes]


def lda_fisher(X, labels, pseudo=False):
    """Fisher's criteria of linear discriminant analysis.

    Builds the within-class scatter ``S_w`` and between-class scatter
    ``S_b`` and returns the eigenvalues of ``S_w^-1 S_b`` in descending
    order, at most ``c - 1`` of them.
    """
    A = _values(X)
    classes, groups = _groups(labels)
    if len(groups) != len(classes) or any(g.size == 0 for g in groups):
        raise ValueError("every class needs at least one instance")
    if len(labels) != A.shape[0]:
        raise ValueError(f"{len(labels)} labels for {A.shape[0]} instances")
    n = A.shape[1]
    grand = A.mean(axis=0)
    S_w = np.zeros((n, n))
    S_b = np.zeros((n, n))
    for g in groups:
        Xi = A[g]
        mu = Xi.mean(axis=0)
        D = Xi - mu
        S_w += D.T @ D
        d = (mu - grand)[:, None]
        S_b += g.size * (d @ d.T)
    vals, _ = _real_eigvals(_inv(S_w, pseudo, "S_w") @ S_b, "S_w^-1 S_b")
    keep = min(n, len(classes) - 1)
    return LdaResult(np.clip(vals[:keep], 0.0, None), S_w, S_b)


def _definition_criterion(Z, Yc, pseudo=False):
    if Yc.shape[1] == 1:
        return multiple_correlation_definition(Z, Yc[:, 0], pseudo=pseudo)
    return float(cca_eigen(Z, Yc, pseudo=pseudo).eigenvalues.sum())


def _residual_ratio(S, C):
    """Per-column share of ``C`` left unexplained by least squares on ``S``."""
    cc = np.einsum("ij,ij->j", C, C)
    if S.shape[1] == 0:
        return np.where(cc > 0, 1.0, 0.0)
    # form the residual itself: the Gram-matrix shortcut cc - c'S(S'S)^-1 S'c
    # cancels down to round-off level, right where the rank test looks
    R = C - S @ np.linalg.lstsq(S, C, rcond=None)[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.einsum("ij,ij->j", R, R) / cc
    return np.where(cc > 0, ratio, 0.0)


def _batched_scores(S, C, Yc, chunk_elems=1 << 22):
    """Definition-based criterion of ``(S, c)`` for every column ``c`` of ``C``."""
    N, p = S.shape
    q = C.shape[1]
    k = p + 1
    m = Yc.shape[1]
    out = np.empty(q)
    if m > 1:
        Ys = Yc / np.sqrt(np.einsum("ij,ij->j", Yc, Yc))
        Ryy = Ys.T @ Ys
        Ryy_inv_Ryx = np.linalg.solve(Ryy, np.eye(m))
    else:
        yc = Yc[:, 0]
        yy = yc @ yc
    step = max(1, chunk_elems // (N * k))
    for lo in range(0, q, step):
        hi = min(q, lo + step)
        Z = np.empty((hi - lo, N, k))
        Z[:, :, :p] = S
        Z[:, :, p] = C[:, lo:hi].T
        Zt = Z.transpose(0, 2, 1)
        if m == 1:
            G = Zt @ Z
            b = Zt @ yc
            beta = np.linalg.solve(G, b[:, :, None])
            y_hat = (Z @ beta)[:, :, 0]
            num = y_hat @ yc
            den = np.einsum("ij,ij->i", y_hat, y_hat) * yy
            out[lo:hi] = num * num / den
        else:
            norms = np.sqrt(np.einsum("qnk,qnk->qk", Z, Z))
            Zs = Z / norms[:, None, :]
            Rxx = Zs.transpose(0, 2, 1) @ Zs
            Rxy = Zs.transpose(0, 2, 1) @ Ys
            M = np.linalg.solve(Rxx, Rxy @ Ryy_inv_Ryx @ Rxy.transpose(0, 2, 1))
            vals = np.linalg.eigvals(M)
            if np.any(np.abs(vals.imag) > IMAG_TOL):
                raise SingularMatrixError("CCA product matrix has complex eigenvalues")
            vals = -np.sort(-vals.real, axis=1)[:, : min(k, m)]
            out[lo:hi] = np.clip(vals, 0.0, 1.0).sum(axis=1)
    return out


def _candidate_arrays(X):
    """Centred candidates: a list of blocks, or one matrix of single columns."""
    if isinstance(X, (list, tuple)):
        arrays = []
        for b in X:
            a = b.columns if isinstance(b, FeatureBlock) else np.asarray(b, dtype=np.float64)
            a = a[:, None] if a.ndim == 1 else a
            arrays.append(a - a.mean(axis=0))
        return arrays, True
    return _centre(X), False


def definition_greedy_select(X, Y, t, names=None, batched=True, rank_tol=RANK_TOL):
    """Greedy selection scoring each candidate set by its definition.

    At every step each remaining candidate is appended to the selected
    features and the whole criterion is rebuilt from scratch: the squared
    multiple correlation from the normal equations for a single response
    column, otherwise the sum of eigenvalues of the CCA eigenproblem. Ties
    go to the lower index, as in the OLS selector.

    ``X`` is a feature matrix (one candidate per column) or a list of
    blocks. ``batched=True`` evaluates all single-column candidates of a
    step in stacked array operations; ``batched=False`` calls
    :func:`multiple_correlation_definition` / :func:`cca_eigen` once per
    candidate.
    """
    t_start = time.perf_counter()
    Yc = _centre(Y)
    N = Yc.shape[0]
    centred, is_blocks = _candidate_arrays(X)
    n = len(centred) if is_blocks else centred.shape[1]
    if names is None:
        names = list(X.names) if isinstance(X, FeatureMatrix) else [f"x{j}" for j in range(n)]
    if not 1 <= t <= n:
        raise ValueError(f"number of features must lie in 1..{n}, got {t}")
    if is_blocks and any(a.shape[0] != N for a in centred):
        raise ValueError("every block needs one row per response row")
    if not is_blocks and centred.shape[0] != N:
        raise ValueError(f"X has {centred.shape[0]} rows, response has {N}")
    selected = []
    remaining = list(range(n))
    flagged = set()
    steps, elapsed = [], []
    status = COMPLETE
    current = 0.0
    batched = batched and not is_blocks

    for _ in range(t):
        t0 = time.perf_counter()
        if is_blocks:
            S = np.hstack([centred[i] for i in selected]) if selected else np.empty((N, 0))
            alive = [not np.all(_residual_ratio(S, centred[i]) < rank_tol ** 2)
                     for i in remaining]
        else:
            S = centred[:, selected]
            alive = (_residual_ratio(S, centred[:, remaining]) >= rank_tol ** 2).tolist()
        live = [i for i, ok in zip(remaining, alive) if ok]
        flagged.update(i for i, ok in zip(remaining, alive) if not ok)
        if not live:
            status = UNDER_SELECTED
            break
        if batched:
            crit = _batched_scores(S, centred[:, live], Yc)
        elif is_blocks:
            crit = np.array([
                _definition_criterion(np.hstack([S, centred[i]]), Yc, pseudo=True)
                for i in live
            ])
        else:
            crit = np.array([
                _definition_criterion(np.hstack([S, centred[:, i:i + 1]]), Yc) for i in live
            ])
        j = pick_best(crit)
        best = live[j]
        # a saturated criterion can come back a few ulps below the last one
        gain = max(float(crit[j]) - current, 0.0)
        current += gain
        steps.append(SelectionStep(best, names[best], gain, current))
        selected.append(best)
        remaining.remove(best)
        elapsed.append(time.perf_counter() - t0)

    return SelectionReport(
        steps, "definition", t, elapsed, time.perf_counter() - t_start,
        sorted(flagged), status,
    )


def exhaustive_select(X, Y, t, max_subsets=MAX_SUBSETS):
    """Best ``t``-subset by the sum of squared canonical correlations.

    Subsets are enumerated in lexicographic order and only a strictly
    larger criterion replaces the incumbent, so ties keep the
    lexicographically smallest subset.
    """
    Yc = _centre(Y)
    arrays, is_blocks = _candidate_arrays(X)
    if not is_blocks:
        arrays = [arrays[:, j:j + 1] for j in range(arrays.shape[1])]
    n = len(arrays)
    if not 1 <= t <= n:
        raise ValueError(f"number of features must lie in 1..{n}, got {t}")
    total = math.comb(n, t)
    if total > max_subsets:
        raise ValueError(f"C({n}, {t}) = {total} subsets exceeds the limit of {max_subsets}")
    best, best_val = None, -np.inf
    for subset in combinations(range(n), t):
        Z = np.hstack([arrays[i] for i in subset])
        val = _definition_criterion(Z, Yc, pseudo=True)
        if val > best_val:
            best, best_val = subset, val
    return best, float(best_val)


def ols_intercept_check(X, y, pseudo=False):
    """Compare the intercepted least-squares fit with its centred form.

    The direct route solves ``(1, X) [b0, beta] ~ y`` by SVD least squares;
    the centred route solves ``Xc' Xc beta = Xc' yc`` and sets
    ``b0 = mean(y) - mean(X) beta``. Returns the direct estimates and the
    largest absolute disagreement between the two routes (intercept
    identity included). With ``pseudo=True`` a rank-deficient design is
    accepted and the fitted values are compared instead of the
    (non-unique) coefficients.
    """
    A = _values(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    N, n = A.shape
    D = np.hstack([np.ones((N, 1)), A])
    full_rank = np.linalg.matrix_rank(D) == n + 1
    if not full_rank and not pseudo:
        raise SingularMatrixError(
            f"design (1, X) is rank deficient; dependent columns {_dependent_columns(D)}"
        )
    sol = np.linalg.lstsq(D, y, rcond=None)[0]
    b0, beta = float(sol[0]), sol[1:]
    x_bar = A.mean(axis=0)
    y_bar = y.mean()
    Xc = A - x_bar
    yc = y - y_bar
    identity = abs(b0 - (y_bar - x_bar @ beta))
    if full_rank:
        beta_c = np.linalg.solve(Xc.T @ Xc, Xc.T @ yc)
        b0_c = y_bar - x_bar @ beta_c
        gap = max(abs(b0 - b0_c), float(np.max(np.abs(beta - beta_c), initial=0.0)))
    else:
        beta_c = np.linalg.lstsq(Xc, yc, rcond=None)[0]
        fit_direct = D @ sol
        fit_centred = y_bar + Xc @ beta_c
        gap = float(np.max(np.abs(fit_direct - fit_centred)))
    return InterceptCheck(b0, beta, float(max(identity, gap)))
