"""Squared orthogonal correlation coefficients and the classical ERR.

The squared orthogonal correlation coefficient (SOCC) of an orthogonalised,
centred regressor ``w`` against a centred response ``y`` is

    h = (y' w)^2 / (w' w * y' y),

i.e. the squared Pearson correlation of ``w`` and ``y``. Summed over an
orthogonal basis of the regressors they give the squared multiple
correlation; double-summed against an orthogonal basis of a response matrix
they give the sum of squared canonical correlations.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import OrthoBasis, _as_2d, gram_schmidt_self

SOCC_SCALAR = "socc_scalar"
SOCC_SUM = "socc_sum"
ERR = "err"


@dataclass(frozen=True)
class CriterionValue:
    value: float
    kind: str
    degenerate: bool = False

    def __float__(self):
        return float(self.value)


def _as_basis(V):
    if isinstance(V, OrthoBasis):
        return V
    return gram_schmidt_self(V)


def socc_vector(w, y_c):
    """SOCC of one zero-mean vector against a zero-mean response vector.

    A zero-norm input scores 0 with ``degenerate=True``.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    y_c = np.asarray(y_c, dtype=np.float64).ravel()
    ww = w @ w
    yy = y_c @ y_c
    if ww == 0.0 or yy == 0.0:
        return CriterionValue(0.0, SOCC_SCALAR, True)
    wy = w @ y_c
    return CriterionValue(float(wy * wy / (ww * yy)), SOCC_SCALAR)


def socc_matrix(w, V_c):
    """Squared multiple correlation of ``w`` with an orthogonal response basis.

    ``V_c`` is an :class:`~olsfs.linalg.OrthoBasis` (or a matrix, which is
    orthogonalised first). The value is ``sum_j (v_j' w)^2 / (w'w v_j'v_j)``.
    """
    V = _as_basis(V_c)
    w = np.asarray(w, dtype=np.float64).ravel()
    ww = w @ w
    if ww == 0.0 or len(V) == 0:
        return CriterionValue(0.0, SOCC_SUM, True)
    proj = V.vectors.T @ w
    return CriterionValue(float(np.sum(proj * proj / V.sq_norms) / ww), SOCC_SUM)


def socc_block(W_block, V_c):
    """Sum of SOCCs over the columns of a column-orthogonal block.

    Zero-norm columns contribute nothing; a block with no usable column is
    degenerate and scores 0.
    """
    V = _as_basis(V_c)
    W = _as_2d(W_block)
    ww = np.einsum("ij,ij->j", W, W)
    live = ww > 0.0
    if not np.any(live) or len(V) == 0:
        return CriterionValue(0.0, SOCC_SUM, True)
    proj = V.vectors.T @ W[:, live]
    h = proj * proj / (V.sq_norms[:, None] * ww[live][None, :])
    return CriterionValue(float(h.sum()), SOCC_SUM)


def err_traditional(X, y):
    """Error reduction ratios of the uncentred design ``(1, X)``.

    Returns ``n + 1`` values; entry 0 belongs to the constant term. Columns
    rejected as linearly dependent get an ERR of 0.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    X = np.asarray(X, dtype=np.float64)
    X = np.empty((y.size, 0)) if X.size == 0 else X.reshape(y.size, -1)
    design = np.hstack([np.ones((y.size, 1)), X])
    basis = gram_schmidt_self(design)
    yy = y @ y
    out = np.zeros(design.shape[1])
    if yy == 0.0:
        return out
    kept = [j for j in range(design.shape[1]) if j not in basis.dropped]
    g = (basis.vectors.T @ y) / basis.sq_norms
    out[kept] = g * g * basis.sq_norms / yy
    return out


def multiple_correlation_sq_via_socc(X, y_c):
    """Squared multiple correlation as the sum of SOCCs of the orthogonalised ``X``."""
    basis = gram_schmidt_self(X)
    y_c = np.asarray(y_c, dtype=np.float64).ravel()
    yy = y_c @ y_c
    if yy == 0.0 or len(basis) == 0:
        return 0.0
    proj = basis.vectors.T @ y_c
    return float(np.sum(proj * proj / basis.sq_norms) / yy)


def canonical_sq_sum_via_socc(X, Y):
    """Sum of squared canonical correlations as the double sum of SOCCs."""
    WX = gram_schmidt_self(X)
    VY = gram_schmidt_self(Y)
    if len(WX) == 0 or len(VY) == 0:
        return 0.0
    proj = VY.vectors.T @ WX.vectors
    return float(np.sum(proj * proj / np.outer(VY.sq_norms, WX.sq_norms)))
