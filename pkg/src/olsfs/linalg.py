"""Centering, unnormalised classical Gram-Schmidt, and Pearson correlation."""

from dataclasses import dataclass, field

import numpy as np

RANK_TOL = 1e-8
ORTHO_TOL = 1e-10


class DegenerateInputError(ValueError):
    """A quantity is undefined for zero-variance input."""


@dataclass(frozen=True)
class CenteredMatrix:
    values: np.ndarray
    means: np.ndarray

    @property
    def shape(self):
        return self.values.shape

    def restore(self):
        return self.values + self.means


@dataclass
class OrthoBasis:
    """Mutually orthogonal columns ``vectors[:, k]`` with their squared norms.

    ``dropped`` holds the input column indices rejected as linearly
    dependent on earlier columns.
    """

    vectors: np.ndarray
    sq_norms: np.ndarray
    dropped: list = field(default_factory=list)

    @classmethod
    def empty(cls, n_samples):
        return cls(np.empty((n_samples, 0)), np.empty(0), [])

    def __len__(self):
        return self.vectors.shape[1]

    @property
    def N(self):
        return self.vectors.shape[0]

    def extend(self, columns):
        """Return a new basis with ``columns`` (already orthogonal) appended."""
        columns = np.asarray(columns, dtype=np.float64).reshape(self.N, -1)
        return OrthoBasis(
            np.hstack([self.vectors, columns]),
            np.concatenate([self.sq_norms, np.einsum("ij,ij->j", columns, columns)]),
            list(self.dropped),
        )


def center_columns(matrix):
    """Subtract each column's sample mean.

    >>> c = center_columns([[1.0], [3.0]])
    >>> c.values.ravel(), c.means.ravel()
    (array([-1.,  1.]), array([2.]))
    """
    A = np.asarray(matrix, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    means = A.mean(axis=0, keepdims=True)
    return CenteredMatrix(A - means, means)


def _as_2d(x):
    if isinstance(x, CenteredMatrix):
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    return x[:, None] if x.ndim == 1 else x


def _project_out(x, vectors, sq_norms):
    # classical Gram-Schmidt: every coefficient uses the unmodified input
    if vectors.shape[1] == 0:
        return x.copy()
    coef = (vectors.T @ x) / sq_norms[:, None]
    return x - vectors @ coef


def _needs_second_pass(r, r_sq, vectors, sq_norms):
    if vectors.shape[1] == 0 or r.shape[1] == 0:
        return np.zeros(r.shape[1], dtype=bool)
    dots = np.abs(vectors.T @ r)
    scale = np.sqrt(np.outer(sq_norms, r_sq))
    return np.any(dots > ORTHO_TOL * scale, axis=0)


def gram_schmidt_self(matrix, rank_tol=RANK_TOL):
    """Unnormalised reduced QR of a (centred) matrix by classical Gram-Schmidt.

    Column ``j`` is replaced by its residual after projection onto every
    previously retained column. A column whose residual squared norm falls
    below ``rank_tol**2`` times its own squared norm is dropped. One extra
    projection pass is applied to a residual that fails the orthogonality
    check, to contain round-off drift.
    """
    A = _as_2d(matrix)
    N, k = A.shape
    vecs = np.empty((N, k))
    norms = np.empty(k)
    dropped = []
    kept = 0
    for j in range(k):
        x = A[:, j:j + 1]
        orig = float(x[:, 0] @ x[:, 0])
        r = _project_out(x, vecs[:, :kept], norms[:kept])
        r_sq = float(r[:, 0] @ r[:, 0])
        if orig == 0.0 or r_sq < rank_tol ** 2 * orig:
            dropped.append(j)
            continue
        if _needs_second_pass(r, np.array([r_sq]), vecs[:, :kept], norms[:kept])[0]:
            r = _project_out(r, vecs[:, :kept], norms[:kept])
            r_sq = float(r[:, 0] @ r[:, 0])
        vecs[:, kept] = r[:, 0]
        norms[kept] = r_sq
        kept += 1
    return OrthoBasis(vecs[:, :kept].copy(), norms[:kept].copy(), dropped)


def orthogonalize_columns(R, orig, degenerate=None, rank_tol=RANK_TOL):
    """Make the columns of ``R`` mutually orthogonal, left to right.

    ``orig`` holds reference squared norms for the degeneracy test; columns
    already flagged in ``degenerate`` are skipped and never used as
    projectors. Returns new ``(R, sq_norms, degenerate)``.
    """
    R = np.array(R, dtype=np.float64)
    r_sq = np.einsum("ij,ij->j", R, R)
    if degenerate is None:
        degenerate = (orig == 0.0) | (r_sq < rank_tol ** 2 * orig)
    degenerate = np.array(degenerate, dtype=bool)
    kept = []
    for g in range(R.shape[1]):
        if degenerate[g]:
            continue
        if kept:
            W = R[:, kept]
            r = _project_out(R[:, g:g + 1], W, r_sq[kept])
            if _needs_second_pass(r, np.einsum("ij,ij->j", r, r), W, r_sq[kept])[0]:
                r = _project_out(r, W, r_sq[kept])
            R[:, g] = r[:, 0]
            r_sq[g] = R[:, g] @ R[:, g]
            if r_sq[g] < rank_tol ** 2 * orig[g]:
                degenerate[g] = True
                continue
        kept.append(g)
    return R, r_sq, degenerate


def orthogonalize_against(candidate, basis, rank_tol=RANK_TOL):
    """Project a centred vector or block onto the orthogonal complement of ``basis``.

    A block (2-D candidate) additionally has its own columns orthogonalised
    against each other, left to right.

    Returns
    -------
    residual : ndarray, same shape as ``candidate``
        Columns flagged as degenerate are zeroed.
    sq_norms : ndarray of shape (z,)
        Residual squared norms (0 for degenerate columns).
    degenerate : ndarray of bool, shape (z,)
        Columns whose residual is negligible relative to the input.
    """
    cand = np.asarray(candidate, dtype=np.float64)
    was_1d = cand.ndim == 1
    X = cand[:, None] if was_1d else cand
    if X.shape[0] != basis.N:
        raise ValueError(
            f"candidate has {X.shape[0]} rows, basis vectors have {basis.N}"
        )
    orig = np.einsum("ij,ij->j", X, X)
    R = _project_out(X, basis.vectors, basis.sq_norms)
    r_sq = np.einsum("ij,ij->j", R, R)
    redo = _needs_second_pass(R, r_sq, basis.vectors, basis.sq_norms)
    if np.any(redo):
        R[:, redo] = _project_out(R[:, redo], basis.vectors, basis.sq_norms)
        r_sq = np.einsum("ij,ij->j", R, R)

    degenerate = (orig == 0.0) | (r_sq < rank_tol ** 2 * orig)
    if X.shape[1] > 1:
        R, r_sq, degenerate = orthogonalize_columns(R, orig, degenerate, rank_tol)
    R[:, degenerate] = 0.0
    r_sq = np.where(degenerate, 0.0, r_sq)
    return (R[:, 0] if was_1d else R), r_sq, degenerate


def pearson(a, b):
    """Sample Pearson correlation of two vectors.

    >>> round(pearson([1, 2, 3, 4], [1, 3, 2, 4]), 12)
    0.8
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError("pearson needs vectors of equal length")
    ac = a - a.mean()
    bc = b - b.mean()
    aa = ac @ ac
    bb = bc @ bc
    if aa == 0.0 or bb == 0.0:
        raise DegenerateInputError("correlation undefined for a zero-variance vector")
    r = (ac @ bc) / np.sqrt(aa * bb)
    return float(np.clip(r, -1.0, 1.0))
