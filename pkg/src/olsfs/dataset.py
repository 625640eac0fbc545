"""Tabular loading and the dummy encodings consumed by the selectors."""

import csv
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

BINOMIAL_DUMMY = "binomial-dummy"
C1_DUMMY = "c-1-dummy"

DISCRETIZE_SCHEMES = ("mean-std-4", "mean-std-3")


class DataError(ValueError):
    """Raised for malformed input data (as opposed to bad arguments)."""


@dataclass(frozen=True)
class FeatureMatrix:
    """Instances by features, with per-column names and kinds.

    Categorical columns hold integer codes ``0..K-1`` stored as floats;
    ``categories[j]`` lists the original tokens of column ``j`` in code
    order (empty for numeric columns).
    """

    values: np.ndarray
    names: tuple
    kinds: tuple
    categories: tuple = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError("feature matrix must be two-dimensional")
        n_samples, n_features = values.shape
        if n_samples < 2 or n_features < 1:
            raise DataError(
                f"need at least 2 instances and 1 feature, got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("feature matrix contains NaN or Inf")
        if len(self.names) != n_features or len(self.kinds) != n_features:
            raise DataError("names and kinds must have one entry per column")
        categories = self.categories or tuple(() for _ in range(n_features))
        for j, kind in enumerate(self.kinds):
            if kind not in (NUMERIC, CATEGORICAL):
                raise DataError(f"unknown column kind {kind!r}")
            if kind == CATEGORICAL:
                codes = values[:, j]
                if np.any(codes != np.round(codes)) or codes.min() < 0:
                    raise DataError(f"column {self.names[j]!r} has invalid codes")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "categories", tuple(categories))

    @property
    def N(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    def n_categories(self, j):
        """Category count K of column ``j``."""
        if self.categories[j]:
            return len(self.categories[j])
        return int(self.values[:, j].max()) + 1

    @classmethod
    def from_array(cls, X, names=None, kinds=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        n = X.shape[1]
        names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(n))
        kinds = tuple(kinds) if kinds is not None else (NUMERIC,) * n
        return cls(X, names, kinds)


@dataclass(frozen=True)
class EncodedResponse:
    """Dummy-encoded class labels.

    ``matrix`` is ``N x (c-1)``; the last entry of ``classes`` is the
    reference class, encoded as the all-zero row.
    """

    matrix: np.ndarray
    classes: tuple
    scheme: str

    @property
    def m(self):
        return self.matrix.shape[1]

    def decode(self):
        """Recover one label per row."""
        out = []
        for row in self.matrix:
            hot = np.flatnonzero(row)
            out.append(self.classes[hot[0]] if hot.size else self.classes[-1])
        return out


@dataclass(frozen=True)
class FeatureBlock:
    """Dummy columns encoding one categorical feature."""

    columns: np.ndarray
    source: int

    @property
    def z(self):
        return self.columns.shape[1]


class Discretized(NamedTuple):
    codes: np.ndarray
    n_categories: int
    constant: bool


def _first_appearance(labels):
    classes = []
    seen = set()
    for label in labels:
        if label not in seen:
            seen.add(label)
            classes.append(label)
    return classes


def _as_label_list(labels):
    arr = np.asarray(labels)
    if arr.ndim != 1:
        arr = arr.ravel()
    return arr.tolist()


def encode_response_binomial(labels):
    """Encode exactly two classes as a 0/1 column.

    The first class to appear in ``labels`` maps to 1.

    >>> encode_response_binomial(["B", "A", "B"]).matrix.ravel()
    array([1., 0., 1.])
    """
    labels = _as_label_list(labels)
    classes = _first_appearance(labels)
    if len(classes) != 2:
        raise DataError(f"binomial encoding needs 2 classes, got {len(classes)}")
    col = np.array([1.0 if lab == classes[0] else 0.0 for lab in labels])
    return EncodedResponse(col[:, None], tuple(classes), BINOMIAL_DUMMY)


def encode_response_multinomial(labels):
    """Encode ``c`` classes with the c-1 label dummy scheme.

    Column ``j`` flags class ``j`` in first-appearance order; the last
    class to appear is the reference and gets the all-zero row.
    """
    labels = _as_label_list(labels)
    classes = _first_appearance(labels)
    c = len(classes)
    if c < 2:
        raise DataError("response has a single class")
    index = {cls: k for k, cls in enumerate(classes)}
    Y = np.zeros((len(labels), c - 1))
    for i, lab in enumerate(labels):
        k = index[lab]
        if k < c - 1:
            Y[i, k] = 1.0
    scheme = BINOMIAL_DUMMY if c == 2 else C1_DUMMY
    return EncodedResponse(Y, tuple(classes), scheme)


def encode_feature_categorical(column, K, source=0):
    """Dummy-encode integer codes ``0..K-1`` into ``K-1`` columns.

    The last code is the reference category (all-zero row).
    """
    if K < 2:
        raise DataError(f"categorical feature needs K >= 2, got {K}")
    codes = np.asarray(column)
    if codes.ndim != 1:
        raise DataError("categorical column must be one-dimensional")
    if np.any(codes != np.round(codes)) or codes.min() < 0 or codes.max() >= K:
        raise DataError(f"category codes must lie in 0..{K - 1}")
    codes = codes.astype(np.int64)
    block = (codes[:, None] == np.arange(K - 1)[None, :]).astype(np.float64)
    return FeatureBlock(block, source)


def discretize(column, scheme="mean-std-4"):
    """Bin a numeric column by its sample mean and standard deviation.

    ``mean-std-4`` cuts at ``mu - sigma, mu, mu + sigma`` and
    ``mean-std-3`` at ``mu - sigma, mu + sigma``. A value sitting exactly
    on an edge is assigned to the lower bin. A constant column yields a
    single category with ``constant=True``.
    """
    x = np.asarray(column, dtype=np.float64).ravel()
    if x.size == 0:
        raise DataError("cannot discretize an empty column")
    if scheme not in DISCRETIZE_SCHEMES:
        raise ValueError(f"unknown discretization scheme {scheme!r}")
    mu = x.mean()
    sigma = x.std(ddof=1) if x.size > 1 else 0.0
    if not sigma > 0:
        return Discretized(np.zeros(x.size, dtype=np.int64), 1, True)
    if scheme == "mean-std-4":
        edges = np.array([mu - sigma, mu, mu + sigma])
    else:
        edges = np.array([mu - sigma, mu + sigma])
    codes = np.searchsorted(edges, x, side="left")
    return Discretized(codes.astype(np.int64), edges.size + 1, False)


def load_csv(path, label_column, categorical=(), delimiter=","):
    """Read a headed CSV into a :class:`FeatureMatrix` plus raw labels.

    Parameters
    ----------
    path : str or path-like
        File with a header row and at least two data rows.
    label_column : str
        Name of the class-label column; excluded from the features.
    categorical : sequence of str
        Columns to treat as categorical. Tokens are coded ``0..K-1`` in
        order of first appearance.
    delimiter : str
        Field separator.

    Returns
    -------
    features : FeatureMatrix
    labels : list of str
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DataError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{reader.line_num}: expected {len(header)} fields, "
                    f"got {len(row)}"
                )
            rows.append((reader.line_num, [cell.strip() for cell in row]))

    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not in header")
    unknown = set(categorical) - set(header)
    if unknown:
        raise DataError(f"{path}: unknown categorical columns {sorted(unknown)}")
    if len(rows) < 2:
        raise DataError(f"{path}: fewer than 2 rows")

    label_idx = header.index(label_column)
    labels = [cells[label_idx] for _, cells in rows]
    if len(set(labels)) < 2:
        raise DataError(f"{path}: label column {label_column!r} is constant")

    feature_idx = [j for j in range(len(header)) if j != label_idx]
    names, kinds, cats = [], [], []
    values = np.empty((len(rows), len(feature_idx)))
    for out_j, j in enumerate(feature_idx):
        name = header[j]
        names.append(name)
        if name in categorical:
            tokens = [cells[j] for _, cells in rows]
            levels = _first_appearance(tokens)
            code = {tok: k for k, tok in enumerate(levels)}
            values[:, out_j] = [code[tok] for tok in tokens]
            kinds.append(CATEGORICAL)
            cats.append(tuple(levels))
            continue
        for i, (line, cells) in enumerate(rows):
            try:
                v = float(cells[j])
            except ValueError:
                raise DataError(
                    f"{path}:{line}: non-numeric value {cells[j]!r} in column {name!r}"
                ) from None
            if not np.isfinite(v):
                raise DataError(f"{path}:{line}: non-finite value in column {name!r}")
            values[i, out_j] = v
        kinds.append(NUMERIC)
        cats.append(())
    return FeatureMatrix(values, tuple(names), tuple(kinds), tuple(cats)), labels


def feature_blocks(features: FeatureMatrix, discretize_scheme=None) -> Sequence:
    """Split a feature matrix into candidate blocks for the block selector.

    Categorical columns become dummy blocks. Numeric columns stay width-1
    unless ``discretize_scheme`` is given, in which case they are binned
    and dummy-encoded too. Constant columns become a single zero column so
    they remain addressable but never score.
    """
    blocks = []
    for j, kind in enumerate(features.kinds):
        col = features.values[:, j]
        if kind == CATEGORICAL:
            K = features.n_categories(j)
            if K < 2:
                blocks.append(FeatureBlock(np.zeros((features.N, 1)), j))
            else:
                blocks.append(encode_feature_categorical(col, K, source=j))
        elif discretize_scheme is not None:
            d = discretize(col, discretize_scheme)
            if d.constant:
                blocks.append(FeatureBlock(np.zeros((features.N, 1)), j))
            else:
                blocks.append(encode_feature_categorical(d.codes, d.n_categories, source=j))
        else:
            blocks.append(FeatureBlock(col[:, None].copy(), j))
    return blocks
