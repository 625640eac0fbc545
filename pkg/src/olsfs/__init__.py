"""Fast greedy feature selection by orthogonal least squares."""

from .dataset import (
    DataError,
    EncodedResponse,
    FeatureBlock,
    FeatureMatrix,
    discretize,
    encode_feature_categorical,
    encode_response_binomial,
    encode_response_multinomial,
    feature_blocks,
    load_csv,
)
from .estimator import OLSFeatureSelector
from .linalg import center_columns, gram_schmidt_self, orthogonalize_against, pearson
from .oracle import (
    cca_eigen,
    definition_greedy_select,
    exhaustive_select,
    lda_fisher,
    multiple_correlation_definition,
    ols_intercept_check,
)
from .selector import SelectionReport, select_binomial, select_categorical, select_multinomial
from .socc import (
    canonical_sq_sum_via_socc,
    err_traditional,
    multiple_correlation_sq_via_socc,
    socc_block,
    socc_matrix,
    socc_vector,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "EncodedResponse",
    "FeatureBlock",
    "FeatureMatrix",
    "OLSFeatureSelector",
    "SelectionReport",
    "canonical_sq_sum_via_socc",
    "cca_eigen",
    "center_columns",
    "definition_greedy_select",
    "discretize",
    "encode_feature_categorical",
    "encode_response_binomial",
    "encode_response_multinomial",
    "err_traditional",
    "exhaustive_select",
    "feature_blocks",
    "gram_schmidt_self",
    "lda_fisher",
    "load_csv",
    "multiple_correlation_definition",
    "multiple_correlation_sq_via_socc",
    "ols_intercept_check",
    "orthogonalize_against",
    "pearson",
    "select_binomial",
    "select_categorical",
    "select_multinomial",
    "socc_block",
    "socc_matrix",
    "socc_vector",
]
