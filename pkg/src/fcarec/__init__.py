"""Boolean matrix factorization over formal concepts, an SVD baseline, and
user-based kNN collaborative filtering, with an evaluation harness for
MovieLens-format rating data."""

from .bitset import full_mask, indices, mask_from_indices
from .bmf import (
    Factor,
    FactorModel,
    bmf_coverage,
    boolean_rank_bruteforce,
    build_pq,
    enumerate_concepts,
    factorize,
    profile_matrix,
)
from .context import (
    BooleanContext,
    BooleanMatrixPair,
    bool_product,
    derive_attributes,
    derive_objects,
    is_formal_concept,
)
from .dataio import (
    DataFormatError,
    RatingsMatrix,
    load_matrix,
    load_model,
    load_movielens,
    load_split_files,
    save_matrix,
    save_model,
    save_ratings,
    scale,
    split,
)
from .evaluate import (
    EvalReport,
    Prediction,
    PrecisionRecallF1,
    build_profiles,
    coverage_table,
    filter_ratings_by_coverage,
    mae,
    precision_recall_f1,
    run_mae_experiment,
    run_topn_experiment,
)
from .knn import (
    ProfileMatrix,
    cosine_sim,
    nearest_neighbors,
    pearson_sim,
    predict_rating,
    recommend_top_n,
    similarity_matrix,
    user_similarities,
)
from .svd import SvdResult, energy_coverage, factors_for_coverage, svd, user_profiles

__version__ = "0.1.0"

__all__ = [
    "BooleanContext",
    "BooleanMatrixPair",
    "DataFormatError",
    "EvalReport",
    "Factor",
    "FactorModel",
    "Prediction",
    "PrecisionRecallF1",
    "ProfileMatrix",
    "RatingsMatrix",
    "SvdResult",
    "bmf_coverage",
    "bool_product",
    "boolean_rank_bruteforce",
    "build_pq",
    "build_profiles",
    "cosine_sim",
    "coverage_table",
    "derive_attributes",
    "derive_objects",
    "energy_coverage",
    "enumerate_concepts",
    "factorize",
    "factors_for_coverage",
    "filter_ratings_by_coverage",
    "full_mask",
    "indices",
    "is_formal_concept",
    "load_matrix",
    "load_model",
    "load_movielens",
    "load_split_files",
    "mae",
    "mask_from_indices",
    "nearest_neighbors",
    "pearson_sim",
    "precision_recall_f1",
    "predict_rating",
    "profile_matrix",
    "recommend_top_n",
    "run_mae_experiment",
    "run_topn_experiment",
    "save_matrix",
    "save_model",
    "save_ratings",
    "scale",
    "similarity_matrix",
    "split",
    "svd",
    "user_profiles",
    "user_similarities",
]
