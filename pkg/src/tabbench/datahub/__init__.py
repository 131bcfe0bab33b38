from .dataset import Column, Dataset, DatasetSchema, SchemaError, load_csv, read_sidecar, write_sidecar
from .openml import (
    DEFAULT_CACHE,
    ChecksumMismatch,
    DatasetNotFound,
    DatasetUnavailable,
    download_to_cache,
    fetch_openml,
    load_cached,
)
from .preprocess import Encoded, FeatureStats, one_hot_matrix, preprocess
from .profile import DatasetProfile, c_score, c_score_matrix, classify_difficulty, difficulty_label, fs_ratio, profile
from .splits import SplitTriple, make_split, make_splits, split_sizes, stable_hash

__all__ = [name for name in dir() if not name.startswith("_")]
