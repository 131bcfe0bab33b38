from .fill import DONOR_KINDS, FILL_KINDS, FillStrategy, FillTrace, fill, wcr_replace
from .kmeans import ClusterModel, fit_kmeans, kmeans_plus_plus
from .mask import MaskSpec, gen_mask, masked_count
from .strategy import CorruptionStrategy, Corruptor

__all__ = [name for name in dir() if not name.startswith("_")]
