from .loss import brute_force_info_nce, info_nce
from .pairs import SCHEMES, PairBatch, PairIndex, build_pairs, pair_index
from .pretrain import (
    ContrastiveConfig,
    ContrastiveModel,
    ValidationReplica,
    finetune,
    load_encoder,
    make_validation_replicas,
    pretrain_contrastive,
    replica_for_epoch,
    replica_loss,
    save_encoder,
)

__all__ = [name for name in dir() if not name.startswith("_")]
