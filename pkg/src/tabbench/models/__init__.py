from .attention import (
    PRESETS,
    AttentionBlock,
    AttentionClassifier,
    AttentionEncoder,
    AttentionStackSpec,
    FeatureAttention,
    FeatureTokenizer,
    MultiHeadSelfAttention,
    SampleAttention,
    attention_forward,
    mhsa_features,
    mhsa_samples,
)
from .mlp import Autoencoder, ClassifierHead, Encoder, EncoderClassifier, MlpSpec, Projector, dnn
from .oom import DEFAULT_BUDGET_BYTES, MemoryVerdict, attention_counts, estimate_bytes, mlp_counts, oom_guard
from .train import (
    BATCH_SIZE,
    LEARNING_RATE,
    DivergenceError,
    TrainResult,
    chunked_mean,
    logits,
    minibatches,
    predict,
    pretrain_autoencoder,
    train_loop,
    train_supervised,
)

__all__ = [name for name in dir() if not name.startswith("_")]
