"""Partial additive speech augmentation and speaker-verification
evaluation toolkit: SNR-exact noise mixing (partial or full overlap),
log-Mel features, EER scoring, pooling/gating reference math, and PCA
projection of embeddings.
"""

from .attention import (
    attentive_statistics_pooling,
    channel_means,
    se_block,
    statistics_pooling,
)
from .audio import (
    AudioBuffer,
    SegmentSpan,
    load_wav,
    loop_pad,
    sample_segment,
    save_wav,
)
from .augment import (
    METHOD_PAS,
    METHOD_TRADITIONAL,
    AugmentedSample,
    PasConfig,
    PasPlacement,
    apply_pas,
    apply_traditional,
    augment_batch,
    augment_utterance,
    draw_placement,
    sample_stream,
    signal_power,
    snr_gain,
)
from .evaluation import (
    EerResult,
    ScoredTrial,
    Trial,
    compute_eer,
    cosine_score,
    eer_from_scores,
    read_scores,
    read_trials,
    synth_noisy_utterance,
    synth_testset,
)
from .features import (
    MelConfig,
    MelSpectrogram,
    log_mel,
    mel_filterbank,
    read_features,
    stft_power,
    write_features,
)
from .pca import EmbeddingSet, PcaResult, pca_project, read_projection, write_projection

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "SegmentSpan",
    "load_wav",
    "save_wav",
    "sample_segment",
    "loop_pad",
    "PasConfig",
    "PasPlacement",
    "AugmentedSample",
    "METHOD_PAS",
    "METHOD_TRADITIONAL",
    "signal_power",
    "snr_gain",
    "apply_traditional",
    "apply_pas",
    "draw_placement",
    "augment_utterance",
    "augment_batch",
    "sample_stream",
    "MelConfig",
    "MelSpectrogram",
    "stft_power",
    "mel_filterbank",
    "log_mel",
    "write_features",
    "read_features",
    "statistics_pooling",
    "attentive_statistics_pooling",
    "channel_means",
    "se_block",
    "Trial",
    "ScoredTrial",
    "EerResult",
    "cosine_score",
    "compute_eer",
    "eer_from_scores",
    "read_scores",
    "read_trials",
    "synth_noisy_utterance",
    "synth_testset",
    "EmbeddingSet",
    "PcaResult",
    "pca_project",
    "write_projection",
    "read_projection",
    "__version__",
]
