"""Multimodal regression of anime popularity scores.

The library covers the whole experiment path: corpus ingestion and
cleaning, vote-weighted golden labels, leakage-free cluster splitting,
embedding/TF-IDF feature assembly, a small float64 network engine, and
training/evaluation of five regressor variants with rank-correlation
metrics.
"""

from .corpus import (
    Anime,
    Character,
    CleanReport,
    Corpus,
    StatsReport,
    VoteAggregate,
    clean,
    compute_stats,
    format_stats,
    parse_corpus,
    wordcount,
    write_corpus,
)
from .errors import DataError, NumericError
from .features import (
    EmbeddingKind,
    EmbeddingRecord,
    Vocabulary,
    assemble_deep_input,
    assemble_trad_input,
    image_to_vector,
    index_embeddings,
    read_embeddings,
    read_portraits,
    tfidf_fit,
    tfidf_transform,
    tokenize,
    write_embeddings,
    write_portraits,
)
from .nn import AdamW, DropoutSpec, LinearSpec, Mlp, MlpSpec, build_mlp, mse_loss
from .pipeline import (
    EvalReport,
    LearningCurve,
    ModelGraph,
    ModelVariant,
    TrainConfig,
    build_model,
    evaluate,
    interpret_correlation,
    kendall_tau,
    load_checkpoint,
    pearson,
    predict,
    save_checkpoint,
    spearman,
    train,
)
from .scoring import (
    ScaleParams,
    ScoreParams,
    fit_scale,
    naive_score,
    resolve_golden_scores,
    scale,
    unscale,
    weighted_score,
)
from .pipeline import deep_features, scale_labels, traditional_features
from .splitter import (
    ClusterAssignment,
    Split,
    build_clusters,
    read_split_manifest,
    split,
    verify_no_leakage,
    write_split_manifest,
)
from .synthetic import (
    synthetic_corpus,
    synthetic_embeddings,
    synthetic_portraits,
    write_fixture,
)

__version__ = "0.1.0"

__all__ = [
    "Anime", "Character", "CleanReport", "Corpus", "StatsReport", "VoteAggregate",
    "clean", "compute_stats", "format_stats", "parse_corpus", "wordcount", "write_corpus",
    "DataError", "NumericError",
    "EmbeddingKind", "EmbeddingRecord", "Vocabulary",
    "assemble_deep_input", "assemble_trad_input", "image_to_vector",
    "index_embeddings", "read_embeddings", "read_portraits",
    "tfidf_fit", "tfidf_transform", "tokenize", "write_embeddings", "write_portraits",
    "AdamW", "DropoutSpec", "LinearSpec", "Mlp", "MlpSpec", "build_mlp", "mse_loss",
    "EvalReport", "LearningCurve", "ModelGraph", "ModelVariant", "TrainConfig",
    "build_model", "evaluate", "interpret_correlation", "kendall_tau",
    "load_checkpoint", "pearson", "predict", "save_checkpoint", "spearman", "train",
    "ScaleParams", "ScoreParams", "fit_scale", "naive_score",
    "resolve_golden_scores", "scale", "unscale", "weighted_score",
    "deep_features", "scale_labels", "traditional_features",
    "ClusterAssignment", "Split", "build_clusters", "read_split_manifest",
    "split", "verify_no_leakage", "write_split_manifest",
    "synthetic_corpus", "synthetic_embeddings", "synthetic_portraits",
    "write_fixture",
]
