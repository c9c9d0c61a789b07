"""Experiment assembly: model variants, training, metrics, checkpoints.

Five regressor variants are built from the nn engine. The deep ones end
in a sigmoid so predictions live on the same [0,1] scale as the min-max
scaled labels (the one-output softmax the design tables call for is a
constant and cannot train; run manifests record the substitution).

Training is plain mini-batch gradient descent with AdamW: a seeded
shuffle each epoch, fixed-size batches with the last partial batch kept,
and per-epoch train/test losses measured in eval mode. Every run is
reproducible bit-for-bit from (seed, config, data).
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .errors import (
    CheckpointFormatError,
    DataError,
    EmptyTestSetError,
    MissingEmbeddingError,
    MissingFeatureError,
    ShapeMismatchError,
    SpecHashMismatchError,
    UndefinedCorrelationError,
)
from .features import (
    EmbeddingKind,
    TRAD_SEGMENT,
    Vocabulary,
    assemble_deep_input,
    assemble_trad_input,
    compose_portraits,
    concat_character_descriptions,
    tfidf_fit,
)
from .nn import (
    AdamW,
    DropoutSpec,
    LinearLayer,
    LinearSpec,
    Mlp,
    MlpSpec,
    build_mlp,
    mse_loss,
)
from .scoring import ScaleParams, fit_scale, scale, unscale
from .splitter import Split

SYNOPSIS_DIM = 768
CHAR_DESC_DIM = 768
PORTRAIT_DIM = 49

FINAL_ACTIVATION_NOTE = (
    "softmax over a single output is identically 1; the final activation "
    "is sigmoid instead"
)


class ModelVariant(Enum):
    FULL = "full"
    SYNOPSIS_ONLY = "synopsis-only"
    CHAR_DESC_ONLY = "char-desc-only"
    PORTRAIT_ONLY = "portrait-only"
    TRADITIONAL = "traditional"


def default_epochs(variant: ModelVariant) -> int:
    return 30 if variant is ModelVariant.TRADITIONAL else 5


def char_branch_spec(in_dim: int = CHAR_DESC_DIM + PORTRAIT_DIM) -> MlpSpec:
    """Character branch: two dropout/linear(tanh) pairs ending at width 768."""
    return MlpSpec(
        in_dim=in_dim,
        layers=(
            DropoutSpec(0.1),
            LinearSpec(in_dim, 768, "tanh"),
            DropoutSpec(0.1),
            LinearSpec(768, 768, "tanh"),
        ),
    )


def _head_tail() -> tuple[LinearSpec, ...]:
    """The shared funnel from width 768 down to the sigmoid output."""
    return (
        LinearSpec(768, 384, "tanh"),
        LinearSpec(384, 192, "tanh"),
        LinearSpec(192, 96, "tanh"),
        LinearSpec(96, 48, "relu"),
        LinearSpec(48, 24, "relu"),
        LinearSpec(24, 12, "relu"),
        LinearSpec(12, 6, "relu"),
        LinearSpec(6, 3, "relu"),
        LinearSpec(3, 1, "sigmoid"),
    )


def deep_head_spec(in_dim: int = 2 * SYNOPSIS_DIM) -> MlpSpec:
    """The 1536-to-1 funnel used after the concat in the full model."""
    return MlpSpec(
        in_dim=in_dim,
        layers=(DropoutSpec(0.1), LinearSpec(in_dim, 768, "tanh")) + _head_tail(),
    )


def single_branch_spec(in_dim: int = SYNOPSIS_DIM) -> MlpSpec:
    """The funnel with its leading dropout removed and input narrowed to
    one 768-wide embedding (used for the synopsis / char-desc ablations)."""
    return MlpSpec(
        in_dim=in_dim,
        layers=(LinearSpec(in_dim, 768, "tanh"),) + _head_tail(),
    )


def portrait_only_spec(in_dim: int = PORTRAIT_DIM) -> MlpSpec:
    """Character-branch stack on the 49-vector alone, plus two extra
    linear layers narrowing 768 -> 384 -> 1."""
    base = char_branch_spec(in_dim)
    return MlpSpec(
        in_dim=in_dim,
        layers=base.layers + (LinearSpec(768, 384, "relu"), LinearSpec(384, 1, "sigmoid")),
    )


def traditional_spec(in_dim: int = 2250) -> MlpSpec:
    """Plain tanh MLP over the concatenated TF-IDF + pixel vector."""
    return MlpSpec(
        in_dim=in_dim,
        layers=(
            LinearSpec(in_dim, 1000, "tanh"),
            LinearSpec(1000, 500, "tanh"),
            LinearSpec(500, 250, "tanh"),
            LinearSpec(250, 100, "tanh"),
            LinearSpec(100, 1, "sigmoid"),
        ),
    )


class ModelGraph:
    """One variant's networks plus the wiring between them.

    The full model runs concat(char_desc, portrait) through the character
    branch, concatenates the branch output with the synopsis embedding,
    and feeds the result to the head. Every other variant is the head
    alone on a single input matrix.

    forward takes a tuple of input matrices (three for the full model,
    one otherwise); backward returns matching input gradients and
    accumulates parameter gradients in the layers.
    """

    def __init__(self, variant: ModelVariant, head: Mlp, branch: Mlp | None = None):
        if (variant is ModelVariant.FULL) != (branch is not None):
            raise ValueError("exactly the full variant carries a character branch")
        self.variant = variant
        self.head = head
        self.branch = branch

    @property
    def n_inputs(self) -> int:
        return 3 if self.variant is ModelVariant.FULL else 1

    @property
    def input_dims(self) -> tuple[int, ...]:
        if self.variant is ModelVariant.FULL:
            return (SYNOPSIS_DIM, CHAR_DESC_DIM, PORTRAIT_DIM)
        return (self.head.spec.in_dim,)

    def forward(
        self,
        inputs: tuple[np.ndarray, ...],
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> np.ndarray:
        if len(inputs) != self.n_inputs:
            raise ShapeMismatchError(
                f"{self.variant.value} takes {self.n_inputs} input matrices, got {len(inputs)}"
            )
        if self.variant is ModelVariant.FULL:
            syn, char, por = inputs
            branch_out = self.branch.forward(
                np.concatenate([char, por], axis=1), training, rng
            )
            head_in = np.concatenate([branch_out, syn], axis=1)
            return self.head.forward(head_in, training, rng)
        return self.head.forward(inputs[0], training, rng)

    def backward(self, grad_out: np.ndarray) -> tuple[np.ndarray, ...]:
        if self.variant is ModelVariant.FULL:
            grad_head_in = self.head.backward(grad_out)
            width = self.branch.spec.out_dim
            grad_branch_out = grad_head_in[:, :width]
            grad_syn = grad_head_in[:, width:]
            grad_branch_in = self.branch.backward(grad_branch_out)
            grad_char = grad_branch_in[:, :CHAR_DESC_DIM]
            grad_por = grad_branch_in[:, CHAR_DESC_DIM:]
            return (grad_syn, grad_char, grad_por)
        return (self.head.backward(grad_out),)

    def _mlps(self) -> list[Mlp]:
        return ([self.branch] if self.branch is not None else []) + [self.head]

    def parameters(self) -> list[np.ndarray]:
        return [p for m in self._mlps() for p in m.parameters()]

    def gradients(self) -> list[np.ndarray]:
        return [g for m in self._mlps() for g in m.gradients()]

    def zero_grad(self) -> None:
        for m in self._mlps():
            m.zero_grad()


def build_model(variant: ModelVariant, seed: int = 42) -> ModelGraph:
    """Instantiate a variant with seeded initialization (branch first)."""
    rng = np.random.default_rng(seed)
    if variant is ModelVariant.FULL:
        branch = build_mlp(char_branch_spec(), rng)
        head = build_mlp(deep_head_spec(), rng)
        return ModelGraph(variant, head, branch)
    if variant in (ModelVariant.SYNOPSIS_ONLY, ModelVariant.CHAR_DESC_ONLY):
        return ModelGraph(variant, build_mlp(single_branch_spec(), rng))
    if variant is ModelVariant.PORTRAIT_ONLY:
        return ModelGraph(variant, build_mlp(portrait_only_spec(), rng))
    return ModelGraph(variant, build_mlp(traditional_spec(), rng))


# -- training ------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one run. epochs=0 is allowed and trains nothing,
    which pins down the loop's identity; configured runs use >= 1."""

    seed: int = 42
    batch_size: int = 16
    epochs: int = 5
    learning_rate: float = 5e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class LearningCurve:
    """Per-epoch losses, both measured in eval mode after the epoch's updates."""

    train_loss: tuple[float, ...]
    test_loss: tuple[float, ...]

    def __post_init__(self):
        if len(self.train_loss) != len(self.test_loss):
            raise ValueError("train and test loss sequences differ in length")

    @property
    def epochs(self) -> int:
        return len(self.train_loss)


def write_learning_curve(curve: LearningCurve, path: str | Path) -> None:
    """CSV with one line per epoch; losses keep full float64 precision."""
    lines = ["epoch,train_loss,test_loss"]
    for i, (t, v) in enumerate(zip(curve.train_loss, curve.test_loss), start=1):
        lines.append(f"{i},{t:.16e},{v:.16e}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


FeatureMap = Mapping[int, "np.ndarray | tuple[np.ndarray, ...]"]

_SINGLE_EMBED_KIND = {
    ModelVariant.SYNOPSIS_ONLY: EmbeddingKind.SYNOPSIS,
    ModelVariant.CHAR_DESC_ONLY: EmbeddingKind.CHAR_DESC,
    ModelVariant.PORTRAIT_ONLY: EmbeddingKind.PORTRAIT,
}


def deep_features(
    corpus: Corpus,
    store: Mapping[tuple[int, EmbeddingKind], np.ndarray],
    variant: ModelVariant,
) -> dict[int, "np.ndarray | tuple[np.ndarray, ...]"]:
    """Per-anime model inputs drawn from an embedding store.

    The full variant gets the (synopsis, char_desc, portrait) triple; an
    ablation gets just its one vector. Stored float32 values are widened
    to float64 on the way in.
    """
    if variant is ModelVariant.TRADITIONAL:
        raise ValueError("the traditional variant takes TF-IDF features, not embeddings")
    out: dict[int, np.ndarray | tuple[np.ndarray, ...]] = {}
    for anime in corpus.animes:
        if variant is ModelVariant.FULL:
            syn, char, por = assemble_deep_input(anime, store)
            out[anime.id] = tuple(np.asarray(v, dtype=np.float64) for v in (syn, char, por))
        else:
            kind = _SINGLE_EMBED_KIND[variant]
            vec = store.get((anime.id, kind))
            if vec is None:
                raise MissingEmbeddingError(
                    f"no {kind.name.lower()} embedding for anime {anime.id}"
                )
            out[anime.id] = np.asarray(vec, dtype=np.float64)
    return out


def traditional_features(
    corpus: Corpus,
    train_ids: Iterable[int],
    portraits: Mapping[str, np.ndarray] | None = None,
) -> tuple[dict[int, np.ndarray], Vocabulary, Vocabulary]:
    """TF-IDF + pixel vectors for every anime, with vocabularies fitted on
    the train side only so nothing leaks from test documents."""
    train_set = set(train_ids)
    characters = corpus.characters_by_id
    train_animes = [a for a in corpus.animes if a.id in train_set]
    if not train_animes:
        raise DataError("vocabulary fitting needs at least one train-side anime")
    vocab_syn = tfidf_fit([a.synopsis for a in train_animes], TRAD_SEGMENT)
    vocab_char = tfidf_fit(
        [concat_character_descriptions(a, characters) for a in train_animes], TRAD_SEGMENT
    )
    feats: dict[int, np.ndarray] = {}
    for anime in corpus.animes:
        grid = None
        if portraits is not None:
            grid = compose_portraits(anime, characters, portraits)
        feats[anime.id] = assemble_trad_input(anime, characters, vocab_syn, vocab_char, grid)
    return feats, vocab_syn, vocab_char


def _stack(features: FeatureMap, ids: Sequence[int], n_inputs: int) -> tuple[np.ndarray, ...]:
    """Row-stack per-anime features into one matrix per model input."""
    columns: list[list[np.ndarray]] = [[] for _ in range(n_inputs)]
    for anime_id in ids:
        entry = features[anime_id]
        parts = (entry,) if isinstance(entry, np.ndarray) else tuple(entry)
        if len(parts) != n_inputs:
            raise MissingFeatureError(
                f"anime {anime_id} supplies {len(parts)} feature vectors, "
                f"model takes {n_inputs}"
            )
        for col, part in zip(columns, parts):
            col.append(np.asarray(part, dtype=np.float64))
    return tuple(np.stack(col) for col in columns)


def _check_coverage(ids: Iterable[int], features: FeatureMap, labels: Mapping[int, float]) -> None:
    for anime_id in sorted(ids):
        if anime_id not in features:
            raise MissingFeatureError(f"no features for anime {anime_id}")
        if anime_id not in labels:
            raise MissingFeatureError(f"no label for anime {anime_id}")


def _eval_predictions(
    model: ModelGraph, matrices: tuple[np.ndarray, ...], chunk: int = 1024
) -> np.ndarray:
    n = matrices[0].shape[0]
    out = np.empty((n, 1), dtype=np.float64)
    for start in range(0, n, chunk):
        batch = tuple(m[start : start + chunk] for m in matrices)
        out[start : start + chunk] = model.forward(batch, training=False)
    return out


def train(
    model: ModelGraph,
    split: Split,
    features: FeatureMap,
    labels: Mapping[int, float],
    config: TrainConfig,
) -> tuple[ModelGraph, LearningCurve]:
    """Train in place and return the model with its learning curve.

    labels must already be scaled to [0,1] (fit on the train side). One
    generator seeded by config.seed drives both the epoch shuffles and
    the dropout masks, so the whole run is a pure function of its inputs.
    """
    train_ids = sorted(split.train)
    test_ids = sorted(split.test)
    if not train_ids:
        raise DataError("training requires a non-empty train side")
    _check_coverage(train_ids + test_ids, features, labels)

    x_train = _stack(features, train_ids, model.n_inputs)
    y_train = np.array([[labels[i]] for i in train_ids], dtype=np.float64)
    if test_ids:
        x_test = _stack(features, test_ids, model.n_inputs)
        y_test = np.array([[labels[i]] for i in test_ids], dtype=np.float64)

    rng = np.random.default_rng(config.seed)
    optimizer = AdamW(
        model.parameters(),
        lr=config.learning_rate,
        betas=(config.beta1, config.beta2),
        eps=config.eps,
        weight_decay=config.weight_decay,
    )

    train_losses: list[float] = []
    test_losses: list[float] = []
    n = len(train_ids)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb = tuple(m[idx] for m in x_train)
            yb = y_train[idx]
            model.zero_grad()
            pred = model.forward(xb, training=True, rng=rng)
            _, grad = mse_loss(pred, yb)
            model.backward(grad)
            optimizer.step(model.gradients())
        train_losses.append(mse_loss(_eval_predictions(model, x_train), y_train)[0])
        if test_ids:
            test_losses.append(mse_loss(_eval_predictions(model, x_test), y_test)[0])
        else:
            # A pure-memorization run has nothing to test against.
            test_losses.append(float("nan"))

    return model, LearningCurve(tuple(train_losses), tuple(test_losses))


def predict(model: ModelGraph, features_one: "np.ndarray | tuple[np.ndarray, ...]") -> float:
    """Eval-mode forward pass for a single anime; result lies in (0,1)."""
    parts = (features_one,) if isinstance(features_one, np.ndarray) else tuple(features_one)
    matrices = tuple(np.asarray(p, dtype=np.float64)[None, :] for p in parts)
    return float(model.forward(matrices, training=False)[0, 0])


# -- correlation metrics ---------------------------------------------------------

def _clean_pair(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if ax.ndim != 1 or ay.ndim != 1 or ax.shape != ay.shape:
        raise ShapeMismatchError(
            f"correlation needs two equal-length vectors, got {ax.shape} and {ay.shape}"
        )
    if ax.shape[0] < 2:
        raise UndefinedCorrelationError("correlation needs at least 2 observations")
    return ax, ay


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample product-moment correlation."""
    ax, ay = _clean_pair(x, y)
    # Constancy is checked on the raw values: the mean of n identical
    # floats need not be bit-equal to them, so a variance test would see
    # rounding noise instead of zero.
    if np.all(ax == ax[0]) or np.all(ay == ay[0]):
        raise UndefinedCorrelationError("correlation undefined for a constant input")
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant input")
    r = float(np.sum(dx * dy)) / (sx * sy)
    return min(1.0, max(-1.0, r))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of the two rank vectors (ties get average ranks)."""
    ax, ay = _clean_pair(x, y)
    return pearson(_average_ranks(ax), _average_ranks(ay))


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tau-b over all pairs, tie-corrected in both arguments.

    Counts are exact integers, and the denominator is one square root of
    their product, so clean examples come out exact.
    """
    ax, ay = _clean_pair(x, y)
    n = ax.shape[0]
    iu = np.triu_indices(n, 1)
    sx = np.sign(ax[:, None] - ax[None, :])[iu]
    sy = np.sign(ay[:, None] - ay[None, :])[iu]
    prod = sx * sy
    concordant = int(np.sum(prod > 0))
    discordant = int(np.sum(prod < 0))
    ties_x = int(np.sum(sx == 0))
    ties_y = int(np.sum(sy == 0))
    n0 = n * (n - 1) // 2
    denom_sq = (n0 - ties_x) * (n0 - ties_y)
    if denom_sq == 0:
        raise UndefinedCorrelationError("tau undefined when either input is all ties")
    tau = (concordant - discordant) / math.sqrt(denom_sq)
    return min(1.0, max(-1.0, tau))


def interpret_correlation(r: float) -> str:
    """Strength label on |r|: very weak / weak / moderate / strong."""
    if not -1.0 <= r <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {r}")
    a = abs(r)
    if a < 0.20:
        return "very weak"
    if a < 0.30:
        return "weak"
    if a < 0.50:
        return "moderate"
    return "strong"


# -- evaluation --------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    """Test-set metrics. MSE is in scaled space; correlations compare
    unscaled predictions with raw labels. A correlation that is undefined
    (constant predictor or labels) carries None and an explanatory label."""

    n_test: int
    mse: float
    pearson: float | None
    spearman: float | None
    kendall_tau: float | None
    pearson_label: str
    spearman_label: str
    kendall_label: str


def _metric(fn, preds, labels) -> tuple[float | None, str]:
    try:
        value = fn(preds, labels)
    except UndefinedCorrelationError as exc:
        return None, f"undefined ({exc})"
    return value, interpret_correlation(value)


def evaluate(
    model: ModelGraph,
    test_ids: Iterable[int],
    features: FeatureMap,
    raw_labels: Mapping[int, float],
    scale_params: ScaleParams,
) -> EvalReport:
    """Score a trained model on the given anime ids."""
    ids = sorted(test_ids)
    if not ids:
        raise EmptyTestSetError("cannot evaluate on an empty test set")
    _check_coverage(ids, features, raw_labels)
    matrices = _stack(features, ids, model.n_inputs)
    preds = _eval_predictions(model, matrices)[:, 0]
    raw = np.array([raw_labels[i] for i in ids], dtype=np.float64)
    scaled = np.array([scale(v, scale_params) for v in raw])
    mse = mse_loss(preds[:, None], scaled[:, None])[0]
    unscaled_preds = np.array([unscale(p, scale_params) for p in preds])
    p, p_label = _metric(pearson, unscaled_preds, raw)
    s, s_label = _metric(spearman, unscaled_preds, raw)
    k, k_label = _metric(kendall_tau, unscaled_preds, raw)
    return EvalReport(
        n_test=len(ids),
        mse=mse,
        pearson=p,
        spearman=s,
        kendall_tau=k,
        pearson_label=p_label,
        spearman_label=s_label,
        kendall_label=k_label,
    )


def format_eval_report(report: EvalReport) -> str:
    def fmt(v: float | None) -> str:
        return "n/a" if v is None else f"{v:.6f}"

    lines = [
        f"test animes: {report.n_test}",
        f"mse (scaled): {report.mse:.6e}",
        f"pearson: {fmt(report.pearson)} [{report.pearson_label}]",
        f"spearman: {fmt(report.spearman)} [{report.spearman_label}]",
        f"kendall_tau: {fmt(report.kendall_tau)} [{report.kendall_label}]",
    ]
    return "\n".join(lines)


def scale_labels(corpus: Corpus, split: Split) -> tuple[ScaleParams, dict[int, float], dict[int, float]]:
    """Fit min-max on train golden scores; scale labels for both sides.

    Returns (scale params, scaled labels, raw labels) keyed by anime id.
    """
    by_id = corpus.animes_by_id
    members = sorted(split.train | split.test)
    raw: dict[int, float] = {}
    for anime_id in members:
        anime = by_id.get(anime_id)
        if anime is None or anime.golden_score is None:
            raise DataError(f"anime {anime_id} has no golden score; resolve scores first")
        raw[anime_id] = anime.golden_score
    params = fit_scale([raw[i] for i in sorted(split.train)])
    scaled = {i: scale(v, params) for i, v in raw.items()}
    return params, scaled, raw


# -- checkpoints ---------------------------------------------------------------------

CHECKPOINT_MAGIC = b"AMLP"
CHECKPOINT_VERSION = 1


def _spec_lines(spec: MlpSpec) -> list[str]:
    lines = [f"in={spec.in_dim}"]
    for layer in spec.layers:
        if isinstance(layer, DropoutSpec):
            lines.append(f"dropout {layer.rate!r}")
        else:
            lines.append(f"linear {layer.in_dim} {layer.out_dim} {layer.activation}")
    return lines


def graph_descriptor(model: ModelGraph) -> str:
    """Canonical text form of the architecture; hashed into checkpoints."""
    lines = [f"variant={model.variant.value}"]
    if model.branch is not None:
        lines.append("[branch]")
        lines.extend(_spec_lines(model.branch.spec))
    lines.append("[head]")
    lines.extend(_spec_lines(model.head.spec))
    return "\n".join(lines) + "\n"


def _parse_descriptor(text: str) -> tuple[ModelVariant, dict[str, MlpSpec]]:
    lines = [l for l in text.split("\n") if l]
    if not lines or not lines[0].startswith("variant="):
        raise CheckpointFormatError("descriptor does not start with a variant line")
    try:
        variant = ModelVariant(lines[0].removeprefix("variant="))
    except ValueError:
        raise CheckpointFormatError(f"unknown variant in descriptor: {lines[0]!r}") from None
    specs: dict[str, MlpSpec] = {}
    name: str | None = None
    in_dim: int | None = None
    layers: list = []

    def flush():
        if name is not None:
            if in_dim is None:
                raise CheckpointFormatError(f"section {name!r} lacks an in= line")
            specs[name] = MlpSpec(in_dim=in_dim, layers=tuple(layers))

    for line in lines[1:]:
        if line.startswith("[") and line.endswith("]"):
            flush()
            name = line[1:-1]
            in_dim = None
            layers = []
        elif line.startswith("in="):
            in_dim = int(line.removeprefix("in="))
        elif line.startswith("dropout "):
            layers.append(DropoutSpec(float(line.split()[1])))
        elif line.startswith("linear "):
            _, a, b, act = line.split()
            layers.append(LinearSpec(int(a), int(b), act))
        else:
            raise CheckpointFormatError(f"unrecognized descriptor line: {line!r}")
    flush()
    if "head" not in specs:
        raise CheckpointFormatError("descriptor lacks a [head] section")
    return variant, specs


def save_checkpoint(model: ModelGraph, path: str | Path) -> None:
    """Magic, version, architecture descriptor with its digest, then every
    parameter tensor as little-endian float64 in declaration order."""
    descriptor = graph_descriptor(model).encode("utf-8")
    digest = hashlib.sha256(descriptor).digest()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(descriptor)))
        fh.write(descriptor)
        fh.write(digest)
        for p in model.parameters():
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise CheckpointFormatError(
            f"checkpoint ended while reading {what} ({len(data)}/{count} bytes)"
        )
    return data


def load_checkpoint(path: str | Path) -> ModelGraph:
    """Rebuild the graph from the descriptor and stored parameters."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointFormatError(
                f"expected magic {CHECKPOINT_MAGIC!r}, got {magic!r}"
            )
        version, desc_len = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if version != CHECKPOINT_VERSION:
            raise CheckpointFormatError(
                f"unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}"
            )
        descriptor = _read_exact(fh, desc_len, "descriptor")
        stored_digest = _read_exact(fh, 32, "descriptor digest")
        if hashlib.sha256(descriptor).digest() != stored_digest:
            raise SpecHashMismatchError(
                "descriptor digest does not match; checkpoint is corrupt"
            )
        variant, specs = _parse_descriptor(descriptor.decode("utf-8"))

        def load_mlp(spec: MlpSpec) -> Mlp:
            layers = []
            for ls in spec.layers:
                if not isinstance(ls, LinearSpec):
                    continue
                w_raw = _read_exact(fh, 8 * ls.out_dim * ls.in_dim, "weights")
                b_raw = _read_exact(fh, 8 * ls.out_dim, "biases")
                weight = np.frombuffer(w_raw, dtype="<f8").reshape(ls.out_dim, ls.in_dim).copy()
                bias = np.frombuffer(b_raw, dtype="<f8").copy()
                layers.append(LinearLayer(weight=weight, bias=bias, activation=ls.activation))
            return Mlp(spec, layers)

        branch = load_mlp(specs["branch"]) if "branch" in specs else None
        head = load_mlp(specs["head"])
        if fh.read(1):
            raise CheckpointFormatError("trailing bytes after the declared parameters")
    return ModelGraph(variant, head, branch)


# -- run manifest ----------------------------------------------------------------------

def write_run_manifest(
    path: str | Path,
    *,
    variant: ModelVariant,
    seed: int,
    config: TrainConfig,
    scale_params: ScaleParams,
    train_fraction: float,
    n_train: int,
    n_test: int,
    report: EvalReport | None,
) -> None:
    """Key=value record of everything that determined a run's outputs."""
    lines = [
        f"variant={variant.value}",
        f"note.final_activation={FINAL_ACTIVATION_NOTE}",
        f"seed={seed}",
        f"batch_size={config.batch_size}",
        f"epochs={config.epochs}",
        f"learning_rate={config.learning_rate!r}",
        f"beta1={config.beta1!r}",
        f"beta2={config.beta2!r}",
        f"eps={config.eps!r}",
        f"weight_decay={config.weight_decay!r}",
        f"scale.min_score={scale_params.min_score!r}",
        f"scale.max_score={scale_params.max_score!r}",
        f"split.train_fraction={train_fraction!r}",
        f"split.n_train={n_train}",
        f"split.n_test={n_test}",
    ]
    if report is not None:
        def fmt(v: float | None) -> str:
            return "undefined" if v is None else repr(v)

        lines += [
            f"metric.mse={report.mse!r}",
            f"metric.pearson={fmt(report.pearson)}",
            f"metric.spearman={fmt(report.spearman)}",
            f"metric.kendall_tau={fmt(report.kendall_tau)}",
            f"metric.pearson_label={report.pearson_label}",
            f"metric.spearman_label={report.spearman_label}",
            f"metric.kendall_label={report.kendall_label}",
        ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
