"""Vote-weighted golden scores and min-max label scaling.

The golden label blends an anime's mean user score S with a community
default C, weighted by how many people voted: W = v/(v+m) * S +
m/(v+m) * C, where m is a fixed statistical bound. With no voters the
label is exactly C; with many voters it approaches S.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from .corpus import Anime, Corpus, VoteAggregate
from .errors import DegenerateScaleError, UndefinedScoreError

DEFAULT_STATISTICAL_BOUND = 50
DEFAULT_COMMUNITY_SCORE = 6.605


@dataclass(frozen=True)
class ScoreParams:
    """Statistical bound m and the community default score C."""

    m: int = DEFAULT_STATISTICAL_BOUND
    community_default: float = DEFAULT_COMMUNITY_SCORE

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"statistical bound m must be >= 1, got {self.m}")
        if not 0.0 <= self.community_default <= 10.0:
            raise ValueError(
                f"community default must lie in [0, 10], got {self.community_default}"
            )


@dataclass(frozen=True)
class ScaleParams:
    """Min-max scale fitted on training labels."""

    min_score: float
    max_score: float

    def __post_init__(self):
        if not self.min_score < self.max_score:
            raise ValueError(
                f"min_score must be < max_score, got ({self.min_score}, {self.max_score})"
            )


def naive_score(votes: VoteAggregate) -> float:
    """Mean user score S = vote_sum / vote_count. Undefined for zero voters."""
    if votes.vote_count == 0:
        raise UndefinedScoreError("mean score is undefined with zero voters")
    return votes.vote_sum / votes.vote_count


def score_weight(v: int, m: int) -> float:
    """Weight of the mean user score: s = v / (v + m)."""
    return v / (v + m)


def default_weight(v: int, m: int) -> float:
    """Weight of the community default: c = m / (v + m)."""
    return m / (v + m)


def weighted_score(votes: VoteAggregate, params: ScoreParams) -> float:
    """Vote-count-weighted score W = s*S + c*C; exactly C when nobody voted."""
    v = votes.vote_count
    if v == 0:
        return params.community_default
    s = naive_score(votes)
    return score_weight(v, params.m) * s + default_weight(v, params.m) * params.community_default


def resolve_golden_scores(corpus: Corpus, params: ScoreParams) -> Corpus:
    """Fill missing golden scores from raw vote aggregates.

    A file-supplied golden_score is authoritative and left untouched;
    animes with votes but no score get the weighted score; animes with
    neither are passed through unchanged (clean() removes them).
    """
    animes: list[Anime] = []
    for a in corpus.animes:
        if a.golden_score is None and a.votes is not None:
            animes.append(replace(a, golden_score=weighted_score(a.votes, params)))
        else:
            animes.append(a)
    return Corpus(animes=tuple(animes), characters=corpus.characters)


def fit_scale(train_scores: Iterable[float]) -> ScaleParams:
    """Min-max parameters over the training labels.

    Raises DegenerateScaleError when fewer than two distinct values are
    supplied (the scale would divide by zero).
    """
    scores = list(train_scores)
    if not scores:
        raise DegenerateScaleError("cannot fit a scale on an empty score list")
    lo, hi = min(scores), max(scores)
    if lo == hi:
        raise DegenerateScaleError(f"all scores equal {lo}; scale is degenerate")
    return ScaleParams(min_score=lo, max_score=hi)


def scale(score: float, p: ScaleParams) -> float:
    """Map min -> 0 and max -> 1 linearly; out-of-range inputs are not clamped."""
    return (score - p.min_score) / (p.max_score - p.min_score)


def unscale(y: float, p: ScaleParams) -> float:
    """Exact inverse of scale()."""
    return p.min_score + y * (p.max_score - p.min_score)
