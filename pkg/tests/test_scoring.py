"""Vote-weighted scores and min-max label scaling."""

import numpy as np
import pytest

from animepop.corpus import Corpus, VoteAggregate
from animepop.errors import DegenerateScaleError, UndefinedScoreError
from animepop.scoring import (
    ScaleParams,
    ScoreParams,
    default_weight,
    fit_scale,
    naive_score,
    resolve_golden_scores,
    scale,
    score_weight,
    unscale,
    weighted_score,
)

from conftest import make_anime, make_character


class TestWeightedScore:
    def test_zero_votes_returns_community_default_exactly(self):
        params = ScoreParams()
        w = weighted_score(VoteAggregate(vote_count=0, vote_sum=0.0), params)
        assert w == params.community_default  # bit-for-bit

    def test_hand_example(self):
        # One voter scoring 10 against m=50, C=6.605: (1*10 + 50*6.605)/51.
        params = ScoreParams(m=50, community_default=6.605)
        w = weighted_score(VoteAggregate(vote_count=1, vote_sum=10.0), params)
        assert w == pytest.approx(340.25 / 51, abs=1e-12)
        assert w == pytest.approx(6.67157, abs=1e-5)

    def test_weights_sum_to_one(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            v = int(rng.integers(0, 10**7))
            m = int(rng.integers(1, 10**4))
            assert score_weight(v, m) + default_weight(v, m) == 1.0

    def test_many_votes_dominate(self):
        params = ScoreParams()
        w = weighted_score(VoteAggregate(vote_count=10**7, vote_sum=9.0 * 10**7), params)
        assert abs(w - 9.0) < 1e-4

    def test_naive_score(self):
        assert naive_score(VoteAggregate(vote_count=4, vote_sum=30.0)) == 7.5
        with pytest.raises(UndefinedScoreError):
            naive_score(VoteAggregate(vote_count=0, vote_sum=0.0))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ScoreParams(m=0)
        with pytest.raises(ValueError):
            ScoreParams(community_default=10.5)


class TestResolve:
    def test_fills_missing_from_votes(self):
        votes = VoteAggregate(vote_count=100, vote_sum=800.0)
        corpus = Corpus(
            animes=(make_anime(0, (0,), golden=None, votes=votes),),
            characters=(make_character(0),),
        )
        params = ScoreParams()
        resolved = resolve_golden_scores(corpus, params)
        assert resolved.animes[0].golden_score == weighted_score(votes, params)

    def test_explicit_score_is_authoritative(self):
        votes = VoteAggregate(vote_count=100, vote_sum=800.0)
        corpus = Corpus(
            animes=(make_anime(0, (0,), golden=3.25, votes=votes),),
            characters=(make_character(0),),
        )
        resolved = resolve_golden_scores(corpus, ScoreParams())
        assert resolved.animes[0].golden_score == 3.25

    def test_scoreless_anime_left_unresolved(self):
        corpus = Corpus(animes=(make_anime(0, (0,), golden=None),), characters=(make_character(0),))
        resolved = resolve_golden_scores(corpus, ScoreParams())
        assert resolved.animes[0].golden_score is None


class TestScale:
    def test_fit_and_endpoints(self):
        p = fit_scale([1.86, 9.06, 5.0, 7.2])
        assert p == ScaleParams(min_score=1.86, max_score=9.06)
        assert scale(1.86, p) == 0.0
        assert scale(9.06, p) == 1.0

    def test_no_clamping(self):
        p = ScaleParams(min_score=2.0, max_score=8.0)
        assert scale(9.5, p) > 1.0
        assert scale(0.5, p) < 0.0

    def test_round_trip(self):
        p = ScaleParams(min_score=1.86, max_score=9.06)
        rng = np.random.default_rng(3)
        for x in rng.uniform(0.0, 10.0, size=200):
            assert unscale(scale(float(x), p), p) == pytest.approx(float(x), abs=1e-12)

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateScaleError):
            fit_scale([])
        with pytest.raises(DegenerateScaleError):
            fit_scale([5.0])
        with pytest.raises(DegenerateScaleError):
            fit_scale([5.0, 5.0, 5.0])

    def test_params_ordering(self):
        with pytest.raises(ValueError):
            ScaleParams(min_score=2.0, max_score=2.0)
