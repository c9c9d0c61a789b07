"""Vote-weighted golden scores.

A raw mean of user scores is unreliable when few people voted: one
enthusiast's 10 would outrank a show scored 8.9 by thousands.  The
weighted score blends the observed mean with a community-wide default,
with the blend driven by the vote count.
"""

from animepop import ScoreParams, VoteAggregate, weighted_score

params = ScoreParams()  # m=50 pseudo-votes, community default C=6.605

print("votes   mean   weighted")
for count, mean in [(0, None), (1, 10.0), (10, 10.0), (100, 10.0),
                    (1000, 10.0), (100000, 10.0)]:
    votes = VoteAggregate(vote_count=count,
                          vote_sum=0.0 if mean is None else mean * count)
    w = weighted_score(votes, params)
    shown = " n/a" if mean is None else f"{mean:4.1f}"
    print(f"{count:6d}  {shown}   {w:.4f}")

print()
print("With zero votes the weighted score is the community default, exactly:")
zero = weighted_score(VoteAggregate(vote_count=0, vote_sum=0.0), params)
print(f"  weighted_score(0 votes) == {zero} == C: {zero == params.community_default}")

print()
print("A single perfect vote barely moves the needle:")
one = weighted_score(VoteAggregate(vote_count=1, vote_sum=10.0), params)
print(f"  one 10/10 vote -> {one:.5f} (the default is {params.community_default})")
