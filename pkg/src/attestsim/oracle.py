"""Exact-rational referee for the trust formulas.

Everything here recomputes the scoring and settlement arithmetic over
`fractions.Fraction`, with no rounding and no shared code with the float
implementations in `trust`. Trace verification and the test suite use
these functions as the independent source of truth; the float path is
required to land within 1e-12 of them.
"""

from __future__ import annotations

from fractions import Fraction

from .money import MICRO


def exact(value) -> Fraction:
    """Lossless conversion: ints, Fractions, decimal strings and floats
    (a float converts to the exact rational it represents in binary)."""
    return Fraction(value)


def weight_exact(transaction_counts: dict, subject) -> Fraction:
    total = sum((exact(transaction_counts[p]) for p in transaction_counts), Fraction(0))
    if total == 0:
        return Fraction(1, len(transaction_counts))
    return exact(transaction_counts[subject]) / total


def reputation_exact(history) -> Fraction:
    """history: iterable of (vote, result, final_score) triples."""
    numerator = Fraction(0)
    denominator = Fraction(0)
    for vote, result, final_score in history:
        if result == 0:
            continue
        score = exact(final_score)
        numerator += vote * result * score
        denominator += score
    if denominator == 0:
        return Fraction(1, 2)
    return (numerator / denominator + 1) / 2


def final_score_exact(votes: dict, reputations: dict, weights: dict) -> Fraction:
    numerator = Fraction(0)
    denominator = Fraction(0)
    for player in votes:
        influence = exact(reputations[player]) * exact(weights[player])
        numerator += votes[player] * influence
        denominator += influence
    if denominator == 0:
        return Fraction(1, 2)
    return (numerator / denominator + 1) / 2


def decide_result_exact(final_score: Fraction, quality_threshold: Fraction) -> int:
    if final_score > quality_threshold:
        return 1
    if final_score < 1 - quality_threshold:
        return -1
    return 0


def reward_exact(effort_cost, quality_threshold, variant: str = "simplified") -> Fraction:
    cost = exact(effort_cost)
    threshold = exact(quality_threshold)
    if variant == "simplified":
        return cost / (2 * threshold**2)
    if variant == "derivation":
        margin = 2 * threshold - 1
        return 2 * cost / (margin**2 + margin)
    raise ValueError(f"unknown payment variant {variant!r}")


def penalty_exact(effort_cost, quality_threshold, epsilon, variant: str = "simplified") -> Fraction:
    return -reward_exact(effort_cost, quality_threshold, variant) - exact(epsilon)


def quantize_micro(amount: Fraction) -> int:
    """Round-half-even to integer micro-units, mirroring the ledger boundary."""
    return round(amount * MICRO)


def _signed_influence(player, votes, reputations, weights) -> Fraction:
    return votes[player] * exact(reputations[player]) * exact(weights[player])


def agreement_sign_exact(subject, votes: dict, reputations: dict, weights: dict) -> int:
    own = _signed_influence(subject, votes, reputations, weights)
    rest = Fraction(0)
    for player in votes:
        if player != subject:
            rest += _signed_influence(player, votes, reputations, weights)
    if own == 0 or rest == 0:
        return 0
    return 1 if (own > 0) == (rest > 0) else -1


def settle_exact(
    roster,
    votes: dict,
    received: dict,
    reputations: dict,
    weights: dict,
    reward_micro: int,
    penalty_micro: int,
    result: int,
) -> dict:
    """Micro-unit settlement map, recomputed from scratch.

    Same contract as the production settlement: annulled rounds pay zero,
    silence after receipt owes the penalty, revealers settle by agreement.
    """
    if result == 0:
        return {player: 0 for player in roster}
    receivers = [p for p in roster if received.get(p, False)]
    effective = {p: votes.get(p, 0) for p in receivers}
    payouts: dict = {}
    for player in roster:
        if not received.get(player, False):
            payouts[player] = 0
            continue
        vote = votes.get(player)
        if vote is None or vote == 0:
            payouts[player] = penalty_micro
            continue
        if len(effective) < 2:
            payouts[player] = 0
            continue
        side = agreement_sign_exact(
            player,
            effective,
            {p: reputations[p] for p in effective},
            {p: weights[p] for p in effective},
        )
        payouts[player] = reward_micro if side > 0 else penalty_micro if side < 0 else 0
    return payouts
