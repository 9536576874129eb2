"""Trust scoring and settlement rules for two-phase design voting.

Votes are -1 (invalid), 0 (abstain/no reveal) or +1 (valid). Each player
carries a reputation in [0, 1] built from how their past votes lined up
with the decided outcomes, and a per-transaction weight proportional to
how many settled transactions they have taken part in. A transaction's
final score folds the roster's votes, reputations and weights into [0, 1];
the result is decided against a quality threshold strictly above one half.

All real-valued paths here use binary floats and iterate rosters in sorted
key order, so outputs are independent of map insertion order and bitwise
reproducible. The exact-rational mirror lives in `oracle` and is the
referee for these floats; keep the two routes separate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .money import MICRO

VALID_VOTES = (-1, 0, 1)
PHASES = ("evaluation", "feedback")
PAYMENT_VARIANTS = ("simplified", "derivation")

# Result codes for a settled transaction.
RESULT_VALID = 1
RESULT_INVALID = -1
RESULT_ANNULLED = 0


class DomainError(ValueError):
    """An argument is outside the domain the trust formulas are defined on."""


def check_vote(value: int) -> int:
    if isinstance(value, bool) or value not in VALID_VOTES:
        raise DomainError(f"vote must be one of {VALID_VOTES}, got {value!r}")
    return value


def check_score(value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"score must lie in [0, 1], got {value!r}")
    return value


def check_quality_threshold(value: float | Fraction) -> None:
    if not 0.5 < value <= 1:
        raise DomainError(f"quality threshold must lie in (0.5, 1], got {value!r}")


@dataclass(frozen=True)
class VoteRecord:
    """One settled, non-annulled transaction a player took part in."""

    design: int
    phase: str
    vote: int
    result: int
    final_score: float

    def __post_init__(self) -> None:
        if self.phase not in PHASES:
            raise DomainError(f"unknown phase {self.phase!r}")
        check_vote(self.vote)
        if self.result not in (RESULT_VALID, RESULT_INVALID):
            raise DomainError("recorded results are decided, non-annulled: -1 or +1")
        check_score(self.final_score)


@dataclass
class PlayerTrust:
    """A player's standing: reputation, participation count, and history."""

    reputation: float = 0.5
    transaction_count: int = 0
    history: list[VoteRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        check_score(self.reputation)
        if self.transaction_count < 0:
            raise DomainError("transaction_count must be non-negative")


def compute_weight(transaction_counts: dict, subject) -> float:
    """Per-transaction voting weight of `subject` among the given roster.

    weight = subject's participation count / sum of the roster's counts.
    When nobody has any history the weight falls back to 1/len(roster).
    Counts may be fractional (new players contribute a small epsilon).
    """
    if not transaction_counts:
        raise DomainError("empty roster")
    if subject not in transaction_counts:
        raise DomainError(f"subject {subject!r} not in roster")
    for player in transaction_counts:
        if transaction_counts[player] < 0:
            raise DomainError(f"negative participation count for {player!r}")
    total = sum(float(transaction_counts[p]) for p in sorted(transaction_counts))
    if total == 0.0:
        return 1.0 / len(transaction_counts)
    return float(transaction_counts[subject]) / total


def compute_reputation(history: list[VoteRecord]) -> float:
    """Reputation in [0, 1]: agreement of past votes with decided results,
    weighted by each transaction's final score and shifted from [-1, 1].

    An empty history (or one whose scores sum to zero) is the neutral 0.5.
    """
    numerator = 0.0
    denominator = 0.0
    for record in history:
        if record.result == RESULT_ANNULLED:
            continue
        numerator += record.vote * record.result * record.final_score
        denominator += record.final_score
    if denominator == 0.0:
        return 0.5
    return 0.5 * (numerator / denominator + 1.0)


def _check_roster_maps(votes: dict, reputations: dict, weights: dict) -> None:
    if not (votes.keys() == reputations.keys() == weights.keys()):
        raise DomainError("votes, reputations and weights must share one key set")
    for player in votes:
        check_vote(votes[player])
        check_score(reputations[player])
        if not 0.0 <= weights[player] <= 1.0:
            raise DomainError(f"weight of {player!r} outside [0, 1]")


def compute_final_score(votes: dict, reputations: dict, weights: dict) -> float:
    """Roster consensus score in [0, 1].

    score = ((sum of vote*reputation*weight) / (sum of reputation*weight) + 1) / 2.
    A zero denominator (empty roster, or all reputation mass zero) is the
    undecided 0.5. Weights must sum to 1 within 1e-9 for non-empty rosters.
    """
    _check_roster_maps(votes, reputations, weights)
    if not votes:
        return 0.5
    weight_sum = sum(weights[p] for p in sorted(weights))
    if abs(weight_sum - 1.0) > 1e-9:
        raise DomainError(f"weights must sum to 1, got {weight_sum!r}")
    numerator = 0.0
    denominator = 0.0
    for player in sorted(votes):
        influence = reputations[player] * weights[player]
        numerator += votes[player] * influence
        denominator += influence
    if denominator == 0.0:
        return 0.5
    return 0.5 * (numerator / denominator + 1.0)


def decide_result(final_score: float, quality_threshold: float) -> int:
    """+1 above the threshold, -1 below its mirror, 0 (annulled) between."""
    check_score(final_score)
    check_quality_threshold(quality_threshold)
    if final_score > quality_threshold:
        return RESULT_VALID
    if final_score < 1.0 - quality_threshold:
        return RESULT_INVALID
    return RESULT_ANNULLED


def reward_amount(
    effort_cost: Fraction | int | str,
    quality_threshold: Fraction | int | str,
    variant: str = "simplified",
) -> Fraction:
    """Exact reward for agreeing with the weighted majority.

    simplified: effort_cost / (2 * threshold^2)
    derivation: 2 * effort_cost / (margin^2 + margin), margin = 2*threshold - 1

    The two are deliberately not equal; the variant is a deployment choice.
    Returned exact; quantize to micro-units only at the ledger boundary.
    """
    cost = Fraction(effort_cost)
    threshold = Fraction(quality_threshold)
    if cost <= 0:
        raise DomainError("effort cost must be positive")
    check_quality_threshold(threshold)
    if variant == "simplified":
        return cost / (2 * threshold * threshold)
    if variant == "derivation":
        margin = 2 * threshold - 1
        return 2 * cost / (margin * margin + margin)
    raise DomainError(f"unknown payment variant {variant!r}")


def penalty_amount(
    effort_cost: Fraction | int | str,
    quality_threshold: Fraction | int | str,
    epsilon: Fraction | int | str,
    variant: str = "simplified",
) -> Fraction:
    """Exact penalty: the negated reward less a strictly positive epsilon."""
    eps = Fraction(epsilon)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    return -reward_amount(effort_cost, quality_threshold, variant) - eps


@dataclass(frozen=True)
class PaymentSchedule:
    """Deployment-time payment constants, exact and micro-quantized.

    `reward`/`penalty` are exact rationals in currency units; `reward_micro`
    and `penalty_micro` are the integer amounts the ledger actually moves.
    """

    effort_cost: Fraction
    quality_threshold: Fraction
    epsilon: Fraction
    variant: str = "simplified"

    @classmethod
    def build(
        cls,
        effort_cost,
        quality_threshold,
        epsilon,
        variant: str = "simplified",
    ) -> "PaymentSchedule":
        if variant not in PAYMENT_VARIANTS:
            raise DomainError(f"unknown payment variant {variant!r}")
        return cls(
            effort_cost=Fraction(effort_cost),
            quality_threshold=Fraction(quality_threshold),
            epsilon=Fraction(epsilon),
            variant=variant,
        )

    def __post_init__(self) -> None:
        # Delegated checks: raises on non-positive cost/epsilon, bad threshold.
        penalty_amount(self.effort_cost, self.quality_threshold, self.epsilon, self.variant)

    @property
    def reward(self) -> Fraction:
        return reward_amount(self.effort_cost, self.quality_threshold, self.variant)

    @property
    def penalty(self) -> Fraction:
        return penalty_amount(
            self.effort_cost, self.quality_threshold, self.epsilon, self.variant
        )

    @property
    def reward_micro(self) -> int:
        return round(self.reward * MICRO)

    @property
    def penalty_micro(self) -> int:
        return round(self.penalty * MICRO)

    @property
    def effort_cost_micro(self) -> int:
        return round(self.effort_cost * MICRO)


def _rest_sign(subject, votes: dict, reputations: dict, weights: dict) -> int:
    rest = 0.0
    for player in sorted(votes):
        if player == subject:
            continue
        rest += votes[player] * reputations[player] * weights[player]
    if rest > 0.0:
        return 1
    if rest < 0.0:
        return -1
    return 0


def agreement_sign(subject, votes: dict, reputations: dict, weights: dict) -> int:
    """+1 if the subject's signed influence matches the rest of the roster's,
    -1 if it opposes it, 0 if either side is neutral (zero)."""
    _check_roster_maps(votes, reputations, weights)
    if subject not in votes:
        raise DomainError(f"subject {subject!r} not in roster")
    if len(votes) < 2:
        raise DomainError("agreement needs a roster of at least two")
    own = votes[subject] * reputations[subject] * weights[subject]
    own_sign = 1 if own > 0.0 else -1 if own < 0.0 else 0
    rest_sign = _rest_sign(subject, votes, reputations, weights)
    if own_sign == 0 or rest_sign == 0:
        return 0
    return 1 if own_sign == rest_sign else -1


def settle_evaluation(
    roster: set,
    votes: dict,
    received: dict,
    reputations: dict,
    weights: dict,
    schedule: PaymentSchedule,
    result: int,
) -> dict:
    """Per-player settlement amounts (micro-units) for one evaluation round.

    Annulled rounds pay everyone 0. Otherwise: players who received the
    design but revealed nothing (or revealed 0) owe the penalty; revealers
    with a non-zero vote earn the reward when they agree with the rest of
    the roster, owe the penalty when they disagree, and get 0 on a neutral
    comparison. Players who never received the design settle at 0.

    `votes` holds only revealed votes and must not name unreceived players.
    """
    if result not in (RESULT_VALID, RESULT_INVALID, RESULT_ANNULLED):
        raise DomainError(f"unknown result code {result!r}")
    for player in votes:
        if player not in roster:
            raise DomainError(f"vote from {player!r} outside the roster")
        if not received.get(player, False):
            raise DomainError(f"vote recorded for {player!r} who never received the design")
    if result == RESULT_ANNULLED:
        return {player: 0 for player in sorted(roster)}

    # Effective roster votes: silence counts as 0 for the sign comparisons.
    receivers = [p for p in sorted(roster) if received.get(p, False)]
    effective = {p: votes.get(p, 0) for p in receivers}
    payouts: dict = {}
    for player in sorted(roster):
        if not received.get(player, False):
            payouts[player] = 0
            continue
        vote = votes.get(player)
        if vote is None or vote == 0:
            payouts[player] = schedule.penalty_micro
            continue
        if len(effective) < 2:
            # Nobody else received: the comparison set is empty, neutral.
            payouts[player] = 0
            continue
        side = agreement_sign(
            player,
            effective,
            {p: reputations[p] for p in effective},
            {p: weights[p] for p in effective},
        )
        if side > 0:
            payouts[player] = schedule.reward_micro
        elif side < 0:
            payouts[player] = schedule.penalty_micro
        else:
            payouts[player] = 0
    return payouts
