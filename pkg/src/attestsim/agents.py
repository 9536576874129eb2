"""Agents for the protocol simulator.

Strategies are deliberately simple and non-adaptive:

- TruthfulEffort(quality): pays the effort cost to observe the design's
  true validity through a symmetric noisy channel (correct with
  probability `quality`) and votes the observation.
- Guess(bias): votes +1 with probability `bias`, else -1, without paying
  for effort.
- FreeRide: registers and receives but never commits.
- FixedVote(vote): always commits and reveals the same vote (0 allowed).
- Colluder(group, target): every member of `group` votes `target`.
- Abstain: never registers at all.

The manager confirms receipt on-chain only after delivering bytes whose
hash matches the announcement. The identity provider signs each account id
once and hands the signature out on request.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .crypto import commitment_digest, sign_account_id, signing_key_from_seed
from .ledger import SimLedger


@dataclass(frozen=True)
class TruthfulEffort:
    quality: float

    def __post_init__(self) -> None:
        if not 0.5 <= self.quality <= 1.0:
            raise ValueError("observation quality must lie in [0.5, 1]")


@dataclass(frozen=True)
class Guess:
    bias: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.bias <= 1.0:
            raise ValueError("guess bias must lie in [0, 1]")


@dataclass(frozen=True)
class FreeRide:
    pass


@dataclass(frozen=True)
class FixedVote:
    vote: int

    def __post_init__(self) -> None:
        if self.vote not in (-1, 0, 1):
            raise ValueError("fixed vote must be -1, 0 or +1")


@dataclass(frozen=True)
class Colluder:
    group: str
    target: int

    def __post_init__(self) -> None:
        if self.target not in (-1, 1):
            raise ValueError("collusion target must be -1 or +1")


@dataclass(frozen=True)
class Abstain:
    pass


STRATEGY_KINDS = {
    "truthful_effort": TruthfulEffort,
    "guess": Guess,
    "free_ride": FreeRide,
    "fixed_vote": FixedVote,
    "colluder": Colluder,
    "abstain": Abstain,
}


_FLOAT_PARAMS = frozenset({"quality", "bias"})
_INT_PARAMS = frozenset({"vote", "target"})


def strategy_from_config(spec: dict):
    kind = spec.get("kind")
    cls = STRATEGY_KINDS.get(kind)
    if cls is None:
        raise ValueError(f"unknown strategy kind {kind!r}")
    params = {}
    for key, value in spec.items():
        if key == "kind":
            continue
        if key in _FLOAT_PARAMS:
            value = float(value)  # scenario files parse numbers as strings
        elif key in _INT_PARAMS and (isinstance(value, bool) or not isinstance(value, int)):
            raise ValueError(f"{key} must be an integer")
        params[key] = value
    return cls(**params)


@dataclass
class Agent:
    account: str
    strategy: object
    effort_count: int = 0
    payouts: list = field(default_factory=list)

    def registers(self) -> bool:
        return not isinstance(self.strategy, Abstain)

    def commits(self) -> bool:
        return not isinstance(self.strategy, (Abstain, FreeRide))


def observe(agent: Agent, truth: bool, rng) -> int:
    """One costly observation of the design's true validity.

    The channel is symmetric: the correct sign comes through with
    probability `quality`, the flipped sign otherwise. Charges one unit of
    effort to the agent's tally.
    """
    if not isinstance(agent.strategy, TruthfulEffort):
        raise ValueError("only TruthfulEffort agents observe")
    agent.effort_count += 1
    correct = 1 if truth else -1
    return correct if rng.random() < agent.strategy.quality else -correct


def decide_vote(agent: Agent, truth: bool, rng) -> int | None:
    """The vote this agent will commit for the current design, or None."""
    strategy = agent.strategy
    if isinstance(strategy, TruthfulEffort):
        return observe(agent, truth, rng)
    if isinstance(strategy, Guess):
        return 1 if rng.random() < strategy.bias else -1
    if isinstance(strategy, FixedVote):
        return strategy.vote
    if isinstance(strategy, Colluder):
        return strategy.target
    return None


def utility_micro(agent: Agent, effort_cost_micro: int) -> int:
    """Settlement income minus effort spent, in micro-units."""
    return sum(agent.payouts) - agent.effort_count * effort_cost_micro


class IdentityProvider:
    """Signs account ids once; players attach the signature when registering."""

    def __init__(self, key_seed: bytes):
        self._key = signing_key_from_seed(key_seed)
        self._issued: dict[str, bytes] = {}

    @property
    def public_key(self) -> bytes:
        from .crypto import public_bytes

        return public_bytes(self._key)

    def signature_for(self, account: str) -> bytes:
        if account not in self._issued:
            self._issued[account] = sign_account_id(self._key, account)
        return self._issued[account]


class Manager:
    """Distributes design bytes and confirms receipt on-chain.

    Receipt is only ever flagged after a hash check on the actual bytes, so
    a Received event in the trace always has a verified delivery behind it.
    """

    def __init__(self, account: str, ledger: SimLedger):
        self.account = account
        self.ledger = ledger
        self.delivered: set = set()

    def distribute(
        self, design: int, design_bytes: bytes, announced_hash: bytes, players, at: int
    ) -> None:
        if hashlib.sha256(design_bytes).digest() != announced_hash:
            return  # refuse to confirm receipt of bytes that do not match
        for player in players:
            self.delivered.add((design, player))
            self.ledger.submit(
                self.account, "set_received", {"design": design, "player": player}, at
            )


def run_party_round(
    ledger: SimLedger,
    design: int,
    round_name: str,
    agents: list,
    deposits: dict,
    design_bytes: bytes,
    announced_hash: bytes,
    truth: bool,
    manager: Manager,
    identity: IdentityProvider,
    settle_initiator: str,
    commit_window: int,
    reveal_window: int,
    start: int,
    rng,
):
    """Drive one commit-reveal round for `design` and return its receipts.

    Schedule, relative to `start` (the announce tick for evaluation rounds,
    the feedback opening tick otherwise): registrations at +1, receipt
    confirmations at +2, commits at +3, reveals one tick after the commit
    deadline, settlement one tick after the reveal deadline. Requires
    commit_window >= 3.
    """
    for agent in agents:
        if agent.registers():
            ledger.submit(
                agent.account,
                "register",
                {
                    "design": design,
                    "deposit": deposits[agent.account],
                    "signature": identity.signature_for(agent.account),
                },
                start + 1,
            )
    receipts = ledger.advance(start + 1)
    registered = {
        r.message.sender
        for r in receipts
        if r.accepted and r.message.op == "register" and r.message.args["design"] == design
    }

    manager.distribute(
        design,
        design_bytes,
        announced_hash,
        [a.account for a in agents if a.account in registered],
        start + 2,
    )
    receipts += ledger.advance(start + 2)

    openings: dict[str, tuple[int, bytes]] = {}
    for agent in agents:
        if agent.account not in registered or not agent.commits():
            continue
        vote = decide_vote(agent, truth, rng)
        blinding = rng.randbytes(32)
        openings[agent.account] = (vote, blinding)
        ledger.submit(
            agent.account,
            "commit",
            {"design": design, "digest": commitment_digest(vote, blinding)},
            start + 3,
        )
    receipts += ledger.advance(start + 3)

    reveal_at = start + commit_window + 1
    for agent in agents:
        if agent.account in openings:
            vote, blinding = openings[agent.account]
            ledger.submit(
                agent.account,
                "reveal",
                {"design": design, "vote": vote, "blinding": blinding},
                reveal_at,
            )
    receipts += ledger.advance(reveal_at)

    settle_at = start + commit_window + reveal_window + 1
    ledger.submit(settle_initiator, "calculate_result", {"design": design}, settle_at)
    receipts += ledger.advance(settle_at)
    return receipts
