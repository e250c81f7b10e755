import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from .errors import InputError, PolicyError
from .tree_core import Tree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TiePolicy:
    """Deterministic tie rules.

    voter_priority lists vertices from most to least preferred when a voter is
    equidistant from several candidates. elimination_priority lists vertices in
    the order they are eliminated when several candidates share the lowest
    tally.
    """

    name: str
    voter_priority: Tuple[int, ...]
    elimination_priority: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.voter_priority)
        expected = list(range(1, n + 1))
        if sorted(self.voter_priority) != expected:
            raise PolicyError(f"policy {self.name}: voter priority is not a permutation of 1..{n}")
        if sorted(self.elimination_priority) != expected:
            raise PolicyError(f"policy {self.name}: elimination priority is not a permutation of 1..{n}")

    @cached_property
    def voter_rank(self) -> Dict[int, int]:
        return {v: i for i, v in enumerate(self.voter_priority)}

    @cached_property
    def elimination_rank(self) -> Dict[int, int]:
        return {v: i for i, v in enumerate(self.elimination_priority)}

    @classmethod
    def default(cls, tree: Tree) -> "TiePolicy":
        """Distance ties go to the smaller ID; the largest ID is eliminated first"""
        return cls.from_keys(
            "default",
            tree,
            voter_key=lambda v: tree.id(v),
            elimination_key=lambda v: -tree.id(v),
        )

    @classmethod
    def from_keys(
        cls,
        name: str,
        tree: Tree,
        voter_key: Callable[[int], object],
        elimination_key: Callable[[int], object],
    ) -> "TiePolicy":
        return cls(
            name=name,
            voter_priority=tuple(sorted(tree.vertices, key=voter_key)),
            elimination_priority=tuple(sorted(tree.vertices, key=elimination_key)),
        )

    def is_default_for(self, tree: Tree) -> bool:
        reference = TiePolicy.default(tree)
        return (
            self.voter_priority == reference.voter_priority
            and self.elimination_priority == reference.elimination_priority
        )

    def check_tree(self, tree: Tree) -> "TiePolicy":
        if len(self.voter_priority) != tree.n:
            raise PolicyError(f"policy {self.name} covers {len(self.voter_priority)} vertices, tree has {tree.n}")
        return self


def _prop2_policy(tree: Tree) -> TiePolicy:
    # Ties are broken against the vertices of minimum social cost
    costs = tree.dist.sum(axis=1)
    best = int(costs.min())
    central = {v for v in tree.vertices if int(costs[v - 1]) == best}
    return TiePolicy.from_keys(
        "prop2",
        tree,
        voter_key=lambda v: (v in central, tree.id(v)),
        elimination_key=lambda v: (v not in central, -tree.id(v)),
    )


def _prop3_policy(tree: Tree) -> TiePolicy:
    # Voters lean toward leaves; non-leaves go first among last-place candidates
    leaves = set(tree.leaves)
    return TiePolicy.from_keys(
        "prop3",
        tree,
        voter_key=lambda v: (v not in leaves, tree.id(v)),
        elimination_key=lambda v: (v in leaves, -tree.id(v)),
    )


PRESETS: Dict[str, Callable[[Tree], TiePolicy]] = {
    "default": TiePolicy.default,
    "prop2": _prop2_policy,
    "prop3": _prop3_policy,
}


def policy_preset(name: str, tree: Tree) -> TiePolicy:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise PolicyError(f"unknown policy preset {name!r}; choose one of {', '.join(PRESETS)}")
    return factory(tree)


@dataclass(frozen=True)
class RoundRecord:
    tally: Dict[int, int]
    eliminated: int


@dataclass(frozen=True)
class ElectionTrace:
    candidate_set: frozenset
    rounds: Tuple[RoundRecord, ...]
    winner: int

    @property
    def eliminations(self) -> List[int]:
        return [r.eliminated for r in self.rounds]

    def remaining_at(self, round_index: int) -> frozenset:
        """Candidates still standing at the start of round `round_index` (0-based)"""
        gone = set(self.eliminations[:round_index])
        return frozenset(c for c in self.candidate_set if c not in gone)


def preference_key(tree: Tree, voter: int, candidate: int, policy: TiePolicy) -> Tuple[int, int]:
    """Smaller key means more preferred"""
    return tree.d(voter, candidate), policy.voter_rank[candidate]


def top_choice(tree: Tree, voter: int, candidates: Iterable[int], policy: TiePolicy) -> int:
    row = tree.dist_rows[voter]
    rank = policy.voter_rank
    return min(candidates, key=lambda c: (row[c], rank[c]))


def round1_tally(tree: Tree, candidates: Iterable[int], policy: TiePolicy) -> Dict[int, int]:
    """Plurality counts with every voter on its top remaining candidate"""
    standing = sorted(candidates)
    tally = {c: 0 for c in standing}
    for voter in tree.vertices:
        tally[top_choice(tree, voter, standing, policy)] += 1
    return tally


def run_irv(tree: Tree, candidates: Iterable[int], policy: Optional[TiePolicy] = None) -> ElectionTrace:
    if policy is None:
        policy = TiePolicy.default(tree)
    policy.check_tree(tree)
    candidate_set = tree.check_vertices(candidates, "candidate")
    if not candidate_set:
        raise InputError("candidate set is empty")

    elimination_rank = policy.elimination_rank
    remaining = set(candidate_set)
    rounds: List[RoundRecord] = []
    while len(remaining) > 1:
        tally = round1_tally(tree, remaining, policy)
        loser = min(remaining, key=lambda c: (tally[c], elimination_rank[c]))
        logger.debug(f"Round {len(rounds) + 1}: tally={tally} eliminated={loser}")
        rounds.append(RoundRecord(tally=tally, eliminated=loser))
        remaining.discard(loser)

    return ElectionTrace(candidate_set=candidate_set, rounds=tuple(rounds), winner=next(iter(remaining)))


def restrict_trace(trace: ElectionTrace, round_index: int) -> ElectionTrace:
    """Suffix of a trace starting at round `round_index`, as its own election"""
    if not 0 <= round_index <= len(trace.rounds):
        raise InputError(f"round index {round_index} outside 0..{len(trace.rounds)}")
    return ElectionTrace(
        candidate_set=trace.remaining_at(round_index),
        rounds=trace.rounds[round_index:],
        winner=trace.winner,
    )


def pairwise_winner(tree: Tree, x: int, y: int, policy: Optional[TiePolicy] = None) -> int:
    if x == y:
        raise InputError(f"pairwise election needs two distinct candidates, got {x} twice")
    return run_irv(tree, (x, y), policy).winner


def eliminates_in_round1(tree: Tree, candidates: Iterable[int], u: int, policy: Optional[TiePolicy] = None) -> bool:
    """True when u is the first candidate eliminated"""
    if policy is None:
        policy = TiePolicy.default(tree)
    standing = set(candidates)
    if u not in standing or len(standing) < 2:
        return False
    tally = round1_tally(tree, standing, policy)
    rank = policy.elimination_rank
    return min(standing, key=lambda c: (tally[c], rank[c])) == u


def format_trace(trace: ElectionTrace) -> str:
    lines = [f"candidates: {' '.join(map(str, sorted(trace.candidate_set)))}"]
    for i, record in enumerate(trace.rounds, start=1):
        tally = " ".join(f"{c}={votes}" for c, votes in sorted(record.tally.items()))
        lines.append(f"round {i}: {tally} | eliminated {record.eliminated}")
    lines.append(f"winner: {trace.winner}")
    return "\n".join(lines)
