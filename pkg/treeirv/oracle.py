"""Brute-force references for Kill and zone questions.

Everything here enumerates candidate sets directly and runs the election
engine on each one. Nothing is pruned; these functions must stay obviously
correct because the dynamic program and the zone algorithms are tested
against them.
"""
import itertools
import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from . import config
from .election import TiePolicy, eliminates_in_round1, run_irv
from .errors import BudgetExceededError, InputError
from .tree_core import Tree, relabel_ids

logger = logging.getLogger(__name__)

MAX_ENUMERATION_N = 9


@dataclass(frozen=True)
class EnumerationBudget:
    max_n: int = field(default_factory=lambda: config.ORACLE_MAX_N)
    max_subsets: int = field(default_factory=lambda: config.ORACLE_MAX_SUBSETS)

    def check_n(self, n: int):
        if n > self.max_n:
            raise BudgetExceededError(f"oracle refuses n={n} (cap {self.max_n})")

    def check_subsets(self, count: int, what: str):
        if count > self.max_subsets:
            raise BudgetExceededError(f"oracle would enumerate {count} {what} (cap {self.max_subsets})")


def _subsets(items: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    for size in range(len(items) + 1):
        yield from itertools.combinations(items, size)


def _kill_sets(tree: Tree, u: int, allowed: Iterable[int], budget: Optional[EnumerationBudget]):
    budget = budget or EnumerationBudget()
    budget.check_n(tree.n)
    opponents = sorted(tree.check_vertices(allowed, "allowed vertex"))
    if u in opponents:
        raise InputError(f"designated vertex {u} cannot also be an allowed opponent")
    budget.check_subsets(1 << len(opponents), "candidate sets")
    for extra in _subsets(opponents):
        yield (u, *extra)


def brute_force_kill(
    tree: Tree,
    u: int,
    allowed: Iterable[int],
    budget: Optional[EnumerationBudget] = None,
) -> bool:
    """True iff some K with u in K, K within allowed plus u, elects someone other than u"""
    return brute_force_kill_witness(tree, u, allowed, budget) is not None


def brute_force_kill_witness(
    tree: Tree,
    u: int,
    allowed: Iterable[int],
    budget: Optional[EnumerationBudget] = None,
) -> Optional[Tuple[int, ...]]:
    tree.check_vertex(u, "designated vertex")
    policy = TiePolicy.default(tree)
    for candidates in _kill_sets(tree, u, allowed, budget):
        if run_irv(tree, candidates, policy).winner != u:
            return tuple(sorted(candidates))
    return None


def brute_force_round1_kill(
    tree: Tree,
    u: int,
    allowed: Iterable[int],
    budget: Optional[EnumerationBudget] = None,
) -> bool:
    """True iff some admissible K eliminates u in the very first round"""
    tree.check_vertex(u, "designated vertex")
    policy = TiePolicy.default(tree)
    return any(
        eliminates_in_round1(tree, candidates, u, policy)
        for candidates in _kill_sets(tree, u, allowed, budget)
    )


def election_table(tree: Tree, budget: Optional[EnumerationBudget] = None) -> Dict[frozenset, int]:
    """Winner of every nonempty candidate set"""
    budget = budget or EnumerationBudget()
    budget.check_n(tree.n)
    budget.check_subsets((1 << tree.n) - 1, "candidate sets")
    policy = TiePolicy.default(tree)
    vertices = list(tree.vertices)
    table = {}
    for size in range(1, tree.n + 1):
        for candidates in itertools.combinations(vertices, size):
            table[frozenset(candidates)] = run_irv(tree, candidates, policy).winner
    return table


def _zone_holds(table: Dict[frozenset, int], zone: frozenset) -> bool:
    return all(winner in zone for candidates, winner in table.items() if candidates & zone)


def brute_force_zone(tree: Tree, zone: Iterable[int], budget: Optional[EnumerationBudget] = None) -> bool:
    zone = tree.check_vertices(zone, "zone vertex")
    if not zone:
        raise InputError("zone must be nonempty")
    return _zone_holds(election_table(tree, budget), zone)


def brute_force_zones(tree: Tree, budget: Optional[EnumerationBudget] = None) -> List[frozenset]:
    """Every nonempty zone, smallest first"""
    table = election_table(tree, budget)
    zones = []
    for candidates in sorted(table, key=lambda s: (len(s), sorted(s))):
        if _zone_holds(table, candidates):
            zones.append(candidates)
    return zones


def brute_force_min_zone(tree: Tree, budget: Optional[EnumerationBudget] = None) -> frozenset:
    return brute_force_zones(tree, budget)[0]


def prufer_decode(sequence: Sequence[int], n: Optional[int] = None) -> Tree:
    """Labeled tree on 1..n from a 1-based Prüfer sequence"""
    if n is None:
        n = len(sequence) + 2
    if n == 1 and not sequence:
        return Tree(1, [])
    if n == 2 and not sequence:
        return Tree(2, [(1, 2)])
    if len(sequence) != n - 2 or any(not 1 <= s <= n for s in sequence):
        raise InputError(f"{list(sequence)} is not a Prüfer sequence for n={n}")
    graph = nx.from_prufer_sequence([s - 1 for s in sequence])
    return Tree(n, [(a + 1, b + 1) for a, b in graph.edges()])


def prufer_encode(tree: Tree) -> Tuple[int, ...]:
    if tree.n < 2:
        return ()
    graph = nx.relabel_nodes(nx.Graph(tree.graph), {v: v - 1 for v in tree.vertices})
    return tuple(s + 1 for s in nx.to_prufer_sequence(graph))


def scrambled_ids(n: int, count: int, seed: int = 0) -> List[Tuple[int, ...]]:
    """`count` fixed non-identity ID permutations of 1..n (fewer when n is tiny)"""
    rng = random.Random(seed)
    identity = tuple(range(1, n + 1))
    found: List[Tuple[int, ...]] = []
    seen = {identity}
    wanted = min(count, math.factorial(n) - 1)
    while len(found) < wanted:
        perm = list(identity)
        rng.shuffle(perm)
        perm = tuple(perm)
        if perm not in seen:
            seen.add(perm)
            found.append(perm)
    return found


def enumerate_small_trees(n: int, id_permutations: int = 1, seed: int = 0) -> Iterator[Tree]:
    """All n**(n-2) labeled trees, each with identity IDs then extra scrambled IDs"""
    if not 1 <= n <= MAX_ENUMERATION_N:
        raise BudgetExceededError(f"labeled tree enumeration supports 1 <= n <= {MAX_ENUMERATION_N}, got {n}")
    extra = scrambled_ids(n, id_permutations - 1, seed)
    if n == 1:
        yield Tree(1, [])
        return
    for sequence in itertools.product(range(1, n + 1), repeat=n - 2):
        tree = prufer_decode(sequence, n)
        yield tree
        for ids in extra:
            yield relabel_ids(tree, ids)


def enumerate_unlabeled_trees(n: int, id_permutations: int = 1, seed: int = 0) -> Iterator[Tree]:
    """One tree per isomorphism class, with the same ID permutation scheme"""
    if n < 2:
        yield from enumerate_small_trees(n, id_permutations, seed)
        return
    extra = scrambled_ids(n, id_permutations - 1, seed)
    for graph in nx.nonisomorphic_trees(n):
        tree = Tree(n, [(a + 1, b + 1) for a, b in graph.edges()])
        yield tree
        for ids in extra:
            yield relabel_ids(tree, ids)


def random_tree(n: int, rng: random.Random) -> Tree:
    """Uniform labeled tree via a random Prüfer sequence, with shuffled IDs"""
    sequence = [rng.randint(1, n) for _ in range(max(n - 2, 0))]
    tree = prufer_decode(sequence, n) if n >= 2 else Tree(1, [])
    ids = list(range(1, n + 1))
    rng.shuffle(ids)
    return relabel_ids(tree, ids)


def micro_irv(n: int, edges: Sequence[Tuple[int, int]], ids: Sequence[int], candidates: Iterable[int]) -> int:
    """Stand-alone IRV winner, sharing no code with the election engine"""
    adjacency = {v: [] for v in range(1, n + 1)}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)

    def hops_from(source):
        seen = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in adjacency[v]:
                if w not in seen:
                    seen[w] = seen[v] + 1
                    queue.append(w)
        return seen

    hops = {v: hops_from(v) for v in range(1, n + 1)}
    ident = {v: ids[v - 1] for v in range(1, n + 1)}
    alive = set(candidates)
    while len(alive) > 1:
        votes = dict.fromkeys(alive, 0)
        for voter in range(1, n + 1):
            best = None
            for c in alive:
                if best is None or (hops[voter][c], ident[c]) < (hops[voter][best], ident[best]):
                    best = c
            votes[best] += 1
        fewest = min(votes.values())
        alive.remove(max((c for c in alive if votes[c] == fewest), key=lambda c: ident[c]))
    return alive.pop()
