import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx

from .election import TiePolicy, pairwise_winner, run_irv
from .errors import InputError, InternalDpError, PolicyError
from .kill import KillQuery, KillVerdict, kill_dp
from .tree_core import Tree
from .workers import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tournament:
    """Pairwise-loss tournament; an edge x -> y means x loses the election {x, y}"""

    n: int
    graph: nx.DiGraph

    def loses(self, x: int, y: int) -> bool:
        return self.graph.has_edge(x, y)

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return sorted(self.graph.edges())


def require_default_policy(tree: Tree, policy: Optional[TiePolicy]):
    if policy is not None and not policy.is_default_for(tree):
        raise PolicyError(f"zone computations need the default tie policy, got {policy.name!r}")


def build_loss_graph(tree: Tree, policy: Optional[TiePolicy] = None, jobs: int = 1) -> Tournament:
    policy = policy or TiePolicy.default(tree)
    pairs = [(x, y) for x in tree.vertices for y in tree.vertices if x < y]
    winners = parallel_map(lambda pair: pairwise_winner(tree, pair[0], pair[1], policy), pairs, jobs)

    graph = nx.DiGraph()
    graph.add_nodes_from(tree.vertices)
    for (x, y), winner in zip(pairs, winners):
        if winner == x:
            graph.add_edge(y, x)
        else:
            graph.add_edge(x, y)
    return Tournament(n=tree.n, graph=nx.freeze(graph))


def closure(tournament: Tournament, seed: Iterable[int]) -> frozenset:
    """Seed plus everything reachable from it along loss edges"""
    seed = set(seed)
    if not seed:
        raise InputError("closure needs a nonempty seed")
    missing = [v for v in seed if v not in tournament.graph]
    if missing:
        raise InputError(f"vertices {sorted(missing)} are not in the tournament")
    reached = set(seed)
    for v in seed:
        reached |= nx.descendants(tournament.graph, v)
    return frozenset(reached)


def is_closed(tournament: Tournament, zone: Iterable[int]) -> bool:
    zone = set(zone)
    return all(w in zone for v in zone for w in tournament.graph.successors(v))


def zone_generator(tournament: Tournament, zone: Iterable[int]) -> Optional[int]:
    """A vertex whose closure is exactly the zone, taken from the top strongly connected component"""
    zone = frozenset(zone)
    if not zone:
        raise InputError("zone must be nonempty")
    sub = tournament.graph.subgraph(zone)
    condensed = nx.condensation(sub)
    sources = [c for c in condensed.nodes if condensed.in_degree(c) == 0]
    generator = min(condensed.nodes[sources[0]]["members"])
    return generator if closure(tournament, [generator]) == zone else None


@dataclass(frozen=True)
class Refutation:
    u: int
    candidates: Tuple[int, ...]
    winner: int


@dataclass(frozen=True)
class ZoneReport:
    zone: frozenset
    is_zone: bool
    per_vertex: Dict[int, KillVerdict] = field(compare=False)
    refutation: Optional[Refutation] = None


def verify_zone(
    tree: Tree,
    zone: Iterable[int],
    policy: Optional[TiePolicy] = None,
    jobs: int = 1,
) -> ZoneReport:
    """A set S is a zone iff no u in S can be killed with opponents from outside S"""
    require_default_policy(tree, policy)
    zone = tree.check_vertices(zone, "zone vertex")
    if not zone:
        raise InputError("zone must be nonempty")

    outside = frozenset(tree.vertices) - zone
    members = sorted(zone)
    verdicts = parallel_map(lambda u: kill_dp(KillQuery(tree, u, outside)), members, jobs)
    per_vertex = dict(zip(members, verdicts))

    refutation = None
    for u in members:
        verdict = per_vertex[u]
        if not verdict.result:
            continue
        winner = run_irv(tree, verdict.witness).winner
        if winner in zone:
            raise InternalDpError(f"witness {verdict.witness} for vertex {u} elects {winner}, inside the zone")
        refutation = Refutation(u=u, candidates=verdict.witness, winner=winner)
        break

    report = ZoneReport(zone=zone, is_zone=refutation is None, per_vertex=per_vertex, refutation=refutation)
    logger.info(f"Zone {sorted(zone)}: {'holds' if report.is_zone else 'refuted'}")
    return report


def _zone_order(zone: frozenset):
    return len(zone), sorted(zone)


def singleton_closures(tree: Tree, tournament: Optional[Tournament] = None) -> List[frozenset]:
    """Distinct closures of single vertices, smallest first"""
    tournament = tournament or build_loss_graph(tree)
    distinct = {closure(tournament, [v]) for v in tree.vertices}
    return sorted(distinct, key=_zone_order)


def min_zone_report(tree: Tree, policy: Optional[TiePolicy] = None, jobs: int = 1) -> ZoneReport:
    require_default_policy(tree, policy)
    for candidate in singleton_closures(tree):
        report = verify_zone(tree, candidate, jobs=jobs)
        if report.is_zone:
            return report
    raise InternalDpError("the full vertex set failed zone verification")


def min_zone(tree: Tree, policy: Optional[TiePolicy] = None, jobs: int = 1) -> frozenset:
    return min_zone_report(tree, policy, jobs).zone


def enumerate_zone_reports(tree: Tree, policy: Optional[TiePolicy] = None, jobs: int = 1) -> List[ZoneReport]:
    require_default_policy(tree, policy)
    reports = [verify_zone(tree, candidate, jobs=jobs) for candidate in singleton_closures(tree)]
    return [r for r in reports if r.is_zone]


def enumerate_zones(tree: Tree, policy: Optional[TiePolicy] = None, jobs: int = 1) -> List[frozenset]:
    zones = [r.zone for r in enumerate_zone_reports(tree, policy, jobs)]
    check_nesting(zones)
    return zones


def check_nesting(zones: List[frozenset]) -> List[Tuple[frozenset, frozenset]]:
    """Pairs of zones where neither contains the other"""
    violations = []
    for i, a in enumerate(zones):
        for b in zones[i + 1:]:
            if not (a <= b or b <= a):
                violations.append((a, b))
                logger.warning(f"Zones {sorted(a)} and {sorted(b)} are not nested")
    return violations
