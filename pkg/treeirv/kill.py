"""Kill(T, u, A): can u be made to lose using opponents drawn only from A.

The decision reduces to a round-1 question: u loses some election iff some
candidate set K = {u} plus an antichain of A (rooted at u) eliminates u in the
first round. The first round is decided bottom-up. For every vertex x and
every possible best outside candidate e, the table F[x, e] lists the feasible
summaries of how the voters of T_x split their first-round votes:

    r1, v1      best candidate inside T_x (under x's preference key) and its votes
    r2, v2      best candidate inside T_x outside r1's child subtree
    m_rest      smallest final tally among the other candidates inside T_x
    M_rest      largest ID among the candidates attaining m_rest
    a           votes from T_x that go to e

Votes for every candidate other than r1 are final once x is processed:
voters outside T_x rank the candidates of T_x exactly as x does.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from . import config
from .election import TiePolicy, eliminates_in_round1
from .errors import InputError, InternalDpError
from .tree_core import RootedView, Tree, root_at
from .workers import parallel_map

logger = logging.getLogger(__name__)


class DpSummary(NamedTuple):
    r1: Optional[int]
    v1: int
    r2: Optional[int]
    v2: int
    m_rest: int
    M_rest: int
    a: int


# (y, e_y, child summary) per child of x
ChildPart = Tuple[int, int, DpSummary]


class Choice(NamedTuple):
    at_x: bool
    parts: Tuple[ChildPart, ...]


Table = Dict[DpSummary, Choice]


@dataclass(frozen=True)
class KillQuery:
    tree: Tree
    u: int
    allowed: frozenset

    def __post_init__(self):
        self.tree.check_vertex(self.u, "designated vertex")
        allowed = self.tree.check_vertices(self.allowed, "allowed vertex")
        if self.u in allowed:
            raise InputError(f"designated vertex {self.u} cannot also be an allowed opponent")
        object.__setattr__(self, "allowed", allowed)

    @classmethod
    def build(cls, tree: Tree, u: int, allowed: Iterable[int]) -> "KillQuery":
        return cls(tree=tree, u=u, allowed=frozenset(allowed))


@dataclass
class KillStats:
    tables_built: int = 0
    outer_tuples: int = 0
    peak_inner_states: int = 0
    state_cap: int = 0


@dataclass(frozen=True)
class KillVerdict:
    result: bool
    witness: Optional[Tuple[int, ...]] = None
    stats: KillStats = field(default_factory=KillStats, compare=False)


def is_antichain(view: RootedView, vertices: Iterable[int]) -> bool:
    """No vertex of the set is a proper ancestor of another"""
    members = list(vertices)
    return not any(view.is_ancestor(a, b) for a in members for b in members)


def verify_witness(query: KillQuery, witness: Iterable[int]) -> bool:
    """The witness is admissible and eliminates u in round 1"""
    candidates = set(witness)
    opponents = candidates - {query.u}
    if query.u not in candidates or not opponents <= query.allowed:
        return False
    if not is_antichain(root_at(query.tree, query.u), opponents):
        return False
    return eliminates_in_round1(query.tree, candidates, query.u, TiePolicy.default(query.tree))


class KillDp:
    """Bottom-up first-round dynamic program rooted at the designated vertex"""

    def __init__(self, query: KillQuery, jobs: int = 1):
        self.query = query
        self.tree = query.tree
        self.u = query.u
        self.allowed = query.allowed
        self.jobs = jobs
        self.view = root_at(self.tree, self.u)
        self.inf = self.tree.n + 1
        self.neg = 0
        self._ids = self.tree.id_table
        self._rows = self.tree.dist_rows
        self.tables: Dict[Tuple[int, int], Table] = {}
        self.stats = KillStats(state_cap=config.kill_state_cap(self.tree.n))
        self._allowed_below = {
            x: tuple(v for v in self.view.subtree(x) if v != x and v in self.allowed)
            for x in self.view.preorder
        }

    def kappa(self, x: int, c: int) -> Tuple[int, int]:
        return self._rows[x][c], self._ids[c]

    def closer(self, y: int, a: int, b: int) -> int:
        return a if self.kappa(y, a) < self.kappa(y, b) else b

    def combine(self, m: int, M: int, m2: int, M2: int) -> Tuple[int, int]:
        """Keep the smaller tally; on equal tallies keep the larger ID"""
        if m2 < m:
            return m2, M2
        if m2 == m and M2 > M:
            return m, M2
        return m, M

    def outside_domain(self, x: int) -> List[int]:
        """Vertices that can stand for the best candidate outside T_x"""
        return [self.u] + [e for e in sorted(self.allowed) if not self.view.in_subtree(e, x)]

    def table(self, x: int, e: int) -> Table:
        try:
            return self.tables[(x, e)]
        except KeyError:
            raise InternalDpError(f"missing DP table for vertex {x} with outside representative {e}")

    def dp_leaf_case(self, x: int, e: int) -> Table:
        if self.view.in_subtree(e, x):
            raise InternalDpError(f"outside representative {e} lies inside T_{x}")
        table: Table = {DpSummary(None, 0, None, 0, self.inf, self.neg, 1): Choice(False, ())}
        if x in self.allowed:
            table[DpSummary(x, 1, None, 0, self.inf, self.neg, 0)] = Choice(True, ())
        return table

    def dp_merge(self, x: int, e: int) -> Table:
        return self._merge_with_peak(x, e)[0]

    def _merge_with_peak(self, x: int, e: int) -> Tuple[Table, int]:
        """Merged table plus the largest inner state space seen while building it"""
        if self.view.in_subtree(e, x):
            raise InternalDpError(f"outside representative {e} lies inside T_{x}")
        table: Table = {}
        if x in self.allowed:
            # every voter of T_x is strictly closer to x than to anything outside
            size = self.view.subtree_size[x]
            table[DpSummary(x, size, None, 0, self.inf, self.neg, 0)] = Choice(True, ())

        below = self._allowed_below[x]
        peak = self._aggregate(x, e, None, None, table)
        for r1 in below:
            y_star = self.view.child_toward(x, r1)
            k1 = self.kappa(x, r1)
            peak = max(peak, self._aggregate(x, e, r1, None, table))
            for r2 in below:
                if self.view.in_subtree(r2, y_star) or self.kappa(x, r2) < k1:
                    continue
                peak = max(peak, self._aggregate(x, e, r1, r2, table))
        return table, peak

    def _child_options(self, x: int, e: int, y: int, r1, r2, y_star, y_second):
        """Child tuples consistent with (r1, r2), mapped to their contributions"""
        if y == y_star:
            e_y = e if r2 is None else self.closer(y, e, r2)
        else:
            e_y = e if r1 is None else self.closer(y, e, r1)
        k2 = self.kappa(x, r2) if r2 is not None else None

        options = {}
        for s in self.table(y, e_y):
            d1 = d2 = de = 0
            m, M = s.m_rest, s.M_rest
            if s.r2 is not None:
                m, M = self.combine(m, M, s.v2, self._ids[s.r2])

            if y == y_star:
                if s.r1 != r1:
                    continue
                d1 = s.v1
            elif y == y_second:
                if s.r1 != r2:
                    continue
                d2 = s.v1
            else:
                if s.r1 is not None:
                    if k2 is None or self.kappa(x, s.r1) < k2:
                        continue
                    m, M = self.combine(m, M, s.v1, self._ids[s.r1])

            if e_y == e:
                de = s.a
            elif e_y == r1:
                d1 += s.a
            else:
                d2 += s.a
            options.setdefault((d1, d2, de, m, M), s)
        return e_y, options

    def _aggregate(self, x: int, e: int, r1, r2, table: Table) -> int:
        y_star = self.view.child_toward(x, r1) if r1 is not None else None
        y_second = self.view.child_toward(x, r2) if r2 is not None else None

        states: Dict[Tuple[int, int, int, int, int], Tuple[ChildPart, ...]] = {
            (0, 0, 0, self.inf, self.neg): ()
        }
        peak = 1
        for y in self.view.children[x]:
            e_y, options = self._child_options(x, e, y, r1, r2, y_star, y_second)
            if not options:
                return peak
            merged = {}
            for (v1, v2, a, m, M), parts in states.items():
                for (d1, d2, de, mc, Mc), s in options.items():
                    m2, M2 = self.combine(m, M, mc, Mc)
                    key = (v1 + d1, v2 + d2, a + de, m2, M2)
                    if key not in merged:
                        merged[key] = parts + ((y, e_y, s),)
            states = merged
            peak = max(peak, len(states))

        # boundary voter x
        x_votes_r1 = r1 is not None and self.kappa(x, r1) < self.kappa(x, e)
        for (v1, v2, a, m, M), parts in states.items():
            summary = DpSummary(r1, v1 + x_votes_r1, r2, v2, m, M, a + (not x_votes_r1))
            table.setdefault(summary, Choice(False, parts))
        return peak

    def build_vertex(self, x: int):
        leaf = self.view.is_leaf(x)

        def compute(e: int) -> Tuple[Table, int]:
            return (self.dp_leaf_case(x, e), 0) if leaf else self._merge_with_peak(x, e)

        domain = self.outside_domain(x)
        results = parallel_map(compute, domain, self.jobs)
        for e, (table, peak) in zip(domain, results):
            self.tables[(x, e)] = table
            self.stats.peak_inner_states = max(self.stats.peak_inner_states, peak)
            self.stats.tables_built += 1
            self.stats.outer_tuples += len(table)
        logger.debug(f"DP vertex {x}: {len(domain)} tables, {self.stats.outer_tuples} tuples so far")
        if self.stats.outer_tuples > self.stats.state_cap:
            raise InternalDpError(
                f"DP stored {self.stats.outer_tuples} tuples, above the cap {self.stats.state_cap}"
            )

    def dp_root_decision(self) -> KillVerdict:
        u = self.u
        states: Dict[Tuple[int, int, int], Tuple[ChildPart, ...]] = {(0, self.inf, self.neg): ()}
        for y in self.view.children[u]:
            options = {}
            for s in self.table(y, u):
                m, M = s.m_rest, s.M_rest
                if s.r1 is not None:
                    m, M = self.combine(m, M, s.v1, self._ids[s.r1])
                if s.r2 is not None:
                    m, M = self.combine(m, M, s.v2, self._ids[s.r2])
                options.setdefault((s.a, m, M), s)
            merged = {}
            for (a, m, M), parts in states.items():
                for (da, mc, Mc), s in options.items():
                    m2, M2 = self.combine(m, M, mc, Mc)
                    merged.setdefault((a + da, m2, M2), parts + ((y, u, s),))
            states = merged

        own_id = self._ids[u]
        for (a, m, M), parts in sorted(states.items()):
            if m == self.inf:
                continue
            votes_u = 1 + a
            if votes_u < m or (votes_u == m and own_id > M):
                return KillVerdict(True, self.witness(parts), self.stats)
        return KillVerdict(False, None, self.stats)

    def witness(self, parts: Tuple[ChildPart, ...]) -> Tuple[int, ...]:
        """Backtrack stored choices into the candidate set they encode"""
        chosen = {self.u}
        stack = list(parts)
        while stack:
            y, e_y, summary = stack.pop()
            choice = self.tables[(y, e_y)][summary]
            if choice.at_x:
                chosen.add(y)
            else:
                stack.extend(choice.parts)
        return tuple(sorted(chosen))

    def run(self) -> KillVerdict:
        if not self.allowed:
            return KillVerdict(False, None, self.stats)
        for x in self.view.postorder():
            if x != self.u:
                self.build_vertex(x)
        return self.dp_root_decision()


def minimal_witness(query: KillQuery, verdict: KillVerdict, jobs: int = 1) -> KillVerdict:
    """Drop opponents from the largest vertex down while u can still be killed.

    Kill is monotone in the allowed set, so the survivors are exactly the
    opponents of the returned witness.
    """
    allowed = set(query.allowed)
    best = verdict
    for v in sorted(query.allowed, reverse=True):
        if v not in best.witness:
            allowed.discard(v)
            continue
        trial = KillDp(KillQuery(query.tree, query.u, frozenset(allowed - {v})), jobs).run()
        if trial.result:
            allowed.discard(v)
            best = trial
    return KillVerdict(True, best.witness, verdict.stats)


def kill_dp(query: KillQuery, jobs: int = 1) -> KillVerdict:
    verdict = KillDp(query, jobs).run()
    if verdict.result:
        verdict = minimal_witness(query, verdict, jobs)
    logger.debug(
        f"Kill(u={query.u}, |A|={len(query.allowed)}) = {verdict.result} "
        f"({verdict.stats.outer_tuples} tuples in {verdict.stats.tables_built} tables)"
    )
    return verdict
