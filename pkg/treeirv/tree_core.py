import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import InputError, TreeFormatError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def all_pairs_distance(tree: "Tree") -> np.ndarray:
    """Hop counts between every pair of vertices, one BFS per source"""
    n = tree.n
    dist = np.zeros((n, n), dtype=np.int64)
    for source, lengths in nx.all_pairs_shortest_path_length(tree.graph):
        for target, hops in lengths.items():
            dist[source - 1, target - 1] = hops
    dist.setflags(write=False)
    return dist


class Tree:
    """Immutable unweighted tree on vertices 1..n with a tie-break ID per vertex"""

    __slots__ = ("n", "edges", "graph", "_ids", "dist", "_rows", "_adjacency")

    def __init__(self, n: int, edges: Iterable[Edge], ids: Optional[Sequence[int]] = None):
        if n < 1:
            raise TreeFormatError("bad_count", f"vertex count must be at least 1, got {n}")

        canonical = []
        seen = set()
        for a, b in edges:
            if not (1 <= a <= n and 1 <= b <= n):
                raise TreeFormatError("bad_vertex", f"edge {a} {b} names a vertex outside 1..{n}")
            if a == b:
                raise TreeFormatError("cycle", f"self-loop at vertex {a}")
            edge = (min(a, b), max(a, b))
            if edge in seen:
                raise TreeFormatError("duplicate_edge", f"edge {edge[0]} {edge[1]} listed twice")
            seen.add(edge)
            canonical.append(edge)

        graph = nx.Graph()
        graph.add_nodes_from(range(1, n + 1))
        graph.add_edges_from(canonical)
        if not nx.is_connected(graph):
            parts = nx.number_connected_components(graph)
            raise TreeFormatError("disconnected", f"graph has {parts} components")
        if len(canonical) != n - 1:
            cycle = nx.find_cycle(graph)
            raise TreeFormatError("cycle", f"cycle through vertices {sorted({a for a, _ in cycle})}")

        if ids is None:
            ids = list(range(1, n + 1))
        ids = [int(i) for i in ids]
        if sorted(ids) != list(range(1, n + 1)):
            raise TreeFormatError("bad_ids", f"ids must be a permutation of 1..{n}, got {ids}")

        self.n = n
        self.edges: Tuple[Edge, ...] = tuple(sorted(canonical))
        self.graph = nx.freeze(graph)
        # index 0 is padding so vertices index directly
        self._ids: Tuple[int, ...] = (0, *ids)
        self._adjacency: Tuple[Tuple[int, ...], ...] = (
            (),
            *(tuple(sorted(graph.neighbors(v))) for v in range(1, n + 1)),
        )
        self.dist = all_pairs_distance(self)
        self._rows: Tuple[Tuple[int, ...], ...] = (
            (),
            *((0, *(int(h) for h in self.dist[v - 1])) for v in range(1, n + 1)),
        )

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @property
    def id_of(self) -> Dict[int, int]:
        return {v: self._ids[v] for v in self.vertices}

    @property
    def ids(self) -> Tuple[int, ...]:
        """IDs in vertex order"""
        return self._ids[1:]

    @property
    def id_table(self) -> Tuple[int, ...]:
        """IDs indexed by vertex (index 0 unused)"""
        return self._ids

    @property
    def dist_rows(self) -> Tuple[Tuple[int, ...], ...]:
        """Distances as nested tuples indexed rows[a][b] with 1-based vertices"""
        return self._rows

    def id(self, v: int) -> int:
        return self._ids[v]

    def d(self, a: int, b: int) -> int:
        return self._rows[a][b]

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self._adjacency[v]

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])

    @property
    def leaves(self) -> List[int]:
        return [v for v in self.vertices if len(self._adjacency[v]) <= 1]

    def has_identity_ids(self) -> bool:
        return all(self._ids[v] == v for v in self.vertices)

    def check_vertex(self, v: int, what: str = "vertex") -> int:
        if not isinstance(v, int) or not 1 <= v <= self.n:
            raise InputError(f"{what} {v!r} is not a vertex of this tree (1..{self.n})")
        return v

    def check_vertices(self, vertices: Iterable[int], what: str = "vertex") -> frozenset:
        return frozenset(self.check_vertex(v, what) for v in vertices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return (self.n, self.edges, self._ids) == (other.n, other.edges, other._ids)

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self._ids))

    def __repr__(self) -> str:
        suffix = "" if self.has_identity_ids() else f", ids={list(self.ids)}"
        return f"Tree(n={self.n}, edges={list(self.edges)}{suffix})"


def relabel_ids(tree: Tree, ids: Sequence[int]) -> Tree:
    """Same topology with a different tie-break ID permutation"""
    return Tree(tree.n, tree.edges, ids)


class RootedView:
    """Parent/children/Euler-interval data for a tree rooted at one vertex"""

    __slots__ = ("tree", "root", "parent", "children", "subtree_size", "tin", "tout", "preorder", "_postorder")

    def __init__(self, tree: Tree, root: int):
        self.tree = tree
        self.root = root
        parent = {root: root}
        children: Dict[int, Tuple[int, ...]] = {}
        tin: Dict[int, int] = {}
        tout: Dict[int, int] = {}
        preorder: List[int] = []
        postorder: List[int] = []

        # iterative DFS with ascending child order
        stack = [(root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                tout[v] = len(preorder) - 1
                postorder.append(v)
                continue
            tin[v] = len(preorder)
            preorder.append(v)
            kids = tuple(w for w in tree.neighbors(v) if w not in parent)
            children[v] = kids
            for w in kids:
                parent[w] = v
            stack.append((v, True))
            for w in reversed(kids):
                stack.append((w, False))

        self.parent = parent
        self.children = children
        self.tin = tin
        self.tout = tout
        self.preorder: Tuple[int, ...] = tuple(preorder)
        self._postorder: Tuple[int, ...] = tuple(postorder)
        self.subtree_size = {v: tout[v] - tin[v] + 1 for v in preorder}

    def in_subtree(self, v: int, x: int) -> bool:
        """True when v lies in T_x"""
        return self.tin[x] <= self.tin[v] <= self.tout[x]

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when a is a proper ancestor of b"""
        return a != b and self.in_subtree(b, a)

    def subtree(self, x: int) -> Tuple[int, ...]:
        return self.preorder[self.tin[x]: self.tout[x] + 1]

    def child_toward(self, x: int, v: int) -> int:
        """The child of x whose subtree contains v (v must be a proper descendant)"""
        for y in self.children[x]:
            if self.in_subtree(v, y):
                return y
        raise InputError(f"vertex {v} is not below {x}")

    def postorder(self) -> Tuple[int, ...]:
        return self._postorder

    def is_leaf(self, x: int) -> bool:
        return not self.children[x]


def root_at(tree: Tree, root: int) -> RootedView:
    tree.check_vertex(root, "root")
    return RootedView(tree, root)


class TreeFileParser:
    """Parser for the line-oriented tree file format"""

    comment_marker = "#"
    ids_keyword = "ids"

    def strip(self, raw: str) -> str:
        return raw.split(self.comment_marker, 1)[0].strip()

    def parse_int(self, token: str, line_no: int) -> int:
        try:
            return int(token)
        except ValueError:
            raise TreeFormatError("malformed_line", f"expected an integer, got {token!r}", line_no)

    def parse(self, text: str) -> Tree:
        n: Optional[int] = None
        edges: List[Edge] = []
        ids: Optional[List[int]] = None

        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = self.strip(raw)
            if not line:
                continue
            tokens = line.split()

            if n is None:
                if len(tokens) != 1:
                    raise TreeFormatError("malformed_line", "first line must hold the vertex count", line_no)
                n = self.parse_int(tokens[0], line_no)
                if n < 1:
                    raise TreeFormatError("bad_count", f"vertex count must be at least 1, got {n}", line_no)
                continue

            if tokens[0] == self.ids_keyword:
                if ids is not None:
                    raise TreeFormatError("bad_ids", "ids line given twice", line_no)
                ids = [self.parse_int(t, line_no) for t in tokens[1:]]
                if len(ids) != n:
                    raise TreeFormatError("bad_ids", f"expected {n} ids, got {len(ids)}", line_no)
                continue

            if len(tokens) != 2:
                raise TreeFormatError("malformed_line", f"expected 'a b' edge, got {line!r}", line_no)
            a, b = (self.parse_int(t, line_no) for t in tokens)
            if not (1 <= a <= n and 1 <= b <= n):
                raise TreeFormatError("bad_vertex", f"edge {a} {b} names a vertex outside 1..{n}", line_no)
            edges.append((a, b))

        if n is None:
            raise TreeFormatError("malformed_line", "empty tree file")

        tree = Tree(n, edges, ids)
        logger.debug(f"Parsed tree with {tree.n} vertices")
        return tree

    def serialize(self, tree: Tree) -> str:
        lines = [str(tree.n)]
        lines.extend(f"{a} {b}" for a, b in tree.edges)
        if not tree.has_identity_ids():
            lines.append(" ".join([self.ids_keyword, *map(str, tree.ids)]))
        return "\n".join(lines) + "\n"


# Global parser instance
tree_file_parser = TreeFileParser()


def parse_tree(text: str) -> Tree:
    return tree_file_parser.parse(text)


def serialize_tree(tree: Tree) -> str:
    """Canonical text form: sorted edges, ids line only when not the identity"""
    return tree_file_parser.serialize(tree)


def load_tree(path) -> Tree:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise InputError(f"cannot read tree file {path}: {e}")
    return parse_tree(text)
