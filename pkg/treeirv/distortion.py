import itertools
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from . import config
from .election import TiePolicy, run_irv
from .errors import BudgetExceededError, InputError
from .tree_core import Tree
from .workers import parallel_map

logger = logging.getLogger(__name__)

Config = Tuple[int, ...]

FAMILIES = ("path", "bistar", "modified_bistar", "perfect_binary_tree", "spider")
FAMILY_ALIASES = {"pbt": "perfect_binary_tree", "mbistar": "modified_bistar"}


def social_costs(tree: Tree) -> np.ndarray:
    """SC of every vertex, index v-1"""
    return tree.dist.sum(axis=1)


def social_cost(tree: Tree, c: int) -> int:
    tree.check_vertex(c, "candidate")
    return int(tree.dist[c - 1].sum())


def optimal_candidate(tree: Tree, candidates: Iterable[int]) -> Tuple[int, int]:
    """Candidate of least social cost; ties go to the smaller vertex"""
    pool = sorted(tree.check_vertices(candidates, "candidate"))
    if not pool:
        raise InputError("candidate set is empty")
    costs = social_costs(tree)
    best = min(pool, key=lambda c: (int(costs[c - 1]), c))
    return best, int(costs[best - 1])


@dataclass(frozen=True)
class ConfigRecord:
    candidates: Config
    winner: int
    winner_cost: int
    optimum: int
    optimum_cost: int

    @property
    def ratio(self) -> Fraction:
        if self.optimum_cost == 0:
            return Fraction(1)
        return Fraction(self.winner_cost, self.optimum_cost)


@dataclass(frozen=True)
class DistortionReport:
    tree: Tree
    policy: str
    records: Tuple[ConfigRecord, ...]
    max_ratio: Fraction
    argmax: Config


def evaluate_config(tree: Tree, policy: TiePolicy, candidates: Config) -> ConfigRecord:
    winner = run_irv(tree, candidates, policy).winner
    optimum, optimum_cost = optimal_candidate(tree, candidates)
    return ConfigRecord(
        candidates=tuple(sorted(candidates)),
        winner=winner,
        winner_cost=social_cost(tree, winner),
        optimum=optimum,
        optimum_cost=optimum_cost,
    )


def distortion_scan(
    tree: Tree,
    policy: Optional[TiePolicy],
    configs: Iterable[Config],
    jobs: int = 1,
) -> DistortionReport:
    """Run IRV on each configuration and keep the worst winner/optimum ratio"""
    policy = policy or TiePolicy.default(tree)
    configs = list(configs)
    if not configs:
        raise InputError("no candidate configurations to scan")
    for candidates in configs:
        if not candidates:
            raise InputError("candidate configurations must be nonempty")

    records = parallel_map(lambda c: evaluate_config(tree, policy, c), configs, jobs)
    max_ratio = max(r.ratio for r in records)
    argmax = min(r.candidates for r in records if r.ratio == max_ratio)
    logger.info(f"Scanned {len(records)} configurations under {policy.name}: max ratio {max_ratio}")
    return DistortionReport(
        tree=tree,
        policy=policy.name,
        records=tuple(records),
        max_ratio=max_ratio,
        argmax=argmax,
    )


def parse_generator_spec(spec: str) -> Tuple[str, int]:
    """'family:param' with param an integer"""
    family, sep, param = spec.partition(":")
    family = FAMILY_ALIASES.get(family.strip(), family.strip())
    if not sep or family not in FAMILIES:
        raise InputError(f"bad generator spec {spec!r}; expected one of {', '.join(FAMILIES)} as family:param")
    try:
        return family, int(param)
    except ValueError:
        raise InputError(f"bad generator parameter {param!r} in {spec!r}")


def _path_edges(n: int) -> List[Tuple[int, int]]:
    return [(i, i + 1) for i in range(1, n)]


def generate_family(family: str, param: int) -> Tree:
    family = FAMILY_ALIASES.get(family, family)
    if family == "path":
        if param < 1:
            raise InputError(f"path needs n >= 1, got {param}")
        return Tree(param, _path_edges(param))

    if family == "bistar":
        n = param
        if n < 4 or n % 2:
            raise InputError(f"bistar needs an even n >= 4, got {n}")
        half = n // 2
        edges = [(1, 2)]
        edges += [(1, leaf) for leaf in range(3, half + 2)]
        edges += [(2, leaf) for leaf in range(half + 2, n + 1)]
        return Tree(n, edges)

    if family == "modified_bistar":
        n = param
        if n < 8 or n % 2:
            raise InputError(f"modified bistar needs an even n >= 8, got {n}")
        half = n // 2
        w, hub = half, half + 1
        edges = [(1, leaf) for leaf in range(2, half)]
        edges += [(1, w), (w, hub)]
        edges += [(hub, leaf) for leaf in range(half + 2, n + 1)]
        return Tree(n, edges)

    if family == "perfect_binary_tree":
        h = param
        if not 1 <= h <= 10:
            raise InputError(f"perfect binary tree needs 1 <= h <= 10, got {h}")
        n = 2 ** (h + 1) - 1
        return Tree(n, [(v // 2, v) for v in range(2, n + 1)])

    if family == "spider":
        n = param
        if n < 2:
            raise InputError(f"spider needs n >= 2, got {n}")
        k = math.isqrt(n)
        edges = _path_edges(k + 1)
        edges += [(k + 1, leaf) for leaf in range(k + 2, n + 1)]
        return Tree(n, edges)

    raise InputError(f"unknown family {family!r}")


def family_anchors(family: str, param: int) -> Dict[str, int]:
    """Named vertices of a generated tree"""
    family = FAMILY_ALIASES.get(family, family)
    generate_family(family, param)
    if family == "path":
        return {"left": 1, "middle": (param + 1) // 2, "right": param}
    if family == "bistar":
        return {"hub1": 1, "hub2": 2, "leaf1": 3, "leaf2": param}
    if family == "modified_bistar":
        half = param // 2
        return {"c1": 1, "w": half, "hub": half + 1, "c2": param}
    if family == "perfect_binary_tree":
        return {"root": 1, "left_leaf": 2 ** param, "right_leaf": 2 ** (param + 1) - 1}
    return {"root": 1, "center": math.isqrt(param) + 1}


def spider_demo(n: int) -> Dict[str, object]:
    """Social costs on the spider: short path ending in a heavy star.

    The best single vertex sits near the star center, not at the middle of the
    longest path, so bounds built from the path end points alone overshoot.
    """
    tree = generate_family("spider", n)
    anchors = family_anchors("spider", n)
    costs = social_costs(tree)
    best = int(np.argmin(costs)) + 1
    worst = int(np.argmax(costs)) + 1
    return {
        "tree": tree,
        "anchor_costs": {name: int(costs[v - 1]) for name, v in anchors.items()},
        "best": best,
        "worst": worst,
        "spread": Fraction(int(costs[worst - 1]), int(costs[best - 1])),
    }


def _check_count(count: int, what: str):
    if count > config.MAX_CONFIGS:
        raise BudgetExceededError(f"{what} would produce {count} configurations (cap {config.MAX_CONFIGS})")


def _vertex(tree: Tree, token: str, anchors: Dict[str, int]) -> int:
    token = token.strip()
    if token in anchors:
        return anchors[token]
    try:
        return tree.check_vertex(int(token), "configuration vertex")
    except ValueError:
        raise InputError(f"unknown vertex or anchor {token!r}")


def parse_config_spec(
    spec: str,
    tree: Tree,
    seed: int = 0,
    anchors: Optional[Dict[str, int]] = None,
) -> List[Config]:
    """Candidate configurations from all | size:k | upto:k | explicit:a,b;c,d | random:COUNT | anchored:v"""
    anchors = anchors or {}
    kind, _, arg = spec.partition(":")
    vertices = list(tree.vertices)
    n = tree.n

    if kind == "all":
        _check_count((1 << n) - 1, spec)
        return [c for k in range(1, n + 1) for c in itertools.combinations(vertices, k)]

    if kind in ("size", "upto"):
        try:
            k = int(arg)
        except ValueError:
            raise InputError(f"bad configuration size in {spec!r}")
        if not 1 <= k <= n:
            raise InputError(f"configuration size must be in 1..{n}, got {k}")
        sizes = [k] if kind == "size" else list(range(1, k + 1))
        _check_count(sum(math.comb(n, s) for s in sizes), spec)
        return [c for s in sizes for c in itertools.combinations(vertices, s)]

    if kind == "explicit":
        configs = []
        for group in arg.split(";"):
            if not group.strip():
                raise InputError(f"empty configuration in {spec!r}")
            configs.append(tuple(sorted({_vertex(tree, t, anchors) for t in group.split(",")})))
        return configs

    if kind == "random":
        try:
            count = int(arg)
        except ValueError:
            raise InputError(f"bad sample count in {spec!r}")
        if count < 1:
            raise InputError(f"sample count must be positive, got {count}")
        _check_count(count, spec)
        rng = random.Random(seed)
        return [tuple(sorted(rng.sample(vertices, rng.randint(1, n)))) for _ in range(count)]

    if kind == "anchored":
        v = _vertex(tree, arg, anchors)
        leaves = [leaf for leaf in tree.leaves if leaf != v]
        _check_count(1 << len(leaves), spec)
        configs = [(v,)]
        for k in range(1, len(leaves) + 1):
            configs.extend(tuple(sorted((v, *extra))) for extra in itertools.combinations(leaves, k))
        return configs

    raise InputError(f"unknown configuration spec {spec!r}")


def scan_table(report: DistortionReport) -> pd.DataFrame:
    """One row per configuration"""
    rows = [
        {
            "candidates": ",".join(map(str, r.candidates)),
            "size": len(r.candidates),
            "winner": r.winner,
            "winner_cost": r.winner_cost,
            "optimum": r.optimum,
            "optimum_cost": r.optimum_cost,
            "ratio": str(r.ratio),
            "ratio_value": float(r.ratio),
        }
        for r in report.records
    ]
    return pd.DataFrame(rows)


def summarize_by_size(report: DistortionReport) -> pd.DataFrame:
    df = scan_table(report)
    summary = df.groupby("size").agg(
        configs=("candidates", "count"),
        max_ratio_value=("ratio_value", "max"),
        mean_ratio_value=("ratio_value", "mean"),
    )
    return summary.reset_index()
