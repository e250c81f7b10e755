import random
from pathlib import Path

import pytest

from treeirv.tree_core import Tree, load_tree

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def scrambled_path() -> Tree:
    return load_tree(FIXTURES / "a10.tree")


@pytest.fixture
def scrambled_path_file() -> str:
    return str(FIXTURES / "a10.tree")


@pytest.fixture
def three_branches() -> Tree:
    return load_tree(FIXTURES / "three_branches.tree")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240601)


def path_tree(n: int, ids=None) -> Tree:
    return Tree(n, [(i, i + 1) for i in range(1, n)], ids)


def star_tree(leaves: int) -> Tree:
    """Center 1 with the given number of leaves"""
    return Tree(leaves + 1, [(1, v) for v in range(2, leaves + 2)])
