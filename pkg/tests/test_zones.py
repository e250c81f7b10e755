import itertools

import pytest

from conftest import star_tree
from treeirv.election import policy_preset, run_irv
from treeirv.errors import InputError, PolicyError
from treeirv.oracle import (
    brute_force_min_zone,
    brute_force_zone,
    brute_force_zones,
    enumerate_small_trees,
    random_tree,
)
from treeirv.tree_core import Tree
from treeirv.zones import (
    build_loss_graph,
    check_nesting,
    closure,
    enumerate_zones,
    is_closed,
    min_zone,
    min_zone_report,
    singleton_closures,
    verify_zone,
    zone_generator,
)


def test_example_loss_graph(scrambled_path):
    tournament = build_loss_graph(scrambled_path)
    assert tournament.edges == [(1, 2), (1, 3), (2, 3), (2, 4), (4, 1), (4, 3)]
    assert tournament.loses(1, 2)
    assert not tournament.loses(2, 1)


def test_two_vertex_loss_graph():
    assert build_loss_graph(Tree(2, [(1, 2)])).edges == [(2, 1)]


def test_loss_graph_is_a_tournament(rng):
    tree = random_tree(8, rng)
    tournament = build_loss_graph(tree, jobs=3)
    for x, y in itertools.combinations(tree.vertices, 2):
        assert tournament.loses(x, y) != tournament.loses(y, x)
    assert tournament.graph.number_of_edges() == 8 * 7 // 2


def test_example_closures(scrambled_path):
    tournament = build_loss_graph(scrambled_path)
    everything = frozenset(scrambled_path.vertices)
    assert closure(tournament, [3]) == {3}
    for v in (1, 2, 4):
        assert closure(tournament, [v]) == everything
    assert closure(tournament, everything) == everything


def test_closure_needs_a_seed(scrambled_path):
    tournament = build_loss_graph(scrambled_path)
    with pytest.raises(InputError):
        closure(tournament, [])
    with pytest.raises(InputError):
        closure(tournament, [9])


def test_closure_is_idempotent(rng):
    tree = random_tree(9, rng)
    tournament = build_loss_graph(tree)
    for _ in range(10):
        seed = rng.sample(list(tree.vertices), rng.randint(1, 4))
        once = closure(tournament, seed)
        assert set(seed) <= once
        assert closure(tournament, once) == once
        assert is_closed(tournament, once)


def test_zone_generator(scrambled_path):
    tournament = build_loss_graph(scrambled_path)
    assert zone_generator(tournament, {3}) == 3
    assert zone_generator(tournament, {1, 2, 3, 4}) == 1
    assert zone_generator(tournament, {1, 3}) is None


def test_verify_example_zones(scrambled_path):
    report = verify_zone(scrambled_path, {3})
    assert report.is_zone
    assert report.refutation is None
    assert report.per_vertex[3].result is False

    assert verify_zone(scrambled_path, scrambled_path.vertices).is_zone


def test_refuted_zone_carries_a_replayable_witness(scrambled_path):
    report = verify_zone(scrambled_path, {1})
    assert not report.is_zone
    refutation = report.refutation
    assert refutation.u == 1
    assert refutation.candidates == (1, 2)
    assert refutation.winner == 2
    assert run_irv(scrambled_path, refutation.candidates).winner == refutation.winner
    assert refutation.winner not in {1}


def test_verify_zone_rejects_empty(scrambled_path):
    with pytest.raises(InputError):
        verify_zone(scrambled_path, [])


def test_zone_algorithms_need_the_default_policy(scrambled_path):
    policy = policy_preset("prop2", scrambled_path)
    with pytest.raises(PolicyError):
        verify_zone(scrambled_path, {3}, policy)
    with pytest.raises(PolicyError):
        min_zone(scrambled_path, policy)


def test_example_min_zone_and_enumeration(scrambled_path):
    assert min_zone(scrambled_path) == {3}
    assert enumerate_zones(scrambled_path) == [frozenset({3}), frozenset({1, 2, 3, 4})]


def test_single_vertex_tree():
    tree = Tree(1, [])
    assert min_zone(tree) == {1}
    assert enumerate_zones(tree) == [frozenset({1})]


def test_two_vertex_tree_zones():
    tree = Tree(2, [(1, 2)])
    assert enumerate_zones(tree) == brute_force_zones(tree)
    assert all(1 in zone for zone in enumerate_zones(tree))


def test_star_zones_match_brute_force():
    tree = star_tree(4)
    assert enumerate_zones(tree) == brute_force_zones(tree)


def test_min_zone_matches_brute_force(rng):
    for _ in range(6):
        tree = random_tree(8, rng)
        report = min_zone_report(tree, jobs=2)
        assert report.is_zone
        assert report.zone == brute_force_min_zone(tree)


def test_nesting_check_reports_crossing_sets():
    assert check_nesting([frozenset({1}), frozenset({1, 2})]) == []
    crossing = check_nesting([frozenset({1, 2}), frozenset({2, 3})])
    assert crossing == [(frozenset({1, 2}), frozenset({2, 3}))]


def zone_sample(n, rng, count):
    trees = list(enumerate_small_trees(n))
    return rng.sample(trees, min(count, len(trees)))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_verify_zone_matches_brute_force_on_every_subset(n, rng):
    for tree in zone_sample(n, rng, 12):
        brute = brute_force_zones(tree)
        tournament = build_loss_graph(tree)
        closures = set(singleton_closures(tree, tournament))
        for size in range(1, n + 1):
            for subset in itertools.combinations(tree.vertices, size):
                zone = frozenset(subset)
                assert verify_zone(tree, zone).is_zone == (zone in brute)
        # every zone is generated by one of its vertices
        assert set(brute) <= closures
        assert enumerate_zones(tree) == brute
        assert all(is_closed(tournament, zone) for zone in brute)


@pytest.mark.slow
@pytest.mark.parametrize("n", [6, 7])
def test_zone_correctness_on_sampled_trees(n, rng):
    for tree in zone_sample(n, rng, 100):
        brute = brute_force_zones(tree)
        for size in range(1, n + 1):
            for subset in itertools.combinations(tree.vertices, size):
                zone = frozenset(subset)
                assert verify_zone(tree, zone).is_zone == brute_force_zone(tree, zone) == (zone in brute)
        assert min_zone(tree) == brute[0]
        assert set(brute) <= set(singleton_closures(tree))
