import time

import pytest

from conftest import path_tree
from treeirv import config
from treeirv.election import run_irv
from treeirv.errors import InputError, InternalDpError
from treeirv.kill import DpSummary, KillDp, KillQuery, is_antichain, kill_dp, verify_witness
from treeirv.oracle import (
    brute_force_kill,
    enumerate_small_trees,
    enumerate_unlabeled_trees,
    prufer_decode,
    random_tree,
    scrambled_ids,
)
from treeirv.tree_core import Tree, relabel_ids, root_at


def all_queries(tree):
    for u in tree.vertices:
        others = [v for v in tree.vertices if v != u]
        for mask in range(1 << len(others)):
            yield KillQuery.build(tree, u, [v for i, v in enumerate(others) if mask >> i & 1])


def assert_matches_oracle(query):
    verdict = kill_dp(query)
    expected = brute_force_kill(query.tree, query.u, query.allowed)
    assert verdict.result == expected, (query.tree, query.u, sorted(query.allowed))
    if verdict.result:
        assert verify_witness(query, verdict.witness), (query.tree, query.u, verdict.witness)
        assert run_irv(query.tree, verdict.witness).winner != query.u
    else:
        assert verdict.witness is None
    assert verdict.stats.outer_tuples <= config.kill_state_cap(query.tree.n)


def test_unkillable_vertex(scrambled_path):
    verdict = kill_dp(KillQuery.build(scrambled_path, 3, [1, 2, 4]))
    assert verdict.result is False
    assert verdict.witness is None


def test_killable_vertex_returns_valid_witness(scrambled_path):
    query = KillQuery.build(scrambled_path, 1, [2, 3, 4])
    verdict = kill_dp(query)
    assert verdict.result is True
    assert verdict.witness == (1, 2)
    assert verify_witness(query, verdict.witness)


def test_empty_allowed_set(scrambled_path):
    for u in scrambled_path.vertices:
        assert kill_dp(KillQuery.build(scrambled_path, u, [])).result is False
    assert kill_dp(KillQuery.build(Tree(1, []), 1, [])).result is False


def test_query_validation(scrambled_path):
    with pytest.raises(InputError):
        KillQuery.build(scrambled_path, 2, [2, 3])
    with pytest.raises(InputError):
        KillQuery.build(scrambled_path, 5, [1])
    with pytest.raises(InputError):
        KillQuery.build(scrambled_path, 1, [9])


def test_leaf_case_tables():
    tree = path_tree(3)
    dp = KillDp(KillQuery.build(tree, 1, [2]))
    inf, neg = dp.inf, dp.neg
    assert set(dp.dp_leaf_case(3, 1)) == {DpSummary(None, 0, None, 0, inf, neg, 1)}

    dp = KillDp(KillQuery.build(tree, 1, [3]))
    assert set(dp.dp_leaf_case(3, 1)) == {
        DpSummary(None, 0, None, 0, inf, neg, 1),
        DpSummary(3, 1, None, 0, inf, neg, 0),
    }


def test_leaf_case_on_two_vertex_tree():
    dp = KillDp(KillQuery.build(Tree(2, [(1, 2)]), 1, [2]))
    assert DpSummary(2, 1, None, 0, dp.inf, dp.neg, 0) in dp.dp_leaf_case(2, 1)


def test_outside_representative_must_be_outside():
    dp = KillDp(KillQuery.build(path_tree(3), 1, [2, 3]))
    with pytest.raises(InternalDpError):
        dp.dp_leaf_case(3, 3)
    with pytest.raises(InternalDpError):
        dp.dp_merge(2, 3)


def test_missing_child_table_is_an_internal_error():
    dp = KillDp(KillQuery.build(path_tree(3), 1, [3]))
    with pytest.raises(InternalDpError):
        dp.dp_merge(2, 1)


def test_placing_a_candidate_at_a_star_center():
    # u = 1 hangs off the center 2, which has four leaves
    tree = Tree(6, [(1, 2), (2, 3), (2, 4), (2, 5), (2, 6)])
    dp = KillDp(KillQuery.build(tree, 1, [2]))
    dp.run()
    assert DpSummary(2, 5, None, 0, dp.inf, dp.neg, 0) in dp.tables[(2, 1)]


def test_merge_lifts_a_grandchild_candidate():
    tree = path_tree(3)
    dp = KillDp(KillQuery.build(tree, 1, [3]))
    dp.run()
    # voter 2 is equidistant from 1 and 3; ID 1 wins the tie
    assert set(dp.tables[(2, 1)]) == {
        DpSummary(None, 0, None, 0, dp.inf, dp.neg, 2),
        DpSummary(3, 1, None, 0, dp.inf, dp.neg, 1),
    }

    flipped = Tree(3, tree.edges, [3, 2, 1])
    dp = KillDp(KillQuery.build(flipped, 1, [3]))
    dp.run()
    assert DpSummary(3, 2, None, 0, dp.inf, dp.neg, 0) in dp.tables[(2, 1)]


def test_merge_of_children_without_candidates():
    tree = Tree(5, [(1, 2), (2, 3), (2, 4), (1, 5)])
    dp = KillDp(KillQuery.build(tree, 1, [5]))
    dp.run()
    assert set(dp.tables[(2, 1)]) == {DpSummary(None, 0, None, 0, dp.inf, dp.neg, 3)}
    assert set(dp.tables[(2, 5)]) == {DpSummary(None, 0, None, 0, dp.inf, dp.neg, 3)}


def test_root_decision_examples(scrambled_path):
    verdict = kill_dp(KillQuery.build(scrambled_path, 2, [3]))
    assert verdict.result is True
    assert verdict.witness == (2, 3)

    lonely = kill_dp(KillQuery.build(path_tree(5), 3, []))
    assert lonely.result is False


def test_two_internal_candidates_under_one_vertex():
    # 1 - 2, 2 has children 3 and 4, each with a leaf below
    tree = Tree(6, [(1, 2), (2, 3), (2, 4), (3, 5), (4, 6)])
    for query in all_queries(tree):
        assert_matches_oracle(query)


def test_antichain_helper(three_branches):
    view = root_at(three_branches, 1)
    assert is_antichain(view, [5, 6, 3, 8])
    assert not is_antichain(view, [2, 5])
    assert is_antichain(view, [])


def test_witness_checker_rejects_bad_sets(scrambled_path):
    query = KillQuery.build(scrambled_path, 1, [2, 3, 4])
    assert not verify_witness(query, (2, 3))
    assert not verify_witness(query, (1, 2, 3))
    assert not verify_witness(KillQuery.build(scrambled_path, 1, [3]), (1, 2))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_matches_oracle_on_all_labeled_trees(n):
    for tree in enumerate_small_trees(n, id_permutations=2 if n <= 4 else 1):
        for query in all_queries(tree):
            assert_matches_oracle(query)


def test_matches_oracle_on_random_trees(rng):
    for _ in range(40):
        tree = random_tree(rng.randint(8, 12), rng)
        u = rng.choice(list(tree.vertices))
        others = [v for v in tree.vertices if v != u]
        allowed = rng.sample(others, rng.randint(0, min(len(others), 7)))
        assert_matches_oracle(KillQuery.build(tree, u, allowed))


def test_monotone_in_allowed_set(rng):
    for _ in range(10):
        tree = random_tree(7, rng)
        u = rng.choice(list(tree.vertices))
        others = [v for v in tree.vertices if v != u]
        small = rng.sample(others, 2)
        large = small + [v for v in others if v not in small and rng.random() < 0.5]
        if kill_dp(KillQuery.build(tree, u, small)).result:
            assert kill_dp(KillQuery.build(tree, u, large)).result


def test_parallel_build_matches_sequential(rng):
    tree = random_tree(10, rng)
    query = KillQuery.build(tree, 1, [3, 5, 7, 9])
    parallel, sequential = kill_dp(query, jobs=4), kill_dp(query, jobs=1)
    assert parallel == sequential
    assert parallel.stats == sequential.stats
    assert sequential.stats.peak_inner_states >= 1


def test_witness_does_not_depend_on_extra_opponents(scrambled_path):
    # 4 is never needed, and 3 can be dropped once 2 is available
    for allowed in ([2, 3, 4], [2, 3], [2, 4], [2]):
        assert kill_dp(KillQuery.build(scrambled_path, 1, allowed)).witness == (1, 2)
    assert kill_dp(KillQuery.build(scrambled_path, 1, [3, 4])).witness == (1, 3)


def test_witnesses_are_minimal(rng):
    for _ in range(15):
        tree = random_tree(rng.randint(4, 9), rng)
        u = rng.choice(list(tree.vertices))
        others = [v for v in tree.vertices if v != u]
        verdict = kill_dp(KillQuery.build(tree, u, rng.sample(others, rng.randint(1, len(others)))))
        if not verdict.result:
            continue
        opponents = set(verdict.witness) - {u}
        for v in opponents:
            assert not kill_dp(KillQuery.build(tree, u, opponents - {v})).result


@pytest.mark.slow
def test_matches_oracle_on_all_labeled_six_vertex_trees():
    for tree in enumerate_small_trees(6):
        for query in all_queries(tree):
            assert_matches_oracle(query)


@pytest.mark.slow
@pytest.mark.parametrize("n", [6, 7])
def test_matches_oracle_on_unlabeled_trees_with_scrambled_ids(n):
    for tree in enumerate_unlabeled_trees(n, id_permutations=3):
        for query in all_queries(tree):
            assert_matches_oracle(query)


@pytest.mark.slow
def test_matches_oracle_on_many_random_trees(rng):
    for _ in range(500):
        tree = random_tree(rng.randint(8, 12), rng)
        u = rng.choice(list(tree.vertices))
        others = [v for v in tree.vertices if v != u]
        allowed = rng.sample(others, rng.randint(0, min(len(others), 10)))
        assert_matches_oracle(KillQuery.build(tree, u, allowed))


@pytest.mark.slow
def test_twenty_vertex_trees_finish(rng):
    for _ in range(3):
        tree = random_tree(20, rng)
        u = rng.choice(list(tree.vertices))
        started = time.perf_counter()
        verdict = kill_dp(KillQuery.build(tree, u, [v for v in tree.vertices if v != u]))
        assert time.perf_counter() - started < 60
        assert verdict.stats.outer_tuples <= config.kill_state_cap(20)


@pytest.mark.slow
def test_matches_oracle_on_sampled_labeled_seven_vertex_trees(rng):
    id_orders = scrambled_ids(7, 3, seed=11)
    for _ in range(60):
        tree = prufer_decode([rng.randint(1, 7) for _ in range(5)], 7)
        for ids in id_orders:
            for query in all_queries(relabel_ids(tree, ids)):
                assert_matches_oracle(query)
