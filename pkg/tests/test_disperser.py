import itertools

import pytest

from hamred.disperser import (
    DisperserGraph,
    EncodingTree,
    decode,
    decode_visit_bound,
    encode,
    find_disperser,
    hardness_ratio,
    subset_from_bits,
    trace_decode,
    tree_from_rows,
    verify_disperser,
)
from hamred.utils import (
    DisperserSearchError,
    EnumerationCapError,
    RegisterLayoutError,
    SupportError,
    all_bitstrings,
)

TREE_DEPTH = 4
LEFT, RIGHT, DEGREE, K, EPSILON, SEED = 31, 8, 4, 2, 0.5, 7


@pytest.fixture(scope="module")
def tree_graph():
    return find_disperser(LEFT, RIGHT, DEGREE, K, EPSILON, seed=SEED)


@pytest.fixture(scope="module")
def tree(tree_graph):
    return EncodingTree(TREE_DEPTH, tree_graph)


class TestDisperserGraph:
    """
    Testing graph validation
    """

    def test_row_count(self):
        with pytest.raises(SupportError):
            DisperserGraph(3, 4, 1, ((0,), (1,)))

    def test_row_degree(self):
        with pytest.raises(SupportError):
            DisperserGraph(2, 4, 2, ((0, 1), (1,)))

    def test_neighbor_range(self):
        with pytest.raises(SupportError):
            DisperserGraph(1, 4, 1, ((4,),))

    def test_coverage(self):
        G = DisperserGraph(3, 4, 2, ((0, 1), (1, 2), (1, 1)))
        assert G.coverage([0, 1]) == 3
        assert G.coverage([2]) == 1


class TestVerify:
    """
    Testing exhaustive and sampled disperser checks
    """

    def test_complete_graph(self):
        G = DisperserGraph(5, 3, 3, tuple((0, 1, 2) for _ in range(5)))
        for k in range(3):
            for epsilon in (0.0, 0.5):
                assert verify_disperser(G, k, epsilon).holds

    def test_violation_has_witness(self):
        G = DisperserGraph(3, 2, 1, ((0,), (0,), (1,)))
        report = verify_disperser(G, 1, 0.0)
        assert not report.holds
        assert report.witness == (0, 1)
        assert report.min_coverage == 1

    def test_subset_larger_than_left(self):
        G = DisperserGraph(2, 2, 1, ((0,), (1,)))
        report = verify_disperser(G, 3, 0.0)
        assert report.holds and report.subsets_checked == 0

    def test_enumeration_cap(self, tree_graph):
        with pytest.raises(EnumerationCapError):
            verify_disperser(tree_graph, K, EPSILON, cap=10)

    def test_sampled(self, tree_graph):
        report = verify_disperser(tree_graph, K, EPSILON, samples=25, seed=3)
        assert report.holds
        assert not report.exhaustive
        assert report.subsets_checked == 25


class TestFind:
    """
    Testing seeded disperser search
    """

    def test_tree_sized_search(self, tree_graph):
        assert tree_graph.left_size == LEFT
        report = verify_disperser(tree_graph, K, EPSILON)
        assert report.holds and report.exhaustive
        assert report.subsets_checked == 31465

    def test_deterministic(self, tree_graph):
        again = find_disperser(LEFT, RIGHT, DEGREE, K, EPSILON, seed=SEED)
        assert again.neighbors == tree_graph.neighbors

    def test_degree_above_right_size(self):
        G = find_disperser(3, 2, 3, 0, 0.0, seed=1)
        assert all(len(row) == 3 for row in G.neighbors)

    def test_infeasible(self):
        with pytest.raises(DisperserSearchError) as e:
            find_disperser(4, 4, 1, 0, 0.0)
        assert e.value.attempts == 0

    def test_budget_exhausted(self):
        # three left vertices over two right vertices: some pair always collides
        with pytest.raises(DisperserSearchError) as e:
            find_disperser(3, 2, 1, 1, 0.0, max_attempts=5)
        assert e.value.attempts == 5


class TestEncodingTree:
    """
    Testing tree encoding and pruned decoding
    """

    def test_size_mismatch(self, tree_graph):
        with pytest.raises(RegisterLayoutError):
            EncodingTree(3, tree_graph)

    def test_paths(self, tree):
        assert tree.path("0000") == [0, 1, 3, 7, 15]
        assert tree.path("1111") == [0, 2, 6, 14, 30]
        assert tree.leaf_label(15) == "0000"
        assert tree.leaf_label(30) == "1111"
        assert tree.leaves == 16

    @pytest.mark.parametrize("x", list(all_bitstrings(TREE_DEPTH)))
    def test_roundtrip(self, tree, x):
        assert x in decode(tree, encode(tree, x))

    def test_decode_is_exact(self, tree):
        for x in all_bitstrings(TREE_DEPTH):
            chosen = encode(tree, x)
            expected = {z for z in all_bitstrings(TREE_DEPTH) if encode(tree, z) <= chosen}
            assert decode(tree, chosen) == expected

    def test_visit_bound(self, tree):
        bound = decode_visit_bound(tree, K)
        for size in range(RIGHT // 2 + 1):
            for subset in itertools.combinations(range(RIGHT), size):
                leaves, visited = trace_decode(tree, subset)
                assert visited <= bound
                if size < (1 - EPSILON) * RIGHT:
                    assert len(leaves) <= 2**K

    def test_small_tree(self, small_tree):
        assert encode(small_tree, "0") == {0, 1}
        assert encode(small_tree, "1") == {0, 2}
        assert decode(small_tree, {0, 1, 2}) == {"0", "1"}
        assert decode(small_tree, {1, 2}) == set()
        assert trace_decode(small_tree, {1, 2})[1] == 1

    def test_subset_from_bits(self):
        assert subset_from_bits("0110") == {1, 2}

    def test_rows_helper(self):
        T = tree_from_rows(1, 3, [[0, 1], [1, 2], [0, 2]])
        assert T.graph.degree == 2
        assert T.right_size == 3

    def test_ratio(self):
        assert hardness_ratio(4, 6) == pytest.approx(1.5)
