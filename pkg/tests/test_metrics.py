"""Phylometrics against brute-force references and frozen known values."""

import math
import random
import statistics
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surftrack.phylo import metrics as M
from surftrack.phylo.serialize import export_newick  # noqa: F401  (debug aid)
from _trees import balanced, caterpillar, cherry, random_tree


# ---- independent references, deliberately dumb ----


def _edges(tree):
    for node in tree.nodes():
        for child in node.children:
            yield node, child


def _bfs_pairwise_distances(tree):
    """Edge-count distance between all leaf pairs via per-leaf BFS."""
    adjacency = {}
    for parent, child in _edges(tree):
        adjacency.setdefault(id(parent), []).append(child)
        adjacency.setdefault(id(child), []).append(parent)
    by_id = {id(n): n for n in tree.nodes()}
    leaves = [n for n in tree.nodes() if n.is_leaf]
    out = []
    for i, a in enumerate(leaves):
        dist = {id(a): 0}
        q = deque([a])
        while q:
            x = q.popleft()
            for y in adjacency.get(id(x), []):
                if id(y) not in dist:
                    dist[id(y)] = dist[id(x)] + 1
                    q.append(y)
        for b in leaves[i + 1 :]:
            out.append(dist[id(b)])
    return out


def _recursive_colless(tree):
    """Same math as the library, different shape: plain recursion, no numpy."""

    def visit(node):
        own = math.log(len(node.children) + math.e)
        if node.is_leaf:
            return own, 0.0
        sizes, total = [], 0.0
        for c in node.children:
            s, t = visit(c)
            sizes.append(s)
            total += t
        med = statistics.median(sizes)
        total += sum(abs(s - med) for s in sizes) / len(sizes)
        return own + sum(sizes), total

    return sum(visit(r)[1] for r in tree.roots)


def test_sum_branch_length_cherry():
    assert M.sum_branch_length(cherry(split=0, tips=10)) == 20.0


def test_sum_branch_length_counts_root_stem_as_zero():
    t = cherry(split=5.0, tips=9.0)
    # two edges of length 4; the root itself hangs from nothing
    assert M.sum_branch_length(t) == 8.0


def test_sum_branch_length_forest_adds_up():
    a, b = cherry(), cherry("C", "D")
    from surftrack.phylo.tree import PhyloTree

    forest = PhyloTree(a.roots + b.roots)
    assert M.sum_branch_length(forest) == 40.0


def test_pairwise_distance_cherry():
    assert M.sum_pairwise_distance(cherry()) == 2.0
    assert M.mean_pairwise_distance(cherry()) == 2.0


def test_pairwise_distance_requires_single_root():
    from surftrack.phylo.tree import PhyloTree

    forest = PhyloTree(cherry().roots + cherry("C", "D").roots)
    with pytest.raises(ValueError):
        M.sum_pairwise_distance(forest)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_pairwise_distances_match_bfs(seed):
    tree = random_tree(seed, max_leaves=24)
    brute = _bfs_pairwise_distances(tree)
    assert M.sum_pairwise_distance(tree) == pytest.approx(sum(brute))
    assert M.mean_pairwise_distance(tree) == pytest.approx(
        sum(brute) / len(brute) if brute else 0.0
    )


def test_colless_balanced_tree_is_zero():
    assert M.colless_like_index(balanced(3)) == 0.0


def test_colless_frozen_values():
    assert M.colless_like_index(caterpillar(8)) == pytest.approx(
        26.790169496286538, rel=1e-12
    )
    assert M.colless_like_index(caterpillar(8)) > M.colless_like_index(balanced(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_colless_matches_recursive_reference(seed):
    tree = random_tree(seed, max_leaves=20)
    assert M.colless_like_index(tree) == pytest.approx(_recursive_colless(tree))


def test_evolutionary_distinctness_cherry_split():
    ed = M.evolutionary_distinctness(cherry(split=0, tips=10))
    assert ed == {"A": 10.0, "B": 10.0}


def test_ed_divides_shared_stem():
    # ((A:5,B:5):5) style: stem length 5 shared by two leaves
    from surftrack.phylo.tree import PhyloNode, PhyloTree

    root = PhyloNode(0.0)
    mid = root.add(PhyloNode(5.0))
    mid.add(PhyloNode(10.0, label="A"))
    mid.add(PhyloNode(10.0, label="B"))
    ed = M.evolutionary_distinctness(PhyloTree([root]))
    assert ed["A"] == 5.0 + 2.5
    assert ed["B"] == 7.5


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.booleans())
def test_ed_sums_to_total_branch_length(seed, forest):
    tree = random_tree(seed, max_leaves=30, forest=forest)
    ed = M.evolutionary_distinctness(tree)
    assert sum(ed.values()) == pytest.approx(M.sum_branch_length(tree), rel=1e-9)
    assert M.mean_evolutionary_distinctness(tree) == pytest.approx(
        sum(ed.values()) / len(ed)
    )


# ---- effect size ----


def test_cliffs_delta_known_values():
    assert M.cliffs_delta([1, 2, 3], [1, 2, 3]) == 0.0
    assert M.cliffs_delta([2, 2], [1, 1]) == 1.0
    assert M.cliffs_delta([1, 1], [2, 2]) == -1.0
    assert M.cliffs_delta([1, 2], [1, 2]) == 0.0
    assert M.cliffs_delta([0, 0, 2], [1, 1, 1]) == pytest.approx(-1.0 / 3.0)


def test_cliffs_delta_rejects_empty():
    with pytest.raises(ValueError):
        M.cliffs_delta([], [1])


@settings(max_examples=50)
@given(
    st.lists(st.integers(-50, 50), min_size=1, max_size=30),
    st.lists(st.integers(-50, 50), min_size=1, max_size=30),
)
def test_cliffs_delta_antisymmetric(xs, ys):
    assert M.cliffs_delta(xs, ys) == pytest.approx(-M.cliffs_delta(ys, xs))


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=30))
def test_cliffs_delta_self_is_zero(xs):
    assert M.cliffs_delta(xs, xs) == pytest.approx(0.0)


def test_classify_effect_thresholds():
    assert M.classify_effect(0.10) == "negligible"
    assert M.classify_effect(0.147) == "small"
    assert M.classify_effect(-0.2) == "small"
    assert M.classify_effect(0.33) == "medium"
    assert M.classify_effect(-0.474) == "large"
    assert M.classify_effect(1.0) == "large"


def test_metric_registry_names():
    assert set(M.METRICS) == {"sbl", "spd", "mpd", "colless", "med"}
    tree = cherry()
    for fn in M.METRICS.values():
        assert isinstance(fn(tree), float)


# ---- sanity on simulated shapes ----


def test_unbalanced_beats_balanced_for_random_sizes():
    rng = random.Random(7)
    for _ in range(5):
        depth = rng.randint(2, 5)
        assert M.colless_like_index(caterpillar(1 << depth)) > M.colless_like_index(
            balanced(depth)
        )
