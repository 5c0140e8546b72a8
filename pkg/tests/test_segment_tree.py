import random
from decimal import ROUND_HALF_UP, Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from akeys.segment_tree import (
    MTooLarge,
    NotALeaf,
    NotExpandable,
    ZeroFrames,
    expand,
    expandable_leaves,
    uniform_boundaries,
    uniform_segment,
    visible_frames,
)


def oracle_boundaries(n, m):
    # independent route: decimal arithmetic with explicit half-up rounding
    return [int((Decimal(i * (n - 1)) / Decimal(m)).quantize(Decimal(1), rounding=ROUND_HALF_UP))
            for i in range(m + 1)]


def leaf_spans(tree):
    return [(s.start, s.end) for s in tree.leaf_segments()]


def test_single_segment_spans_whole_video():
    tree = uniform_segment(180, 1)
    assert leaf_spans(tree) == [(0, 179)]
    assert visible_frames(tree) == [0, 179]


def test_four_segments_of_180_frames():
    # 179/4 = 44.75 -> 45, 89.5 -> 90, 134.25 -> 134
    tree = uniform_segment(180, 4)
    assert leaf_spans(tree) == [(0, 45), (45, 90), (90, 134), (134, 179)]
    assert visible_frames(tree) == [0, 45, 90, 134, 179]
    assert oracle_boundaries(180, 4) == [0, 45, 90, 134, 179]


def test_rejects_impossible_segmentation():
    with pytest.raises(MTooLarge):
        uniform_segment(5, 5)
    with pytest.raises(ZeroFrames):
        uniform_segment(0, 1)
    uniform_segment(6, 5)


@given(st.integers(2, 5000), st.integers(1, 200))
def test_boundaries_match_decimal_oracle(n, m):
    if n < m + 1:
        return
    b = uniform_boundaries(n, m)
    assert b == oracle_boundaries(n, m)
    assert b[0] == 0 and b[-1] == n - 1
    assert all(x < y for x, y in zip(b, b[1:]))


def test_expand_splits_at_floor_midpoint():
    tree = uniform_segment(180, 4)
    left, right = expand(tree, 1)
    assert (left.start, left.end, right.start, right.end) == (45, 67, 67, 90)
    assert left.depth == right.depth == 2 and left.parent == right.parent == 1
    assert visible_frames(tree) == [0, 45, 67, 90, 134, 179]
    with pytest.raises(NotALeaf):
        expand(tree, 1)
    with pytest.raises(NotALeaf):
        expand(tree, 999)


def test_length_one_segment_is_terminal():
    tree = uniform_segment(12, 1)  # [0, 11]
    ids = [tree.leaves[0]]
    while ids:
        nxt = []
        for i in ids:
            l, r = expand(tree, i)
            nxt += [s.id for s in (l, r) if s.expandable]
        ids = nxt
    assert expandable_leaves(tree) == []
    assert visible_frames(tree) == list(range(12))
    short = [s for s in tree.leaf_segments() if s.start == 10][0]
    assert (short.start, short.end) == (10, 11)
    with pytest.raises(NotExpandable):
        expand(tree, short.id)


def test_expandable_leaves_filters_and_orders():
    tree = uniform_segment(180, 4)
    assert expandable_leaves(tree) == tree.leaves
    # leaves of length 1, 2 and 45
    tree = uniform_segment(49, 1)  # [0,48]
    expand(tree, 0)  # [0,24] [24,48]
    lid = tree.leaves[0]
    expand(tree, lid)  # [0,12] [12,24]
    for _ in range(3):
        lid = tree.leaves[0]
        expand(tree, lid)
    # [0,1] [1,3] [3,6] [6,12] [12,24] [24,48]
    spans = dict((s.id, (s.start, s.end)) for s in tree.leaf_segments())
    got = [spans[i] for i in expandable_leaves(tree)]
    assert got == [(1, 3), (3, 6), (6, 12), (12, 24), (24, 48)]


def test_three_expansions_add_three_frames():
    tree = uniform_segment(180, 4)
    for _ in range(3):
        expand(tree, expandable_leaves(tree)[-1])
    assert len(visible_frames(tree)) == 8


def random_expansions(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 400)
    m = rng.randint(1, n - 1)
    tree = uniform_segment(n, m)
    history = [visible_frames(tree)]
    for _ in range(rng.randint(0, 60)):
        cands = expandable_leaves(tree)
        if not cands:
            break
        expand(tree, rng.choice(cands))
        history.append(visible_frames(tree))
    return n, m, tree, history


def test_fuzz_tiling_and_accounting():
    for seed in range(1000):
        n, m, tree, history = random_expansions(seed)
        spans = leaf_spans(tree)
        assert spans[0][0] == 0 and spans[-1][1] == n - 1, seed
        assert all(a[1] == b[0] for a, b in zip(spans, spans[1:])), seed
        assert all(s < e for s, e in spans), seed
        for k, vis in enumerate(history):
            assert len(vis) == m + 1 + k, seed
        # later visible sets contain the earlier ones
        for earlier, later in zip(history, history[1:]):
            assert set(earlier) <= set(later), seed


@given(st.integers(0, 10**6))
def test_identical_sequences_give_identical_trees(seed):
    a = random_expansions(seed)[2]
    b = random_expansions(seed)[2]
    assert a.to_dict() == b.to_dict()
