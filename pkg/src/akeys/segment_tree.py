"""Dynamic segment tree over sampled frame indices.

Leaves are the open list of the search. Neighbouring leaves share an endpoint,
so the visible frames are exactly the leaf boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple


class TreeError(ValueError):
    pass


class ZeroFrames(TreeError):
    pass


class MTooLarge(TreeError):
    pass


class NotExpandable(TreeError):
    pass


class NotALeaf(TreeError):
    pass


@dataclass(frozen=True)
class VideoSegment:
    id: int
    start: int
    end: int
    depth: int = 1
    parent: Optional[int] = None

    @property
    def length(self) -> int:
        return self.end - self.start

    @property
    def expandable(self) -> bool:
        # an interior frame must exist
        return self.end - self.start >= 2

    @property
    def midpoint(self) -> int:
        return (self.start + self.end) // 2

    def contains_interior(self, lo: int, hi: int) -> bool:
        """True if some frame of [lo, hi] lies strictly inside this segment."""
        return self.start < hi and self.end > lo

    def overlaps(self, lo: int, hi: int) -> bool:
        return self.start <= hi and self.end >= lo

    def __str__(self) -> str:
        return f"[{self.start},{self.end}]"


def uniform_boundaries(n_frames: int, m: int) -> List[int]:
    """round(i*(n_frames-1)/m) for i = 0..m, rounding halves away from zero."""
    span = n_frames - 1
    # integer form of floor(x + 1/2); x >= 0 so half-up == half-away-from-zero
    return [(2 * i * span + m) // (2 * m) for i in range(m + 1)]


class SegmentTree:
    """Binary-split tree over frames ``0..n_frames-1``.

    Not safe for concurrent mutation; one search owns one tree.
    """

    def __init__(self, n_frames: int, root_count: int):
        self.n_frames = n_frames
        self.root_count = root_count
        self.nodes: Dict[int, VideoSegment] = {}
        self.children: Dict[int, Tuple[int, int]] = {}
        self.leaves: List[int] = []
        self.splits = 0
        self._next_id = 0

    def _new_node(self, start: int, end: int, depth: int, parent: Optional[int]) -> VideoSegment:
        seg = VideoSegment(self._next_id, start, end, depth, parent)
        self.nodes[seg.id] = seg
        self._next_id += 1
        return seg

    @property
    def roots(self) -> List[VideoSegment]:
        return [s for s in self.nodes.values() if s.parent is None]

    def leaf_segments(self) -> List[VideoSegment]:
        return [self.nodes[i] for i in self.leaves]

    def is_leaf(self, seg_id: int) -> bool:
        return seg_id in self.nodes and seg_id not in self.children

    def expand(self, seg_id: int) -> Tuple[VideoSegment, VideoSegment]:
        if seg_id not in self.nodes or seg_id in self.children:
            raise NotALeaf(f"segment {seg_id} is not a leaf")
        seg = self.nodes[seg_id]
        if not seg.expandable:
            raise NotExpandable(f"segment {seg} has no interior frame")
        mid = seg.midpoint
        left = self._new_node(seg.start, mid, seg.depth + 1, seg.id)
        right = self._new_node(mid, seg.end, seg.depth + 1, seg.id)
        self.children[seg.id] = (left.id, right.id)
        pos = self.leaves.index(seg.id)
        self.leaves[pos:pos + 1] = [left.id, right.id]
        self.splits += 1
        return left, right

    def visible_frames(self) -> List[int]:
        leaves = self.leaf_segments()
        return [s.start for s in leaves] + [leaves[-1].end]

    def expandable_leaves(self) -> List[int]:
        return [i for i in self.leaves if self.nodes[i].expandable]

    def path_to(self, seg_id: int) -> List[int]:
        """Ids from the root segment down to ``seg_id``."""
        path = []
        cur: Optional[int] = seg_id
        while cur is not None:
            path.append(cur)
            cur = self.nodes[cur].parent
        return path[::-1]

    def to_dict(self) -> dict:
        return {
            "n_frames": self.n_frames,
            "root_count": self.root_count,
            "nodes": [
                {"id": s.id, "start": s.start, "end": s.end, "depth": s.depth, "parent": s.parent}
                for s in self.nodes.values()
            ],
            "leaves": list(self.leaves),
        }


def uniform_segment(n_frames: int, m: int) -> SegmentTree:
    if n_frames < 1:
        raise ZeroFrames("video has no frames")
    if m < 1:
        raise TreeError(f"segment count must be positive, got {m}")
    if n_frames < m + 1:
        raise MTooLarge(f"{n_frames} frames cannot hold {m} segments with distinct endpoints")
    tree = SegmentTree(n_frames, m)
    bounds = uniform_boundaries(n_frames, m)
    for lo, hi in zip(bounds, bounds[1:]):
        seg = tree._new_node(lo, hi, 1, None)
        tree.leaves.append(seg.id)
    return tree


def expand(tree: SegmentTree, seg_id: int) -> Tuple[VideoSegment, VideoSegment]:
    return tree.expand(seg_id)


def visible_frames(tree: SegmentTree) -> List[int]:
    return tree.visible_frames()


def expandable_leaves(tree: SegmentTree) -> List[int]:
    return tree.expandable_leaves()
