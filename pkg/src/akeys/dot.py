"""Graphviz export of a finished search tree.

Leaves holding key frames are filled green and every node on the way down to
them yellow. With no ground truth at hand, the deepest leaves stand in for the
key leaves since that is where the search concentrated.
"""

from __future__ import annotations

from typing import Optional, Sequence, Set, Tuple

from .segment_tree import SegmentTree

KEY_PATH_COLOR = "yellow"
KEY_LEAF_COLOR = "green"


def key_leaves(tree: SegmentTree, key_interval: Optional[Tuple[int, int]] = None) -> Set[int]:
    leaves = tree.leaf_segments()
    if key_interval is not None:
        lo, hi = key_interval
        return {s.id for s in leaves if s.overlaps(lo, hi)}
    deepest = max(s.depth for s in leaves)
    if deepest <= 1:
        return set()
    return {s.id for s in leaves if s.depth == deepest}


def export_dot(tree, key_interval: Optional[Sequence[int]] = None,
               name: str = "search_tree") -> str:
    """Render ``tree`` (a SegmentTree or a finished SearchResult) as DOT text."""
    tree = getattr(tree, "tree", tree)
    ki = tuple(key_interval) if key_interval is not None else None
    green = key_leaves(tree, ki)
    yellow: Set[int] = set()
    for leaf in green:
        yellow.update(tree.path_to(leaf)[:-1])

    lines = [f'digraph "{name}" {{', '  node [shape=box, fontname="Helvetica"];']
    roots = tree.roots
    video_root = len(roots) > 1
    if video_root:
        style = f', style=filled, fillcolor={KEY_PATH_COLOR}' if green else ""
        lines.append(f'  video [label="[0,{tree.n_frames - 1}]"{style}];')

    for seg in tree.nodes.values():
        attrs = f'label="[{seg.start},{seg.end}]"'
        if seg.id in green:
            attrs += f", style=filled, fillcolor={KEY_LEAF_COLOR}"
        elif seg.id in yellow:
            attrs += f", style=filled, fillcolor={KEY_PATH_COLOR}"
        lines.append(f"  n{seg.id} [{attrs}];")

    if video_root:
        for seg in roots:
            lines.append(f"  video -> n{seg.id};")
    for parent, (left, right) in tree.children.items():
        lines.append(f"  n{parent} -> n{left};")
        lines.append(f"  n{parent} -> n{right};")
    lines.append("}")
    return "\n".join(lines) + "\n"
