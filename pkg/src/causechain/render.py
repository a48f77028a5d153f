"""Canonical text forms for graphs, paths and edge sets.

Single-letter tuples pack tight, "(A,B)"; multi-word names take a space
after the comma, "(ice cream sales, obesity)". Directed edges always
render "X -> Y". Graph entries are joined ", " in unordered-pair order.
"""

from __future__ import annotations

from typing import Sequence

from .graphs import Edge, Pdag
from .parsing import SENTINEL_NO_EDGES
from .pc import Path2


def _tuple_text(parts: Sequence[str]) -> str:
    sep = ", " if any(len(p) > 1 for p in parts) else ","
    return "(" + sep.join(parts) + ")"


def render_pair(x: int, y: int, names: Sequence[str]) -> str:
    return _tuple_text([names[x], names[y]])


def render_edge(tail: int, head: int, names: Sequence[str]) -> str:
    return f"{names[tail]} -> {names[head]}"


def render_path(p: Path2, names: Sequence[str]) -> str:
    return _tuple_text([names[p.x], names[p.z], names[p.y]])


def render_paths(paths: Sequence[Path2], names: Sequence[str]) -> str:
    return ", ".join(render_path(p, names) for p in paths)


def render_directed_edges(edges: Sequence[Edge], names: Sequence[str]) -> str:
    return ", ".join(render_edge(a, b, names) for a, b in edges)


def render_entries(entries: Sequence[tuple[str, tuple[int, int]]],
                   names: Sequence[str]) -> str:
    """Entries as written, ("u", pair) or ("d", edge), joined ", ";
    an empty list renders as the sentinel phrase."""
    if not entries:
        return SENTINEL_NO_EDGES
    parts = [render_edge(*e, names) if tag == "d" else render_pair(*e, names)
             for tag, e in entries]
    return ", ".join(parts)


def render_pdag(g: Pdag, names: Sequence[str]) -> str:
    """Entries in unordered-pair order, each per its stored direction;
    the empty graph renders as its sentinel phrase."""
    directed = {(min(a, b), max(a, b)): (a, b) for a, b in g.directed}
    entries = []
    for pair in sorted(g.adjacent_pairs()):
        if pair in directed:
            entries.append(render_edge(*directed[pair], names))
        else:
            entries.append(render_pair(*pair, names))
    if not entries:
        return SENTINEL_NO_EDGES
    return ", ".join(entries)
