"""The PC algorithm as composable pure steps (steps 0-3), plus the MEC
reconstruction used to read ground truth back off a finished graph."""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .graphs import (
    CiStatement,
    Dag,
    Pair,
    Pdag,
    dags_with_signature,
    unordered_pairs,
)


class PipelineError(Exception):
    """An intermediate value contradicts the pipeline state it came from."""


class Path2(NamedTuple):
    x: int
    z: int
    y: int


def initial_complete_graph(n: int) -> Pdag:
    return Pdag(n, frozenset(unordered_pairs(n)), frozenset())


def skeleton_from_ci(statements: Iterable[CiStatement], n: int) -> Pdag:
    removed = {(s.x, s.y) for s in statements}
    keep = frozenset(p for p in unordered_pairs(n) if p not in removed)
    return Pdag(n, keep, frozenset())


def paths_length2(g: Pdag) -> list[Path2]:
    """All length-2 paths, iterating unordered edge pairs in sorted order.

    With both edges stored canonically the shared node forces other(e1) <
    other(e2), so triples come out with x < y without re-sorting.
    """
    edges = sorted(g.adjacent_pairs())
    out = []
    for i, e1 in enumerate(edges):
        for e2 in edges[i + 1:]:
            shared = set(e1) & set(e2)
            if len(shared) != 1:
                continue
            m = shared.pop()
            x = e1[0] if e1[1] == m else e1[1]
            y = e2[0] if e2[1] == m else e2[1]
            out.append(Path2(x, m, y))
    return out


def candidate_v_structures(paths: Sequence[Path2], g: Pdag) -> list[Path2]:
    return [p for p in paths if not g.is_adjacent(p.x, p.y)]


def orient_v_structures(cands: Sequence[Path2],
                        statements: Iterable[CiStatement]) -> list[tuple[int, int]]:
    """Directed edges from candidates whose middle is in no separating set;
    duplicates removed, insertion order preserved."""
    by_pair: dict[Pair, list[CiStatement]] = {}
    for s in statements:
        by_pair.setdefault((s.x, s.y), []).append(s)
    out: list[tuple[int, int]] = []
    for x, z, y in cands:
        sepsets = by_pair.get((min(x, y), max(x, y)))
        if not sepsets:
            raise PipelineError(f"candidate ({x},{z},{y}) has no separating set")
        if any(z in s.z for s in sepsets):
            continue
        for edge in ((x, z), (y, z)):
            if edge not in out:
                out.append(edge)
    return out


def merge_orientations(skeleton: Pdag, directed: Iterable[tuple[int, int]]) -> Pdag:
    undirected = set(skeleton.undirected)
    oriented: dict[Pair, tuple[int, int]] = {
        (min(a, b), max(a, b)): (a, b) for a, b in skeleton.directed
    }
    for a, b in directed:
        pair = (min(a, b), max(a, b))
        if pair in undirected:
            undirected.remove(pair)
            oriented[pair] = (a, b)
        elif oriented.get(pair) == (a, b):
            continue
        elif pair in oriented:
            raise PipelineError(f"edge {pair} oriented both ways")
        else:
            raise PipelineError(f"directed edge ({a},{b}) not in the skeleton")
    return Pdag(skeleton.n, frozenset(undirected), frozenset(oriented.values()))


def propagate_orientations(g: Pdag, paths: Sequence[Path2],
                           fixpoint: bool = True) -> Pdag:
    """Step 3: for paths (x,z,y) with one edge directed into z and the other
    undirected, orient the other away from z, unless x and y are adjacent
    (a shielded triple can never create a v-structure, so the rule premise
    never forces anything there).

    Each pass reads the graph as it stood at pass start, mirroring the
    transcript style where a just-oriented edge is still narrated as
    undirected; with fixpoint on, passes repeat until stable.
    """
    current = g
    while True:
        new_edges: list[tuple[int, int]] = []
        for x, z, y in paths:
            if current.is_adjacent(x, y):
                continue
            for into, other in (((x, z), y), ((y, z), x)):
                if into in current.directed and \
                        (min(other, z), max(other, z)) in current.undirected:
                    edge = (z, other)
                    if edge not in new_edges and (other, z) not in new_edges:
                        new_edges.append(edge)
        if not new_edges:
            return current
        current = merge_orientations(current, new_edges)
        if not fixpoint:
            return current


def run_pc(statements: Iterable[CiStatement], n: int, fixpoint: bool = True) -> Pdag:
    stmts = list(statements)
    skeleton = skeleton_from_ci(stmts, n)
    paths = paths_length2(skeleton)
    cands = candidate_v_structures(paths, skeleton)
    directed = orient_v_structures(cands, stmts)
    merged = merge_orientations(skeleton, directed)
    return propagate_orientations(merged, paths, fixpoint=fixpoint)


def pdag_v_structures(g: Pdag) -> frozenset[tuple[int, int, int]]:
    """Directed v-patterns of the graph: x -> z <- y with x,y non-adjacent."""
    out = set()
    for x, z in g.directed:
        for y, z2 in g.directed:
            if z2 == z and x < y and not g.is_adjacent(x, y):
                out.add((x, z, y))
    return frozenset(out)


def pdag_members(g: Pdag) -> list[Dag]:
    """The DAGs the finished graph stands for: acyclic orientations of its
    skeleton with an identical v-structure set (the Markov equivalence
    class, by the skeleton+v-structure characterization)."""
    return dags_with_signature(g.n, g.adjacent_pairs(), pdag_v_structures(g))
