"""Core graph machinery: DAG enumeration, d-separation, MEC clustering."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

Edge = tuple[int, int]
Pair = tuple[int, int]
Signature = tuple[frozenset[Pair], frozenset[tuple[int, int, int]]]

MAX_ENUM_N = 6


def ordered_pairs(n: int) -> list[Edge]:
    return [(a, b) for a in range(n) for b in range(n) if a != b]


def unordered_pairs(n: int) -> list[Pair]:
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def _has_cycle(n: int, edges: Iterable[Edge]) -> bool:
    children: dict[int, list[int]] = {v: [] for v in range(n)}
    indeg = [0] * n
    for a, b in edges:
        children[a].append(b)
        indeg[b] += 1
    queue = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return seen != n


@dataclass(frozen=True)
class Dag:
    """Labeled directed acyclic graph; edges are (parent, child) pairs."""

    n: int
    edges: frozenset[Edge]

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise IndexError(f"edge ({a},{b}) out of range for n={self.n}")
        if _has_cycle(self.n, self.edges):
            raise ValueError("directed cycle")

    def parents(self, v: int) -> set[int]:
        return {a for a, b in self.edges if b == v}

    def children(self, v: int) -> set[int]:
        return {b for a, b in self.edges if a == v}

    def skeleton(self) -> frozenset[Pair]:
        return frozenset((min(a, b), max(a, b)) for a, b in self.edges)


def dag(n: int, *edges: Edge) -> Dag:
    return Dag(n, frozenset(edges))


@dataclass(frozen=True)
class Pdag:
    """Partially directed graph: a mix of undirected pairs and directed edges."""

    n: int
    undirected: frozenset[Pair]
    directed: frozenset[Edge]

    def __post_init__(self) -> None:
        for a, b in itertools.chain(self.undirected, self.directed):
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise IndexError(f"edge ({a},{b}) out of range for n={self.n}")
        for a, b in self.undirected:
            if a > b:
                raise ValueError(f"undirected pair ({a},{b}) not canonical")
        dir_pairs = {(min(a, b), max(a, b)) for a, b in self.directed}
        if dir_pairs & self.undirected:
            raise ValueError("edge present both directed and undirected")
        if len(dir_pairs) != len(self.directed):
            raise ValueError("edge directed both ways")

    def adjacent_pairs(self) -> frozenset[Pair]:
        return self.undirected | frozenset(
            (min(a, b), max(a, b)) for a, b in self.directed
        )

    def is_adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.adjacent_pairs()


@dataclass(frozen=True)
class CiStatement:
    """x independent of y given z, canonical x < y, z sorted."""

    x: int
    y: int
    z: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise ValueError("x == y")
        if self.x > self.y:
            raise ValueError(f"statement ({self.x},{self.y}) not canonical")
        if self.x in self.z or self.y in self.z:
            raise ValueError("endpoint inside conditioning set")
        if tuple(sorted(set(self.z))) != self.z:
            raise ValueError(f"conditioning set {self.z} not canonical")


CiSet = frozenset


def ci(x: int, y: int, *z: int) -> CiStatement:
    a, b = min(x, y), max(x, y)
    return CiStatement(a, b, tuple(sorted(z)))


def enumerate_dags(n: int) -> Iterator[Dag]:
    """All labeled DAGs on n nodes, ascending edge-bitmask order.

    Bit k of the mask is the k-th ordered pair in lexicographic order, so
    record ids derived from enumeration position are stable across runs.
    """
    if not 1 <= n <= MAX_ENUM_N:
        raise IndexError(f"n={n} outside 1..{MAX_ENUM_N}")
    pairs = ordered_pairs(n)
    if n <= 5:
        for mask in range(1 << len(pairs)):
            edges = frozenset(p for k, p in enumerate(pairs) if mask >> k & 1)
            if not _has_cycle(n, edges):
                yield Dag(n, edges)
    else:
        yield from _enumerate_pruned(n, pairs)


def _enumerate_pruned(n: int, pairs: list[Edge]) -> Iterator[Dag]:
    # Depth-first over bits from the highest down, 0-branch first: identical
    # order to the brute mask scan, but subtrees under a cycle are skipped.
    children: dict[int, set[int]] = {v: set() for v in range(n)}

    def reaches(src: int, dst: int) -> bool:
        stack, seen = [src], set()
        while stack:
            v = stack.pop()
            if v == dst:
                return True
            if v in seen:
                continue
            seen.add(v)
            stack.extend(children[v])
        return False

    chosen: list[Edge] = []

    def walk(bit: int) -> Iterator[frozenset[Edge]]:
        if bit < 0:
            yield frozenset(chosen)
            return
        yield from walk(bit - 1)
        a, b = pairs[bit]
        if not reaches(b, a):
            children[a].add(b)
            chosen.append((a, b))
            yield from walk(bit - 1)
            chosen.pop()
            children[a].remove(b)

    for edges in walk(len(pairs) - 1):
        yield Dag(n, edges)


def robinson_dag_count(n: int) -> int:
    """Count of labeled DAGs on n nodes by the standard recurrence."""
    counts = [1]
    for m in range(1, n + 1):
        total = 0
        for k in range(1, m + 1):
            total += (-1) ** (k + 1) * math.comb(m, k) * 2 ** (k * (m - k)) * counts[m - k]
        counts.append(total)
    return counts[n]


def descendants(g: Dag, v: int) -> set[int]:
    out: set[int] = set()
    stack = [v]
    while stack:
        w = stack.pop()
        for c in g.children(w):
            if c not in out:
                out.add(c)
                stack.append(c)
    return out


def simple_paths(g: Dag, x: int, y: int) -> Iterator[tuple[int, ...]]:
    """All simple paths between x and y over the skeleton, as node tuples."""
    adj: dict[int, set[int]] = {v: set() for v in range(g.n)}
    for a, b in g.edges:
        adj[a].add(b)
        adj[b].add(a)
    path = [x]
    on_path = {x}

    def walk(v: int) -> Iterator[tuple[int, ...]]:
        if v == y:
            yield tuple(path)
            return
        for w in adj[v]:
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                yield from walk(w)
                path.pop()
                on_path.remove(w)

    yield from walk(x)


def _path_blocked(g: Dag, path: tuple[int, ...], z: frozenset[int],
                  desc_cache: dict[int, set[int]]) -> bool:
    for i in range(1, len(path) - 1):
        prev, w, nxt = path[i - 1], path[i], path[i + 1]
        is_collider = (prev, w) in g.edges and (nxt, w) in g.edges
        if is_collider:
            if w not in desc_cache:
                desc_cache[w] = descendants(g, w)
            if w not in z and not (desc_cache[w] & z):
                return True
        elif w in z:
            return True
    return False


def d_separated(g: Dag, x: int, y: int, z: Iterable[int]) -> bool:
    """True iff every path between x and y is blocked conditioned on z."""
    zs = frozenset(z)
    for v in itertools.chain((x, y), zs):
        if not 0 <= v < g.n:
            raise IndexError(f"variable {v} out of range for n={g.n}")
    if x == y or x in zs or y in zs:
        raise ValueError("x, y and z must be disjoint")
    desc_cache: dict[int, set[int]] = {}
    for path in simple_paths(g, x, y):
        if not _path_blocked(g, path, zs, desc_cache):
            return False
    return True


def implied_ci_set(g: Dag) -> frozenset[CiStatement]:
    """All singleton-pair conditional independencies entailed by g."""
    out = set()
    for x, y in unordered_pairs(g.n):
        rest = [v for v in range(g.n) if v not in (x, y)]
        for r in range(len(rest) + 1):
            for z in itertools.combinations(rest, r):
                if d_separated(g, x, y, z):
                    out.add(CiStatement(x, y, z))
    return frozenset(out)


def mec_signature(g: Dag) -> Signature:
    skeleton = g.skeleton()
    vstructs = set()
    for x, y in unordered_pairs(g.n):
        if (x, y) in skeleton:
            continue
        for z in g.children(x) & g.children(y):
            vstructs.add((x, z, y))
    return skeleton, frozenset(vstructs)


class Mec:
    """A Markov equivalence class: member DAGs sharing one signature."""

    def __init__(self, members: tuple[Dag, ...], signature: Signature):
        if not members:
            raise ValueError("empty class")
        self.members = members
        self.signature = signature
        self.n = members[0].n

    @cached_property
    def ci_set(self) -> frozenset[CiStatement]:
        return implied_ci_set(self.members[0])

    def __repr__(self) -> str:
        return f"Mec(n={self.n}, size={len(self.members)})"


def cluster_mecs(dags: Iterable[Dag]) -> list[Mec]:
    """Partition DAGs by signature, ordered by sorted signature."""
    groups: dict[Signature, list[Dag]] = {}
    for g in dags:
        groups.setdefault(mec_signature(g), []).append(g)

    def key(sig: Signature):
        skeleton, vstructs = sig
        return tuple(sorted(skeleton)), tuple(sorted(vstructs))

    return [Mec(tuple(groups[sig]), sig) for sig in sorted(groups, key=key)]


def dags_with_signature(n: int, skeleton: frozenset[Pair],
                        vstructs: frozenset[tuple[int, int, int]]) -> list[Dag]:
    """All DAGs on the skeleton whose v-structure set matches, i.e. the MEC
    the signature denotes (orders by orientation bitmask over sorted edges)."""
    edges = sorted(skeleton)
    out = []
    for mask in range(1 << len(edges)):
        directed = frozenset(
            (a, b) if not mask >> k & 1 else (b, a)
            for k, (a, b) in enumerate(edges)
        )
        if _has_cycle(n, directed):
            continue
        g = Dag(n, directed)
        if mec_signature(g) == (skeleton, vstructs):
            out.append(g)
    return out
