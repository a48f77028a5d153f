"""The four causal hypothesis kinds and ground-truth labeling over MECs."""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import Dag, Mec, descendants

DIRECT_CAUSE = "direct_cause"
TOGETHER_CAUSE = "together_cause"
COMMON_CAUSE = "common_cause"
MEDIATION = "mediation"

KINDS = (DIRECT_CAUSE, TOGETHER_CAUSE, COMMON_CAUSE, MEDIATION)

# DirectCause and Mediation are ordered (a affects b); the other two are
# symmetric and canonicalize to a < b.
ORDERED_KINDS = (DIRECT_CAUSE, MEDIATION)


@dataclass(frozen=True)
class Hypothesis:
    kind: str
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")
        if self.a == self.b:
            raise ValueError("a == b")
        if self.kind not in ORDERED_KINDS and self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)


def hypothesis(kind: str, a: int, b: int) -> Hypothesis:
    if kind not in ORDERED_KINDS and a > b:
        a, b = b, a
    return Hypothesis(kind, a, b)


def holds_in_dag(g: Dag, h: Hypothesis, ancestral: bool = False) -> bool:
    """Direct-edge semantics matching the few-shot reasonings; the ancestral
    flag switches confounding/mediation witnesses to directed paths."""
    a, b = h.a, h.b
    for v in (a, b):
        if not 0 <= v < g.n:
            raise IndexError(f"variable {v} out of range for n={g.n}")
    others = [w for w in range(g.n) if w not in (a, b)]
    if h.kind == DIRECT_CAUSE:
        return (a, b) in g.edges
    if not ancestral:
        if h.kind == TOGETHER_CAUSE:
            return any((a, w) in g.edges and (b, w) in g.edges for w in others)
        if h.kind == COMMON_CAUSE:
            return any((w, a) in g.edges and (w, b) in g.edges for w in others)
        return any((a, w) in g.edges and (w, b) in g.edges for w in others)
    if h.kind == TOGETHER_CAUSE:
        return any(w in descendants(g, a) and w in descendants(g, b) for w in others)
    if h.kind == COMMON_CAUSE:
        return any(a in descendants(g, w) and b in descendants(g, w) for w in others)
    return any(w in descendants(g, a) and b in descendants(g, w) for w in others)


def label(mec: Mec, h: Hypothesis, ancestral: bool = False) -> int:
    """1 iff the hypothesis holds in every member DAG of the class."""
    return int(all(holds_in_dag(g, h, ancestral) for g in mec.members))
