"""Parsers recovering structured values (graphs, paths, labels, CI sets)
from completion text and from premise text.

Parsed answers form a tagged union: ParsedGraph | DirectedEdges |
ParsedPaths | SentinelNone | int label, one variant per subquestion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .graphs import CiStatement, Edge, Pair, Pdag, ci
from .hypotheses import (
    COMMON_CAUSE,
    DIRECT_CAUSE,
    MEDIATION,
    TOGETHER_CAUSE,
    Hypothesis,
)
from .pc import Path2

SENTINEL_NO_PATHS = "No paths of length 2 found."
SENTINEL_NO_VSTRUCTS = "No possible v-structures found"
SENTINEL_NO_DIRECTED = "No directed edges found"
SENTINEL_NO_EDGES = "No edges found"

_SENTINEL_KINDS = {
    "no paths of length 2 found": "paths",
    "no possible v-structures found": "vstructs",
    "no directed edges found": "directed",
    "no edges found": "edges",
}

_NUMBER_WORDS = {"two": 2, "three": 3, "four": 4, "five": 5, "six": 6}


class ParseError(ValueError):

    def __init__(self, message: str, sentence: int | None = None):
        if sentence is not None:
            message = f"sentence {sentence}: {message}"
        super().__init__(message)
        self.sentence = sentence


@dataclass(frozen=True)
class SentinelNone:
    """A recognized none-of-these phrase; kind names what was absent."""
    kind: str


@dataclass(frozen=True)
class ParsedGraph:
    """entries keeps the edges as written: ("u", (x, y)) for undirected
    pairs (canonicalized x < y), ("d", (tail, head)) for directed ones."""
    pdag: Pdag
    names: tuple[str, ...]
    entries: tuple[tuple[str, tuple[int, int]], ...]

    @property
    def undirected_order(self) -> tuple[Pair, ...]:
        return tuple(e for tag, e in self.entries if tag == "u")

    @property
    def directed_order(self) -> tuple[Edge, ...]:
        return tuple(e for tag, e in self.entries if tag == "d")


@dataclass(frozen=True)
class DirectedEdges:
    edges: tuple[Edge, ...]
    names: tuple[str, ...]


@dataclass(frozen=True)
class ParsedPaths:
    paths: tuple[Path2, ...]
    names: tuple[str, ...]


@dataclass(frozen=True)
class ParsedPremise:
    n: int
    names: tuple[str, ...]
    statements: tuple[CiStatement, ...]
    statement_texts: tuple[str, ...]
    correlations: tuple[Pair, ...]

    @property
    def ci_set(self) -> frozenset[CiStatement]:
        return frozenset(self.statements)


def _normalize(text: str) -> str:
    return (text.replace("→", "->")
                .replace("⇒", "=>")
                .replace("’", "'"))


def _sentinel_of(text: str) -> SentinelNone | None:
    for line in text.splitlines():
        key = line.strip().rstrip(".").casefold()
        if key in _SENTINEL_KINDS:
            return SentinelNone(_SENTINEL_KINDS[key])
    return None


_PAREN = re.compile(r"\(([^()]*)\)")


def _resolve(name: str, ids: dict[str, int]) -> int:
    if name in ids:
        return ids[name]
    folded = {k.casefold(): v for k, v in ids.items()}
    if name.casefold() in folded:
        return folded[name.casefold()]
    raise ParseError(f"unknown variable {name!r}")


def _split_group(content: str) -> list[str]:
    return [p.strip() for p in content.split(",")]


def _line_tokens(line: str) -> list[tuple[str, list[str]]]:
    """Edge-ish tokens of one line in textual order: ("group", members)
    for parenthesized tuples, ("arrow", [tail, head]) for directed edges."""
    tokens: list[tuple[int, str, list[str]]] = []
    cut = []
    for m in _PAREN.finditer(line):
        tokens.append((m.start(), "group", _split_group(m.group(1))))
        cut.append((m.start(), m.end()))
    rest = list(line)
    for a, b in cut:
        rest[a:b] = " " * (b - a)
    for piece in "".join(rest).split(","):
        if "->" not in piece:
            continue
        tail, _, head = piece.partition("->")
        # Tolerate a prose prefix ("the final graph is: A -> B") and a
        # sentence-final period.
        tail = tail.rpartition(":")[2].strip()
        head = head.strip().rstrip(".")
        if tail and head:
            off = line.find(piece.strip()) if piece.strip() else 0
            tokens.append((off, "arrow", [tail, head]))
    tokens.sort(key=lambda t: t[0])
    return [(kind, members) for _, kind, members in tokens]


def _edge_line(text: str) -> str | None:
    lines = [l for l in text.splitlines() if _line_tokens(l)]
    return lines[-1] if lines else None


def _name_table(tokens, names: Sequence[str] | None) -> dict[str, int]:
    if names is not None:
        return {name: i for i, name in enumerate(names)}
    seen = {m for _, members in tokens for m in members}
    return {name: i for i, name in enumerate(sorted(seen))}


def infer_names(*texts: str) -> tuple[str, ...]:
    """Variable names mentioned in edge or path tokens, sorted."""
    seen: set[str] = set()
    for text in texts:
        for line in _normalize(text).splitlines():
            for _, members in _line_tokens(line):
                seen.update(members)
    return tuple(sorted(seen))


def parse_graph_answer(text: str, names: Sequence[str] | None = None,
                       ) -> ParsedGraph | DirectedEdges | SentinelNone:
    """Read the last edge-bearing line of text as a graph.

    Undirected edges are written (X,Y), directed ones X -> Y; prose around
    the line and a Unicode arrow are tolerated.
    """
    norm = _normalize(text)
    line = _edge_line(norm)
    if line is None:
        sentinel = _sentinel_of(norm)
        if sentinel is not None:
            return sentinel
        raise ParseError(f"no edges and no recognized phrase in {text!r}")
    tokens = _line_tokens(line)
    ids = _name_table(tokens, names)
    entries: list[tuple[str, tuple[int, int]]] = []
    for kind, members in tokens:
        if kind == "group":
            if len(members) != 2:
                raise ParseError(f"expected an edge pair, got {members!r}")
            a, b = (_resolve(m, ids) for m in members)
            entry = ("u", (min(a, b), max(a, b)))
        else:
            a, b = (_resolve(m, ids) for m in members)
            entry = ("d", (a, b))
        if entry not in entries:
            entries.append(entry)
    undirected = [e for tag, e in entries if tag == "u"]
    directed = [e for tag, e in entries if tag == "d"]
    name_list = tuple(names) if names is not None else \
        tuple(sorted(ids, key=ids.get))
    if not undirected and directed:
        return DirectedEdges(tuple(directed), name_list)
    try:
        pdag = Pdag(len(name_list), frozenset(undirected), frozenset(directed))
    except (ValueError, IndexError) as e:
        raise ParseError(str(e)) from e
    return ParsedGraph(pdag, name_list, tuple(entries))


def parse_paths_answer(text: str, names: Sequence[str] | None = None,
                       ) -> ParsedPaths | SentinelNone:
    """Read (X,Z,Y) triples in order; also serves v-structure candidates."""
    norm = _normalize(text)
    line = _edge_line(norm)
    if line is None:
        sentinel = _sentinel_of(norm)
        if sentinel is not None:
            return sentinel
        raise ParseError(f"no paths and no recognized phrase in {text!r}")
    tokens = _line_tokens(line)
    ids = _name_table(tokens, names)
    paths: list[Path2] = []
    for kind, members in tokens:
        if kind != "group" or len(members) != 3:
            raise ParseError(f"expected a length-2 path triple, got {members!r}")
        x, z, y = (_resolve(m, ids) for m in members)
        paths.append(Path2(x, z, y))
    name_list = tuple(names) if names is not None else \
        tuple(sorted(ids, key=ids.get))
    return ParsedPaths(tuple(paths), name_list)


def parse_label_answer(text: str) -> int:
    """Last standalone 0 or 1 in the text; True/False as fallback."""
    hits = re.findall(r"(?<![\w.])[01](?![\w.])", text)
    if hits:
        return int(hits[-1])
    words = re.findall(r"\b(true|false)\b", text, flags=re.IGNORECASE)
    if words:
        return 1 if words[-1].casefold() == "true" else 0
    raise ParseError(f"no label in {text!r}")


# The two variable counts may disagree (one benchmark exemplar says "4
# variables ... these 3 variables"); only the first one is checked.
_HEADER_SYSTEM = re.compile(
    r"Suppose there is a closed system of (\d+) variables,? (.+?)\. "
    r"All the statistical relations among these \d+ variables are as follows:\s*(.*)",
    re.DOTALL)
_HEADER_FACTORS = re.compile(
    r"Let's consider (\w+) factors?: (.+?)\. (.*)", re.DOTALL)


def _split_name_list(segment: str) -> list[str]:
    parts: list[str] = []
    for chunk in segment.split(","):
        chunk = chunk.strip()
        if chunk.startswith("and "):
            chunk = chunk[4:]
        if " and " in chunk:
            left, right = chunk.split(" and ", 1)
            parts.extend([left.strip(), right.strip()])
        elif chunk:
            parts.append(chunk)
    return parts


def _premise_statement_patterns(name_rx: str) -> list[tuple[str, re.Pattern]]:
    n = name_rx
    return [
        ("corr", re.compile(rf"({n}) correlates? with ({n})\.?")),
        ("corr_between", re.compile(
            rf"There is a correlation between ({n}) and ({n})"
            rf"((?:, and between ({n}) and ({n}))*)\.?", re.IGNORECASE)),
        ("marg", re.compile(rf"({n}) (?:is|are) independent of ({n})\.?")),
        ("marg_each", re.compile(
            rf"({n}) and ({n}) are independent from each other\.?")),
        ("cond", re.compile(rf"({n}) and ({n}) are independent given (.+?)\.?")),
        ("cond2", re.compile(
            rf"({n}) (?:is|are) independent of ({n}) given (.+?)\.?")),
    ]


def parse_premise(text: str, n: int | None = None,
                  names: Sequence[str] | None = None) -> ParsedPremise:
    """Inverse of premise verbalization; also reads the story-style
    "Let's consider ... factors" records."""
    norm = _normalize(text).strip()
    norm = re.sub(r"^Premise:\s*", "", norm)
    m = _HEADER_SYSTEM.fullmatch(norm)
    if m:
        declared = int(m.group(1))
    else:
        m = _HEADER_FACTORS.fullmatch(norm)
        if not m:
            raise ParseError("unrecognized premise header", sentence=0)
        declared = _NUMBER_WORDS.get(m.group(1).casefold())
        if declared is None:
            raise ParseError(f"unknown count word {m.group(1)!r}", sentence=0)
    listed = _split_name_list(m.group(2))
    if len(listed) != declared:
        raise ParseError(
            f"header declares {declared} variables but lists {len(listed)}",
            sentence=0)
    if names is not None:
        if set(names) != set(listed):
            raise ParseError("provided names do not match the header", sentence=0)
        ordered = tuple(names)
    else:
        ordered = tuple(sorted(listed))
    if n is not None and n != declared:
        raise ParseError(f"expected {n} variables, header declares {declared}",
                         sentence=0)
    ids = {name: i for i, name in enumerate(ordered)}

    name_rx = "|".join(re.escape(v) for v in
                       sorted(ordered, key=len, reverse=True))
    patterns = _premise_statement_patterns(name_rx)
    statements: list[CiStatement] = []
    texts: list[str] = []
    correlations: list[Pair] = []
    body = m.group(len(m.groups())).strip()
    sentences = [s for s in re.split(r"(?<=\.)\s+", body) if s.strip()]
    for idx, sentence in enumerate(sentences, start=1):
        bare = re.sub(r"^However,\s*", "", sentence.strip())
        bare_nofirst = bare[:1].lower() + bare[1:] if bare else bare
        matched = False
        for form, rx in patterns:
            hit = rx.fullmatch(bare) or rx.fullmatch(bare_nofirst)
            if not hit:
                continue
            matched = True
            if form == "corr":
                a, b = _resolve(hit.group(1), ids), _resolve(hit.group(2), ids)
                correlations.append((min(a, b), max(a, b)))
            elif form == "corr_between":
                for pa, pb in re.findall(
                        rf"between ({name_rx}) and ({name_rx})", bare,
                        flags=re.IGNORECASE):
                    a, b = _resolve(pa, ids), _resolve(pb, ids)
                    correlations.append((min(a, b), max(a, b)))
            else:
                a, b = _resolve(hit.group(1), ids), _resolve(hit.group(2), ids)
                if form in ("cond", "cond2"):
                    given = [_resolve(v, ids)
                             for v in _split_name_list(hit.group(3))]
                else:
                    given = []
                try:
                    statements.append(ci(a, b, *given))
                except (ValueError, IndexError) as e:
                    raise ParseError(str(e), sentence=idx) from e
                texts.append(bare.rstrip("."))
            break
        if not matched:
            raise ParseError(f"unrecognized statement {sentence!r}", sentence=idx)
    return ParsedPremise(declared, ordered, tuple(statements), tuple(texts),
                         tuple(correlations))


def _hypothesis_patterns(name_rx: str) -> list[tuple[str, re.Pattern]]:
    n = name_rx
    forms = [
        (DIRECT_CAUSE, rf"({n}) directly (?:affects?|causes?) ({n})"),
        (TOGETHER_CAUSE,
         rf"({n}) and ({n}) together cause some other variable\(s\)"),
        (TOGETHER_CAUSE,
         rf"There exists at least one collider \(i\.e\., common effect\) "
         rf"of ({n}) and ({n})"),
        (COMMON_CAUSE,
         rf"Some variable\(s\) (?:cause|causes|cause\(s\)) both ({n}) and ({n})"),
        (COMMON_CAUSE,
         rf"There exists at least one confounder \(i\.e\., common cause\) "
         rf"of ({n}) and ({n})"),
        (MEDIATION, rf"({n}) influences? ({n}) through some mediator\(s\)"),
        (MEDIATION,
         rf"There exists at least one mediator \(i\.e\., intermediate "
         rf"variable\) between ({n}) and ({n})"),
    ]
    return [(kind, re.compile(rx + r"\.?", re.IGNORECASE))
            for kind, rx in forms]


def parse_hypothesis(text: str, names: Sequence[str]) -> Hypothesis:
    """Match the hypothesis sentence against the known phrasings."""
    norm = _normalize(text).strip()
    norm = re.sub(r"^Hypothesis:\s*", "", norm, flags=re.IGNORECASE)
    ids = {name: i for i, name in enumerate(names)}
    name_rx = "|".join(re.escape(v) for v in
                       sorted(names, key=len, reverse=True))
    for kind, rx in _hypothesis_patterns(name_rx):
        hit = rx.fullmatch(norm)
        if hit:
            a, b = _resolve(hit.group(1), ids), _resolve(hit.group(2), ids)
            return Hypothesis(kind, a, b)
    raise ParseError(f"unrecognized hypothesis {text!r}")


_GENERIC_HYPOTHESIS = _hypothesis_patterns(r".+?")


def split_hypothesis(text: str) -> tuple[str, str, str]:
    """Like parse_hypothesis but with no name table: returns the kind and
    the two variable names as written."""
    norm = _normalize(text).strip()
    norm = re.sub(r"^Hypothesis:\s*", "", norm, flags=re.IGNORECASE)
    for kind, rx in _GENERIC_HYPOTHESIS:
        hit = rx.fullmatch(norm)
        if hit:
            return kind, hit.group(1).strip(), hit.group(2).strip()
    raise ParseError(f"unrecognized hypothesis {text!r}")


def parse_corr2cause_record(obj: dict) -> tuple[str, str, int]:
    """Split an external record {"input": premise+hypothesis, "label": int}
    into (premise, hypothesis, label)."""
    if "input" not in obj or "label" not in obj:
        raise ParseError("record must have input and label fields")
    text = _normalize(str(obj["input"]))
    head, marker, hyp = text.rpartition("Hypothesis:")
    if not marker:
        raise ParseError("no Hypothesis marker in input")
    premise = re.sub(r"^Premise:\s*", "", head.strip())
    return premise, hyp.strip(), int(obj["label"])
