"""Completion backends.

SymbolicBackend recognizes the fixed prompt templates, re-parses the live
question, executes the verbalized step exactly, and writes the reasoning
and answer in the style of the few-shot exemplars. It is deliberately
brittle: any prompt that does not match a known template is a dispatch
error, never a guess.

RemoteBackend posts OpenAI-style chat-completion requests over HTTP with
bounded retries (never on 4xx) and a shared connection pool.
"""

from __future__ import annotations

import dataclasses
import hashlib
import logging
import os
import re
import threading
import time
from dataclasses import dataclass

import requests

from . import chain, pc
from .graphs import Pdag
from .hypotheses import (
    COMMON_CAUSE,
    DIRECT_CAUSE,
    MEDIATION,
    TOGETHER_CAUSE,
    Hypothesis,
    holds_in_dag,
)
from .parsing import (
    SENTINEL_NO_DIRECTED,
    SENTINEL_NO_PATHS,
    SENTINEL_NO_VSTRUCTS,
    DirectedEdges,
    ParseError,
    ParsedGraph,
    SentinelNone,
    infer_names,
    parse_graph_answer,
    parse_paths_answer,
    parse_premise,
    split_hypothesis,
)
from .pc import Path2, PipelineError
from .render import (
    render_directed_edges,
    render_edge,
    render_entries,
    render_pair,
    render_path,
    render_paths,
    render_pdag,
)
from .verbalize import name_list

logger = logging.getLogger(__name__)

DEFAULT_CREDENTIAL_ENV = "CORR2CAUSE_API_KEY"


class BackendError(Exception):
    pass


class TransientBackendError(BackendError):
    """Worth retrying: timeouts, connection failures, 429 and 5xx."""


class PermanentBackendError(BackendError):
    """Not worth retrying: bad request, bad credential, bad response shape."""


class SymbolicDispatchError(BackendError):
    """The prompt does not match any template the solver knows."""


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    stop: tuple[str, ...] = ()
    max_tokens: int | None = 1024
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")
        if not self.stop and self.max_tokens is None:
            raise ValueError("need a stop sequence or a token limit")


@dataclass
class Completion:
    text: str
    input_tokens: int | None = None
    output_tokens: int | None = None


@dataclass
class BackendConfig:
    kind: str = "symbolic"
    endpoint: str | None = None
    model: str | None = None
    credential_env: str = DEFAULT_CREDENTIAL_ENV
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout_s: float = 60.0
    max_attempts: int = 3
    backoff_s: float = 1.0
    concurrency: int = 4
    verbose: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("remote", "symbolic"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote backend requires an endpoint")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")

    @classmethod
    def from_toml(cls, path: str) -> "BackendConfig":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as f:
            data = tomllib.load(f)
        section = data.get("backend", data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(section) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**section)


def make_backend(config: BackendConfig):
    if config.kind == "symbolic":
        return SymbolicBackend()
    return RemoteBackend(config)


def template_regex(template: str) -> re.Pattern:
    """Regex matching a filled-in template, capturing each placeholder."""
    parts = re.split(r"\{(\w+)\}", template)
    out = []
    for i, part in enumerate(parts):
        out.append(f"(?P<{part}>.+?)" if i % 2 else re.escape(part))
    return re.compile("".join(out), re.DOTALL)


def _cap(text: str) -> str:
    return text[:1].upper() + text[1:]


def _strip_period(text: str) -> str:
    return text[:-1] if text.endswith(".") else text


_QUESTION_LINE = re.compile(r"(?m)^Question: ")

# The exemplars phrase two questions differently from the live turn: the
# v-structure exemplars drop "of the undirected graph" at the end, and the
# final-step exemplars say "Given the causal graph:" with no edge-notation
# reminder. Both wordings dispatch to the same solver.
TEMPLATE_VARIANTS: dict[int, tuple[str, ...]] = {
    4: ("Given the paths of length 2: {ans3} of the undirected graph: "
        "{ans2}. Can you find all possible v-structures?",),
    8: ('Given the causal graph: {ans7}. Can you infer if the Hypothesis '
        '"{hypothesis}" is True or False?',
        'Given the inferred causal graph: {ans7}. Can you infer if the '
        'Hypothesis "{hypothesis}" is True or False?'),
}


def live_question(prompt: str) -> str:
    """The question being asked, after any exemplar blocks and markers."""
    hits = list(_QUESTION_LINE.finditer(prompt))
    seg = prompt[hits[-1].end():] if hits else prompt
    if seg.endswith("\nAnswer:"):
        seg = seg[: -len("\nAnswer:")]
    cut = seg.find("\nReasoning:")
    if cut != -1:
        seg = seg[:cut]
    return seg.strip()


class SymbolicBackend:
    """Exact solver over the fixed templates; stateless and deterministic."""

    def __init__(self) -> None:
        specs = chain.load_subq_specs()
        self._subq_rx = [(i, template_regex(t))
                         for i in range(1, 9)
                         for t in (specs[i].template,
                                   *TEMPLATE_VARIANTS.get(i, ()))]
        self._baseline_rx = template_regex(chain.BASELINE_QUESTION)
        self._solvers = {1: self._subq1, 2: self._subq2, 3: self._subq3,
                         4: self._subq4, 5: self._subq5, 6: self._subq6,
                         7: self._subq7, 8: self._subq8}
        self._memo: dict[str, tuple[str, str]] = {}
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> Completion:
        text = self._respond(request.prompt)
        return Completion(chain.truncate_at(text, request.stop))

    def healthcheck(self) -> str:
        return "ok"

    def _respond(self, prompt: str) -> str:
        answer_call = prompt.endswith("\nAnswer:")
        live = live_question(prompt)
        try:
            reasoning, answer = self._solve(live)
        except (ParseError, PipelineError) as e:
            raise SymbolicDispatchError(str(e)) from e
        if answer_call:
            return f" {answer}"
        return f" {reasoning}\nAnswer: {answer}"

    def _solve(self, live: str) -> tuple[str, str]:
        with self._lock:
            hit = self._memo.get(live)
        if hit is not None:
            return hit
        result = self._solve_fresh(live)
        with self._lock:
            if len(self._memo) >= 20000:
                self._memo.clear()
            self._memo[live] = result
        return result

    def _solve_fresh(self, live: str) -> tuple[str, str]:
        for i, rx in self._subq_rx:
            m = rx.fullmatch(live)
            if m:
                return self._solvers[i](**m.groupdict())
        for cue in (chain.COT_PC_CUE, chain.COT_CUE):
            if live.endswith("\n" + cue):
                live = live[: -len(cue) - 1].rstrip()
                break
        m = self._baseline_rx.fullmatch(live)
        if m:
            return self._baseline(**m.groupdict())
        digest = hashlib.sha256(live.encode()).hexdigest()[:12]
        raise SymbolicDispatchError(f"unrecognized prompt (sha256 {digest})")

    # --- one solver per subquestion ---

    def _subq1(self, premise: str) -> tuple[str, str]:
        p = parse_premise(premise)
        if all(len(nm) == 1 for nm in p.names):
            joined = ",".join(p.names)
        elif len(p.names) == 2:
            joined = " and ".join(p.names)
        else:
            joined = ", ".join(p.names)
        graph = render_pdag(pc.initial_complete_graph(p.n), p.names)
        reasoning = (f"Since our variables are {joined} => the initial fully "
                     f"connected undirected graph is {graph}.")
        return reasoning, graph

    def _subq2(self, premise: str, ans1: str) -> tuple[str, str]:
        p = parse_premise(premise)
        g1 = parse_graph_answer(ans1, names=p.names)
        if not isinstance(g1, ParsedGraph) or g1.directed_order:
            raise SymbolicDispatchError(
                "the starting graph must be fully undirected")
        current = list(g1.entries)
        lines = [f"1. We start with the given fully connected graph: "
                 f"{render_entries(current, p.names)}."]
        step_lines = []
        for s, text in zip(p.statements, p.statement_texts):
            if s.z:
                canon = (f"{p.names[s.x]} and {p.names[s.y]} are independent "
                         f"given {name_list([p.names[v] for v in sorted(s.z)])}")
            else:
                canon = f"{p.names[s.x]} is independent of {p.names[s.y]}"
            entry = ("u", (s.x, s.y))
            if entry in current:
                current.remove(entry)
            step_lines.append(
                f"{canon} => {render_pair(s.x, s.y, p.names)} is removed => "
                f"the graph after this step is {render_entries(current, p.names)}.")
        header = ("2. We then check all conditional independencies and "
                  "remove edges appropriately. In our case:")
        if not step_lines:
            lines.append(f"{header} There are no conditional independencies "
                         f"=> no edges are removed => the graph after this "
                         f"step is {render_entries(current, p.names)}.")
        elif len(step_lines) == 1:
            lines.append(f"{header} {step_lines[0]}")
        else:
            lines.append(header)
            lines.extend(step_lines)
        final = render_entries(current, p.names)
        lines.append(f"3. The final undirected graph is: {final}.")
        return "\n".join(lines), final

    def _subq3(self, ans2: str) -> tuple[str, str]:
        names = infer_names(ans2)
        g = parse_graph_answer(ans2, names=names)
        if isinstance(g, SentinelNone):
            return ("Since there are no edges, there are no paths of "
                    "length 2."), SENTINEL_NO_PATHS
        if not isinstance(g, ParsedGraph) or g.directed_order:
            raise SymbolicDispatchError("expected an undirected graph")
        echo = render_entries(g.entries, names)
        lines = [f"We go through all unordered pairs of edges in the "
                 f"undirected graph {echo} above and find paths of length 2:"]
        edges = sorted(g.pdag.adjacent_pairs())
        paths: list[Path2] = []
        if len(edges) == 1:
            lines.append("Since there is only one edge, there are no paths "
                         "of length 2.")
        for i, e1 in enumerate(edges):
            for e2 in edges[i + 1:]:
                t1, t2 = render_pair(*e1, names), render_pair(*e2, names)
                shared = set(e1) & set(e2)
                if len(shared) != 1:
                    lines.append(f"Since the edges {t1} and {t2} do not have "
                                 f"a common node, they do not form a path of "
                                 f"length 2.")
                    continue
                m = shared.pop()
                x = e1[0] if e1[1] == m else e1[1]
                y = e2[0] if e2[1] == m else e2[1]
                path = Path2(x, m, y)
                paths.append(path)
                lines.append(f"Since the edges {t1} and {t2} share a common "
                             f"node {names[m]} => {render_path(path, names)} "
                             f"is a path of length 2.")
        answer = render_paths(paths, names) if paths else SENTINEL_NO_PATHS
        return "\n".join(lines), answer

    def _subq4(self, ans3: str, ans2: str) -> tuple[str, str]:
        names = infer_names(ans3, ans2)
        p3 = parse_paths_answer(ans3, names=names)
        if isinstance(p3, SentinelNone):
            reasoning = (f"{_strip_period(SENTINEL_NO_PATHS)} => "
                         f"{SENTINEL_NO_VSTRUCTS}.")
            return reasoning, SENTINEL_NO_VSTRUCTS
        g2 = parse_graph_answer(ans2, names=names)
        if isinstance(g2, SentinelNone):
            pdag = Pdag(len(names), frozenset(), frozenset())
            echo = render_entries((), names)
        elif isinstance(g2, ParsedGraph):
            pdag, echo = g2.pdag, render_entries(g2.entries, names)
        else:
            raise SymbolicDispatchError("expected an undirected graph")
        lines = [f"We go through all paths of length 2 and check if there is "
                 f"an edge connecting the start and end of the path in the "
                 f"undirected graph: {echo}."]
        cands: list[Path2] = []
        for path in p3.paths:
            ptext = render_path(path, names)
            pair = render_pair(min(path.x, path.y), max(path.x, path.y), names)
            if pdag.is_adjacent(path.x, path.y):
                lines.append(f"For path {ptext}: {pair} belongs to the set of "
                             f"edges {{{echo}}} => {ptext} is not a "
                             f"v-structure.")
            else:
                cands.append(path)
                lines.append(f"For path {ptext}: {pair} does not belong to "
                             f"the set of edges {{{echo}}} => {ptext} is a "
                             f"possible v-structure.")
        answer = render_paths(cands, names) if cands else SENTINEL_NO_VSTRUCTS
        return "\n".join(lines), answer

    def _subq5(self, premise: str, ans4: str) -> tuple[str, str]:
        p = parse_premise(premise)
        p4 = parse_paths_answer(ans4, names=p.names)
        lines = ["We first go through all possible v-structures:"]
        if isinstance(p4, SentinelNone):
            lines.append(f"{SENTINEL_NO_VSTRUCTS}.")
            return "\n".join(lines), SENTINEL_NO_DIRECTED
        emitted: list[tuple[int, int]] = []
        deduped: list[tuple[int, int]] = []
        oriented_cands = 0
        for x, z, y in p4.paths:
            pair = (min(x, y), max(x, y))
            quotes = [f"{t}." for s, t in zip(p.statements, p.statement_texts)
                      if (s.x, s.y) == pair]
            sepsets = [s for s in p.statements if (s.x, s.y) == pair]
            if not sepsets:
                raise PipelineError(
                    f"candidate ({x},{z},{y}) has no separating set")
            ptext = render_path(Path2(x, z, y), p.names)
            head = (f"{ptext} is a possible v-structure: all conditional "
                    f"independences between {p.names[x]} and {p.names[y]} "
                    f"are: {' '.join(quotes)} Since the middle variable "
                    f"{p.names[z]} is ")
            if any(z in s.z for s in sepsets):
                lines.append(
                    f"{head}in a conditioning set that makes {p.names[x]} "
                    f"and {p.names[y]} independent => {ptext} does not form "
                    f"a v-structure => {SENTINEL_NO_DIRECTED}.")
                continue
            oriented_cands += 1
            new = [(x, z), (y, z)]
            emitted.extend(new)
            for edge in new:
                if edge not in deduped:
                    deduped.append(edge)
            lines.append(
                f"{head}not in any conditioning set that makes {p.names[x]} "
                f"and {p.names[y]} independent => {ptext} form a v-structure "
                f"=> we orient the arrows towards the middle node "
                f"{p.names[z]}: {render_directed_edges(new, p.names)}.")
        if oriented_cands >= 2:
            lines.append(f"In total: {render_directed_edges(emitted, p.names)}, "
                         f"so removing duplicates: "
                         f"{render_directed_edges(deduped, p.names)}.")
        answer = render_directed_edges(deduped, p.names) if deduped \
            else SENTINEL_NO_DIRECTED
        return "\n".join(lines), answer

    def _subq6(self, ans2: str, ans5: str) -> tuple[str, str]:
        names = infer_names(ans2, ans5)
        g2 = parse_graph_answer(ans2, names=names)
        d5 = parse_graph_answer(ans5, names=names)
        if isinstance(g2, SentinelNone):
            entries: list[tuple[str, tuple[int, int]]] = []
            skeleton = Pdag(len(names), frozenset(), frozenset())
        elif isinstance(g2, ParsedGraph) and not g2.directed_order:
            entries, skeleton = list(g2.entries), g2.pdag
        else:
            raise SymbolicDispatchError("expected an undirected graph")
        echo = render_entries(entries, names)
        if isinstance(d5, SentinelNone):
            reasoning = (f"Since there are no directed edges => the final "
                         f"(undirected) graph remains: {echo}.")
            return reasoning, echo
        if not isinstance(d5, DirectedEdges):
            raise SymbolicDispatchError("expected directed edges only")
        merged = pc.merge_orientations(skeleton, d5.edges)
        oriented = {(min(a, b), max(a, b)): (a, b) for a, b in merged.directed}
        lines = []
        final_entries = []
        for tag, pair in entries:
            if pair in oriented:
                final_entries.append(("d", oriented[pair]))
                lines.append(f"{render_pair(*pair, names)} becomes "
                             f"{render_edge(*oriented[pair], names)}")
            else:
                final_entries.append((tag, pair))
                lines.append(f"{render_pair(*pair, names)} remains "
                             f"{render_pair(*pair, names)}")
        if lines:
            lines[-1] += "."
        final = render_entries(final_entries, names)
        lines.append(f"So the final (partially) directed graph is: {final}.")
        return "\n".join(lines), final

    def _subq7(self, ans6: str, ans3: str) -> tuple[str, str]:
        names = infer_names(ans6, ans3)
        g6 = parse_graph_answer(ans6, names=names)
        if isinstance(g6, SentinelNone):
            entries: list[tuple[str, tuple[int, int]]] = []
            graph = Pdag(len(names), frozenset(), frozenset())
        elif isinstance(g6, DirectedEdges):
            entries = [("d", e) for e in g6.edges]
            graph = Pdag(len(names), frozenset(), frozenset(g6.edges))
        else:
            entries, graph = list(g6.entries), g6.pdag
        echo = render_entries(entries, names)
        p3 = parse_paths_answer(ans3, names=names)
        if isinstance(p3, SentinelNone):
            reasoning = (f"We go through all paths of length 2 in the graph: "
                         f"{_strip_period(SENTINEL_NO_PATHS)} => No "
                         f"undirected edge to orient.\n"
                         f"So, the final graph is: {echo}.")
            return reasoning, echo
        lines = [f"We go through all paths of length 2 in the graph: "
                 f"{render_paths(p3.paths, names)} and possibly orient non "
                 f"directed edges. In our case:"]
        new_edges: list[tuple[int, int]] = []
        for x, z, y in p3.paths:
            ptext = render_path(Path2(x, z, y), names)
            prefix = f"For path {ptext} with middle node {names[z]}: "
            sides = []
            for u, v in ((x, z), (z, y)):
                pair = (min(u, v), max(u, v))
                if pair in graph.undirected:
                    sides.append(("u", pair))
                elif pair[::-1] in graph.directed or pair in graph.directed:
                    edge = pair if pair in graph.directed else pair[::-1]
                    sides.append(("d", edge))
                else:
                    raise SymbolicDispatchError(
                        f"path edge ({u},{v}) missing from the graph")
            tags = {tag for tag, _ in sides}
            if tags == {"u"}:
                t1, t2 = (render_pair(*e, names) for _, e in sides)
                lines.append(f"{prefix}Both {t1} and {t2} are undirected => "
                             f"We do not orient an edge.")
                continue
            if tags == {"d"}:
                t1, t2 = (render_edge(*e, names) for _, e in sides)
                lines.append(f"{prefix}Both {t1} and {t2} are directed => "
                             f"No undirected edge to orient.")
                continue
            (dtag, dedge) = sides[0] if sides[0][0] == "d" else sides[1]
            (_, upair) = sides[0] if sides[0][0] == "u" else sides[1]
            dtext, utext = render_edge(*dedge, names), render_pair(*upair, names)
            if dedge[1] == z:
                w = upair[0] if upair[1] == z else upair[1]
                if graph.is_adjacent(x, y):
                    lines.append(
                        f"{prefix}{dtext} is directed towards the middle "
                        f"node {names[z]} and {utext} is undirected, but "
                        f"{names[x]} and {names[y]} are connected by an edge "
                        f"=> We do not orient an edge.")
                    continue
                edge = (z, w)
                if edge not in new_edges and edge[::-1] not in new_edges:
                    new_edges.append(edge)
                lines.append(
                    f"{prefix}{dtext} is directed towards the middle node "
                    f"{names[z]} and {utext} is undirected => we orient "
                    f"{render_edge(*edge, names)} such that no extra "
                    f"v-structure is created.")
            else:
                outer = dedge[1]
                lines.append(
                    f"{prefix}{dtext} is directed towards the outer node "
                    f"{names[outer]} and {utext} is undirected => We do not "
                    f"orient an edge.")
        merged = pc.merge_orientations(graph, new_edges)
        oriented = {(min(a, b), max(a, b)): (a, b) for a, b in merged.directed}
        final_entries = [("d", oriented[pair]) if tag == "u" and pair in oriented
                         else (tag, pair) for tag, pair in entries]
        final = render_entries(final_entries, names)
        lines.append(f"So, the final graph is: {final}.")
        return "\n".join(lines), final

    def _subq8(self, ans7: str, hypothesis: str) -> tuple[str, str]:
        kind, a_txt, b_txt = split_hypothesis(hypothesis)
        graph_names = infer_names(ans7)
        folded = {nm.casefold(): nm for nm in graph_names}
        resolved = [folded.get(t.casefold(), t) for t in (a_txt, b_txt)]
        names = tuple(sorted(set(graph_names) | set(resolved)))
        ids = {nm: i for i, nm in enumerate(names)}
        a, b = ids[resolved[0]], ids[resolved[1]]
        g7 = parse_graph_answer(ans7, names=names)
        if isinstance(g7, SentinelNone):
            entries: list[tuple[str, tuple[int, int]]] = []
            graph = Pdag(len(names), frozenset(), frozenset())
        elif isinstance(g7, DirectedEdges):
            entries = [("d", e) for e in g7.edges]
            graph = Pdag(len(names), frozenset(), frozenset(g7.edges))
        else:
            entries, graph = list(g7.entries), g7.pdag
        gset = f"{{{render_entries(entries, names)}}}"
        hyp_body = _strip_period(hypothesis.strip())

        def clause(tail: int, head: int) -> tuple[str, bool]:
            edge = render_edge(tail, head, names)
            if (tail, head) in graph.directed:
                return f"the directed edge {edge} belongs to the set {gset}", True
            pair = (min(tail, head), max(tail, head))
            paren = ""
            if pair in graph.undirected:
                paren = (f" (since {edge} is directed while "
                         f"{render_pair(*pair, names)} is undirected)")
            return (f"the directed edge {edge} does not belong to the set "
                    f"{gset}{paren}"), False

        members = pc.pdag_members(graph)
        universal = 1 if members and all(
            holds_in_dag(m, Hypothesis(kind, a, b)) for m in members) else 0
        override = (f"However, the graph {gset} represents all causal graphs "
                    f"with the same undirected edges and v-structures.")

        if kind == DIRECT_CAUSE:
            line = (f"We have {hyp_body}, that is "
                    f"{render_edge(a, b, names)}.")
            text, present = clause(a, b)
            if present:
                line += f" {_cap(text)}, so the hypothesis is True."
                return line, "1"
            if universal:
                line += (f" {_cap(text)}. {override} In every such graph the "
                         f"directed edge {render_edge(a, b, names)} is "
                         f"present, so the hypothesis is True.")
                return line, "1"
            line += f" {_cap(text)}, so the hypothesis is False."
            return line, "0"

        others = [w for w in range(len(names)) if w not in (a, b)]
        others_txt = ", ".join(names[w] for w in others)
        if kind == TOGETHER_CAUSE:
            quest = (f"check if there is a directed edge from {names[a]} to "
                     f"it and another one from {names[b]} to it")
            edges_of = lambda w: ((a, w), (b, w))
            joiner = " and "
            neg = (f"there is no variable in the causal graph {gset} with an "
                   f"incoming edge both from {names[a]} and another one from "
                   f"{names[b]}")
            uni = (f"In every such graph there is a variable with an incoming "
                   f"edge both from {names[a]} and another one from "
                   f"{names[b]}")
        elif kind == COMMON_CAUSE:
            quest = (f"check if there is a directed edge from it to "
                     f"{names[a]} and another one from it to {names[b]}")
            edges_of = lambda w: ((w, a), (w, b))
            joiner = " and "
            neg = (f"there is no variable in the causal graph {gset} with an "
                   f"outgoing edge pointing to {names[a]} and another one "
                   f"pointing to {names[b]}")
            uni = (f"In every such graph there is a variable with an outgoing "
                   f"edge pointing to {names[a]} and another one pointing to "
                   f"{names[b]}")
        else:
            quest = (f"check if there is a directed edge from {names[a]} to "
                     f"it and another one from it to {names[b]}")
            edges_of = lambda w: ((a, w), (w, b))
            joiner = None
            neg = (f"{names[a]} does not influence {names[b]} through some "
                   f"mediator(s)")
            uni = (f"In every such graph {names[a]} influences {names[b]} "
                   f"through some mediator(s)")

        lines = []
        if others:
            lines.append(f"We have {hyp_body}. We go through all variables "
                         f"apart from {names[a]} and {names[b]}: {others_txt} "
                         f"and {quest}:")
        else:
            lines.append(f"We have {hyp_body}. We go through all variables "
                         f"apart from {names[a]} and {names[b]}: there are "
                         f"no other variables.")
        found = None
        for w in others:
            e1, e2 = edges_of(w)
            c1, p1 = clause(*e1)
            c2, p2 = clause(*e2)
            if p1 and p2 and found is None:
                found = w
            if kind == MEDIATION:
                t1, t2 = render_edge(*e1, names), render_edge(*e2, names)
                head = f"For {names[w]}: we have edges {t1} and {t2}. "
                if p1 and p2:
                    lines.append(f"{head}Both {c1} and {c2}, so {names[w]} "
                                 f"is a mediator.")
                elif p1 or p2:
                    present = t1 if p1 else t2
                    lines.append(f"{head}{_cap(c1)} but {c2}. Since only one "
                                 f"edge, {present}, belongs to the set of "
                                 f"edges, so {names[w]} is not a mediator.")
                else:
                    lines.append(f"{head}{_cap(c1)} and {c2}. Since none of "
                                 f"the edges belongs to the graph, so "
                                 f"{names[w]} is not a mediator.")
            else:
                lines.append(f"For {names[w]}: {c1}{joiner}{c2}.")

        if found is not None:
            if kind == MEDIATION:
                e1, e2 = edges_of(found)
                closer = (f"From the above, both {render_edge(*e1, names)} "
                          f"and {render_edge(*e2, names)} belong to the set "
                          f"of edges {gset}, so the hypothesis is True.")
            elif kind == TOGETHER_CAUSE:
                closer = (f"From the above, there is a variable, "
                          f"{names[found]}, in the causal graph {gset} with "
                          f"an incoming edge both from {names[a]} and "
                          f"another one from {names[b]}, so the hypothesis "
                          f"is True.")
            else:
                closer = (f"From the above, there is a variable, "
                          f"{names[found]}, in the causal graph {gset} with "
                          f"an outgoing edge pointing to {names[a]} and "
                          f"another one pointing to {names[b]}, so the "
                          f"hypothesis is True.")
            lines.append(closer)
            return "\n".join(lines), "1"
        if universal:
            lines.append(f"From the above, {neg}. {override} {uni}, so the "
                         f"hypothesis is True.")
            return "\n".join(lines), "1"
        lines.append(f"From the above, {neg}, so the hypothesis is False.")
        return "\n".join(lines), "0"

    def _baseline(self, premise: str, hypothesis: str) -> tuple[str, str]:
        p = parse_premise(premise)
        kind, a_txt, b_txt = split_hypothesis(hypothesis)
        folded = {nm.casefold(): i for i, nm in enumerate(p.names)}
        try:
            a, b = folded[a_txt.casefold()], folded[b_txt.casefold()]
        except KeyError as e:
            raise SymbolicDispatchError(
                f"hypothesis variable {e.args[0]!r} not in the premise") from e
        graph = pc.run_pc(p.statements, p.n, fixpoint=False)
        members = pc.pdag_members(graph)
        lab = 1 if members and all(
            holds_in_dag(m, Hypothesis(kind, a, b)) for m in members) else 0
        verdict = "True" if lab else "False"
        reasoning = (f"Applying the PC algorithm, the final graph is: "
                     f"{render_pdag(graph, p.names)}. The hypothesis is "
                     f"{verdict}.")
        return reasoning, str(lab)


class RemoteBackend:
    """OpenAI-style chat-completion client, shareable across threads."""

    def __init__(self, config: BackendConfig) -> None:
        self._config = config
        self._session = requests.Session()
        self._gate = threading.Semaphore(config.concurrency)

    def complete(self, request: CompletionRequest) -> Completion:
        cfg = self._config
        key = os.environ.get(cfg.credential_env)
        if not key:
            raise PermanentBackendError(
                f"credential environment variable {cfg.credential_env} "
                f"is not set")
        payload = {
            "model": cfg.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        if request.stop:
            payload["stop"] = list(request.stop)
        digest = hashlib.sha256(request.prompt.encode()).hexdigest()[:12]
        if cfg.verbose:
            logger.debug("request prompt: %s", request.prompt)
        else:
            logger.debug("request sha256=%s chars=%d", digest,
                         len(request.prompt))
        last: BackendError | None = None
        for attempt in range(cfg.max_attempts):
            if attempt:
                time.sleep(cfg.backoff_s * 2 ** (attempt - 1))
            try:
                with self._gate:
                    resp = self._session.post(
                        cfg.endpoint, json=payload, timeout=cfg.timeout_s,
                        headers={"Authorization": f"Bearer {key}"})
            except requests.RequestException as e:
                last = TransientBackendError(str(e))
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = TransientBackendError(
                    f"status {resp.status_code}: {resp.text[:200]}")
                continue
            if resp.status_code >= 400:
                raise PermanentBackendError(
                    f"status {resp.status_code}: {resp.text[:200]}")
            try:
                data = resp.json()
                text = data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as e:
                raise PermanentBackendError(
                    f"unexpected response shape: {e}") from e
            usage = data.get("usage") or {}
            logger.debug("response sha256=%s chars=%d", digest, len(text))
            return Completion(chain.truncate_at(text, request.stop),
                              usage.get("prompt_tokens"),
                              usage.get("completion_tokens"))
        assert last is not None
        raise last

    def healthcheck(self) -> str:
        try:
            self.complete(CompletionRequest(prompt="ping", max_tokens=1))
        except BackendError as e:
            return f"error: {e}"
        return "ok"
