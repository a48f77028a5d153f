"""Prompt assembly and execution for the eight-subquestion chain and the
one-call baseline strategies.

Each subquestion sees only its wired inputs (no running transcript). A
subquestion costs two completions: the first, cued by "Reasoning:", stops
at "Answer:"; the second replays the prompt plus that reasoning with
"Answer:" appended and yields the answer line. Substituted values lose one
trailing period (templates carry the punctuation); the hypothesis is the
exception, travelling verbatim inside its quotes.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping

from . import parsing
from .parsing import (
    DirectedEdges,
    ParseError,
    ParsedGraph,
    ParsedPaths,
    SentinelNone,
)

SUBQ_WIRING: dict[int, tuple[str, ...]] = {
    1: ("premise",),
    2: ("premise", "ans1"),
    3: ("ans2",),
    4: ("ans3", "ans2"),
    5: ("premise", "ans4"),
    6: ("ans2", "ans5"),
    7: ("ans6", "ans3"),
    8: ("ans7", "hypothesis"),
}
SUBQ_SHOT_COUNTS = {1: 1, 2: 1, 3: 3, 4: 4, 5: 3, 6: 2, 7: 3, 8: 11}

PC_SUBQ = "pc_subq"
ZERO_SHOT = "zero_shot"
ZERO_SHOT_COT = "zero_shot_cot"
ZERO_SHOT_COT_PC = "zero_shot_cot_pc"
FEW_SHOT = "few_shot"
FEW_SHOT_COT = "few_shot_cot"
ALWAYS_MAJORITY = "always_majority"
STRATEGIES = (PC_SUBQ, ZERO_SHOT, ZERO_SHOT_COT, ZERO_SHOT_COT_PC,
              FEW_SHOT, FEW_SHOT_COT, ALWAYS_MAJORITY)

BASELINE_QUESTION = ("Premise: {premise} Hypothesis: {hypothesis} "
                     "Is the Hypothesis True or False? Answer with 0 or 1.")
COT_CUE = "Let's think step by step."
COT_PC_CUE = "Let's think step by step by applying the PC algorithm."

ANSWER_MARKER = "Answer:"


class SequencingError(Exception):
    """A subquestion was built before its wired inputs existed."""


@dataclass(frozen=True)
class Shot:
    question: str
    reasoning: str
    answer: str


@dataclass(frozen=True)
class SubQSpec:
    index: int
    template: str
    shots: tuple[Shot, ...]
    wiring: tuple[str, ...]


def _parse_asset(text: str) -> tuple[list[Shot], str]:
    """Sectioned shot file: "=== shot" blocks with "--- question" /
    "--- reasoning" / "--- answer" parts, then one "=== live" template."""
    shots: list[Shot] = []
    live: str | None = None
    current: dict[str, list[str]] | None = None
    part: str | None = None
    live_lines: list[str] | None = None

    def close_shot() -> None:
        nonlocal current
        if current is not None:
            shots.append(Shot(*("\n".join(current[k]).strip()
                                for k in ("question", "reasoning", "answer"))))
            current = None

    for line in text.splitlines():
        if line.strip() == "=== shot":
            close_shot()
            current, part = {"question": [], "reasoning": [], "answer": []}, None
        elif line.strip() == "=== live":
            close_shot()
            live_lines = []
        elif live_lines is not None:
            live_lines.append(line)
        elif line.strip() in ("--- question", "--- reasoning", "--- answer"):
            part = line.strip().split()[1]
        elif current is not None and part is not None:
            current[part].append(line)
    close_shot()
    if live_lines is None:
        return shots, ""
    return shots, "\n".join(live_lines).strip()


def _load_asset(name: str) -> str:
    return (resources.files("causechain") / "assets" / name).read_text(
        encoding="utf-8")


@lru_cache(maxsize=1)
def load_subq_specs() -> dict[int, SubQSpec]:
    specs = {}
    for i in range(1, 9):
        shots, live = _parse_asset(_load_asset(f"subq{i}.txt"))
        if len(shots) != SUBQ_SHOT_COUNTS[i]:
            raise ValueError(f"subq{i}: expected {SUBQ_SHOT_COUNTS[i]} shots, "
                             f"found {len(shots)}")
        if not live:
            raise ValueError(f"subq{i}: no live template")
        specs[i] = SubQSpec(i, live, tuple(shots), SUBQ_WIRING[i])
    return specs


@lru_cache(maxsize=1)
def load_baseline_shots() -> tuple[Shot, ...]:
    shots, _ = _parse_asset(_load_asset("baselines.txt"))
    if len(shots) != 6:
        raise ValueError(f"expected 6 baseline shots, found {len(shots)}")
    return tuple(shots)


def strip_value(value: str) -> str:
    value = value.strip()
    return value[:-1] if value.endswith(".") else value


def build_subq_prompt(spec: SubQSpec, ctx: Mapping[str, str]) -> str:
    missing = [k for k in spec.wiring if k not in ctx]
    if missing:
        raise SequencingError(f"subq{spec.index} needs {missing}")
    values = {k: ctx[k] if k == "hypothesis" else strip_value(ctx[k])
              for k in spec.wiring}
    live = spec.template.format(**values)
    blocks = [f"Question: {s.question}\nReasoning: {s.reasoning}"
              f"\nAnswer: {s.answer}" for s in spec.shots]
    blocks.append(f"Question: {live}\nReasoning:")
    return "\n\n".join(blocks)


def build_baseline_prompt(strategy: str, record: Mapping[str, str]) -> str:
    question = BASELINE_QUESTION.format(premise=record["premise"].strip(),
                                        hypothesis=record["hypothesis"].strip())
    if strategy == ZERO_SHOT:
        return question
    if strategy == ZERO_SHOT_COT:
        return f"{question}\n{COT_CUE}"
    if strategy == ZERO_SHOT_COT_PC:
        return f"{question}\n{COT_PC_CUE}"
    if strategy == FEW_SHOT:
        blocks = [f"Question: {s.question}\nAnswer: {s.answer}"
                  for s in load_baseline_shots()]
        blocks.append(f"Question: {question}\nAnswer:")
        return "\n\n".join(blocks)
    if strategy == FEW_SHOT_COT:
        blocks = [f"Question: {s.question}\nReasoning: {s.reasoning}"
                  f"\nAnswer: {s.answer}" for s in load_baseline_shots()]
        blocks.append(f"Question: {question}\nReasoning:")
        return "\n\n".join(blocks)
    raise ValueError(f"no baseline prompt for strategy {strategy!r}")


def truncate_at(text: str, stops: tuple[str, ...]) -> str:
    for stop in stops:
        cut = text.find(stop)
        if cut != -1:
            text = text[:cut]
    return text


@dataclass
class SubQStep:
    index: int
    prompt: str
    reasoning: str
    answer: str
    parsed: Any = None
    latency_s: float = 0.0
    input_tokens: int | None = None
    output_tokens: int | None = None


@dataclass
class ChainTrace:
    id: str
    strategy: str
    steps: list[SubQStep] = field(default_factory=list)
    predicted: int | None = None
    gold: int | None = None
    abstained: bool = False
    error: str | None = None

    def to_json(self) -> str:
        obj = {
            "id": self.id,
            "strategy": self.strategy,
            "subq": [{"prompt": s.prompt, "reasoning": s.reasoning,
                      "answer": s.answer} for s in self.steps],
            "predicted": self.predicted,
            "gold": self.gold,
        }
        if self.abstained:
            obj["abstained"] = True
        if self.error is not None:
            obj["error"] = self.error
        return json.dumps(obj)

    @classmethod
    def from_json(cls, line: str) -> "ChainTrace":
        obj = json.loads(line)
        steps = [SubQStep(i + 1, s.get("prompt", ""), s.get("reasoning", ""),
                          s.get("answer", ""))
                 for i, s in enumerate(obj.get("subq", []))]
        return cls(obj["id"], obj.get("strategy", ""), steps,
                   obj.get("predicted"), obj.get("gold"),
                   obj.get("abstained", False), obj.get("error"))


def _check_answer(index: int, answer: str) -> Any:
    """Parse an answer into the structured form its consumers expect."""
    if index == 8:
        return parsing.parse_label_answer(answer)
    if index in (3, 4):
        parsed = parsing.parse_paths_answer(answer)
        allowed = {3: ("paths",), 4: ("vstructs",)}[index]
    else:
        parsed = parsing.parse_graph_answer(answer)
        allowed = {1: (), 2: ("edges",), 5: ("directed",),
                   6: ("edges",), 7: ("edges",)}[index]
    if isinstance(parsed, SentinelNone):
        if parsed.kind not in allowed:
            raise ParseError(
                f"subq{index} answered the wrong kind of nothing: "
                f"{parsed.kind}")
    elif index == 5 and not isinstance(parsed, DirectedEdges):
        raise ParseError("subq5 must answer directed edges only")
    elif index == 1 and not isinstance(parsed, ParsedGraph):
        raise ParseError("subq1 must answer an undirected graph")
    return parsed


def _call(backend, prompt: str, stops: tuple[str, ...]):
    from .backends import CompletionRequest
    start = time.monotonic()
    result = backend.complete(CompletionRequest(prompt=prompt, stop=stops))
    elapsed = time.monotonic() - start
    return truncate_at(result.text, stops), result, elapsed


def run_chain(record: Mapping[str, Any], backend) -> ChainTrace:
    trace = ChainTrace(id=str(record.get("id", "")), strategy=PC_SUBQ,
                       gold=record.get("label"))
    ctx: dict[str, str] = {"premise": record["premise"],
                           "hypothesis": record["hypothesis"]}
    specs = load_subq_specs()
    for i in range(1, 9):
        prompt = build_subq_prompt(specs[i], ctx)
        reasoning, r1, t1 = _call(backend, prompt, (ANSWER_MARKER,))
        reasoning = reasoning.strip()
        answer_prompt = f"{prompt} {reasoning}\n{ANSWER_MARKER}"
        answer, r2, t2 = _call(backend, answer_prompt, ("Question:",))
        answer = answer.strip().split("\n")[0].strip()
        step = SubQStep(i, prompt, reasoning, answer, latency_s=t1 + t2)
        for r in (r1, r2):
            if r.input_tokens is not None:
                step.input_tokens = (step.input_tokens or 0) + r.input_tokens
            if r.output_tokens is not None:
                step.output_tokens = (step.output_tokens or 0) + r.output_tokens
        trace.steps.append(step)
        try:
            step.parsed = _check_answer(i, answer)
        except ParseError as e:
            trace.error = f"subq{i}: {e}"
            trace.abstained = True
            trace.predicted = 0
            return trace
        ctx[f"ans{i}"] = answer
    trace.predicted = trace.steps[-1].parsed
    return trace


def run_baseline(record: Mapping[str, Any], strategy: str,
                 backend) -> ChainTrace:
    trace = ChainTrace(id=str(record.get("id", "")), strategy=strategy,
                       gold=record.get("label"))
    if strategy == ALWAYS_MAJORITY:
        trace.predicted = 0
        return trace
    prompt = build_baseline_prompt(strategy, record)
    completion, result, elapsed = _call(backend, prompt, ("Question:",))
    completion = completion.strip()
    step = SubQStep(1, prompt, completion, completion, latency_s=elapsed,
                    input_tokens=result.input_tokens,
                    output_tokens=result.output_tokens)
    trace.steps.append(step)
    try:
        trace.predicted = parsing.parse_label_answer(completion)
        step.answer = str(trace.predicted)
    except ParseError as e:
        trace.error = str(e)
        trace.abstained = True
        trace.predicted = 0
    return trace
