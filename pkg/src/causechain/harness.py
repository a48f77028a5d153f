"""Dataset generation, strategy evaluation, metrics, and trace reports."""

from __future__ import annotations

import itertools
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from . import chain
from .backends import (
    BackendError,
    CompletionRequest,
    SymbolicBackend,
    template_regex,
)
from .chain import ChainTrace
from .graphs import Mec, cluster_mecs, enumerate_dags
from .hypotheses import (
    COMMON_CAUSE,
    KINDS,
    TOGETHER_CAUSE,
    Hypothesis,
    label,
)
from .parsing import (
    ParseError,
    parse_corr2cause_record,
    parse_premise,
    split_hypothesis,
)
from .verbalize import (
    NameScheme,
    default_scheme,
    paraphrase,
    refactor_names,
    refactored_scheme,
    verbalize_hypothesis,
    verbalize_premise,
)

Progress = Callable[[str], None]

_UNORDERED = (TOGETHER_CAUSE, COMMON_CAUSE)


@dataclass(frozen=True)
class BenchmarkRecord:
    id: str
    n: int
    mec: int
    kind: str
    a: int
    b: int
    premise: str
    hypothesis: str
    label: int
    names: str = "default"
    perturbations: tuple[str, ...] = ()

    @property
    def input(self) -> str:
        return f"Premise: {self.premise} Hypothesis: {self.hypothesis}"

    def to_obj(self) -> dict:
        return {
            "id": self.id, "n": self.n, "mec": self.mec, "kind": self.kind,
            "a": self.a, "b": self.b, "premise": self.premise,
            "hypothesis": self.hypothesis, "input": self.input,
            "label": self.label, "names": self.names,
            "perturbations": list(self.perturbations),
        }

    @classmethod
    def from_obj(cls, obj: Mapping, index: int = 0) -> "BenchmarkRecord":
        if "premise" in obj and "hypothesis" in obj:
            premise, hypothesis = obj["premise"], obj["hypothesis"]
            lab = int(obj["label"])
        else:
            premise, hypothesis, lab = parse_corr2cause_record(dict(obj))
        n, kind = obj.get("n"), obj.get("kind")
        a, b = obj.get("a"), obj.get("b")
        if n is None or kind is None or a is None or b is None:
            n, kind, a, b = _derive_fields(premise, hypothesis)
        return cls(str(obj.get("id", f"ext-{index}")), n, int(obj.get("mec", -1)),
                   kind, a, b, premise, hypothesis, lab,
                   str(obj.get("names", "default")),
                   tuple(obj.get("perturbations", ())))


def _derive_fields(premise: str, hypothesis: str) -> tuple[int, str, int, int]:
    """Best-effort structure for externally supplied records."""
    try:
        p = parse_premise(premise)
        kind, a_txt, b_txt = split_hypothesis(hypothesis)
        folded = {nm.casefold(): i for i, nm in enumerate(p.names)}
        return p.n, kind, folded[a_txt.casefold()], folded[b_txt.casefold()]
    except (ParseError, KeyError):
        return 0, "unknown", -1, -1


def save_records(records: Iterable[BenchmarkRecord], path: str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r.to_obj()) + "\n")
            count += 1
    return count


def load_records(path: str) -> list[BenchmarkRecord]:
    out = []
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f):
            if line.strip():
                out.append(BenchmarkRecord.from_obj(json.loads(line), i))
    return out


@lru_cache(maxsize=None)
def mecs_for(n: int) -> tuple[Mec, ...]:
    return tuple(cluster_mecs(enumerate_dags(n)))


def _pairs(kind: str, n: int) -> list[tuple[int, int]]:
    if kind in _UNORDERED:
        return [(a, b) for a in range(n) for b in range(a + 1, n)]
    return [(a, b) for a in range(n) for b in range(n) if a != b]


def _canonical_class(mec: Mec) -> tuple:
    """Signature minimized over variable relabelings."""
    skeleton, vstructs = mec.signature
    best = None
    for perm in itertools.permutations(range(mec.n)):
        skel = tuple(sorted((min(perm[a], perm[b]), max(perm[a], perm[b]))
                            for a, b in skeleton))
        vs = tuple(sorted((min(perm[x], perm[y]), perm[z], max(perm[x], perm[y]))
                          for x, z, y in vstructs))
        key = (skel, vs)
        if best is None or key < best:
            best = key
    return best


def _resolve_scheme(scheme: str, n: int) -> NameScheme:
    if scheme == "default":
        return default_scheme(n)
    if scheme == "refactored":
        return refactored_scheme(n)
    raise ValueError(f"unknown name scheme {scheme!r}")


def generate_dataset(ns: Iterable[int], kinds: Sequence[str] = KINDS,
                     seed: int = 0, subsample: int | None = None,
                     scheme: str = "default",
                     collapse_isomorphic: bool = False,
                     allow_large: bool = False,
                     progress: Progress | None = None,
                     ) -> list[BenchmarkRecord]:
    """One record per (MEC, kind, variable pair), subsampled per n if asked.

    Regeneration with the same arguments is byte-identical; the seed only
    picks the subsample.
    """
    for kind in kinds:
        if kind not in KINDS:
            raise ValueError(f"unknown hypothesis kind {kind!r}")
    records: list[BenchmarkRecord] = []
    for n in sorted(set(ns)):
        if not 2 <= n <= 6:
            raise ValueError(f"n={n} outside 2..6")
        if (n == 6 or (n == 5 and subsample is None)) and not allow_large:
            raise ValueError(
                f"full generation at n={n} is large; pass allow_large "
                f"(or subsample for n=5)")
        mecs = mecs_for(n)
        if progress:
            progress(f"n={n}: {len(mecs)} equivalence classes")
        keep = list(range(len(mecs)))
        if collapse_isomorphic:
            seen: set[tuple] = set()
            keep = []
            for mi, mec in enumerate(mecs):
                key = _canonical_class(mec)
                if key not in seen:
                    seen.add(key)
                    keep.append(mi)
            if progress:
                progress(f"n={n}: {len(keep)} classes after collapsing "
                         f"relabelings")
        plan = [(mi, kind, a, b) for mi in keep for kind in kinds
                for a, b in _pairs(kind, n)]
        if subsample is not None and subsample < len(plan):
            picked = random.Random(seed).sample(range(len(plan)), subsample)
            plan = [plan[i] for i in sorted(picked)]
        names = _resolve_scheme(scheme, n)
        for count, (mi, kind, a, b) in enumerate(plan, 1):
            mec = mecs[mi]
            h = Hypothesis(kind, a, b)
            records.append(BenchmarkRecord(
                id=f"n{n}-mec{mi}-{kind}-{h.a}-{h.b}",
                n=n, mec=mi, kind=kind, a=h.a, b=h.b,
                premise=verbalize_premise(mec.ci_set, n, names),
                hypothesis=verbalize_hypothesis(h, names),
                label=label(mec, h), names=scheme))
            if progress and count % 2000 == 0:
                progress(f"n={n}: {count}/{len(plan)} records")
    return records


def recompute_label(record: BenchmarkRecord) -> int:
    """Gold label recomputed from the stored class id."""
    h = Hypothesis(record.kind, record.a, record.b)
    return label(mecs_for(record.n)[record.mec], h)


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.tp + other.tp, self.fp + other.fp,
                      self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0

    def to_obj(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
                "f1": self.f1, "accuracy": self.accuracy}


@dataclass
class Metrics:
    overall: Counts
    by_kind: dict[str, Counts] = field(default_factory=dict)
    by_n: dict[int, Counts] = field(default_factory=dict)

    def to_obj(self) -> dict:
        return {"overall": self.overall.to_obj(),
                "by_kind": {k: c.to_obj() for k, c in self.by_kind.items()},
                "by_n": {str(n): c.to_obj() for n, c in self.by_n.items()}}


def _count_one(gold: int, pred: int) -> Counts:
    if gold == 1:
        return Counts(tp=1) if pred == 1 else Counts(fn=1)
    return Counts(fp=1) if pred == 1 else Counts(tn=1)


def compute_metrics(golds: Sequence[int], preds: Sequence[int],
                    kinds: Sequence[str] | None = None,
                    ns: Sequence[int] | None = None) -> Metrics:
    if len(golds) != len(preds):
        raise ValueError("golds and preds differ in length")
    for v in itertools.chain(golds, preds):
        if v not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {v!r}")
    metrics = Metrics(Counts())
    for i, (g, p) in enumerate(zip(golds, preds)):
        c = _count_one(g, p)
        metrics.overall += c
        if kinds is not None:
            metrics.by_kind[kinds[i]] = metrics.by_kind.get(kinds[i],
                                                            Counts()) + c
        if ns is not None:
            metrics.by_n[ns[i]] = metrics.by_n.get(ns[i], Counts()) + c
    return metrics


def evaluate(records: Sequence[BenchmarkRecord], strategy: str, backend,
             concurrency: int = 1, trace_path: str | None = None,
             progress: Progress | None = None,
             ) -> tuple[Metrics, list[ChainTrace]]:
    """Run every record through the strategy; failures score as abstentions
    (majority-class prediction), never abort the run."""
    if strategy not in chain.STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")

    def run_one(rec: BenchmarkRecord) -> ChainTrace:
        obj = {"id": rec.id, "premise": rec.premise,
               "hypothesis": rec.hypothesis, "label": rec.label}
        try:
            if strategy == chain.PC_SUBQ:
                return chain.run_chain(obj, backend)
            return chain.run_baseline(obj, strategy, backend)
        except BackendError as e:
            return ChainTrace(id=rec.id, strategy=strategy, predicted=0,
                              gold=rec.label, abstained=True, error=str(e))

    if concurrency > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            traces = list(pool.map(run_one, records))
    else:
        traces = []
        for i, rec in enumerate(records, 1):
            traces.append(run_one(rec))
            if progress and i % 500 == 0:
                progress(f"{i}/{len(records)} records evaluated")
    metrics = compute_metrics([r.label for r in records],
                              [t.predicted for t in traces],
                              [r.kind for r in records],
                              [r.n for r in records])
    if trace_path:
        with open(trace_path, "w", encoding="utf-8") as f:
            for t in traces:
                f.write(t.to_json() + "\n")
    return metrics, traces


def perturb_records(records: Iterable[BenchmarkRecord],
                    mode: str) -> list[BenchmarkRecord]:
    """Apply a robustness perturbation; gold labels are untouched."""
    out = []
    for r in records:
        if mode == "refactor":
            if r.names != "default":
                raise ValueError(
                    f"record {r.id} is not in the default name scheme")
            scheme = refactored_scheme(r.n)
            out.append(replace(
                r, premise=refactor_names(r.premise, scheme),
                hypothesis=refactor_names(r.hypothesis, scheme),
                names="refactored",
                perturbations=r.perturbations + ("refactor",)))
        elif mode == "paraphrase":
            shim = {"kind": r.kind, "a": r.a, "b": r.b,
                    "names": _resolve_scheme(r.names, r.n)}
            out.append(replace(
                r, hypothesis=paraphrase(shim)["hypothesis"],
                perturbations=r.perturbations + ("paraphrase",)))
        else:
            raise ValueError(f"unknown perturbation {mode!r}")
    return out


def load_traces(path: str) -> list[ChainTrace]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(ChainTrace.from_json(line))
    return out


def _ws(text: str) -> str:
    return " ".join(text.split())


def _oracle_answer(oracle: SymbolicBackend, prompt: str) -> str:
    text = oracle.complete(CompletionRequest(prompt=prompt,
                                             stop=("Question:",))).text
    return text.rsplit(f"\n{chain.ANSWER_MARKER} ", 1)[-1].strip()


def trace_report(traces: Sequence[ChainTrace] | str, record_id: str,
                 mode: str = "strict") -> dict:
    """Per-step verdicts against the symbolic oracle.

    strict: every step is judged against the oracle's own clean chain.
    propagated: each step is judged against the oracle run on the traced
    prompts, so the answers downstream of a mistake are checked against the
    model's own intermediate inputs and one early error is counted once.
    """
    if mode not in ("strict", "propagated"):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(traces, str):
        traces = load_traces(traces)
    trace = next((t for t in traces if t.id == record_id), None)
    if trace is None:
        raise LookupError(f"no trace with id {record_id!r}")
    oracle = SymbolicBackend()
    expected: dict[int, str] = {}
    if mode == "propagated":
        for step in trace.steps:
            try:
                expected[step.index] = _oracle_answer(oracle, step.prompt)
            except BackendError:
                pass
    else:
        if trace.strategy != chain.PC_SUBQ or not trace.steps:
            raise ValueError("strict mode needs a pc_subq trace")
        specs = chain.load_subq_specs()
        from .backends import live_question
        m = template_regex(specs[1].template).fullmatch(
            live_question(trace.steps[0].prompt))
        if not m:
            raise ValueError("trace does not start with the first "
                             "subquestion prompt")
        ctx = {"premise": m["premise"]}
        step8 = next((s for s in trace.steps if s.index == 8), None)
        if step8 is not None:
            m8 = template_regex(specs[8].template).fullmatch(
                live_question(step8.prompt))
            if m8:
                ctx["hypothesis"] = m8["hypothesis"]
        for i in range(1, 9):
            if any(k not in ctx for k in specs[i].wiring):
                break
            prompt = chain.build_subq_prompt(specs[i], ctx)
            try:
                expected[i] = _oracle_answer(oracle, prompt)
            except BackendError:
                break
            ctx[f"ans{i}"] = expected[i]
    steps = []
    first_mismatch = None
    for step in trace.steps:
        exp = expected.get(step.index)
        if exp is None:
            verdict = "unavailable"
        elif _ws(exp) == _ws(step.answer):
            verdict = "match"
        else:
            verdict = "mismatch"
            if first_mismatch is None:
                first_mismatch = step.index
        steps.append({"subq": step.index, "verdict": verdict,
                      "expected": exp, "got": step.answer})
    return {"id": record_id, "mode": mode, "steps": steps,
            "first_mismatch": first_mismatch}
