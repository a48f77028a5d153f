"""Rendering CI sets and hypotheses into the benchmark's textual format,
plus the two text perturbations (variable renaming, hypothesis rephrasing)."""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .graphs import CiStatement
from .hypotheses import (
    COMMON_CAUSE,
    DIRECT_CAUSE,
    KINDS,
    MEDIATION,
    TOGETHER_CAUSE,
    Hypothesis,
)


@dataclass(frozen=True)
class NameScheme:
    """Display strings indexed by variable id."""
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be distinct")

    def __getitem__(self, i: int) -> str:
        return self.names[i]

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)


def default_scheme(n: int) -> NameScheme:
    return NameScheme(tuple(string.ascii_uppercase[:n]))


def refactored_scheme(n: int) -> NameScheme:
    return NameScheme(tuple(chr(ord("Z") - i) for i in range(n)))


def scheme_from_file(path: str) -> NameScheme:
    with open(path, encoding="utf-8") as f:
        names = [line.strip() for line in f if line.strip()]
    return NameScheme(tuple(names))


@dataclass(frozen=True)
class PhraseBook:
    """Active sentence templates, one per hypothesis kind plus the premise
    statement forms."""
    hypothesis: Mapping[str, str]
    correlation: str = "{a} correlates with {b}."
    marginal: str = "{a} is independent of {b}."
    conditional: str = "{a} and {b} are independent given {given}."

    def __post_init__(self) -> None:
        missing = [k for k in KINDS if k not in self.hypothesis]
        if missing:
            raise ValueError(f"no template for kinds {missing}")


DEFAULT_PHRASES = PhraseBook(hypothesis={
    DIRECT_CAUSE: "{a} directly affects {b}.",
    TOGETHER_CAUSE: "{a} and {b} together cause some other variable(s).",
    COMMON_CAUSE: "Some variable(s) cause both {a} and {b}.",
    MEDIATION: "{a} influences {b} through some mediator(s).",
})

PARAPHRASE_PHRASES = PhraseBook(hypothesis={
    DIRECT_CAUSE: "{a} directly causes {b}.",
    TOGETHER_CAUSE: "There exists at least one collider (i.e., common effect) "
                    "of {a} and {b}.",
    COMMON_CAUSE: "There exists at least one confounder (i.e., common cause) "
                  "of {a} and {b}.",
    MEDIATION: "There exists at least one mediator (i.e., intermediate "
               "variable) between {a} and {b}.",
})


def phrases_from_file(path: str) -> PhraseBook:
    """Template file: one `kind: template` line per hypothesis kind, with
    {A}/{B} (or {a}/{b}) placeholders."""
    table = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            kind, _, template = line.partition(":")
            template = template.strip().replace("{A}", "{a}").replace("{B}", "{b}")
            table[kind.strip()] = template
    return PhraseBook(hypothesis=table)


def name_list(names: Sequence[str]) -> str:
    if len(names) == 1:
        return names[0]
    return ", ".join(names[:-1]) + f" and {names[-1]}"


def verbalize_premise(statements: Iterable[CiStatement], n: int,
                      names: NameScheme | Sequence[str],
                      phrases: PhraseBook = DEFAULT_PHRASES) -> str:
    """Header sentence, then a correlation sentence per marginally dependent
    pair, then (after "However, ") the independence sentences ordered by pair
    and conditioning set."""
    stmts = list(statements)
    if len(set(stmts)) != len(stmts):
        raise ValueError("duplicate independence statements")
    for s in stmts:
        if s.y >= n:
            raise IndexError(f"statement {s} out of range for n={n}")
    marginally_independent = {(s.x, s.y) for s in stmts if not s.z}
    parts = [f"Suppose there is a closed system of {n} variables, "
             f"{name_list([names[i] for i in range(n)])}. All the statistical "
             f"relations among these {n} variables are as follows: "]
    sentences = []
    for x in range(n):
        for y in range(x + 1, n):
            if (x, y) not in marginally_independent:
                sentences.append(phrases.correlation.format(a=names[x],
                                                            b=names[y]))
    for i, s in enumerate(sorted(stmts, key=lambda s: (s.x, s.y, s.z))):
        if s.z:
            text = phrases.conditional.format(
                a=names[s.x], b=names[s.y],
                given=name_list([names[v] for v in s.z])
                if len(s.z) > 1 else names[s.z[0]])
        else:
            text = phrases.marginal.format(a=names[s.x], b=names[s.y])
        if i == 0 and sentences:
            text = "However, " + text
        sentences.append(text)
    return parts[0] + " ".join(sentences)


def verbalize_hypothesis(h: Hypothesis, names: NameScheme | Sequence[str],
                         phrases: PhraseBook = DEFAULT_PHRASES) -> str:
    return phrases.hypothesis[h.kind].format(a=names[h.a], b=names[h.b])


def rename_text(text: str, mapping: Mapping[str, str]) -> str:
    """Replace whole-word variable names in one pass."""
    if len(set(mapping.values())) != len(mapping):
        raise ValueError("renaming must be one-to-one")
    alternation = "|".join(
        re.escape(k) for k in sorted(mapping, key=len, reverse=True))
    return re.sub(rf"\b(?:{alternation})\b",
                  lambda m: mapping[m.group(0)], text)


def refactor_names(text: str, scheme: NameScheme | Sequence[str],
                   source: Sequence[str] | None = None) -> str:
    """Rewrite variable tokens per scheme; source defaults to A,B,C,..."""
    if source is None:
        source = default_scheme(len(scheme)).names
    return rename_text(text, dict(zip(source, scheme)))


def paraphrase(record: dict, phrases: PhraseBook = PARAPHRASE_PHRASES) -> dict:
    """Re-render the record's hypothesis with the alternative templates;
    premise and label stay untouched."""
    kind = record["kind"]
    if kind not in phrases.hypothesis:
        raise ValueError(f"no paraphrase entry for kind {kind!r}")
    if all(phrases.hypothesis.get(k) == t
           for k, t in DEFAULT_PHRASES.hypothesis.items()):
        raise ValueError("paraphrase book is identical to the default")
    names = record["names"]
    h = Hypothesis(kind, record["a"], record["b"])
    out = dict(record)
    out["hypothesis"] = verbalize_hypothesis(h, names, phrases)
    return out
