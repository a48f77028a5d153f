"""Command-line interface."""

from __future__ import annotations

import dataclasses
import json
import sys

import click

from . import chain, harness
from .backends import BackendConfig, make_backend
from .hypotheses import KINDS
from .parsing import ParseError
from .verbalize import (
    default_scheme,
    refactored_scheme,
    scheme_from_file,
    verbalize_premise,
)
from .graphs import ci


def _parse_n_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part]


def _echo_err(message: str) -> None:
    click.echo(message, err=True)


@click.group()
def main() -> None:
    """Causal benchmark generation and prompt-chain evaluation."""


@main.command()
@click.option("--n", "n_text", required=True,
              help="Variable counts: a range like 2..5, a list like 2,3, "
                   "or a single value.")
@click.option("--kinds", default=",".join(KINDS), show_default=True,
              help="Comma-separated hypothesis kinds.")
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False, writable=True))
@click.option("--seed", default=0, show_default=True, type=int,
              help="Seed for subsampling; ignored without --subsample.")
@click.option("--subsample", default=None, type=int,
              help="Keep at most this many records per n, seeded.")
@click.option("--names", "scheme", default="default", show_default=True,
              type=click.Choice(["default", "refactored"]))
@click.option("--collapse-isomorphic", is_flag=True,
              help="Keep one equivalence class per relabeling orbit.")
@click.option("--allow-large", is_flag=True,
              help="Permit full generation at n=5 and any n=6 run.")
def generate(n_text: str, kinds: str, out_path: str, seed: int,
             subsample: int | None, scheme: str,
             collapse_isomorphic: bool, allow_large: bool) -> None:
    """Enumerate MECs and emit labeled records as JSONL."""
    try:
        records = harness.generate_dataset(
            _parse_n_range(n_text), [k for k in kinds.split(",") if k],
            seed=seed, subsample=subsample, scheme=scheme,
            collapse_isomorphic=collapse_isomorphic, allow_large=allow_large,
            progress=_echo_err)
    except ValueError as e:
        raise click.UsageError(str(e))
    count = harness.save_records(records, out_path)
    click.echo(f"wrote {count} records to {out_path}")


@main.command()
@click.option("--ci-file", "ci_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help='JSON file {"n": int, "ci": [[x, y], [x, y, [z, ...]], '
                   "...]} with integer variable ids.")
@click.option("--names", "scheme", default="default", show_default=True,
              help="default, refactored, or a path to a names file "
                   "(one name per line).")
def verbalize(ci_path: str, scheme: str) -> None:
    """Render a conditional-independence set as a premise."""
    with open(ci_path, encoding="utf-8") as f:
        spec = json.load(f)
    try:
        n = int(spec["n"])
        statements = [ci(*entry[:2], *(entry[2] if len(entry) > 2 else ()))
                      for entry in spec["ci"]]
    except (KeyError, TypeError, ValueError) as e:
        raise click.UsageError(f"bad ci file: {e}")
    if scheme == "default":
        names = default_scheme(n)
    elif scheme == "refactored":
        names = refactored_scheme(n)
    else:
        names = scheme_from_file(scheme)
    click.echo(verbalize_premise(statements, n, names))


@main.command()
@click.option("--in", "in_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--refactor", "mode", flag_value="refactor",
              help="Rename variables A,B,C,... to Z,Y,X,...")
@click.option("--paraphrase", "mode", flag_value="paraphrase",
              help="Re-render hypotheses with alternative templates.")
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False, writable=True))
def perturb(in_path: str, mode: str | None, out_path: str) -> None:
    """Apply a robustness perturbation to a record file."""
    if mode is None:
        raise click.UsageError("pass --refactor or --paraphrase")
    try:
        records = harness.perturb_records(harness.load_records(in_path), mode)
    except (ValueError, ParseError) as e:
        raise click.UsageError(str(e))
    count = harness.save_records(records, out_path)
    click.echo(f"wrote {count} records to {out_path}")


def _format_counts(tag: str, c: harness.Counts) -> str:
    return (f"{tag}: f1={c.f1:.4f} accuracy={c.accuracy:.4f} "
            f"tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn}")


@main.command()
@click.option("--in", "in_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--strategy", required=True,
              type=click.Choice(chain.STRATEGIES))
@click.option("--backend", "backend_kind", default="symbolic",
              show_default=True, type=click.Choice(["symbolic", "remote"]))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="TOML backend settings (endpoint, model, retries, ...).")
@click.option("--traces", "traces_path", default=None,
              type=click.Path(dir_okay=False, writable=True),
              help="Write one JSON trace per record to this file.")
@click.option("--report", "report_path", default=None,
              type=click.Path(dir_okay=False, writable=True),
              help="Write overall and partitioned metrics as JSON.")
@click.option("--concurrency", default=None, type=int,
              help="In-flight backend calls; defaults to the config value.")
def evaluate(in_path: str, strategy: str, backend_kind: str,
             config_path: str | None, traces_path: str | None,
             report_path: str | None, concurrency: int | None) -> None:
    """Score a strategy over a record file."""
    try:
        config = (BackendConfig.from_toml(config_path) if config_path
                  else BackendConfig(kind=backend_kind))
        if config.kind != backend_kind:
            config = dataclasses.replace(config, kind=backend_kind)
    except (OSError, ValueError) as e:
        raise click.UsageError(f"bad backend config: {e}")
    backend = make_backend(config)
    records = harness.load_records(in_path)
    metrics, traces = harness.evaluate(
        records, strategy, backend,
        concurrency=concurrency or config.concurrency,
        trace_path=traces_path, progress=_echo_err)
    abstained = sum(1 for t in traces if t.abstained)
    click.echo(_format_counts("overall", metrics.overall))
    for kind in sorted(metrics.by_kind):
        click.echo(_format_counts(f"kind {kind}", metrics.by_kind[kind]))
    for n in sorted(metrics.by_n):
        click.echo(_format_counts(f"n {n}", metrics.by_n[n]))
    if abstained:
        click.echo(f"abstained on {abstained} of {len(records)} records")
    if report_path:
        report = {"strategy": strategy, "backend": config.kind,
                  "records": len(records), "abstained": abstained,
                  "metrics": metrics.to_obj()}
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2)
            f.write("\n")
        click.echo(f"report written to {report_path}")


@main.command()
@click.option("--traces", "traces_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--id", "record_id", required=True)
@click.option("--mode", default="strict", show_default=True,
              type=click.Choice(["strict", "propagated"]))
def trace(traces_path: str, record_id: str, mode: str) -> None:
    """Diff one trace against the symbolic oracle, step by step."""
    try:
        report = harness.trace_report(traces_path, record_id, mode)
    except (LookupError, ValueError) as e:
        raise click.UsageError(str(e))
    for step in report["steps"]:
        line = f"SubQ{step['subq']}: {step['verdict']}"
        if step["subq"] == report["first_mismatch"]:
            line += "  <-- first mismatch"
        click.echo(line)
        if step["verdict"] == "mismatch":
            click.echo(f"  expected: {step['expected']}")
            click.echo(f"  got:      {step['got']}")
    if report["first_mismatch"] is None:
        click.echo("all steps match the oracle")


if __name__ == "__main__":
    sys.exit(main())
