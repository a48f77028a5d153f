"""Causal-benchmark construction and PC-guided prompt-chain evaluation.

The pipeline: enumerate DAGs, cluster them into Markov equivalence classes,
label causal hypotheses against every member, verbalize records, then answer
them either with one prompt (baselines) or with the eight-step PC chain over
a pluggable completion backend. The symbolic backend executes each step
exactly, so the chain doubles as its own oracle.
"""

from .backends import (
    BackendConfig,
    BackendError,
    Completion,
    CompletionRequest,
    PermanentBackendError,
    RemoteBackend,
    SymbolicBackend,
    SymbolicDispatchError,
    TransientBackendError,
    make_backend,
)
from .chain import (
    ALWAYS_MAJORITY,
    FEW_SHOT,
    FEW_SHOT_COT,
    PC_SUBQ,
    STRATEGIES,
    ZERO_SHOT,
    ZERO_SHOT_COT,
    ZERO_SHOT_COT_PC,
    ChainTrace,
    SequencingError,
    run_baseline,
    run_chain,
)
from .graphs import (
    CiStatement,
    Dag,
    Mec,
    Pdag,
    ci,
    cluster_mecs,
    d_separated,
    dag,
    dags_with_signature,
    enumerate_dags,
    implied_ci_set,
    mec_signature,
    robinson_dag_count,
)
from .harness import (
    BenchmarkRecord,
    Counts,
    Metrics,
    compute_metrics,
    evaluate,
    generate_dataset,
    load_records,
    load_traces,
    perturb_records,
    save_records,
    trace_report,
)
from .hypotheses import (
    COMMON_CAUSE,
    DIRECT_CAUSE,
    KINDS,
    MEDIATION,
    TOGETHER_CAUSE,
    Hypothesis,
    holds_in_dag,
    hypothesis,
    label,
)
from .parsing import ParseError, parse_premise
from .pc import PipelineError, pdag_members, run_pc
from .verbalize import (
    default_scheme,
    refactor_names,
    refactored_scheme,
    verbalize_hypothesis,
    verbalize_premise,
)

__all__ = [name for name in dir() if not name.startswith("_")]
