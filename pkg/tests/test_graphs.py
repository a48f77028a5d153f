import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causechain.graphs import (
    Dag,
    Pdag,
    ci,
    cluster_mecs,
    d_separated,
    dag,
    dags_with_signature,
    descendants,
    enumerate_dags,
    implied_ci_set,
    mec_signature,
    robinson_dag_count,
    unordered_pairs,
)
from oracles import DAG_COUNTS, MEC_COUNTS, dsep_moral


def test_dag_validation():
    with pytest.raises(ValueError):
        Dag(2, ((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        Dag(2, ((0, 0),))
    with pytest.raises(IndexError):
        Dag(2, ((0, 5),))
    with pytest.raises(ValueError):
        Dag(4, ((0, 1), (1, 2), (2, 0)))


def test_dag_accessors():
    g = dag(4, (0, 2), (1, 2), (2, 3))
    assert g.parents(2) == {0, 1}
    assert g.children(2) == {3}
    assert g.skeleton() == frozenset({(0, 2), (1, 2), (2, 3)})
    assert descendants(g, 0) == {2, 3}


def test_pdag_validation():
    with pytest.raises(ValueError):
        Pdag(2, frozenset({(0, 1)}), frozenset({(0, 1)}))
    with pytest.raises(ValueError):
        Pdag(2, frozenset({(1, 0)}), frozenset())
    g = Pdag(3, frozenset({(0, 1)}), frozenset({(2, 1)}))
    assert g.is_adjacent(1, 0) and g.is_adjacent(1, 2)
    assert not g.is_adjacent(0, 2)
    assert g.adjacent_pairs() == frozenset({(0, 1), (1, 2)})


def test_enumerate_dags_counts_match_published_values():
    for n in range(1, 6):
        assert sum(1 for _ in enumerate_dags(n)) == DAG_COUNTS[n]


def test_robinson_recurrence_matches_published_values():
    for n, count in DAG_COUNTS.items():
        assert robinson_dag_count(n) == count


def test_enumeration_order_is_stable():
    first = list(itertools.islice(enumerate_dags(3), 4))
    assert first[0].edges == frozenset()
    assert len(first[1].edges) == 1
    again = list(itertools.islice(enumerate_dags(3), 4))
    assert [g.edges for g in first] == [g.edges for g in again]


def _all_queries(n):
    for x, y in unordered_pairs(n):
        rest = [v for v in range(n) if v not in (x, y)]
        for r in range(len(rest) + 1):
            for z in itertools.combinations(rest, r):
                yield x, y, z


def test_d_separation_agrees_with_moral_oracle_up_to_n3():
    for n in (2, 3):
        for g in enumerate_dags(n):
            for x, y, z in _all_queries(n):
                assert d_separated(g, x, y, z) == dsep_moral(g, x, y, z)


def test_d_separation_disjointness_checks():
    g = dag(3, (0, 1))
    with pytest.raises(ValueError):
        d_separated(g, 1, 1, ())
    with pytest.raises(ValueError):
        d_separated(g, 0, 1, (1,))
    with pytest.raises(IndexError):
        d_separated(g, 0, 5, ())


def test_d_separation_random_queries_n5():
    rng = random.Random(11)
    pairs = [(a, b) for a in range(5) for b in range(5) if a != b]
    for _ in range(300):
        edges = [(a, b) if a < b else (b, a)
                 for a, b in rng.sample(pairs, rng.randint(0, 7))]
        try:
            g = Dag(5, tuple(set(edges)))
        except ValueError:
            continue
        x, y = rng.sample(range(5), 2)
        z = tuple(v for v in range(5)
                  if v not in (x, y) and rng.random() < 0.4)
        assert d_separated(g, x, y, z) == dsep_moral(g, x, y, z)


def test_collider_ci_set():
    g = dag(3, (0, 2), (1, 2))
    assert implied_ci_set(g) == frozenset({ci(0, 1)})


def test_chain_and_fork_share_ci_set():
    chain_g = dag(3, (0, 1), (1, 2))
    fork = dag(3, (1, 0), (1, 2))
    expected = frozenset({ci(0, 2, 1)})
    assert implied_ci_set(chain_g) == implied_ci_set(fork) == expected


def test_signature_collider_vs_chain():
    collider = dag(3, (0, 2), (1, 2))
    chain_g = dag(3, (0, 1), (1, 2))
    skel, vs = mec_signature(collider)
    assert vs == frozenset({(0, 2, 1)})
    assert mec_signature(chain_g)[1] == frozenset()


def test_mec_counts_match_published_values():
    for n in (2, 3, 4):
        assert len(cluster_mecs(enumerate_dags(n))) == MEC_COUNTS[n]


def test_signature_clustering_equals_ci_clustering_n3():
    # same skeleton + v-structures iff same implied CI set
    by_sig = {}
    by_ci = {}
    for g in enumerate_dags(3):
        by_sig.setdefault(mec_signature(g), set()).add(g.edges)
        by_ci.setdefault(implied_ci_set(g), set()).add(g.edges)
    assert set(map(frozenset, by_sig.values())) == \
        set(map(frozenset, by_ci.values()))


def test_mec_members_partition_the_dags():
    mecs = cluster_mecs(enumerate_dags(3))
    seen = [g.edges for m in mecs for g in m.members]
    assert len(seen) == DAG_COUNTS[3]
    assert len(set(seen)) == DAG_COUNTS[3]


def test_cluster_order_deterministic():
    a = cluster_mecs(enumerate_dags(3))
    b = cluster_mecs(enumerate_dags(3))
    assert [m.signature for m in a] == [m.signature for m in b]


def test_dags_with_signature_recovers_members():
    for mec in cluster_mecs(enumerate_dags(4)):
        skeleton, vstructs = mec.signature
        found = dags_with_signature(4, skeleton, vstructs)
        assert {g.edges for g in found} == {g.edges for g in mec.members}


def test_mec_ci_set_shared_by_members():
    for mec in cluster_mecs(enumerate_dags(3)):
        for g in mec.members:
            assert implied_ci_set(g) == mec.ci_set


@given(st.integers(2, 4), st.data())
@settings(max_examples=60, deadline=None)
def test_dsep_symmetric_in_x_y(n, data):
    mask = data.draw(st.integers(0, (1 << (n * (n - 1))) - 1))
    g = next(itertools.islice(enumerate_dags(n), mask % DAG_COUNTS[n], None))
    x, y = data.draw(st.permutations(range(n)))[:2]
    rest = [v for v in range(n) if v not in (x, y)]
    z = tuple(v for v in rest if data.draw(st.booleans()))
    assert d_separated(g, x, y, z) == d_separated(g, y, x, z)
