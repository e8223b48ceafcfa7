import pytest
from hypothesis import given, settings, strategies as st

from scenarios import fig1_dag
from chainstab.chaindag import (
    THROUGHPUT,
    TREE,
    BlockDag,
    DagError,
    PeerView,
    all_paths_end_at_genesis,
    confirmed_at_consistency,
    distinguished_path,
    has_path,
    is_reference_closed,
    longest_chain_frontier,
    max_in_degree,
    orphans,
    reachable_from,
    select_refs,
    select_refs_throughput,
    select_refs_tree,
)


def chain(k):
    dag = BlockDag()
    for i in range(1, k + 1):
        dag.add(0, float(i), [i - 1])
    return dag


def maximal_paths(dag, start):
    if not dag.refs[start]:
        return [[start]]
    return [[start] + rest for r in dag.refs[start] for rest in maximal_paths(dag, r)]


def longest_start_oracle(dag, known):
    best = max(len(p) for b in known for p in maximal_paths(dag, b))
    return min(b for b in known if any(len(p) == best for p in maximal_paths(dag, b)))


@st.composite
def policy_dags(draw, policy):
    """DAG grown by the given policy from random closed views."""
    dag = BlockDag()
    for _ in range(draw(st.integers(1, 12))):
        n = len(dag)
        view = {0}
        for b in range(1, n):
            if set(dag.refs[b]) <= view and draw(st.booleans()):
                view.add(b)
        dag.add(0, float(n), select_refs(dag, policy, view))
    return dag


# ---------------------------------------------------------------- frontier and refs


def test_frontier_examples():
    assert longest_chain_frontier(BlockDag(), {0}) == {0}
    dag = fig1_dag()
    assert longest_chain_frontier(dag, {0, 1, 2, 3}) == {2, 3}
    assert longest_chain_frontier(chain(2)) == {2}


def test_tree_refs_two_peer_blocks():
    dag = fig1_dag()
    assert select_refs_tree(dag.prefix(3), {0, 1}) == (1,)
    assert select_refs_tree(dag.prefix(4), {0, 1, 2, 3}) == (2,)
    assert select_refs_tree(BlockDag(), {0}) == (0,)


def test_throughput_leaves():
    dag = BlockDag()
    assert select_refs_throughput(dag, {0}) == (0,)
    dag.add(0, 1.0, [0])
    dag.add(1, 1.5, [0])
    assert select_refs_throughput(dag, {0, 1, 2}) == (1, 2)
    dag.add(0, 2.0, [1, 2])
    assert select_refs_throughput(dag) == (3,)


def test_peer_view_requires_closure():
    dag = fig1_dag()
    view = PeerView(1)
    with pytest.raises(DagError):
        view.receive(dag, 2)
    view.receive(dag, 1)
    view.receive(dag, 3)
    assert view.frontier(dag) == {3}


def test_add_validation():
    dag = BlockDag()
    with pytest.raises(DagError):
        dag.add(0, 1.0, [])
    with pytest.raises(DagError):
        dag.add(0, 1.0, [1])
    with pytest.raises(DagError):
        select_refs(dag, "heaviest", {0})


# ---------------------------------------------------------------- paths and confirmation


def test_distinguished_path_examples():
    dag = fig1_dag()
    assert distinguished_path(dag, {0, 1, 2, 3}) == [2, 1, 0]
    assert distinguished_path(dag) == [4, 2, 1, 0]
    assert distinguished_path(chain(2)) == [2, 1, 0]


def test_confirmed_examples():
    dag = fig1_dag()
    assert confirmed_at_consistency(dag) == {0, 1, 2, 4}
    assert orphans(dag) == {3}
    assert confirmed_at_consistency(BlockDag()) == {0}
    assert confirmed_at_consistency(chain(5)) == set(range(6))
    assert confirmed_at_consistency(dag, THROUGHPUT) == set(range(5))


def test_has_path_examples():
    dag = fig1_dag()
    assert has_path(dag, 4, 1)
    assert not has_path(dag, 4, 3)
    assert has_path(dag, 3, 3)
    assert not has_path(dag, 0, 1)
    with pytest.raises(DagError):
        has_path(dag, 9, 0)


def test_in_degree_examples():
    assert max_in_degree(fig1_dag()) == 2
    assert max_in_degree(chain(4)) == 1
    assert max_in_degree(BlockDag()) == 0


def test_text_round_trip():
    dag = fig1_dag()
    again = BlockDag.from_text(dag.to_text())
    assert again.refs == dag.refs and again.time == dag.time and again.miner == dag.miner
    with pytest.raises(DagError):
        BlockDag.from_text("0 - 0.0 -\n2 0 1.0 0\n")
    with pytest.raises(DagError):
        BlockDag.from_text("1 0 1.0 0\n")


@settings(max_examples=60, deadline=None)
@given(dag=policy_dags(TREE))
def test_tree_policy_properties(dag):
    known = set(range(len(dag)))
    path = distinguished_path(dag)
    assert path[0] == longest_start_oracle(dag, known)
    assert path[-1] == 0
    assert all(has_path(dag, a, b) for a, b in zip(path, path[1:]))
    assert all(len(r) == 1 for r in dag.refs[1:])
    assert all_paths_end_at_genesis(dag)
    assert max_in_degree(dag) <= len(dag) - 1


@settings(max_examples=60, deadline=None)
@given(dag=policy_dags(THROUGHPUT))
def test_throughput_policy_properties(dag):
    assert all_paths_end_at_genesis(dag)
    for b in range(len(dag)):
        assert reachable_from(dag, b) == {a for a in range(b + 1) if has_path(dag, b, a)}
    # every prefix is reference-closed
    for n in range(1, len(dag) + 1):
        assert is_reference_closed(dag, range(n))


@settings(max_examples=40, deadline=None)
@given(dag=policy_dags(TREE), data=st.data())
def test_prefix_confirmation_persists(dag, data):
    """A distinguished path of a prefix stays on the path of a chain extension of the full DAG."""
    tip = distinguished_path(dag)[0]
    ext = dag.prefix(len(dag))
    for _ in range(data.draw(st.integers(1, 4))):
        tip = ext.add(0, 99.0, [tip])
    assert set(distinguished_path(dag)) <= set(distinguished_path(ext))
