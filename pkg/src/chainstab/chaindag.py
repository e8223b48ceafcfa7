"""Block DAG, reference-selection policies and path/confirmation queries.

Blocks are indexed by arrival order with genesis at 0.  References always
point to strictly smaller indices, so the DAG is acyclic by construction
and the depth (longest reference path down to genesis) of a block is fixed
when it is created.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

TREE = "tree"
THROUGHPUT = "throughput_optimal"
POLICIES = (TREE, THROUGHPUT)


class DagError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    index: int
    miner: int | None
    arrival_time: float
    out_refs: tuple


@dataclass
class BlockDag:
    miner: list = field(default_factory=lambda: [None])
    time: list = field(default_factory=lambda: [0.0])
    refs: list = field(default_factory=lambda: [()])
    depth: list = field(default_factory=lambda: [0])
    inrefs: list = field(default_factory=lambda: [[]])

    def __len__(self):
        return len(self.refs)

    def block(self, i: int) -> Block:
        self._check(i)
        return Block(i, self.miner[i], self.time[i], self.refs[i])

    def _check(self, i):
        if not 0 <= i < len(self.refs):
            raise DagError(f"block {i} not in DAG of {len(self.refs)} blocks")

    def add(self, miner: int, time: float, refs: Iterable[int]) -> int:
        refs = tuple(sorted(set(refs)))
        i = len(self.refs)
        if not refs:
            raise DagError(f"block {i} must reference at least one block")
        if refs[0] < 0 or refs[-1] >= i:
            raise DagError(f"block {i} references outside 0..{i - 1}: {refs}")
        self.miner.append(miner)
        self.time.append(time)
        self.refs.append(refs)
        self.depth.append(1 + max(self.depth[r] for r in refs))
        self.inrefs.append([])
        for r in refs:
            self.inrefs[r].append(i)
        return i

    def prefix(self, n: int) -> "BlockDag":
        """Independent copy holding blocks ``0..n-1``."""
        if not 1 <= n <= len(self):
            raise DagError(f"prefix length {n} outside 1..{len(self)}")
        return BlockDag(
            self.miner[:n],
            self.time[:n],
            self.refs[:n],
            self.depth[:n],
            [[j for j in ins if j < n] for ins in self.inrefs[:n]],
        )

    def to_text(self) -> str:
        lines = ["0 - 0.0 -"]
        for i in range(1, len(self)):
            refs = ",".join(map(str, self.refs[i]))
            lines.append(f"{i} {self.miner[i]} {self.time[i]!r} {refs}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BlockDag":
        dag = cls()
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or rows[0] != ["0", "-", "0.0", "-"]:
            raise DagError("first line must be the genesis record '0 - 0.0 -'")
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 4:
                raise DagError(f"line {lineno}: expected 'index miner time refs'")
            idx, miner, t, refs = row
            if int(idx) != len(dag):
                raise DagError(f"line {lineno}: expected index {len(dag)}, got {idx}")
            try:
                dag.add(int(miner), float(t), [int(r) for r in refs.split(",")])
            except ValueError as exc:
                raise DagError(f"line {lineno}: {exc}") from None
        return dag


@dataclass
class PeerView:
    """Blocks known to one peer; always contains genesis."""

    peer: int
    known: set = field(default_factory=lambda: {0})

    def frontier(self, dag: BlockDag) -> set:
        return longest_chain_frontier(dag, self.known)

    def receive(self, dag: BlockDag, b: int):
        missing = [r for r in dag.refs[b] if r not in self.known]
        if missing:
            raise DagError(f"peer {self.peer} lacks references {missing} of block {b}")
        self.known.add(b)


def _blocks(dag: BlockDag, known) -> Iterable[int]:
    return range(len(dag)) if known is None else known


def longest_chain_frontier(dag: BlockDag, known=None) -> set:
    """Blocks of ``known`` (default: all) at maximal depth."""
    blocks = list(_blocks(dag, known))
    best = max(dag.depth[b] for b in blocks)
    return {b for b in blocks if dag.depth[b] == best}


def select_refs_tree(dag: BlockDag, known=None) -> tuple:
    return (min(longest_chain_frontier(dag, known)),)


def select_refs_throughput(dag: BlockDag, known=None) -> tuple:
    """Every block of ``known`` that no other block of ``known`` references."""
    blocks = set(_blocks(dag, known))
    referenced = {r for b in blocks for r in dag.refs[b]}
    return tuple(sorted(blocks - referenced))


def select_refs(dag: BlockDag, policy: str, known=None) -> tuple:
    if policy == TREE:
        return select_refs_tree(dag, known)
    if policy == THROUGHPUT:
        return select_refs_throughput(dag, known)
    raise DagError(f"unknown policy {policy!r}")


def is_reference_closed(dag: BlockDag, known) -> bool:
    known = set(known)
    return 0 in known and all(r in known for b in known for r in dag.refs[b])


def distinguished_path(dag: BlockDag, known=None) -> list:
    """Longest maximal path, tip first, ending at 0.

    The start is the least-index block of maximal depth.  When a block has
    several references one level down, the least index is followed.
    """
    blocks = _blocks(dag, known)
    depth = dag.depth
    start = min(blocks, key=lambda b: (-depth[b], b))
    path = [start]
    cur = start
    while cur:
        cur = min(r for r in dag.refs[cur] if depth[r] == depth[cur] - 1)
        path.append(cur)
    return path


def confirmed_at_consistency(dag: BlockDag, policy: str = TREE, known=None) -> set:
    """Blocks determined as eventually confirmed from a snapshot taken at consistency."""
    if policy == THROUGHPUT:
        return set(_blocks(dag, known))
    return set(distinguished_path(dag, known))


def has_path(dag: BlockDag, src: int, dst: int) -> bool:
    dag._check(src)
    dag._check(dst)
    if src == dst:
        return True
    seen = set()
    stack = [src]
    while stack:
        b = stack.pop()
        for r in dag.refs[b]:
            if r == dst:
                return True
            if r > dst and r not in seen:
                seen.add(r)
                stack.append(r)
    return False


def reachable_from(dag: BlockDag, src: int, floor: int = 0) -> set:
    """Blocks with index >= ``floor`` reachable from ``src`` (inclusive)."""
    seen = {src}
    stack = [src]
    while stack:
        for r in dag.refs[stack.pop()]:
            if r >= floor and r not in seen:
                seen.add(r)
                stack.append(r)
    return seen


def max_in_degree(dag: BlockDag, known=None) -> int:
    if known is None:
        return max((len(ins) for ins in dag.inrefs), default=0)
    known = set(known)
    return max((sum(1 for j in dag.inrefs[b] if j in known) for b in known), default=0)


def out_degrees(dag: BlockDag) -> list:
    return [len(r) for r in dag.refs]


def maximal_path_sinks(dag: BlockDag) -> list:
    """For each block, the set of sinks its maximal paths can end at."""
    sinks = []
    for b, refs in enumerate(dag.refs):
        if not refs:
            sinks.append(frozenset([b]))
        else:
            acc = set()
            for r in refs:
                acc |= sinks[r]
            sinks.append(frozenset(acc))
    return sinks


def all_paths_end_at_genesis(dag: BlockDag) -> bool:
    return all(s == {0} for s in maximal_path_sinks(dag))


def orphans(dag: BlockDag, policy: str = TREE, known=None) -> set:
    return set(_blocks(dag, known)) - confirmed_at_consistency(dag, policy, known)
