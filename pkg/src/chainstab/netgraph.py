"""Peer-to-peer topologies, cut/graph conductance and stability bounds.

Conductance follows the degree-normalised cut ratio

    phi(S) = sum_{p in S, q in S^C} 1_{pq} / d(p)  /  (|S| |S^C| / N)

with parallel links counted with multiplicity and self-loops never crossing
a cut.  Exact values are returned as :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

EXACT_CUT_LIMIT = 20

FAMILIES = (
    "complete",
    "star",
    "torus",
    "btree",
    "erdos_renyi",
    "random_regular",
    "pref_attach",
    "geometric",
)


class TopologyError(ValueError):
    """Invalid topology parameter; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True, eq=False)
class PeerGraph:
    """Undirected multigraph on peers ``0..n-1``.

    ``edges`` is an ``(E, 2)`` integer array, one row per link with the
    smaller endpoint first; parallel links appear as repeated rows and a
    self-loop as a row ``(p, p)``.
    """

    n: int
    edges: np.ndarray
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise TopologyError("n", f"need at least 2 peers, got {self.n}")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= self.n):
            raise TopologyError("edges", "endpoint outside 0..n-1")
        e = np.sort(e, axis=1)
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
        object.__setattr__(self, "edges", e)
        if (self.degree == 0).any():
            p = int(np.flatnonzero(self.degree == 0)[0])
            raise TopologyError("edges", f"peer {p} has no links")

    def __eq__(self, other):
        if not isinstance(other, PeerGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    __hash__ = None

    @property
    def link_count(self) -> int:
        return len(self.edges)

    @cached_property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)

    @cached_property
    def is_simple(self) -> bool:
        e = self.edges
        if (e[:, 0] == e[:, 1]).any():
            return False
        if len(e) < 2:
            return True
        dup = (e[1:] == e[:-1]).all(axis=1)
        return not dup.any()

    @cached_property
    def is_complete(self) -> bool:
        return self.is_simple and self.link_count == self.n * (self.n - 1) // 2

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint lists: neighbours of ``p`` are ``indices[indptr[p]:indptr[p+1]]``.

        A self-loop lists ``p`` twice in its own row, so row length equals degree.
        """
        u, v = self.edges[:, 0], self.edges[:, 1]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        indices = dst[order]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        return indptr, indices

    def neighbors(self, p: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[p]:indptr[p + 1]]

    def neighbor_lists(self) -> list[list[int]]:
        indptr, indices = self.csr
        flat = indices.tolist()
        ptr = indptr.tolist()
        return [flat[ptr[p]:ptr[p + 1]] for p in range(self.n)]

    def has_link(self, p: int, q: int) -> bool:
        if self.is_complete:
            return p != q
        return bool((self.neighbors(p) == q).any())

    @cached_property
    def connected(self) -> bool:
        if self.is_complete:
            return True
        u, v = self.edges[:, 0], self.edges[:, 1]
        adj = coo_matrix((np.ones(len(u)), (u, v)), shape=(self.n, self.n))
        ncomp, _ = connected_components(adj, directed=False)
        return ncomp == 1

    def describe(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "n": self.n,
                "links": self.link_count}


@dataclass(frozen=True)
class Cut:
    """Nonempty proper subset ``members`` of the peers ``0..n-1``."""

    members: frozenset
    n: int

    def __post_init__(self):
        members = frozenset(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        if not members or len(members) >= self.n:
            raise ValueError(f"cut must be a nonempty proper subset, got |S|={len(members)} of {self.n}")
        if min(members) < 0 or max(members) >= self.n:
            raise ValueError("cut member outside 0..n-1")

    @classmethod
    def complement_of(cls, outside: Iterable[int], n: int) -> "Cut":
        out = set(outside)
        return cls(frozenset(range(n)) - out, n)

    @property
    def complement(self) -> frozenset:
        return frozenset(range(self.n)) - self.members

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[list(self.members)] = True
        return m


@dataclass(frozen=True)
class StabilityBounds:
    lower: float
    upper: float
    bandwidth: float
    conductance: Fraction
    upper_unit: Fraction
    argmin_cut: Cut | None
    exact: bool

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "bandwidth": self.bandwidth,
            "conductance": float(self.conductance),
            "upper_unit": float(self.upper_unit),
            "argmin_cut": sorted(self.argmin_cut.members) if self.argmin_cut else None,
            "exact": self.exact,
        }


# ---------------------------------------------------------------- generators


def _from_pairs(n, pairs, family, params) -> PeerGraph:
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return PeerGraph(n, arr, family, params)


def _from_nx_largest_component(g: nx.Graph, family, params) -> PeerGraph:
    comps = sorted(nx.connected_components(g), key=lambda c: (-len(c), min(c)))
    nodes = sorted(comps[0])
    if len(nodes) < 2:
        raise TopologyError("n", "largest connected component has fewer than 2 peers")
    relabel = {v: i for i, v in enumerate(nodes)}
    pairs = [(relabel[u], relabel[v]) for u, v in g.subgraph(nodes).edges()]
    params = dict(params, n_actual=len(nodes))
    return _from_pairs(len(nodes), pairs, family, params)


def _check_n(n, minimum=2):
    if not isinstance(n, (int, np.integer)) or n < minimum:
        raise TopologyError("n", f"must be an integer >= {minimum}, got {n!r}")


def complete(n: int) -> PeerGraph:
    _check_n(n)
    u, v = np.triu_indices(n, k=1)
    return PeerGraph(n, np.stack([u, v], axis=1), "complete", {"n": n})


def star(n: int) -> PeerGraph:
    """Hub is peer 0."""
    _check_n(n)
    return _from_pairs(n, [(0, i) for i in range(1, n)], "star", {"n": n})


def _int_root(n: int, d: int) -> int:
    s = max(1, int(round(n ** (1.0 / d))))
    while s ** d > n:
        s -= 1
    while (s + 1) ** d <= n:
        s += 1
    return s


def torus(n: int, dim: int = 1, k: int = 1) -> PeerGraph:
    """Cyclic grid of side ``floor(n**(1/dim))``; links at L1 distance <= k."""
    _check_n(n)
    if dim < 1:
        raise TopologyError("dim", f"must be >= 1, got {dim}")
    if k < 1:
        raise TopologyError("k", f"must be >= 1, got {k}")
    side = _int_root(n, dim)
    if side < 2:
        raise TopologyError("n", f"side floor(n^(1/dim)) = {side} < 2")
    size = side ** dim
    coords = np.array(np.unravel_index(np.arange(size), (side,) * dim)).T
    pairs = []
    chunk = max(1, 4_000_000 // size)
    for start in range(0, size, chunk):
        rows = coords[start:start + chunk]
        diff = np.abs(rows[:, None, :] - coords[None, :, :])
        dist = np.minimum(diff, side - diff).sum(axis=2)
        ii, jj = np.nonzero((dist <= k) & (dist > 0))
        ii = ii + start
        keep = ii < jj
        pairs.append(np.stack([ii[keep], jj[keep]], axis=1))
    params = {"n": n, "dim": dim, "k": k, "side": side, "n_actual": size}
    return PeerGraph(size, np.concatenate(pairs), "torus", params)


def btree(branching: int, depth: int, n: int | None = None) -> PeerGraph:
    """Complete ``branching``-ary tree of the given depth, BFS-numbered.

    Children of ``v`` are ``b*v+1 .. b*v+b``.  With ``n`` the tree is cut to
    its first ``n`` vertices in BFS order.
    """
    if branching < 2:
        raise TopologyError("branching", f"must be >= 2, got {branching}")
    if depth < 1:
        raise TopologyError("depth", f"must be >= 1, got {depth}")
    full = (branching ** (depth + 1) - 1) // (branching - 1)
    size = full if n is None else n
    if n is not None:
        _check_n(n)
        if n > full:
            raise TopologyError("n", f"exceeds full tree size {full}")
    child = np.arange(1, size)
    parent = (child - 1) // branching
    params = {"branching": branching, "depth": depth, "n_actual": size}
    if n is not None:
        params["n"] = n
    return PeerGraph(size, np.stack([parent, child], axis=1), "btree", params)


def erdos_renyi(n: int, p: float, seed: int = 0) -> PeerGraph:
    _check_n(n)
    if not (0 < p <= 1):
        raise TopologyError("p", f"must lie in (0, 1], got {p}")
    g = nx.fast_gnp_random_graph(n, p, seed=seed)
    return _from_nx_largest_component(g, "erdos_renyi", {"n": n, "p": p})


def random_regular(n: int, d: int, seed: int = 0) -> PeerGraph:
    _check_n(n)
    if d < 1 or d >= n:
        raise TopologyError("d", f"need 1 <= d < n, got d={d}, n={n}")
    if (d * n) % 2:
        raise TopologyError("d", f"d*n must be even, got d={d}, n={n}")
    g = nx.random_regular_graph(d, n, seed=seed)
    pairs = list(g.edges())
    return _from_pairs(n, pairs, "random_regular", {"n": n, "d": d})


def pref_attach(n: int, d: int = 2, seed: int = 0) -> PeerGraph:
    """Degree-proportional attachment tree on ``d*n`` vertices shrunk to ``n`` peers.

    Tree vertex 0 starts with a self-loop; vertex ``t`` joins an existing
    vertex chosen with probability proportional to its degree.  Tree
    vertices ``d*i .. d*i+d-1`` merge into peer ``i``; the resulting
    self-loops and parallel links are kept.
    """
    _check_n(n)
    if d < 2:
        raise TopologyError("d", f"must be >= 2, got {d}")
    rng = np.random.default_rng(seed)
    total = d * n
    ends = np.empty(2 * total, dtype=np.int64)
    ends[0] = ends[1] = 0
    used = 2
    pairs = np.empty((total, 2), dtype=np.int64)
    pairs[0] = (0, 0)
    draws = rng.random(total)
    for t in range(1, total):
        target = ends[int(draws[t] * used)]
        pairs[t] = (t, target)
        ends[used] = t
        ends[used + 1] = target
        used += 2
    return PeerGraph(n, pairs // d, "pref_attach", {"n": n, "d": d})


def geometric(n: int, c: float = 1.5, seed: int = 0) -> PeerGraph:
    """Unit-square random geometric graph, radius ``c*sqrt(ln n / n)``."""
    _check_n(n)
    if c <= 0:
        raise TopologyError("c", f"must be positive, got {c}")
    radius = c * math.sqrt(math.log(n) / n)
    g = nx.random_geometric_graph(n, radius, seed=seed)
    return _from_nx_largest_component(g, "geometric", {"n": n, "c": c, "radius": radius})


_GENERATORS = {
    "complete": (complete, False),
    "star": (star, False),
    "torus": (torus, False),
    "btree": (btree, False),
    "erdos_renyi": (erdos_renyi, True),
    "random_regular": (random_regular, True),
    "pref_attach": (pref_attach, True),
    "geometric": (geometric, True),
}


def generate(family: str, seed: int = 0, **params) -> PeerGraph:
    """Build a topology by family name; random families are deterministic in ``seed``."""
    if family not in _GENERATORS:
        raise TopologyError("family", f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    fn, random_family = _GENERATORS[family]
    try:
        if random_family:
            return fn(seed=seed, **params)
        return fn(**params)
    except TypeError as exc:
        raise TopologyError("params", str(exc)) from None


# ---------------------------------------------------------------- edge lists


def to_edgelist(graph: PeerGraph) -> str:
    lines = [f"N {graph.n}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges.tolist())
    return "\n".join(lines) + "\n"


def from_edgelist(text: str, family: str = "custom") -> PeerGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or rows[0][0] != "N" or len(rows[0]) != 2:
        raise ValueError("edge list must start with a header line 'N <count>'")
    n = int(rows[0][1])
    pairs = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {' '.join(row)!r}")
        pairs.append((int(row[0]), int(row[1])))
    return _from_pairs(n, pairs, family, {"n": n})


# ---------------------------------------------------------------- conductance


def _crossing_numerator(graph: PeerGraph, mask: np.ndarray) -> Fraction:
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    mu, mv = mask[u], mask[v]
    counts = np.bincount(u[mu & ~mv], minlength=graph.n) + np.bincount(v[mv & ~mu], minlength=graph.n)
    deg = graph.degree
    total = Fraction(0)
    hit = counts > 0
    for d in np.unique(deg[hit]).tolist():
        total += Fraction(int(counts[hit & (deg == d)].sum()), d)
    return total


def cut_conductance(graph: PeerGraph, cut: Cut) -> Fraction:
    if cut.n != graph.n:
        raise ValueError(f"cut is over {cut.n} peers, graph has {graph.n}")
    s = len(cut.members)
    num = _crossing_numerator(graph, cut.mask())
    return num * graph.n / (s * (graph.n - s))


def upper_cut_value(graph: PeerGraph, cut: Cut) -> Fraction:
    """``|S^C| * phi(S)``, the quantity minimised by the upper stability bound."""
    return (graph.n - len(cut.members)) * cut_conductance(graph, cut)


def _mask_to_cut(mask: int, n: int) -> Cut:
    return Cut(frozenset(i for i in range(n) if mask >> i & 1), n)


def _lex_smallest(masks: np.ndarray, n: int) -> int:
    """Mask whose sorted member tuple is lexicographically smallest."""
    prefix = 0
    last = -1
    cands = masks
    while True:
        if (cands == prefix).any():
            return prefix
        rest = cands & ~np.int64(prefix)
        low = rest & -rest
        nxt = low.min()
        cands = cands[low == nxt]
        prefix |= int(nxt)
        last += 1
        if last > n:  # pragma: no cover - defensive
            return int(cands[0])


def _exact_argmin(num: np.ndarray, den: np.ndarray, masks: np.ndarray, n: int):
    ratio = num / den
    best = ratio.min()
    near = np.flatnonzero(ratio <= best * (1 + 1e-9) + 1e-300)
    pairs = np.unique(np.stack([num[near], den[near]], axis=1), axis=0)
    num_min, den_min = min(((int(a), int(b)) for a, b in pairs), key=lambda t: Fraction(*t))
    exact = near[num[near] * den_min == num_min * den[near]]
    return num_min, den_min, _lex_smallest(masks[exact], n)


def _enumerate_numerators(graph: PeerGraph):
    n = graph.n
    if n > EXACT_CUT_LIMIT:
        raise ValueError(
            f"exact cut enumeration is capped at N={EXACT_CUT_LIMIT} (got N={n}); "
            "use mode='heuristic' for larger graphs"
        )
    deg = graph.degree.tolist()
    lcm = math.lcm(*deg)
    masks = np.arange(1, 2 ** n - 1, dtype=np.int64)
    bits = [((masks >> p) & 1).astype(np.int64) for p in range(n)]
    num = np.zeros(len(masks), dtype=np.int64)
    e = graph.edges[graph.edges[:, 0] != graph.edges[:, 1]]
    pairs, mult = np.unique(e, axis=0, return_counts=True)
    for (p, q), m in zip(pairs.tolist(), mult.tolist()):
        num += (m * (lcm // deg[p])) * (bits[p] * (1 - bits[q]))
        num += (m * (lcm // deg[q])) * (bits[q] * (1 - bits[p]))
    size = sum(bits)
    return masks, num, size, lcm


def _exact_infima(graph: PeerGraph):
    n = graph.n
    masks, num, size, lcm = _enumerate_numerators(graph)
    pn, pd, pm = _exact_argmin(num, size * (n - size), masks, n)
    un, ud, um = _exact_argmin(num, size, masks, n)
    return (Fraction(pn * n, lcm * pd), _mask_to_cut(pm, n),
            Fraction(un * n, lcm * ud), _mask_to_cut(um, n))


def graph_conductance_exact(graph: PeerGraph) -> tuple[Fraction, Cut]:
    """Infimum of ``phi(S)`` over all ``2^N - 2`` cuts; ties go to the lexicographically smallest ``S``."""
    phi, cut, _, _ = _exact_infima(graph)
    return phi, cut


def upper_bound_exact(graph: PeerGraph) -> tuple[Fraction, Cut]:
    """Exact ``inf_S |S^C| phi(S)`` with its lexicographically smallest minimiser."""
    _, _, up, cut = _exact_infima(graph)
    return up, cut


# heuristic cut families ------------------------------------------------------


def _bfs_order(graph: PeerGraph, root: int) -> np.ndarray:
    indptr, indices = graph.csr
    seen = np.zeros(graph.n, dtype=bool)
    seen[root] = True
    order = [root]
    queue = deque([root])
    while queue:
        p = queue.popleft()
        for q in indices[indptr[p]:indptr[p + 1]].tolist():
            if not seen[q]:
                seen[q] = True
                order.append(q)
                queue.append(q)
    rest = np.flatnonzero(~seen).tolist()
    return np.array(order + rest, dtype=np.int64)


def _sweep_orders(graph: PeerGraph) -> list[np.ndarray]:
    deg = graph.degree
    idx = np.arange(graph.n)
    orders = [
        np.lexsort((idx, deg)),
        np.lexsort((idx, -deg)),
        idx,
    ]
    if not graph.is_complete:
        orders.append(_bfs_order(graph, int(np.argmin(deg))))
        orders.append(_bfs_order(graph, int(np.argmax(deg))))
    return orders


def _sweep_numerators(graph: PeerGraph, order: np.ndarray) -> np.ndarray:
    """Float numerators for the prefix cuts ``S_k = order[:k]``, k = 1..N-1."""
    n = graph.n
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    e = graph.edges[graph.edges[:, 0] != graph.edges[:, 1]]
    inv = 1.0 / graph.degree
    diff = np.zeros(n + 1)
    for p, q in ((e[:, 0], e[:, 1]), (e[:, 1], e[:, 0])):
        fwd = pos[p] < pos[q]
        np.add.at(diff, pos[p][fwd] + 1, inv[p][fwd])
        np.add.at(diff, pos[q][fwd] + 1, -inv[p][fwd])
    return np.cumsum(diff)[1:n]


def _structural_cuts(graph: PeerGraph) -> list[np.ndarray]:
    n = graph.n
    masks = []
    if graph.family == "btree":
        b = graph.params["branching"]
        frontier = list(range(1, min(n, b + 1)))
        frontier += [c for v in frontier for c in range(b * v + 1, b * v + b + 1) if c < n]
        for v in frontier:
            sub = np.zeros(n, dtype=bool)
            level = [v]
            while level:
                sub[level] = True
                level = [c for x in level for c in range(b * x + 1, b * x + b + 1) if c < n]
            masks.append(~sub)
    return masks


def heuristic_cuts(graph: PeerGraph):
    """Evaluate the heuristic cut family.

    Returns ``(phi_value, phi_cut, upper_value, upper_cut)`` where both values
    are exact for the chosen cuts and are upper estimates of the true infima.
    Family: all singletons and their complements, prefix sweeps over
    degree-sorted, index and BFS orders, and family-specific structural cuts
    (subtrees for trees; index sweeps give torus arcs and slabs).
    """
    n = graph.n
    deg = graph.degree.astype(float)
    e = graph.edges[graph.edges[:, 0] != graph.edges[:, 1]]
    best_phi = (math.inf, None)
    best_up = (math.inf, None)

    def offer(phi, up, make_mask):
        nonlocal best_phi, best_up
        if phi < best_phi[0]:
            best_phi = (phi, make_mask)
        if up < best_up[0]:
            best_up = (up, make_mask)

    # S^C = {v}
    into = np.zeros(n)
    np.add.at(into, e[:, 1], 1.0 / deg[e[:, 0]])
    np.add.at(into, e[:, 0], 1.0 / deg[e[:, 1]])
    v = int(np.argmin(into))
    val = into[v] * n / (n - 1)
    offer(val, val, lambda v=v: ~np.eye(1, n, v, dtype=bool)[0])
    # S = {v}
    loops = np.bincount(graph.edges[graph.edges[:, 0] == graph.edges[:, 1]][:, 0], minlength=n)
    out = (deg - 2 * loops) / deg
    v = int(np.argmin(out))
    offer(out[v] * n / (n - 1), out[v] * n, lambda v=v: np.eye(1, n, v, dtype=bool)[0])

    sizes = np.arange(1, n)
    for order in _sweep_orders(graph):
        num = _sweep_numerators(graph, order)
        phi = num * n / (sizes * (n - sizes))
        up = num * n / sizes
        for arr in (phi, up):
            k = int(np.argmin(arr)) + 1

            def mk(order=order, k=k):
                m = np.zeros(n, dtype=bool)
                m[order[:k]] = True
                return m

            offer(phi[k - 1], up[k - 1], mk)

    for mask in _structural_cuts(graph):
        if 0 < mask.sum() < n:
            cut = Cut(frozenset(np.flatnonzero(mask).tolist()), n)
            phi = float(cut_conductance(graph, cut))
            offer(phi, phi * (n - mask.sum()), lambda mask=mask: mask)

    phi_cut = Cut(frozenset(np.flatnonzero(best_phi[1]()).tolist()), n)
    up_cut = Cut(frozenset(np.flatnonzero(best_up[1]()).tolist()), n)
    return cut_conductance(graph, phi_cut), phi_cut, upper_cut_value(graph, up_cut), up_cut


def stability_bounds(graph: PeerGraph, bandwidth: float = 1.0, mode: str = "auto") -> StabilityBounds:
    """Bracket on the critical block rate: ``B phi/(2 ln N) <= mu <= B inf_S |S^C| phi(S)``.

    ``mode`` is ``exact`` (N <= 20), ``heuristic`` or ``auto`` (exact when
    allowed).  Heuristic bounds are evaluated on a cut subfamily, so both
    numbers are upper estimates and ``exact`` is False.
    """
    if not graph.connected:
        raise ValueError("stability bounds need a connected graph")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if mode == "auto":
        mode = "exact" if graph.n <= EXACT_CUT_LIMIT else "heuristic"
    if mode == "exact":
        phi, _, up, up_cut = _exact_infima(graph)
    elif mode == "heuristic":
        phi, _, up, up_cut = heuristic_cuts(graph)
    else:
        raise ValueError(f"mode must be exact, heuristic or auto, got {mode!r}")
    lower = bandwidth * float(phi) / (2.0 * math.log(graph.n))
    upper = bandwidth * float(up)
    return StabilityBounds(lower, upper, bandwidth, phi, up, up_cut, mode == "exact")


def per_peer_rate_cap(n: int) -> tuple[Fraction, Fraction]:
    """Global cap ``N/(N-1)`` on the critical rate and the per-peer share ``1/(N-1)``."""
    if n < 2:
        raise ValueError(f"need N >= 2, got {n}")
    return Fraction(n, n - 1), Fraction(1, n - 1)


def tree_size(branching: int, depth: int) -> int:
    return (branching ** (depth + 1) - 1) // (branching - 1)


def tree_root_cut(branching: int, depth: int) -> Cut:
    """``S^C`` is the subtree under the root's first child (vertex 1)."""
    n = tree_size(branching, depth)
    sub, level = [], [1]
    while level:
        sub.extend(level)
        level = [c for x in level for c in range(branching * x + 1, branching * x + branching + 1) if c < n]
    return Cut.complement_of(sub, n)


def tree_cut_conductance(branching: int, depth: int) -> Fraction:
    """Closed form of ``phi(S)`` for :func:`tree_root_cut`.

    Only the root-child link crosses, contributing ``1/b``; the subtree holds
    ``(N-1)/b`` peers and ``S`` the remaining ``1 + (b-1)(N-1)/b``.
    """
    if branching < 2:
        raise TopologyError("branching", f"must be >= 2, got {branching}")
    if depth < 1:
        raise TopologyError("depth", f"must be >= 1, got {depth}")
    b = branching
    n = tree_size(b, depth)
    inside = 1 + Fraction((b - 1) * (n - 1), b)
    outside = Fraction(n - 1, b)
    return Fraction(1, b) / (Fraction(1, n) * inside * outside)


def star_upper_bound(n: int) -> Fraction:
    """Leaf-cut value ``N/(N-1)^2`` bounding the critical rate of a star."""
    return Fraction(n, (n - 1) ** 2)
