"""Slow, independent reference implementations used to cross-check the package."""

import itertools
import math
from collections import deque
from fractions import Fraction


def adjacency(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def bfs_connected(n, edges):
    adj = adjacency(n, edges)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == n


def cut_phi(n, edges, inside):
    """Degree-normalised crossing weight over |S||S^C|/N, straight from the definition."""
    adj = adjacency(n, edges)
    inside = set(inside)
    cross = sum(Fraction(1, len(adj[p])) for p in inside for q in adj[p] if q not in inside)
    return cross / Fraction(len(inside) * (n - len(inside)), n)


def brute_conductance(n, edges):
    """(min phi, min |S^C| phi) over every proper nonempty S."""
    best_phi = best_up = None
    for k in range(1, n):
        for inside in itertools.combinations(range(n), k):
            phi = cut_phi(n, edges, inside)
            up = (n - k) * phi
            best_phi = phi if best_phi is None else min(best_phi, phi)
            best_up = up if best_up is None else min(best_up, up)
    return best_phi, best_up


def complete_spread_mean(n, bandwidth):
    """E[time for one block to reach all of K_n] under push gossip at rate B per peer."""
    return sum((n - 1) / (bandwidth * j * (n - j)) for j in range(1, n))


def lower_bound(phi, n, bandwidth=1.0):
    return bandwidth * phi / (2 * math.log(n))


def replay_oracle(n, arrivals, epochs, policy="tree"):
    """Event-by-event replay of push gossip with deterministic epochs.

    arrivals: [(t, peer)]; epochs: [(peer, t, target)].
    Returns (log, clearing time or inf).  Log entries mirror the engine's
    arrival and transfer records.
    """
    events = [(t, 0, p, None) for t, p in arrivals] + [(t, 1, p, q) for p, t, q in epochs]
    events.sort(key=lambda e: (e[0], e[1], e[2]))
    refs = {0: ()}
    depth = {0: 0}
    views = [{0} for _ in range(n)]
    log = []
    count = len(arrivals)
    for t, kind, p, q in events:
        if kind == 0:
            b = len(refs)
            view = views[p]
            if policy == "tree":
                d = max(depth[c] for c in view)
                r = (min(c for c in view if depth[c] == d),)
            else:
                referenced = {x for c in view for x in refs[c]}
                r = tuple(sorted(view - referenced))
            refs[b] = r
            depth[b] = 1 + max(depth[c] for c in r)
            view.add(b)
            log.append(("arrival", t, b, p, r))
        else:
            missing = views[p] - views[q]
            if missing:
                b = min(missing)
                views[q].add(b)
                log.append(("transfer", t, p, q, b))
        if len(refs) == count + 1 and all(len(v) == count + 1 for v in views):
            return log, t
    return log, math.inf


def t_quantile_975(df):
    table = {1: 12.706204736, 2: 4.30265273, 3: 3.182446305, 9: 2.262157163, 29: 2.045229642}
    return table[df]
