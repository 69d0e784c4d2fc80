"""Exact minimum feedback arc sets (distance to acyclicity) for small digraphs."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .core import Digraph, backward_edges

DP_LIMIT = 20
BRUTE_LIMIT = 22


@dataclass
class FeedbackResult:
    size: int
    witness: list[tuple[int, int]]
    method: str  # "subset_dp" | "edge_bruteforce"
    ordering: list[int] | None = None
    kernel_n: int | None = None

    def __post_init__(self):
        assert self.size == len(self.witness)


def _check(g: Digraph, res: FeedbackResult) -> FeedbackResult:
    assert g.without(res.witness).is_acyclic(), "feedback witness leaves a cycle"
    return res


def _dp_order(n: int, arcs: list[tuple[int, int]]) -> tuple[int, list[int]]:
    """Minimum backward-arc count over all orderings, and an optimal ordering.

    ``best[S]`` is the cheapest way to lay out the vertex set ``S`` as a prefix;
    appending ``v`` after ``S`` costs the arcs from ``v`` into ``S`` plus its self-loops.
    """
    if n == 0:
        return 0, []
    mult = np.zeros((n, n), dtype=np.int64)
    for u, v in arcs:
        mult[u, v] += 1
    dtype = np.int16 if len(arcs) < 2 ** 15 else np.int32
    into = []
    for v in range(n):
        # into[v][S] = number of arcs v -> S, built by doubling over vertex bits
        arr = np.zeros(1, dtype=dtype)
        for w in range(n):
            arr = np.concatenate([arr, arr + dtype(mult[v, w])])
        into.append(arr)
    loops = np.diag(mult)
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    pop = np.zeros(size, dtype=np.int8)
    for w in range(n):
        pop += ((idx >> w) & 1).astype(np.int8)
    best = np.full(size, np.iinfo(np.int32).max, dtype=np.int32)
    choice = np.full(size, -1, dtype=np.int8)
    best[0] = 0
    for k in range(1, n + 1):
        layer = idx[pop == k]
        cur = np.full(layer.size, np.iinfo(np.int32).max, dtype=np.int32)
        pick = np.full(layer.size, -1, dtype=np.int8)
        for v in range(n):
            has = (layer >> v) & 1 == 1
            prev = layer[has] ^ (1 << v)
            cand = best[prev] + into[v][prev].astype(np.int32) + int(loops[v])
            sub = cur[has]
            better = cand < sub
            sub[better] = cand[better]
            cur[has] = sub
            psub = pick[has]
            psub[better] = v
            pick[has] = psub
        best[layer] = cur
        choice[layer] = pick
    order = []
    S = size - 1
    while S:
        v = int(choice[S])
        order.append(v)
        S ^= 1 << v
    order.reverse()
    return int(best[size - 1]), order


def min_feedback_edges_dp(g: Digraph) -> FeedbackResult:
    """Exact minimum feedback arc set by subset DP over vertex orderings (n <= 20)."""
    if g.n > DP_LIMIT:
        raise ValueError(f"subset DP supports n <= {DP_LIMIT}, got n = {g.n}")
    size, order = _dp_order(g.n, g.arcs())
    witness = backward_edges(g, order)
    assert len(witness) == size
    return _check(g, FeedbackResult(size, witness, "subset_dp", order, g.n))


def _acyclic_mask(n: int, arcs: list[tuple[int, int]], removed: set[int]) -> bool:
    succ = [0] * n
    for i, (u, v) in enumerate(arcs):
        if i not in removed:
            if u == v:
                return False
            succ[u] |= 1 << v
    alive = (1 << n) - 1
    while alive:
        # peel every live vertex with no live successor
        sinks = 0
        for u in range(n):
            if alive >> u & 1 and not succ[u] & alive:
                sinks |= 1 << u
        if not sinks:
            return False
        alive &= ~sinks
    return True


def min_feedback_edges_bruteforce(g: Digraph) -> FeedbackResult:
    """Exact minimum by trying arc subsets in increasing size (m <= 22)."""
    arcs = g.arcs()
    if len(arcs) > BRUTE_LIMIT:
        raise ValueError(f"edge brute force supports m <= {BRUTE_LIMIT}, got m = {len(arcs)}")
    # self-loops must always go; enumerate subsets of the remaining arcs
    loops = [i for i, (u, v) in enumerate(arcs) if u == v]
    other = [i for i, (u, v) in enumerate(arcs) if u != v]
    for k in range(len(other) + 1):
        for drop in combinations(other, k):
            removed = set(drop).union(loops)
            if _acyclic_mask(g.n, arcs, removed):
                return _check(g, FeedbackResult(len(removed), [arcs[i] for i in sorted(removed)], "edge_bruteforce"))
    raise AssertionError("removing every arc must leave an acyclic graph")


def _kernel(g: Digraph) -> tuple[int, list[tuple[int, int]], list[tuple[int, int]]]:
    """Strip sources and sinks, then splice out vertices with one in-arc and one out-arc.

    Returns the kernel size, its arcs, and for each kernel arc one original arc
    whose deletion has the same effect. Splicing ``p -> w -> s`` into ``p -> s``
    preserves the minimum: an optimal solution never deletes both arcs of the path.
    """
    arcs: list[tuple[int, int]] = g.arcs()
    rep: list[tuple[int, int]] = list(arcs)
    alive = set(range(g.n))
    changed = True
    while changed:
        changed = False
        indeg, outdeg = Counter(), Counter()
        for u, v in arcs:
            outdeg[u] += 1
            indeg[v] += 1
        dead = {v for v in alive if not indeg[v] or not outdeg[v]}
        if dead:
            keep = [i for i, (u, v) in enumerate(arcs) if u not in dead and v not in dead]
            arcs, rep = [arcs[i] for i in keep], [rep[i] for i in keep]
            alive -= dead
            changed = True
            continue
        for w in sorted(alive):
            if indeg[w] == 1 and outdeg[w] == 1:
                i_in = next(i for i, (u, v) in enumerate(arcs) if v == w)
                i_out = next(i for i, (u, v) in enumerate(arcs) if u == w)
                if i_in == i_out:  # lone self-loop
                    continue
                p, s = arcs[i_in][0], arcs[i_out][1]
                keep = [i for i in range(len(arcs)) if i not in (i_in, i_out)]
                arcs = [arcs[i] for i in keep] + [(p, s)]
                rep = [rep[i] for i in keep] + [rep[i_in]]
                alive.discard(w)
                changed = True
                break
    names = {v: i for i, v in enumerate(sorted(alive))}
    return len(names), [(names[u], names[v]) for u, v in arcs], rep


def min_feedback_edges(g: Digraph) -> FeedbackResult:
    """Exact minimum for larger sparse inputs: shrink to a kernel, then solve it exactly."""
    k, arcs, rep = _kernel(g)
    kg = Digraph.from_arcs(k, arcs)
    if k <= DP_LIMIT:
        size, order = _dp_order(k, arcs)
        back = backward_edges(kg, order)
        method = "subset_dp"
    elif len(arcs) <= BRUTE_LIMIT:
        sub = min_feedback_edges_bruteforce(kg)
        size, back, method = sub.size, sub.witness, sub.method
    else:
        raise ValueError(f"kernel too large for exact solvers: n = {k}, m = {len(arcs)}")
    # map kernel arcs back to original arcs, one occurrence per backward kernel arc
    pool: dict[tuple[int, int], list[int]] = {}
    for i, a in enumerate(arcs):
        pool.setdefault(a, []).append(i)
    witness = [rep[pool[a].pop()] for a in back]
    assert len(witness) == size
    return _check(g, FeedbackResult(size, witness, method, None, k))


def dist_dag(g: Digraph) -> int:
    return min_feedback_edges(g).size


def eps_far(g: Digraph, eps: Fraction | float | int, d: int) -> bool:
    """True iff at least ``eps * d * n`` arc deletions are needed to make ``g`` acyclic."""
    return Fraction(dist_dag(g)) >= Fraction(eps) * d * g.n
