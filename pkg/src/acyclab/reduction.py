"""Reduction from bounded-degree 3-colorability to tolerant acyclicity testing.

Each source vertex ``v`` gets selection arcs ``y(v,i) -> x(v,i)`` for colors
``i = 1, 2, 3``. Edge gadgets close a cycle when both endpoints keep the same
color, and pair gadgets close one when a vertex keeps two colors.

Dense vertex layout of the built digraph, blocks in order ``Y | X | A | B | S``:

* ``Y(v, i)``        -> ``3v + (i - 1)``
* ``X(v, i)``        -> ``3n + 3v + (i - 1)``
* ``A(e, i, l)``     -> ``6n + (3e + i - 1) t + (l - 1)``
* ``B(e, i, l)``     -> ``6n + 3mt + (3e + i - 1) t + (l - 1)``
* ``S(v, i, j, l)``  -> ``6n + 6mt + (6v + p(i, j)) r + (l - 1)``

where ``e`` is the rank of the edge in the sorted ``(u < v)`` edge list and
``p(i, j)`` the rank of the ordered pair among ``(1,2) (1,3) (2,1) (2,3) (3,1) (3,2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .core import Digraph, topological_order

COLORS = (1, 2, 3)
PAIRS = tuple((i, j) for i in COLORS for j in COLORS if i != j)
PAIR_INDEX = {p: k for k, p in enumerate(PAIRS)}


@dataclass
class SourceGraph:
    """Undirected bounded-degree graph, each edge stored once as ``(u, v)`` with ``u < v``."""

    n: int
    edges: list[tuple[int, int]]
    Delta: int

    def __post_init__(self):
        canon = set()
        for u, v in self.edges:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"bad edge {{{u}, {v}}}")
            canon.add((min(u, v), max(u, v)))
        if len(canon) != len(self.edges):
            raise ValueError("duplicate edge")
        self.edges = sorted(canon)
        self._nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            self._nbrs[u].append(v)
            self._nbrs[v].append(u)
        worst = max((len(x) for x in self._nbrs), default=0)
        if worst > self.Delta:
            raise ValueError(f"degree {worst} exceeds the bound Delta = {self.Delta}")
        self.edge_rank = {e: k for k, e in enumerate(self.edges)}

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def f(self, v: int, i: int) -> int | None:
        """Oracle view: the ``i``-th neighbour of ``v`` (1-based), or ``None``."""
        if not 1 <= i <= self.Delta:
            raise ValueError(f"neighbour index {i} outside [1, {self.Delta}]")
        row = self._nbrs[v]
        return row[i - 1] if i <= len(row) else None

    @classmethod
    def read(cls, path: str | Path, Delta: int | None = None) -> "SourceGraph":
        rows = [ln.split() for ln in Path(path).read_text().splitlines()
                if ln.strip() and not ln.lstrip().startswith("#")]
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = [(int(u), int(v)) for u, v in rows[1:]]
        if len(edges) != m:
            raise ValueError(f"header declares {m} edges, found {len(edges)}")
        if Delta is None:
            deg = [0] * n
            for u, v in edges:
                deg[u] += 1
                deg[v] += 1
            Delta = max(deg, default=0)
        return cls(n, edges, Delta)

    def write(self, path: str | Path) -> None:
        Path(path).write_text("".join([f"{self.n} {self.m}\n"] + [f"{u} {v}\n" for u, v in self.edges]))


class CountingOracle:
    """Wraps ``f_H`` and counts the queries made through it."""

    def __init__(self, f: Callable[[int, int], int | None], n: int, Delta: int):
        self.f, self.n, self.Delta = f, n, Delta
        self.count = 0

    def __call__(self, v: int, i: int) -> int | None:
        self.count += 1
        return self.f(v, i)


@dataclass(frozen=True)
class GadgetId:
    """Structured name of a vertex of the built digraph.

    ``key`` is the source vertex for Y, X and S, and the edge ``(u, v)`` with
    ``u < v`` for A and B. ``j`` is used by S only, ``l`` by A, B and S.
    """

    kind: str
    key: int | tuple[int, int]
    i: int
    j: int = 0
    l: int = 0

    def __str__(self) -> str:
        key = f"{self.key[0]}-{self.key[1]}" if isinstance(self.key, tuple) else str(self.key)
        tail = {"Y": "", "X": "", "A": f" {self.l}", "B": f" {self.l}", "S": f" {self.j} {self.l}"}[self.kind]
        return f"{self.kind} {key} {self.i}{tail}"


def Y(v: int, i: int) -> GadgetId:
    return GadgetId("Y", v, i)


def X(v: int, i: int) -> GadgetId:
    return GadgetId("X", v, i)


def A(e: tuple[int, int], i: int, l: int) -> GadgetId:
    return GadgetId("A", e, i, 0, l)


def B(e: tuple[int, int], i: int, l: int) -> GadgetId:
    return GadgetId("B", e, i, 0, l)


def S(v: int, i: int, j: int, l: int) -> GadgetId:
    return GadgetId("S", v, i, j, l)


@dataclass(frozen=True)
class ReductionParams:
    Delta: int
    delta: Fraction
    t: int
    r: int
    d: int
    eps1: Fraction
    eps2: Fraction

    def __post_init__(self):
        assert self.delta / 2 * (1 + self.r) > self.t * self.Delta
        assert self.d == self.t * self.Delta + 2 * self.r
        assert self.eps1 == Fraction(1, 3 * self.d * (1 + self.r))
        assert self.eps2 == (2 + self.delta / 2) / (6 * self.d * (1 + self.r + Fraction(self.t * self.Delta, 2)))
        assert 0 < self.eps1 < self.eps2 < 1

    def as_dict(self) -> dict:
        return {"Delta": self.Delta, "delta": str(self.delta), "t": self.t, "r": self.r, "d": self.d,
                "eps1": str(self.eps1), "eps2": str(self.eps2)}


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def gap_params(Delta: int, delta, t: int, r: int | None = None) -> ReductionParams:
    """Gap constants for the reduction; ``r`` defaults to ``max(2, ceil(2 t Delta / delta))``.

    ``delta`` is taken in exact rationals (floats via their decimal repr).
    """
    delta = _frac(delta)
    if Delta < 1 or t < 1 or not 0 < delta <= 1:
        raise ValueError("need Delta >= 1, t >= 1 and 0 < delta <= 1")
    if r is None:
        r = max(2, math.ceil(2 * t * Delta / delta))
    if r < 2 or not delta / 2 * (1 + r) > t * Delta:
        raise ValueError(f"r = {r} does not satisfy (delta/2)(1+r) > t*Delta")
    d = t * Delta + 2 * r
    eps1 = Fraction(1, 3 * d * (1 + r))
    eps2 = (2 + delta / 2) / (6 * d * (1 + r + Fraction(t * Delta, 2)))
    return ReductionParams(Delta, delta, t, r, d, eps1, eps2)


@dataclass
class Layout:
    """Dense index <-> GadgetId for one source graph and gadget multiplicities."""

    H: SourceGraph
    t: int
    r: int
    offsets: dict[str, int] = field(init=False)

    def __post_init__(self):
        if self.t < 1 or self.r < 2:
            raise ValueError("need t >= 1 and r >= 2")
        n, m, t, r = self.H.n, self.H.m, self.t, self.r
        self.offsets = {"Y": 0, "X": 3 * n, "A": 6 * n, "B": 6 * n + 3 * m * t, "S": 6 * n + 6 * m * t}
        self.size = 6 * n + 6 * m * t + 6 * r * n

    def validate(self, g: GadgetId) -> None:
        n, t, r = self.H.n, self.t, self.r
        ok = g.kind in self.offsets and g.i in COLORS
        if ok and g.kind in "YXS":
            ok = isinstance(g.key, int) and 0 <= g.key < n
        if ok and g.kind in "AB":
            ok = isinstance(g.key, tuple) and g.key in self.H.edge_rank and 1 <= g.l <= t
        if ok and g.kind == "S":
            ok = g.j in COLORS and g.j != g.i and 1 <= g.l <= r
        if not ok:
            raise ValueError(f"invalid gadget id {g}")

    def index(self, g: GadgetId) -> int:
        self.validate(g)
        base = self.offsets[g.kind]
        if g.kind in "YX":
            return base + 3 * g.key + g.i - 1
        if g.kind in "AB":
            return base + (3 * self.H.edge_rank[g.key] + g.i - 1) * self.t + g.l - 1
        return base + (6 * g.key + PAIR_INDEX[(g.i, g.j)]) * self.r + g.l - 1

    def label(self, k: int) -> GadgetId:
        if not 0 <= k < self.size:
            raise ValueError(f"index {k} outside [0, {self.size})")
        for kind in "SBAXY":
            if k >= self.offsets[kind]:
                k -= self.offsets[kind]
                break
        if kind in "YX":
            return GadgetId(kind, k // 3, k % 3 + 1)
        if kind in "AB":
            block, l = divmod(k, self.t)
            e, i = divmod(block, 3)
            return GadgetId(kind, self.H.edges[e], i + 1, 0, l + 1)
        block, l = divmod(k, self.r)
        v, p = divmod(block, 6)
        i, j = PAIRS[p]
        return GadgetId("S", v, i, j, l + 1)


def _x_answer(v: int, i: int, nbrs: Sequence[int], t: int, r: int) -> list[GadgetId]:
    out = [S(v, i, j, l) for j in COLORS if j != i for l in range(1, r + 1)]
    for w in sorted(nbrs):
        for l in range(1, t + 1):
            out.append(A((v, w), i, l) if v < w else B((w, v), i, l))
    return out


def _answer(g: GadgetId, nbrs: Callable[[int], Sequence[int]], t: int, r: int) -> list[GadgetId]:
    if g.kind == "Y":
        return [X(g.key, g.i)]
    if g.kind == "X":
        return _x_answer(g.key, g.i, nbrs(g.key), t, r)
    if g.kind == "A":
        return [Y(g.key[1], g.i)]
    if g.kind == "B":
        return [Y(g.key[0], g.i)]
    return [Y(g.key, g.j)]


def reduce(H: SourceGraph, p) -> tuple[Digraph, Layout]:
    """Build the digraph for ``H``; ``p`` is anything with integer ``t`` and ``r`` (e.g. ReductionParams)."""
    lay = Layout(H, p.t, p.r)
    adj = [[lay.index(w) for w in _answer(lay.label(k), lambda v: H._nbrs[v], lay.t, lay.r)]
           for k in range(lay.size)]
    g = Digraph(lay.size, adj)
    assert g.max_outdegree() <= p.t * H.Delta + 2 * p.r
    return g, lay


@dataclass(frozen=True)
class Shape:
    """Gadget multiplicities without the gap constraints (for small structural checks)."""

    t: int
    r: int


class Simulator:
    """Answers whole-vertex queries of the built digraph through ``f_H``.

    Only X queries touch ``f_H`` (at most Delta calls per source vertex); the
    neighbour list of each source vertex is cached across its three colors.
    """

    def __init__(self, f: Callable[[int, int], int | None], n: int, Delta: int, t: int, r: int):
        self.oracle = CountingOracle(f, n, Delta)
        self.n, self.Delta, self.t, self.r = n, Delta, t, r
        self.cache: dict[int, list[int]] = {}

    def _nbrs(self, v: int) -> list[int]:
        got = self.cache.get(v)
        if got is None:
            got = []
            for k in range(1, self.Delta + 1):
                w = self.oracle(v, k)
                if w is None:
                    break
                got.append(w)
            self.cache[v] = got
        return got

    def _validate(self, g: GadgetId) -> None:
        ok = g.kind in "YXABS" and g.i in COLORS
        if ok and g.kind in "YXS":
            ok = isinstance(g.key, int) and 0 <= g.key < self.n
        if ok and g.kind in "AB":
            ok = (isinstance(g.key, tuple) and len(g.key) == 2
                  and 0 <= g.key[0] < g.key[1] < self.n and 1 <= g.l <= self.t)
        if ok and g.kind == "S":
            ok = g.j in COLORS and g.j != g.i and 1 <= g.l <= self.r
        if not ok:
            raise ValueError(f"invalid gadget id {g}")

    def query(self, g: GadgetId) -> tuple[list[GadgetId], int]:
        """Ordered answer for ``g`` and the number of ``f_H`` calls this query made."""
        self._validate(g)
        before = self.oracle.count
        ans = _answer(g, self._nbrs, self.t, self.r)
        return ans, self.oracle.count - before


def simulate_query(H_oracle, p, g: GadgetId, sim: Simulator | None = None) -> tuple[list[GadgetId], int]:
    """One simulated query. ``H_oracle`` is a SourceGraph or a Simulator to reuse its cache."""
    if sim is None:
        sim = H_oracle if isinstance(H_oracle, Simulator) else Simulator(H_oracle.f, H_oracle.n, H_oracle.Delta, p.t, p.r)
    return sim.query(g)


def _proper(H: SourceGraph, c: Sequence[int] | Mapping[int, int]) -> bool:
    return all(c[u] != c[v] for u, v in H.edges)


def completeness_witness(H: SourceGraph, c: Sequence[int] | Mapping[int, int], p) -> list[tuple[int, int]]:
    """Selection arcs to delete for a proper coloring ``c``; the residual is checked acyclic."""
    if any(c[v] not in COLORS for v in range(H.n)) or not _proper(H, c):
        raise ValueError("c is not a proper 3-coloring")
    g, lay = reduce(H, p)
    F = [(lay.index(Y(v, i)), lay.index(X(v, i))) for v in range(H.n) for i in COLORS if i != c[v]]
    assert len(F) == 2 * H.n
    assert topological_order(g.without(F)) is not None
    return F


def _mono_search(H: SourceGraph, palette: Sequence[int | None], cost_kill: int, cost_mono: int) -> tuple[int, list]:
    """Branch and bound over assignments from ``palette`` (``None`` means killed)."""
    n = H.n
    order = sorted(range(n), key=lambda v: -H.degree(v))
    pos = {v: k for k, v in enumerate(order)}
    earlier = [[w for w in H._nbrs[v] if pos[w] < pos[v]] for v in order]
    best = [math.inf, None]
    c: list[int | None] = [None] * n

    def go(k: int, cost: int, used_max: int):
        if cost >= best[0]:
            return
        if k == n:
            best[0], best[1] = cost, list(c)
            return
        v = order[k]
        for col in palette:
            # colors are interchangeable: never open more than one new color at a time
            if col is not None and col > used_max + 1:
                continue
            add = cost_kill if col is None else cost_mono * sum(1 for w in earlier[k] if c[w] == col)
            c[v] = col
            go(k + 1, cost + add, max(used_max, col or 0))
        c[v] = None

    go(0, 0, 0)
    return int(best[0]), best[1]


def assignment_distance(H: SourceGraph, t: int) -> int:
    """``min over c: V -> {1,2,3,kill}`` of ``2n + #killed + t * #(same-colour edges between live vertices)``."""
    if H.n > 12:
        raise ValueError("assignment_distance supports n <= 12")
    extra, _ = _mono_search(H, (1, 2, 3, None), 1, t)
    return 2 * H.n + extra


def optimal_assignment(H: SourceGraph, t: int) -> list[int | None]:
    if H.n > 12:
        raise ValueError("optimal_assignment supports n <= 12")
    return _mono_search(H, (1, 2, 3, None), 1, t)[1]


def three_color_audit(H: SourceGraph) -> tuple[bool, int]:
    """Exact minimum number of monochromatic edges over all 3-colorings."""
    if H.n > 15:
        raise ValueError("three_color_audit supports n <= 15")
    mono, _ = _mono_search(H, COLORS, 0, 1)
    return mono == 0, mono


def all_small_graphs(max_n: int, max_m: int) -> list[SourceGraph]:
    """Every labelled simple graph with ``1 <= n <= max_n`` vertices and at most ``max_m`` edges."""
    out = []
    for n in range(1, max_n + 1):
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        for bits in product((0, 1), repeat=len(pairs)):
            edges = [e for e, b in zip(pairs, bits) if b]
            if len(edges) <= max_m:
                out.append(SourceGraph(n, edges, max(1, n - 1)))
    return out


def assignment_witness(H: SourceGraph, assignment: Sequence[int | None], p) -> list[tuple[int, int]]:
    """Deletion set realising an assignment's cost, checked acyclic.

    Killed vertices lose all three selection arcs, live ones the two they do not
    keep; each same-colour edge between live vertices loses, per copy, the
    gadget arc into its higher-ID endpoint.
    """
    g, lay = reduce(H, p)
    F = []
    for v in range(H.n):
        F.extend((lay.index(Y(v, i)), lay.index(X(v, i))) for i in COLORS if i != assignment[v])
    for u, v in H.edges:
        col = assignment[u]
        if col is not None and col == assignment[v]:
            F.extend((lay.index(A((u, v), col, l)), lay.index(Y(v, col))) for l in range(1, p.t + 1))
    assert topological_order(g.without(F)) is not None
    return F


def parse_gadget(text: str) -> GadgetId:
    """Inverse of ``str(GadgetId)``: ``Y v i``, ``X v i``, ``A u-v i l``, ``B u-v i l``, ``S v i j l``."""
    parts = text.split()
    kind = parts[0] if parts else ""
    try:
        if kind in ("Y", "X") and len(parts) == 3:
            return GadgetId(kind, int(parts[1]), int(parts[2]))
        if kind in ("A", "B") and len(parts) == 4:
            u, v = (int(x) for x in parts[1].split("-"))
            return GadgetId(kind, (u, v), int(parts[2]), 0, int(parts[3]))
        if kind == "S" and len(parts) == 5:
            return GadgetId("S", int(parts[1]), int(parts[2]), int(parts[3]), int(parts[4]))
    except ValueError:
        pass
    raise ValueError(f"cannot parse gadget label {text!r}")
