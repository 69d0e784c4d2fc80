"""Shared graph, parameter and randomness primitives."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

BLUE = 0


def format_label(code: int) -> str:
    """Label code -> text form used in sidecar files (``B`` or ``R<i>``)."""
    return "B" if code == BLUE else f"R{code}"


def parse_label(text: str) -> int:
    text = text.strip()
    if text == "B":
        return BLUE
    if text.startswith("R") and text[1:].isdigit() and int(text[1:]) >= 1:
        return int(text[1:])
    raise ValueError(f"bad partition label {text!r}")


@dataclass(frozen=True)
class Params:
    """Size parameters of the hard-instance distributions.

    ``layer_sizes[i]`` is the size of red layer ``i + 1``; the first ``L // 2``
    layers form the first half ``R_{<=L/2}`` that blue vertices point into.
    """

    n: int
    N: int
    d: int
    d_B: int
    d_R: int
    T: int
    L: int
    layer_sizes: tuple[int, ...]

    def __post_init__(self):
        half = self.L // 2
        assert self.n == 3 * self.N
        assert self.d_B == self.d // 2 and self.d_R == self.d - self.d_B
        assert self.L == 2 * self.T and len(self.layer_sizes) == self.L
        assert sum(self.layer_sizes[:half]) == self.N
        assert sum(self.layer_sizes[half:]) == self.N

    @property
    def half(self) -> int:
        return self.L // 2

    def as_dict(self) -> dict:
        return {
            "n": self.n, "N": self.N, "d": self.d, "d_B": self.d_B, "d_R": self.d_R,
            "T": self.T, "L": self.L, "layer_sizes": list(self.layer_sizes),
        }


def _icbrt(x: int) -> int:
    r = round(x ** (1.0 / 3.0))
    while r ** 3 > x:
        r -= 1
    while (r + 1) ** 3 <= x:
        r += 1
    return r


def derive_params(n: int, d: int) -> Params:
    if n < 3 or n % 3:
        raise ValueError(f"n must be a positive multiple of 3, got {n} (pad with isolated vertices)")
    if d < 2:
        raise ValueError(f"outdegree bound d must be >= 2, got {d}")
    N = n // 3
    T = _icbrt(N)
    a, b = divmod(N, T)
    first = tuple(a + 1 if i < b else a for i in range(T))
    d_B = d // 2
    return Params(n=n, N=N, d=d, d_B=d_B, d_R=d - d_B, T=T, L=2 * T, layer_sizes=first + first)


@dataclass
class Digraph:
    """Directed multigraph with ordered out-adjacency lists.

    Self-loops and parallel arcs are allowed; list order is significant.
    """

    n: int
    adj: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.adj:
            self.adj = [[] for _ in range(self.n)]
        if len(self.adj) != self.n:
            raise ValueError("adjacency length does not match n")
        for u, row in enumerate(self.adj):
            for v in row:
                if not 0 <= v < self.n:
                    raise ValueError(f"arc {u}->{v} leaves the vertex range [0, {self.n})")

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> "Digraph":
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in arcs:
            adj[u].append(v)
        return cls(n, adj)

    @property
    def m(self) -> int:
        return sum(len(row) for row in self.adj)

    def arcs(self) -> list[tuple[int, int]]:
        return [(u, v) for u, row in enumerate(self.adj) for v in row]

    def max_outdegree(self) -> int:
        return max((len(row) for row in self.adj), default=0)

    def check_degree(self, d: int) -> None:
        for u, row in enumerate(self.adj):
            if len(row) > d:
                raise ValueError(f"vertex {u} has outdegree {len(row)} > {d}")

    def induced(self, vertices: Sequence[int]) -> tuple["Digraph", list[int]]:
        """Induced subgraph, relabelled to ``0..k-1`` in the given vertex order."""
        index = {v: i for i, v in enumerate(vertices)}
        adj = [[index[w] for w in self.adj[v] if w in index] for v in vertices]
        return Digraph(len(vertices), adj), list(vertices)

    def without(self, arcs: Iterable[tuple[int, int]]) -> "Digraph":
        """Copy with one occurrence of each listed arc removed."""
        adj = [list(row) for row in self.adj]
        for u, v in arcs:
            adj[u].remove(v)
        return Digraph(self.n, adj)

    def is_acyclic(self) -> bool:
        return topological_order(self) is not None


def topological_order(g: Digraph) -> list[int] | None:
    """Kahn's algorithm; ``None`` iff ``g`` has a directed cycle (self-loops included)."""
    indeg = [0] * g.n
    for row in g.adj:
        for v in row:
            indeg[v] += 1
    queue = deque(v for v in range(g.n) if indeg[v] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in g.adj[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return order if len(order) == g.n else None


def _ranks(n: int, ordering: Sequence[int]) -> list[int]:
    if len(ordering) != n:
        raise ValueError("ordering is not a permutation of the vertices")
    rank = [-1] * n
    for i, v in enumerate(ordering):
        if not 0 <= v < n or rank[v] != -1:
            raise ValueError("ordering is not a permutation of the vertices")
        rank[v] = i
    return rank


def backward_edges(g: Digraph, ordering: Sequence[int]) -> list[tuple[int, int]]:
    # a self-loop never goes forward, so it counts as backward
    rank = _ranks(g.n, ordering)
    return [(u, v) for u, row in enumerate(g.adj) for v in row if rank[v] <= rank[u]]


def backward_edge_count(g: Digraph, ordering: Sequence[int]) -> int:
    rank = _ranks(g.n, ordering)
    return sum(1 for u, row in enumerate(g.adj) for v in row if rank[v] <= rank[u])


@dataclass(frozen=True)
class RandomStream:
    """Seeded random source with path-derived substreams.

    A stream is identified by ``(seed, path)``; ``child(k)`` appends ``k`` to the
    path. Draws come from ``SeedSequence(seed, spawn_key=path)``, so substreams
    with different paths are independent and a stream's draws never depend on how
    many siblings were used.
    """

    seed: int
    path: tuple[int, ...] = ()

    def child(self, *keys: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + tuple(int(k) for k in keys))

    def _seq(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=self.path)

    def numpy(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self._seq()))

    def python(self) -> random.Random:
        """Scalar-friendly generator for hot loops (Mersenne Twister seeded from the path)."""
        state = self._seq().generate_state(4, dtype=np.uint64)
        return random.Random(int.from_bytes(state.tobytes(), "little"))


# ----------------------------------------------------------------------------
# text formats

def write_graph(g: Digraph, path: str | Path) -> None:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.arcs())
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path: str | Path) -> Digraph:
    return parse_graph(Path(path).read_text())


def parse_graph(text: str) -> Digraph:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise ValueError("graph file must start with a 'n m' header")
    n, m = int(rows[0][0]), int(rows[0][1])
    if len(rows) - 1 != m:
        raise ValueError(f"header declares {m} arcs, found {len(rows) - 1}")
    return Digraph.from_arcs(n, ((int(u), int(v)) for u, v in rows[1:]))


def write_labels(labels: dict[int, int] | Sequence[int], path: str | Path, extra: dict[int, str] | None = None) -> None:
    items = labels.items() if isinstance(labels, dict) else enumerate(labels)
    out = {v: format_label(c) for v, c in items}
    out.update(extra or {})
    Path(path).write_text("".join(f"{v} {out[v]}\n" for v in sorted(out)))


def read_labels(path: str | Path) -> dict[int, int]:
    labels = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            v, lab = line.split()
            labels[int(v)] = parse_label(lab)
    return labels
