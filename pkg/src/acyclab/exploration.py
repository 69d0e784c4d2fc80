"""Transcript analysis: seen sets, surprises, epochs, the non-surprise blue forest,
the closure process and its brute-force certifier, and cycle witnesses.
"""
from __future__ import annotations

import heapq
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .core import BLUE, Params, RandomStream, _icbrt, format_label, parse_label
from .instances import ANOMALIES, CoupledRun, coupled_query

STRATEGIES = ("bfs_frontier", "uniform_fresh", "restart_walk")
LABEL_MODES = ("epoch", "immediate", "none")


@dataclass
class Transcript:
    """Ordered record of queried vertices and their answers.

    ``labels`` holds the hidden labels of every vertex the run touched, for
    analysis; ``reveal_times`` records when each label was disclosed to the
    exploring algorithm (query index after which it became known).
    """

    queries: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)
    labels: dict[int, int] | None = None
    n: int | None = None
    d: int | None = None
    seed: int | None = None
    params: dict | None = None
    meta: dict = field(default_factory=dict)
    reveal_times: dict[int, int] = field(default_factory=dict)
    truncated: bool = False

    def __post_init__(self):
        queried = [v for v, _ in self.queries]
        if len(set(queried)) != len(queried):
            raise ValueError("a vertex was queried twice")
        if self.d is not None and any(len(a) > self.d for _, a in self.queries):
            raise ValueError("answer longer than the degree bound")

    def __len__(self) -> int:
        return len(self.queries)

    def append(self, v: int, answer: Sequence[int]) -> None:
        self.queries.append((v, tuple(answer)))

    def is_blue(self, v: int) -> bool:
        return self.labels is None or self.labels[v] == BLUE

    def to_json(self) -> dict:
        out = {
            "queries": [{"v": v, "answer": list(a)} for v, a in self.queries],
            "labels": None if self.labels is None else {str(v): format_label(c) for v, c in sorted(self.labels.items())},
            "seed": self.seed,
            "params": self.params,
            "n": self.n,
            "d": self.d,
            "truncated": self.truncated,
            "reveal_times": {str(v): q for v, q in sorted(self.reveal_times.items())},
        }
        out.update(self.meta)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Transcript":
        known = {"queries", "labels", "seed", "params", "n", "d", "truncated", "reveal_times"}
        labels = data.get("labels")
        return cls(
            queries=[(int(e["v"]), tuple(int(w) for w in e["answer"])) for e in data["queries"]],
            labels=None if labels is None else {int(v): parse_label(c) for v, c in labels.items()},
            n=data.get("n"),
            d=data.get("d"),
            seed=data.get("seed"),
            params=data.get("params"),
            truncated=bool(data.get("truncated", False)),
            reveal_times={int(v): int(q) for v, q in data.get("reveal_times", {}).items()},
            meta={k: v for k, v in data.items() if k not in known},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        return cls.from_json(json.loads(Path(path).read_text()))


# ----------------------------------------------------------------------------
# strategies

class Strategy:
    """Adaptive explorer that never repeats a query."""

    name = "base"

    def __init__(self, n: int, rng: random.Random, use_labels: bool = False):
        self.n = n
        self.rng = rng
        self.use_labels = use_labels
        self.queried: set[int] = set()
        self.known: dict[int, int] = {}

    def reveal(self, labels: dict[int, int]) -> None:
        if self.use_labels:
            self.known.update(labels)

    def observe(self, v: int, answer: Sequence[int]) -> None:
        self.queried.add(v)

    def uniform_unqueried(self) -> int | None:
        if len(self.queried) >= self.n:
            return None
        if len(self.queried) <= self.n // 2:
            while (v := self.rng.randrange(self.n)) in self.queried:
                pass
            return v
        rest = [v for v in range(self.n) if v not in self.queried]
        return rest[self.rng.randrange(len(rest))]

    def next(self) -> int | None:
        raise NotImplementedError


class UniformFresh(Strategy):
    name = "uniform_fresh"

    def next(self) -> int | None:
        return self.uniform_unqueried()


class BfsFrontier(Strategy):
    """FIFO over discovered vertices (new ones enqueued in VertexId order).

    With labels available, known-blue vertices jump the queue and vertices known
    to be sinks (second-half red) are postponed.
    """

    name = "bfs_frontier"

    def __init__(self, n: int, rng: random.Random, use_labels: bool = False, half: int | None = None):
        super().__init__(n, rng, use_labels)
        self.half = half
        self.queue: deque[int] = deque()
        self.enqueued: set[int] = set()

    def observe(self, v: int, answer: Sequence[int]) -> None:
        super().observe(v, answer)
        for w in sorted(set(answer)):
            if w not in self.queried and w not in self.enqueued:
                self.enqueued.add(w)
                self.queue.append(w)

    def _sink(self, v: int) -> bool:
        code = self.known.get(v)
        return code is not None and self.half is not None and code > self.half

    def next(self) -> int | None:
        if self.use_labels and self.known:
            live = [w for w in self.queue if w not in self.queried]
            blue = [w for w in live if self.known.get(w) == BLUE]
            if blue:
                self.queue.remove(blue[0])
                return blue[0]
            for w in live:
                if not self._sink(w):
                    self.queue.remove(w)
                    return w
        while self.queue:
            w = self.queue.popleft()
            if w not in self.queried:
                return w
        return self.uniform_unqueried()


class RestartWalk(Strategy):
    """Random walk along revealed arcs; restarts at a uniform unqueried vertex at sinks."""

    name = "restart_walk"

    def __init__(self, n: int, rng: random.Random, use_labels: bool = False):
        super().__init__(n, rng, use_labels)
        self.last: tuple[int, ...] = ()

    def observe(self, v: int, answer: Sequence[int]) -> None:
        super().observe(v, answer)
        self.last = tuple(answer)

    def next(self) -> int | None:
        options = sorted({w for w in self.last if w not in self.queried})
        if options:
            return options[self.rng.randrange(len(options))]
        return self.uniform_unqueried()


def make_strategy(name: str, n: int, rng: random.Random, use_labels: bool = False, params: Params | None = None) -> Strategy:
    if name == "bfs_frontier":
        return BfsFrontier(n, rng, use_labels, half=params.half if params else None)
    if name == "uniform_fresh":
        return UniformFresh(n, rng, use_labels)
    if name == "restart_walk":
        return RestartWalk(n, rng, use_labels)
    raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGIES}")


class EpochTracker:
    """Online epoch boundaries: an epoch closes at a surprise or after ``T`` queries."""

    def __init__(self, T: int):
        self.T = T
        self.seen: set[int] = set()
        self.length = 0
        self.appeared: list[int] = []

    def step(self, v: int, answer: Sequence[int]) -> tuple[bool, bool]:
        """Record one query; returns ``(was_surprise, epoch_closed)``."""
        surprise = any(w in self.seen for w in answer)
        for w in (v, *answer):
            if w not in self.seen:
                self.seen.add(w)
                self.appeared.append(w)
        self.length += 1
        closed = surprise or self.length == self.T
        return surprise, closed

    def close(self) -> list[int]:
        out, self.appeared, self.length = self.appeared, [], 0
        return out


class Explorer:
    """One exploring run: strategy, transcript under construction and label disclosure."""

    def __init__(self, oracle, strategy: str | Strategy, stream: RandomStream | None = None,
                 label_mode: str = "epoch", T: int | None = None):
        if label_mode not in LABEL_MODES:
            raise ValueError(f"label_mode must be one of {LABEL_MODES}")
        self.oracle = oracle
        self.label_mode = label_mode
        params: Params | None = getattr(oracle, "params", None)
        if isinstance(strategy, str):
            rng = (stream or RandomStream(0)).python()
            strategy = make_strategy(strategy, oracle.n, rng, use_labels=label_mode != "none", params=params)
        self.strategy = strategy
        if T is None:
            T = params.T if params else max(1, _icbrt(oracle.n // 3))
        self.tracker = EpochTracker(T)
        self.transcript = Transcript(n=oracle.n, d=params.d if params else None,
                                     seed=stream.seed if stream else None,
                                     params=params.as_dict() if params else None,
                                     meta={"strategy": strategy.name, "label_mode": label_mode})

    def propose(self) -> int | None:
        v = self.strategy.next()
        if v is None:
            self.transcript.truncated = True
        return v

    def record(self, v: int, answer: Sequence[int]) -> None:
        tr = self.transcript
        tr.append(v, answer)
        self.strategy.observe(v, answer)
        _, closed = self.tracker.step(v, answer)
        if self.label_mode == "immediate" or (self.label_mode == "epoch" and closed):
            fresh = self.tracker.close()
            revealed = {w: self.oracle.label(w) for w in fresh}
            if None not in revealed.values():
                self.strategy.reveal(revealed)
                for w in fresh:
                    tr.reveal_times.setdefault(w, len(tr))
        elif closed:
            self.tracker.close()

    def step(self) -> bool:
        v = self.propose()
        if v is None:
            return False
        self.record(v, self.oracle.query(v))
        return True

    def finish(self) -> Transcript:
        labels = {w: self.oracle.label(w) for w in seen_set(self.transcript)}
        self.transcript.labels = None if None in labels.values() else labels
        return self.transcript


def run_strategy(oracle, strategy: str | Strategy, Q: int, stream: RandomStream | None = None,
                 label_mode: str = "epoch", T: int | None = None) -> Transcript:
    """Drive ``Q`` distinct queries against ``oracle`` and return the transcript.

    ``label_mode`` controls what the strategy learns about hidden labels:
    ``epoch`` discloses the labels of every vertex that appeared in an epoch when
    it closes, ``immediate`` after every query, ``none`` never.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    run = Explorer(oracle, strategy, stream, label_mode, T)
    for _ in range(Q):
        if not run.step():
            break
    return run.finish()


@dataclass
class CoupledTranscripts:
    perm: Transcript
    dag: Transcript
    run: CoupledRun
    first_surprise: int | None
    first_anomaly: int | None
    diverged_at: int | None

    @property
    def identical(self) -> bool:
        return self.perm.queries == self.dag.queries

    def prefix_ok(self) -> bool:
        """Transcripts agree on every query before the first surprise or anomaly."""
        stops = [q for q in (self.first_surprise, self.first_anomaly) if q is not None]
        clean = min(stops) - 1 if stops else len(self.perm)
        return self.perm.queries[:clean] == self.dag.queries[:clean]


def run_coupled(params: Params, strategy: str, Q: int, stream: RandomStream,
                label_mode: str = "epoch") -> CoupledTranscripts:
    """Explore a coupled perm/dag pair with two identically seeded copies of a strategy.

    While the transcripts agree, both copies see the same history and so propose
    the same vertex, which is answered jointly; afterwards each side runs alone.
    """
    run = CoupledRun(params, stream.child(0))
    sides = [Explorer(run.perm, strategy, stream.child(1), label_mode),
             Explorer(run.dag, strategy, stream.child(1), label_mode)]
    first_surprise = first_anomaly = diverged = None
    for q in range(1, Q + 1):
        if run.identical:
            v = sides[0].propose()
            if v is None:
                break
            assert sides[1].propose() == v, "strategy copies desynchronised"
            a_p, a_d, flags = coupled_query(run, v)
            if first_surprise is None and flags & {"surprise_perm", "surprise_dag"}:
                first_surprise = q
            if first_anomaly is None and flags & set(ANOMALIES):
                first_anomaly = q
            if diverged is None and "diverged" in flags:
                diverged = q
            sides[0].record(v, a_p)
            sides[1].record(v, a_d)
        else:
            alive = [side.step() for side in sides]
            if not any(alive):
                break
    return CoupledTranscripts(sides[0].finish(), sides[1].finish(), run, first_surprise, first_anomaly, diverged)


# ----------------------------------------------------------------------------
# analysis

def seen_set(t: Transcript, q: int | None = None) -> set[int]:
    seen: set[int] = set()
    for v, ans in t.queries[: len(t) if q is None else q]:
        seen.add(v)
        seen.update(ans)
    return seen


@dataclass
class KnowledgeGraph:
    vertices: set[int]
    arcs: list[tuple[int, int]]
    first_seen: dict[int, int]


def knowledge_graph(t: Transcript, q: int) -> KnowledgeGraph:
    first: dict[int, int] = {}
    arcs = []
    for i, (v, ans) in enumerate(t.queries[:q], start=1):
        first.setdefault(v, i)
        for w in ans:
            first.setdefault(w, i)
            arcs.append((v, w))
    kg = KnowledgeGraph(set(first), arcs, first)
    if t.d is not None:
        assert len(kg.vertices) <= (t.d + 1) * q
    return kg


def surprises(t: Transcript) -> list[int]:
    """1-based indices of queries whose answer hits the seen set before that query."""
    seen: set[int] = set()
    out = []
    for i, (v, ans) in enumerate(t.queries, start=1):
        if any(w in seen for w in ans):
            out.append(i)
        seen.add(v)
        seen.update(ans)
    return out


@dataclass(frozen=True)
class Epoch:
    start: int
    end: int
    kind: str  # "surprise" | "timeout" | "open"

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    @property
    def portion(self) -> tuple[int, int]:
        """Surprise-free part: the whole epoch, minus its closing surprise query."""
        return (self.start, self.end - 1) if self.kind == "surprise" else (self.start, self.end)


@dataclass
class ExplorationStats:
    epochs: list[Epoch]
    surprise_times: list[int]
    max_blue_path: list[int]
    T: int
    h: float
    E: int
    D: float
    h_quantiles: dict[float, float] = field(default_factory=dict)


def split_epochs(t: Transcript, T: int) -> list[Epoch]:
    if T < 1:
        raise ValueError("T must be >= 1")
    hits = set(surprises(t))
    out = []
    start = 1
    for q in range(1, len(t) + 1):
        if q in hits or q - start + 1 == T:
            out.append(Epoch(start, q, "surprise" if q in hits else "timeout"))
            start = q + 1
    if start <= len(t):
        out.append(Epoch(start, len(t), "open"))
    return out


def epochs(t: Transcript, T: int, N: int | None = None) -> ExplorationStats:
    if N is None:
        N = t.params["N"] if t.params else max(1, (t.n or 3) // 3)
    eps = split_epochs(t, T)
    h = 4 * math.log2(N) if N > 1 else 0.0
    return ExplorationStats(
        epochs=eps,
        surprise_times=surprises(t),
        max_blue_path=[longest_all_blue_path(t, e) for e in eps],
        T=T, h=h, E=len(eps), D=(h + 1) * len(eps),
    )


def longest_all_blue_path(t: Transcript, epoch: Epoch | tuple[int, int]) -> int:
    """Longest all-blue path among the fresh-head arcs revealed in a surprise-free portion."""
    start, end = epoch.portion if isinstance(epoch, Epoch) else epoch
    seen = seen_set(t, start - 1)
    depth: dict[int, int] = {}
    best = 0
    for v, ans in t.queries[start - 1: end]:
        seen.add(v)
        blue_v = t.is_blue(v)
        for w in ans:
            if w in seen:
                continue
            seen.add(w)
            if blue_v and t.is_blue(w):
                depth[w] = depth.get(v, 0) + 1
                best = max(best, depth[w])
    return best


@dataclass
class Forest:
    """Non-surprise blue forest: each blue vertex keeps the arc it first appeared by."""

    parent: dict[int, int | None]
    appear: dict[int, int]

    def __contains__(self, v: int) -> bool:
        return v in self.parent


def nonsurprise_forest(t: Transcript, q: int) -> Forest:
    if q > len(t):
        raise ValueError("q exceeds the transcript length")
    seen: set[int] = set()
    parent: dict[int, int | None] = {}
    appear: dict[int, int] = {}
    for i, (v, ans) in enumerate(t.queries[:q], start=1):
        if v not in seen:
            # a vertex that first shows up as the queried vertex is a root
            seen.add(v)
            appear[v] = i
            if t.is_blue(v):
                parent[v] = None
        blue_v = t.is_blue(v)
        for w in ans:
            if w in seen:
                continue
            seen.add(w)
            appear[w] = i
            if t.is_blue(w):
                parent[w] = v if blue_v else None
    return Forest(parent, appear)


def forest_ancestors(f: Forest, v: int) -> set[int]:
    if v not in f.parent:
        raise KeyError(f"vertex {v} is not a blue vertex of the forest")
    out = {v}
    p = f.parent[v]
    while p is not None:
        assert p not in out, "forest parent pointers form a cycle"
        out.add(p)
        p = f.parent[p]
    return out


def _blue_reverse(t: Transcript, q: int) -> tuple[dict[int, list[tuple[int, int]]], dict[int, int]]:
    """Reverse blue adjacency of ``KG_q``: head -> [(query time of tail, tail)]."""
    rev: dict[int, list[tuple[int, int]]] = {}
    qtime: dict[int, int] = {}
    for i, (v, ans) in enumerate(t.queries[:q], start=1):
        qtime[v] = i
        if not t.is_blue(v):
            continue
        for w in ans:
            if t.is_blue(w):
                rev.setdefault(w, []).append((i, v))
    return rev, qtime


@dataclass
class ClosureResult:
    A: frozenset[int]
    H: int
    selected: list[tuple[int, int]]  # (vertex, query time) in selection order


def _check_blue_present(t: Transcript, q: int, u: int) -> None:
    if u not in seen_set(t, q):
        raise ValueError(f"vertex {u} does not appear in KG_{q}")
    if not t.is_blue(u):
        raise ValueError(f"vertex {u} is not blue")


def _closure(u: int, rev, anc_of) -> ClosureResult:
    A = {u}
    heap = list(rev.get(u, ()))
    heapq.heapify(heap)
    selected = []
    biggest = 0
    while heap:
        s, x = heapq.heappop(heap)
        if x in A:
            continue
        block = anc_of(x)
        biggest = max(biggest, len(block))
        selected.append((x, s))
        for a in block - A:
            A.add(a)
            for item in rev.get(a, ()):
                if item[1] not in A:
                    heapq.heappush(heap, item)
    assert len(A) <= 1 + len(selected) * biggest
    return ClosureResult(frozenset(A), len(selected), selected)


def closure(t: Transcript, q: int, u: int) -> ClosureResult:
    """Closure sequence for ``u`` in ``KG_q``.

    Starting from ``{u}``, repeatedly pick the queried blue vertex outside the
    current set that has a blue arc into it and the smallest query time, and add
    its forest-ancestor block, until no such vertex remains.
    """
    _check_blue_present(t, q, u)
    forest = nonsurprise_forest(t, q)
    rev, _ = _blue_reverse(t, q)
    return _closure(u, rev, lambda x: forest_ancestors(forest, x))


def ancestors_bruteforce(t: Transcript, q: int, u: int) -> set[int]:
    _check_blue_present(t, q, u)
    rev, _ = _blue_reverse(t, q)
    return _reverse_reach(rev, u)


def _reverse_reach(rev, u: int) -> set[int]:
    out = {u}
    stack = [u]
    while stack:
        for _, x in rev.get(stack.pop(), ()):
            if x not in out:
                out.add(x)
                stack.append(x)
    return out


class PrefixView:
    """Forest and reverse blue arcs of one prefix, shared by many closure calls."""

    def __init__(self, t: Transcript, q: int):
        self.t, self.q = t, q
        self.forest = nonsurprise_forest(t, q)
        self.rev, self.qtime = _blue_reverse(t, q)
        self.seen = seen_set(t, q)

    def _check(self, u: int) -> None:
        if u not in self.seen:
            raise ValueError(f"vertex {u} does not appear in KG_{self.q}")
        if not self.t.is_blue(u):
            raise ValueError(f"vertex {u} is not blue")

    def closure(self, u: int) -> ClosureResult:
        self._check(u)
        return _closure(u, self.rev, lambda x: forest_ancestors(self.forest, x))

    def ancestors_bruteforce(self, u: int) -> set[int]:
        self._check(u)
        return _reverse_reach(self.rev, u)


class TranscriptIndex:
    """Whole-transcript structures for repeated closure queries at any prefix.

    Forest parents are computed once on the full transcript; frozen parent
    pointers make that equal to the prefix forest for every vertex present by
    the prefix. Reverse arcs are filtered by query time.
    """

    def __init__(self, t: Transcript):
        self.t = t
        self.forest = nonsurprise_forest(t, len(t))
        self.rev, self.qtime = _blue_reverse(t, len(t))
        self._anc: dict[int, frozenset[int]] = {}

    def ancestors_in_forest(self, v: int) -> frozenset[int]:
        got = self._anc.get(v)
        if got is None:
            p = self.forest.parent[v]
            got = frozenset({v}) if p is None else self.ancestors_in_forest(p) | {v}
            self._anc[v] = got
        return got

    def closure(self, q: int, u: int) -> ClosureResult:
        rev = {w: [it for it in items if it[0] <= q] for w, items in self.rev.items()}
        return _closure(u, rev, self.ancestors_in_forest)

    def forest_depth(self, v: int) -> int:
        return len(self.ancestors_in_forest(v)) - 1


class CycleWatch:
    """Incremental directed-cycle detection over a growing knowledge graph.

    A new cycle must pass through the vertex just queried, so each step only
    searches from that vertex's heads back to it.
    """

    def __init__(self):
        self.out: dict[int, tuple[int, ...]] = {}
        self.cycle: list[int] | None = None
        self.found_at: int | None = None
        self.steps = 0

    def add(self, v: int, answer: Sequence[int]) -> list[int] | None:
        self.steps += 1
        self.out[v] = tuple(answer)
        if self.cycle is not None:
            return self.cycle
        if v in answer:
            cyc = [v]
        else:
            cyc = self._path_back(v)
        if cyc is not None:
            self.cycle, self.found_at = cyc, self.steps
        return cyc

    def _path_back(self, v: int) -> list[int] | None:
        prev: dict[int, int] = {}
        stack = []
        for w in self.out[v]:
            if w not in prev:
                prev[w] = v
                stack.append(w)
        while stack:
            x = stack.pop()
            if x == v:
                path = [v]
                y = prev[v]
                while y != v:
                    path.append(y)
                    y = prev[y]
                # path lists v and its predecessors backwards; reverse to arc order
                return [v] + path[1:][::-1]
            for w in self.out.get(x, ()):
                if w not in prev:
                    prev[w] = x
                    stack.append(w)
        return None


def cycle_detected(t: Transcript, q: int | None = None) -> list[int] | None:
    """A directed cycle ``[v0, v1, ..., vk]`` (arcs ``vi -> vi+1`` and ``vk -> v0``) of ``KG_q``, or ``None``."""
    watch = CycleWatch()
    for v, ans in t.queries[: len(t) if q is None else q]:
        if watch.add(v, ans) is not None:
            return watch.cycle
    return None


def is_cycle_in(t: Transcript, cycle: Sequence[int], q: int | None = None) -> bool:
    arcs = {(v, w) for v, ans in t.queries[: len(t) if q is None else q] for w in ans}
    k = len(cycle)
    return k >= 1 and all((cycle[i], cycle[(i + 1) % k]) in arcs for i in range(k))


def h_values(t: Transcript, index: TranscriptIndex | None = None) -> list[tuple[int, int, int, int]]:
    """``(u, q, H_q(u), |Anc_q(u)|)`` for every queried blue ``u`` at its own query time."""
    index = index or TranscriptIndex(t)
    out = []
    for q, (u, _) in enumerate(t.queries, start=1):
        if t.is_blue(u):
            res = index.closure(q, u)
            out.append((u, q, res.H, len(res.A)))
    return out


def quantiles(values: Iterable[float], qs: Sequence[float] = (0.5, 0.9, 0.99, 1.0)) -> dict[float, float]:
    vals = sorted(values)
    if not vals:
        return {q: 0.0 for q in qs}
    return {q: float(vals[min(len(vals) - 1, int(math.ceil(q * len(vals))) - 1 if q > 0 else 0)]) for q in qs}


def canonical_form(t: Transcript, with_labels: bool = True) -> tuple:
    """Transcript with vertices renamed by first appearance (isomorphism-invariant key)."""
    name: dict[int, int] = {}
    out = []
    for v, ans in t.queries:
        row = []
        for w in (v, *ans):
            if w not in name:
                name[w] = len(name)
            row.append(name[w])
        out.append(tuple(row))
    if with_labels and t.labels is not None:
        inv = sorted(name, key=name.get)
        out.append(tuple(t.labels[w] for w in inv))
    return tuple(out)


def transcript_signature(t: Transcript) -> tuple:
    """Coarse per-query summary for goodness-of-fit tests.

    Each query contributes the queried vertex's label, the number of answer slots
    that hit the seen set, the number of repeated slots within the answer, and
    the sorted answer labels.
    """
    seen: set[int] = set()
    out = []
    for v, ans in t.queries:
        hits = sum(1 for w in ans if w in seen)
        repeats = len(ans) - len(set(ans))
        labels = tuple(sorted(t.labels[w] for w in ans)) if t.labels is not None else ()
        out.append((t.labels[v] if t.labels is not None else -1, hits, repeats, labels))
        seen.add(v)
        seen.update(ans)
    return tuple(out)
