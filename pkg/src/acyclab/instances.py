"""Samplers and lazy whole-vertex oracles for the two hard-instance distributions.

Everything is sampled by deferred decisions: the hidden partition, the blue
permutations (``perm``) and the blue order (``dag``) are only revealed where an
answer needs them, so a run touches ``O(Q * d)`` state regardless of ``n``.

Blue answers are built in two phases. ``plan_blue`` decides, for every blue
slot, whether it reuses an already-labelled vertex or needs a new blue vertex
(a negative placeholder ``-1, -2, ...``); ``commit_blue`` then substitutes
vertices popped from the unlabelled pool. The coupled run uses this split to
let both oracles share the same popped vertices.
"""
from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol

from .core import BLUE, Digraph, Params, RandomStream

RED_RETRY_CAP = 64


class Oracle(Protocol):
    n: int

    def query(self, v: int) -> tuple[int, ...]: ...

    def label(self, v: int) -> int | None: ...


class IndexPool:
    """Subset of ``range(n)`` with O(1) removal and uniform pop (sparse Fisher-Yates)."""

    def __init__(self, n: int):
        self.n = n
        self.size = n
        self._slot: dict[int, int] = {}
        self._pos: dict[int, int] = {}

    def __len__(self) -> int:
        return self.size

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and self._pos.get(v, v) < self.size

    def remove(self, v: int) -> None:
        i = self._pos.get(v, v)
        if i >= self.size:
            raise KeyError(v)
        last = self.size - 1
        w = self._slot.get(last, last)
        self._slot[i] = w
        self._pos[w] = i
        self._pos[v] = self.n
        self.size = last

    def pop_random(self, rng: random.Random) -> int:
        i = rng.randrange(self.size)
        v = self._slot.get(i, i)
        self.remove(v)
        return v


class LazyPartition:
    """Uniform random partition into ``B, R_1..R_L`` with fixed sizes, revealed on demand.

    Label code 0 is blue, code ``i >= 1`` is red layer ``i``. Unlabelled vertices
    are exchangeable, so a uniform member of a class is either a uniform known
    member or a uniform unlabelled vertex that is then given the class label.
    """

    def __init__(self, params: Params, rng: random.Random):
        self.params = params
        self.rng = rng
        self.sizes = [params.N, *params.layer_sizes]
        self.members: list[list[int]] = [[] for _ in self.sizes]
        self.labels: dict[int, int] = {}
        self.pool = IndexPool(params.n)
        half = params.half
        self._half_starts = list(itertools.accumulate([0, *params.layer_sizes[: half - 1]]))

    def label_of(self, v: int) -> int:
        code = self.labels.get(v)
        if code is not None:
            return code
        x = self.rng.randrange(self.pool.size)
        for code, size in enumerate(self.sizes):
            left = size - len(self.members[code])
            if x < left:
                break
            x -= left
        self.pool.remove(v)
        self.labels[v] = code
        self.members[code].append(v)
        return code

    def fresh(self, code: int) -> int:
        v = self.pool.pop_random(self.rng)
        self.labels[v] = code
        self.members[code].append(v)
        return v

    def fresh_many(self, code: int, k: int) -> list[int]:
        return [self.fresh(code) for _ in range(k)]

    def member(self, code: int) -> int:
        x = self.rng.randrange(self.sizes[code])
        known = self.members[code]
        return known[x] if x < len(known) else self.fresh(code)

    def first_half_sample(self, k: int) -> list[int]:
        """``k`` distinct uniform vertices of the first red half (size ``N``)."""
        p = self.params
        k = min(k, p.N)
        out: list[int] = []
        taken: set[int] = set()
        while len(out) < k:
            x = self.rng.randrange(p.N)
            i = bisect.bisect_right(self._half_starts, x) - 1
            y = x - self._half_starts[i]
            known = self.members[i + 1]
            v = known[y] if y < len(known) else self.fresh(i + 1)
            if v not in taken:
                taken.add(v)
                out.append(v)
        return out

    def red_answer(self, layer: int) -> list[int]:
        """Out-list of a red vertex of the given layer."""
        p = self.params
        T = p.half
        if layer > T:
            return []
        window = range(layer + 1, layer + T + 1)
        k = min(p.d, sum(self.sizes[c] for c in window))
        out: list[int] = []
        taken: set[int] = set()
        for _ in range(k):
            for _retry in range(RED_RETRY_CAP):
                v = self.member(layer + 1 + self.rng.randrange(T))
                if v not in taken:
                    break
            else:
                v = self._red_exact(window, taken)
            taken.add(v)
            out.append(v)
        return out

    def _red_exact(self, window: range, taken: set[int]) -> int:
        # exact law of "resample until distinct": vertex weight 1/|R_layer| over untaken vertices
        weights = []
        for c in window:
            used = sum(1 for w in self.members[c] if w in taken)
            weights.append((self.sizes[c] - used) / self.sizes[c])
        c = self.rng.choices(list(window), weights=weights)[0]
        avail = [w for w in self.members[c] if w not in taken]
        free = self.sizes[c] - len(self.members[c])
        x = self.rng.randrange(len(avail) + free)
        return avail[x] if x < len(avail) else self.fresh(c)


def _draw_blue(part: LazyPartition, excluded, n_excluded: int, pending: int, reject_pending: bool) -> int | None:
    """Uniform blue vertex outside ``excluded``; new vertices come back as placeholders.

    Returns a vertex, an existing placeholder ``-i`` (``i <= pending``), or ``None``
    meaning "a new placeholder". Placeholders ``-1..-pending`` count as known blue.
    """
    rng = part.rng
    N = part.params.N
    known = part.members[BLUE]
    kb = len(known)
    if n_excluded <= N // 2:
        while True:
            x = rng.randrange(N)
            if x < kb:
                cand = known[x]
                if cand not in excluded:
                    return cand
            elif x < kb + pending:
                if not reject_pending:
                    return -(x - kb + 1)
            else:
                return None
    avail = [w for w in known if w not in excluded]
    if not reject_pending:
        avail += [-(i + 1) for i in range(pending)]
    x = rng.randrange(N - n_excluded)
    return avail[x] if x < len(avail) else None


def _resolve(plan: list[int], fresh: list[int]) -> list[int]:
    return [fresh[-p - 1] if p < 0 else p for p in plan]


class PermOracle:
    """Lazy oracle for the permutation blue core (the far-from-acyclic distribution)."""

    def __init__(self, params: Params, stream: RandomStream | None = None, partition: LazyPartition | None = None):
        if partition is None:
            partition = LazyPartition(params, (stream or RandomStream(0)).python())
        self.params = params
        self.n = params.n
        self.partition = partition
        self.images: list[dict[int, int]] = [{} for _ in range(params.d_B)]
        self.used: list[set[int]] = [set() for _ in range(params.d_B)]
        self.cache: dict[int, tuple[int, ...]] = {}
        self.blue_part: dict[int, tuple[int, ...]] = {}

    def label(self, v: int) -> int:
        return self.partition.label_of(v)

    def plan_blue(self, u: int) -> tuple[list[int], int]:
        plan: list[int] = []
        pending = 0
        for used in self.used:
            cand = _draw_blue(self.partition, used, len(used), pending, reject_pending=False)
            if cand is None:
                pending += 1
                cand = -pending
            plan.append(cand)
        return plan, pending

    def commit_blue(self, u: int, plan: list[int], fresh: list[int]) -> list[int]:
        blue = _resolve(plan, fresh)
        for img, used, w in zip(self.images, self.used, blue):
            assert w not in used, "permutation image reused"
            img[u] = w
            used.add(w)
        self.blue_part[u] = tuple(blue)
        return blue

    def query(self, v: int) -> tuple[int, ...]:
        ans = self.cache.get(v)
        if ans is not None:
            return ans
        part = self.partition
        code = part.label_of(v)
        if code == BLUE:
            red = part.first_half_sample(self.params.d_R)
            plan, pending = self.plan_blue(v)
            out = self.commit_blue(v, plan, part.fresh_many(BLUE, pending)) + red
            part.rng.shuffle(out)
        else:
            out = part.red_answer(code)
        self.cache[v] = ans = tuple(out)
        return ans


class DagOracle:
    """Lazy oracle for the acyclic order blue core.

    Blue ranks (positions in the hidden order) are assigned on demand: an unranked
    queried blue vertex gets a uniform unused rank, its blue targets are a uniform
    ``d_B``-subset of the higher ranks, and each unassigned target rank is given to
    a uniform unranked blue vertex.
    """

    def __init__(self, params: Params, stream: RandomStream | None = None, partition: LazyPartition | None = None):
        if partition is None:
            partition = LazyPartition(params, (stream or RandomStream(0)).python())
        self.params = params
        self.n = params.n
        self.partition = partition
        self.rank: dict[int, int] = {}
        self.at: dict[int, int] = {}
        self.cache: dict[int, tuple[int, ...]] = {}
        self.blue_part: dict[int, tuple[int, ...]] = {}

    def label(self, v: int) -> int:
        return self.partition.label_of(v)

    def _rank_of(self, u: int) -> int:
        r = self.rank.get(u)
        if r is not None:
            return r
        rng = self.partition.rng
        N = self.params.N
        if len(self.at) <= N // 2:
            while (r := rng.randrange(N)) in self.at:
                pass
        else:
            free = [x for x in range(N) if x not in self.at]
            r = free[rng.randrange(len(free))]
        self.rank[u] = r
        self.at[r] = u
        return r

    def plan_blue(self, u: int) -> tuple[list[int], int, list[tuple[int, int]]]:
        N = self.params.N
        ru = self._rank_of(u)
        k = min(self.params.d_B, N - 1 - ru)
        plan: list[int] = []
        assigns: list[tuple[int, int]] = []
        pending = 0
        newly: set[int] = set()

        class _Ranked:
            def __contains__(_, w):
                return w in self.rank or w in newly

        for r in self.partition.rng.sample(range(ru + 1, N), k):
            w = self.at.get(r)
            if w is None:
                w = _draw_blue(self.partition, _Ranked(), len(self.rank) + len(assigns), pending,
                               reject_pending=True)
                if w is None:
                    pending += 1
                    w = -pending
                else:
                    newly.add(w)
                assigns.append((r, w))
            plan.append(w)
        return plan, pending, assigns

    def commit_blue(self, u: int, plan: list[int], fresh: list[int], assigns: list[tuple[int, int]]) -> list[int]:
        for r, w in assigns:
            w = fresh[-w - 1] if w < 0 else w
            self.rank[w] = r
            self.at[r] = w
        blue = _resolve(plan, fresh)
        ru = self.rank[u]
        assert all(self.rank[w] > ru for w in blue), "blue arc against the hidden order"
        self.blue_part[u] = tuple(blue)
        return blue

    def in_tail(self, u: int) -> bool:
        """Whether ``u`` sits among the last ``d_B`` positions of the hidden order."""
        r = self.rank.get(u)
        return r is not None and r >= self.params.N - self.params.d_B

    def query(self, v: int) -> tuple[int, ...]:
        ans = self.cache.get(v)
        if ans is not None:
            return ans
        part = self.partition
        code = part.label_of(v)
        if code == BLUE:
            red = part.first_half_sample(self.params.d_R)
            plan, pending, assigns = self.plan_blue(v)
            out = self.commit_blue(v, plan, part.fresh_many(BLUE, pending), assigns) + red
            part.rng.shuffle(out)
        else:
            out = part.red_answer(code)
        self.cache[v] = ans = tuple(out)
        return ans


class GraphOracle:
    """Whole-vertex oracle over an explicit graph."""

    def __init__(self, g: Digraph, labels: dict[int, int] | list[int] | None = None, params: Params | None = None):
        self.g = g
        self.n = g.n
        self.labels = labels
        self.params = params

    def query(self, v: int) -> tuple[int, ...]:
        return tuple(self.g.adj[v])

    def label(self, v: int) -> int | None:
        return None if self.labels is None else self.labels[v]


def materialize(oracle: PermOracle | DagOracle | GraphOracle, limit: int = 100_000) -> Digraph:
    if oracle.n > limit:
        raise ValueError(f"refusing to materialize n={oracle.n} > limit={limit}")
    return Digraph(oracle.n, [list(oracle.query(v)) for v in range(oracle.n)])


def hidden_labels(oracle: PermOracle | DagOracle) -> list[int]:
    """Labels of every vertex (reveals the whole partition)."""
    return [oracle.partition.label_of(v) for v in range(oracle.n)]


# ----------------------------------------------------------------------------
# coupling

ANOMALIES = ("self_loop", "repeat_blue", "sigma_tail")


@dataclass
class CoupledStep:
    vertex: int
    perm: tuple[int, ...]
    dag: tuple[int, ...]
    flags: frozenset[str]


@dataclass
class CoupledRun:
    """A perm run and a dag run on one shared hidden partition.

    While the two transcripts agree, each query is answered jointly: red answers
    and the red slots of blue answers are drawn once for both sides, the blue
    slots are planned independently by each oracle, and new blue vertices are
    taken from one shared sequence of pool pops. Both answers therefore have
    their correct conditional law, and they coincide whenever both blue parts
    consist only of new vertices, which covers every surprise-free,
    anomaly-free query.
    """

    params: Params
    stream: RandomStream
    perm: PermOracle = field(init=False)
    dag: DagOracle = field(init=False)
    seen: set[int] = field(default_factory=set)
    identical: bool = True
    log: list[CoupledStep] = field(default_factory=list)

    def __post_init__(self):
        part = LazyPartition(self.params, self.stream.python())
        self.partition = part
        self.perm = PermOracle(self.params, partition=part)
        self.dag = DagOracle(self.params, partition=part)


def coupled_query(run: CoupledRun, v: int) -> tuple[tuple[int, ...], tuple[int, ...], frozenset[str]]:
    """Answer ``v`` on both sides of the coupling and log anomaly flags.

    After the transcripts have diverged, the two sides are queried independently.
    """
    perm, dag, part = run.perm, run.dag, run.partition
    if not run.identical or v in perm.cache or v in dag.cache:
        a_p, a_d = perm.query(v), dag.query(v)
    else:
        code = part.label_of(v)
        if code != BLUE:
            a_p = a_d = tuple(part.red_answer(code))
        else:
            red = part.first_half_sample(run.params.d_R)
            plan_p, pend_p = perm.plan_blue(v)
            plan_d, pend_d, assigns = dag.plan_blue(v)
            fresh = part.fresh_many(BLUE, max(pend_p, pend_d))
            list_p = perm.commit_blue(v, plan_p, fresh) + red
            list_d = dag.commit_blue(v, plan_d, fresh, assigns) + red
            order = list(range(len(list_p)))
            part.rng.shuffle(order)
            a_p = tuple(list_p[i] for i in order)
            if len(list_d) != len(list_p):
                order = list(range(len(list_d)))
                part.rng.shuffle(order)
            a_d = tuple(list_d[i] for i in order)
        perm.cache[v] = a_p
        dag.cache[v] = a_d
    flags = set()
    if run.identical:
        if any(w in run.seen for w in a_p):
            flags.add("surprise_perm")
        if any(w in run.seen for w in a_d):
            flags.add("surprise_dag")
    blue_p = perm.blue_part.get(v, ())
    if v in blue_p:
        flags.add("self_loop")
    if len(set(blue_p)) < len(blue_p):
        flags.add("repeat_blue")
    if dag.in_tail(v):
        flags.add("sigma_tail")
    if run.identical:
        if a_p != a_d:
            run.identical = False
            flags.add("diverged")
        run.seen.add(v)
        run.seen.update(a_p)
    frozen = frozenset(flags)
    run.log.append(CoupledStep(v, a_p, a_d, frozen))
    return a_p, a_d, frozen


# ----------------------------------------------------------------------------
# eager samplers (independent reference implementations)

@dataclass
class HiddenInstance:
    params: Params
    labels: list[int]
    blue_rank: dict[int, int] | None = None

    def __post_init__(self):
        counts = [0] * (self.params.L + 1)
        for c in self.labels:
            counts[c] += 1
        assert counts == [self.params.N, *self.params.layer_sizes], "label counts do not match params"
        if self.blue_rank is not None:
            blues = [v for v, c in enumerate(self.labels) if c == BLUE]
            assert sorted(self.blue_rank) == blues
            assert sorted(self.blue_rank.values()) == list(range(self.params.N))

    @property
    def blue(self) -> list[int]:
        return [v for v, c in enumerate(self.labels) if c == BLUE]

    def layer(self, i: int) -> list[int]:
        return [v for v, c in enumerate(self.labels) if c == i]


def sample_partition(params: Params, stream: RandomStream) -> HiddenInstance:
    rng = stream.numpy()
    codes = [BLUE] * params.N
    for i, size in enumerate(params.layer_sizes, start=1):
        codes += [i] * size
    shuffled = rng.permutation(params.n)
    labels = [0] * params.n
    for slot, v in enumerate(shuffled):
        labels[int(v)] = codes[slot]
    return HiddenInstance(params, labels)


def _eager_red(hidden: HiddenInstance, layer: int, rng) -> list[int]:
    p = hidden.params
    T = p.half
    if layer > T:
        return []
    layers = {c: hidden.layer(c) for c in range(layer + 1, layer + T + 1)}
    k = min(p.d, sum(len(x) for x in layers.values()))
    out: list[int] = []
    while len(out) < k:
        members = layers[layer + 1 + int(rng.integers(T))]
        v = members[int(rng.integers(len(members)))]
        if v not in out:
            out.append(v)
    return out


def _eager_sample(params: Params, stream: RandomStream, dag: bool) -> tuple[Digraph, HiddenInstance]:
    hidden = sample_partition(params, stream.child(0))
    rng = stream.child(1).numpy()
    blue = hidden.blue
    first_half = [v for v, c in enumerate(hidden.labels) if 1 <= c <= params.half]
    if dag:
        order = [blue[int(i)] for i in rng.permutation(len(blue))]
        hidden.blue_rank = {v: r for r, v in enumerate(order)}
    else:
        perms = [[blue[int(i)] for i in rng.permutation(len(blue))] for _ in range(params.d_B)]
        where = {v: i for i, v in enumerate(blue)}
    adj: list[list[int]] = []
    for v, code in enumerate(hidden.labels):
        if code != BLUE:
            adj.append(_eager_red(hidden, code, rng))
            continue
        if dag:
            later = order[hidden.blue_rank[v] + 1:]
            k = min(params.d_B, len(later))
            bl = [later[int(i)] for i in rng.choice(len(later), size=k, replace=False)] if k else []
        else:
            bl = [pi[where[v]] for pi in perms]
        k = min(params.d_R, len(first_half))
        red = [first_half[int(i)] for i in rng.choice(len(first_half), size=k, replace=False)]
        out = bl + red
        adj.append([out[int(i)] for i in rng.permutation(len(out))])
    return Digraph(params.n, adj), hidden


def sample_perm_graph(params: Params, stream: RandomStream) -> tuple[Digraph, HiddenInstance]:
    """Eagerly sampled far-from-acyclic instance (reference for lazy-sampler audits)."""
    return _eager_sample(params, stream, dag=False)


def sample_dag_graph(params: Params, stream: RandomStream) -> tuple[Digraph, HiddenInstance]:
    """Eagerly sampled acyclic instance (reference for lazy-sampler audits)."""
    return _eager_sample(params, stream, dag=True)


# ----------------------------------------------------------------------------

def cancellation_enumerate(N: int, d_B: int, P: set[int] | frozenset[int], u: int) -> dict[frozenset[int], Fraction]:
    """Exact law of the blue out-set of ``u`` given ``P`` precedes ``u`` and ``u`` is not in the tail.

    Enumerates all ``N!`` orders of the blue vertices ``0..N-1`` and every
    ``d_B``-subset choice, in rational arithmetic.
    """
    if N > 8:
        raise ValueError("exhaustive enumeration is limited to N <= 8")
    P = frozenset(P)
    if u in P or not 0 <= u < N or any(not 0 <= p < N for p in P):
        raise ValueError("u must be a blue vertex outside P")
    mass: dict[frozenset[int], Fraction] = {}
    total = Fraction(0)
    w_order = Fraction(1, math.factorial(N))
    for order in itertools.permutations(range(N)):
        pos = order.index(u)
        if any(order.index(p) > pos for p in P):
            continue
        later = order[pos + 1:]
        if len(later) < d_B:
            continue
        subsets = list(itertools.combinations(later, d_B))
        w = w_order / len(subsets)
        for s in subsets:
            key = frozenset(s)
            mass[key] = mass.get(key, Fraction(0)) + w
            total += w
    return {k: v / total for k, v in mass.items()}
